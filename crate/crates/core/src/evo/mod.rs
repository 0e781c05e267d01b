//! Equilibria, convergence stability and ESS checks for the co-evolutionary system.

mod aligned;
mod boundary;
mod ess;
mod misaligned;
mod sufficient;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use aligned::aligned_equilibria;
pub use boundary::{boundary_evo_equilibria, BoundaryScan, RejectedCandidate};
pub use ess::{ess_check, EssMethod, EssVerdict, SpeciesMax, ESS_GRID_POINTS, ESS_TOL};
pub use misaligned::{misaligned_interior_solve, MisalignedOptions};
pub use sufficient::ess_sufficient_conditions;

use crate::conditions::ConditionReport;
use crate::model::{evo_rhs_raw, EvoConfig};
use crate::stability::{classify, eigenvalues, numeric_jacobian, StabilityClass};

/// Maximum residual accepted for a returned equilibrium.
pub const RESIDUAL_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EvoKind {
    E0000,
    HostOnly,
    ParasiteOnly,
    InteriorAligned,
    InteriorMisaligned,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvoEquilibrium {
    pub kind: EvoKind,
    /// (x1, x2, u1, u2)
    pub state: [f64; 4],
    /// Eigenvalues of the central-difference Jacobian; these decide `cs`.
    pub eigenvalues: Vec<Complex64>,
    /// Closed-form eigenvalues where available.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub analytic_eigenvalues: Option<Vec<Complex64>>,
    pub class: StabilityClass,
    pub cs: bool,
    /// Max of |dx1|, |dx2|, |dG1/dv1|, |dG2/dv2| at the state.
    pub residual: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub ess: Option<EssVerdict>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub conditions: Option<ConditionReport>,
}

/// Population derivatives and the two selection gradients; zero exactly at
/// equilibria regardless of the evolutionary speeds.
pub(crate) fn equilibrium_residual(s: [f64; 4], cfg: &EvoConfig) -> [f64; 4] {
    let unit = EvoConfig { sigma1_sq: 1.0, sigma2_sq: 1.0, ..*cfg };
    evo_rhs_raw(s, &unit)
}

pub(crate) fn residual_norm(s: [f64; 4], cfg: &EvoConfig) -> f64 {
    equilibrium_residual(s, cfg).iter().fold(0.0, |m, v| m.max(v.abs()))
}

pub(crate) fn jacobian(s: [f64; 4], cfg: &EvoConfig) -> [[f64; 4]; 4] {
    numeric_jacobian(|y| evo_rhs_raw(y, cfg), s)
}

impl EvoEquilibrium {
    pub(crate) fn build(
        kind: EvoKind,
        state: [f64; 4],
        analytic: Option<Vec<Complex64>>,
        cfg: &EvoConfig,
    ) -> Self {
        let eigs = eigenvalues(&jacobian(state, cfg));
        let class = classify(&eigs);
        Self {
            kind,
            state,
            eigenvalues: eigs,
            analytic_eigenvalues: analytic.map(|mut a| {
                crate::stability::sort_eigenvalues(&mut a);
                a
            }),
            class,
            cs: class.is_stable(),
            residual: residual_norm(state, cfg),
            ess: None,
            conditions: None,
        }
    }

    /// Relative distance between numeric and analytic spectra, if both exist.
    pub fn analytic_mismatch(&self) -> Option<f64> {
        self.analytic_eigenvalues
            .as_ref()
            .map(|a| crate::stability::spectrum_distance(a, &self.eigenvalues))
    }
}

/// All equilibria the library can locate for a configuration: the boundary
/// scan, and for the Gaussian family the aligned and misaligned solutions.
pub fn all_evo_equilibria(cfg: &EvoConfig) -> crate::Result<Vec<EvoEquilibrium>> {
    cfg.validate()?;
    let mut out = Vec::new();
    if cfg.traits.is_gaussian() {
        out.extend(aligned_equilibria(cfg)?);
        out.extend(misaligned_interior_solve(cfg, &MisalignedOptions::default())?);
    } else {
        out.extend(boundary_evo_equilibria(cfg)?.equilibria);
    }
    Ok(out)
}
