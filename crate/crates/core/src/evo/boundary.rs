use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{residual_norm, EvoEquilibrium, EvoKind, RESIDUAL_TOL};
use crate::error::Result;
use crate::model::{EvoConfig, TraitFamily};

/// A candidate that failed an existence requirement.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RejectedCandidate {
    pub kind: EvoKind,
    pub traits: [f64; 2],
    pub residual: f64,
    pub reason: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundaryScan {
    pub equilibria: Vec<EvoEquilibrium>,
    pub rejected: Vec<RejectedCandidate>,
}

fn candidates(cfg: &EvoConfig) -> Vec<[f64; 2]> {
    match cfg.traits.family {
        TraitFamily::BoundedQuartic { c } => vec![[0.0, 0.0], [0.0, c], [c, 0.0], [c, c]],
        _ => vec![[0.0, 0.0]],
    }
}

fn real(v: &[f64]) -> Vec<Complex64> {
    v.iter().map(|x| Complex64::new(*x, 0.0)).collect()
}

/// Host-only and parasite-only equilibria at the candidate trait pairs,
/// classified by the closed-form eigenvalues and the numeric Jacobian.
pub fn boundary_evo_equilibria(cfg: &EvoConfig) -> Result<BoundaryScan> {
    cfg.validate()?;
    let t = &cfg.traits;
    let (s1, s2) = (cfg.sigma1_sq, cfg.sigma2_sq);
    let mut scan = BoundaryScan::default();
    for [u, v] in candidates(cfg) {
        let k1 = t.k1(u)?;
        let k2 = t.k2(v)?;
        let a = t.a(u, v)?;
        let d = t.d(v)?;

        // Host only: (K1(u), 0, u, v).
        let state = [k1.value, 0.0, u, v];
        let res = residual_norm(state, cfg);
        if res < RESIDUAL_TOL {
            let den = 1.0 + cfg.h * a.value * k1.value;
            let analytic = real(&[
                -cfg.r1,
                cfg.e * a.value * k1.value / den - d.value + cfg.r2,
                s1 * cfg.r1 * k1.d2 / k1.value,
                s2 * cfg.e * k1.value
                    * (a.d_v2v2 * den - 2.0 * cfg.h * k1.value * a.d_v2 * a.d_v2)
                    / den.powi(3)
                    - s2 * d.d2,
            ]);
            scan.equilibria.push(EvoEquilibrium::build(EvoKind::HostOnly, state, Some(analytic), cfg));
        } else {
            scan.rejected.push(RejectedCandidate {
                kind: EvoKind::HostOnly,
                traits: [u, v],
                residual: res,
                reason: "selection gradient does not vanish".into(),
            });
        }

        // Parasite only: (0, K2(v)(1 - d(v)/r2), u, v).
        if !(cfg.r2 > d.value) {
            scan.rejected.push(RejectedCandidate {
                kind: EvoKind::ParasiteOnly,
                traits: [u, v],
                residual: f64::NAN,
                reason: format!("d(v) = {} is not below r2 = {}", d.value, cfg.r2),
            });
            continue;
        }
        let ratio = 1.0 - d.value / cfg.r2;
        let x2 = k2.value * ratio;
        let state = [0.0, x2, u, v];
        let res = residual_norm(state, cfg);
        if res < RESIDUAL_TOL {
            let analytic = real(&[
                cfg.r1 - a.value * x2,
                d.value - cfg.r2,
                -s1 * x2 * a.d_v1v1,
                s2 * cfg.r2 * ratio * (k2.value * k2.d2 - 2.0 * k2.d1 * k2.d1)
                    / (k2.value * k2.value)
                    - s2 * d.d2,
            ]);
            scan.equilibria.push(EvoEquilibrium::build(
                EvoKind::ParasiteOnly,
                state,
                Some(analytic),
                cfg,
            ));
        } else {
            scan.rejected.push(RejectedCandidate {
                kind: EvoKind::ParasiteOnly,
                traits: [u, v],
                residual: res,
                reason: "selection gradient does not vanish".into(),
            });
        }
    }
    Ok(scan)
}
