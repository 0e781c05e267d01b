use num_complex::Complex64;

use super::{EvoEquilibrium, EvoKind};
use crate::eco::{eco_jacobian, interior_equilibria};
use crate::error::{Error, Result};
use crate::model::EvoConfig;
use crate::stability::{eigenvalues_2x2, sort_eigenvalues};

fn real(v: &[f64]) -> Vec<Complex64> {
    v.iter().map(|x| Complex64::new(*x, 0.0)).collect()
}

/// Equilibria with both traits at the common optimum u* = (0, 0) for the
/// Gaussian family, classified from the ecological block A and trait block B.
pub fn aligned_equilibria(cfg: &EvoConfig) -> Result<Vec<EvoEquilibrium>> {
    cfg.validate()?;
    if !cfg.traits.is_gaussian() {
        return Err(Error::RequiresGaussian);
    }
    let t = &cfg.traits;
    let p = cfg.peak_params();
    let (s1, s2) = (cfg.sigma1_sq, cfg.sigma2_sq);
    let sk1 = t.sigma_k1 * t.sigma_k1;
    let sk2 = t.sigma_k2 * t.sigma_k2;
    let sa = t.sigma_a * t.sigma_a;
    let mut out = Vec::new();

    out.push(EvoEquilibrium::build(
        EvoKind::E0000,
        [0.0, 0.0, 0.0, 0.0],
        Some(real(&[p.r1, p.r2 - p.d, 0.0, 0.0])),
        cfg,
    ));

    let den = 1.0 + p.a * p.h * p.k1;
    let mut host = EvoEquilibrium::build(
        EvoKind::HostOnly,
        [p.k1, 0.0, 0.0, 0.0],
        Some(real(&[
            -p.r1,
            p.r2 - p.d + p.host_gain_at_k1(),
            -s1 * p.r1 / sk1,
            -s2 * p.e * p.k1 * p.a / (sa * den * den),
        ])),
        cfg,
    );
    host.conditions = Some(super::ess_sufficient_conditions(cfg, &host)?);
    out.push(host);

    if p.is_facultative() {
        let x2 = p.parasite_only_density();
        out.push(EvoEquilibrium::build(
            EvoKind::ParasiteOnly,
            [0.0, x2, 0.0, 0.0],
            Some(real(&[
                p.r1 - p.a * x2,
                p.d - p.r2,
                s1 * x2 * p.a / sa,
                -s2 * (p.r2 - p.d) / sk2,
            ])),
            cfg,
        ));
    }

    for eq in interior_equilibria(&p)? {
        let [x1, x2] = eq.location;
        let dd = (1.0 + p.a * p.h * x1).powi(2);
        let b = [
            [
                s1 * (-p.r1 * x1 / (sk1 * p.k1) + p.a * x2 / (sa * dd)),
                -s1 * p.a * x2 / (sa * dd),
            ],
            [
                s2 * p.e * p.a * x1 / (sa * dd),
                -s2 * (p.r2 * x2 / (sk2 * p.k2) + p.a * p.e * x1 / (sa * dd)),
            ],
        ];
        let mut analytic = eigenvalues_2x2(eco_jacobian([x1, x2], &p));
        analytic.extend(eigenvalues_2x2(b));
        sort_eigenvalues(&mut analytic);
        let mut e = EvoEquilibrium::build(EvoKind::InteriorAligned, [x1, x2, 0.0, 0.0], Some(analytic), cfg);
        e.conditions = Some(super::ess_sufficient_conditions(cfg, &e)?);
        out.push(e);
    }
    Ok(out)
}
