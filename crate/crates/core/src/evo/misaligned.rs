use nalgebra::{Matrix4, Vector4};

use super::{equilibrium_residual, residual_norm, EvoEquilibrium, EvoKind, RESIDUAL_TOL};
use crate::error::{Error, Result};
use crate::model::{EvoConfig, TraitModel};

/// Multistart settings for the misaligned search.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MisalignedOptions {
    /// Starts per axis.
    pub grid: usize,
    /// The box is (0, box_widths * max(sigma_K1, sigma_K2)].
    pub box_widths: f64,
    pub max_iterations: usize,
    pub max_halvings: usize,
    pub tol: f64,
    pub dedupe: f64,
}

impl Default for MisalignedOptions {
    fn default() -> Self {
        Self {
            grid: 21,
            box_widths: 6.0,
            max_iterations: 100,
            max_halvings: 30,
            tol: 1e-11,
            dedupe: 1e-6,
        }
    }
}

/// Population densities implied by (u1, u2) through the x2/x1 ratio of the
/// two trait equations and the host growth equation.
fn densities(u: [f64; 2], cfg: &EvoConfig) -> Option<(f64, f64)> {
    let [u1, u2] = u;
    if !(u1 > u2 && u2 > 0.0) {
        return None;
    }
    let t: &TraitModel = &cfg.traits;
    let k1 = t.k1_raw(u1).value;
    let k2 = t.k2_raw(u2).value;
    let a = t.a_raw(u1, u2).value;
    let g = (cfg.e * cfg.r1 * t.sigma_k2.powi(2) * u1 * k2
        / (cfg.r2 * t.sigma_k1.powi(2) * u2 * k1))
        .sqrt();
    // Positive root of r1 (1 - x/K1)(1 + h a x) = a g x.
    let x1 = if cfg.h > 0.0 {
        let ha = cfg.h * a;
        let b = k1 - 1.0 / ha - g * k1 / (cfg.r1 * cfg.h);
        0.5 * (b + (b * b + 4.0 * k1 / ha).sqrt())
    } else {
        cfg.r1 / (cfg.r1 / k1 + a * g)
    };
    let x2 = g * x1;
    (x1.is_finite() && x2.is_finite() && x1 > 0.0).then_some((x1, x2))
}

/// Parasite growth rate and host selection gradient at the implied densities.
fn reduced(u: [f64; 2], cfg: &EvoConfig) -> Option<[f64; 2]> {
    let (x1, x2) = densities(u, cfg)?;
    let r = equilibrium_residual([x1, x2, u[0], u[1]], cfg);
    Some([r[1] / x2, r[2]])
}

fn norm2(v: [f64; 2]) -> f64 {
    v[0].abs().max(v[1].abs())
}

fn newton2(start: [f64; 2], cfg: &EvoConfig, opt: &MisalignedOptions) -> Option<[f64; 2]> {
    let mut u = start;
    let mut f = reduced(u, cfg)?;
    for _ in 0..opt.max_iterations {
        if norm2(f) < opt.tol {
            return Some(u);
        }
        let mut jac = [[0.0; 2]; 2];
        for j in 0..2 {
            let h = 1e-7 * u[j].abs().max(1e-3);
            let mut up = u;
            let mut um = u;
            up[j] += h;
            um[j] -= h;
            let fp = reduced(up, cfg)?;
            let fm = reduced(um, cfg)?;
            for i in 0..2 {
                jac[i][j] = (fp[i] - fm[i]) / (up[j] - um[j]);
            }
        }
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let step = [
            (jac[1][1] * f[0] - jac[0][1] * f[1]) / det,
            (-jac[1][0] * f[0] + jac[0][0] * f[1]) / det,
        ];
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..=opt.max_halvings {
            let trial = [u[0] - lambda * step[0], u[1] - lambda * step[1]];
            if let Some(ft) = reduced(trial, cfg) {
                if norm2(ft) < norm2(f) {
                    u = trial;
                    f = ft;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            return None;
        }
    }
    (norm2(f) < opt.tol).then_some(u)
}

/// Newton on the full four-dimensional residual to remove the error left by
/// the reduced solve.
fn polish(mut s: [f64; 4], cfg: &EvoConfig) -> [f64; 4] {
    let mut res = residual_norm(s, cfg);
    for _ in 0..5 {
        if res < 1e-14 {
            break;
        }
        let jac = crate::stability::numeric_jacobian(|y| equilibrium_residual(y, cfg), s);
        let m = Matrix4::from_fn(|i, j| jac[i][j]);
        let f = Vector4::from(equilibrium_residual(s, cfg));
        let Some(step) = m.lu().solve(&f) else { break };
        let trial = [s[0] - step[0], s[1] - step[1], s[2] - step[2], s[3] - step[3]];
        let rt = residual_norm(trial, cfg);
        if rt < res {
            s = trial;
            res = rt;
        } else {
            break;
        }
    }
    s
}

/// Interior equilibria with nonzero traits. Solutions are sought with
/// u1 > u2 > 0 and reflected to the negative quadrant. Sorted by u1, then u2.
pub fn misaligned_interior_solve(cfg: &EvoConfig, opt: &MisalignedOptions) -> Result<Vec<EvoEquilibrium>> {
    cfg.validate()?;
    if !cfg.traits.is_gaussian() {
        return Err(Error::RequiresGaussian);
    }
    if cfg.r2 <= 0.0 {
        return Ok(vec![]);
    }
    let width = opt.box_widths * cfg.traits.sigma_k1.max(cfg.traits.sigma_k2);
    let mut found: Vec<[f64; 4]> = Vec::new();
    for i in 1..=opt.grid {
        for j in 1..=opt.grid {
            let u1 = width * i as f64 / opt.grid as f64;
            let u2 = width * j as f64 / opt.grid as f64;
            if u2 >= u1 {
                continue;
            }
            let Some(u) = newton2([u1, u2], cfg, opt) else { continue };
            let Some((x1, x2)) = densities(u, cfg) else { continue };
            let s = polish([x1, x2, u[0], u[1]], cfg);
            if residual_norm(s, cfg) >= RESIDUAL_TOL || s[0] <= 0.0 || s[1] <= 0.0 {
                continue;
            }
            let dup = found
                .iter()
                .any(|f| (f[2] - s[2]).abs() < opt.dedupe && (f[3] - s[3]).abs() < opt.dedupe);
            if !dup {
                found.push(s);
            }
        }
    }
    let mirrored: Vec<[f64; 4]> = found.iter().map(|s| [s[0], s[1], -s[2], -s[3]]).collect();
    found.extend(mirrored);
    found.sort_by(|a, b| a[2].total_cmp(&b[2]).then(a[3].total_cmp(&b[3])));
    Ok(found
        .into_iter()
        .map(|s| EvoEquilibrium::build(EvoKind::InteriorMisaligned, s, None, cfg))
        .collect())
}
