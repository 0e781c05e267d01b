use serde::{Deserialize, Serialize};

use super::EvoEquilibrium;
use crate::error::Result;
use crate::model::{fitness_g1, fitness_g2, EvoConfig, TraitFamily};

pub const ESS_GRID_POINTS: usize = 2001;
pub const ESS_TOL: f64 = 1e-6;
const FINE_POINTS: usize = 201;
const REFINE_WIDTH: f64 = 1e-10;
/// Densities at or below this are treated as extinct.
const EXTINCT: f64 = 1e-12;

/// Maximum of one species' fitness over its trait domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpeciesMax {
    pub species: u8,
    pub extinct: bool,
    pub max_value: f64,
    pub argmax: f64,
    pub resident: f64,
    pub value_at_resident: f64,
    pub passes: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EssMethod {
    pub grid_points: usize,
    pub fine_points: usize,
    pub refine_iterations: [usize; 2],
    pub domains: [[f64; 2]; 2],
    /// For unbounded trait spaces: whether fitness is non-increasing outward
    /// at both ends of each scanned interval.
    pub endpoint_decay: Option<bool>,
    pub tol: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EssVerdict {
    pub species: [SpeciesMax; 2],
    pub principle_holds: bool,
    pub cs: bool,
    pub ess: bool,
    pub method: EssMethod,
}

struct Scan {
    max_value: f64,
    argmax: f64,
    iterations: usize,
    decays: bool,
}

fn scan(g: &dyn Fn(f64) -> Result<f64>, lo: f64, hi: f64, focus: &[(f64, f64)]) -> Result<Scan> {
    let mut pts: Vec<f64> = (0..ESS_GRID_POINTS)
        .map(|k| lo + (hi - lo) * k as f64 / (ESS_GRID_POINTS - 1) as f64)
        .collect();
    for &(centre, half) in focus {
        for k in 0..FINE_POINTS {
            let v = centre - half + 2.0 * half * k as f64 / (FINE_POINTS - 1) as f64;
            if v >= lo && v <= hi {
                pts.push(v);
            }
        }
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let vals: Vec<f64> = pts.iter().map(|v| g(*v)).collect::<Result<_>>()?;
    let (best, _) = vals
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, v)| if *v > bv { (i, *v) } else { (bi, bv) });
    let n = pts.len();
    let decays = vals[0] <= vals[1] && vals[n - 1] <= vals[n - 2];

    // Golden-section refinement inside the neighbouring bracket.
    let mut a = pts[best.saturating_sub(1)];
    let mut b = pts[(best + 1).min(n - 1)];
    let mut best_v = vals[best];
    let mut best_x = pts[best];
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut iterations = 0;
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let mut gc = g(c)?;
    let mut gd = g(d)?;
    while b - a > REFINE_WIDTH && iterations < 200 {
        iterations += 1;
        if gc > gd {
            b = d;
            d = c;
            gd = gc;
            c = b - phi * (b - a);
            gc = g(c)?;
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + phi * (b - a);
            gd = g(d)?;
        }
    }
    for (x, v) in [(c, gc), (d, gd)] {
        if v > best_v {
            best_v = v;
            best_x = x;
        }
    }
    Ok(Scan { max_value: best_v, argmax: best_x, iterations, decays })
}

/// Checks the ESS maximum principle at an equilibrium: each species' fitness,
/// with the residents fixed at u*, must peak at its own resident trait, at
/// zero for surviving species and at most zero for extinct ones.
pub fn ess_check(eq: &EvoEquilibrium, cfg: &EvoConfig) -> Result<EssVerdict> {
    cfg.validate()?;
    let [x1, x2, u1, u2] = eq.state;
    let u = [u1, u2];
    let x = [x1, x2];
    let t = &cfg.traits;
    let unbounded = !matches!(t.family, TraitFamily::BoundedQuartic { .. });
    let widest = t.sigma_k1.max(t.sigma_k2).max(t.sigma_a);
    let domain = |resident: f64| -> [f64; 2] {
        match t.family {
            TraitFamily::BoundedQuartic { c } => [0.0, c],
            _ => {
                let half = 10.0 * widest + resident.abs();
                [-half, half]
            }
        }
    };
    let shift = match t.family {
        TraitFamily::AsymmetricGaussian { beta } => t.sigma_a * t.sigma_a * beta,
        _ => 0.0,
    };

    let g1 = |v: f64| fitness_g1(v, u, x, cfg);
    let g2 = |v: f64| fitness_g2(v, u, x, cfg);
    let d1 = domain(u1);
    let d2 = domain(u2);
    // Resolve the efficiency peak and the carrying-capacity optimum densely.
    let focus1 = [(u2 - shift, 5.0 * t.sigma_a), (0.0, 5.0 * t.sigma_k1), (u1, 5.0 * t.sigma_a)];
    let focus2 = [(u1 + shift, 5.0 * t.sigma_a), (0.0, 5.0 * t.sigma_k2), (u2, 5.0 * t.sigma_a)];
    let s1 = scan(&g1, d1[0], d1[1], &focus1)?;
    let s2 = scan(&g2, d2[0], d2[1], &focus2)?;

    let judge = |species: u8, s: &Scan, resident: f64, at: f64, density: f64| {
        let extinct = density <= EXTINCT;
        let max_value = s.max_value.max(at);
        let argmax = if at >= s.max_value { resident } else { s.argmax };
        let attained = at >= max_value - ESS_TOL;
        let passes = if extinct {
            max_value <= ESS_TOL && attained
        } else {
            max_value.abs() <= ESS_TOL && attained
        };
        SpeciesMax { species, extinct, max_value, argmax, resident, value_at_resident: at, passes }
    };
    let sp1 = judge(1, &s1, u1, g1(u1)?, x1);
    let sp2 = judge(2, &s2, u2, g2(u2)?, x2);
    let endpoint_decay = unbounded.then_some(s1.decays && s2.decays);
    let principle_holds = sp1.passes && sp2.passes && endpoint_decay.unwrap_or(true);
    Ok(EssVerdict {
        principle_holds,
        cs: eq.cs,
        ess: eq.cs && principle_holds,
        species: [sp1, sp2],
        method: EssMethod {
            grid_points: ESS_GRID_POINTS,
            fine_points: FINE_POINTS,
            refine_iterations: [s1.iterations, s2.iterations],
            domains: [d1, d2],
            endpoint_decay,
            tol: ESS_TOL,
        },
    })
}
