//! Independent reference implementations and generators shared by the
//! integration tests. Nothing here calls into the library's formulas.
#![allow(dead_code)]

use coevo::model::{DeathRate, EcoParams, EvoConfig, TraitFamily, TraitModel};
use proptest::prelude::*;

pub fn two_interior() -> EcoParams {
    EcoParams { r1: 1.0, r2: 0.25, k1: 1.0, k2: 1.0, a: 5.0, h: 4.0, e: 0.9, d: 0.185 }
}

/// Trait functions written directly from their closed forms.
pub fn k_ref(t: &TraitModel, which: usize, v: f64) -> f64 {
    let (k0, s) = if which == 1 { (t.k01, t.sigma_k1) } else { (t.k02, t.sigma_k2) };
    match t.family {
        TraitFamily::BoundedQuartic { c } => k0 * (-(v * v) * (v - c) * (v - c) / (2.0 * s * s)).exp(),
        _ => k0 * (-(v * v) / (2.0 * s * s)).exp(),
    }
}

pub fn a_ref(t: &TraitModel, v1: f64, v2: f64) -> f64 {
    let w = v1 - v2;
    let sa = t.sigma_a;
    match t.family {
        TraitFamily::Gaussian => t.a0 * (-(w * w) / (2.0 * sa * sa)).exp(),
        TraitFamily::AsymmetricGaussian { beta } => {
            let b = sa * sa * beta;
            t.a0 * (b * b / 2.0).exp() * (-(w + b) * (w + b) / (2.0 * sa * sa)).exp()
        }
        TraitFamily::BoundedQuartic { c } => {
            t.a0 * (-(w + c).powi(2) * (w - c).powi(2) / (2.0 * sa.powi(4))).exp()
        }
    }
}

pub fn d_ref(t: &TraitModel, v: f64) -> f64 {
    match (t.death, t.family) {
        (DeathRate::Constant(d), _) => d,
        (DeathRate::Quartic { d0, sigma_d }, TraitFamily::BoundedQuartic { c }) => {
            d0 * (-(v - c).powi(2) * (v + c).powi(2) / (2.0 * sigma_d * sigma_d)).exp()
        }
        _ => unreachable!(),
    }
}

pub fn g1_ref(cfg: &EvoConfig, v1: f64, u: [f64; 2], x: [f64; 2]) -> f64 {
    let t = &cfg.traits;
    let a = a_ref(t, v1, u[1]);
    cfg.r1 * (1.0 - x[0] / k_ref(t, 1, v1)) - a * x[1] / (1.0 + cfg.h * a * x[0])
}

pub fn g2_ref(cfg: &EvoConfig, v2: f64, u: [f64; 2], x: [f64; 2]) -> f64 {
    let t = &cfg.traits;
    let a = a_ref(t, u[0], v2);
    cfg.e * a * x[0] / (1.0 + cfg.h * a * x[0]) - d_ref(t, v2) + cfg.r2 * (1.0 - x[1] / k_ref(t, 2, v2))
}

pub fn eco_rhs_ref(p: &EcoParams, x: [f64; 2]) -> [f64; 2] {
    let sat = p.a * x[0] / (1.0 + p.h * p.a * x[0]);
    [
        x[0] * (p.r1 * (1.0 - x[0] / p.k1) - p.a * x[1] / (1.0 + p.h * p.a * x[0])),
        x[1] * (p.e * sat - p.d + p.r2 * (1.0 - x[1] / p.k2)),
    ]
}

/// Interior equilibria located as sign changes of g - f on a fine grid,
/// refined by bisection. f is the host nullcline and g the parasite one.
pub fn nullcline_roots(p: &EcoParams, n: usize) -> Vec<f64> {
    let f = |x: f64| p.r1 * (p.k1 - x) * (1.0 + p.a * p.h * x) / (p.a * p.k1);
    let g = |x: f64| p.k2 / p.r2 * (p.e * p.a * x / (1.0 + p.h * p.a * x) + p.r2 - p.d);
    let diff = |x: f64| g(x) - f(x);
    let mut out = Vec::new();
    let xs: Vec<f64> = (1..n).map(|k| p.k1 * k as f64 / n as f64).collect();
    for w in xs.windows(2) {
        let (mut lo, mut hi) = (w[0], w[1]);
        let (flo, fhi) = (diff(lo), diff(hi));
        if flo == 0.0 {
            out.push(lo);
            continue;
        }
        if flo * fhi < 0.0 {
            for _ in 0..200 {
                let m = 0.5 * (lo + hi);
                if diff(m) * flo > 0.0 {
                    lo = m;
                } else {
                    hi = m;
                }
            }
            out.push(0.5 * (lo + hi));
        }
    }
    out.retain(|&x| f(x) > 0.0);
    out
}

pub fn fd(f: impl Fn(f64) -> f64, v: f64) -> f64 {
    let h = 1e-6 * v.abs().max(1.0);
    (f(v + h) - f(v - h)) / (2.0 * h)
}

pub fn eco_params() -> impl Strategy<Value = EcoParams> {
    (
        0.1f64..3.0,
        0.01f64..2.0,
        0.2f64..3.0,
        0.2f64..3.0,
        0.1f64..8.0,
        0.0f64..5.0,
        0.05f64..1.0,
        0.0f64..2.0,
    )
        .prop_map(|(r1, r2, k1, k2, a, h, e, d)| EcoParams { r1, r2, k1, k2, a, h, e, d })
}

pub fn family() -> impl Strategy<Value = TraitFamily> {
    prop_oneof![
        Just(TraitFamily::Gaussian),
        (-2.0f64..2.0).prop_map(|beta| TraitFamily::AsymmetricGaussian { beta }),
        (0.3f64..2.0).prop_map(|c| TraitFamily::BoundedQuartic { c }),
    ]
}

pub fn evo_config() -> impl Strategy<Value = EvoConfig> {
    (
        family(),
        (0.3f64..2.0, 0.3f64..2.0, 0.5f64..5.0),
        (0.3f64..2.0, 0.3f64..2.0, 0.3f64..2.0),
        (0.1f64..2.0, 0.05f64..1.5, 0.0f64..3.0, 0.1f64..1.0),
        (0.0f64..1.0, any::<bool>(), 0.5f64..2.0, 0.3f64..1.5),
    )
        .prop_map(|(family, (k01, k02, a0), (sk1, sk2, sa), (r1, r2, h, e), (d, quartic, d0, sd))| {
            let death = match (family, quartic) {
                (TraitFamily::BoundedQuartic { .. }, true) => DeathRate::Quartic { d0, sigma_d: sd },
                _ => DeathRate::Constant(d),
            };
            EvoConfig {
                r1,
                r2,
                h,
                e,
                traits: TraitModel {
                    family,
                    k01,
                    k02,
                    a0,
                    sigma_k1: sk1,
                    sigma_k2: sk2,
                    sigma_a: sa,
                    death,
                },
                sigma1_sq: 1.0,
                sigma2_sq: 1.0,
            }
        })
}

/// A trait value inside the domain of `cfg`, from a unit-interval draw.
pub fn trait_in_domain(cfg: &EvoConfig, t: f64) -> f64 {
    match cfg.traits.family {
        TraitFamily::BoundedQuartic { c } => c * (0.02 + 0.96 * t),
        _ => 6.0 * (t - 0.5),
    }
}

pub fn cases(n: u32) -> ProptestConfig {
    ProptestConfig { cases: n, failure_persistence: None, ..ProptestConfig::default() }
}
