//! Parameters, trait-function families and the right-hand sides of the
//! ecological (2-D) and co-evolutionary (4-D) systems.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fixed-trait ecological constants.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EcoParams {
    /// Host intrinsic growth rate.
    pub r1: f64,
    /// Parasite intrinsic growth rate on alternative resources.
    pub r2: f64,
    pub k1: f64,
    pub k2: f64,
    /// Parasitism efficiency.
    pub a: f64,
    /// Handling time.
    pub h: f64,
    /// Conversion efficiency.
    pub e: f64,
    /// Parasite death rate from host search.
    pub d: f64,
}

impl EcoParams {
    pub const FIELDS: [&'static str; 8] = ["r1", "r2", "k1", "k2", "a", "h", "e", "d"];

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.r1, self.r2, self.k1, self.k2, self.a, self.h, self.e, self.d,
        ];
        for (name, v) in Self::FIELDS.iter().zip(finite) {
            if !v.is_finite() {
                return Err(Error::param(name, "must be finite"));
            }
        }
        if self.r1 <= 0.0 {
            return Err(Error::param("r1", "must be > 0"));
        }
        if self.r2 < 0.0 {
            return Err(Error::param("r2", "must be >= 0"));
        }
        if self.k1 <= 0.0 {
            return Err(Error::param("k1", "must be > 0"));
        }
        if self.k2 <= 0.0 {
            return Err(Error::param("k2", "must be > 0"));
        }
        if self.a < 0.0 {
            return Err(Error::param("a", "must be >= 0"));
        }
        if self.h < 0.0 {
            return Err(Error::param("h", "must be >= 0"));
        }
        if !(self.e > 0.0 && self.e <= 1.0) {
            return Err(Error::param("e", "must lie in (0, 1]"));
        }
        if self.d < 0.0 {
            return Err(Error::param("d", "must be >= 0"));
        }
        Ok(())
    }

    pub fn get(&self, name: &str) -> Result<f64> {
        Ok(match name {
            "r1" => self.r1,
            "r2" => self.r2,
            "k1" => self.k1,
            "k2" => self.k2,
            "a" => self.a,
            "h" => self.h,
            "e" => self.e,
            "d" => self.d,
            _ => return Err(Error::param(name, "unknown ecological parameter")),
        })
    }

    pub fn with(&self, name: &str, value: f64) -> Result<Self> {
        let mut p = *self;
        match name {
            "r1" => p.r1 = value,
            "r2" => p.r2 = value,
            "k1" => p.k1 = value,
            "k2" => p.k2 = value,
            "a" => p.a = value,
            "h" => p.h = value,
            "e" => p.e = value,
            "d" => p.d = value,
            _ => return Err(Error::param(name, "unknown ecological parameter")),
        }
        Ok(p)
    }

    /// Parasite carrying capacity in the absence of the host, K2(1 - d/r2).
    /// Negative infinity when r2 = 0 and d > 0.
    pub fn parasite_only_density(&self) -> f64 {
        if self.r2 > 0.0 {
            self.k2 * (1.0 - self.d / self.r2)
        } else if self.d > 0.0 {
            f64::NEG_INFINITY
        } else {
            0.0
        }
    }

    /// Saturated per-parasite gain from a host at carrying capacity, eaK1/(1+ahK1).
    pub fn host_gain_at_k1(&self) -> f64 {
        self.e * self.a * self.k1 / (1.0 + self.a * self.h * self.k1)
    }

    pub fn is_facultative(&self) -> bool {
        self.r2 > self.d
    }

    /// The equivalent parameter set with the death rate folded into r2 and K2.
    pub fn facultative_reduction(&self) -> Option<Self> {
        if !self.is_facultative() {
            return None;
        }
        Some(Self {
            r2: self.r2 - self.d,
            k2: self.k2 * (1.0 - self.d / self.r2),
            d: 0.0,
            ..*self
        })
    }
}

/// A scalar function value with first and second derivatives.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Deriv1 {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

/// Efficiency a(v1, v2) with all first and second partials.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct APartials {
    pub value: f64,
    pub d_v1: f64,
    pub d_v2: f64,
    pub d_v1v1: f64,
    pub d_v2v2: f64,
    pub d_v1v2: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum TraitFamily {
    Gaussian,
    /// Gaussian carrying capacities with a shifted efficiency peak.
    AsymmetricGaussian { beta: f64 },
    /// Quartic-exponent forms on the trait box [0, c]^2.
    BoundedQuartic { c: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DeathRate {
    Constant(f64),
    /// d0 exp(-(v-c)^2 (v+c)^2 / (2 sigma_d^2)); bounded-quartic family only.
    Quartic { d0: f64, sigma_d: f64 },
}

/// Trait-dependent carrying capacities, efficiency and death rate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraitModel {
    pub family: TraitFamily,
    pub k01: f64,
    pub k02: f64,
    pub a0: f64,
    pub sigma_k1: f64,
    pub sigma_k2: f64,
    pub sigma_a: f64,
    pub death: DeathRate,
}

/// Which trait function to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TraitFn {
    K1,
    K2,
    A,
    D,
}

fn exp_form(amp: f64, q: f64, q1: f64, q2: f64, s: f64) -> Deriv1 {
    let value = amp * (-q / s).exp();
    let g = q1 / s;
    Deriv1 {
        value,
        d1: -g * value,
        d2: (g * g - q2 / s) * value,
    }
}

fn gaussian(v: f64, amp: f64, sigma: f64) -> Deriv1 {
    exp_form(amp, v * v, 2.0 * v, 2.0, 2.0 * sigma * sigma)
}

fn quartic_k(v: f64, amp: f64, sigma: f64, c: f64) -> Deriv1 {
    let q = v * v * (v - c) * (v - c);
    let q1 = 2.0 * v * (v - c) * (2.0 * v - c);
    let q2 = 2.0 * ((2.0 * v - c).powi(2) + 2.0 * v * (v - c));
    exp_form(amp, q, q1, q2, 2.0 * sigma * sigma)
}

/// amp exp(-(w^2 - c^2)^2 / s)
fn quartic_well(w: f64, amp: f64, c: f64, s: f64) -> Deriv1 {
    let m = w * w - c * c;
    exp_form(amp, m * m, 4.0 * w * m, 4.0 * (3.0 * w * w - c * c), s)
}

fn from_difference(f: Deriv1) -> APartials {
    APartials {
        value: f.value,
        d_v1: f.d1,
        d_v2: -f.d1,
        d_v1v1: f.d2,
        d_v2v2: f.d2,
        d_v1v2: -f.d2,
    }
}

impl TraitModel {
    pub fn validate(&self) -> Result<()> {
        let pos = [
            ("k01", self.k01),
            ("k02", self.k02),
            ("a0", self.a0),
            ("sigma_k1", self.sigma_k1),
            ("sigma_k2", self.sigma_k2),
            ("sigma_a", self.sigma_a),
        ];
        for (name, v) in pos {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::param(name, "must be finite and > 0"));
            }
        }
        match self.family {
            TraitFamily::Gaussian => {}
            TraitFamily::AsymmetricGaussian { beta } => {
                if !beta.is_finite() {
                    return Err(Error::param("beta", "must be finite"));
                }
            }
            TraitFamily::BoundedQuartic { c } => {
                if !(c.is_finite() && c > 0.0) {
                    return Err(Error::param("c", "must be finite and > 0"));
                }
            }
        }
        match self.death {
            DeathRate::Constant(d) => {
                if !(d.is_finite() && d >= 0.0) {
                    return Err(Error::param("d", "must be finite and >= 0"));
                }
            }
            DeathRate::Quartic { d0, sigma_d } => {
                if !matches!(self.family, TraitFamily::BoundedQuartic { .. }) {
                    return Err(Error::param(
                        "death",
                        "quartic death rate requires the bounded_quartic family",
                    ));
                }
                if !(d0.is_finite() && d0 > 0.0) {
                    return Err(Error::param("d0", "must be finite and > 0"));
                }
                if !(sigma_d.is_finite() && sigma_d > 0.0) {
                    return Err(Error::param("sigma_d", "must be finite and > 0"));
                }
            }
        }
        Ok(())
    }

    pub fn is_gaussian(&self) -> bool {
        matches!(self.family, TraitFamily::Gaussian)
    }

    /// Trait domain as (lo, hi); infinite for the Gaussian families.
    pub fn domain(&self) -> (f64, f64) {
        match self.family {
            TraitFamily::BoundedQuartic { c } => (0.0, c),
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    fn check(&self, which: &'static str, v: f64) -> Result<()> {
        let (lo, hi) = self.domain();
        if v >= lo && v <= hi {
            Ok(())
        } else {
            Err(Error::DomainViolation { which, value: v, lo, hi })
        }
    }

    /// Supremum of K1 and K2 over the trait domain.
    pub fn k_max(&self) -> (f64, f64) {
        (self.k01, self.k02)
    }

    pub fn k1(&self, v: f64) -> Result<Deriv1> {
        self.check("v1", v)?;
        Ok(self.k1_raw(v))
    }

    pub fn k2(&self, v: f64) -> Result<Deriv1> {
        self.check("v2", v)?;
        Ok(self.k2_raw(v))
    }

    pub fn a(&self, v1: f64, v2: f64) -> Result<APartials> {
        self.check("v1", v1)?;
        self.check("v2", v2)?;
        Ok(self.a_raw(v1, v2))
    }

    pub fn d(&self, v: f64) -> Result<Deriv1> {
        self.check("v2", v)?;
        Ok(self.d_raw(v))
    }

    /// Evaluates one trait function at a trait point. For K1, K2 and d only
    /// `v[0]` is read; for a the point is (v1, v2).
    pub fn eval(&self, which: TraitFn, v: [f64; 2]) -> Result<APartials> {
        let one = |f: Deriv1| APartials {
            value: f.value,
            d_v1: f.d1,
            d_v2: 0.0,
            d_v1v1: f.d2,
            d_v2v2: 0.0,
            d_v1v2: 0.0,
        };
        match which {
            TraitFn::K1 => self.k1(v[0]).map(one),
            TraitFn::K2 => self.k2(v[0]).map(one),
            TraitFn::D => self.d(v[0]).map(one),
            TraitFn::A => self.a(v[0], v[1]),
        }
    }

    // The raw evaluators extend the formulas beyond the domain; used for
    // finite-difference stencils that straddle a boundary.
    pub(crate) fn k1_raw(&self, v: f64) -> Deriv1 {
        match self.family {
            TraitFamily::BoundedQuartic { c } => quartic_k(v, self.k01, self.sigma_k1, c),
            _ => gaussian(v, self.k01, self.sigma_k1),
        }
    }

    pub(crate) fn k2_raw(&self, v: f64) -> Deriv1 {
        match self.family {
            TraitFamily::BoundedQuartic { c } => quartic_k(v, self.k02, self.sigma_k2, c),
            _ => gaussian(v, self.k02, self.sigma_k2),
        }
    }

    pub(crate) fn a_raw(&self, v1: f64, v2: f64) -> APartials {
        let w = v1 - v2;
        let sa2 = self.sigma_a * self.sigma_a;
        match self.family {
            TraitFamily::Gaussian => from_difference(gaussian(w, self.a0, self.sigma_a)),
            TraitFamily::AsymmetricGaussian { beta } => {
                let shift = sa2 * beta;
                let amp = self.a0 * (shift * shift / 2.0).exp();
                from_difference(gaussian(w + shift, amp, self.sigma_a))
            }
            TraitFamily::BoundedQuartic { c } => {
                from_difference(quartic_well(w, self.a0, c, 2.0 * sa2 * sa2))
            }
        }
    }

    pub(crate) fn d_raw(&self, v: f64) -> Deriv1 {
        match (self.death, self.family) {
            (DeathRate::Quartic { d0, sigma_d }, TraitFamily::BoundedQuartic { c }) => {
                quartic_well(v, d0, c, 2.0 * sigma_d * sigma_d)
            }
            (DeathRate::Quartic { d0, .. }, _) => Deriv1 { value: d0, d1: 0.0, d2: 0.0 },
            (DeathRate::Constant(d), _) => Deriv1 { value: d, d1: 0.0, d2: 0.0 },
        }
    }
}

/// Co-evolutionary configuration: ecological constants, trait model and
/// evolutionary speeds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvoConfig {
    pub r1: f64,
    pub r2: f64,
    pub h: f64,
    pub e: f64,
    pub traits: TraitModel,
    pub sigma1_sq: f64,
    pub sigma2_sq: f64,
}

impl EvoConfig {
    pub fn validate(&self) -> Result<()> {
        self.traits.validate()?;
        if !(self.sigma1_sq.is_finite() && self.sigma1_sq >= 0.0) {
            return Err(Error::param("sigma1_sq", "must be finite and >= 0"));
        }
        if !(self.sigma2_sq.is_finite() && self.sigma2_sq >= 0.0) {
            return Err(Error::param("sigma2_sq", "must be finite and >= 0"));
        }
        if !(self.r1.is_finite() && self.r1 > 0.0) {
            return Err(Error::param("r1", "must be finite and > 0"));
        }
        if !(self.r2.is_finite() && self.r2 >= 0.0) {
            return Err(Error::param("r2", "must be finite and >= 0"));
        }
        if !(self.h.is_finite() && self.h >= 0.0) {
            return Err(Error::param("h", "must be finite and >= 0"));
        }
        if !(self.e > 0.0 && self.e <= 1.0) {
            return Err(Error::param("e", "must lie in (0, 1]"));
        }
        Ok(())
    }

    /// Ecological parameters with traits frozen at (u1, u2).
    pub fn frozen(&self, u1: f64, u2: f64) -> Result<EcoParams> {
        self.traits.check("u1", u1)?;
        self.traits.check("u2", u2)?;
        Ok(self.frozen_raw(u1, u2))
    }

    pub(crate) fn frozen_raw(&self, u1: f64, u2: f64) -> EcoParams {
        EcoParams {
            r1: self.r1,
            r2: self.r2,
            k1: self.traits.k1_raw(u1).value,
            k2: self.traits.k2_raw(u2).value,
            a: self.traits.a_raw(u1, u2).value,
            h: self.h,
            e: self.e,
            d: self.traits.d_raw(u2).value,
        }
    }

    /// Ecological parameters at the peak amplitudes (K01, K02, a0).
    pub fn peak_params(&self) -> EcoParams {
        EcoParams {
            r1: self.r1,
            r2: self.r2,
            k1: self.traits.k01,
            k2: self.traits.k02,
            a: self.traits.a0,
            h: self.h,
            e: self.e,
            d: self.traits.d_raw(0.0).value,
        }
    }
}

/// Host fitness G1(v1, u, x).
pub fn fitness_g1(v1: f64, u: [f64; 2], x: [f64; 2], cfg: &EvoConfig) -> Result<f64> {
    let k1 = cfg.traits.k1(v1)?.value;
    let a = cfg.traits.a(v1, u[1])?.value;
    Ok(cfg.r1 * (1.0 - x[0] / k1) - a * x[1] / (1.0 + cfg.h * a * x[0]))
}

/// Parasite fitness G2(v2, u, x).
pub fn fitness_g2(v2: f64, u: [f64; 2], x: [f64; 2], cfg: &EvoConfig) -> Result<f64> {
    let k2 = cfg.traits.k2(v2)?.value;
    let a = cfg.traits.a(u[0], v2)?.value;
    let d = cfg.traits.d(v2)?.value;
    Ok(cfg.e * a * x[0] / (1.0 + cfg.h * a * x[0]) - d + cfg.r2 * (1.0 - x[1] / k2))
}

/// dG1/dv1 evaluated at (v1, u, x).
pub fn fitness_g1_gradient(v1: f64, u: [f64; 2], x: [f64; 2], cfg: &EvoConfig) -> Result<f64> {
    cfg.traits.check("v1", v1)?;
    cfg.traits.check("u2", u[1])?;
    Ok(g1_gradient_raw(v1, u[1], x, cfg))
}

/// dG2/dv2 evaluated at (v2, u, x).
pub fn fitness_g2_gradient(v2: f64, u: [f64; 2], x: [f64; 2], cfg: &EvoConfig) -> Result<f64> {
    cfg.traits.check("v2", v2)?;
    cfg.traits.check("u1", u[0])?;
    Ok(g2_gradient_raw(v2, u[0], x, cfg))
}

fn g1_gradient_raw(v1: f64, u2: f64, x: [f64; 2], cfg: &EvoConfig) -> f64 {
    let k = cfg.traits.k1_raw(v1);
    let a = cfg.traits.a_raw(v1, u2);
    let den = 1.0 + cfg.h * a.value * x[0];
    cfg.r1 * x[0] * k.d1 / (k.value * k.value) - x[1] * a.d_v1 / (den * den)
}

fn g2_gradient_raw(v2: f64, u1: f64, x: [f64; 2], cfg: &EvoConfig) -> f64 {
    let k = cfg.traits.k2_raw(v2);
    let a = cfg.traits.a_raw(u1, v2);
    let d = cfg.traits.d_raw(v2);
    let den = 1.0 + cfg.h * a.value * x[0];
    cfg.e * x[0] * a.d_v2 / (den * den) - d.d1 + cfg.r2 * x[1] * k.d1 / (k.value * k.value)
}

/// Ecological right-hand side.
pub fn eco_rhs(x: [f64; 2], p: &EcoParams) -> [f64; 2] {
    let [x1, x2] = x;
    let attack = p.a / (1.0 + p.h * p.a * x1);
    [
        x1 * (p.r1 * (1.0 - x1 / p.k1) - attack * x2),
        x2 * (p.e * attack * x1 - p.d + p.r2 * (1.0 - x2 / p.k2)),
    ]
}

/// Co-evolutionary right-hand side for the state (x1, x2, u1, u2).
pub fn evo_rhs(s: [f64; 4], cfg: &EvoConfig) -> Result<[f64; 4]> {
    cfg.traits.check("u1", s[2])?;
    cfg.traits.check("u2", s[3])?;
    Ok(evo_rhs_raw(s, cfg))
}

pub(crate) fn evo_rhs_raw(s: [f64; 4], cfg: &EvoConfig) -> [f64; 4] {
    let [x1, x2, u1, u2] = s;
    let p = cfg.frozen_raw(u1, u2);
    let [dx1, dx2] = eco_rhs([x1, x2], &p);
    [
        dx1,
        dx2,
        cfg.sigma1_sq * g1_gradient_raw(u1, u2, [x1, x2], cfg),
        cfg.sigma2_sq * g2_gradient_raw(u2, u1, [x1, x2], cfg),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gauss_model() -> TraitModel {
        TraitModel {
            family: TraitFamily::Gaussian,
            k01: 1.0,
            k02: 1.0,
            a0: 5.0,
            sigma_k1: 1.0,
            sigma_k2: 1.0,
            sigma_a: 2.0,
            death: DeathRate::Constant(0.185),
        }
    }

    #[test]
    fn gaussian_peak() {
        let m = TraitModel { sigma_k1: 0.7, ..gauss_model() };
        let k = m.k1(0.0).unwrap();
        assert_eq!(k.value, 1.0);
        assert_eq!(k.d1, 0.0);
        assert!((k.d2 + 1.0 / 0.49).abs() < 1e-14);
    }

    #[test]
    fn bounded_quartic_rejects_outside_domain() {
        let m = TraitModel { family: TraitFamily::BoundedQuartic { c: 1.0 }, ..gauss_model() };
        assert!(matches!(m.k1(-1e-9), Err(Error::DomainViolation { .. })));
        assert!(matches!(m.a(0.5, 1.0 + 1e-9), Err(Error::DomainViolation { .. })));
        assert!(m.k2(1.0).is_ok());
    }

    #[test]
    fn quartic_death_needs_bounded_family() {
        let m = TraitModel { death: DeathRate::Quartic { d0: 1.0, sigma_d: 1.0 }, ..gauss_model() };
        assert!(m.validate().is_err());
    }

    #[test]
    fn eco_rhs_fixed_points() {
        let p = EcoParams { r1: 1.0, r2: 0.25, k1: 1.0, k2: 1.0, a: 5.0, h: 4.0, e: 0.9, d: 0.185 };
        assert_eq!(eco_rhs([0.0, 0.0], &p), [0.0, 0.0]);
        assert_eq!(eco_rhs([p.k1, 0.0], &p), [0.0, 0.0]);
    }
}
