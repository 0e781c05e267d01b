//! Equilibria, stability and analytic conditions of the fixed-trait
//! ecological model.

use nalgebra::Matrix3;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::conditions::{ConditionReport, Relation};
use crate::error::{Error, Result};
use crate::model::{eco_rhs, EcoParams};
use crate::stability::{classify, eigenvalues_2x2, StabilityClass};

/// Interior roots must lie in (ROOT_WINDOW, K1 - ROOT_WINDOW).
pub const ROOT_WINDOW: f64 = 1e-10;
/// Roots closer than this multiple of K1 are merged.
pub const ROOT_MERGE: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CubicCoeffs {
    pub c3: f64,
    pub c2: f64,
    pub c1: f64,
    pub c0: f64,
    /// Critical points of F, present when c2^2 - 3 c1 c3 >= 0.
    pub xc1: Option<f64>,
    pub xc2: Option<f64>,
}

impl CubicCoeffs {
    fn from_coeffs(c3: f64, c2: f64, c1: f64, c0: f64) -> Self {
        let disc = c2 * c2 - 3.0 * c1 * c3;
        let (xc1, xc2) = if c3 != 0.0 && disc >= 0.0 {
            let s = disc.sqrt();
            let a = (-c2 - s) / (3.0 * c3);
            let b = (-c2 + s) / (3.0 * c3);
            (Some(a.min(b)), Some(a.max(b)))
        } else {
            (None, None)
        };
        Self { c3, c2, c1, c0, xc1, xc2 }
    }

    pub fn eval(&self, x: f64) -> f64 {
        ((self.c3 * x + self.c2) * x + self.c1) * x + self.c0
    }

    pub fn derivative(&self, x: f64) -> f64 {
        (3.0 * self.c3 * x + 2.0 * self.c2) * x + self.c1
    }

    /// Real roots, each polished by Newton.
    fn real_roots(&self) -> Vec<f64> {
        let raw: Vec<f64> = if self.c3 != 0.0 {
            let m = Matrix3::new(
                -self.c2 / self.c3,
                -self.c1 / self.c3,
                -self.c0 / self.c3,
                1.0,
                0.0,
                0.0,
                0.0,
                1.0,
                0.0,
            );
            m.complex_eigenvalues()
                .iter()
                .filter(|z| z.im.abs() <= 1e-7 * z.re.abs().max(1.0))
                .map(|z| z.re)
                .collect()
        } else if self.c2 != 0.0 {
            let disc = self.c1 * self.c1 - 4.0 * self.c2 * self.c0;
            if disc < 0.0 {
                vec![]
            } else {
                let q = -0.5 * (self.c1 + self.c1.signum() * disc.sqrt());
                let mut v = vec![q / self.c2];
                if q != 0.0 {
                    v.push(self.c0 / q);
                }
                v
            }
        } else if self.c1 != 0.0 {
            vec![-self.c0 / self.c1]
        } else {
            vec![]
        };
        raw.into_iter().map(|x| self.polish(x)).collect()
    }

    fn polish(&self, mut x: f64) -> f64 {
        let mut fx = self.eval(x).abs();
        for _ in 0..4 {
            let d = self.derivative(x);
            if d == 0.0 || fx == 0.0 {
                break;
            }
            let xn = x - self.eval(x) / d;
            let fn_ = self.eval(xn).abs();
            if fn_ < fx {
                x = xn;
                fx = fn_;
            } else {
                break;
            }
        }
        x
    }
}

/// Coefficients of F(x1) with r2 and h multiplied through; valid for r2 = 0
/// and h = 0.
pub(crate) fn expanded_coeffs(p: &EcoParams) -> CubicCoeffs {
    let ah = p.a * p.h;
    let c3 = p.r1 * p.r2 * ah * ah;
    let c2 = ah * p.r1 * p.r2 * (2.0 - ah * p.k1);
    let c1 = p.a * p.a * p.k1 * p.k2 * (p.h * (p.r2 - p.d) + p.e)
        + p.r1 * p.r2 * (1.0 - 2.0 * ah * p.k1);
    let c0 = p.a * p.k1 * p.k2 * (p.r2 - p.d) - p.r1 * p.r2 * p.k1;
    CubicCoeffs::from_coeffs(c3, c2, c1, c0)
}

/// Coefficients of the interior cubic F(x1) = c3 x1^3 + c2 x1^2 + c1 x1 + c0.
pub fn interior_cubic(p: &EcoParams) -> Result<CubicCoeffs> {
    p.validate()?;
    if p.a == 0.0 {
        return Err(Error::DegenerateNoInteraction("a = 0 decouples host and parasite"));
    }
    if p.h == 0.0 {
        return Err(Error::DegenerateNoInteraction("h = 0 reduces F to a linear function"));
    }
    if p.r2 == 0.0 {
        return Ok(expanded_coeffs(p));
    }
    let ah = p.a * p.h;
    let c3 = p.r1 * p.r2 * ah * ah;
    let c2 = ah * p.r1 * p.r2 * (2.0 - ah * p.k1);
    let c1 = p.a * p.a * p.h * p.k1 * p.k2 * (p.r2 + p.e / p.h - p.d)
        + p.r1 * p.r2 * (1.0 - 2.0 * ah * p.k1);
    let c0 = p.a * p.r2 * p.k1 * (p.k2 * (1.0 - p.d / p.r2) - p.r1 / p.a);
    Ok(CubicCoeffs::from_coeffs(c3, c2, c1, c0))
}

/// Host nullcline x2 = f(x1).
pub fn host_nullcline(x1: f64, p: &EcoParams) -> f64 {
    p.r1 * (p.k1 - x1) * (1.0 + p.a * p.h * x1) / (p.a * p.k1)
}

/// Parasite nullcline x2 = g(x1); requires r2 > 0.
pub fn parasite_nullcline(x1: f64, p: &EcoParams) -> f64 {
    p.k2 / p.r2 * (p.e * p.a * x1 / (1.0 + p.h * p.a * x1) + (p.r2 - p.d))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EcoKind {
    E00,
    E10,
    E01,
    #[serde(rename = "INTERIOR")]
    Interior,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub kind: EcoKind,
    pub location: [f64; 2],
    pub eigenvalues: Vec<Complex64>,
    pub class: StabilityClass,
    /// Number of merged cubic roots at this location (1 for a simple root).
    pub multiplicity: u8,
}

impl Equilibrium {
    fn new(kind: EcoKind, location: [f64; 2], eigenvalues: Vec<Complex64>) -> Self {
        let class = classify(&eigenvalues);
        Self { kind, location, eigenvalues, class, multiplicity: 1 }
    }
}

/// Analytic Jacobian of the ecological right-hand side.
pub fn eco_jacobian(x: [f64; 2], p: &EcoParams) -> [[f64; 2]; 2] {
    let [x1, x2] = x;
    let den = 1.0 + p.a * p.h * x1;
    let h1 = p.r1 * (1.0 - x1 / p.k1) - p.a * x2 / den;
    let h2 = p.e * p.a * x1 / den - p.d + p.r2 * (1.0 - x2 / p.k2);
    [
        [
            h1 + x1 * (-p.r1 / p.k1 + p.a * p.a * p.h * x2 / (den * den)),
            -p.a * x1 / den,
        ],
        [p.e * p.a * x2 / (den * den), h2 - p.r2 * x2 / p.k2],
    ]
}

/// E00, E10 and (when r2 > d) E01, classified by their closed-form eigenvalues.
pub fn boundary_equilibria(p: &EcoParams) -> Vec<Equilibrium> {
    let real = |a: f64, b: f64| {
        let mut v = vec![Complex64::new(a, 0.0), Complex64::new(b, 0.0)];
        crate::stability::sort_eigenvalues(&mut v);
        v
    };
    let mut out = vec![
        Equilibrium::new(EcoKind::E00, [0.0, 0.0], real(p.r1, p.r2 - p.d)),
        Equilibrium::new(
            EcoKind::E10,
            [p.k1, 0.0],
            real(-p.r1, p.r2 - p.d + p.host_gain_at_k1()),
        ),
    ];
    if p.is_facultative() {
        let x2 = p.parasite_only_density();
        out.push(Equilibrium::new(
            EcoKind::E01,
            [0.0, x2],
            real(p.r1 - p.a * x2, p.d - p.r2),
        ));
    }
    out
}

/// Interior equilibria, ordered by x1.
pub fn interior_equilibria(p: &EcoParams) -> Result<Vec<Equilibrium>> {
    p.validate()?;
    if p.a == 0.0 {
        return Ok(vec![]);
    }
    let cubic = expanded_coeffs(p);
    let roots: Vec<f64> = if p.h == 0.0 {
        // Linear nullcline intersection.
        if cubic.c1 != 0.0 {
            vec![-cubic.c0 / cubic.c1]
        } else {
            vec![]
        }
    } else {
        cubic.real_roots()
    };
    let mut inside: Vec<f64> = roots
        .into_iter()
        .filter(|x| *x > ROOT_WINDOW && *x < p.k1 - ROOT_WINDOW)
        .collect();
    inside.sort_by(f64::total_cmp);

    let mut merged: Vec<(f64, u8)> = Vec::new();
    for x in inside {
        match merged.last_mut() {
            Some((y, m)) if (x - *y).abs() < ROOT_MERGE * p.k1 => {
                *y = (*y * f64::from(*m) + x) / f64::from(*m + 1);
                *m += 1;
            }
            _ => merged.push((x, 1)),
        }
    }

    Ok(merged
        .into_iter()
        .filter_map(|(x1, m)| {
            let x2 = host_nullcline(x1, p);
            (x2 > 0.0).then(|| {
                let loc = [x1, x2];
                let mut eq = Equilibrium::new(
                    EcoKind::Interior,
                    loc,
                    eigenvalues_2x2(eco_jacobian(loc, p)),
                );
                eq.multiplicity = m;
                eq
            })
        })
        .collect())
}

/// Boundary and interior equilibria together.
pub fn all_equilibria(p: &EcoParams) -> Result<Vec<Equilibrium>> {
    let mut out = boundary_equilibria(p);
    out.extend(interior_equilibria(p)?);
    Ok(out)
}

/// Evaluates the persistence, global-stability, local-stability and
/// existence conditions of the ecological model.
pub fn condition_report(p: &EcoParams) -> ConditionReport {
    use Relation::{Gt, Lt};
    let mut r = ConditionReport::new();
    let b01 = p.parasite_only_density();
    let gain = p.host_gain_at_k1();
    let r1_over_a = if p.a > 0.0 { p.r1 / p.a } else { f64::INFINITY };
    let ah = p.a * p.h;
    let cubic = expanded_coeffs(p);

    r.add("obligate", p.d, Gt, p.r2);
    r.add("facultative", p.r2, Gt, p.d);
    r.add("host_invades_e01", r1_over_a, Gt, b01);
    r.add("e01_positive", b01, Gt, 0.0);
    r.add("parasite_invades_e10", p.r2 + gain, Gt, p.d);
    r.add("parasite_excluded", p.d, Gt, p.r2 + gain);
    r.add("e01_resists_host", r1_over_a, Lt, b01);

    // a^2 r2 K1 K2 (h + d/r2 - e/r2) versus r1 r2 (ahK1 + 1)^2 / 3, multiplied
    // through by r2 so that r2 = 0 stays finite.
    let flat_lhs = p.a * p.a * p.k1 * p.k2 * (p.h * p.r2 + p.d - p.e);
    let flat_rhs = p.r1 * p.r2 * (ah * p.k1 + 1.0).powi(2) / 3.0;
    r.add("cubic_monotone", flat_lhs, Gt, flat_rhs);
    r.add("cubic_two_critical", flat_lhs, Lt, flat_rhs);
    let threshold = if ah > 0.0 { 1.0 / ah } else { f64::INFINITY };
    r.add("k1_below_inverse_ah", p.k1, Lt, threshold);
    r.add("k1_above_inverse_ah", p.k1, Gt, threshold);
    let peak = if ah > 0.0 {
        p.r1 * (1.0 + ah * p.k1).powi(2) / (4.0 * p.a * p.a * p.h * p.k1 * p.k2)
    } else {
        f64::INFINITY
    };
    let ratio = if p.r2 > 0.0 { 1.0 - p.d / p.r2 } else { f64::NEG_INFINITY };
    r.add("host_nullcline_peak_below_e01", peak, Lt, ratio);

    let nan = f64::NAN;
    let f_at = |x: Option<f64>| x.map_or(nan, |x| cubic.eval(x));
    r.add("f_xc1_positive", f_at(cubic.xc1), Gt, 0.0);
    r.add("f_xc2_negative", f_at(cubic.xc2), Lt, 0.0);
    r.add("xc1_positive", cubic.xc1.unwrap_or(nan), Gt, 0.0);
    r.add("xc2_positive", cubic.xc2.unwrap_or(nan), Gt, 0.0);

    // Sufficient local stability of an interior equilibrium.
    r.add("stable_parasite_self_limitation", p.r2 / p.k2, Gt, p.a / 2.0);
    r.add(
        "stable_determinant",
        p.r1 * p.r2 / (p.k1 * p.k2) + p.e * p.a * p.a / (1.0 + ah * p.k1).powi(3),
        Gt,
        p.a * p.a * p.k2 * (p.h * p.r2 + p.e),
    );

    r.add_verdict(
        "host_persistent",
        &[&["obligate"], &["host_invades_e01", "e01_positive"]],
    );
    r.add_verdict("parasite_persistent", &[&["parasite_invades_e10"]]);
    r.add_verdict(
        "permanent",
        &[
            &["parasite_invades_e10", "obligate"],
            &["host_invades_e01", "e01_positive"],
        ],
    );
    r.add_verdict("e10_globally_stable", &[&["parasite_excluded"]]);
    r.add_verdict(
        "e01_globally_stable",
        &[
            &["e01_resists_host", "cubic_monotone"],
            &["e01_resists_host", "k1_below_inverse_ah"],
            &["e01_resists_host", "k1_above_inverse_ah", "host_nullcline_peak_below_e01"],
        ],
    );
    r.add_verdict(
        "interior_none",
        &[
            &["parasite_excluded"],
            &["e01_resists_host", "cubic_monotone"],
            &["e01_resists_host", "k1_below_inverse_ah"],
            &["k1_above_inverse_ah", "host_nullcline_peak_below_e01"],
        ],
    );
    r.add_verdict(
        "interior_one",
        &[
            &["obligate", "parasite_invades_e10"],
            &["host_invades_e01", "cubic_monotone"],
            &["host_invades_e01", "cubic_two_critical", "f_xc2_negative"],
        ],
    );
    r.add_verdict(
        "interior_two",
        &[&["e01_resists_host", "cubic_two_critical", "f_xc2_negative", "xc2_positive"]],
    );
    r.add_verdict(
        "interior_three",
        &[&[
            "host_invades_e01",
            "cubic_two_critical",
            "f_xc1_positive",
            "f_xc2_negative",
            "xc1_positive",
        ]],
    );
    r.add_verdict(
        "interior_locally_stable",
        &[&["stable_parasite_self_limitation", "stable_determinant"]],
    );
    // Regime comparison rows.
    r.add_verdict("e00_source", &[&["facultative"]]);
    r.add_verdict("e10_locally_stable", &[&["parasite_excluded"]]);
    r.add_verdict("e01_locally_stable", &[&["facultative", "e01_resists_host"]]);
    r.add_verdict(
        "host_extinction",
        &[
            &["e01_resists_host", "cubic_monotone"],
            &["e01_resists_host", "k1_below_inverse_ah"],
            &["e01_resists_host", "k1_above_inverse_ah", "host_nullcline_peak_below_e01"],
        ],
    );
    r.add_verdict("parasite_extinction", &[&["parasite_excluded"]]);
    r
}

/// Result of cross-checking interior roots against a nullcline sign scan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub implementation_roots: Vec<f64>,
    pub oracle_roots: Vec<f64>,
    pub grid_points: usize,
    pub count_match: bool,
    pub max_location_error: f64,
    /// True when roots are closer than the scan resolution or touch without
    /// crossing, so the scan cannot resolve them.
    pub unresolved: bool,
    pub mismatch: bool,
}

pub const ORACLE_GRID: usize = 100_000;

/// Compares `interior_equilibria` with sign changes of g - f on a uniform grid.
pub fn consistency_check(p: &EcoParams) -> ConsistencyReport {
    let implementation = match interior_equilibria(p) {
        Ok(eqs) => eqs,
        Err(_) => vec![],
    };
    let oracle = if p.a > 0.0 { nullcline_scan(p, ORACLE_GRID) } else { vec![] };
    let dx = p.k1 / ORACLE_GRID as f64;
    let unresolved = implementation.iter().any(|e| e.multiplicity > 1)
        || implementation
            .windows(2)
            .any(|w| w[1].location[0] - w[0].location[0] < 2.0 * dx);
    let impl_roots: Vec<f64> = implementation.iter().map(|e| e.location[0]).collect();
    let count_match = impl_roots.len() == oracle.len();
    let max_location_error = if count_match {
        impl_roots
            .iter()
            .zip(&oracle)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    ConsistencyReport {
        mismatch: !unresolved && !(count_match && max_location_error <= 1e-6),
        implementation_roots: impl_roots,
        oracle_roots: oracle,
        grid_points: ORACLE_GRID,
        count_match,
        max_location_error,
        unresolved,
    }
}

fn nullcline_gap(x: f64, p: &EcoParams) -> f64 {
    if p.r2 > 0.0 {
        parasite_nullcline(x, p) - host_nullcline(x, p)
    } else {
        // g is a vertical line; its sign is carried by the parasite growth rate.
        p.e * p.a * x / (1.0 + p.h * p.a * x) - p.d
    }
}

fn nullcline_scan(p: &EcoParams, n: usize) -> Vec<f64> {
    let at = |i: usize| p.k1 * i as f64 / n as f64;
    let mut roots = Vec::new();
    let mut prev = nullcline_gap(at(0), p);
    for i in 1..=n {
        let x = at(i);
        let cur = nullcline_gap(x, p);
        if prev * cur < 0.0 || (cur == 0.0 && i < n) {
            let (mut lo, mut hi) = (at(i - 1), x);
            let flo = nullcline_gap(lo, p);
            if cur != 0.0 {
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    let fm = nullcline_gap(mid, p);
                    if fm == 0.0 {
                        lo = mid;
                        hi = mid;
                        break;
                    }
                    if (fm < 0.0) == (flo < 0.0) {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
            } else {
                lo = x;
                hi = x;
            }
            let r = 0.5 * (lo + hi);
            if r > ROOT_WINDOW && r < p.k1 - ROOT_WINDOW {
                roots.push(r);
            }
        }
        if cur != 0.0 {
            prev = cur;
        }
    }
    roots
}

/// Maximum absolute residual of the ecological right-hand side at `x`.
pub fn eco_residual(x: [f64; 2], p: &EcoParams) -> f64 {
    let r = eco_rhs(x, p);
    r[0].abs().max(r[1].abs())
}
