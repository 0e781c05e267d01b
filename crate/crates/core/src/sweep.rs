//! One- and two-parameter sweeps over the ecological model.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eco::{consistency_check, expanded_coeffs, interior_equilibria, Equilibrium};
use crate::error::{Error, Result};
use crate::model::EcoParams;
use crate::stability::{max_real_part, StabilityClass};

/// A linearly spaced parameter axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub param: String,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Axis {
    pub fn new(param: &str, min: f64, max: f64, count: usize) -> Self {
        Self { param: param.to_string(), min, max, count }
    }

    pub fn value(&self, i: usize) -> f64 {
        self.min + (self.max - self.min) * i as f64 / (self.count - 1) as f64
    }

    pub fn validate(&self) -> Result<()> {
        if !EcoParams::FIELDS.contains(&self.param.as_str()) {
            return Err(Error::param("param", format!("unknown parameter {}", self.param)));
        }
        if self.count < 2 {
            return Err(Error::param("count", "must be >= 2"));
        }
        if !(self.min.is_finite() && self.max.is_finite() && self.max > self.min) {
            return Err(Error::param("max", "requires finite min < max"));
        }
        Ok(())
    }
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::param("workers", e.to_string()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cell2d {
    pub index: [usize; 2],
    pub values: [f64; 2],
    pub n_interior: Option<usize>,
    pub facultative: bool,
    /// d above r2 + eaK1/(1+ahK1).
    pub above_line: bool,
    pub classes: Vec<StabilityClass>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpotCheck {
    pub sampled: usize,
    pub mismatches: Vec<[usize; 2]>,
    pub unresolved: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sweep2dResult {
    pub axes: [Axis; 2],
    pub base: EcoParams,
    /// Ordered with the first axis outer and the second axis inner.
    pub cells: Vec<Cell2d>,
    /// Adjacent cell pairs whose counts differ by two or more without a sign
    /// change of c0 or of the cubic discriminant between them.
    pub refinement_flags: Vec<[[usize; 2]; 2]>,
    pub spot_check: SpotCheck,
}

impl Sweep2dResult {
    pub fn cell(&self, i: usize, j: usize) -> &Cell2d {
        &self.cells[i * self.axes[1].count + j]
    }
}

fn cell_params(base: &EcoParams, axes: &[Axis; 2], i: usize, j: usize) -> Result<EcoParams> {
    base.with(&axes[0].param, axes[0].value(i))?
        .with(&axes[1].param, axes[1].value(j))
}

fn eval_cell(base: &EcoParams, axes: &[Axis; 2], i: usize, j: usize) -> Cell2d {
    let values = [axes[0].value(i), axes[1].value(j)];
    let mut cell = Cell2d {
        index: [i, j],
        values,
        n_interior: None,
        facultative: false,
        above_line: false,
        classes: vec![],
        error: None,
    };
    match cell_params(base, axes, i, j).and_then(|p| Ok((p, interior_equilibria(&p)?))) {
        Ok((p, eqs)) => {
            cell.facultative = p.d < p.r2;
            cell.above_line = p.d > p.r2 + p.host_gain_at_k1();
            cell.n_interior = Some(eqs.len());
            cell.classes = eqs.iter().map(|e| e.class).collect();
        }
        Err(e) => cell.error = Some(e.to_string()),
    }
    cell
}

/// Discriminant of c3 x^3 + c2 x^2 + c1 x + c0.
pub fn cubic_discriminant(c3: f64, c2: f64, c1: f64, c0: f64) -> f64 {
    18.0 * c3 * c2 * c1 * c0 - 4.0 * c2.powi(3) * c0 + c2 * c2 * c1 * c1
        - 4.0 * c3 * c1.powi(3)
        - 27.0 * c3 * c3 * c0 * c0
}

pub const SPOT_CHECKS: usize = 100;

/// Interior-equilibrium counts on a grid. The output is independent of the
/// worker count.
pub fn sweep2d(base: &EcoParams, axes: &[Axis; 2], workers: usize, seed: u64) -> Result<Sweep2dResult> {
    axes[0].validate()?;
    axes[1].validate()?;
    if axes[0].param == axes[1].param {
        return Err(Error::param("axes", "the two axes must differ"));
    }
    let (n0, n1) = (axes[0].count, axes[1].count);
    let cells: Vec<Cell2d> = pool(workers)?.install(|| {
        (0..n0 * n1)
            .into_par_iter()
            .map(|k| eval_cell(base, axes, k / n1, k % n1))
            .collect()
    });

    let sign_key = |i: usize, j: usize| {
        cell_params(base, axes, i, j).ok().map(|p| {
            let c = expanded_coeffs(&p);
            (c.c0 > 0.0, cubic_discriminant(c.c3, c.c2, c.c1, c.c0) > 0.0)
        })
    };
    let mut refinement_flags = Vec::new();
    for i in 0..n0 {
        for j in 0..n1 {
            for (ni, nj) in [(i + 1, j), (i, j + 1)] {
                if ni >= n0 || nj >= n1 {
                    continue;
                }
                let (a, b) = (&cells[i * n1 + j], &cells[ni * n1 + nj]);
                if let (Some(ca), Some(cb)) = (a.n_interior, b.n_interior) {
                    if ca.abs_diff(cb) >= 2 && sign_key(i, j) == sign_key(ni, nj) {
                        refinement_flags.push([[i, j], [ni, nj]]);
                    }
                }
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picks: Vec<(usize, usize)> = (0..SPOT_CHECKS.min(n0 * n1))
        .map(|_| (rng.gen_range(0..n0), rng.gen_range(0..n1)))
        .collect();
    let checks: Vec<(usize, usize, bool, bool)> = pool(workers)?.install(|| {
        picks
            .par_iter()
            .map(|&(i, j)| match cell_params(base, axes, i, j) {
                Ok(p) => {
                    let r = consistency_check(&p);
                    let count_ok = cells[i * n1 + j].n_interior == Some(r.oracle_roots.len());
                    (i, j, r.mismatch || (!r.unresolved && !count_ok), r.unresolved)
                }
                Err(_) => (i, j, true, false),
            })
            .collect()
    });
    let spot_check = SpotCheck {
        sampled: checks.len(),
        mismatches: checks.iter().filter(|c| c.2).map(|c| [c.0, c.1]).collect(),
        unresolved: checks.iter().filter(|c| c.3).count(),
    };

    Ok(Sweep2dResult {
        axes: axes.clone(),
        base: *base,
        cells,
        refinement_flags,
        spot_check,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Root1d {
    pub value: f64,
    pub root_index: usize,
    pub x1: f64,
    pub x2: f64,
    pub class: StabilityClass,
    pub max_re_lambda: f64,
    pub complex_pair: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample1d {
    pub value: f64,
    pub n_interior: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

/// A parameter interval of width below the bisection tolerance containing a
/// change in the interior-root count.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountChange {
    pub lo: f64,
    pub hi: f64,
    pub from: usize,
    pub to: usize,
}

/// Bracket of a sign change in the real part of a complex eigenvalue pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HopfBracket {
    pub lo: f64,
    pub hi: f64,
    pub x1: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sweep1dResult {
    pub axis: Axis,
    pub base: EcoParams,
    pub samples: Vec<Sample1d>,
    pub roots: Vec<Root1d>,
    pub count_changes: Vec<CountChange>,
    pub hopf: Vec<HopfBracket>,
}

pub const BISECTION_WIDTH: f64 = 1e-4;
/// Roots at neighbouring samples are matched when within this fraction of K1.
const TRACK_DISTANCE: f64 = 0.05;

fn roots_at(base: &EcoParams, param: &str, v: f64) -> Result<Vec<Equilibrium>> {
    interior_equilibria(&base.with(param, v)?)
}

/// Interior equilibria along one parameter, with root-count changes and
/// Hopf signatures bracketed by bisection.
pub fn sweep1d(base: &EcoParams, axis: &Axis, workers: usize) -> Result<Sweep1dResult> {
    axis.validate()?;
    let n = axis.count;
    let per: Vec<(f64, Result<Vec<Equilibrium>>)> = pool(workers)?.install(|| {
        (0..n)
            .into_par_iter()
            .map(|i| {
                let v = axis.value(i);
                (v, roots_at(base, &axis.param, v))
            })
            .collect()
    });

    let mut samples = Vec::with_capacity(n);
    let mut roots = Vec::new();
    for (v, r) in &per {
        match r {
            Ok(eqs) => {
                samples.push(Sample1d { value: *v, n_interior: Some(eqs.len()), error: None });
                for (k, e) in eqs.iter().enumerate() {
                    roots.push(Root1d {
                        value: *v,
                        root_index: k,
                        x1: e.location[0],
                        x2: e.location[1],
                        class: e.class,
                        max_re_lambda: max_real_part(&e.eigenvalues),
                        complex_pair: e.eigenvalues.iter().any(|l| l.im != 0.0),
                    });
                }
            }
            Err(e) => samples.push(Sample1d { value: *v, n_interior: None, error: Some(e.to_string()) }),
        }
    }

    let count = |v: f64| roots_at(base, &axis.param, v).ok().map(|r| r.len());
    let mut count_changes = Vec::new();
    for w in samples.windows(2) {
        if let (Some(a), Some(b)) = (w[0].n_interior, w[1].n_interior) {
            if a != b {
                let (mut lo, mut hi) = (w[0].value, w[1].value);
                while hi - lo > BISECTION_WIDTH {
                    let mid = 0.5 * (lo + hi);
                    if count(mid) == Some(a) {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                count_changes.push(CountChange { lo, hi, from: a, to: b });
            }
        }
    }

    let k1 = base.k1;
    let mut hopf = Vec::new();
    for w in per.windows(2) {
        let (Ok(ra), Ok(rb)) = (&w[0].1, &w[1].1) else { continue };
        for ea in ra {
            if !ea.eigenvalues.iter().any(|l| l.im != 0.0) {
                continue;
            }
            let Some(eb) = nearest(rb, ea.location[0]) else { continue };
            if (eb.location[0] - ea.location[0]).abs() > TRACK_DISTANCE * k1
                || !eb.eigenvalues.iter().any(|l| l.im != 0.0)
            {
                continue;
            }
            let sa = max_real_part(&ea.eigenvalues);
            let sb = max_real_part(&eb.eigenvalues);
            if (sa < 0.0) == (sb < 0.0) {
                continue;
            }
            let (mut lo, mut hi) = (w[0].0, w[1].0);
            let mut x1 = ea.location[0];
            let mut ok = true;
            while hi - lo > BISECTION_WIDTH {
                let mid = 0.5 * (lo + hi);
                let Some(e) = roots_at(base, &axis.param, mid)
                    .ok()
                    .and_then(|r| nearest(&r, x1).cloned())
                else {
                    ok = false;
                    break;
                };
                if !e.eigenvalues.iter().any(|l| l.im != 0.0) {
                    ok = false;
                    break;
                }
                x1 = e.location[0];
                if (max_real_part(&e.eigenvalues) < 0.0) == (sa < 0.0) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            if ok {
                hopf.push(HopfBracket { lo, hi, x1 });
            }
        }
    }

    Ok(Sweep1dResult {
        axis: axis.clone(),
        base: *base,
        samples,
        roots,
        count_changes,
        hopf,
    })
}

fn nearest(eqs: &[Equilibrium], x1: f64) -> Option<&Equilibrium> {
    eqs.iter()
        .min_by(|a, b| (a.location[0] - x1).abs().total_cmp(&(b.location[0] - x1).abs()))
}
