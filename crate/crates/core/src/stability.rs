//! Eigenvalue-based stability classification shared by the 2-D and 4-D analyses.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Real parts with magnitude below this are treated as zero.
pub const HYPERBOLICITY_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum StabilityClass {
    StableNode,
    StableFocus,
    Saddle,
    Source,
    CenterOrUndetermined,
}

impl StabilityClass {
    pub fn is_stable(self) -> bool {
        matches!(self, StabilityClass::StableNode | StabilityClass::StableFocus)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            StabilityClass::StableNode => "STABLE_NODE",
            StabilityClass::StableFocus => "STABLE_FOCUS",
            StabilityClass::Saddle => "SADDLE",
            StabilityClass::Source => "SOURCE",
            StabilityClass::CenterOrUndetermined => "CENTER_OR_UNDETERMINED",
        }
    }
}

/// Classifies a spectrum. Any eigenvalue with positive real part makes the
/// point unstable (SOURCE when all are positive, otherwise SADDLE); without
/// one, a real part inside the tolerance band leaves the point undetermined.
pub fn classify(eigs: &[Complex64]) -> StabilityClass {
    let pos = eigs.iter().filter(|l| l.re > HYPERBOLICITY_TOL).count();
    let neg = eigs.iter().filter(|l| l.re < -HYPERBOLICITY_TOL).count();
    if pos > 0 {
        if pos == eigs.len() {
            StabilityClass::Source
        } else {
            StabilityClass::Saddle
        }
    } else if neg < eigs.len() {
        StabilityClass::CenterOrUndetermined
    } else if eigs.iter().any(|l| l.im != 0.0) {
        StabilityClass::StableFocus
    } else {
        StabilityClass::StableNode
    }
}

pub fn max_real_part(eigs: &[Complex64]) -> f64 {
    eigs.iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max)
}

/// Sorts by real part, then imaginary part, for reproducible output.
pub fn sort_eigenvalues(eigs: &mut [Complex64]) {
    eigs.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

/// Closed-form eigenvalues of a 2x2 matrix.
pub fn eigenvalues_2x2(m: [[f64; 2]; 2]) -> Vec<Complex64> {
    let tr = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let half = tr / 2.0;
    let disc = half * half - det;
    let mut out = if disc >= 0.0 {
        let s = disc.sqrt();
        // Avoid cancellation in the smaller root.
        let big = if half >= 0.0 { half + s } else { half - s };
        let small = if big != 0.0 { det / big } else { 0.0 };
        vec![Complex64::new(big, 0.0), Complex64::new(small, 0.0)]
    } else {
        let s = (-disc).sqrt();
        vec![Complex64::new(half, -s), Complex64::new(half, s)]
    };
    sort_eigenvalues(&mut out);
    out
}

/// Eigenvalues of a general square matrix via the real Schur form.
pub fn eigenvalues<const N: usize>(m: &[[f64; N]; N]) -> Vec<Complex64> {
    let dm = DMatrix::from_fn(N, N, |i, j| m[i][j]);
    let mut out: Vec<Complex64> = dm.complex_eigenvalues().iter().copied().collect();
    sort_eigenvalues(&mut out);
    out
}

/// Central-difference Jacobian with step 1e-6 * max(1, |x_j|).
pub fn numeric_jacobian<const N: usize>(
    f: impl Fn([f64; N]) -> [f64; N],
    x: [f64; N],
) -> [[f64; N]; N] {
    let mut jac = [[0.0; N]; N];
    for j in 0..N {
        let step = 1e-6 * x[j].abs().max(1.0);
        let mut xp = x;
        let mut xm = x;
        xp[j] += step;
        xm[j] -= step;
        let fp = f(xp);
        let fm = f(xm);
        for i in 0..N {
            jac[i][j] = (fp[i] - fm[i]) / (xp[j] - xm[j]);
        }
    }
    jac
}

/// Largest distance between matched eigenvalues of two spectra, relative to
/// max(1, |lambda|). Spectra are matched greedily by proximity.
pub fn spectrum_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for la in a {
        let (k, dist) = b
            .iter()
            .enumerate()
            .filter(|(k, _)| !used[*k])
            .map(|(k, lb)| (k, (la - lb).norm()))
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .expect("spectra of equal length");
        used[k] = true;
        worst = worst.max(dist / la.norm().max(1.0));
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn classes() {
        assert_eq!(classify(&[c(-1.0, 0.0), c(-2.0, 0.0)]), StabilityClass::StableNode);
        assert_eq!(classify(&[c(-1.0, 1.0), c(-1.0, -1.0)]), StabilityClass::StableFocus);
        assert_eq!(classify(&[c(1.0, 0.0), c(-2.0, 0.0)]), StabilityClass::Saddle);
        assert_eq!(classify(&[c(1.0, 0.0), c(2.0, 0.0)]), StabilityClass::Source);
        assert_eq!(classify(&[c(-1.0, 0.0), c(1e-10, 0.0)]), StabilityClass::CenterOrUndetermined);
        assert_eq!(
            classify(&[c(1.0, 0.0), c(0.5, 0.0), c(0.0, 0.0), c(0.0, 0.0)]),
            StabilityClass::Saddle
        );
    }

    #[test]
    fn two_by_two_matches_schur() {
        let m = [[0.3, -1.2], [0.7, -0.4]];
        let d = spectrum_distance(&eigenvalues_2x2(m), &eigenvalues(&m));
        assert!(d < 1e-12);
    }
}
