mod common;

use coevo::conditions::VerdictStatus;
use coevo::eco::*;
use coevo::model::{eco_rhs, EcoParams};
use coevo::stability::{eigenvalues, numeric_jacobian, spectrum_distance, StabilityClass};
use common::*;
use nalgebra::{Matrix4, Vector4};
use proptest::prelude::*;

/// Coefficients of a r2 K1 (1 + ahx)(g - f) recovered by interpolating it at
/// four points.
fn interpolated_cubic(p: &EcoParams) -> [f64; 4] {
    let f = |x: f64| p.r1 * (p.k1 - x) * (1.0 + p.a * p.h * x) / (p.a * p.k1);
    let g = |x: f64| p.k2 / p.r2 * (p.e * p.a * x / (1.0 + p.h * p.a * x) + p.r2 - p.d);
    let big = |x: f64| p.a * p.r2 * p.k1 * (1.0 + p.a * p.h * x) * (g(x) - f(x));
    let xs: [f64; 4] = [0.0, 0.25, 0.5, 1.0];
    let m = Matrix4::from_fn(|i, j| xs[i].powi(3 - j as i32));
    let y = Vector4::from_fn(|i, _| big(xs[i]));
    let c = m.lu().solve(&y).unwrap();
    [c[0], c[1], c[2], c[3]]
}

fn interior(p: &EcoParams) -> Vec<Equilibrium> {
    interior_equilibria(p).unwrap()
}

#[test]
fn two_interior_cubic_coefficients() {
    let p = two_interior();
    let c = interior_cubic(&p).unwrap();
    let oracle = interpolated_cubic(&p);
    let got = [c.c3, c.c2, c.c1, c.c0];
    for (g, o) in got.iter().zip(oracle) {
        assert!((g - o).abs() < 1e-9 * (1.0 + o.abs()), "{got:?} vs {oracle:?}");
    }
    for (g, e) in got.iter().zip([100.0, -90.0, 19.25, 0.075]) {
        assert!((g - e).abs() <= 1e-12 * e.abs(), "{got:?}");
    }
}

#[test]
fn two_interior_equilibria_and_classes() {
    let p = two_interior();
    let oracle = nullcline_roots(&p, 100_000);
    assert_eq!(oracle.len(), 2);
    let eqs = interior(&p);
    assert_eq!(eqs.len(), 2);
    let (saddle, stable) = (&eqs[0], &eqs[1]);
    assert!((stable.location[0] - 0.5428).abs() < 5e-4);
    assert!((stable.location[1] - 1.0841).abs() < 5e-4);
    assert!(stable.class.is_stable());
    assert!((saddle.location[0] - oracle[0]).abs() < 1e-8);
    assert!((saddle.location[0] - 0.361).abs() < 5e-3);
    assert!((saddle.location[1] - 1.050).abs() < 5e-3);
    assert_eq!(saddle.class, StabilityClass::Saddle);
}

#[test]
fn boundary_equilibria_examples() {
    let p = two_interior();
    let b = boundary_equilibria(&p);
    let e01 = b.iter().find(|e| e.kind == EcoKind::E01).unwrap();
    assert!((e01.location[1] - 0.26).abs() < 1e-12);
    assert!(e01.class.is_stable());

    let q = EcoParams { d: 0.3, ..p };
    let b = boundary_equilibria(&q);
    assert_eq!(b.len(), 2);
    assert_eq!(b[0].class, StabilityClass::Saddle);

    let q = EcoParams { d: 0.5, ..p };
    let e10 = boundary_equilibria(&q).into_iter().find(|e| e.kind == EcoKind::E10).unwrap();
    assert!(e10.class.is_stable());
    assert!(interior(&q).is_empty());
}

#[test]
fn c0_forced_negative_when_death_equals_growth() {
    let p = EcoParams { d: 0.25, ..two_interior() };
    let c = interior_cubic(&p).unwrap();
    assert!((c.c0 + p.r1 * p.r2 * p.k1).abs() < 1e-12);
}

#[test]
fn three_root_window() {
    let p = EcoParams { d: 0.23, ..two_interior() };
    assert_eq!(nullcline_roots(&p, 100_000).len(), 3);
    assert_eq!(interior(&p).len(), 3);
}

#[test]
fn degenerate_interaction() {
    let p = EcoParams { a: 0.0, ..two_interior() };
    assert!(matches!(interior_cubic(&p), Err(coevo::Error::DegenerateNoInteraction(_))));
    assert!(interior(&p).is_empty());
    let r = consistency_check(&p);
    assert!(r.implementation_roots.is_empty() && r.oracle_roots.is_empty() && !r.mismatch);
}

#[test]
fn no_handling_time_gives_linear_nullcline() {
    let p = EcoParams { h: 0.0, d: 0.1, ..two_interior() };
    let eqs = interior(&p);
    let oracle = nullcline_roots(&p, 100_000);
    assert_eq!(eqs.len(), oracle.len());
    for (e, o) in eqs.iter().zip(&oracle) {
        assert!((e.location[0] - o).abs() < 1e-8);
    }
}

#[test]
fn condition_report_examples() {
    let p = EcoParams { d: 0.4, ..two_interior() };
    let r = condition_report(&p);
    assert_eq!(r.status("permanent"), VerdictStatus::Holds);

    let r = condition_report(&two_interior());
    assert!(r.inequality("e01_resists_host").unwrap().holds);
    assert_eq!(r.status("e01_globally_stable"), VerdictStatus::Fails);

    let p = EcoParams { d: 0.0, a: 0.5, ..two_interior() };
    let r = condition_report(&p);
    let host = r.inequality("host_invades_e01").unwrap();
    assert_eq!(host.lhs, p.r1 / p.a);
    assert_eq!(host.rhs, p.k2);
    assert_eq!(r.status("host_persistent"), VerdictStatus::Holds);
    assert!(r.is_consistent());
}

#[test]
fn consistency_check_on_two_interior() {
    let r = consistency_check(&two_interior());
    assert!(!r.mismatch && r.count_match);
    assert_eq!(r.oracle_roots.len(), 2);
}

fn spectra_agree(e: &Equilibrium, p: &EcoParams) -> bool {
    let j = numeric_jacobian(|x| eco_rhs(x, p), e.location);
    spectrum_distance(&e.eigenvalues, &eigenvalues(&j)) < 1e-6
}

proptest! {
    #![proptest_config(cases(1000))]

    #[test]
    fn interior_roots_match_nullcline_oracle(p in eco_params()) {
        let eqs = interior(&p);
        let oracle = nullcline_roots(&p, 100_000);
        let close_pair = oracle.windows(2).any(|w| w[1] - w[0] < 1e-4);
        prop_assume!(!close_pair);
        prop_assert_eq!(eqs.len(), oracle.len(), "{:?} vs {:?}", eqs, oracle);
        for (e, o) in eqs.iter().zip(&oracle) {
            prop_assert!((e.location[0] - o).abs() < 1e-6);
            prop_assert!(e.location[1] > 0.0);
        }
        prop_assert!(eqs.len() <= 3);
    }

    #[test]
    fn condition_reports_are_reproducible(p in eco_params()) {
        let r = condition_report(&p);
        prop_assert!(r.is_consistent());
    }

    #[test]
    fn cubic_constant_sign(p in eco_params()) {
        prop_assume!(p.r2 > 0.0);
        let c = interior_cubic(&p).unwrap();
        let lhs = p.k2 * (1.0 - p.d / p.r2) - p.r1 / p.a;
        prop_assume!(lhs.abs() > 1e-9);
        prop_assert_eq!(c.c0 > 0.0, lhs > 0.0);
        prop_assert!(c.c3 > 0.0);
    }

    #[test]
    fn excluded_parasite_leaves_host_only(p in eco_params(), extra in 0.001f64..1.0) {
        let p = EcoParams { d: p.r2 + p.host_gain_at_k1() + extra, ..p };
        prop_assert!(interior(&p).is_empty());
        let e10 = boundary_equilibria(&p).into_iter().find(|e| e.kind == EcoKind::E10).unwrap();
        prop_assert!(e10.class.is_stable());
    }

    #[test]
    fn facultative_pairs_need_positive_c0(p in eco_params(), frac in 0.0f64..0.99) {
        let p = EcoParams { d: frac * p.r2, ..p };
        let eqs = interior(&p);
        if eqs.len() == 2 && eqs.iter().all(|e| e.multiplicity == 1) {
            prop_assert!(interior_cubic(&p).unwrap().c0 > 0.0);
            let e01 = boundary_equilibria(&p).into_iter().find(|e| e.kind == EcoKind::E01).unwrap();
            prop_assert!(e01.class.is_stable());
        }
    }

    #[test]
    fn jacobian_spectra_match_finite_differences(p in eco_params()) {
        for e in all_equilibria(&p).unwrap() {
            prop_assert!(spectra_agree(&e, &p), "{:?}", e);
        }
    }

    #[test]
    fn classification_invariant_under_facultative_reduction(p in eco_params(), frac in 0.0f64..0.99) {
        let p = EcoParams { d: frac * p.r2, ..p };
        let q = p.facultative_reduction().unwrap();
        let a = interior(&p);
        let b = interior(&q);
        prop_assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x.location[0] - y.location[0]).abs() < 1e-9);
            prop_assert!((x.location[1] - y.location[1]).abs() < 1e-9 * (1.0 + x.location[1]));
            prop_assert_eq!(x.class, y.class);
        }
    }
}
