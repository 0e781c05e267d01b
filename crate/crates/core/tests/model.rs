mod common;

use approx::assert_relative_eq;
use coevo::model::*;
use common::*;
use proptest::prelude::*;

fn gaussian(sigma_a: f64) -> EvoConfig {
    EvoConfig {
        r1: 1.0,
        r2: 0.25,
        h: 4.0,
        e: 0.9,
        traits: TraitModel {
            family: TraitFamily::Gaussian,
            k01: 1.0,
            k02: 1.0,
            a0: 5.0,
            sigma_k1: 1.0,
            sigma_k2: 1.0,
            sigma_a,
            death: DeathRate::Constant(0.185),
        },
        sigma1_sq: 1.0,
        sigma2_sq: 1.0,
    }
}

fn quartic_obligate() -> EvoConfig {
    coevo::config::quartic_obligate()
}

#[test]
fn gaussian_capacity_peak() {
    let mut cfg = gaussian(1.0);
    cfg.traits.sigma_k1 = 0.7;
    let k = cfg.traits.k1(0.0).unwrap();
    assert_eq!(k.value, 1.0);
    assert_eq!(k.d1, 0.0);
    assert_relative_eq!(k.d2, -1.0 / 0.49, max_relative = 1e-14);
}

#[test]
fn quartic_capacity_at_corners() {
    let t = quartic_obligate().traits;
    for v in [0.0, 1.0] {
        let k = t.k2(v).unwrap();
        assert_relative_eq!(k.value, t.k02, max_relative = 1e-14);
        assert_eq!(k.d1, 0.0);
        // -K0 c^2 / sigma^2 with c = 1
        assert_relative_eq!(k.d2, -t.k02 / (t.sigma_k2 * t.sigma_k2), max_relative = 1e-12);
    }
}

#[test]
fn quartic_efficiency_curvature_at_off_corner() {
    // At sigma_a^2 = 2 the curvature of the defined exponent equals -2 a0 c^2 / sigma_a^2.
    let mut t = quartic_obligate().traits;
    t.sigma_a = 2f64.sqrt();
    let a = t.a(0.0, 1.0).unwrap();
    assert_relative_eq!(a.value, t.a0, max_relative = 1e-14);
    assert_relative_eq!(a.d_v2v2, -2.0 * t.a0 / 2.0, max_relative = 1e-12);
    assert_relative_eq!(a.d_v1v1, -2.0 * t.a0 / 2.0, max_relative = 1e-12);
    // General width: -4 a0 c^2 / sigma_a^4.
    t.sigma_a = 0.56;
    let a = t.a(1.0, 0.0).unwrap();
    assert_relative_eq!(a.d_v1v1, -4.0 * t.a0 / 0.56f64.powi(4), max_relative = 1e-12);
}

#[test]
fn quartic_rejects_traits_outside_box() {
    let t = quartic_obligate().traits;
    assert!(matches!(t.k1(-0.1), Err(coevo::Error::DomainViolation { .. })));
    assert!(t.a(0.5, 1.2).is_err());
}

#[test]
fn host_fitness_vanishes_at_logistic_equilibrium() {
    let cfg = gaussian(0.5);
    assert_eq!(fitness_g1(0.0, [0.0, 0.0], [1.0, 0.0], &cfg).unwrap(), 0.0);
}

#[test]
fn host_fitness_against_parasite_only_state() {
    let cfg = quartic_obligate();
    let t = &cfg.traits;
    let x2 = t.k02 * (1.0 - d_ref(t, 0.0) / cfg.r2);
    assert!(x2 > 0.0);
    let expected = cfg.r1 - a_ref(t, 0.0, 0.0) * x2;
    let got = fitness_g1(0.0, [0.0, 0.0], [0.0, x2], &cfg).unwrap();
    assert_relative_eq!(got, expected, max_relative = 1e-12);
}

#[test]
fn fitness_vanishes_at_two_interior_equilibrium() {
    let cfg = gaussian(0.5);
    let x = [0.5428, 1.0841];
    assert!(fitness_g1(0.0, [0.0, 0.0], x, &cfg).unwrap().abs() < 1e-3);
    assert!(fitness_g2(0.0, [0.0, 0.0], x, &cfg).unwrap().abs() < 1e-3);
}

#[test]
fn parasite_fitness_examples() {
    let mut cfg = gaussian(0.5);
    cfg.traits.death = DeathRate::Constant(0.1);
    let x2 = 1.0 - 0.1 / 0.25;
    assert!(fitness_g2(0.0, [0.0, 0.0], [0.0, x2], &cfg).unwrap().abs() < 1e-15);

    let p = cfg.r2;
    let gain = cfg.e * 5.0 / (1.0 + cfg.h * 5.0);
    let got = fitness_g2(0.0, [0.0, 0.0], [1.0, 0.0], &cfg).unwrap();
    assert_relative_eq!(got, gain - 0.1 + p, max_relative = 1e-14);
}

#[test]
fn obligate_quartic_host_only_invadable() {
    let cfg = quartic_obligate();
    let best = (0..=1000)
        .map(|k| fitness_g2(k as f64 / 1000.0, [0.0, 1.0], [cfg.traits.k01, 0.0], &cfg).unwrap())
        .fold(f64::NEG_INFINITY, f64::max);
    assert!(best > 0.0, "{best}");
}

#[test]
fn eco_rhs_fixed_points() {
    let p = two_interior();
    assert_eq!(eco_rhs([0.0, 0.0], &p), [0.0, 0.0]);
    assert_eq!(eco_rhs([p.k1, 0.0], &p), [0.0, 0.0]);
    let r = eco_rhs([0.5428, 1.0841], &p);
    assert!(r[0].abs() < 1e-3 && r[1].abs() < 1e-3, "{r:?}");
}

#[test]
fn misaligned_state_is_stationary() {
    // The four-decimal state leaves du1 near 2e-3 because the host gradient is
    // sensitive to x1 there; the solved state rounds to it and is stationary.
    let cfg = gaussian(2.0);
    let printed = [0.0102, 0.3452, 2.3846, 0.1287];
    let eq = coevo::evo::misaligned_interior_solve(&cfg, &Default::default())
        .unwrap()
        .into_iter()
        .find(|e| e.state[2] > 0.0)
        .unwrap();
    for (a, b) in eq.state.iter().zip(printed) {
        assert!((a - b).abs() <= 5e-5, "{:?}", eq.state);
    }
    let r = evo_rhs(eq.state, &cfg).unwrap();
    assert!(r.iter().all(|v| v.abs() < 1e-3), "{r:?}");
    let at_printed = evo_rhs(printed, &cfg).unwrap();
    assert!(at_printed[..2].iter().chain(&at_printed[3..]).all(|v| v.abs() < 1e-3));
}

#[test]
fn aligned_gaussian_traits_do_not_move() {
    let r = evo_rhs([0.3, 0.7, 0.0, 0.0], &gaussian(0.5)).unwrap();
    assert_eq!(r[2], 0.0);
    assert_eq!(r[3], 0.0);
}

fn close(an: f64, num: f64) -> bool {
    (an - num).abs() <= 1e-5 * num.abs().max(1e-3)
}

proptest! {
    #![proptest_config(cases(1000))]

    #[test]
    fn selection_gradients_match_finite_differences(
        cfg in evo_config(), t in (0.0f64..1.0, 0.0f64..1.0, 0.0f64..1.0, 0.0f64..1.0), x in (0.0f64..3.0, 0.0f64..3.0)
    ) {
        let u = [trait_in_domain(&cfg, t.0), trait_in_domain(&cfg, t.1)];
        let v = [trait_in_domain(&cfg, t.2), trait_in_domain(&cfg, t.3)];
        let x = [x.0, x.1];
        let an1 = fitness_g1_gradient(v[0], u, x, &cfg).unwrap();
        let an2 = fitness_g2_gradient(v[1], u, x, &cfg).unwrap();
        let fd1 = fd(|w| g1_ref(&cfg, w, u, x), v[0]);
        let fd2 = fd(|w| g2_ref(&cfg, w, u, x), v[1]);
        prop_assert!(close(an1, fd1), "dG1 {an1} vs {fd1}");
        prop_assert!(close(an2, fd2), "dG2 {an2} vs {fd2}");
        prop_assert!((fitness_g1(v[0], u, x, &cfg).unwrap() - g1_ref(&cfg, v[0], u, x)).abs() < 1e-12 * (1.0 + g1_ref(&cfg, v[0], u, x).abs()));
        prop_assert!((fitness_g2(v[1], u, x, &cfg).unwrap() - g2_ref(&cfg, v[1], u, x)).abs() < 1e-12 * (1.0 + g2_ref(&cfg, v[1], u, x).abs()));
    }

    #[test]
    fn trait_second_derivatives_match_finite_differences(cfg in evo_config(), t in (0.0f64..1.0, 0.0f64..1.0)) {
        let tm = &cfg.traits;
        let v = [trait_in_domain(&cfg, t.0), trait_in_domain(&cfg, t.1)];
        let k1 = tm.k1(v[0]).unwrap();
        prop_assert!(close(k1.d1, fd(|w| k_ref(tm, 1, w), v[0])));
        prop_assert!(close(k1.d2, fd(|w| tm.k1(w).unwrap().d1, v[0])));
        let a = tm.a(v[0], v[1]).unwrap();
        prop_assert!(close(a.d_v1v1, fd(|w| tm.a(w, v[1]).unwrap().d_v1, v[0])));
        prop_assert!(close(a.d_v2v2, fd(|w| tm.a(v[0], w).unwrap().d_v2, v[1])));
        prop_assert!(close(a.d_v1v2, fd(|w| tm.a(v[0], w).unwrap().d_v1, v[1])));
        let d = tm.d(v[1]).unwrap();
        prop_assert!(close(d.d1, fd(|w| d_ref(tm, w), v[1])));
        prop_assert!(close(d.d2, fd(|w| tm.d(w).unwrap().d1, v[1])));
    }

    #[test]
    fn frozen_evolution_is_bitwise_ecology(cfg in evo_config(), t in (0.0f64..1.0, 0.0f64..1.0), x in (0.0f64..3.0, 0.0f64..3.0)) {
        let cfg = EvoConfig { sigma1_sq: 0.0, sigma2_sq: 0.0, ..cfg };
        let u = [trait_in_domain(&cfg, t.0), trait_in_domain(&cfg, t.1)];
        let r = evo_rhs([x.0, x.1, u[0], u[1]], &cfg).unwrap();
        let eco = eco_rhs([x.0, x.1], &cfg.frozen(u[0], u[1]).unwrap());
        prop_assert_eq!(r[0].to_bits(), eco[0].to_bits());
        prop_assert_eq!(r[1].to_bits(), eco[1].to_bits());
        prop_assert_eq!(r[2], 0.0);
        prop_assert_eq!(r[3], 0.0);
    }

    #[test]
    fn gaussian_model_is_symmetric(cfg in evo_config(), u in (-3.0f64..3.0, -3.0f64..3.0), x in (0.0f64..3.0, 0.0f64..3.0)) {
        let mut cfg = cfg;
        cfg.traits.family = TraitFamily::Gaussian;
        cfg.traits.death = DeathRate::Constant(0.3);
        let a = evo_rhs([x.0, x.1, u.0, u.1], &cfg).unwrap();
        let b = evo_rhs([x.0, x.1, -u.0, -u.1], &cfg).unwrap();
        prop_assert_eq!(a[0], b[0]);
        prop_assert_eq!(a[1], b[1]);
        prop_assert_eq!(a[2], -b[2]);
        prop_assert_eq!(a[3], -b[3]);
    }

    #[test]
    fn quartic_corners_are_trait_stationary(cfg in evo_config(), x in (0.0f64..3.0, 0.0f64..3.0), corner in 0usize..4) {
        let mut cfg = cfg;
        let c = match cfg.traits.family {
            TraitFamily::BoundedQuartic { c } => c,
            _ => { cfg.traits.family = TraitFamily::BoundedQuartic { c: 1.0 }; 1.0 }
        };
        let u = [c * (corner & 1) as f64, c * (corner >> 1) as f64];
        let r = evo_rhs([x.0, x.1, u[0], u[1]], &cfg).unwrap();
        prop_assert_eq!(r[2], 0.0);
        prop_assert_eq!(r[3], 0.0);
    }

    #[test]
    fn facultative_reduction_preserves_parasite_equation(p in eco_params(), frac in 0.0f64..0.99, x in (0.0f64..3.0, 0.0f64..3.0)) {
        let p = EcoParams { d: frac * p.r2, ..p };
        let q = p.facultative_reduction().unwrap();
        let a = eco_rhs_ref(&p, [x.0, x.1]);
        let b = eco_rhs([x.0, x.1], &q);
        prop_assert!((a[1] - b[1]).abs() <= 1e-12 * (1.0 + a[1].abs()), "{} vs {}", a[1], b[1]);
        prop_assert_eq!(eco_rhs([x.0, x.1], &p)[0], b[0]);
    }
}
