use super::{EvoEquilibrium, EvoKind};
use crate::conditions::{ConditionReport, Relation};
use crate::error::{Error, Result};
use crate::model::EvoConfig;

/// Sufficient conditions for local stability, ESS and uniqueness of the
/// aligned equilibria of the Gaussian model.
pub fn ess_sufficient_conditions(cfg: &EvoConfig, eq: &EvoEquilibrium) -> Result<ConditionReport> {
    use Relation::{Gt, Lt};
    if !cfg.traits.is_gaussian() {
        return Err(Error::RequiresGaussian);
    }
    let t = &cfg.traits;
    let p = cfg.peak_params();
    let (r1, r2, e, h) = (p.r1, p.r2, p.e, p.h);
    let (k01, k02, a0) = (t.k01, t.k02, t.a0);
    let (sk1, sk2, sa) = (t.sigma_k1, t.sigma_k2, t.sigma_a);
    let ratio = eq.state[1] / eq.state[0];

    let host_rate = r1 / (sk1 * sk1 * k01);
    let m1 = sk2 / sk1 * (r1 * e * k02 / (r2 * k01)).sqrt();
    let m2 = r1 * sk2 * sk2 * sa * sa / (a0 * k01);
    let m = m1.max(m2);

    let mut r = ConditionReport::new();
    r.add("stable_evo_min", (2.0 * r2 / k02).min(host_rate), Gt, a0);
    r.add(
        "stable_evo_det",
        r1 * r2 / (k01 * k02) + e * a0 * a0 / (1.0 + a0 * h * k01).powi(3),
        Gt,
        a0 * a0 * k02 * (h * r2 + e),
    );
    r.add("stable_evo_ratio", m, Gt, ratio);
    r.add("ess0", host_rate, Gt, m * a0 / (sa * sa));
    r.add("wide_attack_ratio", m1, Gt, ratio);
    r.add("wide_attack_width", sa * sa / (sk1 * sk2), Gt, (e * k01 * k02 / (r1 * r2)).sqrt() * a0);
    r.add("narrow_capacity_ratio", m2, Gt, ratio);
    r.add("narrow_capacity_width", sk1 * sk2, Lt, 1.0);
    let cap = if r2 > p.d { r1 / (1.0 - p.d / r2) } else { f64::INFINITY };
    r.add("unique_parasite_capacity", k02 * a0, Lt, cap);
    r.add("unique_handling", k01 * a0, Lt, if h > 0.0 { 1.0 / h } else { f64::INFINITY });
    r.add("host_only_excludes_parasite", p.d, Gt, r2 + e * a0 * k01 / (1.0 + a0 * h * k01));

    let interior = eq.kind == EvoKind::InteriorAligned;
    let host_only = eq.kind == EvoKind::HostOnly;
    let stable: &[&[&str]] = &[&["stable_evo_min", "stable_evo_det", "stable_evo_ratio"]];
    let ess: &[&[&str]] = &[&["stable_evo_min", "stable_evo_det", "stable_evo_ratio", "ess0"]];
    let shortcut: &[&[&str]] = &[
        &["stable_evo_min", "stable_evo_det", "wide_attack_ratio", "wide_attack_width"],
        &["stable_evo_min", "stable_evo_det", "narrow_capacity_ratio", "narrow_capacity_width"],
    ];
    let unique: &[&[&str]] = &[&[
        "unique_parasite_capacity",
        "unique_handling",
        "stable_evo_min",
        "stable_evo_det",
        "wide_attack_ratio",
        "wide_attack_width",
    ]];
    let host: &[&[&str]] = &[&["host_only_excludes_parasite"]];
    let not_interior = "equilibrium is not an aligned interior equilibrium";
    let not_host = "equilibrium is not the host-only equilibrium";

    if interior {
        r.add_verdict("interior_locally_stable", stable);
        r.add_verdict("interior_ess", ess);
        r.add_verdict("interior_ess_shortcut", shortcut);
        if sk2 > sk1 {
            r.add_verdict("interior_unique_ess", unique);
        } else {
            r.add_not_applicable("interior_unique_ess", unique, "requires sigma_k2 > sigma_k1");
        }
    } else {
        r.add_not_applicable("interior_locally_stable", stable, not_interior);
        r.add_not_applicable("interior_ess", ess, not_interior);
        r.add_not_applicable("interior_ess_shortcut", shortcut, not_interior);
        r.add_not_applicable("interior_unique_ess", unique, not_interior);
    }
    if host_only {
        r.add_verdict("host_only_ess", host);
        r.add_verdict("host_only_unique_ess", host);
    } else {
        r.add_not_applicable("host_only_ess", host, not_host);
        r.add_not_applicable("host_only_unique_ess", host, not_host);
    }
    Ok(r)
}
