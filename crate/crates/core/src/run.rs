//! Executes a [`RunConfig`] and writes its artifacts.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::config::{Command, ModelConfig, RunConfig};
use crate::eco::{all_equilibria, condition_report, consistency_check, interior_cubic, Equilibrium};
use crate::error::{Error, Result};
use crate::evo::{
    all_evo_equilibria, boundary_evo_equilibria, ess_check, ess_sufficient_conditions, EvoEquilibrium,
    EvoKind, ESS_GRID_POINTS, ESS_TOL,
};
use crate::model::{EcoParams, EvoConfig};
use crate::simulate::{self, integrate_eco, integrate_evo, phase_metrics, TerminalEvent, Trajectory};
use crate::sweep::{sweep1d, sweep2d, Sweep1dResult, Sweep2dResult};

pub const TOOL: &str = "coevo";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// What a run produced.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub summary: String,
    pub artifacts: Vec<PathBuf>,
    pub sidecar: Value,
}

/// Formats a float with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Path of the metadata sidecar for a stem.
pub fn sidecar_path(out: &Path, stem: &str) -> PathBuf {
    out.join(format!("{stem}.meta.json"))
}

pub fn write_trajectory_csv(path: &Path, traj: &Trajectory) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let header: &[&str] = if traj.dim() == 4 { &["t", "x1", "x2", "u1", "u2"] } else { &["t", "x1", "x2"] };
    w.write_record(header)?;
    for (t, s) in traj.times.iter().zip(&traj.states) {
        let mut row = vec![fmt_f64(*t)];
        row.extend(s.iter().map(|v| fmt_f64(*v)));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_sweep2d_csv(path: &Path, r: &Sweep2dResult) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([&r.axes[0].param, &r.axes[1].param, "n_interior", "facultative", "above_line"])?;
    let nan = "NaN".to_string();
    for c in &r.cells {
        let mut row = vec![fmt_f64(c.values[0]), fmt_f64(c.values[1])];
        match c.n_interior {
            Some(n) => row.extend([n.to_string(), c.facultative.to_string(), c.above_line.to_string()]),
            None => row.extend([nan.clone(), nan.clone(), nan.clone()]),
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_sweep1d_csv(path: &Path, r: &Sweep1dResult) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([r.axis.param.as_str(), "root_index", "x1", "x2", "class", "max_re_lambda"])?;
    let mut roots = r.roots.iter().peekable();
    for s in &r.samples {
        if s.n_interior.is_none() {
            let nan = "NaN".to_string();
            w.write_record([fmt_f64(s.value), nan.clone(), nan.clone(), nan.clone(), nan.clone(), nan])?;
            continue;
        }
        while let Some(root) = roots.next_if(|x| x.value == s.value) {
            w.write_record([
                fmt_f64(root.value),
                root.root_index.to_string(),
                fmt_f64(root.x1),
                fmt_f64(root.x2),
                root.class.as_str().to_string(),
                fmt_f64(root.max_re_lambda),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn write_json(path: &Path, v: &impl serde::Serialize) -> Result<()> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    fs::write(path, s)?;
    Ok(())
}

struct Ctx<'a> {
    cfg: &'a RunConfig,
    out: &'a Path,
    artifacts: Vec<PathBuf>,
    summary: String,
}

impl Ctx<'_> {
    fn path(&self, ext: &str) -> PathBuf {
        self.out.join(format!("{}.{ext}", self.cfg.output.stem))
    }

    fn json(&mut self, v: &impl serde::Serialize) -> Result<()> {
        let p = self.path("json");
        write_json(&p, v)?;
        self.artifacts.push(p);
        Ok(())
    }

    fn line(&mut self, s: impl AsRef<str>) {
        self.summary.push_str(s.as_ref());
        self.summary.push('\n');
    }
}

/// Runs the configured command, writing artifacts under `out`. The worker
/// count affects speed only.
pub fn execute(cfg: &RunConfig, out: &Path, workers: usize) -> Result<Outcome> {
    cfg.validate()?;
    fs::create_dir_all(out)?;
    let mut ctx = Ctx { cfg, out, artifacts: Vec::new(), summary: String::new() };
    ctx.line(format!("{TOOL} {VERSION}: {}", cfg.command.as_str()));
    let mut notes: Vec<String> = Vec::new();

    let result = match (&cfg.command, &cfg.model) {
        (Command::Equilibria, ModelConfig::Eco(p)) => eco_equilibria(&mut ctx, p, false)?,
        (Command::Report, ModelConfig::Eco(p)) => eco_equilibria(&mut ctx, p, true)?,
        (Command::Equilibria, ModelConfig::Evo(c)) => evo_equilibria(&mut ctx, c, false)?,
        (Command::Ess | Command::Report, ModelConfig::Evo(c)) => evo_equilibria(&mut ctx, c, true)?,
        (Command::Simulate, model) => {
            notes.push(format!(
                "convergence: final |rhs|_inf and spread over the last max(10%, {}) samples below {:e}; \
                 oscillation: >= {} major peaks in the second half, relative amplitude > {:e}, spacing CV < {}",
                simulate::MIN_WINDOW,
                simulate::CONVERGENCE_TOL,
                simulate::MIN_PEAKS,
                simulate::MIN_RELATIVE_AMPLITUDE,
                simulate::MAX_SPACING_CV
            ));
            simulate_cmd(&mut ctx, model)?
        }
        (Command::Sweep1d, ModelConfig::Eco(p)) => {
            let r = sweep1d(p, cfg.numerics.sweep1d.as_ref().expect("validated"), workers)?;
            sweep1d_out(&mut ctx, &r)?
        }
        (Command::Sweep2d, ModelConfig::Eco(p)) => {
            let axes = cfg.numerics.sweep2d.as_ref().expect("validated");
            notes.push(format!("{} on the horizontal axis, {} on the vertical axis", axes[0].param, axes[1].param));
            let r = sweep2d(p, axes, workers, cfg.numerics.seed)?;
            sweep2d_out(&mut ctx, &r)?
        }
        _ => unreachable!("rejected by validate"),
    };

    if cfg.output.plot_script {
        if let Some(script) = plot_script(cfg) {
            let p = ctx.path("plot.py");
            fs::write(&p, script)?;
            ctx.artifacts.push(p);
        }
    }

    let sidecar = json!({
        "tool": TOOL,
        "version": VERSION,
        "config": cfg.to_value(),
        "notes": notes,
        "result": result,
    });
    let meta = sidecar_path(out, &cfg.output.stem);
    write_json(&meta, &sidecar)?;
    ctx.artifacts.push(meta);
    for a in &ctx.artifacts {
        let _ = writeln!(ctx.summary, "wrote {}", a.display());
    }
    Ok(Outcome { summary: ctx.summary, artifacts: ctx.artifacts, sidecar })
}

/// The serialized name of a unit enum variant.
fn label(v: &impl serde::Serialize) -> String {
    match serde_json::to_value(v) {
        Ok(Value::String(s)) => s,
        _ => String::new(),
    }
}

fn fmt_state(s: &[f64]) -> String {
    let parts: Vec<String> = s.iter().map(|v| format!("{v:.6}")).collect();
    format!("({})", parts.join(", "))
}

fn eco_equilibria(ctx: &mut Ctx, p: &EcoParams, report: bool) -> Result<Value> {
    let eqs: Vec<Equilibrium> = all_equilibria(p)?;
    for e in &eqs {
        let mult = if e.multiplicity > 1 { format!(" (multiplicity {})", e.multiplicity) } else { String::new() };
        ctx.line(format!("  {:<8} {:<28} {}{mult}", label(&e.kind), fmt_state(&e.location), e.class.as_str()));
    }
    let cubic = interior_cubic(p).ok();
    let mut body = json!({ "params": p, "cubic": cubic, "equilibria": eqs });
    if report {
        let conditions = condition_report(p);
        let consistency = consistency_check(p);
        for v in &conditions.verdicts {
            ctx.line(format!("  {:<28} {}", v.name, label(&v.status)));
        }
        ctx.line(format!(
            "  sign-scan oracle: {} roots, mismatch = {}",
            consistency.oracle_roots.len(),
            consistency.mismatch
        ));
        body["conditions"] = serde_json::to_value(&conditions)?;
        body["consistency"] = serde_json::to_value(&consistency)?;
    }
    ctx.json(&body)?;
    Ok(json!({ "n_equilibria": eqs.len() }))
}

fn evo_equilibria(ctx: &mut Ctx, c: &EvoConfig, with_ess: bool) -> Result<Value> {
    let mut eqs: Vec<EvoEquilibrium> = all_evo_equilibria(c)?;
    let rejected = if c.traits.is_gaussian() { vec![] } else { boundary_evo_equilibria(c)?.rejected };
    if with_ess {
        for e in &mut eqs {
            e.ess = Some(ess_check(e, c)?);
            if c.traits.is_gaussian() && e.conditions.is_none() && e.kind != EvoKind::InteriorMisaligned {
                e.conditions = Some(ess_sufficient_conditions(c, e)?);
            }
        }
    }
    let mut rows = Vec::new();
    for e in &eqs {
        let ess = e.ess.as_ref().map(|v| if v.ess { "ESS" } else { "not ESS" }).unwrap_or("");
        ctx.line(format!(
            "  {:<20} {:<46} {:<24} CS={} {ess}",
            label(&e.kind),
            fmt_state(&e.state),
            e.class.as_str(),
            e.cs
        ));
        rows.push(json!({
            "kind": e.kind,
            "state": e.state,
            "class": e.class,
            "cs": e.cs,
            "ess": e.ess.as_ref().map(|v| v.ess),
        }));
    }
    for r in &rejected {
        ctx.line(format!("  rejected {} at {:?}: {}", label(&r.kind), r.traits, r.reason));
    }
    ctx.json(&json!({ "config": c, "equilibria": eqs, "rejected": rejected }))?;
    Ok(json!({
        "equilibria": rows,
        "ess_grid_points": ESS_GRID_POINTS,
        "ess_tol": ESS_TOL,
    }))
}

fn simulate_cmd(ctx: &mut Ctx, model: &ModelConfig) -> Result<Value> {
    let spec = ctx.cfg.numerics.simulation.as_ref().expect("validated");
    let traj = match model {
        ModelConfig::Eco(p) => integrate_eco(p, spec)?,
        ModelConfig::Evo(c) => integrate_evo(c, spec)?,
    };
    let csv_path = ctx.path("csv");
    write_trajectory_csv(&csv_path, &traj)?;
    ctx.artifacts.push(csv_path);
    let phase = match traj.event {
        TerminalEvent::Oscillating { .. } => phase_metrics(&traj).ok(),
        _ => None,
    };
    ctx.line(format!("  event: {}", event_line(&traj.event)));
    ctx.line(format!("  final state: {}", fmt_state(traj.last_state())));
    ctx.line(format!(
        "  steps: {} accepted, {} rejected; final |rhs| = {:.3e}",
        traj.accepted_steps, traj.rejected_steps, traj.final_rhs_norm
    ));
    if let Some(ph) = &phase {
        ctx.line(format!("  phase lag: {:.4} of a period (period {:.4})", ph.mean_abs_lag, ph.period));
    }
    Ok(json!({
        "event": traj.event,
        "final_state": traj.last_state(),
        "final_rhs_norm": traj.final_rhs_norm,
        "accepted_steps": traj.accepted_steps,
        "rejected_steps": traj.rejected_steps,
        "phase": phase,
    }))
}

fn event_line(e: &TerminalEvent) -> String {
    match e {
        TerminalEvent::ReachedTEnd => "REACHED_T_END".into(),
        TerminalEvent::Converged { state } => format!("CONVERGED to {}", fmt_state(state)),
        TerminalEvent::Oscillating { period, amplitude } => {
            format!("OSCILLATING (period {period:.4}, amplitude {amplitude:.4})")
        }
    }
}

fn sweep1d_out(ctx: &mut Ctx, r: &Sweep1dResult) -> Result<Value> {
    let p = ctx.path("csv");
    write_sweep1d_csv(&p, r)?;
    ctx.artifacts.push(p);
    let param = &r.axis.param;
    ctx.line(format!("  {} samples of {param} in [{}, {}]", r.axis.count, r.axis.min, r.axis.max));
    for c in &r.count_changes {
        ctx.line(format!("  interior count {} -> {} for {param} in [{:.5}, {:.5}]", c.from, c.to, c.lo, c.hi));
    }
    for h in &r.hopf {
        ctx.line(format!("  Hopf signature for {param} in [{:.5}, {:.5}] at x1 = {:.4}", h.lo, h.hi, h.x1));
    }
    let errors = r.samples.iter().filter(|s| s.error.is_some()).count();
    if errors > 0 {
        ctx.line(format!("  {errors} samples failed (NaN rows)"));
    }
    Ok(json!({
        "axis": r.axis,
        "base": r.base,
        "counts": r.samples,
        "count_changes": r.count_changes,
        "hopf": r.hopf,
    }))
}

fn sweep2d_out(ctx: &mut Ctx, r: &Sweep2dResult) -> Result<Value> {
    let p = ctx.path("csv");
    write_sweep2d_csv(&p, r)?;
    ctx.artifacts.push(p);
    let mut hist = [0usize; 4];
    let mut errors = Vec::new();
    for c in &r.cells {
        match c.n_interior {
            Some(n) => hist[n.min(3)] += 1,
            None => errors.push(json!({ "cell": c.index, "error": c.error })),
        }
    }
    ctx.line(format!("  {}x{} cells; interior counts 0/1/2/3: {:?}", r.axes[0].count, r.axes[1].count, hist));
    ctx.line(format!(
        "  spot checks: {} sampled, {} mismatches, {} unresolved",
        r.spot_check.sampled,
        r.spot_check.mismatches.len(),
        r.spot_check.unresolved
    ));
    ctx.line(format!("  adjacent-cell refinement flags: {}", r.refinement_flags.len()));
    if !errors.is_empty() {
        ctx.line(format!("  {} cells failed (NaN rows)", errors.len()));
    }
    Ok(json!({
        "axes": r.axes,
        "base": r.base,
        "count_histogram": hist,
        "refinement_flags": r.refinement_flags,
        "spot_check": r.spot_check,
        "errors": errors,
    }))
}

fn plot_script(cfg: &RunConfig) -> Option<String> {
    let stem = &cfg.output.stem;
    let body = match cfg.command {
        Command::Simulate => format!(
            r#"data = read("{stem}.csv")
cols = [c for c in data if c != "t"]
fig, axes = plt.subplots(len(cols), 1, sharex=True, figsize=(8, 2 * len(cols)))
for ax, c in zip(axes, cols):
    ax.plot(data["t"], data[c])
    ax.set_ylabel(c)
axes[-1].set_xlabel("t")
"#
        ),
        Command::Sweep1d => {
            let p = &cfg.numerics.sweep1d.as_ref()?.param;
            format!(
                r#"data = read("{stem}.csv")
colors = {{"STABLE_NODE": "blue", "STABLE_FOCUS": "blue", "SADDLE": "green", "SOURCE": "red"}}
fig, ax = plt.subplots(figsize=(8, 5))
for x, y, c in zip(data["{p}"], data["x1"], data["class"]):
    ax.plot(float(x), float(y), ".", color=colors.get(c, "black"), markersize=3)
ax.set_xlabel("{p}")
ax.set_ylabel("x1")
"#
            )
        }
        Command::Sweep2d => {
            let axes = cfg.numerics.sweep2d.as_ref()?;
            let (a, b) = (&axes[0].param, &axes[1].param);
            format!(
                r#"data = read("{stem}.csv")
fig, ax = plt.subplots(figsize=(7, 6))
sc = ax.scatter(data["{a}"], data["{b}"], c=[float(n) for n in data["n_interior"]], s=4, cmap="viridis", marker="s")
fig.colorbar(sc, label="interior equilibria")
ax.set_xlabel("{a}")
ax.set_ylabel("{b}")
"#
            )
        }
        _ => return None,
    };
    Some(format!(
        r#"#!/usr/bin/env python3
import csv
import matplotlib.pyplot as plt


def read(path):
    with open(path, newline="") as f:
        rows = list(csv.DictReader(f))
    out = {{k: [] for k in rows[0]}}
    for r in rows:
        for k, v in r.items():
            try:
                out[k].append(float(v))
            except ValueError:
                out[k].append(v)
    return out


{body}plt.tight_layout()
plt.savefig("{stem}.png", dpi=150)
"#
    ))
}

/// Exit status for an error: 2 for configuration problems, 3 for numerical
/// failures, 1 otherwise.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        _ if e.is_config() => 2,
        Error::StepUnderflow { .. } | Error::NoConvergence(_) | Error::NotOscillating => 3,
        Error::DomainViolation { .. } | Error::DegenerateNoInteraction(_) => 3,
        _ => 1,
    }
}
