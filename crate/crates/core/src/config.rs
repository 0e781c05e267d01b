//! Run configuration, overrides and the built-in recipe catalogue.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::model::{DeathRate, EcoParams, EvoConfig, TraitFamily, TraitModel};
use crate::simulate::SimSpec;
use crate::sweep::Axis;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Equilibria,
    Simulate,
    Sweep1d,
    Sweep2d,
    Ess,
    Report,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Equilibria => "equilibria",
            Command::Simulate => "simulate",
            Command::Sweep1d => "sweep1d",
            Command::Sweep2d => "sweep2d",
            Command::Ess => "ess",
            Command::Report => "report",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelConfig {
    Eco(EcoParams),
    Evo(EvoConfig),
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Numerics {
    #[serde(default)]
    pub simulation: Option<SimSpec>,
    #[serde(default)]
    pub sweep1d: Option<Axis>,
    #[serde(default)]
    pub sweep2d: Option<[Axis; 2]>,
    /// Seed for the sweep spot checks.
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// File stem for all artifacts of the run.
    #[serde(default = "default_stem")]
    pub stem: String,
    /// Also write a matplotlib script next to the data.
    #[serde(default)]
    pub plot_script: bool,
}

fn default_stem() -> String {
    "run".to_string()
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { stem: default_stem(), plot_script: false }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    pub model: ModelConfig,
    #[serde(default)]
    pub numerics: Numerics,
    #[serde(default)]
    pub output: OutputConfig,
}

fn config_err(key: &str, reason: impl Into<String>) -> Error {
    Error::Config { key: key.to_string(), reason: reason.into() }
}

impl RunConfig {
    /// Parses a config, or the `config` member of a metadata sidecar, applies
    /// `key=value` overrides and validates the result.
    pub fn from_value(mut v: Value, overrides: &[String]) -> Result<Self> {
        if v.get("tool").is_some() {
            if let Some(inner) = v.get_mut("config") {
                v = inner.take();
            }
        }
        for o in overrides {
            apply_override(&mut v, o)?;
        }
        let cfg: RunConfig =
            serde_json::from_value(v).map_err(|e| config_err("config", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_str(s: &str, overrides: &[String]) -> Result<Self> {
        let v: Value = serde_json::from_str(s).map_err(|e| config_err("config", e.to_string()))?;
        Self::from_value(v, overrides)
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let s = std::fs::read_to_string(path)
            .map_err(|e| config_err("config", format!("{}: {e}", path.display())))?;
        Self::from_str(&s, overrides)
    }

    pub fn to_value(&self) -> Value {
        serde_json::to_value(self).expect("RunConfig serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let wrap = |prefix: &str, e: Error| match e {
            Error::InvalidParam { name, reason } => config_err(&format!("{prefix}.{name}"), reason),
            Error::RequiresGaussian => config_err(prefix, e.to_string()),
            other => other,
        };
        let dim = match &self.model {
            ModelConfig::Eco(p) => {
                p.validate().map_err(|e| wrap("model.eco", e))?;
                2
            }
            ModelConfig::Evo(c) => {
                c.validate().map_err(|e| wrap("model.evo", e))?;
                4
            }
        };
        let eco = matches!(self.model, ModelConfig::Eco(_));
        let n = &self.numerics;
        match self.command {
            Command::Simulate => {
                let s = n
                    .simulation
                    .as_ref()
                    .ok_or_else(|| config_err("numerics.simulation", "required for simulate"))?;
                s.validate(dim).map_err(|e| wrap("numerics.simulation", e))?;
            }
            Command::Sweep1d => {
                if !eco {
                    return Err(config_err("model", "sweep1d requires an eco model"));
                }
                n.sweep1d
                    .as_ref()
                    .ok_or_else(|| config_err("numerics.sweep1d", "required for sweep1d"))?
                    .validate()
                    .map_err(|e| wrap("numerics.sweep1d", e))?;
            }
            Command::Sweep2d => {
                if !eco {
                    return Err(config_err("model", "sweep2d requires an eco model"));
                }
                let axes = n
                    .sweep2d
                    .as_ref()
                    .ok_or_else(|| config_err("numerics.sweep2d", "required for sweep2d"))?;
                for (k, a) in axes.iter().enumerate() {
                    a.validate().map_err(|e| wrap(&format!("numerics.sweep2d[{k}]"), e))?;
                }
                if axes[0].param == axes[1].param {
                    return Err(config_err("numerics.sweep2d", "the two axes must differ"));
                }
            }
            Command::Ess => {
                if eco {
                    return Err(config_err("model", "ess requires an evo model"));
                }
            }
            Command::Equilibria | Command::Report => {}
        }
        let stem = &self.output.stem;
        if stem.is_empty() || stem.contains(['/', '\\']) {
            return Err(config_err("output.stem", "must be a plain non-empty file name"));
        }
        Ok(())
    }
}

/// Applies `a.b.c=value`. The value is parsed as JSON when possible and kept
/// as a string otherwise. Missing intermediate objects are created.
pub fn apply_override(root: &mut Value, spec: &str) -> Result<()> {
    let (path, raw) = spec
        .split_once('=')
        .ok_or_else(|| config_err(spec, "override must have the form key=value"))?;
    let path = path.trim();
    if path.is_empty() {
        return Err(config_err(spec, "empty key"));
    }
    let value = serde_json::from_str(raw.trim()).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut cur = root;
    let keys: Vec<&str> = path.split('.').collect();
    for (k, key) in keys.iter().enumerate() {
        let last = k + 1 == keys.len();
        cur = match cur {
            Value::Object(map) => {
                if last {
                    map.insert(key.to_string(), value);
                    return Ok(());
                }
                map.entry(key.to_string()).or_insert_with(|| Value::Object(Default::default()))
            }
            Value::Array(arr) => {
                let i: usize = key
                    .parse()
                    .map_err(|_| config_err(path, format!("{key} is not an array index")))?;
                let len = arr.len();
                let slot = arr
                    .get_mut(i)
                    .ok_or_else(|| config_err(path, format!("index {i} out of range ({len})")))?;
                if last {
                    *slot = value;
                    return Ok(());
                }
                slot
            }
            Value::Null => {
                *cur = Value::Object(Default::default());
                match cur {
                    Value::Object(map) => {
                        if last {
                            map.insert(key.to_string(), value);
                            return Ok(());
                        }
                        map.entry(key.to_string())
                            .or_insert_with(|| Value::Object(Default::default()))
                    }
                    _ => unreachable!(),
                }
            }
            _ => return Err(config_err(path, format!("cannot descend into scalar at {key}"))),
        };
    }
    Ok(())
}

/// A named, ready-to-run configuration.
#[derive(Clone, Debug)]
pub struct Recipe {
    pub name: &'static str,
    pub description: &'static str,
    pub config: RunConfig,
}

/// Fixed-trait parameters of the two-interior regime.
pub fn two_interior_params() -> EcoParams {
    EcoParams { r1: 1.0, r2: 0.25, k1: 1.0, k2: 1.0, a: 5.0, h: 4.0, e: 0.9, d: 0.185 }
}

/// Gaussian co-evolution around the two-interior regime with parasitism width
/// `sigma_a`.
pub fn gaussian_coevolution(sigma_a: f64) -> EvoConfig {
    let p = two_interior_params();
    EvoConfig {
        r1: p.r1,
        r2: p.r2,
        h: p.h,
        e: p.e,
        traits: TraitModel {
            family: TraitFamily::Gaussian,
            k01: p.k1,
            k02: p.k2,
            a0: p.a,
            sigma_k1: 1.0,
            sigma_k2: 1.0,
            sigma_a,
            death: DeathRate::Constant(p.d),
        },
        sigma1_sq: 1.0,
        sigma2_sq: 1.0,
    }
}

pub const COEVOLUTION_START: [f64; 4] = [0.5, 2.0, 1.0, 0.1];

/// Bounded quartic family on [0, 1] with constant death rate `d`.
pub fn quartic_constant_death(d: f64) -> EvoConfig {
    EvoConfig {
        r1: 0.5,
        r2: 1.0,
        h: 1.0,
        e: 0.9,
        traits: TraitModel {
            family: TraitFamily::BoundedQuartic { c: 1.0 },
            k01: 1.0,
            k02: 2.0,
            a0: 2.0,
            sigma_k1: 1.0,
            sigma_k2: 1.0,
            sigma_a: 1.0,
            death: DeathRate::Constant(d),
        },
        sigma1_sq: 1.0,
        sigma2_sq: 1.0,
    }
}

/// Bounded quartic family with quartic death, an obligate parasite and a
/// strongly trait-dependent parasite carrying capacity.
pub fn quartic_obligate() -> EvoConfig {
    EvoConfig {
        r1: 0.1,
        r2: 1.5,
        h: 1.0,
        e: 0.9,
        traits: TraitModel {
            family: TraitFamily::BoundedQuartic { c: 1.0 },
            k01: 1.0,
            k02: 100.0,
            a0: 2.0,
            sigma_k1: 1.0,
            sigma_k2: 1.0,
            sigma_a: 0.56,
            death: DeathRate::Quartic { d0: 2.1, sigma_d: 1.05 },
        },
        sigma1_sq: 1.0,
        sigma2_sq: 1.0,
    }
}

fn simple(command: Command, model: ModelConfig, numerics: Numerics, stem: &str) -> RunConfig {
    RunConfig {
        command,
        model,
        numerics,
        output: OutputConfig { stem: stem.to_string(), plot_script: true },
    }
}

fn coevolution_recipe(sigma_a: f64, t_end: f64, samples: usize, stem: &str) -> RunConfig {
    let mut sim = SimSpec::new(COEVOLUTION_START.to_vec(), t_end);
    sim.rtol = 1e-10;
    sim.atol = 1e-12;
    sim.samples = samples;
    simple(
        Command::Simulate,
        ModelConfig::Evo(gaussian_coevolution(sigma_a)),
        Numerics { simulation: Some(sim), ..Default::default() },
        stem,
    )
}

/// The built-in catalogue.
pub fn recipes() -> Vec<Recipe> {
    let line = |r2: f64| {
        let mut p = two_interior_params();
        p.r2 = r2;
        p
    };
    let fig1 = simple(
        Command::Sweep2d,
        ModelConfig::Eco(two_interior_params()),
        Numerics {
            sweep2d: Some([Axis::new("d", 0.01, 1.5, 150), Axis::new("r2", 0.01, 1.5, 150)]),
            ..Default::default()
        },
        "fig1_grid",
    );
    let fig2 = simple(
        Command::Sweep1d,
        ModelConfig::Eco(line(0.25)),
        Numerics { sweep1d: Some(Axis::new("d", 0.005, 0.6, 596)), ..Default::default() },
        "fig2_line",
    );
    let ess = |cfg: EvoConfig, stem: &str| simple(Command::Ess, ModelConfig::Evo(cfg), Numerics::default(), stem);
    vec![
        Recipe {
            name: "fig1_grid",
            description: "interior-equilibrium count map over (d, r2), d on the horizontal axis",
            config: fig1,
        },
        Recipe {
            name: "fig2_line",
            description: "interior equilibria and their stability along d at r2 = 0.25",
            config: fig2,
        },
        Recipe {
            name: "sec42_sigma2",
            description: "co-evolution, sigma_a = 2: misaligned interior equilibrium",
            config: coevolution_recipe(2.0, 4000.0, 20_001, "sec42_sigma2"),
        },
        Recipe {
            name: "sec42_sigma1",
            description: "co-evolution, sigma_a = 1: misaligned interior equilibrium",
            config: coevolution_recipe(1.0, 4000.0, 20_001, "sec42_sigma1"),
        },
        Recipe {
            name: "sec42_sigma05",
            description: "co-evolution, sigma_a = 0.5: aligned interior equilibrium",
            config: coevolution_recipe(0.5, 4000.0, 20_001, "sec42_sigma05"),
        },
        Recipe {
            name: "sec42_sigma015",
            description: "co-evolution, sigma_a = 0.15",
            config: coevolution_recipe(0.15, 5000.0, 50_001, "sec42_sigma015"),
        },
        Recipe {
            name: "sec42_sigma005",
            description: "co-evolution, sigma_a = 0.05",
            config: coevolution_recipe(0.05, 5000.0, 50_001, "sec42_sigma005"),
        },
        Recipe {
            name: "sec42_sigma0005",
            description: "co-evolution, sigma_a = 0.005: long horizon",
            config: coevolution_recipe(0.005, 1e5, 100_001, "sec42_sigma0005"),
        },
        Recipe {
            name: "sec411_parasite_only",
            description: "bounded quartic traits, facultative parasite with low death rate: parasite-only corners",
            config: ess(quartic_constant_death(0.2), "sec411_parasite_only"),
        },
        Recipe {
            name: "sec411_host_only",
            description: "bounded quartic traits, death rate above r2 + e a0 K01/(1 + h a0 K01): host-only corners",
            config: ess(quartic_constant_death(2.0), "sec411_host_only"),
        },
        Recipe {
            name: "sec412_cs_not_ess",
            description: "bounded quartic traits with quartic death, obligate parasite",
            config: ess(quartic_obligate(), "sec412_cs_not_ess"),
        },
    ]
}

pub fn recipe(name: &str) -> Result<RunConfig> {
    recipes()
        .into_iter()
        .find(|r| r.name == name)
        .map(|r| r.config)
        .ok_or_else(|| config_err("recipe", format!("unknown recipe {name}")))
}
