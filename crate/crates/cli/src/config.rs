//! Experiment configuration files.
//!
//! The format is line-oriented `key = value` text. `#` starts a comment,
//! lists are comma separated, and probability grids may be written as
//! `start:end:step`.
//!
//! ```text
//! protocol   = switching          # permeability | switching
//! topology   = k-regular          # k-regular | scale-free | mixed | stack
//! k          = 10, 30
//! layers     = 2
//! zeta       = 0:1:0.05
//! zeta_mode  = symmetric          # symmetric | per-layer
//! runs       = 100
//! seed       = 7
//! ```
//!
//! Other keys: `d`, `stack` (e.g. `kreg-10, sf-1`), `agents`, `max_cycles`,
//! `init` (`uniform | exact-split`), `networks` (`per-run | frozen`),
//! `instances`, `low_degree` (`exclude | zero`).

use std::collections::BTreeMap;
use std::fmt;

use consensus_core::engine::DEFAULT_MAX_CYCLES;
use consensus_core::experiment::{DEFAULT_AGENTS, DEFAULT_INSTANCES, DEFAULT_RUNS_PER_CELL};
use consensus_core::{
    LayerTopology, LowDegreeRule, NetworkMode, OpinionInit, Protocol, SweepSpec, TopologyPlan,
    ZetaGrid,
};

const KEYS: &[&str] = &[
    "protocol",
    "topology",
    "k",
    "d",
    "layers",
    "stack",
    "zeta",
    "zeta_mode",
    "runs",
    "agents",
    "max_cycles",
    "seed",
    "init",
    "networks",
    "instances",
    "low_degree",
];

/// One problem found in a configuration file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub line: Option<usize>,
    pub field: Option<String>,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(line) = self.line {
            write!(f, "line {line}: ")?;
        }
        if let Some(field) = &self.field {
            write!(f, "{field}: ")?;
        }
        f.write_str(&self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ConfigError {
    pub diagnostics: Vec<Diagnostic>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.diagnostics.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

/// A validated configuration. `seed` is `None` when the file gave none.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub spec: SweepSpec,
    pub seed: Option<u64>,
}

struct Entry<'a> {
    line: usize,
    value: &'a str,
}

struct Parser<'a> {
    entries: BTreeMap<&'a str, Entry<'a>>,
    diagnostics: Vec<Diagnostic>,
}

impl<'a> Parser<'a> {
    fn error(&mut self, line: Option<usize>, field: &str, message: impl Into<String>) {
        self.diagnostics.push(Diagnostic {
            line,
            field: Some(field.to_string()),
            message: message.into(),
        });
    }

    fn take(&mut self, key: &str) -> Option<Entry<'a>> {
        self.entries.remove(key)
    }

    fn parse_with<T>(&mut self, key: &str, f: impl FnOnce(&str) -> Result<T, String>) -> Option<T> {
        let entry = self.take(key)?;
        match f(entry.value) {
            Ok(v) => Some(v),
            Err(msg) => {
                self.error(Some(entry.line), key, msg);
                None
            }
        }
    }

    fn required<T>(&mut self, key: &str, f: impl FnOnce(&str) -> Result<T, String>) -> Option<T> {
        if !self.entries.contains_key(key) {
            self.error(None, key, "missing required field");
            return None;
        }
        self.parse_with(key, f)
    }

    fn positive(&mut self, key: &str, default: usize) -> usize {
        self.parse_with(key, positive_int).unwrap_or(default)
    }
}

fn positive_int(text: &str) -> Result<usize, String> {
    match text.trim().parse::<i128>() {
        Ok(v) if v >= 1 && v <= usize::MAX as i128 => Ok(v as usize),
        Ok(v) => Err(format!("value {v} is not a positive integer")),
        Err(_) => Err(format!("`{}` is not an integer", text.trim())),
    }
}

fn positive_list(text: &str) -> Result<Vec<usize>, String> {
    let values = text
        .split(',')
        .map(positive_int)
        .collect::<Result<Vec<_>, _>>()?;
    if values.is_empty() {
        return Err("expected at least one value".into());
    }
    Ok(values)
}

fn round_grid(x: f64) -> f64 {
    (x * 1e12).round() / 1e12
}

fn probability(text: &str) -> Result<f64, String> {
    let v: f64 = text
        .trim()
        .parse()
        .map_err(|_| format!("`{}` is not a number", text.trim()))?;
    if !(0.0..=1.0).contains(&v) {
        return Err(format!("probability {v} is outside [0, 1]"));
    }
    Ok(v)
}

/// Parses `0.25, 0.5` or `start:end:step` into probability values.
pub fn parse_probability_grid(text: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        [single] => single.split(',').map(probability).collect(),
        [start, end, step] => {
            let (start, end) = (probability(start)?, probability(end)?);
            let step: f64 = step
                .trim()
                .parse()
                .map_err(|_| format!("`{}` is not a number", step.trim()))?;
            if step.is_nan() || step <= 0.0 || end < start {
                return Err("range needs start <= end and a positive step".into());
            }
            let count = ((end - start) / step).round() as usize;
            if (start + count as f64 * step - end).abs() > 1e-9 {
                return Err(format!("step {step} does not divide [{start}, {end}]"));
            }
            Ok((0..=count)
                .map(|i| round_grid(start + i as f64 * step))
                .collect())
        }
        _ => Err("expected a list or `start:end:step`".into()),
    }
}

/// Parses and validates a configuration file.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut parser = Parser {
        entries: BTreeMap::new(),
        diagnostics: Vec::new(),
    };
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            parser.diagnostics.push(Diagnostic {
                line: Some(line_no),
                field: None,
                message: format!("expected `key = value`, found `{line}`"),
            });
            continue;
        };
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.contains(&key) {
            parser.error(Some(line_no), key, "unknown key");
        } else if let Some(prev) = parser.entries.get(key) {
            let first = prev.line;
            parser.error(
                Some(line_no),
                key,
                format!("duplicate key (first set on line {first})"),
            );
        } else {
            parser.entries.insert(
                key,
                Entry {
                    line: line_no,
                    value,
                },
            );
        }
    }

    let protocol = parser.required("protocol", |v| {
        v.parse::<Protocol>().map_err(|e| e.to_string())
    });
    let topology_line = parser.entries.get("topology").map(|e| e.line);
    let family = parser.required("topology", |v| match v {
        "k-regular" | "scale-free" | "mixed" | "stack" => Ok(v.to_string()),
        other => Err(format!(
            "`{other}` is not k-regular, scale-free, mixed or stack"
        )),
    });

    let mut plan = None;
    let mut layer_counts = vec![1];
    if let Some(family) = family.as_deref() {
        let allowed: &[&str] = match family {
            "k-regular" => &["k", "layers"],
            "scale-free" => &["d", "layers"],
            "mixed" => &["k", "d"],
            _ => &["stack"],
        };
        for key in ["k", "d", "layers", "stack"] {
            if !allowed.contains(&key) {
                if let Some(entry) = parser.take(key) {
                    parser.error(
                        Some(entry.line),
                        key,
                        format!("not used by topology `{family}`"),
                    );
                }
            }
        }
        if allowed.contains(&"layers") {
            if let Some(counts) = parser.parse_with("layers", positive_list) {
                layer_counts = counts;
            }
        }
        plan = match family {
            "k-regular" => parser
                .required("k", positive_list)
                .map(|ks| TopologyPlan::KRegular { ks }),
            "scale-free" => parser
                .required("d", positive_list)
                .map(|ds| TopologyPlan::ScaleFree { ds }),
            "mixed" => {
                let ks = parser.required("k", positive_list);
                let ds = parser.required("d", positive_list);
                ks.zip(ds).map(|(ks, ds)| TopologyPlan::Mixed { ks, ds })
            }
            _ => parser
                .required("stack", |v| {
                    v.split(',')
                        .map(|s| s.trim().parse::<LayerTopology>().map_err(|e| e.to_string()))
                        .collect::<Result<Vec<_>, _>>()
                })
                .map(TopologyPlan::Stack),
        };
    }

    let zeta_mode = parser
        .parse_with("zeta_mode", |v| match v {
            "symmetric" | "per-layer" => Ok(v == "per-layer"),
            other => Err(format!("`{other}` is not symmetric or per-layer")),
        })
        .unwrap_or(false);
    let zeta = match protocol {
        Some(Protocol::Switching) => parser.required("zeta", parse_probability_grid),
        _ => {
            if let Some(entry) = parser.take("zeta") {
                parser.error(
                    Some(entry.line),
                    "zeta",
                    "only used by the switching protocol",
                );
            }
            Some(vec![0.0])
        }
    };

    let runs = parser.positive("runs", DEFAULT_RUNS_PER_CELL);
    let agents = parser.positive("agents", DEFAULT_AGENTS);
    let max_cycles = parser.positive("max_cycles", DEFAULT_MAX_CYCLES);
    let instances = parser.positive("instances", DEFAULT_INSTANCES);
    let seed = parser.parse_with("seed", |v| {
        v.parse::<u64>()
            .map_err(|_| format!("`{v}` is not an unsigned 64-bit integer"))
    });
    let init = parser
        .parse_with("init", |v| match v {
            "uniform" => Ok(OpinionInit::Uniform),
            "exact-split" => Ok(OpinionInit::ExactSplit),
            other => Err(format!("`{other}` is not uniform or exact-split")),
        })
        .unwrap_or_default();
    let networks = parser
        .parse_with("networks", |v| match v {
            "per-run" => Ok(NetworkMode::PerRun),
            "frozen" => Ok(NetworkMode::Frozen),
            other => Err(format!("`{other}` is not per-run or frozen")),
        })
        .unwrap_or_default();
    let low_degree = parser
        .parse_with("low_degree", |v| match v {
            "exclude" => Ok(LowDegreeRule::Exclude),
            "zero" => Ok(LowDegreeRule::AsZero),
            other => Err(format!("`{other}` is not exclude or zero")),
        })
        .unwrap_or_default();

    parser
        .diagnostics
        .sort_by_key(|d| d.line.unwrap_or(usize::MAX));
    let (Some(protocol), Some(plan), Some(zeta)) = (protocol, plan, zeta) else {
        return Err(ConfigError {
            diagnostics: parser.diagnostics,
        });
    };
    if !parser.diagnostics.is_empty() {
        return Err(ConfigError {
            diagnostics: parser.diagnostics,
        });
    }

    let spec = SweepSpec {
        topology: plan,
        layer_counts,
        protocol,
        zeta: if zeta_mode {
            ZetaGrid::PerLayer(zeta)
        } else {
            ZetaGrid::Symmetric(zeta)
        },
        runs_per_cell: runs,
        agents,
        max_cycles,
        master_seed: seed.unwrap_or(0),
        init,
        networks,
        instances,
        low_degree,
    };
    if let Err(e) = spec.validate() {
        return Err(ConfigError {
            diagnostics: vec![Diagnostic {
                line: topology_line,
                field: None,
                message: e.to_string(),
            }],
        });
    }
    Ok(ExperimentConfig { spec, seed })
}

fn join<T: ToString>(values: &[T]) -> String {
    values
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(", ")
}

/// Writes every field, defaults included, in a form [`parse_config`]
/// reads back to the same specification.
pub fn dump_config(spec: &SweepSpec) -> String {
    let mut out = String::new();
    let mut line = |key: &str, value: String| {
        out.push_str(&format!("{key:<10} = {value}\n"));
    };
    line("protocol", spec.protocol.to_string());
    match &spec.topology {
        TopologyPlan::KRegular { ks } => {
            line("topology", "k-regular".into());
            line("k", join(ks));
            line("layers", join(&spec.layer_counts));
        }
        TopologyPlan::ScaleFree { ds } => {
            line("topology", "scale-free".into());
            line("d", join(ds));
            line("layers", join(&spec.layer_counts));
        }
        TopologyPlan::Mixed { ks, ds } => {
            line("topology", "mixed".into());
            line("k", join(ks));
            line("d", join(ds));
        }
        TopologyPlan::Stack(stack) => {
            line("topology", "stack".into());
            line("stack", join(stack));
        }
    }
    if spec.protocol == Protocol::Switching {
        line("zeta", join(spec.zeta.values()));
        let mode = match spec.zeta {
            ZetaGrid::Symmetric(_) => "symmetric",
            ZetaGrid::PerLayer(_) => "per-layer",
        };
        line("zeta_mode", mode.into());
    }
    line("runs", spec.runs_per_cell.to_string());
    line("agents", spec.agents.to_string());
    line("max_cycles", spec.max_cycles.to_string());
    line("seed", spec.master_seed.to_string());
    line(
        "init",
        match spec.init {
            OpinionInit::Uniform => "uniform",
            OpinionInit::ExactSplit => "exact-split",
        }
        .into(),
    );
    line(
        "networks",
        match spec.networks {
            NetworkMode::PerRun => "per-run",
            NetworkMode::Frozen => "frozen",
        }
        .into(),
    );
    line("instances", spec.instances.to_string());
    line(
        "low_degree",
        match spec.low_degree {
            LowDegreeRule::Exclude => "exclude",
            LowDegreeRule::AsZero => "zero",
        }
        .into(),
    );
    out
}
