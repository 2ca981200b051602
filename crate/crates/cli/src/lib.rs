//! Subcommand implementations behind the `consensus` binary.

pub mod config;
pub mod replay;

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use consensus_core::experiment::{PropertyOutcome, PropertySweep, FULL_SCALE_RUNS_PER_CELL};
use consensus_core::network::{instantiate_layers, merge_graphs};
use consensus_core::report;
use consensus_core::seed::run_seed;
use consensus_core::{
    correlate_structure_convergence, experiment::stack_label, network_property_sweep, run_sweep,
    run_sweep_recording, Graph, GraphProperties, LowDegreeRule, SweepSpec,
};

pub use config::{dump_config, parse_config, ConfigError, ExperimentConfig};

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Default)]
pub struct CommonArgs {
    pub config: Option<PathBuf>,
    pub out: PathBuf,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub full_scale: bool,
    pub series: bool,
}

/// Whether all requested work finished.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Completion {
    Complete,
    /// Some cells failed; the completed ones were still written.
    Partial {
        failed: usize,
    },
}

impl Completion {
    pub fn exit_code(self) -> i32 {
        match self {
            Completion::Complete => 0,
            Completion::Partial { .. } => 2,
        }
    }
}

/// Reads, validates and finalises the experiment specification. The seed
/// comes from `--seed`, then the file, then a fresh random draw which is
/// reported on stderr.
pub fn load_spec(args: &CommonArgs) -> Result<SweepSpec> {
    let path = args.config.as_ref().context("--config is required")?;
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let parsed = parse_config(&text).map_err(|e| anyhow::anyhow!("{}:\n{e}", path.display()))?;
    let mut spec = parsed.spec;
    spec.master_seed = match args.seed.or(parsed.seed) {
        Some(seed) => seed,
        None => {
            let seed = rand::random::<u64>();
            eprintln!("no seed given; using seed {seed}");
            seed
        }
    };
    if args.full_scale {
        spec.runs_per_cell = FULL_SCALE_RUNS_PER_CELL;
        spec.instances = spec.instances.max(100);
    }
    Ok(spec)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(file))
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(suffix);
    PathBuf::from(name)
}

/// Writes the normalized configuration next to an output file.
fn write_normalized(spec: &SweepSpec, path: &Path) -> Result<()> {
    fs::write(path, dump_config(spec)).with_context(|| format!("writing {}", path.display()))
}

/// `gen-net`: one edge-list file per layer plus the merged graph, for every
/// layer stack in the configuration. `out` is a directory.
pub fn gen_net(args: &CommonArgs) -> Result<Completion> {
    let spec = load_spec(args)?;
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    write_normalized(&spec, &args.out.join("config.txt"))?;
    let mut failed = 0;
    for stack in spec.stacks() {
        let id = stack_label(&stack);
        let mut rng =
            ChaCha8Rng::seed_from_u64(run_seed(spec.master_seed, &format!("gen-net|{id}"), 0));
        let layers = match instantiate_layers(&stack, spec.agents, &mut rng) {
            Ok(layers) => layers,
            Err(e) => {
                eprintln!("{id}: {e}");
                failed += 1;
                continue;
            }
        };
        for (i, layer) in layers.iter().enumerate() {
            fs::write(
                args.out.join(format!("{id}.layer{i}.edges")),
                layer.to_edge_list(),
            )?;
        }
        fs::write(
            args.out.join(format!("{id}.merged.edges")),
            merge_graphs(&layers)?.to_edge_list(),
        )?;
    }
    Ok(completion(failed))
}

fn completion(failed: usize) -> Completion {
    if failed == 0 {
        Completion::Complete
    } else {
        Completion::Partial { failed }
    }
}

/// `net-props`: property CSV either for the configuration's ensembles or
/// for explicit edge-list files.
pub fn net_props(args: &CommonArgs, graphs: &[PathBuf]) -> Result<Completion> {
    let sweep = if graphs.is_empty() {
        let spec = load_spec(args)?;
        write_normalized(&spec, &sibling(&args.out, ".config"))?;
        network_property_sweep(&spec, args.workers)?
    } else {
        let configs = graphs
            .iter()
            .map(|path| {
                let text = fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                let graph: Graph = text
                    .parse()
                    .with_context(|| format!("parsing {}", path.display()))?;
                let id = path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_default();
                Ok(PropertyOutcome {
                    config_id: id,
                    stack: Vec::new(),
                    instances: GraphProperties::measure(&graph, LowDegreeRule::Exclude)
                        .map(|p| vec![p]),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        PropertySweep {
            family: "files",
            configs,
        }
    };
    let mut failed = 0;
    for config in &sweep.configs {
        if let Err(e) = &config.instances {
            eprintln!("{}: {e}", config.config_id);
            failed += 1;
        }
    }
    report::write_properties(create(&args.out)?, &sweep)?;
    Ok(completion(failed))
}

/// `run`: one run record per run; with `--series`, one series file per run
/// under `<out>.series/`.
pub fn run(args: &CommonArgs) -> Result<Completion> {
    let spec = load_spec(args)?;
    write_normalized(&spec, &sibling(&args.out, ".config"))?;
    let result = run_sweep_recording(&spec, args.workers, args.series)?;
    let mut all_runs = Vec::new();
    for outcome in &result.cells {
        match &outcome.runs {
            Ok(runs) => all_runs.extend(runs.iter().map(|r| (outcome.cell.id, r))),
            Err(e) => eprintln!("cell {}: {e}", outcome.cell),
        }
    }
    report::write_run_records(create(&args.out)?, all_runs.iter().map(|(_, r)| *r))?;
    if args.series {
        let dir = sibling(&args.out, ".series");
        fs::create_dir_all(&dir)?;
        for (index, (cell, run)) in all_runs.iter().enumerate() {
            if let Some(series) = &run.series {
                let path = dir.join(format!("cell{cell}-{index}-seed{}.csv", run.seed));
                report::write_series(create(&path)?, series)?;
            }
        }
    }
    Ok(completion(result.failed_cells()))
}

/// `sweep`: aggregate statistics per cell.
pub fn sweep(args: &CommonArgs) -> Result<Completion> {
    let spec = load_spec(args)?;
    write_normalized(&spec, &sibling(&args.out, ".config"))?;
    let result = run_sweep(&spec, args.workers)?;
    for outcome in &result.cells {
        if let Err(e) = &outcome.runs {
            eprintln!("cell {}: {e}", outcome.cell);
        }
    }
    report::write_sweep(create(&args.out)?, &result)?;
    Ok(completion(result.failed_cells()))
}

/// Inputs for `correlate`: either a configuration to run, or existing
/// sweep and property files.
#[derive(Debug, Clone, Default)]
pub struct CorrelateInputs {
    pub sweep: Option<PathBuf>,
    pub props: Option<PathBuf>,
    pub family: Option<String>,
}

pub fn correlate(args: &CommonArgs, inputs: &CorrelateInputs) -> Result<Completion> {
    let (family, correlation) = match (&inputs.sweep, &inputs.props) {
        (Some(sweep_path), Some(props_path)) => {
            let conv = report::read_sweep_points(File::open(sweep_path)?)
                .with_context(|| format!("reading {}", sweep_path.display()))?;
            let props = report::read_property_points(File::open(props_path)?)
                .with_context(|| format!("reading {}", props_path.display()))?;
            let family = inputs.family.clone().unwrap_or_else(|| "custom".into());
            (family, correlate_structure_convergence(&conv, &props)?)
        }
        (None, None) => {
            let spec = load_spec(args)?;
            write_normalized(&spec, &sibling(&args.out, ".config"))?;
            let sweep = run_sweep(&spec, args.workers)?;
            let props = network_property_sweep(&spec, args.workers)?;
            let family = inputs
                .family
                .clone()
                .unwrap_or_else(|| spec.topology.family().to_string());
            let corr = correlate_structure_convergence(
                &sweep.convergence_points(),
                &props.structure_points(),
            )?;
            (family, corr)
        }
        _ => bail!("--sweep and --props must be given together"),
    };
    report::write_correlation(create(&args.out)?, &family, &correlation)?;
    Ok(Completion::Complete)
}

/// `replay`: re-runs row `row` (1-based) of a run-record file and writes
/// its series.
pub fn replay_command(args: &CommonArgs, record_path: &Path, row: usize) -> Result<Completion> {
    let spec = load_spec(args)?;
    let records = report::read_run_records(File::open(record_path)?)
        .with_context(|| format!("reading {}", record_path.display()))?;
    let record = records
        .get(row.checked_sub(1).context("rows are numbered from 1")?)
        .with_context(|| format!("{} has {} rows", record_path.display(), records.len()))?;
    let result = replay::replay(record, &spec)?;
    let series = result.series.as_deref().unwrap_or_default();
    report::write_series(create(&args.out)?, series)?;
    Ok(Completion::Complete)
}
