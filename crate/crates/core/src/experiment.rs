//! Seeded Monte Carlo sweeps over grids of network configurations.
//!
//! A [`SweepSpec`] expands into an ordered list of [`CellConfig`]s. Each run
//! of a cell gets its own seed from [`crate::seed::run_seed`]; with
//! [`NetworkMode::PerRun`] every run also draws fresh layer instances.
//! Runs are distributed over a rayon pool and collected back in
//! `(cell, run)` order, so results do not depend on the worker count.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::engine::{run_simulation, OpinionInit, Protocol, RunResult, SimConfig, SocialSpace};
use crate::error::{Error, Result};
use crate::metrics::{spearman, CorrelationReport, GraphProperties, LowDegreeRule};
use crate::network::{instantiate_layers, merge_graphs, LayerTopology};
use crate::seed::{run_seed, substream, NETWORK_STREAM};

pub const DEFAULT_AGENTS: usize = 100;
pub const DEFAULT_RUNS_PER_CELL: usize = 300;
pub const FULL_SCALE_RUNS_PER_CELL: usize = 3000;
pub const DEFAULT_INSTANCES: usize = 100;

/// Which layer stacks a sweep covers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TopologyPlan {
    /// `layers` copies of a k-regular ring, for every k and layer count.
    KRegular { ks: Vec<usize> },
    /// `layers` copies of a scale-free graph, for every d and layer count.
    ScaleFree { ds: Vec<usize> },
    /// One k-regular ring plus one scale-free graph, for every (k, d).
    Mixed { ks: Vec<usize>, ds: Vec<usize> },
    /// A single explicit stack.
    Stack(Vec<LayerTopology>),
}

impl TopologyPlan {
    pub fn family(&self) -> &'static str {
        match self {
            TopologyPlan::KRegular { .. } => "k-regular",
            TopologyPlan::ScaleFree { .. } => "scale-free",
            TopologyPlan::Mixed { .. } => "mixed",
            TopologyPlan::Stack(_) => "stack",
        }
    }
}

/// Switching probabilities explored by a switching-protocol sweep.
#[derive(Debug, Clone, PartialEq)]
pub enum ZetaGrid {
    /// The same value on every layer.
    Symmetric(Vec<f64>),
    /// Every combination of values across layers.
    PerLayer(Vec<f64>),
}

impl ZetaGrid {
    pub fn values(&self) -> &[f64] {
        match self {
            ZetaGrid::Symmetric(v) | ZetaGrid::PerLayer(v) => v,
        }
    }

    fn assignments(&self, layers: usize) -> Vec<Vec<f64>> {
        match self {
            ZetaGrid::Symmetric(values) => values.iter().map(|&z| vec![z; layers]).collect(),
            ZetaGrid::PerLayer(values) => {
                let mut combos: Vec<Vec<f64>> = vec![Vec::new()];
                for _ in 0..layers {
                    combos = combos
                        .into_iter()
                        .flat_map(|prefix| {
                            values.iter().map(move |&z| {
                                let mut next = prefix.clone();
                                next.push(z);
                                next
                            })
                        })
                        .collect();
                }
                combos
            }
        }
    }
}

/// Whether layer instances are redrawn for every run or shared by all
/// runs of a cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NetworkMode {
    #[default]
    PerRun,
    Frozen,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub topology: TopologyPlan,
    /// Layer counts for homogeneous plans; ignored by `Mixed` and `Stack`.
    pub layer_counts: Vec<usize>,
    pub protocol: Protocol,
    /// Only used by the switching protocol.
    pub zeta: ZetaGrid,
    pub runs_per_cell: usize,
    pub agents: usize,
    pub max_cycles: usize,
    pub master_seed: u64,
    pub init: OpinionInit,
    pub networks: NetworkMode,
    /// Instances per configuration for property sweeps.
    pub instances: usize,
    pub low_degree: LowDegreeRule,
}

impl SweepSpec {
    /// Spec with desk-scale defaults for everything but the topology.
    pub fn new(topology: TopologyPlan, layer_counts: Vec<usize>, protocol: Protocol) -> Self {
        SweepSpec {
            topology,
            layer_counts,
            protocol,
            zeta: ZetaGrid::Symmetric(vec![0.0]),
            runs_per_cell: DEFAULT_RUNS_PER_CELL,
            agents: DEFAULT_AGENTS,
            max_cycles: crate::engine::DEFAULT_MAX_CYCLES,
            master_seed: 0,
            init: OpinionInit::Uniform,
            networks: NetworkMode::PerRun,
            instances: DEFAULT_INSTANCES,
            low_degree: LowDegreeRule::Exclude,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs_per_cell == 0 {
            return Err(Error::param("runs", "must be at least 1"));
        }
        if self.agents == 0 {
            return Err(Error::param("agents", "must be at least 1"));
        }
        if self.max_cycles == 0 {
            return Err(Error::param("max_cycles", "must be at least 1"));
        }
        if self.instances == 0 {
            return Err(Error::param("instances", "must be at least 1"));
        }
        let homogeneous = matches!(
            self.topology,
            TopologyPlan::KRegular { .. } | TopologyPlan::ScaleFree { .. }
        );
        if homogeneous && (self.layer_counts.is_empty() || self.layer_counts.contains(&0)) {
            return Err(Error::param(
                "layers",
                "needs one or more positive layer counts",
            ));
        }
        match &self.topology {
            TopologyPlan::KRegular { ks } if ks.is_empty() => {
                return Err(Error::param("k", "needs at least one value"))
            }
            TopologyPlan::ScaleFree { ds } if ds.is_empty() => {
                return Err(Error::param("d", "needs at least one value"))
            }
            TopologyPlan::Mixed { ks, ds } if ks.is_empty() || ds.is_empty() => {
                return Err(Error::param("k", "mixed plans need both k and d values"))
            }
            TopologyPlan::Stack(stack) if stack.is_empty() => {
                return Err(Error::param("stack", "needs at least one layer"))
            }
            _ => {}
        }
        let zetas = self.zeta.values();
        if zetas.is_empty() {
            return Err(Error::param("zeta", "needs at least one value"));
        }
        if let Some(z) = zetas.iter().find(|z| !(0.0..=1.0).contains(*z)) {
            return Err(Error::param("zeta", format!("{z} is outside [0, 1]")));
        }
        Ok(())
    }

    /// Layer stacks in grid order: layer count outermost for homogeneous
    /// plans, d outermost for mixed plans.
    pub fn stacks(&self) -> Vec<Vec<LayerTopology>> {
        match &self.topology {
            TopologyPlan::KRegular { ks } => self
                .layer_counts
                .iter()
                .flat_map(|&l| {
                    ks.iter()
                        .map(move |&k| vec![LayerTopology::KRegular { k }; l])
                })
                .collect(),
            TopologyPlan::ScaleFree { ds } => self
                .layer_counts
                .iter()
                .flat_map(|&l| {
                    ds.iter()
                        .map(move |&d| vec![LayerTopology::ScaleFree { d }; l])
                })
                .collect(),
            TopologyPlan::Mixed { ks, ds } => ds
                .iter()
                .flat_map(|&d| {
                    ks.iter().map(move |&k| {
                        vec![
                            LayerTopology::KRegular { k },
                            LayerTopology::ScaleFree { d },
                        ]
                    })
                })
                .collect(),
            TopologyPlan::Stack(stack) => vec![stack.clone()],
        }
    }

    /// Every simulation cell, numbered from zero.
    pub fn cells(&self) -> Vec<CellConfig> {
        let mut cells = Vec::new();
        for stack in self.stacks() {
            let zetas = match self.protocol {
                Protocol::Permeability => vec![vec![0.0; stack.len()]],
                Protocol::Switching => self.zeta.assignments(stack.len()),
            };
            for zeta in zetas {
                cells.push(CellConfig {
                    id: cells.len(),
                    protocol: self.protocol,
                    family: self.topology.family(),
                    stack: stack.clone(),
                    zeta,
                });
            }
        }
        cells
    }

    /// Seed of run `run_index` in `cell`.
    pub fn run_seed(&self, cell: &CellConfig, run_index: usize) -> u64 {
        run_seed(self.master_seed, &cell.key(), run_index as u64)
    }

    /// Simulation configuration for a run of `cell` with the given run seed.
    pub fn sim_config(
        &self,
        cell: &CellConfig,
        seed: u64,
        record_series: bool,
    ) -> Result<SimConfig> {
        let network_seed = match self.networks {
            NetworkMode::PerRun => substream(seed, NETWORK_STREAM),
            NetworkMode::Frozen => substream(self.run_seed(cell, 0), NETWORK_STREAM),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(network_seed);
        let layers = instantiate_layers(&cell.stack, self.agents, &mut rng)?;
        let space = SocialSpace::new(layers, cell.zeta.clone())?;
        Ok(SimConfig {
            space: Arc::new(space),
            protocol: cell.protocol,
            max_cycles: self.max_cycles,
            seed,
            record_series,
            init: self.init,
        })
    }
}

/// One point of a sweep grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CellConfig {
    pub id: usize,
    pub protocol: Protocol,
    pub family: &'static str,
    pub stack: Vec<LayerTopology>,
    pub zeta: Vec<f64>,
}

impl CellConfig {
    /// Canonical description used for seed derivation.
    pub fn key(&self) -> String {
        let zeta: Vec<String> = self.zeta.iter().map(|z| z.to_string()).collect();
        format!(
            "{}|{}|{}",
            self.protocol,
            stack_label(&self.stack),
            zeta.join(";")
        )
    }

    /// Configuration id of the layer stack, shared with property sweeps.
    pub fn config_id(&self) -> String {
        stack_label(&self.stack)
    }

    /// The k used by the cell's ring layers, when there is exactly one.
    pub fn k(&self) -> Option<usize> {
        single(self.stack.iter().filter_map(|l| match l {
            LayerTopology::KRegular { k } => Some(*k),
            _ => None,
        }))
    }

    pub fn d(&self) -> Option<usize> {
        single(self.stack.iter().filter_map(|l| match l {
            LayerTopology::ScaleFree { d } => Some(*d),
            _ => None,
        }))
    }
}

fn single(mut values: impl Iterator<Item = usize>) -> Option<usize> {
    let first = values.next()?;
    values.all(|v| v == first).then_some(first)
}

/// `kreg-10x2` for homogeneous stacks, `kreg-10+sf-1` otherwise.
pub fn stack_label(stack: &[LayerTopology]) -> String {
    match stack.split_first() {
        Some((first, rest)) if rest.iter().all(|l| l == first) => {
            format!("{first}x{}", stack.len())
        }
        _ => stack
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join("+"),
    }
}

/// Five-number summary using linear interpolation between order statistics
/// (R's default quantile type 7).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quantiles {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

impl Quantiles {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let at = |p: f64| {
            let h = (sorted.len() - 1) as f64 * p;
            let lo = h.floor() as usize;
            let hi = h.ceil() as usize;
            sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
        };
        Some(Quantiles {
            min: sorted[0],
            q1: at(0.25),
            median: at(0.5),
            q3: at(0.75),
            max: sorted[sorted.len() - 1],
        })
    }
}

/// Mean and sample standard deviation; the deviation of a single sample is
/// reported as zero.
pub fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Aggregate over the runs of one cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellStats {
    pub run_count: usize,
    pub converged_runs: usize,
    pub convergence_ratio: f64,
    pub encounters_mean: f64,
    pub encounters_sd: f64,
    pub encounter_quantiles: Quantiles,
}

impl CellStats {
    pub fn from_runs(runs: &[RunResult]) -> Result<Self> {
        if runs.is_empty() {
            return Err(Error::InsufficientData("cell has no runs".into()));
        }
        let converged_runs = runs.iter().filter(|r| r.converged).count();
        let encounters: Vec<f64> = runs.iter().map(|r| r.encounters as f64).collect();
        let (encounters_mean, encounters_sd) = mean_sd(&encounters);
        Ok(CellStats {
            run_count: runs.len(),
            converged_runs,
            convergence_ratio: converged_runs as f64 / runs.len() as f64,
            encounters_mean,
            encounters_sd,
            encounter_quantiles: Quantiles::of(&encounters).expect("runs is non-empty"),
        })
    }
}

#[derive(Debug, Clone)]
pub struct CellOutcome {
    pub cell: CellConfig,
    /// Per-run results in run order, or the cell-level error.
    pub runs: Result<Vec<RunResult>>,
}

impl CellOutcome {
    pub fn stats(&self) -> Result<CellStats> {
        match &self.runs {
            Ok(runs) => CellStats::from_runs(runs),
            Err(e) => Err(e.clone()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub spec: SweepSpec,
    pub cells: Vec<CellOutcome>,
}

impl SweepResult {
    pub fn failed_cells(&self) -> usize {
        self.cells.iter().filter(|c| c.runs.is_err()).count()
    }

    /// Convergence ratio per configuration id, for correlation.
    pub fn convergence_points(&self) -> Vec<ConvergencePoint> {
        self.cells
            .iter()
            .filter_map(|c| {
                c.stats().ok().map(|s| ConvergencePoint {
                    config_id: c.cell.config_id(),
                    ratio: s.convergence_ratio,
                })
            })
            .collect()
    }
}

fn with_pool<T: Send>(workers: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(job()),
        Some(0) => Err(Error::param("workers", "must be at least 1")),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::param("workers", e.to_string()))?;
            Ok(pool.install(job))
        }
    }
}

/// Runs every cell of the grid. `workers = None` uses the global rayon pool.
///
/// Infeasible cells (e.g. `d > agents`) carry their error in
/// [`CellOutcome::runs`] without affecting other cells.
pub fn run_sweep(spec: &SweepSpec, workers: Option<usize>) -> Result<SweepResult> {
    run_sweep_recording(spec, workers, false)
}

/// [`run_sweep`] with optional per-run time series.
pub fn run_sweep_recording(
    spec: &SweepSpec,
    workers: Option<usize>,
    record_series: bool,
) -> Result<SweepResult> {
    spec.validate()?;
    let cells = spec.cells();
    let feasible: Vec<Result<()>> = cells
        .iter()
        .map(|c| c.stack.iter().try_for_each(|l| l.validate(spec.agents)))
        .collect();
    let jobs: Vec<(usize, usize)> = cells
        .iter()
        .enumerate()
        .filter(|(i, _)| feasible[*i].is_ok())
        .flat_map(|(i, _)| (0..spec.runs_per_cell).map(move |r| (i, r)))
        .collect();

    let results: Vec<Result<RunResult>> = with_pool(workers, || {
        jobs.par_iter()
            .map(|&(cell_idx, run_idx)| {
                let cell = &cells[cell_idx];
                let config = spec.sim_config(cell, spec.run_seed(cell, run_idx), record_series)?;
                run_simulation(&config)
            })
            .collect()
    })?;

    let mut by_cell: BTreeMap<usize, Vec<Result<RunResult>>> = BTreeMap::new();
    for (&(cell_idx, _), result) in jobs.iter().zip(results) {
        by_cell.entry(cell_idx).or_default().push(result);
    }
    let outcomes = cells
        .into_iter()
        .zip(feasible)
        .map(|(cell, feasible)| {
            let runs = feasible.and_then(|()| {
                by_cell
                    .remove(&cell.id)
                    .unwrap_or_default()
                    .into_iter()
                    .collect::<Result<Vec<_>>>()
            });
            CellOutcome { cell, runs }
        })
        .collect();
    Ok(SweepResult {
        spec: spec.clone(),
        cells: outcomes,
    })
}

/// Mean, standard deviation and quantiles of one property.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub mean: f64,
    pub sd: f64,
    pub quantiles: Quantiles,
}

impl Summary {
    pub fn of(values: &[f64]) -> Option<Self> {
        let quantiles = Quantiles::of(values)?;
        let (mean, sd) = mean_sd(values);
        Some(Summary {
            mean,
            sd,
            quantiles,
        })
    }
}

#[derive(Debug, Clone)]
pub struct PropertyOutcome {
    pub config_id: String,
    pub stack: Vec<LayerTopology>,
    pub instances: Result<Vec<GraphProperties>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropertySummary {
    pub edges: Summary,
    pub clustering_coefficient: Summary,
    pub avg_path_length: Summary,
    pub reachable_fraction: Summary,
}

impl PropertyOutcome {
    pub fn summary(&self) -> Result<PropertySummary> {
        let instances = self.instances.as_ref().map_err(Clone::clone)?;
        let column = |f: fn(&GraphProperties) -> f64| {
            let values: Vec<f64> = instances.iter().map(f).collect();
            Summary::of(&values).ok_or_else(|| Error::InsufficientData("no instances".into()))
        };
        Ok(PropertySummary {
            edges: column(|p| p.edge_count as f64)?,
            clustering_coefficient: column(|p| p.clustering_coefficient)?,
            avg_path_length: column(|p| p.avg_path_length)?,
            reachable_fraction: column(|p| p.reachable_pair_fraction)?,
        })
    }
}

#[derive(Debug, Clone)]
pub struct PropertySweep {
    pub family: &'static str,
    pub configs: Vec<PropertyOutcome>,
}

impl PropertySweep {
    pub fn structure_points(&self) -> Vec<StructurePoint> {
        self.configs
            .iter()
            .filter_map(|c| {
                c.summary().ok().map(|s| StructurePoint {
                    config_id: c.config_id.clone(),
                    avg_path_length: s.avg_path_length.mean,
                    clustering_coefficient: s.clustering_coefficient.mean,
                })
            })
            .collect()
    }
}

/// Generates `spec.instances` merged instances of every layer stack in the
/// grid and measures them.
pub fn network_property_sweep(spec: &SweepSpec, workers: Option<usize>) -> Result<PropertySweep> {
    spec.validate()?;
    let stacks = spec.stacks();
    let configs = with_pool(workers, || {
        stacks
            .par_iter()
            .map(|stack| {
                let config_id = stack_label(stack);
                let key = format!("properties|{config_id}");
                let instances = (0..spec.instances)
                    .map(|i| {
                        let seed = run_seed(spec.master_seed, &key, i as u64);
                        let mut rng = ChaCha8Rng::seed_from_u64(seed);
                        let layers = instantiate_layers(stack, spec.agents, &mut rng)?;
                        GraphProperties::measure(&merge_graphs(&layers)?, spec.low_degree)
                    })
                    .collect();
                PropertyOutcome {
                    config_id,
                    stack: stack.clone(),
                    instances,
                }
            })
            .collect()
    })?;
    Ok(PropertySweep {
        family: spec.topology.family(),
        configs,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergencePoint {
    pub config_id: String,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StructurePoint {
    pub config_id: String,
    pub avg_path_length: f64,
    pub clustering_coefficient: f64,
}

/// Convergence ratio against mean path length and mean clustering.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StructureCorrelation {
    pub ratio_vs_path_length: CorrelationReport,
    pub ratio_vs_clustering: CorrelationReport,
}

/// Joins convergence ratios with ensemble properties on configuration id
/// and correlates them.
pub fn correlate_structure_convergence(
    convergence: &[ConvergencePoint],
    structure: &[StructurePoint],
) -> Result<StructureCorrelation> {
    let mut by_id: BTreeMap<&str, &StructurePoint> = BTreeMap::new();
    for point in structure {
        if by_id.insert(&point.config_id, point).is_some() {
            return Err(Error::param(
                "properties",
                format!("configuration `{}` appears twice", point.config_id),
            ));
        }
    }
    let mut seen = BTreeMap::new();
    let (mut ratios, mut apl, mut cc) = (Vec::new(), Vec::new(), Vec::new());
    for point in convergence {
        if seen.insert(point.config_id.as_str(), ()).is_some() {
            return Err(Error::param(
                "sweep",
                format!(
                    "configuration `{}` appears in several cells",
                    point.config_id
                ),
            ));
        }
        if let Some(props) = by_id.get(point.config_id.as_str()) {
            ratios.push(point.ratio);
            apl.push(props.avg_path_length);
            cc.push(props.clustering_coefficient);
        }
    }
    if ratios.len() < 4 {
        return Err(Error::InsufficientData(format!(
            "only {} configurations matched; at least 4 are needed",
            ratios.len()
        )));
    }
    Ok(StructureCorrelation {
        ratio_vs_path_length: spearman(&ratios, &apl)?,
        ratio_vs_clustering: spearman(&ratios, &cc)?,
    })
}

impl fmt::Display for CellConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{} {}", self.id, self.key())
    }
}
