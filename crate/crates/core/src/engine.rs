//! The binary consensus game: agents, the external-majority rule and the
//! per-cycle steppers for context permeability and context switching.
//!
//! All randomness of a run comes from one ChaCha8 stream seeded with
//! [`SimConfig::seed`]. Draws happen in this order:
//!
//! 1. initial opinions, one per agent in id order (or a shuffle for
//!    [`OpinionInit::ExactSplit`]);
//! 2. initial contexts, one per agent, switching protocol only;
//! 3. per cycle: a shuffle of the agent order, then for each agent the
//!    layer draw (permeability), the partner draw (when the neighbourhood
//!    is non-empty) and the switch roll plus target draw (switching).

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::network::Graph;

/// Default cycle cap.
pub const DEFAULT_MAX_CYCLES: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Opinion {
    Zero,
    One,
}

impl Opinion {
    pub fn index(self) -> usize {
        match self {
            Opinion::Zero => 0,
            Opinion::One => 1,
        }
    }

    pub fn from_index(index: usize) -> Option<Self> {
        match index {
            0 => Some(Opinion::Zero),
            1 => Some(Opinion::One),
            _ => None,
        }
    }
}

impl fmt::Display for Opinion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.index())
    }
}

/// Observation counters, indexed by opinion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub struct Memory {
    pub counts: [u64; 2],
}

impl Memory {
    pub fn new(zeros: u64, ones: u64) -> Self {
        Memory {
            counts: [zeros, ones],
        }
    }

    pub fn get(&self, opinion: Opinion) -> u64 {
        self.counts[opinion.index()]
    }

    pub fn total(&self) -> u64 {
        self.counts[0] + self.counts[1]
    }

    /// `|zeros - ones|`.
    pub fn difference(&self) -> u64 {
        self.counts[0].abs_diff(self.counts[1])
    }
}

/// External majority: record the observation, then adopt the observed
/// opinion only if it is now strictly more frequent than the current one.
pub fn em_update(memory: Memory, current: Opinion, observed: Opinion) -> (Memory, Opinion) {
    let mut memory = memory;
    memory.counts[observed.index()] += 1;
    let opinion = if memory.get(observed) > memory.get(current) {
        observed
    } else {
        current
    };
    (memory, opinion)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Agent {
    pub opinion: Opinion,
    pub memory: Memory,
    /// Active layer; only meaningful under context switching.
    pub context: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Protocol {
    Permeability,
    Switching,
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Protocol::Permeability => "permeability",
            Protocol::Switching => "switching",
        })
    }
}

impl FromStr for Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "permeability" => Ok(Protocol::Permeability),
            "switching" => Ok(Protocol::Switching),
            other => Err(Error::param(
                "protocol",
                format!("`{other}` is not `permeability` or `switching`"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum OpinionInit {
    /// Each opinion drawn independently and uniformly.
    #[default]
    Uniform,
    /// `floor(n / 2)` zeros and the rest ones, randomly placed.
    ExactSplit,
}

/// The network layers shared by one agent population, with a switching
/// probability per layer.
#[derive(Debug, Clone, PartialEq)]
pub struct SocialSpace {
    layers: Vec<Graph>,
    switching_probs: Vec<f64>,
}

impl SocialSpace {
    pub fn new(layers: Vec<Graph>, switching_probs: Vec<f64>) -> Result<Self> {
        let first = layers
            .first()
            .ok_or_else(|| Error::param("layers", "at least one layer is required"))?;
        if layers.iter().any(|g| g.node_count() != first.node_count()) {
            return Err(Error::param(
                "layers",
                "all layers must share the node count",
            ));
        }
        if switching_probs.len() != layers.len() {
            return Err(Error::param(
                "switching_probs",
                format!(
                    "{} values for {} layers",
                    switching_probs.len(),
                    layers.len()
                ),
            ));
        }
        if let Some(p) = switching_probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::param(
                "switching_probs",
                format!("{p} is outside [0, 1]"),
            ));
        }
        Ok(SocialSpace {
            layers,
            switching_probs,
        })
    }

    /// Layers with every switching probability set to zero.
    pub fn permeability(layers: Vec<Graph>) -> Result<Self> {
        let zeros = vec![0.0; layers.len()];
        Self::new(layers, zeros)
    }

    pub fn layers(&self) -> &[Graph] {
        &self.layers
    }

    pub fn switching_probs(&self) -> &[f64] {
        &self.switching_probs
    }

    pub fn agent_count(&self) -> usize {
        self.layers[0].node_count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub space: Arc<SocialSpace>,
    pub protocol: Protocol,
    pub max_cycles: usize,
    pub seed: u64,
    pub record_series: bool,
    pub init: OpinionInit,
}

impl SimConfig {
    pub fn new(space: SocialSpace, protocol: Protocol, seed: u64) -> Self {
        SimConfig {
            space: Arc::new(space),
            protocol,
            max_cycles: DEFAULT_MAX_CYCLES,
            seed,
            record_series: false,
            init: OpinionInit::Uniform,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_cycles == 0 {
            return Err(Error::param("max_cycles", "must be at least 1"));
        }
        Ok(())
    }
}

/// Population summary after one cycle (cycle 0 is the initial state).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesRecord {
    pub cycle: usize,
    pub count_opinion0: usize,
    pub count_opinion1: usize,
    /// Mean over agents of `|memory[0] - memory[1]|`.
    pub mean_mem_diff: f64,
    /// Population variance of the same quantity.
    pub var_mem_diff: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub seed: u64,
    pub protocol: Protocol,
    pub converged: bool,
    pub cycles_used: usize,
    /// Successful partner observations.
    pub encounters: u64,
    /// Steps where the agent found nobody to observe.
    pub failed_steps: u64,
    pub final_opinion: Option<Opinion>,
    pub series: Option<Vec<SeriesRecord>>,
}

/// Mutable state of one run.
#[derive(Debug, Clone)]
pub struct SimState {
    space: Arc<SocialSpace>,
    protocol: Protocol,
    agents: Vec<Agent>,
    order: Vec<usize>,
    cycle: usize,
    encounters: u64,
    failed_steps: u64,
    series: Option<Vec<SeriesRecord>>,
}

/// Fresh population: uniform opinions (or an exact split), empty memories,
/// and uniform contexts under the switching protocol.
pub fn init_run<R: Rng + ?Sized>(config: &SimConfig, rng: &mut R) -> SimState {
    let n = config.space.agent_count();
    let opinions: Vec<Opinion> = match config.init {
        OpinionInit::Uniform => (0..n)
            .map(|_| {
                if rng.random_bool(0.5) {
                    Opinion::One
                } else {
                    Opinion::Zero
                }
            })
            .collect(),
        OpinionInit::ExactSplit => {
            let mut ops: Vec<Opinion> = (0..n)
                .map(|i| {
                    if i < n / 2 {
                        Opinion::Zero
                    } else {
                        Opinion::One
                    }
                })
                .collect();
            ops.shuffle(rng);
            ops
        }
    };
    let layer_count = config.space.layers().len();
    let agents = opinions
        .into_iter()
        .map(|opinion| Agent {
            opinion,
            memory: Memory::default(),
            context: 0,
        })
        .collect();
    let mut state = SimState {
        space: Arc::clone(&config.space),
        protocol: config.protocol,
        agents,
        order: (0..n).collect(),
        cycle: 0,
        encounters: 0,
        failed_steps: 0,
        series: config.record_series.then(Vec::new),
    };
    if config.protocol == Protocol::Switching {
        for agent in &mut state.agents {
            agent.context = rng.random_range(0..layer_count);
        }
    }
    state.record();
    state
}

impl SimState {
    pub fn agents(&self) -> &[Agent] {
        &self.agents
    }

    /// Overwrites an agent, e.g. to set up a fixture.
    pub fn set_agent(&mut self, id: usize, agent: Agent) {
        assert!(
            agent.context < self.space.layers().len(),
            "context out of range"
        );
        self.agents[id] = agent;
    }

    /// Agent execution order of the most recent cycle.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn cycle(&self) -> usize {
        self.cycle
    }

    pub fn encounters(&self) -> u64 {
        self.encounters
    }

    pub fn failed_steps(&self) -> u64 {
        self.failed_steps
    }

    pub fn series(&self) -> Option<&[SeriesRecord]> {
        self.series.as_deref()
    }

    fn observe(&mut self, agent_id: usize, partner: usize) {
        let observed = self.agents[partner].opinion;
        let agent = &mut self.agents[agent_id];
        let (memory, opinion) = em_update(agent.memory, agent.opinion, observed);
        agent.memory = memory;
        agent.opinion = opinion;
    }

    /// Context permeability step: pick a layer, then a neighbour in it, and
    /// observe the neighbour's current opinion. Returns whether an
    /// observation happened.
    pub fn step_permeability<R: Rng + ?Sized>(&mut self, agent_id: usize, rng: &mut R) -> bool {
        let space = Arc::clone(&self.space);
        let layers = space.layers();
        let layer = &layers[rng.random_range(0..layers.len())];
        let neighbours = layer.neighbours(agent_id);
        if neighbours.is_empty() {
            return false;
        }
        let partner = neighbours[rng.random_range(0..neighbours.len())] as usize;
        self.observe(agent_id, partner);
        true
    }

    /// Context switching step: observe a neighbour active in the same layer
    /// (if any), then leave the layer with its switching probability.
    pub fn step_switching<R: Rng + ?Sized>(&mut self, agent_id: usize, rng: &mut R) -> bool {
        let space = Arc::clone(&self.space);
        let context = self.agents[agent_id].context;
        let neighbours = space.layers()[context].neighbours(agent_id);
        let active = |&&v: &&u32| self.agents[v as usize].context == context;
        let available = neighbours.iter().filter(active).count();
        let encountered = if available > 0 {
            let pick = rng.random_range(0..available);
            let partner = *neighbours
                .iter()
                .filter(active)
                .nth(pick)
                .expect("pick is below the active count") as usize;
            self.observe(agent_id, partner);
            true
        } else {
            false
        };

        let layer_count = space.layers().len();
        if layer_count > 1 && rng.random::<f64>() < space.switching_probs()[context] {
            // uniform over the other layers
            let mut next = rng.random_range(0..layer_count - 1);
            if next >= context {
                next += 1;
            }
            self.agents[agent_id].context = next;
        }
        encountered
    }

    /// One step for every agent, in a fresh uniformly random order.
    pub fn run_cycle<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let mut order = std::mem::take(&mut self.order);
        order.shuffle(rng);
        for &agent_id in &order {
            let encountered = match self.protocol {
                Protocol::Permeability => self.step_permeability(agent_id, rng),
                Protocol::Switching => self.step_switching(agent_id, rng),
            };
            if encountered {
                self.encounters += 1;
            } else {
                self.failed_steps += 1;
            }
        }
        self.order = order;
        self.cycle += 1;
        self.record();
    }

    /// True when every agent holds the same opinion (vacuously true for an
    /// empty population).
    pub fn is_consensus(&self) -> bool {
        match self.agents.split_first() {
            None => true,
            Some((first, rest)) => rest.iter().all(|a| a.opinion == first.opinion),
        }
    }

    fn record(&mut self) {
        let Some(series) = self.series.as_mut() else {
            return;
        };
        let n = self.agents.len();
        let ones = self
            .agents
            .iter()
            .filter(|a| a.opinion == Opinion::One)
            .count();
        let (mean, var) = if n == 0 {
            (0.0, 0.0)
        } else {
            let diffs = self.agents.iter().map(|a| a.memory.difference() as f64);
            let mean = diffs.clone().sum::<f64>() / n as f64;
            let var = diffs.map(|d| (d - mean) * (d - mean)).sum::<f64>() / n as f64;
            (mean, var)
        };
        series.push(SeriesRecord {
            cycle: self.cycle,
            count_opinion0: n - ones,
            count_opinion1: ones,
            mean_mem_diff: mean,
            var_mem_diff: var,
        });
    }

    fn into_result(self, seed: u64) -> RunResult {
        let converged = self.is_consensus();
        RunResult {
            seed,
            protocol: self.protocol,
            converged,
            cycles_used: self.cycle,
            encounters: self.encounters,
            failed_steps: self.failed_steps,
            final_opinion: if converged {
                self.agents.first().map(|a| a.opinion)
            } else {
                None
            },
            series: self.series,
        }
    }
}

/// Runs cycles until consensus or the cycle cap. A pure function of the
/// configuration.
pub fn run_simulation(config: &SimConfig) -> Result<RunResult> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut state = init_run(config, &mut rng);
    while !state.is_consensus() && state.cycle < config.max_cycles {
        state.run_cycle(&mut rng);
    }
    Ok(state.into_result(config.seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{generate_k_regular, KRegularParams};
    use Opinion::{One, Zero};

    fn edge_pair() -> Graph {
        Graph::from_edges(2, [(0, 1)]).unwrap()
    }

    fn config(layers: Vec<Graph>, zetas: Vec<f64>, protocol: Protocol, seed: u64) -> SimConfig {
        SimConfig::new(SocialSpace::new(layers, zetas).unwrap(), protocol, seed)
    }

    fn agent(opinion: Opinion, zeros: u64, ones: u64, context: usize) -> Agent {
        Agent {
            opinion,
            memory: Memory::new(zeros, ones),
            context,
        }
    }

    /// Literal reading of the rule: add one to the observed counter; switch
    /// if the observed counter now exceeds the counter of the held opinion.
    fn em_oracle(zeros: u64, ones: u64, current: usize, observed: usize) -> ((u64, u64), usize) {
        let mut mem = [zeros, ones];
        mem[observed] += 1;
        let next = if mem[observed] > mem[current] {
            observed
        } else {
            current
        };
        ((mem[0], mem[1]), next)
    }

    #[test]
    fn em_examples() {
        assert_eq!(
            em_update(Memory::new(0, 0), Zero, One),
            (Memory::new(0, 1), One)
        );
        assert_eq!(
            em_update(Memory::new(1, 0), Zero, One),
            (Memory::new(1, 1), Zero)
        );
        assert_eq!(
            em_update(Memory::new(3, 1), Zero, Zero),
            (Memory::new(4, 1), Zero)
        );
    }

    #[test]
    fn em_matches_oracle_exhaustively() {
        let mut cases = 0;
        for zeros in 0..=5 {
            for ones in 0..=5 {
                for current in 0..2 {
                    for observed in 0..2 {
                        let (mem, op) = em_update(
                            Memory::new(zeros, ones),
                            Opinion::from_index(current).unwrap(),
                            Opinion::from_index(observed).unwrap(),
                        );
                        let (want_mem, want_op) = em_oracle(zeros, ones, current, observed);
                        assert_eq!((mem.counts[0], mem.counts[1]), want_mem);
                        assert_eq!(op.index(), want_op);
                        cases += 1;
                    }
                }
            }
        }
        assert_eq!(cases, 144);
    }

    #[test]
    fn social_space_validation() {
        assert!(SocialSpace::new(vec![], vec![]).is_err());
        assert!(SocialSpace::new(vec![edge_pair()], vec![]).is_err());
        assert!(SocialSpace::new(vec![edge_pair()], vec![1.5]).is_err());
        assert!(
            SocialSpace::new(vec![edge_pair(), Graph::empty(3).unwrap()], vec![0.0, 0.0]).is_err()
        );
    }

    #[test]
    fn single_agent_init() {
        let cfg = config(
            vec![Graph::empty(1).unwrap()],
            vec![0.0],
            Protocol::Permeability,
            1,
        );
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let state = init_run(&cfg, &mut rng);
        assert_eq!(state.agents().len(), 1);
        assert_eq!(state.agents()[0].memory, Memory::default());
        assert!(state.is_consensus());
    }

    #[test]
    fn exact_split_init() {
        let ring = generate_k_regular(KRegularParams { n: 101, k: 2 }).unwrap();
        let mut cfg = config(vec![ring], vec![0.0], Protocol::Permeability, 4);
        cfg.init = OpinionInit::ExactSplit;
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let state = init_run(&cfg, &mut rng);
        let ones = state.agents().iter().filter(|a| a.opinion == One).count();
        assert_eq!(ones, 51);
    }

    #[test]
    fn isolated_agent_has_no_encounter() {
        let cfg = config(
            vec![Graph::empty(3).unwrap()],
            vec![0.0],
            Protocol::Permeability,
            0,
        );
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut state = init_run(&cfg, &mut rng);
        let before = state.agents()[1];
        assert!(!state.step_permeability(1, &mut rng));
        assert_eq!(state.agents()[1], before);
    }

    #[test]
    fn permeability_hand_trace() {
        let cfg = config(vec![edge_pair()], vec![0.0], Protocol::Permeability, 0);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut state = init_run(&cfg, &mut rng);
        state.set_agent(0, agent(Zero, 0, 0, 0));
        state.set_agent(1, agent(One, 0, 0, 0));
        assert!(state.step_permeability(0, &mut rng));
        assert_eq!(state.agents()[0], agent(One, 0, 1, 0));
        // the partner does not observe anything
        assert_eq!(state.agents()[1], agent(One, 0, 0, 0));
    }

    #[test]
    fn ring_never_isolates() {
        let ring = generate_k_regular(KRegularParams { n: 30, k: 1 }).unwrap();
        let cfg = config(
            vec![ring.clone(), ring],
            vec![0.0; 2],
            Protocol::Permeability,
            2,
        );
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut state = init_run(&cfg, &mut rng);
        for _ in 0..20 {
            for id in 0..30 {
                assert!(state.step_permeability(id, &mut rng));
            }
        }
    }

    #[test]
    fn zero_switching_keeps_contexts() {
        let ring = generate_k_regular(KRegularParams { n: 20, k: 2 }).unwrap();
        let cfg = config(
            vec![ring.clone(), ring.clone(), ring],
            vec![0.0; 3],
            Protocol::Switching,
            8,
        );
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut state = init_run(&cfg, &mut rng);
        let contexts: Vec<usize> = state.agents().iter().map(|a| a.context).collect();
        for _ in 0..50 {
            state.run_cycle(&mut rng);
        }
        let after: Vec<usize> = state.agents().iter().map(|a| a.context).collect();
        assert_eq!(contexts, after);
    }

    #[test]
    fn certain_switching_alternates() {
        let ring = generate_k_regular(KRegularParams { n: 10, k: 1 }).unwrap();
        let cfg = config(
            vec![ring.clone(), ring],
            vec![1.0, 1.0],
            Protocol::Switching,
            3,
        );
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut state = init_run(&cfg, &mut rng);
        for _ in 0..10 {
            let before = state.agents()[4].context;
            state.step_switching(4, &mut rng);
            assert_eq!(state.agents()[4].context, 1 - before);
        }
    }

    #[test]
    fn single_layer_never_switches() {
        let ring = generate_k_regular(KRegularParams { n: 10, k: 1 }).unwrap();
        let cfg = config(vec![ring], vec![1.0], Protocol::Switching, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut state = init_run(&cfg, &mut rng);
        for _ in 0..10 {
            state.run_cycle(&mut rng);
        }
        assert!(state.agents().iter().all(|a| a.context == 0));
    }

    #[test]
    fn switching_without_active_neighbours() {
        // path 0-1-2 in layer 0; agent 1 is in layer 0, both neighbours in layer 1
        let path = Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        let cfg = config(
            vec![path.clone(), path],
            vec![1.0, 1.0],
            Protocol::Switching,
            5,
        );
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut state = init_run(&cfg, &mut rng);
        state.set_agent(0, agent(One, 0, 0, 1));
        state.set_agent(1, agent(Zero, 0, 0, 0));
        state.set_agent(2, agent(One, 0, 0, 1));
        assert!(!state.step_switching(1, &mut rng));
        assert_eq!(state.agents()[1], agent(Zero, 0, 0, 1));
    }

    #[test]
    fn switching_filters_by_context() {
        // agent 1's only co-active neighbour is agent 2
        let path = Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        let cfg = config(
            vec![path.clone(), path],
            vec![0.0, 0.0],
            Protocol::Switching,
            6,
        );
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut state = init_run(&cfg, &mut rng);
        state.set_agent(0, agent(Zero, 0, 0, 1));
        state.set_agent(1, agent(Zero, 0, 0, 0));
        state.set_agent(2, agent(One, 0, 0, 0));
        for _ in 0..5 {
            assert!(state.step_switching(1, &mut rng));
        }
        assert_eq!(state.agents()[1], agent(One, 0, 5, 0));
    }

    #[test]
    fn full_cycle_counts_every_agent() {
        let ring = generate_k_regular(KRegularParams { n: 100, k: 3 }).unwrap();
        let cfg = config(vec![ring], vec![0.0], Protocol::Permeability, 9);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut state = init_run(&cfg, &mut rng);
        state.run_cycle(&mut rng);
        assert_eq!(state.encounters(), 100);
        state.run_cycle(&mut rng);
        assert_eq!(state.encounters(), 200);
        assert_eq!(state.cycle(), 2);
    }

    #[test]
    fn two_agents_converge_quickly() {
        for seed in 0..50 {
            let cfg = config(vec![edge_pair()], vec![0.0], Protocol::Permeability, seed);
            let result = run_simulation(&cfg).unwrap();
            assert!(result.converged);
            assert!(
                result.cycles_used <= 2,
                "seed {seed}: {}",
                result.cycles_used
            );
        }
    }

    #[test]
    fn consensus_cases() {
        let ring = generate_k_regular(KRegularParams { n: 100, k: 1 }).unwrap();
        let cfg = config(vec![ring], vec![0.0], Protocol::Permeability, 0);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut state = init_run(&cfg, &mut rng);
        for id in 0..100 {
            state.set_agent(id, agent(One, 0, 0, 0));
        }
        assert!(state.is_consensus());
        state.set_agent(42, agent(Zero, 0, 0, 0));
        assert!(!state.is_consensus());
    }

    #[test]
    fn series_tracks_cycles() {
        let ring = generate_k_regular(KRegularParams { n: 50, k: 2 }).unwrap();
        let mut cfg = config(vec![ring], vec![0.0], Protocol::Permeability, 12);
        cfg.record_series = true;
        cfg.max_cycles = 30;
        let result = run_simulation(&cfg).unwrap();
        let series = result.series.unwrap();
        assert_eq!(series.len(), result.cycles_used + 1);
        assert_eq!(series[0].mean_mem_diff, 0.0);
        for (i, rec) in series.iter().enumerate() {
            assert_eq!(rec.cycle, i);
            assert_eq!(rec.count_opinion0 + rec.count_opinion1, 50);
        }
    }

    #[test]
    fn zero_max_cycles_is_rejected() {
        let mut cfg = config(vec![edge_pair()], vec![0.0], Protocol::Permeability, 0);
        cfg.max_cycles = 0;
        assert!(run_simulation(&cfg).is_err());
    }
}
