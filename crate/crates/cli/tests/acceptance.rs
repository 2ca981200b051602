//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.
//!
//! Run with `cargo test -p consensus-cli --test acceptance`.

use std::fs;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use consensus_core::engine::{init_run, Agent};
use consensus_core::experiment::SweepResult;
use consensus_core::metrics::pearson;
use consensus_core::{
    average_path_length, clustering_coefficient, correlate_structure_convergence, em_update,
    generate_k_regular, network_property_sweep, run_simulation, run_sweep, shuffle_labels, Graph,
    KRegularParams, LowDegreeRule, Memory, Opinion, Protocol, SimConfig, SocialSpace, SweepSpec,
    TopologyPlan, ZetaGrid,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const MASTER_SEED: u64 = 20_240_601;
const DESK_RUNS: usize = 300;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new() -> Self {
        Outcome {
            pass: true,
            detail: String::new(),
        }
    }

    fn check(&mut self, ok: bool, what: impl AsRef<str>) {
        if !self.detail.is_empty() {
            self.detail.push_str("; ");
        }
        self.detail.push_str(what.as_ref());
        if !ok {
            self.detail.push_str(" [miss]");
            self.pass = false;
        }
    }

    fn within(&mut self, label: &str, value: f64, target: f64, tol: f64) {
        self.check(
            (value - target).abs() <= tol,
            format!("{label} {value:.4} (want {target} ± {tol})"),
        );
    }

    fn in_range(&mut self, label: &str, value: f64, lo: f64, hi: f64) {
        self.check(
            (lo..=hi).contains(&value),
            format!("{label} {value:.4} (want [{lo}, {hi}])"),
        );
    }

    fn time_limit(&mut self, elapsed: Duration, limit: Duration) {
        self.check(
            elapsed <= limit,
            format!("{:.2}s (limit {}s)", elapsed.as_secs_f64(), limit.as_secs()),
        );
    }
}

fn report(results: &mut Vec<bool>, name: &str, outcome: Outcome) {
    let tag = if outcome.pass { "PASS" } else { "FAIL" };
    println!("{tag} {name}: {}", outcome.detail);
    results.push(outcome.pass);
}

fn ring(k: usize) -> Graph {
    generate_k_regular(KRegularParams { n: 100, k }).unwrap()
}

fn ring_exactness() -> Outcome {
    let start = Instant::now();
    let mut o = Outcome::new();
    for (k, cc, apl) in [(10, 0.711, 2.980), (20, 0.731, 1.788)] {
        let g = ring(k);
        o.within(
            &format!("CC(k={k})"),
            clustering_coefficient(&g, LowDegreeRule::Exclude),
            cc,
            0.001,
        );
        o.within(
            &format!("APL(k={k})"),
            average_path_length(&g).unwrap().mean,
            apl,
            0.001,
        );
    }
    o.time_limit(start.elapsed(), Duration::from_secs(1));
    o
}

fn merged_ensemble() -> Outcome {
    let start = Instant::now();
    let mut spec = SweepSpec::new(
        TopologyPlan::KRegular { ks: vec![10] },
        vec![2],
        Protocol::Permeability,
    );
    spec.master_seed = MASTER_SEED;
    let props = network_property_sweep(&spec, None).unwrap();
    let s = props.configs[0].summary().unwrap();
    let mut o = Outcome::new();
    o.in_range("edges", s.edges.mean, 1750.0, 1830.0);
    o.within("CC", s.clustering_coefficient.mean, 0.512, 0.03);
    o.within("APL", s.avg_path_length.mean, 1.638, 0.03);
    o.time_limit(start.elapsed(), Duration::from_secs(10));
    o
}

fn ratio(result: &SweepResult, config_id: &str) -> f64 {
    result
        .cells
        .iter()
        .find(|c| c.cell.config_id() == config_id)
        .unwrap_or_else(|| panic!("no cell {config_id}"))
        .stats()
        .unwrap()
        .convergence_ratio
}

fn sweep_spec(topology: TopologyPlan) -> SweepSpec {
    let mut spec = SweepSpec::new(topology, vec![1, 2, 3, 4, 5], Protocol::Permeability);
    spec.runs_per_cell = DESK_RUNS;
    spec.master_seed = MASTER_SEED;
    spec
}

fn convergence_ratios(kreg: &SweepResult, sf: &SweepResult) -> Outcome {
    let mut o = Outcome::new();
    o.within("kreg-10x1", ratio(kreg, "kreg-10x1"), 0.183, 0.06);
    o.within("kreg-10x2", ratio(kreg, "kreg-10x2"), 0.982, 0.03);
    o.within("kreg-1x3", ratio(kreg, "kreg-1x3"), 0.656, 0.06);
    o.in_range("kreg-50x1", ratio(kreg, "kreg-50x1"), 0.99, 1.0);
    o.in_range("sf-1x1", ratio(sf, "sf-1x1"), 0.0, 0.01);
    o.within("sf-2x2", ratio(sf, "sf-2x2"), 0.929, 0.04);
    o
}

fn heterogeneous_cell() -> Outcome {
    let mut spec = SweepSpec::new(
        TopologyPlan::Mixed {
            ks: vec![1],
            ds: vec![1],
        },
        vec![],
        Protocol::Permeability,
    );
    spec.runs_per_cell = 100;
    spec.master_seed = MASTER_SEED;
    let result = run_sweep(&spec, None).unwrap();
    let mut o = Outcome::new();
    o.within("kreg-1+sf-1", ratio(&result, "kreg-1+sf-1"), 0.18, 0.07);
    o
}

fn structure_correlation(label: &str, sweep: &SweepResult, lo: f64, hi: f64, o: &mut Outcome) {
    let props = network_property_sweep(&sweep.spec, None).unwrap();
    let corr =
        correlate_structure_convergence(&sweep.convergence_points(), &props.structure_points())
            .unwrap();
    let r = corr.ratio_vs_path_length;
    o.in_range(
        &format!("{label} rho(CR, APL) over {} cells", r.samples),
        r.rho,
        lo,
        hi,
    );
    // product-moment r on the same pairs, reported for comparison only
    let apl: std::collections::HashMap<_, _> = props
        .structure_points()
        .into_iter()
        .map(|p| (p.config_id, p.avg_path_length))
        .collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = sweep
        .convergence_points()
        .iter()
        .map(|c| (c.ratio, apl[&c.config_id]))
        .unzip();
    o.check(
        true,
        format!(
            "{label} pearson r {:.4}",
            pearson(&xs, &ys).unwrap_or(f64::NAN)
        ),
    );
}

fn switching_saturation() -> Outcome {
    let mut spec = SweepSpec::new(
        TopologyPlan::KRegular { ks: vec![30] },
        vec![2],
        Protocol::Switching,
    );
    spec.zeta = ZetaGrid::Symmetric(vec![0.0, 0.25, 0.5, 0.75]);
    spec.runs_per_cell = DESK_RUNS;
    spec.master_seed = MASTER_SEED;
    let result = run_sweep(&spec, None).unwrap();
    let mut o = Outcome::new();
    for cell in &result.cells {
        let stats = cell.stats().unwrap();
        let zeta = cell.cell.zeta[0];
        if zeta == 0.0 {
            o.in_range("ratio at zeta=0", stats.convergence_ratio, 0.0, 0.05);
        } else {
            o.in_range(
                &format!("mean encounters at zeta={zeta}"),
                stats.encounters_mean,
                1000.0,
                4000.0,
            );
        }
    }
    o
}

fn em_oracle(memory: Memory, current: Opinion, observed: Opinion) -> (Memory, Opinion) {
    let mut counts = memory.counts;
    counts[observed.index()] += 1;
    let next = Memory::new(counts[0], counts[1]);
    if counts[observed.index()] > counts[current.index()] {
        (next, observed)
    } else {
        (next, current)
    }
}

fn random_graph(rng: &mut ChaCha8Rng) -> Graph {
    let n = rng.random_range(2..=30);
    let p: f64 = rng.random_range(0.0..0.5);
    let edges: Vec<(usize, usize)> = (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
        .filter(|_| rng.random_bool(p))
        .collect();
    Graph::from_edges(n, edges).unwrap()
}

fn floyd_warshall(g: &Graph) -> Option<f64> {
    let n = g.node_count();
    let inf = usize::MAX / 4;
    let mut d = vec![vec![inf; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0;
    }
    for (u, v) in g.edges() {
        d[u][v] = 1;
        d[v][u] = 1;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                d[i][j] = d[i][j].min(d[i][k] + d[k][j]);
            }
        }
    }
    let dists: Vec<usize> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .map(|(i, j)| d[i][j])
        .filter(|&x| x < inf)
        .collect();
    (!dists.is_empty()).then(|| dists.iter().sum::<usize>() as f64 / dists.len() as f64)
}

fn triangle_cc(g: &Graph) -> f64 {
    let locals: Vec<f64> = (0..g.node_count())
        .filter(|&v| g.degree(v) >= 2)
        .map(|v| {
            let nb = g.neighbours(v);
            let mut links = 0;
            for (i, &a) in nb.iter().enumerate() {
                for &b in &nb[i + 1..] {
                    links += usize::from(g.has_edge(a as usize, b as usize));
                }
            }
            links as f64 / (nb.len() * (nb.len() - 1) / 2) as f64
        })
        .collect();
    if locals.is_empty() {
        0.0
    } else {
        locals.iter().sum::<f64>() / locals.len() as f64
    }
}

fn consensus_binary(args: &[&str], dir: &std::path::Path) -> Option<Vec<u8>> {
    let status = Command::new(env!("CARGO_BIN_EXE_consensus"))
        .args(args)
        .current_dir(dir)
        .output()
        .ok()?;
    status
        .status
        .success()
        .then(|| fs::read(dir.join("runs.csv")).ok())
        .flatten()
}

fn property_suite() -> Outcome {
    let mut o = Outcome::new();

    let mut cases = 0;
    let mut mismatches = 0;
    for zeros in 0..=5 {
        for ones in 0..=5 {
            for current in [Opinion::Zero, Opinion::One] {
                for observed in [Opinion::Zero, Opinion::One] {
                    let memory = Memory::new(zeros, ones);
                    cases += 1;
                    mismatches += usize::from(
                        em_update(memory, current, observed)
                            != em_oracle(memory, current, observed),
                    );
                }
            }
        }
    }
    o.check(
        mismatches == 0,
        format!("em_update {}/{cases} cases match", cases - mismatches),
    );

    let mut rng = ChaCha8Rng::seed_from_u64(MASTER_SEED);
    let mut metric_misses = 0;
    let mut shuffle_misses = 0;
    for _ in 0..50 {
        let g = random_graph(&mut rng);
        let apl_ok = match (average_path_length(&g), floyd_warshall(&g)) {
            (Ok(s), Some(want)) => (s.mean - want).abs() < 1e-12,
            (Err(_), None) => true,
            _ => false,
        };
        let cc_ok =
            (clustering_coefficient(&g, LowDegreeRule::Exclude) - triangle_cc(&g)).abs() < 1e-12;
        metric_misses += usize::from(!(apl_ok && cc_ok));
        let s = shuffle_labels(&g, &mut rng);
        shuffle_misses += usize::from(
            s.degree_sequence() != g.degree_sequence()
                || s.component_count() != g.component_count(),
        );
    }
    o.check(
        metric_misses == 0,
        format!("APL/CC oracles agree on {}/50 graphs", 50 - metric_misses),
    );
    o.check(
        shuffle_misses == 0,
        format!(
            "shuffle preserves degrees and components on {}/50",
            50 - shuffle_misses
        ),
    );

    let dir = tempfile::TempDir::new().unwrap();
    let config = "protocol = switching\ntopology = scale-free\nd = 1, 2\nlayers = 2\nzeta = 0.3\nruns = 6\nmax_cycles = 400\n";
    fs::write(dir.path().join("exp.cfg"), config).unwrap();
    let args = |workers: &'static str| {
        [
            "run",
            "--config",
            "exp.cfg",
            "--out",
            "runs.csv",
            "--seed",
            "77",
            "--workers",
            workers,
        ]
    };
    let first = consensus_binary(&args("1"), dir.path());
    let second = consensus_binary(&args("1"), dir.path());
    let parallel = consensus_binary(&args("3"), dir.path());
    o.check(
        first.is_some() && first == second,
        "two processes write identical records",
    );
    o.check(
        first.is_some() && first == parallel,
        "1 and 3 workers write identical records",
    );

    let mut absorbing = true;
    for seed in 0..10 {
        let layers = vec![
            shuffle_labels(&ring(3), &mut rng),
            shuffle_labels(&ring(3), &mut rng),
        ];
        let cfg = SimConfig::new(
            SocialSpace::new(layers, vec![0.5, 0.5]).unwrap(),
            Protocol::Switching,
            seed,
        );
        let mut run_rng = ChaCha8Rng::seed_from_u64(seed);
        let mut state = init_run(&cfg, &mut run_rng);
        for _ in 0..20 {
            state.run_cycle(&mut run_rng);
        }
        let held = Opinion::from_index(seed as usize % 2).unwrap();
        for id in 0..state.agents().len() {
            let agent = state.agents()[id];
            state.set_agent(
                id,
                Agent {
                    opinion: held,
                    ..agent
                },
            );
        }
        for _ in 0..100 {
            state.run_cycle(&mut run_rng);
            absorbing &= state.agents().iter().all(|a| a.opinion == held);
        }
    }
    o.check(absorbing, "consensus holds for 100 further cycles");

    let cfg = SimConfig::new(
        SocialSpace::permeability(vec![ring(4)]).unwrap(),
        Protocol::Permeability,
        5,
    );
    o.check(
        run_simulation(&cfg).unwrap() == run_simulation(&cfg).unwrap(),
        "in-process rerun identical",
    );
    o
}

fn main() -> ExitCode {
    let started = Instant::now();
    let mut results = Vec::new();

    report(&mut results, "1 ring-lattice exactness", ring_exactness());
    report(
        &mut results,
        "2 merged-ensemble properties",
        merged_ensemble(),
    );

    let kreg = run_sweep(
        &sweep_spec(TopologyPlan::KRegular {
            ks: vec![1, 2, 3, 4, 5, 10, 20, 30, 40, 50],
        }),
        None,
    )
    .unwrap();
    let sf = run_sweep(
        &sweep_spec(TopologyPlan::ScaleFree {
            ds: vec![1, 2, 3, 4, 5],
        }),
        None,
    )
    .unwrap();
    report(
        &mut results,
        "3 convergence ratios (300 runs/cell)",
        convergence_ratios(&kreg, &sf),
    );
    report(
        &mut results,
        "4 heterogeneous cell (100 runs)",
        heterogeneous_cell(),
    );

    let mut corr = Outcome::new();
    structure_correlation("k-regular", &kreg, -0.83, -0.62, &mut corr);
    structure_correlation("scale-free", &sf, -0.97, -0.83, &mut corr);
    report(&mut results, "5 structure-convergence correlation", corr);

    report(
        &mut results,
        "6 context-switching saturation",
        switching_saturation(),
    );
    report(&mut results, "7 property suite", property_suite());

    let passed = results.iter().filter(|&&p| p).count();
    println!(
        "{passed}/{} criteria passed in {:.1}s",
        results.len(),
        started.elapsed().as_secs_f64()
    );
    if passed == results.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
