use consensus_core::{
    generate_k_regular, run_simulation, shuffle_labels, KRegularParams, Protocol, SimConfig,
    SocialSpace,
};
use criterion::{criterion_group, criterion_main, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn layers(k: usize, count: usize) -> Vec<consensus_core::Graph> {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let ring = generate_k_regular(KRegularParams { n: 100, k }).unwrap();
    (0..count)
        .map(|_| shuffle_labels(&ring, &mut rng))
        .collect()
}

fn simulation(c: &mut Criterion) {
    let mut group = c.benchmark_group("run_simulation");
    group.sample_size(20);

    // converges within a few dozen cycles
    let fast = SocialSpace::permeability(layers(10, 2)).unwrap();
    group.bench_function("permeability_2x10_regular", |b| {
        let mut cfg = SimConfig::new(fast.clone(), Protocol::Permeability, 0);
        b.iter(|| {
            cfg.seed += 1;
            run_simulation(&cfg).unwrap()
        })
    });

    // usually runs to the cycle cap
    let slow = SocialSpace::permeability(layers(1, 1)).unwrap();
    group.bench_function("permeability_1x1_regular_capped", |b| {
        let mut cfg = SimConfig::new(slow.clone(), Protocol::Permeability, 0);
        b.iter(|| {
            cfg.seed += 1;
            run_simulation(&cfg).unwrap()
        })
    });

    let switching = SocialSpace::new(layers(30, 2), vec![0.5, 0.5]).unwrap();
    group.bench_function("switching_2x30_regular", |b| {
        let mut cfg = SimConfig::new(switching.clone(), Protocol::Switching, 0);
        b.iter(|| {
            cfg.seed += 1;
            run_simulation(&cfg).unwrap()
        })
    });
    group.finish();
}

criterion_group!(benches, simulation);
criterion_main!(benches);
