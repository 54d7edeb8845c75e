use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use fri_core::branching::sample_colored_forest;
use fri_core::clusters::{grow_cluster_at_origin, GrowthLimits};
use fri_core::graphs::ball;
use fri_core::process::sample_fri_window;
use fri_core::spectral::estimate_rho_power_iteration;
use fri_core::{build_cayley_graph, derive_stream, FriParams, GraphFamily, Window};

fn samplers(c: &mut Criterion) {
    let g = build_cayley_graph(&GraphFamily::RegularTree { degree: 3 }).unwrap();
    let x = g.origin();
    let b = ball(&g, &x, 4);
    let p = FriParams::new(0.3, 5.0).unwrap();
    let mut rng = derive_stream(1, "bench", 0);

    c.bench_function("window_ball4_u0.3_T5", |bench| {
        bench.iter(|| sample_fri_window(&g, &p, &b, &Window::new(), &mut rng).unwrap())
    });

    let limits = GrowthLimits::new(usize::MAX, 40).unwrap().confined(x.clone(), 8);
    c.bench_function("growth_R8_budget40", |bench| {
        bench.iter(|| grow_cluster_at_origin(&g, &p, &x, &limits, &mut rng).unwrap())
    });

    c.bench_function("colored_forest_depth8", |bench| {
        bench.iter(|| sample_colored_forest(&FriParams::new(0.2, 5.0).unwrap(), 4, 8, &mut rng).unwrap())
    });

    let lattice = build_cayley_graph(&GraphFamily::Lattice { dim: 2 }).unwrap();
    c.bench_function("power_iteration_lattice_r10", |bench| {
        bench.iter_batched(
            || lattice.origin(),
            |o| estimate_rho_power_iteration(&lattice, &o, 10).unwrap(),
            BatchSize::SmallInput,
        )
    });
}

criterion_group!(benches, samplers);
criterion_main!(benches);
