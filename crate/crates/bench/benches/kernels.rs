use criterion::{black_box, criterion_group, criterion_main, Criterion};
use fsuc_bench::{case, tree_at};
use fsuc_core::formulation::{build_suc, FormulationOptions, PlanState};
use fsuc_core::frequency::{min_pfr_for_nadir, simulate_post_fault, ServicePoint};
use fsuc_core::mip::solve;
use fsuc_core::system::FrequencyParams;

fn frequency(c: &mut Criterion) {
    let fp = FrequencyParams::gb(1800.0);
    c.bench_function("min_pfr_for_nadir", |b| {
        b.iter(|| min_pfr_for_nadir(black_box(90_000.0), black_box(200.0), &fp))
    });
    let sp = ServicePoint::new(90_000.0, 200.0, 4604.0);
    c.bench_function("simulate_post_fault 10ms", |b| b.iter(|| simulate_post_fault(black_box(&sp), &fp, 0.01, 60.0)));
}

fn planning(c: &mut Criterion) {
    let mut g = c.benchmark_group("rolling step");
    g.sample_size(10);
    for future in [false, true] {
        let case = case(future);
        let hour = case.config.start_hour;
        let state = PlanState::initial(&case.model);
        let name = if future { "future" } else { "current" };
        g.bench_function(format!("build tree {name}"), |b| b.iter(|| tree_at(&case, hour)));
        let tree = tree_at(&case, hour);
        for (label, opts) in [
            ("energy-only", FormulationOptions::energy_only()),
            ("co-optimized", FormulationOptions::cooptimized(None)),
        ] {
            g.bench_function(format!("solve {label} {name}"), |b| {
                b.iter(|| {
                    let suc = build_suc(&case.model, &tree, &state, &opts).unwrap();
                    solve(&suc.problem, &case.config.solve).unwrap()
                })
            });
        }
    }
    g.finish();
}

criterion_group!(benches, frequency, planning);
criterion_main!(benches);
