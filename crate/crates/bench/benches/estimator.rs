use criterion::{criterion_group, criterion_main, BatchSize, Criterion};

use secfusion::cross::{propagate_cross, CrossInput};
use secfusion::fusion::compute_weights;
use secfusion::local::step_local;
use secfusion::simulation::{builtin_ieee4bus, run_monte_carlo, run_scenario, Simulator};
use secfusion::{akf_step, Vector};

fn estimator(c: &mut Criterion) {
    let cfg = builtin_ieee4bus();
    let mut sim = Simulator::new(&cfg, 1).unwrap();
    for _ in 0..10 {
        sim.step().unwrap();
    }
    let aug = [sim.augmented(0, 11).unwrap(), sim.augmented(1, 11).unwrap()];
    let y = Vector::from_element(aug[0].m(), 0.3);
    let last = sim.last.clone().unwrap();

    c.bench_function("local_step", |b| b.iter(|| step_local(&sim.locals[0], &y, &aug[0]).unwrap()));
    c.bench_function("akf_step", |b| b.iter(|| akf_step(&sim.akf[0], &y, &aug[0]).unwrap()));
    c.bench_function("cross_step", |b| {
        let pair = &sim.cross[0];
        b.iter(|| {
            propagate_cross(
                &pair.fwd,
                &pair.rev,
                CrossInput { gains: &last[0].gains, aug: &aug[0] },
                CrossInput { gains: &last[1].gains, aug: &aug[1] },
            )
        })
    });
    c.bench_function("fusion_weights", |b| b.iter(|| compute_weights(&sim.weights.sigma, sim.n()).unwrap()));
    c.bench_function("simulator_step", |b| {
        b.iter_batched(|| sim.clone(), |mut s| s.step().unwrap(), BatchSize::SmallInput)
    });
}

fn scenario(c: &mut Criterion) {
    let mut g = c.benchmark_group("scenario");
    g.sample_size(10);
    let cfg = builtin_ieee4bus();
    g.bench_function("single_run", |b| b.iter(|| run_scenario(&cfg, 1).unwrap()));
    let mut mc = cfg.clone();
    mc.runs = 100;
    g.bench_function("monte_carlo_100", |b| b.iter(|| run_monte_carlo(&mc).unwrap()));
    g.finish();
}

criterion_group!(benches, estimator, scenario);
criterion_main!(benches);
