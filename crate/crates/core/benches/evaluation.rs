use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use swarmbench::design::{random_controller, DesignMethod, Evaluator};
use swarmbench::episode::ControlSoftware;
use swarmbench::missions::{MissionId, MissionSpec};
use swarmbench::par;
use swarmbench::reference::PlatformSpec;
use swarmbench::rng::stream;
use swarmbench::sim::SimConfig;

fn batch() -> (Evaluator, Vec<(ControlSoftware, u64)>) {
    let eval = Evaluator::new(MissionSpec::new(MissionId::Aggregation), PlatformSpec::epuck(), SimConfig::default());
    let mut rng = stream(1, &[]);
    let jobs = (0..16)
        .map(|i| {
            let method = if i % 2 == 0 { DesignMethod::Fsm } else { DesignMethod::Ann };
            (random_controller(method, &mut rng), i as u64)
        })
        .collect();
    (eval, jobs)
}

fn single_episode(c: &mut Criterion) {
    let (eval, jobs) = batch();
    c.bench_function("episode/aggregation-120s", |b| {
        b.iter(|| eval.evaluate(black_box(&jobs[0].0), 7).unwrap())
    });
}

fn batch_evaluation(c: &mut Criterion) {
    let (eval, jobs) = batch();
    let mut group = c.benchmark_group("batch-16-episodes");
    group.sample_size(10);
    group.bench_function("sequential", |b| {
        b.iter(|| par::map_sequential(&jobs, |(ctrl, seed)| eval.evaluate(ctrl, *seed).unwrap()))
    });
    #[cfg(feature = "parallel")]
    group.bench_function("parallel", |b| {
        b.iter(|| par::map_parallel(&jobs, |(ctrl, seed)| eval.evaluate(ctrl, *seed).unwrap()))
    });
    group.finish();
}

criterion_group!(benches, single_episode, batch_evaluation);
criterion_main!(benches);
