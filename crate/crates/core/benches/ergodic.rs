use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mimodist::channel::ScenarioConfig;
use mimodist::combining::CombinerKind;
use mimodist::hardware::DistortionMode;
use mimodist::parallel::Execution;
use mimodist::se::{distortion_moments_mc, ergodic_se_with};

fn bench_ergodic(c: &mut Criterion) {
    let mut group = c.benchmark_group("ergodic_se");
    group.sample_size(10);
    for (m, k) in [(32, 4), (200, 10)] {
        let cfg = ScenarioConfig {
            m,
            k,
            trials: 64,
            combiner: CombinerKind::DaMmse,
            distortion_mode: DistortionMode::Full,
            ..Default::default()
        };
        for (name, exec) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
            group.bench_with_input(BenchmarkId::new(name, format!("M{m}_K{k}")), &cfg, |b, cfg| {
                b.iter(|| ergodic_se_with(cfg, exec).unwrap())
            });
        }
    }
    group.finish();
}

fn bench_moments(c: &mut Criterion) {
    let mut group = c.benchmark_group("distortion_moments_mc");
    group.sample_size(10);
    let cfg = ScenarioConfig {
        m: 64,
        k: 5,
        ..Default::default()
    };
    for (name, exec) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
        group.bench_function(name, |b| b.iter(|| distortion_moments_mc(&cfg, 256, 0, exec).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, bench_ergodic, bench_moments);
criterion_main!(benches);
