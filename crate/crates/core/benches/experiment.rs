use criterion::{criterion_group, criterion_main, Criterion};
use owl_core::experiment::{run_experiment, ExperimentConfig};
use owl_core::par::Execution;

const CONFIG: &str = "
n = 40
s = 1, 2
q = 8
replication = 2
eps = 0.05
weights = oscar:1,0.1
trials = 6
seed = 5
";

fn sequential_vs_parallel(c: &mut Criterion) {
    let cfg = ExperimentConfig::parse(CONFIG, "bench").unwrap();
    let mut group = c.benchmark_group("run_experiment");
    group.sample_size(10);
    for (name, exec) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
        group.bench_function(name, |b| b.iter(|| run_experiment(&cfg, exec).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, sequential_vs_parallel);
criterion_main!(benches);
