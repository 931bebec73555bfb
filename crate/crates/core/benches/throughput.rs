use std::hint::black_box;
use std::time::Duration;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use frameless_mud::oracle::exact_per_with;
use frameless_mud::simulator::simulate_with;
use frameless_mud::{peak_throughput, Execution, SystemParams};

const POLICIES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn simulation(c: &mut Criterion) {
    let params = SystemParams::new(100, 58, 2, 3.7).unwrap();
    let mut group = c.benchmark_group("simulate n=100 m=58 k=2 runs=2000");
    for (name, exec) in POLICIES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| simulate_with(black_box(&params), 2000, 7, exec).unwrap())
        });
    }
    group.finish();
}

fn slot_sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("peak over m n=50 k=2 m=25..=37");
    group.sample_size(10).measurement_time(Duration::from_secs(10));
    for (name, exec) in POLICIES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| peak_throughput(50, 2, black_box(3.56), 25..=37, 1e-15, exec).unwrap())
        });
    }
    group.finish();
}

fn oracle(c: &mut Criterion) {
    let params = SystemParams::new(4, 5, 2, 2.0).unwrap();
    let mut group = c.benchmark_group("oracle n=4 m=5 k=2");
    group.sample_size(10);
    for (name, exec) in POLICIES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| exact_per_with(black_box(&params), exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, simulation, slot_sweep, oracle);
criterion_main!(benches);
