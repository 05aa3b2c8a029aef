use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use num_complex::Complex64;

use selberg_core::cache::{ClassTableSet, LengthCache};
use selberg_core::schottky::SchottkyGroup;
use selberg_core::words::ClassTableConfig;
use selberg_core::zeros::{Rect, SamplingConfig, ZeroCounter};
use selberg_core::zeta::ZetaFunction;
use selberg_core::Execution;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn zeta() -> ZetaFunction {
    let g = SchottkyGroup::three_funnel(12.0, 13.0, 14.0).unwrap();
    let tables = ClassTableSet::build(2, 10, &ClassTableConfig::default()).unwrap();
    ZetaFunction::new(&LengthCache::build(&g, &tables).unwrap())
}

fn class_tables(c: &mut Criterion) {
    let mut group = c.benchmark_group("class_tables_n9");
    group.sample_size(10);
    for (name, exec) in MODES {
        let config = ClassTableConfig {
            exec,
            ..ClassTableConfig::default()
        };
        group.bench_function(name, |b| b.iter(|| ClassTableSet::build(2, 9, &config).unwrap()));
    }
    group.finish();
}

fn point_evaluation(c: &mut Criterion) {
    let z = zeta();
    let points: Vec<Complex64> = (0..512).map(|k| Complex64::new(0.05, 0.4 * k as f64)).collect();
    let mut group = c.benchmark_group("eval_512_points");
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &points, |b, p| b.iter(|| z.eval_many(p, exec)));
    }
    group.finish();
}

fn bin_counting(c: &mut Criterion) {
    let z = zeta();
    let rect = Rect::new(0.0, 0.1068, 0.5, 60.0).unwrap();
    let mut group = c.benchmark_group("bin_grid_8x64");
    group.sample_size(10);
    for (name, exec) in MODES {
        let cfg = SamplingConfig {
            exec,
            ..SamplingConfig::default()
        };
        let counter = ZeroCounter::new(&z, cfg);
        group.bench_function(name, |b| b.iter(|| counter.bin_count_grid(&rect, 8, 64).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, class_tables, point_evaluation, bin_counting);
criterion_main!(benches);
