use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;
use thermoscan_bench::scene;
use thermoscan_core::analysis::{analyze, AnalysisConfig};
use thermoscan_core::pipeline::{segment, PipelineConfig};
use thermoscan_core::{load_thermogram, save_thermogram};

fn pipeline(c: &mut Criterion) {
    let cfg = PipelineConfig::default();
    let acfg = AnalysisConfig::default();
    let mut g = c.benchmark_group("pipeline");
    g.sample_size(20);
    for (rows, cols) in [(1, 1), (2, 3), (4, 6)] {
        let t = scene(rows, cols);
        let id = format!("{rows}x{cols}");
        g.bench_with_input(BenchmarkId::new("segment", &id), &t, |b, t| {
            b.iter(|| segment(black_box(t), &cfg).unwrap())
        });
        let seg = segment(&t, &cfg).unwrap();
        g.bench_with_input(BenchmarkId::new("analyze", &id), &t, |b, t| {
            b.iter(|| analyze(black_box(t), &seg, &acfg).unwrap())
        });
        let bytes = save_thermogram(&t).unwrap();
        g.bench_with_input(BenchmarkId::new("load_tgrm", &id), &bytes, |b, bytes| {
            b.iter(|| load_thermogram(black_box(bytes)).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, pipeline);
criterion_main!(benches);
