//! Desk-scale calibration of the hot-spot detector on synthetic arrays.
//!
//! Prints markdown tables:
//! - pixel precision / recall of `mean + std` detection against the
//!   generator's half-maximum defect mask, by hot-spot radius;
//! - the largest noise-only defect blob per module, which bounds a
//!   `min_blob_size` that keeps defect-free modules healthy.
//!
//! `cargo run --release -p thermoscan-core --example calibrate`

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thermoscan_core::analysis::{analyze, AnalysisConfig};
use thermoscan_core::pipeline::{segment, PipelineConfig};
use thermoscan_core::thermogram::{generate_synthetic, HotSpot, SyntheticSpec};

const RUNS: u64 = 50;

fn percentile(sorted: &[usize], p: usize) -> usize {
    sorted[(sorted.len() - 1) * p / 100]
}

fn main() {
    let cfg = PipelineConfig::default();
    let analysis = AnalysisConfig::default();

    println!("## Pixel precision / recall, delta_t = 10 C, noise 0.3 C, 48x32 modules\n");
    println!("| radius | recall min | recall mean | precision min | precision mean | smallest spot blob |");
    println!("|---|---|---|---|---|---|");
    for radius in [2.0, 3.0, 4.0, 5.0, 6.0, 7.0] {
        let (mut recalls, mut precisions, mut blobs) = (Vec::new(), Vec::new(), Vec::new());
        for seed in 0..RUNS {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (rows, cols) = (rng.random_range(1..=4), rng.random_range(1..=6));
            let module = rng.random_range(0..rows * cols);
            let spot = HotSpot {
                module,
                row: rng.random_range(8.0..24.0),
                col: rng.random_range(8.0..40.0),
                radius,
                delta_c: 10.0,
            };
            let spec = SyntheticSpec {
                rows,
                cols,
                noise_std_c: 0.3,
                seed,
                hot_spots: vec![spot.clone()],
                ..SyntheticSpec::default()
            };
            let (t, truth) = generate_synthetic(&spec).unwrap();
            let seg = segment(&t, &cfg).unwrap();
            let report = analyze(&t, &seg, &analysis).unwrap();
            let rect = spec.module_rect(module);
            let label = seg.labels.get(rect.row0 + spot.row as usize, rect.col0 + spot.col as usize);
            let Some(m) = report.module(label) else {
                recalls.push(0.0);
                continue;
            };
            let hits = m.defect_pixels.iter().filter(|p| truth.defects.get(p[0], p[1])).count();
            recalls.push(hits as f64 / truth.defects.count_ones() as f64);
            precisions.push(hits as f64 / m.defect_pixels.len().max(1) as f64);
            blobs.push(m.blobs.iter().map(|b| b.size).max().unwrap_or(0));
        }
        let min = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        println!(
            "| {radius} | {:.3} | {:.3} | {:.3} | {:.3} | {} |",
            min(&recalls),
            mean(&recalls),
            min(&precisions),
            mean(&precisions),
            blobs.iter().min().unwrap()
        );
    }

    println!("\n## Largest noise-only blob per module, delta_t = 0\n");
    println!("| noise C | modules | median | p95 | p99 | max |");
    println!("|---|---|---|---|---|---|");
    for noise in [0.1, 0.3, 0.5] {
        let mut largest = Vec::new();
        for seed in 0..RUNS {
            let mut rng = ChaCha8Rng::seed_from_u64(10_000 + seed);
            let spec = SyntheticSpec {
                rows: rng.random_range(1..=4),
                cols: rng.random_range(1..=6),
                noise_std_c: noise,
                seed: 10_000 + seed,
                ..SyntheticSpec::default()
            };
            let (t, _) = generate_synthetic(&spec).unwrap();
            let seg = segment(&t, &cfg).unwrap();
            let report = analyze(&t, &seg, &analysis).unwrap();
            largest.extend(report.modules.iter().map(|m| m.blobs.iter().map(|b| b.size).max().unwrap_or(0)));
        }
        largest.sort_unstable();
        println!(
            "| {noise} | {} | {} | {} | {} | {} |",
            largest.len(),
            percentile(&largest, 50),
            percentile(&largest, 95),
            percentile(&largest, 99),
            largest.last().unwrap()
        );
    }
}
