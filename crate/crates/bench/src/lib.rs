//! Inputs shared by the benchmarks.

use thermoscan_core::thermogram::{generate_synthetic, HotSpot, SyntheticSpec};
use thermoscan_core::Thermogram;

/// Noisy `rows x cols` module grid with one hot spot.
pub fn scene(rows: usize, cols: usize) -> Thermogram {
    let spec = SyntheticSpec {
        rows,
        cols,
        noise_std_c: 0.3,
        seed: 42,
        hot_spots: vec![HotSpot {
            module: 0,
            row: 14.0,
            col: 20.0,
            radius: 5.0,
            delta_c: 10.0,
        }],
        ..SyntheticSpec::default()
    };
    generate_synthetic(&spec).expect("valid bench spec").0
}
