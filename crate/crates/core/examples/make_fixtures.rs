//! Regenerates `tests/fixtures/*.tgrm`.
//!
//! ```text
//! cargo run -p thermoscan-core --example make_fixtures
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use thermoscan_core::thermogram::{generate_synthetic, Crop, HotSpot, SyntheticSpec, TemperatureMatrix, VisualImage};
use thermoscan_core::{save_thermogram, Thermogram};

fn tiny() -> Thermogram {
    let temps = vec![20.0, 21.5, 36.6, -3.25, 0.0, 99.875];
    let visual: Vec<f32> = (0..18).map(|i| i as f32 / 17.0).collect();
    let meta = BTreeMap::from([("camera".to_string(), "fixture".to_string())]);
    Thermogram::new(
        "tiny-3x2",
        VisualImage::new(3, 2, visual).unwrap(),
        TemperatureMatrix::new(3, 2, temps).unwrap(),
        meta,
    )
    .unwrap()
}

fn grid() -> Thermogram {
    let spec = SyntheticSpec {
        noise_std_c: 0.3,
        seed: 2024,
        hot_spots: vec![HotSpot {
            module: 4,
            row: 12.0,
            col: 30.0,
            radius: 5.0,
            delta_c: 10.0,
        }],
        ..SyntheticSpec::default()
    };
    generate_synthetic(&spec).unwrap().0.with_id("grid-2x3")
}

fn partial() -> Thermogram {
    let spec = SyntheticSpec {
        rows: 2,
        cols: 2,
        noise_std_c: 0.5,
        seed: 7,
        crop: Some(Crop {
            row: 20,
            col: 30,
            width: 80,
            height: 60,
        }),
        ..SyntheticSpec::default()
    };
    generate_synthetic(&spec).unwrap().0.with_id("partial-crop")
}

fn main() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    fs::create_dir_all(&dir).unwrap();
    let write = |name: &str, bytes: &[u8]| fs::write(dir.join(name), bytes).unwrap();

    let tiny = save_thermogram(&tiny()).unwrap();
    write("tiny_3x2.tgrm", &tiny);
    write("grid_2x3.tgrm", &save_thermogram(&grid()).unwrap());
    write("partial_crop.tgrm", &save_thermogram(&partial()).unwrap());

    let header_len = u32::from_le_bytes(tiny[6..10].try_into().unwrap()) as usize;
    let temps_at = 10 + header_len;

    let mut bad = tiny.clone();
    bad[..4].copy_from_slice(b"TGRX");
    write("bad_magic.tgrm", &bad);

    let mut bad = tiny.clone();
    bad[4..6].copy_from_slice(&2u16.to_le_bytes());
    write("bad_version.tgrm", &bad);

    write("truncated.tgrm", &tiny[..tiny.len() - 10]);

    let mut bad = tiny.clone();
    bad.extend_from_slice(b"junk");
    write("trailing_bytes.tgrm", &bad);

    // one temperature too few: header says 3x2, payload holds 5 floats
    let mut bad = tiny[..temps_at + 20].to_vec();
    bad.extend_from_slice(&tiny[temps_at + 24..]);
    write("shape_mismatch.tgrm", &bad);

    let mut bad = tiny.clone();
    bad[temps_at + 8..temps_at + 12].copy_from_slice(&f32::NAN.to_le_bytes());
    write("non_finite.tgrm", &bad);

    // cell 2 (36.6) written big-endian
    let mut bad = tiny.clone();
    bad[temps_at + 8..temps_at + 12].copy_from_slice(&36.6f32.to_be_bytes());
    write("byte_swapped.tgrm", &bad);

    println!("fixtures written to {}", dir.display());
}
