use proptest::prelude::*;
use thermoscan_core::analysis::{analyze, AnalysisConfig, Verdict};
use thermoscan_core::pipeline::{segment, PipelineConfig};
use thermoscan_core::thermogram::{generate_synthetic, HotSpot, SyntheticSpec};

fn scene() -> impl Strategy<Value = SyntheticSpec> {
    (1usize..=3, 1usize..=4, 36usize..=56, 24usize..=36, 0.0f64..0.6, any::<u64>(), proptest::bool::ANY).prop_map(
        |(rows, cols, module_width, module_height, noise_std_c, seed, spot)| SyntheticSpec {
            rows,
            cols,
            module_width,
            module_height,
            noise_std_c,
            seed,
            hot_spots: if spot {
                vec![HotSpot {
                    module: (seed % (rows * cols) as u64) as usize,
                    row: module_height as f64 / 2.0,
                    col: module_width as f64 / 2.0,
                    radius: 4.0,
                    delta_c: 10.0,
                }]
            } else {
                Vec::new()
            },
            ..SyntheticSpec::default()
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn segmentation_and_report_are_consistent(spec in scene()) {
        let (t, _) = generate_synthetic(&spec).unwrap();
        let seg = segment(&t, &PipelineConfig::default()).unwrap();
        let (w, h) = (t.width(), t.height());

        // labels are 1..=n, each region lies inside the opened mask, and
        // region metadata agrees with the label map
        prop_assert_eq!(seg.labels.label_count() as usize, seg.regions.len());
        for (i, &l) in seg.labels.data().iter().enumerate() {
            prop_assert!(l as usize <= seg.regions.len());
            if l > 0 {
                prop_assert!(seg.opened.data()[i] != 0);
                prop_assert!(seg.mask.data()[i] != 0);
            }
        }
        let areas = seg.labels.areas();
        for (k, region) in seg.regions.iter().enumerate() {
            prop_assert_eq!(region.label as usize, k + 1);
            prop_assert_eq!(region.pixel_count, areas[k + 1]);
            prop_assert_eq!(region.boundary.first(), region.boundary.last());
            for &(r, c) in &region.boundary {
                prop_assert_eq!(seg.labels.get(r, c), region.label);
            }
            let b = region.bbox;
            let on_edge = b.row0 == 0 || b.col0 == 0 || b.row1 == h - 1 || b.col1 == w - 1;
            prop_assert_eq!(region.touches_border, on_edge);
        }

        let report = analyze(&t, &seg, &AnalysisConfig::default()).unwrap();
        prop_assert_eq!(report.modules.len(), seg.regions.len());
        let mut suspects = Vec::new();
        for m in &report.modules {
            prop_assert_eq!(m.n, seg.region(m.label).unwrap().pixel_count);
            prop_assert_eq!(m.histogram.counts.iter().sum::<u64>() as usize, m.n);
            prop_assert!(m.min_c <= m.mean_c && m.mean_c <= m.max_c);
            for &[r, c] in &m.defect_pixels {
                prop_assert_eq!(seg.labels.get(r, c), m.label);
                prop_assert!(t.temperature().get(r, c) as f64 > m.mean_c + m.std_c - 1e-5);
            }
            prop_assert_eq!(m.blobs.iter().map(|b| b.size).sum::<usize>(), m.defect_pixels.len());
            prop_assert_eq!(m.verdict == Verdict::Suspect, !m.defect_pixels.is_empty());
            if m.verdict == Verdict::Suspect {
                suspects.push(m.label);
            }
        }
        prop_assert_eq!(&report.summary.suspect_labels, &suspects);
        prop_assert_eq!(
            report.summary.defect_pixels,
            report.modules.iter().map(|m| m.defect_pixels.len()).sum::<usize>()
        );
    }
}
