//! Debug dumps of intermediate rasters.

use std::io::Write;

use super::distance::DistanceField;
use super::gray::GrayImage;
use super::histogram::quantize;
use super::labeling::LabelMap;
use super::threshold::BinaryMask;
use crate::pngio::{self, PngError};

pub fn gray_to_png(g: &GrayImage) -> Result<Vec<u8>, PngError> {
    let px: Vec<u8> = g.data().iter().map(|&v| quantize(v)).collect();
    pngio::encode_gray8(g.width(), g.height(), &px)
}

pub fn mask_to_png(b: &BinaryMask) -> Result<Vec<u8>, PngError> {
    let px: Vec<u8> = b.data().iter().map(|&v| v * 255).collect();
    pngio::encode_gray8(b.width(), b.height(), &px)
}

/// Distances scaled so the largest maps to white.
pub fn distance_to_png(d: &DistanceField) -> Result<Vec<u8>, PngError> {
    let max = d.max();
    let px: Vec<u8> = d
        .data()
        .iter()
        .map(|&v| if max > 0.0 { (255.0 * v / max).round() as u8 } else { 0 })
        .collect();
    pngio::encode_gray8(d.width(), d.height(), &px)
}

/// Labels as raw 16-bit values (saturating above 65535).
pub fn labels_to_png16(l: &LabelMap) -> Result<Vec<u8>, PngError> {
    let px: Vec<u16> = l.data().iter().map(|&v| v.min(u16::MAX as u32) as u16).collect();
    pngio::encode_gray16(l.width(), l.height(), &px)
}

/// Labels rendered with a fixed false-colour palette, background black.
pub fn labels_to_color_png(l: &LabelMap) -> Result<Vec<u8>, PngError> {
    let mut px = Vec::with_capacity(l.data().len() * 3);
    for &v in l.data() {
        px.extend_from_slice(&label_color(v));
    }
    pngio::encode_rgb8(l.width(), l.height(), &px)
}

pub fn label_color(label: u32) -> [u8; 3] {
    if label == 0 {
        return [0, 0, 0];
    }
    // golden-ratio hue walk keeps neighbouring labels distinguishable
    let hue = (label as f64 * 0.618_033_988_75).fract() * 6.0;
    let x = 1.0 - (hue % 2.0 - 1.0).abs();
    let (r, g, b) = match hue as u32 {
        0 => (1.0, x, 0.0),
        1 => (x, 1.0, 0.0),
        2 => (0.0, 1.0, x),
        3 => (0.0, x, 1.0),
        4 => (x, 0.0, 1.0),
        _ => (1.0, 0.0, x),
    };
    [(55.0 + 200.0 * r) as u8, (55.0 + 200.0 * g) as u8, (55.0 + 200.0 * b) as u8]
}

/// Binary PGM (P5), 8-bit.
pub fn gray_to_pgm(g: &GrayImage, mut out: impl Write) -> std::io::Result<()> {
    write!(out, "P5\n{} {}\n255\n", g.width(), g.height())?;
    let px: Vec<u8> = g.data().iter().map(|&v| quantize(v)).collect();
    out.write_all(&px)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pgm_header_and_payload() {
        let g = GrayImage::new(2, 1, vec![0.0, 1.0]).unwrap();
        let mut buf = Vec::new();
        gray_to_pgm(&g, &mut buf).unwrap();
        assert_eq!(buf, b"P5\n2 1\n255\n\x00\xff");
    }

    #[test]
    fn label_png_round_trips() {
        let l = LabelMap::new(3, 1, vec![0, 2, 1], 2).unwrap();
        let bytes = labels_to_png16(&l).unwrap();
        assert_eq!(crate::pngio::decode_gray16(&bytes).unwrap().2, vec![0, 2, 1]);
        assert_eq!(label_color(0), [0, 0, 0]);
        assert_ne!(label_color(1), label_color(2));
    }
}
