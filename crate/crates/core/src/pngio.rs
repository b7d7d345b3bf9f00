//! Minimal PNG encode/decode helpers over the `png` crate.
//!
//! Encoding settings are fixed so the same pixels always produce the same
//! bytes.

use std::io::Cursor;

use png::{BitDepth, ColorType, Compression, Transformations};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PngError {
    #[error("png encode: {0}")]
    Encode(#[from] png::EncodingError),
    #[error("png decode: {0}")]
    Decode(#[from] png::DecodingError),
    #[error("unsupported png layout: {0}")]
    Unsupported(String),
}

fn encode(width: usize, height: usize, color: ColorType, depth: BitDepth, data: &[u8]) -> Result<Vec<u8>, PngError> {
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, width as u32, height as u32);
        enc.set_color(color);
        enc.set_depth(depth);
        enc.set_compression(Compression::Balanced);
        let mut writer = enc.write_header()?;
        writer.write_image_data(data)?;
        writer.finish()?;
    }
    Ok(out)
}

pub fn encode_rgb8(width: usize, height: usize, rgb: &[u8]) -> Result<Vec<u8>, PngError> {
    encode(width, height, ColorType::Rgb, BitDepth::Eight, rgb)
}

pub fn encode_gray8(width: usize, height: usize, gray: &[u8]) -> Result<Vec<u8>, PngError> {
    encode(width, height, ColorType::Grayscale, BitDepth::Eight, gray)
}

pub fn encode_gray16(width: usize, height: usize, gray: &[u16]) -> Result<Vec<u8>, PngError> {
    let bytes: Vec<u8> = gray.iter().flat_map(|v| v.to_be_bytes()).collect();
    encode(width, height, ColorType::Grayscale, BitDepth::Sixteen, &bytes)
}

/// Decoded image as interleaved RGB in `[0, 1]`, whatever the source layout
/// (gray, gray+alpha, RGB, RGBA, palette; 1 to 16 bits).
pub struct DecodedRgb {
    pub width: usize,
    pub height: usize,
    pub rgb: Vec<f32>,
}

pub fn decode_rgb(bytes: &[u8]) -> Result<DecodedRgb, PngError> {
    let mut dec = png::Decoder::new(Cursor::new(bytes));
    dec.set_transformations(Transformations::EXPAND);
    let mut reader = dec.read_info()?;
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| PngError::Unsupported("image too large".into()))?;
    let mut buf = vec![0u8; size];
    let info = reader.next_frame(&mut buf)?;
    let (w, h) = (info.width as usize, info.height as usize);
    let samples: Vec<f32> = match info.bit_depth {
        BitDepth::Sixteen => buf[..info.buffer_size()]
            .chunks_exact(2)
            .map(|b| u16::from_be_bytes([b[0], b[1]]) as f32 / 65535.0)
            .collect(),
        BitDepth::Eight => buf[..info.buffer_size()].iter().map(|&b| b as f32 / 255.0).collect(),
        other => return Err(PngError::Unsupported(format!("bit depth {other:?} after expansion"))),
    };
    let channels = match info.color_type {
        ColorType::Grayscale => 1,
        ColorType::GrayscaleAlpha => 2,
        ColorType::Rgb => 3,
        ColorType::Rgba => 4,
        other => return Err(PngError::Unsupported(format!("color type {other:?}"))),
    };
    let stride = samples.len() / h.max(1);
    let mut rgb = Vec::with_capacity(w * h * 3);
    for r in 0..h {
        let row = &samples[r * stride..r * stride + w * channels];
        for px in row.chunks_exact(channels) {
            match channels {
                1 | 2 => rgb.extend_from_slice(&[px[0]; 3]),
                _ => rgb.extend_from_slice(&px[..3]),
            }
        }
    }
    Ok(DecodedRgb { width: w, height: h, rgb })
}

/// Decodes a 16-bit grayscale PNG (label maps).
pub fn decode_gray16(bytes: &[u8]) -> Result<(usize, usize, Vec<u16>), PngError> {
    let dec = png::Decoder::new(Cursor::new(bytes));
    let mut reader = dec.read_info()?;
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| PngError::Unsupported("image too large".into()))?;
    let mut buf = vec![0u8; size];
    let info = reader.next_frame(&mut buf)?;
    if info.color_type != ColorType::Grayscale || info.bit_depth != BitDepth::Sixteen {
        return Err(PngError::Unsupported(format!(
            "expected 16-bit grayscale, got {:?} {:?}",
            info.color_type, info.bit_depth
        )));
    }
    let data = buf[..info.buffer_size()]
        .chunks_exact(2)
        .map(|b| u16::from_be_bytes([b[0], b[1]]))
        .collect();
    Ok((info.width as usize, info.height as usize, data))
}
