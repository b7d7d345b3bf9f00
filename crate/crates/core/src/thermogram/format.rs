//! TGRM single-file container, little-endian:
//!
//! ```text
//! "TGRM" | version u16 = 1 | header_len u32 | header (UTF-8 JSON)
//!        | width*height f32 temperatures, row-major
//!        | png_len u32 | PNG (8-bit RGB) of the visual image
//! ```
//!
//! The header is `{"width","height","temp_unit":"celsius","meta":{..}}`.
//! The thermogram id travels as `meta["id"]`. Trailing bytes are rejected.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{TemperatureMatrix, Thermogram, ThermogramError, VisualImage, ID_META_KEY};
use crate::pngio;

pub const MAGIC: &[u8; 4] = b"TGRM";
pub const VERSION: u16 = 1;
const PNG_SIGNATURE: &[u8; 8] = b"\x89PNG\r\n\x1a\n";

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    width: u32,
    height: u32,
    temp_unit: String,
    meta: BTreeMap<String, String>,
}

/// Ingestion checks beyond the container layout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoadOptions {
    /// Inclusive plausibility range in °C.
    pub min_c: f32,
    pub max_c: f32,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self {
            min_c: -40.0,
            max_c: 200.0,
        }
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize, field: &'static str) -> Result<&'a [u8], ThermogramError> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or(ThermogramError::Truncated { field, offset: self.pos })?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u16(&mut self, field: &'static str) -> Result<u16, ThermogramError> {
        Ok(u16::from_le_bytes(self.take(2, field)?.try_into().unwrap()))
    }

    fn u32(&mut self, field: &'static str) -> Result<u32, ThermogramError> {
        Ok(u32::from_le_bytes(self.take(4, field)?.try_into().unwrap()))
    }
}

pub fn save_thermogram(t: &Thermogram) -> Result<Vec<u8>, ThermogramError> {
    let mut meta = t.meta.clone();
    meta.insert(ID_META_KEY.to_string(), t.id.clone());
    let header = Header {
        width: t.width() as u32,
        height: t.height() as u32,
        temp_unit: "celsius".into(),
        meta,
    };
    let header = serde_json::to_vec(&header).expect("header serializes");
    let png = pngio::encode_rgb8(t.width(), t.height(), &t.visual.to_rgb8())?;

    let mut out = Vec::with_capacity(14 + header.len() + 4 * t.temperature.data.len() + png.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(header.len() as u32).to_le_bytes());
    out.extend_from_slice(&header);
    for v in &t.temperature.data {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.extend_from_slice(&(png.len() as u32).to_le_bytes());
    out.extend_from_slice(&png);
    Ok(out)
}

pub fn load_thermogram(bytes: &[u8]) -> Result<Thermogram, ThermogramError> {
    load_thermogram_with(bytes, LoadOptions::default())
}

/// Finds the float count `k` for which the bytes after the header parse as
/// `k` floats, a PNG length and exactly that many PNG bytes.
fn infer_cell_count(bytes: &[u8], payload_start: usize) -> Option<usize> {
    let rest = bytes.len().checked_sub(payload_start)?;
    (0..=rest.saturating_sub(4 + PNG_SIGNATURE.len()) / 4).find(|&k| {
        let len_at = payload_start + 4 * k;
        let png_len = u32::from_le_bytes(bytes[len_at..len_at + 4].try_into().unwrap()) as usize;
        len_at + 4 + png_len == bytes.len() && bytes[len_at + 4..].starts_with(PNG_SIGNATURE)
    })
}

pub fn load_thermogram_with(bytes: &[u8], opts: LoadOptions) -> Result<Thermogram, ThermogramError> {
    let mut cur = Cursor { bytes, pos: 0 };
    let magic = cur.take(4, "magic").map_err(|_| ThermogramError::BadMagic {
        found: bytes[..bytes.len().min(4)].to_vec(),
    })?;
    if magic != MAGIC {
        return Err(ThermogramError::BadMagic { found: magic.to_vec() });
    }
    let version = cur.u16("version")?;
    if version != VERSION {
        return Err(ThermogramError::UnsupportedVersion { version });
    }
    let header_len = cur.u32("header length")? as usize;
    let header_at = cur.pos;
    let header_bytes = cur.take(header_len, "header")?;
    let header: Header = serde_json::from_slice(header_bytes).map_err(|e| ThermogramError::BadHeader {
        offset: header_at,
        reason: e.to_string(),
    })?;
    if header.temp_unit != "celsius" {
        return Err(ThermogramError::BadHeader {
            offset: header_at,
            reason: format!("temp_unit must be \"celsius\", got {:?}", header.temp_unit),
        });
    }
    let (w, h) = (header.width as usize, header.height as usize);
    let cells = w
        .checked_mul(h)
        .ok_or_else(|| ThermogramError::BadHeader {
            offset: header_at,
            reason: "width*height overflows".into(),
        })?;

    let payload_start = cur.pos;
    let expected_fits = cells
        .checked_mul(4)
        .and_then(|n| n.checked_add(payload_start + 4))
        .filter(|&end| end <= bytes.len())
        .map(|end| {
            let png_len = u32::from_le_bytes(bytes[end - 4..end].try_into().unwrap()) as usize;
            end + png_len == bytes.len()
        })
        .unwrap_or(false);
    if !expected_fits {
        if let Some(found) = infer_cell_count(bytes, payload_start).filter(|&k| k != cells) {
            return Err(ThermogramError::ShapeMismatch {
                field: "temperature",
                expected: format!("{cells} floats for {w}x{h}"),
                found: format!("{found} floats"),
            });
        }
    }

    let raw = cur.take(4 * cells, "temperature")?;
    let mut temps = Vec::with_capacity(cells);
    for (index, chunk) in raw.chunks_exact(4).enumerate() {
        let value = f32::from_le_bytes(chunk.try_into().unwrap());
        let offset = payload_start + 4 * index;
        if !value.is_finite() {
            return Err(ThermogramError::NonFiniteTemperature { index, offset, value });
        }
        if value < opts.min_c || value > opts.max_c {
            return Err(ThermogramError::OutOfPhysicalRange {
                index,
                offset,
                value,
                min: opts.min_c,
                max: opts.max_c,
            });
        }
        temps.push(value);
    }

    let png_len = cur.u32("png length")? as usize;
    let png_at = cur.pos;
    let png = cur.take(png_len, "png")?;
    if cur.pos != bytes.len() {
        return Err(ThermogramError::TrailingBytes {
            offset: cur.pos,
            count: bytes.len() - cur.pos,
        });
    }
    let decoded = pngio::decode_rgb(png).map_err(|e| ThermogramError::BadVisual {
        offset: png_at,
        reason: e.to_string(),
    })?;
    if (decoded.width, decoded.height) != (w, h) {
        return Err(ThermogramError::ShapeMismatch {
            field: "visual",
            expected: format!("{w}x{h}"),
            found: format!("{}x{}", decoded.width, decoded.height),
        });
    }

    let mut meta = header.meta;
    let id = meta.remove(ID_META_KEY).unwrap_or_else(|| content_id(bytes));
    Thermogram::new(
        id,
        VisualImage::new(w, h, decoded.rgb)?,
        TemperatureMatrix::new(w, h, temps)?,
        meta,
    )
}

/// `tgrm-` plus the first 16 hex digits of the SHA-256 of `bytes`.
pub(crate) fn content_id(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let hex: String = digest.iter().take(8).map(|b| format!("{b:02x}")).collect();
    format!("tgrm-{hex}")
}
