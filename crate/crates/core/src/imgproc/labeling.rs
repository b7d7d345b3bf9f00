//! Connected-component labelling (two-pass, union-find).

use serde::{Deserialize, Serialize};

use super::threshold::BinaryMask;
use super::{check_len, ImgprocError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Connectivity {
    Four,
    Eight,
}

impl TryFrom<u8> for Connectivity {
    type Error = String;

    fn try_from(v: u8) -> Result<Self, Self::Error> {
        match v {
            4 => Ok(Self::Four),
            8 => Ok(Self::Eight),
            other => Err(format!("connectivity must be 4 or 8, got {other}")),
        }
    }
}

impl From<Connectivity> for u8 {
    fn from(c: Connectivity) -> u8 {
        match c {
            Connectivity::Four => 4,
            Connectivity::Eight => 8,
        }
    }
}

impl Connectivity {
    pub fn offsets(self) -> &'static [(isize, isize)] {
        match self {
            Connectivity::Four => &super::NEIGHBORS_4,
            Connectivity::Eight => &super::NEIGHBORS_8,
        }
    }
}

/// Integer label raster; 0 is background.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMap {
    width: usize,
    height: usize,
    data: Vec<u32>,
    label_count: u32,
}

impl LabelMap {
    pub fn new(width: usize, height: usize, data: Vec<u32>, label_count: u32) -> Result<Self, ImgprocError> {
        check_len(width, height, data.len())?;
        if let Some((index, &v)) = data.iter().enumerate().find(|(_, &v)| v > label_count) {
            return Err(ImgprocError::OutOfRange {
                index,
                value: v as f64,
            });
        }
        Ok(Self {
            width,
            height,
            data,
            label_count,
        })
    }

    /// Like [`LabelMap::new`] but with `label_count` taken as the largest label.
    pub fn from_labels(width: usize, height: usize, data: Vec<u32>) -> Result<Self, ImgprocError> {
        let label_count = data.iter().copied().max().unwrap_or(0);
        Self::new(width, height, data, label_count)
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![0; width * height],
            label_count: 0,
        }
    }

    pub(crate) fn from_raw(width: usize, height: usize, data: Vec<u32>, label_count: u32) -> Self {
        debug_assert_eq!(data.len(), width * height);
        debug_assert!(data.iter().all(|&v| v <= label_count));
        Self {
            width,
            height,
            data,
            label_count,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u32] {
        &self.data
    }

    pub fn label_count(&self) -> u32 {
        self.label_count
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u32 {
        self.data[row * self.width + col]
    }

    /// Pixel counts per label, index 0 = background.
    pub fn areas(&self) -> Vec<usize> {
        let mut areas = vec![0usize; self.label_count as usize + 1];
        for &l in &self.data {
            areas[l as usize] += 1;
        }
        areas
    }

    /// Mask of pixels carrying `label`.
    pub fn mask_of(&self, label: u32) -> BinaryMask {
        BinaryMask::from_raw(
            self.width,
            self.height,
            self.data.iter().map(|&l| (l == label) as u8).collect(),
        )
    }

    /// Mask of all positive labels.
    pub fn foreground(&self) -> BinaryMask {
        BinaryMask::from_raw(
            self.width,
            self.height,
            self.data.iter().map(|&l| (l > 0) as u8).collect(),
        )
    }
}

struct DisjointSet {
    parent: Vec<u32>,
}

impl DisjointSet {
    fn new() -> Self {
        // slot 0 unused so provisional labels start at 1
        Self { parent: vec![0] }
    }

    fn make(&mut self) -> u32 {
        let id = self.parent.len() as u32;
        self.parent.push(id);
        id
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let p = self.parent[x as usize];
            self.parent[x as usize] = self.parent[p as usize];
            x = p;
        }
        x
    }

    /// Union keeping the smaller root, so every root is the first provisional
    /// label of its set.
    fn union(&mut self, a: u32, b: u32) -> u32 {
        let (ra, rb) = (self.find(a), self.find(b));
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi as usize] = lo;
        lo
    }
}

/// Labels maximal connected foreground regions 1..=n in raster order of each
/// region's first pixel.
pub fn connected_components(b: &BinaryMask, connectivity: Connectivity) -> LabelMap {
    let (w, h) = (b.width(), b.height());
    let mut prov = vec![0u32; w * h];
    let mut sets = DisjointSet::new();
    // already-visited neighbours in raster order
    let back: &[(isize, isize)] = match connectivity {
        Connectivity::Four => &[(0, -1), (-1, 0)],
        Connectivity::Eight => &[(0, -1), (-1, -1), (-1, 0), (-1, 1)],
    };

    for r in 0..h {
        for c in 0..w {
            if !b.get(r, c) {
                continue;
            }
            let mut label = 0u32;
            for &(dr, dc) in back {
                let Some((rr, cc)) = super::offset(r, c, dr, dc, w, h) else {
                    continue;
                };
                let n = prov[rr * w + cc];
                if n == 0 {
                    continue;
                }
                label = if label == 0 { sets.find(n) } else { sets.union(label, n) };
            }
            prov[r * w + c] = if label == 0 { sets.make() } else { label };
        }
    }

    let mut remap = vec![0u32; sets.parent.len()];
    let mut next = 0u32;
    for id in 1..sets.parent.len() as u32 {
        if sets.find(id) == id {
            next += 1;
            remap[id as usize] = next;
        }
    }
    let data = prov
        .into_iter()
        .map(|p| if p == 0 { 0 } else { remap[sets.find(p) as usize] })
        .collect();
    LabelMap::from_raw(w, h, data, next)
}
