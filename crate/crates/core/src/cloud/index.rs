use rustc_hash::FxHashMap;

use super::{dist2, LabelledCloud};
use crate::error::{Error, Result};

type CellKey = [i64; 3];

/// A match returned by a radius query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbour {
    /// Index of the point in the source cloud.
    pub index: usize,
    pub distance: f64,
}

/// Immutable uniform hash grid over a cloud, answering fixed-radius queries.
///
/// Points are bucketed by `floor(coord / cell_size)` and stored contiguously
/// per cell. A coarse occupancy bitmap (each bit covers a block of cells,
/// dilated by two cells) lets queries through empty space return without
/// touching the hash map, which is what most samples along a beam do.
pub struct SpatialIndex<'a> {
    cloud: &'a LabelledCloud,
    cell_size: f64,
    cells: FxHashMap<CellKey, (u32, u32)>,
    order: Vec<u32>,
    coords: Vec<[f64; 3]>,
    occupancy: Occupancy,
}

struct Occupancy {
    block: i64,
    origin: CellKey,
    dims: [i64; 3],
    bits: Vec<u64>,
}

impl Occupancy {
    const DILATION: i64 = 2;
    const MAX_BITS: i64 = 1 << 28;

    fn build(occupied: impl Iterator<Item = CellKey> + Clone) -> Self {
        let mut lo = [i64::MAX; 3];
        let mut hi = [i64::MIN; 3];
        for key in occupied.clone() {
            for k in 0..3 {
                lo[k] = lo[k].min(key[k] - Self::DILATION);
                hi[k] = hi[k].max(key[k] + Self::DILATION);
            }
        }
        let mut block = 8;
        let (origin, dims) = loop {
            let origin = [0, 1, 2].map(|k| lo[k].div_euclid(block));
            let dims = [0, 1, 2].map(|k| hi[k].div_euclid(block) - origin[k] + 1);
            let total = dims.iter().try_fold(1i64, |acc, &d| acc.checked_mul(d));
            match total {
                Some(t) if t <= Self::MAX_BITS => break (origin, dims),
                _ => block *= 2,
            }
        };
        let n = (dims[0] * dims[1] * dims[2]) as usize;
        let mut occ = Occupancy {
            block,
            origin,
            dims,
            bits: vec![0; n.div_ceil(64)],
        };
        for key in occupied {
            let b_lo = key.map(|c| (c - Self::DILATION).div_euclid(block));
            let b_hi = key.map(|c| (c + Self::DILATION).div_euclid(block));
            for bx in b_lo[0]..=b_hi[0] {
                for by in b_lo[1]..=b_hi[1] {
                    for bz in b_lo[2]..=b_hi[2] {
                        if let Some(i) = occ.slot([bx, by, bz]) {
                            occ.bits[i / 64] |= 1 << (i % 64);
                        }
                    }
                }
            }
        }
        occ
    }

    #[inline]
    fn slot(&self, b: CellKey) -> Option<usize> {
        let mut idx = 0i64;
        for k in 0..3 {
            let o = b[k] - self.origin[k];
            if o < 0 || o >= self.dims[k] {
                return None;
            }
            idx = idx * self.dims[k] + o;
        }
        Some(idx as usize)
    }

    #[inline]
    fn contains_cell(&self, cell: CellKey) -> bool {
        match self.slot(cell.map(|c| c.div_euclid(self.block))) {
            Some(i) => self.bits[i / 64] & (1 << (i % 64)) != 0,
            None => false,
        }
    }
}

impl<'a> SpatialIndex<'a> {
    /// Index every point of `cloud`. The best `cell_size` is the search
    /// radius of the queries that will be run against the index.
    pub fn build(cloud: &'a LabelledCloud, cell_size: f64) -> Result<Self> {
        if cloud.is_empty() {
            return Err(Error::EmptyCloud);
        }
        if !(cell_size > 0.0 && cell_size.is_finite()) {
            return Err(Error::config(format!("cell size must be positive, got {cell_size}")));
        }
        cloud.validate()?;
        if cloud.len() > u32::MAX as usize {
            return Err(Error::config("cloud too large to index"));
        }

        let mut keyed: Vec<(CellKey, u32)> = cloud
            .points
            .iter()
            .enumerate()
            .map(|(i, p)| (cell_of(p.xyz(), cell_size), i as u32))
            .collect();
        keyed.sort_unstable();

        let mut cells = FxHashMap::default();
        let mut order = Vec::with_capacity(keyed.len());
        let mut coords = Vec::with_capacity(keyed.len());
        let mut start = 0usize;
        while start < keyed.len() {
            let key = keyed[start].0;
            let mut end = start;
            while end < keyed.len() && keyed[end].0 == key {
                let idx = keyed[end].1;
                order.push(idx);
                coords.push(cloud.points[idx as usize].xyz());
                end += 1;
            }
            cells.insert(key, (start as u32, (end - start) as u32));
            start = end;
        }
        let occupancy = Occupancy::build(cells.keys().copied());

        Ok(Self {
            cloud,
            cell_size,
            cells,
            order,
            coords,
            occupancy,
        })
    }

    pub fn cloud(&self) -> &'a LabelledCloud {
        self.cloud
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Number of non-empty grid cells.
    pub fn occupied_cells(&self) -> usize {
        self.cells.len()
    }

    /// The closest point within `r` of `query`, ties going to the lowest
    /// source index.
    pub fn nearest_within(&self, query: [f64; 3], r: f64) -> Option<Neighbour> {
        let r2 = r * r;
        let mut best: Option<(f64, u32)> = None;
        self.visit(query, r, |d2, idx| {
            if d2 <= r2 {
                let better = match best {
                    None => true,
                    Some((bd, bi)) => d2 < bd || (d2 == bd && idx < bi),
                };
                if better {
                    best = Some((d2, idx));
                }
            }
        });
        best.map(|(d2, idx)| Neighbour {
            index: idx as usize,
            distance: d2.sqrt(),
        })
    }

    /// Every point within `r` of `query`, sorted by (distance, index).
    pub fn all_within(&self, query: [f64; 3], r: f64) -> Vec<Neighbour> {
        let r2 = r * r;
        let mut hits: Vec<(f64, u32)> = Vec::new();
        self.visit(query, r, |d2, idx| {
            if d2 <= r2 {
                hits.push((d2, idx));
            }
        });
        hits.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        hits.into_iter()
            .map(|(d2, idx)| Neighbour {
                index: idx as usize,
                distance: d2.sqrt(),
            })
            .collect()
    }

    /// True when some point lies within `r` of `query`.
    pub fn any_within(&self, query: [f64; 3], r: f64) -> bool {
        let r2 = r * r;
        let mut found = false;
        self.visit(query, r, |d2, _| found |= d2 <= r2);
        found
    }

    #[inline]
    fn visit(&self, q: [f64; 3], r: f64, mut f: impl FnMut(f64, u32)) {
        if !(r > 0.0) {
            return;
        }
        if r <= self.cell_size && !self.occupancy.contains_cell(cell_of(q, self.cell_size)) {
            return;
        }
        let lo = [0, 1, 2].map(|k| lower_cell(q[k] - r, self.cell_size));
        let hi = [0, 1, 2].map(|k| upper_cell(q[k] + r, self.cell_size));
        let span: f64 = (0..3).map(|k| hi[k] as f64 - lo[k] as f64 + 1.0).product();
        if span > self.cells.len() as f64 {
            // a huge radius: cheaper to walk the occupied cells
            for (key, &(start, len)) in &self.cells {
                if (0..3).all(|k| (lo[k]..=hi[k]).contains(&key[k])) {
                    let (s, e) = (start as usize, (start + len) as usize);
                    for (c, &idx) in self.coords[s..e].iter().zip(&self.order[s..e]) {
                        f(dist2(*c, q), idx);
                    }
                }
            }
            return;
        }
        for cx in lo[0]..=hi[0] {
            for cy in lo[1]..=hi[1] {
                for cz in lo[2]..=hi[2] {
                    if let Some(&(start, len)) = self.cells.get(&[cx, cy, cz]) {
                        let (s, e) = (start as usize, (start + len) as usize);
                        for (c, &idx) in self.coords[s..e].iter().zip(&self.order[s..e]) {
                            f(dist2(*c, q), idx);
                        }
                    }
                }
            }
        }
    }
}

#[inline]
fn cell_of(p: [f64; 3], cell: f64) -> CellKey {
    p.map(|v| (v / cell).floor() as i64)
}

// Range bounds get one cell of slack when the boundary coordinate sits
// within rounding distance of a cell wall.
#[inline]
fn lower_cell(v: f64, cell: f64) -> i64 {
    let a = v / cell;
    let f = a.floor();
    if a - f < 1e-9 {
        f as i64 - 1
    } else {
        f as i64
    }
}

#[inline]
fn upper_cell(v: f64, cell: f64) -> i64 {
    let b = v / cell;
    let f = b.floor();
    if f + 1.0 - b < 1e-9 {
        f as i64 + 1
    } else {
        f as i64
    }
}
