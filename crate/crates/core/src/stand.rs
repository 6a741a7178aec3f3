//! Orchard and forest layouts, and assembly of the combined stand cloud.

use std::collections::BTreeMap;
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cloud::{LabelledCloud, Provenance};
use crate::error::{Error, Result};
use crate::rng;
use crate::treegen::{generate_tree, TreeDefinition};

const YAW_STREAM: u64 = 0x7961_77;
const SEED_STREAM: u64 = 0x5EED_5;
const DART_STREAM: u64 = 0xDA27;

/// Axis-aligned rectangle on the ground plane, metres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extent {
    pub min_x: f64,
    pub min_y: f64,
    pub max_x: f64,
    pub max_y: f64,
}

impl Extent {
    pub fn new(min_x: f64, min_y: f64, max_x: f64, max_y: f64) -> Self {
        Self { min_x, min_y, max_x, max_y }
    }

    pub fn width(&self) -> f64 {
        self.max_x - self.min_x
    }

    pub fn height(&self) -> f64 {
        self.max_y - self.min_y
    }

    pub fn is_valid(&self) -> bool {
        [self.min_x, self.min_y, self.max_x, self.max_y].iter().all(|v| v.is_finite())
            && self.max_x > self.min_x
            && self.max_y > self.min_y
    }

    pub fn grown(&self, margin: f64) -> Self {
        Self::new(self.min_x - margin, self.min_y - margin, self.max_x + margin, self.max_y + margin)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrchardParams {
    pub rows: usize,
    pub trees_per_row: usize,
    /// Distance between neighbouring trees within a row.
    pub tree_spacing: f64,
    pub row_spacing: f64,
    /// Compass bearing of the rows in degrees; 0 runs them north (+Y).
    #[serde(default)]
    pub row_azimuth: f64,
    pub definition: String,
    #[serde(default)]
    pub seed: u64,
}

impl OrchardParams {
    /// Trunk positions before centring and rotation: row `i` at
    /// `x = i * row_spacing`, tree `j` at `y = j * tree_spacing`.
    pub fn reference_grid(&self) -> Vec<[f64; 2]> {
        (0..self.rows)
            .flat_map(|i| (0..self.trees_per_row).map(move |j| (i, j)))
            .map(|(i, j)| [i as f64 * self.row_spacing, j as f64 * self.tree_spacing])
            .collect()
    }

    /// Offset that centres the reference grid on the origin.
    pub fn centre_offset(&self) -> [f64; 2] {
        [
            (self.rows - 1) as f64 * self.row_spacing / 2.0,
            (self.trees_per_row - 1) as f64 * self.tree_spacing / 2.0,
        ]
    }

    fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.trees_per_row == 0 {
            return Err(Error::config("orchard needs at least one row and one tree per row"));
        }
        if !(self.tree_spacing > 0.0 && self.row_spacing > 0.0) {
            return Err(Error::config("orchard spacings must be positive"));
        }
        if !self.row_azimuth.is_finite() {
            return Err(Error::config("row azimuth must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub extent: Extent,
    pub tree_count: usize,
    pub min_spacing: f64,
    pub definition: String,
    #[serde(default)]
    pub seed: u64,
    /// Dart-throwing budget; defaults to `10_000 * tree_count`.
    #[serde(default)]
    pub max_attempts: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StandLayout {
    Orchard(OrchardParams),
    Forest(ForestParams),
}

impl StandLayout {
    pub fn definition(&self) -> &str {
        match self {
            StandLayout::Orchard(o) => &o.definition,
            StandLayout::Forest(f) => &f.definition,
        }
    }

    pub fn seed(&self) -> u64 {
        match self {
            StandLayout::Orchard(o) => o.seed,
            StandLayout::Forest(f) => f.seed,
        }
    }

    pub fn layout(&self) -> Result<Vec<TreePlacement>> {
        match self {
            StandLayout::Orchard(o) => layout_orchard(o),
            StandLayout::Forest(f) => layout_forest(f),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreePlacement {
    /// Trunk base; z is always 0.
    pub position: [f64; 3],
    /// Rotation of the tree about its own trunk, degrees counter-clockwise.
    pub yaw_deg: f64,
    pub tree_seed: u32,
    pub definition: String,
}

fn finish(positions: Vec<[f64; 2]>, definition: &str, seed: u64) -> Vec<TreePlacement> {
    let base = rng::derive_seed(seed, &[SEED_STREAM]) as u32;
    positions
        .into_iter()
        .enumerate()
        .map(|(k, [x, y])| TreePlacement {
            position: [x, y, 0.0],
            yaw_deg: rng::stream(seed, &[YAW_STREAM, k as u64]).random_range(0.0..360.0),
            tree_seed: base.wrapping_add(k as u32),
            definition: definition.to_owned(),
        })
        .collect()
}

/// Rows of evenly spaced trees, centred on the origin and rotated
/// clockwise by `row_azimuth` (a compass bearing).
pub fn layout_orchard(params: &OrchardParams) -> Result<Vec<TreePlacement>> {
    params.validate()?;
    let [ox, oy] = params.centre_offset();
    let (s, c) = params.row_azimuth.to_radians().sin_cos();
    let positions = params
        .reference_grid()
        .into_iter()
        .map(|[x, y]| {
            let (x, y) = (x - ox, y - oy);
            if params.row_azimuth == 0.0 {
                [x, y]
            } else {
                [x * c + y * s, -x * s + y * c]
            }
        })
        .collect();
    Ok(finish(positions, &params.definition, params.seed))
}

/// Random trunk positions inside the extent with every pair at least
/// `min_spacing` apart, by seeded dart throwing.
pub fn layout_forest(params: &ForestParams) -> Result<Vec<TreePlacement>> {
    if params.tree_count == 0 {
        return Err(Error::config("forest needs at least one tree"));
    }
    if !(params.min_spacing > 0.0) || !params.extent.is_valid() {
        return Err(Error::config("forest needs a positive min_spacing and a non-empty extent"));
    }
    let max_attempts = params.max_attempts.unwrap_or(10_000 * params.tree_count);
    let min2 = params.min_spacing * params.min_spacing;
    let e = params.extent;
    let mut r = rng::stream(params.seed, &[DART_STREAM]);
    let mut placed: Vec<[f64; 2]> = Vec::with_capacity(params.tree_count);
    let mut attempts = 0;
    while placed.len() < params.tree_count {
        if attempts >= max_attempts {
            return Err(Error::PlacementFailure {
                requested: params.tree_count,
                placed: placed.len(),
                attempts,
            });
        }
        attempts += 1;
        let p = [r.random_range(e.min_x..e.max_x), r.random_range(e.min_y..e.max_y)];
        if placed.iter().all(|q| (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) >= min2) {
            placed.push(p);
        }
    }
    Ok(finish(placed, &params.definition, params.seed))
}

/// Generate every placed tree, rotate it about its trunk by its yaw, move it
/// to its position and concatenate in placement order.
pub fn assemble_stand(
    placements: &[TreePlacement],
    definitions: &BTreeMap<String, TreeDefinition>,
) -> Result<LabelledCloud> {
    for p in placements {
        if !definitions.contains_key(&p.definition) {
            return Err(Error::config(format!("tree definition `{}` is not defined", p.definition)));
        }
    }
    let mut seeds: Vec<u32> = placements.iter().map(|p| p.tree_seed).collect();
    seeds.sort_unstable();
    if seeds.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::config("tree seeds must be unique within a stand"));
    }

    let trees = placements
        .par_iter()
        .map(|p| {
            let mut tree = generate_tree(&definitions[&p.definition], p.tree_seed)?;
            let [tx, ty, tz] = p.position;
            let (s, c) = p.yaw_deg.to_radians().sin_cos();
            for q in &mut tree.points {
                if p.yaw_deg != 0.0 {
                    let (x, y) = (q.x, q.y);
                    q.x = x * c - y * s;
                    q.y = x * s + y * c;
                }
                q.x += tx;
                q.y += ty;
                q.z += tz;
            }
            Ok(tree.points)
        })
        .collect::<Result<Vec<_>>>()?;

    let points = trees.concat();
    let used: BTreeMap<_, _> = placements
        .iter()
        .map(|p| (p.definition.as_str(), &definitions[&p.definition]))
        .collect();
    let spacing = used.values().map(|d| d.sample_spacing).fold(0.0, f64::max);
    let mut provenance = Provenance::new("stand", 0, &(placements, &used));
    provenance.sample_spacing = Some(spacing);
    Ok(LabelledCloud::new(points, provenance))
}

#[derive(Serialize, Deserialize)]
struct PlacementRecord {
    x: f64,
    y: f64,
    yaw_deg: f64,
    tree_seed: u32,
    definition: String,
}

pub fn write_placements(path: &Path, placements: &[TreePlacement]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(|e| Error::parse(path, e.to_string()))?;
    for p in placements {
        w.serialize(PlacementRecord {
            x: p.position[0],
            y: p.position[1],
            yaw_deg: p.yaw_deg,
            tree_seed: p.tree_seed,
            definition: p.definition.clone(),
        })
        .map_err(|e| Error::parse(path, e.to_string()))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_placements(path: &Path) -> Result<Vec<TreePlacement>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::parse(path, e.to_string()))?;
    r.deserialize::<PlacementRecord>()
        .map(|rec| {
            let rec = rec.map_err(|e| Error::parse(path, e.to_string()))?;
            Ok(TreePlacement {
                position: [rec.x, rec.y, 0.0],
                yaw_deg: rec.yaw_deg,
                tree_seed: rec.tree_seed,
                definition: rec.definition,
            })
        })
        .collect()
}
