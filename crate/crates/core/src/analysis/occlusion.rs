use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::cloud::{LabelledCloud, SpatialIndex};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct OcclusionMap {
    /// Per source point: was some scan point within `match_radius`.
    pub visible: Vec<bool>,
    pub occluded_fraction: f64,
    pub match_radius: f64,
}

impl OcclusionMap {
    pub fn occluded_count(&self) -> usize {
        self.visible.iter().filter(|v| !**v).count()
    }
}

/// Mark each source point visible if the scan has a point within
/// `match_radius` of it.
pub fn occlusion_map(source: &LabelledCloud, scan: &LabelledCloud, match_radius: f64) -> Result<OcclusionMap> {
    if !(match_radius > 0.0 && match_radius.is_finite()) {
        return Err(Error::config(format!("match radius must be positive, got {match_radius}")));
    }
    if source.is_empty() {
        return Err(Error::EmptyCloud);
    }
    let index = SpatialIndex::build(scan, match_radius)?;
    let visible: Vec<bool> = source
        .points
        .par_iter()
        .map(|p| index.any_within(p.xyz(), match_radius))
        .collect();
    let occluded = visible.iter().filter(|v| !**v).count();
    Ok(OcclusionMap {
        occluded_fraction: occluded as f64 / visible.len() as f64,
        visible,
        match_radius,
    })
}

#[derive(Serialize)]
struct Row {
    x: f64,
    y: f64,
    z: f64,
    tree_id: u32,
    level: u8,
    visible: u8,
}

/// Source cloud annotated with a 0/1 `visible` column.
pub fn write_occlusion_csv(path: &Path, source: &LabelledCloud, map: &OcclusionMap) -> Result<()> {
    if source.len() != map.visible.len() {
        return Err(Error::config("occlusion map does not match the source cloud"));
    }
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(std::io::BufWriter::new(file));
    for (p, &v) in source.points.iter().zip(&map.visible) {
        w.serialize(Row {
            x: p.x,
            y: p.y,
            z: p.z,
            tree_id: p.tree_id,
            level: p.level.into(),
            visible: v as u8,
        })
        .map_err(|e| Error::io(path, e.into()))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
