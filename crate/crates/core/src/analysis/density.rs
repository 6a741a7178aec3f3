use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::cloud::LabelledCloud;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityStats {
    pub voxel_edge: f64,
    pub occupied_voxels: usize,
    /// Points per cubic metre, averaged over occupied voxels.
    pub mean_density: f64,
    /// Population standard deviation over occupied voxels.
    pub stddev_density: f64,
    pub total_points: usize,
}

impl DensityStats {
    /// Coefficient of variation, stddev / mean.
    pub fn variation(&self) -> f64 {
        self.stddev_density / self.mean_density
    }
}

/// Voxel density over cubes of `voxel_edge` anchored at the origin.
pub fn density_stats(cloud: &LabelledCloud, voxel_edge: f64) -> Result<DensityStats> {
    if !(voxel_edge > 0.0 && voxel_edge.is_finite()) {
        return Err(Error::config(format!("voxel edge must be positive, got {voxel_edge}")));
    }
    if cloud.is_empty() {
        return Err(Error::EmptyCloud);
    }
    let mut counts: FxHashMap<[i64; 3], u64> = FxHashMap::default();
    for p in &cloud.points {
        let key = p.xyz().map(|v| (v / voxel_edge).floor() as i64);
        *counts.entry(key).or_default() += 1;
    }
    // hash map order is arbitrary; sort so the float sums are reproducible
    let mut c: Vec<u64> = counts.into_values().collect();
    c.sort_unstable();
    let vol = voxel_edge.powi(3);
    let n = c.len() as f64;
    let mean = c.iter().map(|&k| k as f64 / vol).sum::<f64>() / n;
    let var = c.iter().map(|&k| (k as f64 / vol - mean).powi(2)).sum::<f64>() / n;
    Ok(DensityStats {
        voxel_edge,
        occupied_voxels: c.len(),
        mean_density: mean,
        stddev_density: var.sqrt(),
        total_points: cloud.len(),
    })
}
