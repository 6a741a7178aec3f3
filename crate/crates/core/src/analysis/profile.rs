use std::f64::consts::{PI, TAU};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cloud::LabelledCloud;
use crate::error::{Error, Result};

/// Number of azimuth sectors each bin is split into to measure spread.
const SECTORS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    /// Horizontal distance from the origin.
    RadialXy,
    Height,
}

impl std::str::FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "radial" | "radial_xy" => Ok(Axis::RadialXy),
            "height" => Ok(Axis::Height),
            _ => Err(Error::config(format!("unknown profile axis `{s}` (radial, height)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileBin {
    /// Bin centre divided by the largest coordinate.
    pub coord: f64,
    /// Bin density divided by the densest bin's.
    pub mean: f64,
    /// Spread of the bin's density across azimuth sectors, on the same scale.
    pub stddev: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityProfile {
    pub axis: Axis,
    pub bins: Vec<ProfileBin>,
}

impl DensityProfile {
    /// Mean bin value of the first third of the bins over that of the last
    /// third.
    pub fn inner_outer_ratio(&self) -> f64 {
        let k = (self.bins.len() / 3).max(1);
        let avg = |b: &[ProfileBin]| b.iter().map(|x| x.mean).sum::<f64>() / b.len() as f64;
        avg(&self.bins[..k]) / avg(&self.bins[self.bins.len() - k..])
    }

    /// Population standard deviation of the bin values.
    pub fn spread(&self) -> f64 {
        let n = self.bins.len() as f64;
        let m = self.bins.iter().map(|b| b.mean).sum::<f64>() / n;
        (self.bins.iter().map(|b| (b.mean - m).powi(2)).sum::<f64>() / n).sqrt()
    }
}

/// Density as a function of horizontal distance from the origin or of
/// height, over `n_bins` equal bins spanning `[0, max coordinate]`.
///
/// Radial bins are annuli times the cloud's height extent; height bins are
/// slabs of the cloud's XY bounding box. Both axes are normalised so the
/// largest value is 1.
pub fn density_profile(cloud: &LabelledCloud, axis: Axis, n_bins: usize) -> Result<DensityProfile> {
    if n_bins < 2 {
        return Err(Error::config(format!("a profile needs at least 2 bins, got {n_bins}")));
    }
    let (lo, hi) = cloud.bounds().ok_or(Error::EmptyCloud)?;
    let coord = |x: f64, y: f64, z: f64| match axis {
        Axis::RadialXy => x.hypot(y),
        Axis::Height => z,
    };
    let top = cloud.points.iter().map(|p| coord(p.x, p.y, p.z)).fold(0.0, f64::max);
    let top = if top > 0.0 { top } else { 1.0 };
    let width = top / n_bins as f64;

    let mut counts = vec![[0u64; SECTORS]; n_bins];
    for p in &cloud.points {
        let c = coord(p.x, p.y, p.z);
        let bin = ((c / top * n_bins as f64).floor().max(0.0) as usize).min(n_bins - 1);
        let a = p.y.atan2(p.x).rem_euclid(TAU);
        let sector = ((a / TAU * SECTORS as f64) as usize).min(SECTORS - 1);
        counts[bin][sector] += 1;
    }

    let nonzero = |v: f64| if v > 0.0 { v } else { 1.0 };
    let volume = |k: usize| match axis {
        Axis::RadialXy => {
            let (r0, r1) = (k as f64 * width, (k + 1) as f64 * width);
            PI * (r1 * r1 - r0 * r0) * nonzero(hi[2] - lo[2])
        }
        Axis::Height => nonzero((hi[0] - lo[0]) * (hi[1] - lo[1])) * width,
    };
    let raw: Vec<(f64, f64)> = counts
        .iter()
        .enumerate()
        .map(|(k, sectors)| {
            let v = volume(k);
            let total: u64 = sectors.iter().sum();
            let sector_density: Vec<f64> = sectors.iter().map(|&c| c as f64 * SECTORS as f64 / v).collect();
            let m = sector_density.iter().sum::<f64>() / SECTORS as f64;
            let var = sector_density.iter().map(|d| (d - m).powi(2)).sum::<f64>() / SECTORS as f64;
            (total as f64 / v, var.sqrt())
        })
        .collect();
    let peak = raw.iter().map(|r| r.0).fold(0.0, f64::max);
    let bins = raw
        .iter()
        .enumerate()
        .map(|(k, &(m, s))| ProfileBin {
            coord: (k as f64 + 0.5) / n_bins as f64,
            mean: m / peak,
            stddev: s / peak,
        })
        .collect();
    Ok(DensityProfile { axis, bins })
}

pub fn write_profile_csv(path: &Path, profile: &DensityProfile) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(std::io::BufWriter::new(file));
    let io = |e: csv::Error| Error::io(path, e.into());
    w.write_record(["bin_coord", "mean", "stddev"]).map_err(io)?;
    for b in &profile.bins {
        w.write_record([b.coord.to_string(), b.mean.to_string(), b.stddev.to_string()])
            .map_err(io)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cloud::{LabelledPoint, Level, Provenance};

    fn cloud(pts: impl IntoIterator<Item = [f64; 3]>) -> LabelledCloud {
        LabelledCloud::new(
            pts.into_iter().map(|p| LabelledPoint::new(p, 0, Level::Leaf)).collect(),
            Provenance::default(),
        )
    }

    #[test]
    fn one_radius_one_bin() {
        let c = cloud((0..40).map(|i| {
            let a = (i as f64 + 0.5) * TAU / 40.0;
            [2.0 * a.cos(), 2.0 * a.sin(), 0.1 * i as f64]
        }));
        let p = density_profile(&c, Axis::RadialXy, 10).unwrap();
        let nonzero: Vec<_> = p.bins.iter().filter(|b| b.mean > 0.0).collect();
        assert_eq!(nonzero.len(), 1);
        assert_eq!(nonzero[0].mean, 1.0);
        assert_eq!(nonzero[0].stddev, 0.0);
    }

    #[test]
    fn coordinates_are_normalised() {
        let c = cloud((0..100).map(|i| [0.1 * i as f64, 0.0, 0.05 * i as f64]));
        for axis in [Axis::RadialXy, Axis::Height] {
            let p = density_profile(&c, axis, 7).unwrap();
            assert_eq!(p.bins.len(), 7);
            assert!(p.bins.windows(2).all(|w| w[0].coord < w[1].coord));
            assert!(p.bins.iter().all(|b| (0.0..=1.0).contains(&b.coord) && (0.0..=1.0).contains(&b.mean)));
            assert_eq!(p.bins.iter().map(|b| b.mean).fold(0.0, f64::max), 1.0);
        }
    }

    #[test]
    fn uniform_slab_is_flat_in_height() {
        let c = cloud((0..10_000).map(|i| {
            let (a, b, h) = ((i % 10) as f64, ((i / 10) % 10) as f64, (i / 100) as f64);
            [a * 0.1 + 0.05, b * 0.1 + 0.05, h * 0.1 + 0.05]
        }));
        let p = density_profile(&c, Axis::Height, 5).unwrap();
        assert!(p.bins.iter().all(|b| (b.mean - 1.0).abs() < 0.05), "{p:?}");
        assert!(p.spread() < 0.05);
    }

    #[test]
    fn inner_outer_ratio_of_decreasing_profile() {
        let p = DensityProfile {
            axis: Axis::RadialXy,
            bins: (0..6)
                .map(|k| ProfileBin {
                    coord: k as f64,
                    mean: [1.0, 0.8, 0.5, 0.4, 0.2, 0.2][k],
                    stddev: 0.0,
                })
                .collect(),
        };
        assert!((p.inner_outer_ratio() - 4.5).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        assert!(matches!(density_profile(&cloud([]), Axis::Height, 4), Err(Error::EmptyCloud)));
        assert!(density_profile(&cloud([[1.0; 3]]), Axis::Height, 1).is_err());
        assert!("sideways".parse::<Axis>().is_err());
    }
}
