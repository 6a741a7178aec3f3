//! Sensor shapes: sets of beams ("scan lines"), each discretised into
//! samples at fixed range steps.
//!
//! Sensor frame: +X forward, +Z up. The single-plane fan lies in the XZ
//! plane, sweeping from `-fov/2` (below forward) to `+fov/2`. Extra planes of
//! a multi-plane sensor are tilted out of that plane towards ±Y, each a cone
//! about the Y axis like the rings of a spinning multi-beam scanner.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::cloud::{LabelledCloud, LabelledPoint, Level, Provenance, ScanTag};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BeamGeometry {
    SinglePlane,
    MultiPlane { n_planes: usize, vertical_fov_deg: f64 },
    Spherical { res_az_deg: f64, res_el_deg: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorMeta {
    pub fov_deg: f64,
    pub angular_res_deg: f64,
    pub max_range_m: f64,
    pub range_step_m: f64,
    pub geometry: BeamGeometry,
}

/// One beam: a unit direction in the sensor frame and an id derived from
/// its angular position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanLine {
    pub id: u32,
    pub direction: Vector3<f64>,
}

/// Immutable beam set shared by all scan workers. All beams share the same
/// ladder of sample ranges, `(k + 1) * range_step` up to `max_range`.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorShape {
    lines: Vec<ScanLine>,
    ranges: Vec<f64>,
    meta: SensorMeta,
}

const EPS: f64 = 1e-9;

fn check_range(max_range: f64, range_step: f64) -> Result<Vec<f64>> {
    if !(range_step > 0.0 && max_range.is_finite() && range_step <= max_range) {
        return Err(Error::config(format!(
            "need 0 < range_step <= max_range, got step {range_step}, range {max_range}"
        )));
    }
    let n = (max_range / range_step + EPS).floor() as usize;
    Ok((0..n).map(|k| (k + 1) as f64 * range_step).collect())
}

fn check_fan(fov: f64, res: f64) -> Result<usize> {
    if !(res > 0.0 && res <= fov && fov <= 360.0) {
        return Err(Error::config(format!(
            "need 0 < angular_res <= fov <= 360, got res {res}, fov {fov}"
        )));
    }
    Ok((fov / res + EPS).floor() as usize + 1)
}

fn fan_direction(in_plane_deg: f64, out_of_plane_deg: f64) -> Vector3<f64> {
    let (st, ct) = in_plane_deg.to_radians().sin_cos();
    let (sp, cp) = out_of_plane_deg.to_radians().sin_cos();
    Vector3::new(cp * ct, sp, cp * st)
}

impl SensorShape {
    /// A planar fan of `floor(fov / res) + 1` beams in the sensor XZ plane.
    pub fn single_plane(fov_deg: f64, angular_res_deg: f64, max_range_m: f64, range_step_m: f64) -> Result<Self> {
        let beams = check_fan(fov_deg, angular_res_deg)?;
        let ranges = check_range(max_range_m, range_step_m)?;
        let lines = (0..beams)
            .map(|i| ScanLine {
                id: i as u32,
                direction: fan_direction(-fov_deg / 2.0 + i as f64 * angular_res_deg, 0.0),
            })
            .collect();
        Ok(Self {
            lines,
            ranges,
            meta: SensorMeta {
                fov_deg,
                angular_res_deg,
                max_range_m,
                range_step_m,
                geometry: BeamGeometry::SinglePlane,
            },
        })
    }

    /// `n_planes` copies of the single-plane fan tilted evenly across
    /// `[-vertical_fov/2, +vertical_fov/2]`. Ids are
    /// `plane * beams_per_plane + beam`.
    pub fn multi_plane(
        fov_deg: f64,
        angular_res_deg: f64,
        max_range_m: f64,
        range_step_m: f64,
        n_planes: usize,
        vertical_fov_deg: f64,
    ) -> Result<Self> {
        if n_planes < 2 {
            return Err(Error::config("a multi-plane sensor needs at least two planes"));
        }
        if !(vertical_fov_deg > 0.0 && vertical_fov_deg < 180.0) {
            return Err(Error::config(format!("vertical fov must be in (0, 180), got {vertical_fov_deg}")));
        }
        let beams = check_fan(fov_deg, angular_res_deg)?;
        let ranges = check_range(max_range_m, range_step_m)?;
        let spacing = vertical_fov_deg / (n_planes - 1) as f64;
        let mut lines = Vec::with_capacity(beams * n_planes);
        for p in 0..n_planes {
            let tilt = -vertical_fov_deg / 2.0 + p as f64 * spacing;
            for i in 0..beams {
                lines.push(ScanLine {
                    id: (p * beams + i) as u32,
                    direction: fan_direction(-fov_deg / 2.0 + i as f64 * angular_res_deg, tilt),
                });
            }
        }
        Ok(Self {
            lines,
            ranges,
            meta: SensorMeta {
                fov_deg,
                angular_res_deg,
                max_range_m,
                range_step_m,
                geometry: BeamGeometry::MultiPlane {
                    n_planes,
                    vertical_fov_deg,
                },
            },
        })
    }

    /// Beams on an azimuth/elevation lattice: azimuths `k * res_az` in
    /// [0, 360), elevations `-90 + m * res_el` up to +90. Polar beams are kept
    /// even though they coincide. Ids are `m * n_azimuths + k`.
    pub fn spherical(res_az_deg: f64, res_el_deg: f64, max_range_m: f64, range_step_m: f64) -> Result<Self> {
        if !(res_az_deg > 0.0 && res_az_deg <= 360.0 && res_el_deg > 0.0 && res_el_deg <= 180.0) {
            return Err(Error::config(format!(
                "need 0 < res_az <= 360 and 0 < res_el <= 180, got {res_az_deg}, {res_el_deg}"
            )));
        }
        let ranges = check_range(max_range_m, range_step_m)?;
        let n_az = (360.0 / res_az_deg - EPS).ceil() as usize;
        let n_el = (180.0 / res_el_deg + EPS).floor() as usize + 1;
        let mut lines = Vec::with_capacity(n_az * n_el);
        for m in 0..n_el {
            let (se, ce) = (-90.0 + m as f64 * res_el_deg).to_radians().sin_cos();
            for k in 0..n_az {
                let (sa, ca) = (k as f64 * res_az_deg).to_radians().sin_cos();
                lines.push(ScanLine {
                    id: (m * n_az + k) as u32,
                    direction: Vector3::new(ce * ca, ce * sa, se),
                });
            }
        }
        Ok(Self {
            lines,
            ranges,
            meta: SensorMeta {
                fov_deg: 360.0,
                angular_res_deg: res_az_deg,
                max_range_m,
                range_step_m,
                geometry: BeamGeometry::Spherical {
                    res_az_deg,
                    res_el_deg,
                },
            },
        })
    }

    pub fn lines(&self) -> &[ScanLine] {
        &self.lines
    }

    /// Sample ranges along every beam, strictly increasing.
    pub fn ranges(&self) -> &[f64] {
        &self.ranges
    }

    pub fn meta(&self) -> &SensorMeta {
        &self.meta
    }

    pub fn range_step(&self) -> f64 {
        self.meta.range_step_m
    }

    /// Total number of sample points in the shape.
    pub fn sample_count(&self) -> usize {
        self.lines.len() * self.ranges.len()
    }

    /// Tilt of each plane of a multi-plane sensor, degrees.
    pub fn plane_tilts(&self) -> Vec<f64> {
        match self.meta.geometry {
            BeamGeometry::MultiPlane {
                n_planes,
                vertical_fov_deg,
            } => {
                let spacing = vertical_fov_deg / (n_planes - 1) as f64;
                (0..n_planes).map(|p| -vertical_fov_deg / 2.0 + p as f64 * spacing).collect()
            }
            _ => vec![0.0],
        }
    }

    /// The shape as a cloud in the sensor frame, one point per sample,
    /// tagged with its scan line id (pose 0). Tree id and level are zero.
    pub fn to_cloud(&self) -> LabelledCloud {
        let mut points = Vec::with_capacity(self.sample_count());
        for line in &self.lines {
            for &t in &self.ranges {
                let d = line.direction * t;
                let mut p = LabelledPoint::new([d.x, d.y, d.z], 0, Level::Trunk);
                p.scan = Some(ScanTag {
                    scanline_id: line.id,
                    pose_index: 0,
                });
                points.push(p);
            }
        }
        LabelledCloud::new(points, Provenance::new("sensor", 0, &self.meta))
    }
}
