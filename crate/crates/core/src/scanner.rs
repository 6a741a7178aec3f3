//! The scan kernel: move the sensor shape along a trajectory, match every
//! sample to the stand cloud, keep the first return of each beam, add noise.

use std::path::Path;

use log::warn;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use rustc_hash::FxHashSet;
use serde::{Deserialize, Serialize};

use crate::cloud::{dist2, LabelledCloud, LabelledPoint, Provenance, ScanTag, SpatialIndex};
use crate::error::{Error, Result};
use crate::rng;
use crate::sensor::SensorShape;
use crate::trajectory::{posed_line, Trajectory};
use crate::treegen::required_spacing;

const CONTROL_STREAM: u64 = 0xC0_4720;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanParams {
    /// Largest distance at which a sample still matches a stand point.
    pub search_radius: f64,
    /// Per-axis standard deviation of the added noise.
    pub noise_sigma: f64,
    pub seed: u64,
    /// Keep only the first return of each source point.
    #[serde(default)]
    pub dedupe: bool,
}

impl Default for ScanParams {
    fn default() -> Self {
        Self {
            search_radius: crate::presets::SEARCH_RADIUS,
            noise_sigma: crate::presets::NOISE_SIGMA,
            seed: 0,
            dedupe: false,
        }
    }
}

impl ScanParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.search_radius > 0.0 && self.search_radius.is_finite()) {
            return Err(Error::config(format!("search_radius must be positive, got {}", self.search_radius)));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::config(format!("noise_sigma must be non-negative, got {}", self.noise_sigma)));
        }
        Ok(())
    }
}

/// One potential return on a beam.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    /// Range of the sensor sample along the beam.
    pub sample_range: f64,
    pub point: usize,
    pub match_distance: f64,
}

/// The candidate nearest the sensor along the beam; ties go to the closer
/// match, then the lower point index.
pub fn first_return(candidates: &[Candidate]) -> Option<Candidate> {
    candidates.iter().copied().min_by(|a, b| {
        a.sample_range
            .total_cmp(&b.sample_range)
            .then(a.match_distance.total_cmp(&b.match_distance))
            .then(a.point.cmp(&b.point))
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanStats {
    pub params_hash: String,
    pub seed: u64,
    pub total_returns: usize,
    pub returns_per_pose: Vec<u32>,
    /// Scan line ids in shape order, paired with `hit_rate_per_line`.
    pub scanline_ids: Vec<u32>,
    /// Fraction of poses at which each scan line returned a point.
    pub hit_rate_per_line: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    pub cloud: LabelledCloud,
    /// Stand index of the point behind each return, before noise.
    pub sources: Vec<usize>,
    pub stats: ScanStats,
}

impl ScanResult {
    pub fn write_stats(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(&self.stats).expect("stats serialise");
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }
}

/// Per-pose hits as (scanline position in shape, source index).
type PoseHits = Vec<(u32, usize)>;

fn check_inputs(shape: &SensorShape, traj: &Trajectory, params: &ScanParams, stand: &LabelledCloud) -> Result<()> {
    params.validate()?;
    if traj.is_empty() {
        return Err(Error::config("trajectory has no poses"));
    }
    if shape.lines().is_empty() || shape.ranges().is_empty() {
        return Err(Error::config("sensor shape has no samples"));
    }
    let step = shape.range_step();
    if step > 2.0 * params.search_radius {
        return Err(Error::config(format!(
            "range step {step} m leaves gaps between search spheres of radius {} m",
            params.search_radius
        )));
    }
    if step > params.search_radius {
        warn!("range step {step} m exceeds the search radius; thin surfaces may be skipped");
    }
    if let Some(spacing) = stand.provenance.sample_spacing {
        let need = required_spacing(params.search_radius, 1.0)?;
        if spacing > need {
            warn!("stand sampled at {spacing} m, coarser than the {need} m the search radius needs");
        }
    }
    Ok(())
}

fn scan_with(
    stand: &LabelledCloud,
    shape: &SensorShape,
    traj: &Trajectory,
    params: &ScanParams,
    pose_hits: impl Fn(&crate::trajectory::Pose) -> PoseHits + Sync + Send,
) -> Result<ScanResult> {
    check_inputs(shape, traj, params, stand)?;
    let per_pose: Vec<PoseHits> = traj.poses.par_iter().map(pose_hits).collect();
    Ok(assemble(stand, shape, traj, params, per_pose))
}

/// Simulate a scan of the indexed stand. Poses run in parallel on the
/// current rayon pool; output is independent of the worker count.
pub fn simulate_scan(
    index: &SpatialIndex,
    shape: &SensorShape,
    traj: &Trajectory,
    params: &ScanParams,
) -> Result<ScanResult> {
    let r = params.search_radius;
    scan_with(index.cloud(), shape, traj, params, |pose| {
        let mut hits = Vec::new();
        for (li, line) in shape.lines().iter().enumerate() {
            let (o, d) = posed_line(pose, line);
            for &t in shape.ranges() {
                let s = o + d * t;
                if let Some(nb) = index.nearest_within([s.x, s.y, s.z], r) {
                    hits.push((li as u32, nb.index));
                    break;
                }
            }
        }
        hits
    })
}

/// Index the stand with cells of one search radius and scan it. An empty
/// stand yields an empty scan.
pub fn scan_cloud(
    stand: &LabelledCloud,
    shape: &SensorShape,
    traj: &Trajectory,
    params: &ScanParams,
) -> Result<ScanResult> {
    if stand.is_empty() {
        return scan_with(stand, shape, traj, params, |_| Vec::new());
    }
    params.validate()?;
    let index = SpatialIndex::build(stand, params.search_radius)?;
    simulate_scan(&index, shape, traj, params)
}

/// Reference implementation of [`simulate_scan`]: every sample is matched
/// by an exhaustive scan of the stand and every candidate is collected
/// before choosing the first return. Only practical on small inputs.
pub fn brute_force_scan(
    stand: &LabelledCloud,
    shape: &SensorShape,
    traj: &Trajectory,
    params: &ScanParams,
) -> Result<ScanResult> {
    let r2 = params.search_radius * params.search_radius;
    scan_with(stand, shape, traj, params, |pose| {
        let mut hits = Vec::new();
        for (li, line) in shape.lines().iter().enumerate() {
            let (o, d) = posed_line(pose, line);
            let mut candidates = Vec::new();
            for &t in shape.ranges() {
                let s = o + d * t;
                let q = [s.x, s.y, s.z];
                let mut best: Option<(f64, usize)> = None;
                for (i, p) in stand.points.iter().enumerate() {
                    let d2 = dist2(p.xyz(), q);
                    if d2 <= r2 && best.is_none_or(|(bd, _)| d2 < bd) {
                        best = Some((d2, i));
                    }
                }
                if let Some((d2, i)) = best {
                    candidates.push(Candidate {
                        sample_range: t,
                        point: i,
                        match_distance: d2.sqrt(),
                    });
                }
            }
            if let Some(c) = first_return(&candidates) {
                hits.push((li as u32, c.point));
            }
        }
        hits
    })
}

fn assemble(
    stand: &LabelledCloud,
    shape: &SensorShape,
    traj: &Trajectory,
    params: &ScanParams,
    per_pose: Vec<PoseHits>,
) -> ScanResult {
    let noise = (params.noise_sigma > 0.0).then(|| Normal::new(0.0, params.noise_sigma).expect("valid sigma"));
    let mut seen = FxHashSet::default();
    let mut points = Vec::new();
    let mut sources = Vec::new();
    let mut returns_per_pose = Vec::with_capacity(per_pose.len());
    let mut line_hits = vec![0u32; shape.lines().len()];
    for (pose_index, hits) in per_pose.into_iter().enumerate() {
        let mut kept = 0;
        for (li, src) in hits {
            if params.dedupe && !seen.insert(src) {
                continue;
            }
            let line = &shape.lines()[li as usize];
            let s = &stand.points[src];
            let mut xyz = s.xyz();
            if let Some(n) = &noise {
                let mut g = rng::stream(params.seed, &[pose_index as u64, line.id as u64]);
                for v in &mut xyz {
                    *v += n.sample(&mut g);
                }
            }
            let mut p = LabelledPoint::new(xyz, s.tree_id, s.level);
            p.scan = Some(ScanTag {
                scanline_id: line.id,
                pose_index: pose_index as u32,
            });
            points.push(p);
            sources.push(src);
            line_hits[li as usize] += 1;
            kept += 1;
        }
        returns_per_pose.push(kept);
    }
    let scan_params = (params, shape.meta(), &traj.meta, &stand.provenance.params_hash);
    let provenance = Provenance::new("scan", params.seed, &scan_params);
    let n_poses = traj.len() as f64;
    let stats = ScanStats {
        params_hash: provenance.params_hash.clone(),
        seed: params.seed,
        total_returns: points.len(),
        returns_per_pose,
        scanline_ids: shape.lines().iter().map(|l| l.id).collect(),
        hit_rate_per_line: line_hits.iter().map(|&h| h as f64 / n_poses).collect(),
    };
    ScanResult {
        cloud: LabelledCloud::new(points, provenance),
        sources,
        stats,
    }
}

/// Uniform random subsample of the stand without replacement, kept in
/// stand order.
pub fn control_sample(stand: &LabelledCloud, target_count: usize, seed: u64) -> Result<LabelledCloud> {
    if target_count == 0 || target_count > stand.len() {
        return Err(Error::config(format!(
            "control size must be in 1..={}, got {target_count}",
            stand.len()
        )));
    }
    let mut g = rng::stream(seed, &[CONTROL_STREAM]);
    let mut picked = rand::seq::index::sample(&mut g, stand.len(), target_count).into_vec();
    picked.sort_unstable();
    let points = picked.into_iter().map(|i| stand.points[i].clone()).collect();
    let provenance = Provenance::new("control", seed, &(target_count, &stand.provenance.params_hash));
    Ok(LabelledCloud::new(points, provenance))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cloud::Level;
    use crate::trajectory::{Pose, TrajectoryMeta};
    use nalgebra::{Point3, UnitQuaternion};

    fn cand(t: f64, point: usize, d: f64) -> Candidate {
        Candidate {
            sample_range: t,
            point,
            match_distance: d,
        }
    }

    #[test]
    fn first_return_rules() {
        assert_eq!(first_return(&[cand(7.5, 1, 0.0), cand(3.2, 2, 0.01)]).unwrap().point, 2);
        assert_eq!(first_return(&[]), None);
        assert_eq!(first_return(&[cand(1.0, 5, 0.011), cand(1.0, 9, 0.004)]).unwrap().point, 9);
        assert_eq!(first_return(&[cand(1.0, 5, 0.004), cand(1.0, 3, 0.004)]).unwrap().point, 3);
    }

    fn plate(y: f64, spacing: f64, level: Level) -> Vec<LabelledPoint> {
        let n = (1.0 / spacing).round() as i32;
        let mut pts = Vec::new();
        for i in 0..=n {
            for j in 0..=n {
                let x = -0.5 + i as f64 * spacing;
                let z = -0.5 + j as f64 * spacing;
                pts.push(LabelledPoint::new([x, y, z], 0, level));
            }
        }
        pts
    }

    fn single_beam_at_plus_y() -> (SensorShape, Trajectory) {
        let shape = SensorShape::single_plane(1.0, 1.0, 10.0, 0.02).unwrap();
        // the fan's forward beam is the middle one; a 1 degree fan has two
        // beams at -0.5 and +0.5 degrees, both close enough to hit the plate
        let pose = Pose::new(Point3::origin(), UnitQuaternion::from_euler_angles(0.0, 0.0, std::f64::consts::FRAC_PI_2));
        let traj = Trajectory {
            poses: vec![pose],
            meta: TrajectoryMeta {
                generator: "test".into(),
                params: serde_json::Value::Null,
                step: None,
                segments: vec![],
            },
        };
        (shape, traj)
    }

    fn params(sigma: f64) -> ScanParams {
        ScanParams {
            search_radius: 0.02,
            noise_sigma: sigma,
            seed: 3,
            dedupe: false,
        }
    }

    #[test]
    fn plate_returns_its_own_points() {
        let cloud = LabelledCloud::new(plate(5.0, 0.01, Level::Leaf), Provenance::default());
        let index = SpatialIndex::build(&cloud, 0.02).unwrap();
        let (shape, traj) = single_beam_at_plus_y();
        let res = simulate_scan(&index, &shape, &traj, &params(0.0)).unwrap();
        assert_eq!(res.cloud.len(), 2);
        for (p, &s) in res.cloud.points.iter().zip(&res.sources) {
            assert_eq!(p.xyz(), cloud.points[s].xyz());
            assert_eq!(p.level, Level::Leaf);
            assert!((p.y - 5.0).abs() < 1e-12);
        }
        assert_eq!(res.stats.total_returns, 2);
        assert_eq!(res.stats.returns_per_pose, vec![2]);
    }

    #[test]
    fn rear_plate_is_occluded() {
        let mut pts = plate(5.0, 0.01, Level::Leaf);
        pts.extend(plate(8.0, 0.01, Level::Trunk));
        let cloud = LabelledCloud::new(pts, Provenance::default());
        let index = SpatialIndex::build(&cloud, 0.02).unwrap();
        let (shape, traj) = single_beam_at_plus_y();
        let res = simulate_scan(&index, &shape, &traj, &params(0.0)).unwrap();
        assert!(!res.cloud.is_empty());
        assert!(res.cloud.points.iter().all(|p| p.y == 5.0));
        let brute = brute_force_scan(&cloud, &shape, &traj, &params(0.0)).unwrap();
        assert_eq!(brute, res);
    }

    #[test]
    fn noise_is_reproducible_and_brute_matches() {
        let cloud = LabelledCloud::new(plate(3.0, 0.02, Level::Branch), Provenance::default());
        let index = SpatialIndex::build(&cloud, 0.02).unwrap();
        let (shape, traj) = single_beam_at_plus_y();
        let a = simulate_scan(&index, &shape, &traj, &params(0.02)).unwrap();
        let b = simulate_scan(&index, &shape, &traj, &params(0.02)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.cloud.points[0].xyz(), cloud.points[a.sources[0]].xyz());
        assert_eq!(brute_force_scan(&cloud, &shape, &traj, &params(0.02)).unwrap(), a);
    }

    #[test]
    fn empty_trajectory_is_config_error() {
        let cloud = LabelledCloud::new(plate(3.0, 0.1, Level::Branch), Provenance::default());
        let index = SpatialIndex::build(&cloud, 0.1).unwrap();
        let (shape, mut traj) = single_beam_at_plus_y();
        traj.poses.clear();
        assert!(matches!(simulate_scan(&index, &shape, &traj, &params(0.0)), Err(Error::Config(_))));
    }

    #[test]
    fn coarse_range_step_rejected() {
        let cloud = LabelledCloud::new(plate(3.0, 0.1, Level::Branch), Provenance::default());
        let index = SpatialIndex::build(&cloud, 0.1).unwrap();
        let (_, traj) = single_beam_at_plus_y();
        let shape = SensorShape::single_plane(1.0, 1.0, 10.0, 0.05).unwrap();
        assert!(matches!(simulate_scan(&index, &shape, &traj, &params(0.0)), Err(Error::Config(_))));
    }

    #[test]
    fn dedupe_keeps_first_hit() {
        let cloud = LabelledCloud::new(vec![LabelledPoint::new([0.0, 2.0, 0.0], 0, Level::Leaf)], Provenance::default());
        let index = SpatialIndex::build(&cloud, 0.02).unwrap();
        let (shape, mut traj) = single_beam_at_plus_y();
        traj.poses.push(traj.poses[0]);
        // both beams of the 1 degree fan pass within 0.02 of the point
        let all = simulate_scan(&index, &shape, &traj, &params(0.0)).unwrap();
        assert_eq!(all.cloud.len(), 4);
        assert_eq!(all.stats.returns_per_pose, vec![2, 2]);
        let mut p = params(0.0);
        p.dedupe = true;
        let once = simulate_scan(&index, &shape, &traj, &p).unwrap();
        assert_eq!(once.cloud.len(), 1);
        assert_eq!(once.stats.returns_per_pose, vec![1, 0]);
    }

    #[test]
    fn control_sample_contract() {
        let cloud = LabelledCloud::new(plate(1.0, 0.1, Level::Twig), Provenance::default());
        let all = control_sample(&cloud, cloud.len(), 4).unwrap();
        assert_eq!(all.points, cloud.points);
        let one = control_sample(&cloud, 1, 4).unwrap();
        assert!(cloud.points.contains(&one.points[0]));
        let a = control_sample(&cloud, 30, 9).unwrap();
        assert_eq!(a.len(), 30);
        assert_eq!(a, control_sample(&cloud, 30, 9).unwrap());
        assert!(control_sample(&cloud, cloud.len() + 1, 0).is_err());
        assert!(control_sample(&cloud, 0, 0).is_err());
    }
}
