//! Sensor trajectories: ordered poses for handheld, ground-vehicle and
//! aerial scanning, plus CSV import/export of recorded trajectories.

use std::f64::consts::TAU;
use std::path::Path;

use nalgebra::{Matrix3, Point3, Rotation3, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sensor::{ScanLine, SensorShape};
use crate::stand::{Extent, StandLayout};

pub const CSV_HEADER: &str = "x,y,z,qw,qx,qy,qz";

const EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub position: Point3<f64>,
    pub orientation: UnitQuaternion<f64>,
}

impl Pose {
    pub fn new(position: Point3<f64>, orientation: UnitQuaternion<f64>) -> Self {
        Self { position, orientation }
    }

    /// World-frame direction of a sensor-frame unit vector.
    pub fn direction(&self, d: &Vector3<f64>) -> Vector3<f64> {
        self.orientation * d
    }

    /// Sensor forward axis (+X) in the world frame.
    pub fn forward(&self) -> Vector3<f64> {
        self.direction(&Vector3::x())
    }
}

/// A contiguous run of poses produced by one part of a generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub label: String,
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryMeta {
    pub generator: String,
    pub params: serde_json::Value,
    /// Longest distance between consecutive poses the generator promises.
    pub step: Option<f64>,
    pub segments: Vec<Segment>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub poses: Vec<Pose>,
    pub meta: TrajectoryMeta,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.poses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poses.is_empty()
    }

    pub fn segment(&self, label: &str) -> Option<&[Pose]> {
        self.meta
            .segments
            .iter()
            .find(|s| s.label == label)
            .map(|s| &self.poses[s.start..s.end])
    }

    /// Total path length through the poses in order.
    pub fn path_length(&self) -> f64 {
        self.poses.windows(2).map(|w| (w[1].position - w[0].position).norm()).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HandheldParams {
    pub target: [f64; 3],
    pub r_wide: f64,
    pub r_close: f64,
    pub height: f64,
    pub step: f64,
    pub osc_amp_deg: f64,
    pub osc_period_m: f64,
}

impl Default for HandheldParams {
    fn default() -> Self {
        Self {
            target: [0.0; 3],
            r_wide: 7.0,
            r_close: 2.5,
            height: 1.5,
            step: 0.1,
            osc_amp_deg: 45.0,
            osc_period_m: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GroundParams {
    pub height: f64,
    pub step: f64,
    /// Distance driven past the first and last tree of each row.
    pub margin: f64,
}

impl Default for GroundParams {
    fn default() -> Self {
        Self {
            height: 1.8,
            step: 0.1,
            margin: 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AerialParams {
    pub extent: Extent,
    pub altitude: f64,
    pub line_spacing: f64,
    pub step: f64,
}

impl Default for AerialParams {
    fn default() -> Self {
        Self {
            extent: Extent::new(-20.0, -20.0, 20.0, 20.0),
            altitude: 30.0,
            line_spacing: 10.0,
            step: 0.5,
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::config(format!("{name} must be positive, got {v}")))
    }
}

/// Orientation whose sensor X and Y axes map to `x` and `y` (unit,
/// orthogonal); sensor Z completes the right-handed frame.
fn frame(x: Vector3<f64>, y: Vector3<f64>) -> UnitQuaternion<f64> {
    let z = x.cross(&y);
    let m = Matrix3::from_columns(&[x, y, z]);
    UnitQuaternion::from_rotation_matrix(&Rotation3::from_matrix_unchecked(m))
}

/// `n` points from `a` to `b` inclusive, with `n` the fewest keeping gaps
/// at or below `step`.
fn line(a: Point3<f64>, b: Point3<f64>, step: f64) -> Vec<Point3<f64>> {
    let len = (b - a).norm();
    let gaps = ((len / step - EPS).ceil() as usize).max(1);
    (0..=gaps).map(|k| a + (b - a) * (k as f64 / gaps as f64)).collect()
}

struct Builder {
    poses: Vec<Pose>,
    segments: Vec<Segment>,
}

impl Builder {
    fn new() -> Self {
        Self {
            poses: Vec::new(),
            segments: Vec::new(),
        }
    }

    fn push(&mut self, label: String, poses: impl IntoIterator<Item = Pose>) {
        let start = self.poses.len();
        self.poses.extend(poses);
        if self.poses.len() > start {
            self.segments.push(Segment {
                label,
                start,
                end: self.poses.len(),
            });
        }
    }

    fn finish(self, generator: &str, params: &impl Serialize, step: f64) -> Trajectory {
        Trajectory {
            poses: self.poses,
            meta: TrajectoryMeta {
                generator: generator.into(),
                params: serde_json::to_value(params).expect("params serialise"),
                step: Some(step),
                segments: self.segments,
            },
        }
    }
}

/// Walk a wide circle, step inward along the radius at angle zero, then
/// walk a close circle, all at `height` above the target. The sensor is
/// held with its fan horizontal, facing the target, and pitched by a
/// sinusoid of the distance walked.
///
/// Segments are labelled `wide`, `transition` and `close`.
pub fn traj_handheld_loop(p: &HandheldParams) -> Result<Trajectory> {
    positive("step", p.step)?;
    positive("r_close", p.r_close)?;
    positive("osc_period_m", p.osc_period_m)?;
    if !(p.r_wide > p.r_close) {
        return Err(Error::config(format!(
            "r_wide ({}) must exceed r_close ({})",
            p.r_wide, p.r_close
        )));
    }
    if !(p.osc_amp_deg.abs() < 90.0 && p.height.is_finite() && p.target.iter().all(|v| v.is_finite())) {
        return Err(Error::config("oscillation amplitude must be below 90 degrees"));
    }
    let [tx, ty, tz] = p.target;
    let z = tz + p.height;
    let at = |r: f64, a: f64| Point3::new(tx + r * a.cos(), ty + r * a.sin(), z);
    let circle = |r: f64| {
        let n = ((TAU * r / p.step - EPS).ceil() as usize).max(3);
        (0..n).map(move |k| at(r, k as f64 * TAU / n as f64)).collect::<Vec<_>>()
    };
    let wide = circle(p.r_wide);
    let mut transition = line(at(p.r_wide, 0.0), at(p.r_close, 0.0), p.step);
    transition.pop();
    let close = circle(p.r_close);

    let mut walked = 0.0;
    let mut prev: Option<Point3<f64>> = None;
    let amp = p.osc_amp_deg.to_radians();
    let mut orient = |pos: Point3<f64>| {
        if let Some(q) = prev {
            walked += (pos - q).norm();
        }
        prev = Some(pos);
        let yaw = (ty - pos.y).atan2(tx - pos.x);
        let pitch = amp * (TAU * walked / p.osc_period_m).sin();
        Pose::new(pos, UnitQuaternion::from_euler_angles(std::f64::consts::FRAC_PI_2, pitch, yaw))
    };
    let mut b = Builder::new();
    for (label, pts) in [("wide", wide), ("transition", transition), ("close", close)] {
        let poses: Vec<Pose> = pts.into_iter().map(&mut orient).collect();
        b.push(label.into(), poses);
    }
    Ok(b.finish("handheld-loop", p, p.step))
}

/// Drive along every mid-row line of an orchard, plus one line outside
/// each outer row, in alternating directions. The fan stands upright
/// (sensor X up) across the direction of travel (sensor Y). Short
/// connectors join the ends of consecutive passes.
///
/// Segments are labelled `pass-<i>` and `connector-<i>`.
pub fn traj_ground_rows(layout: &StandLayout, p: &GroundParams) -> Result<Trajectory> {
    let StandLayout::Orchard(o) = layout else {
        return Err(Error::config("ground-rows needs an orchard layout"));
    };
    positive("step", p.step)?;
    if !(p.margin >= 0.0 && p.height.is_finite()) {
        return Err(Error::config("margin must be non-negative"));
    }
    // sanity-check the layout itself
    layout.layout()?;
    let [ox, oy] = o.centre_offset();
    let (s, c) = o.row_azimuth.to_radians().sin_cos();
    let world = |x: f64, y: f64| {
        let (x, y) = (x - ox, y - oy);
        Point3::new(x * c + y * s, -x * s + y * c, p.height)
    };
    let along = Vector3::new(s, c, 0.0);
    let across = Vector3::new(c, -s, 0.0);
    let y0 = -p.margin;
    let y1 = (o.trees_per_row - 1) as f64 * o.tree_spacing + p.margin;

    let mut b = Builder::new();
    for i in 0..=o.rows {
        let x = (i as f64 - 0.5) * o.row_spacing;
        let forward = i % 2 == 0;
        let (a, e) = if forward { (y0, y1) } else { (y1, y0) };
        if i > 0 {
            let last = b.poses.last().unwrap().position;
            let mut pts = line(last, world(x, a), p.step);
            pts.remove(0);
            pts.pop();
            let q = frame(Vector3::z(), across);
            b.push(format!("connector-{i}"), pts.into_iter().map(|pt| Pose::new(pt, q)));
        }
        let dir = if forward { along } else { -along };
        let q = frame(Vector3::z(), dir);
        let pts = line(world(x, a), world(x, e), p.step);
        b.push(format!("pass-{i}"), pts.into_iter().map(|pt| Pose::new(pt, q)));
    }
    Ok(b.finish("ground-rows", &(o, p), p.step))
}

/// Fly a boustrophedon over the extent at constant altitude: lines run
/// along X at `line_spacing` intervals in Y, alternating direction. The
/// sensor looks straight down (sensor X) with its fan across track.
///
/// Segments are labelled `line-<i>` and `connector-<i>`.
pub fn traj_aerial_grid(p: &AerialParams) -> Result<Trajectory> {
    positive("step", p.step)?;
    positive("line_spacing", p.line_spacing)?;
    positive("altitude", p.altitude)?;
    if !p.extent.is_valid() {
        return Err(Error::config("aerial extent must be a non-empty rectangle"));
    }
    let e = p.extent;
    let lines = (e.height() / p.line_spacing + EPS).floor() as usize + 1;
    let at = |x: f64, y: f64| Point3::new(x, y, p.altitude);
    let mut b = Builder::new();
    for i in 0..lines {
        let y = e.min_y + i as f64 * p.line_spacing;
        let forward = i % 2 == 0;
        let (a, z) = if forward { (e.min_x, e.max_x) } else { (e.max_x, e.min_x) };
        if i > 0 {
            let last = b.poses.last().unwrap().position;
            let mut pts = line(last, at(a, y), p.step);
            pts.remove(0);
            pts.pop();
            let q = frame(-Vector3::z(), Vector3::y());
            b.push(format!("connector-{i}"), pts.into_iter().map(|pt| Pose::new(pt, q)));
        }
        let dir = if forward { Vector3::x() } else { -Vector3::x() };
        let q = frame(-Vector3::z(), dir);
        b.push(format!("line-{i}"), line(at(a, y), at(z, y), p.step).into_iter().map(|pt| Pose::new(pt, q)));
    }
    Ok(b.finish("aerial-grid", p, p.step))
}

/// Check that an aerial trajectory clears the top of a stand.
pub fn check_altitude(p: &AerialParams, canopy_top: f64) -> Result<()> {
    if p.altitude > canopy_top {
        Ok(())
    } else {
        Err(Error::config(format!(
            "altitude {} m does not clear the canopy top at {canopy_top:.2} m",
            p.altitude
        )))
    }
}

/// World-frame origin and unit direction of one scan line at a pose.
#[inline]
pub fn posed_line(pose: &Pose, line: &ScanLine) -> (Point3<f64>, Vector3<f64>) {
    (pose.position, pose.orientation * line.direction)
}

/// A sensor sample placed in the world.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PosedSample {
    pub scanline_id: u32,
    pub range: f64,
    pub position: Point3<f64>,
}

/// Every sample of the shape moved to the pose, grouped by scan line in
/// shape order and by increasing range within a line.
pub fn apply_pose(shape: &SensorShape, pose: &Pose) -> Vec<PosedSample> {
    let mut out = Vec::with_capacity(shape.sample_count());
    for line in shape.lines() {
        let (o, d) = posed_line(pose, line);
        for &t in shape.ranges() {
            out.push(PosedSample {
                scanline_id: line.id,
                range: t,
                position: o + d * t,
            });
        }
    }
    out
}

#[derive(Serialize, Deserialize)]
struct PoseRecord {
    x: f64,
    y: f64,
    z: f64,
    qw: f64,
    qx: f64,
    qy: f64,
    qz: f64,
}

pub fn write_trajectory(path: &Path, traj: &Trajectory) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(std::io::BufWriter::new(file));
    let io = |e: csv::Error| Error::io(path, e.into());
    if traj.poses.is_empty() {
        w.write_record(CSV_HEADER.split(',')).map_err(io)?;
    }
    for p in &traj.poses {
        let q = p.orientation.quaternion();
        w.serialize(PoseRecord {
            x: p.position.x,
            y: p.position.y,
            z: p.position.z,
            qw: q.w,
            qx: q.i,
            qy: q.j,
            qz: q.k,
        })
        .map_err(io)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Read a pose CSV. Quaternions within 1e-6 of unit norm are renormalised;
/// anything further off is rejected.
pub fn read_trajectory(path: &Path) -> Result<Trajectory> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = csv::Reader::from_reader(std::io::BufReader::new(file));
    let header = r.headers().map_err(|e| Error::parse(path, e.to_string()))?;
    if header.iter().collect::<Vec<_>>().join(",") != CSV_HEADER {
        return Err(Error::parse(path, format!("expected header `{CSV_HEADER}`")));
    }
    let mut poses = Vec::new();
    for (row, rec) in r.deserialize::<PoseRecord>().enumerate() {
        let rec = rec.map_err(|e| Error::parse(path, e.to_string()))?;
        let q = nalgebra::Quaternion::new(rec.qw, rec.qx, rec.qy, rec.qz);
        let pos = Point3::new(rec.x, rec.y, rec.z);
        if !((q.norm() - 1.0).abs() <= 1e-6 && pos.iter().all(|v| v.is_finite())) {
            return Err(Error::parse(path, format!("row {}: pose is not finite with a unit quaternion", row + 1)));
        }
        poses.push(Pose::new(pos, UnitQuaternion::from_quaternion(q)));
    }
    let n = poses.len();
    Ok(Trajectory {
        poses,
        meta: TrajectoryMeta {
            generator: "imported".into(),
            params: serde_json::json!({ "file": path.display().to_string() }),
            step: None,
            segments: vec![Segment {
                label: "imported".into(),
                start: 0,
                end: n,
            }],
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stand::OrchardParams;

    fn max_gap(t: &Trajectory) -> f64 {
        t.poses
            .windows(2)
            .map(|w| (w[1].position - w[0].position).norm())
            .fold(0.0, f64::max)
    }

    fn unit_norms(t: &Trajectory) -> bool {
        t.poses.iter().all(|p| (p.orientation.quaternion().norm() - 1.0).abs() < 1e-9)
    }

    fn orchard(rows: usize, per_row: usize) -> StandLayout {
        StandLayout::Orchard(OrchardParams {
            rows,
            trees_per_row: per_row,
            tree_spacing: 6.0,
            row_spacing: 10.0,
            row_azimuth: 0.0,
            definition: "avocado".into(),
            seed: 1,
        })
    }

    #[test]
    fn eight_pose_wide_circle() {
        let p = HandheldParams {
            step: TAU * 7.0 / 8.0,
            r_close: 2.5,
            ..Default::default()
        };
        let t = traj_handheld_loop(&p).unwrap();
        let wide = t.segment("wide").unwrap();
        assert_eq!(wide.len(), 8);
        for (k, pose) in wide.iter().enumerate() {
            let d = pose.position.coords.xy();
            assert!((d.norm() - 7.0).abs() < 1e-12);
            let ang = d.y.atan2(d.x).rem_euclid(TAU);
            assert!((ang - k as f64 * TAU / 8.0).abs() < 1e-9 || (k == 0 && ang > TAU - 1e-9));
        }
    }

    #[test]
    fn handheld_defaults_keep_step_and_close_loops() {
        let p = HandheldParams::default();
        let t = traj_handheld_loop(&p).unwrap();
        assert!(max_gap(&t) <= p.step + 1e-12);
        assert!(unit_norms(&t));
        for label in ["wide", "close"] {
            let s = t.segment(label).unwrap();
            assert!((s[0].position - s[s.len() - 1].position).norm() <= p.step);
            assert!(s.iter().all(|q| (q.position.z - 1.5).abs() < 1e-12));
        }
        let close = t.segment("close").unwrap();
        assert!(close.iter().all(|q| (q.position.coords.xy().norm() - 2.5).abs() < 1e-12));
    }

    #[test]
    fn no_oscillation_faces_target_axis() {
        let p = HandheldParams {
            target: [1.0, -2.0, 0.5],
            osc_amp_deg: 0.0,
            ..Default::default()
        };
        let t = traj_handheld_loop(&p).unwrap();
        for pose in &t.poses {
            let f = pose.forward();
            let to = Vector3::new(1.0 - pose.position.x, -2.0 - pose.position.y, 0.0);
            assert!(f.z.abs() < 1e-12);
            assert!((f.x * to.y - f.y * to.x).abs() < 1e-9 && f.xy().dot(&to.xy()) > 0.0);
        }
    }

    #[test]
    fn oscillation_envelope() {
        let p = HandheldParams {
            osc_amp_deg: 45.0,
            osc_period_m: 1.0,
            ..Default::default()
        };
        let t = traj_handheld_loop(&p).unwrap();
        let pitches: Vec<f64> = t.poses.iter().map(|q| q.orientation.euler_angles().1.to_degrees()).collect();
        let lo = pitches.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = pitches.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!(lo < -44.5 && lo >= -45.0 - 1e-9, "{lo}");
        assert!(hi > 44.5 && hi <= 45.0 + 1e-9, "{hi}");
    }

    #[test]
    fn handheld_rejects_bad_radii() {
        let p = HandheldParams {
            r_wide: 2.0,
            r_close: 3.0,
            ..Default::default()
        };
        assert!(matches!(traj_handheld_loop(&p), Err(Error::Config(_))));
        let p = HandheldParams {
            step: 0.0,
            ..Default::default()
        };
        assert!(traj_handheld_loop(&p).is_err());
    }

    #[test]
    fn ground_pass_offsets() {
        let layout = orchard(2, 5);
        let t = traj_ground_rows(&layout, &GroundParams::default()).unwrap();
        // first row sits at x = -5 after centring
        let xs: Vec<f64> = (0..3).map(|i| t.segment(&format!("pass-{i}")).unwrap()[0].position.x + 5.0).collect();
        for (x, want) in xs.iter().zip([-5.0, 5.0, 15.0]) {
            assert!((x - want).abs() < 1e-9);
        }
        assert!(t.segment("pass-3").is_none());
        assert!(max_gap(&t) <= 0.1 + 1e-12);
        assert!(t.poses.iter().all(|p| p.position.z == 1.8));
        assert!(unit_norms(&t));
    }

    #[test]
    fn ground_pass_pose_count_and_orientation() {
        // 5 trees at 6 m plus no margin gives a 24 m pass
        let layout = orchard(1, 5);
        let p = GroundParams {
            step: 1.0,
            margin: 0.0,
            ..Default::default()
        };
        let t = traj_ground_rows(&layout, &p).unwrap();
        let a = t.segment("pass-0").unwrap();
        let b = t.segment("pass-1").unwrap();
        assert_eq!(a.len(), 25);
        assert!(a.iter().all(|q| q.orientation == a[0].orientation));
        let ya = a[0].orientation * Vector3::y();
        let yb = b[0].orientation * Vector3::y();
        assert!((ya + yb).norm() < 1e-12);
        assert!((a[0].forward() - Vector3::z()).norm() < 1e-12);
        // fan plane normal is the direction of travel
        let travel = (a[1].position - a[0].position).normalize();
        assert!((ya - travel).norm() < 1e-12);
    }

    #[test]
    fn ground_rows_rotate_with_azimuth() {
        let mut layout = orchard(2, 3);
        if let StandLayout::Orchard(o) = &mut layout {
            o.row_azimuth = 90.0;
        }
        let t = traj_ground_rows(&layout, &GroundParams::default()).unwrap();
        let a = t.segment("pass-0").unwrap();
        let travel = a[a.len() - 1].position - a[0].position;
        assert!(travel.y.abs() < 1e-9 && travel.x > 0.0);
    }

    #[test]
    fn ground_rows_need_orchard() {
        let forest = crate::presets::stand("forest-min6", "avocado", 0).unwrap();
        assert!(matches!(traj_ground_rows(&forest, &GroundParams::default()), Err(Error::Config(_))));
    }

    #[test]
    fn aerial_lines() {
        let p = AerialParams {
            extent: Extent::new(0.0, 0.0, 30.0, 30.0),
            ..Default::default()
        };
        let t = traj_aerial_grid(&p).unwrap();
        let lines: Vec<_> = (0..4).map(|i| t.segment(&format!("line-{i}")).unwrap()).collect();
        assert!(t.segment("line-4").is_none());
        assert!(t.poses.iter().all(|q| q.position.z == 30.0));
        for (i, l) in lines.iter().enumerate() {
            assert!(l.iter().all(|q| (q.forward() + Vector3::z()).norm() < 1e-12));
            let heading = l[0].orientation * Vector3::y();
            let want = if i % 2 == 0 { 1.0 } else { -1.0 };
            assert!((heading.x - want).abs() < 1e-12);
            assert!((l[0].position.y - 10.0 * i as f64).abs() < 1e-12);
        }
        assert!(max_gap(&t) <= 0.5 + 1e-12);
        assert!(check_altitude(&p, 12.0).is_ok());
        assert!(check_altitude(&p, 31.0).is_err());
    }

    #[test]
    fn identity_pose() {
        let shape = SensorShape::single_plane(180.0, 45.0, 2.0, 0.5).unwrap();
        let pose = Pose::new(Point3::origin(), UnitQuaternion::identity());
        let s = apply_pose(&shape, &pose);
        assert_eq!(s.len(), shape.sample_count());
        for (k, ps) in s.iter().enumerate() {
            let line = &shape.lines()[k / 4];
            assert_eq!(ps.scanline_id, line.id);
            assert_eq!(ps.position.coords, line.direction * ps.range);
        }
    }

    #[test]
    fn yaw_quarter_turn() {
        let shape = SensorShape::single_plane(180.0, 90.0, 1.0, 1.0).unwrap();
        let pose = Pose::new(Point3::new(1.0, 2.0, 3.0), UnitQuaternion::from_euler_angles(0.0, 0.0, std::f64::consts::FRAC_PI_2));
        let s = apply_pose(&shape, &pose);
        // middle beam points along +X in the sensor frame
        assert!((s[1].position - Point3::new(1.0, 3.0, 3.0)).norm() < 1e-12);
        for ps in &s {
            assert!(((ps.position - pose.position).norm() - ps.range).abs() < 1e-9);
        }
    }

    #[test]
    fn csv_round_trip() {
        let t = traj_handheld_loop(&HandheldParams::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        write_trajectory(&path, &t).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("x,y,z,qw,qx,qy,qz\n"));
        let back = read_trajectory(&path).unwrap();
        assert_eq!(back.poses.len(), t.poses.len());
        for (a, b) in back.poses.iter().zip(&t.poses) {
            assert_eq!(a.position, b.position);
            assert!(a.orientation.angle_to(&b.orientation) < 1e-12);
        }
    }

    #[test]
    fn csv_rejects_non_unit_quaternion() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        std::fs::write(&path, "x,y,z,qw,qx,qy,qz\n0,0,0,2,0,0,0\n").unwrap();
        assert!(matches!(read_trajectory(&path), Err(Error::Parse { .. })));
        std::fs::write(&path, "a,b\n1,2\n").unwrap();
        assert!(matches!(read_trajectory(&path), Err(Error::Parse { .. })));
    }
}
