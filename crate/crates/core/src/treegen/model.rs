use std::f64::consts::TAU;

use nalgebra::{Unit, UnitQuaternion, Vector3};
use rand::Rng;
use serde::Serialize;

use super::surface::{disk, frame, frustum};
use super::TreeDefinition;
use crate::cloud::{LabelledCloud, LabelledPoint, Level, Provenance};
use crate::error::Result;
use crate::rng;

const LEAF_STREAM: u64 = 1 << 32;
const GOLDEN_ANGLE: f64 = 2.399_963_229_728_653;

/// Where a child stem leaves its parent.
struct Attachment {
    origin: Vector3<f64>,
    parent_axis: Vector3<f64>,
    parent_length: f64,
    parent_radius: f64,
    /// Nominal azimuth around the parent axis, radians.
    azimuth: f64,
    /// Position within the parent's attachment range, 0 (lowest) to 1.
    rank: f64,
}

struct Stem {
    nodes: Vec<Vector3<f64>>,
    length: f64,
    base_radius: f64,
    tip_radius: f64,
}

impl Stem {
    fn radius_at(&self, t: f64) -> f64 {
        self.base_radius + (self.tip_radius - self.base_radius) * t
    }

    /// Point and local axis direction at arc fraction `t`.
    fn at(&self, t: f64) -> (Vector3<f64>, Vector3<f64>) {
        let segs = self.nodes.len() - 1;
        let x = (t.clamp(0.0, 1.0) * segs as f64).min(segs as f64 - 1e-12);
        let i = x.floor() as usize;
        let f = x - i as f64;
        let (a, b) = (self.nodes[i], self.nodes[i + 1]);
        (a + (b - a) * f, (b - a).normalize())
    }
}

/// Generate one tree rooted at the origin with +Z up. Every point carries
/// `tree_id = seed` and the level of the surface it was sampled from.
pub fn generate_tree(def: &TreeDefinition, seed: u32) -> Result<LabelledCloud> {
    def.validate()?;
    let mut points = Vec::new();
    let mut path = Vec::with_capacity(def.levels as usize);
    grow(def, seed, 0, &mut path, None, &mut points);

    #[derive(Serialize)]
    struct Params<'a> {
        definition: &'a TreeDefinition,
        seed: u32,
    }
    let mut provenance = Provenance::new("tree", seed as u64, &Params { definition: def, seed });
    provenance.sample_spacing = Some(def.sample_spacing);
    Ok(LabelledCloud::new(points, provenance))
}

fn grow(
    def: &TreeDefinition,
    seed: u32,
    depth: usize,
    path: &mut Vec<u64>,
    attach: Option<Attachment>,
    out: &mut Vec<LabelledPoint>,
) {
    let p = &def.level_params[depth];
    let mut rng = rng::stream(seed as u64, path);
    let spacing = def.sample_spacing;

    let (origin, dir, length, base_radius) = match &attach {
        None => {
            let tilt = p.down_angle.sample(&mut rng).to_radians();
            let az = rng.random_range(0.0..TAU);
            let dir = Vector3::new(tilt.sin() * az.cos(), tilt.sin() * az.sin(), tilt.cos());
            (Vector3::zeros(), dir, def.trunk_height, def.trunk_base_radius)
        }
        Some(a) => {
            let down = p.down_angle.sample(&mut rng).to_radians();
            let az = a.azimuth + rng.random_range(-0.25..0.25);
            let (u, v) = frame(&a.parent_axis);
            let radial = u * az.cos() + v * az.sin();
            let dir = (a.parent_axis * down.cos() + radial * down.sin()).normalize();
            let length = a.parent_length * p.length_ratio.sample(&mut rng) * (1.0 - 0.5 * a.rank);
            let radius = (a.parent_radius * p.base_radius_ratio.sample(&mut rng)).max(spacing * 0.25);
            (a.origin, dir, length, radius)
        }
    };
    let taper = p.taper.sample(&mut rng).clamp(1e-3, 1.0);
    let curvature = p.curvature.sample(&mut rng).to_radians();
    let bend_az = rng.random_range(0.0..TAU);

    let segments = if curvature.abs() < 1e-9 {
        1
    } else {
        ((curvature.abs().to_degrees() / 5.0).ceil() as usize).clamp(2, 16)
    };
    let (u, v) = frame(&dir);
    let bend_axis = Unit::new_normalize(u * bend_az.cos() + v * bend_az.sin());
    let step_rot = UnitQuaternion::from_axis_angle(&bend_axis, curvature / segments as f64);
    let seg_len = length / segments as f64;
    let mut nodes = Vec::with_capacity(segments + 1);
    nodes.push(origin);
    let mut d = dir;
    for _ in 0..segments {
        let next = *nodes.last().unwrap() + d * seg_len;
        nodes.push(next);
        d = step_rot * d;
    }
    let stem = Stem {
        nodes,
        length,
        base_radius,
        tip_radius: base_radius * taper,
    };

    let tree_id = seed;
    let level = Level::for_stem_depth(depth);
    let mut emit = |q: Vector3<f64>, level: Level| out.push(LabelledPoint::new([q.x, q.y, q.z], tree_id, level));
    for i in 0..segments {
        let (t0, t1) = (i as f64 / segments as f64, (i + 1) as f64 / segments as f64);
        frustum(
            stem.nodes[i],
            stem.nodes[i + 1],
            stem.radius_at(t0),
            stem.radius_at(t1),
            spacing,
            i + 1 == segments,
            &mut |q| emit(q, level),
        );
    }

    let terminal = depth + 1 == def.levels as usize;
    if terminal && def.leaves_per_tip > 0 {
        for j in 0..def.leaves_per_tip as u64 {
            path.push(LEAF_STREAM + j);
            let mut lrng = rng::stream(seed as u64, path);
            path.pop();
            let t = lrng.random_range(0.5..=1.0);
            let (centre, axis) = stem.at(t);
            let az = lrng.random_range(0.0..TAU);
            let (lu, lv) = frame(&axis);
            let radial = lu * az.cos() + lv * az.sin();
            let c = centre + radial * (stem.radius_at(t) + def.leaf_radius);
            let normal = random_unit(&mut lrng);
            disk(c, normal, def.leaf_radius, spacing, &mut |q| emit(q, Level::Leaf));
        }
    }

    if terminal {
        return;
    }
    let n_children = p.child_count.sample(&mut rng).round().max(0.0) as usize;
    let lo = (p.start_fraction.mean - p.start_fraction.jitter).max(0.0);
    let hi = (p.start_fraction.mean + p.start_fraction.jitter).min(1.0);
    let phase = rng.random_range(0.0..TAU);
    for i in 0..n_children {
        path.push(i as u64);
        let mut crng = rng::stream(seed as u64 ^ 0x5EED, path);
        let rank = (i as f64 + 0.5) / n_children as f64;
        let width = (hi - lo) / n_children as f64;
        let t = (lo + (hi - lo) * rank + width * crng.random_range(-0.5..0.5)).clamp(0.0, 1.0);
        let (origin, axis) = stem.at(t);
        let attach = Attachment {
            origin,
            parent_axis: axis,
            parent_length: stem.length,
            parent_radius: stem.radius_at(t),
            azimuth: phase + GOLDEN_ANGLE * i as f64,
            rank,
        };
        grow(def, seed, depth + 1, path, Some(attach), out);
        path.pop();
    }
}

fn random_unit(rng: &mut impl Rng) -> Vector3<f64> {
    let z: f64 = rng.random_range(-1.0..=1.0);
    let phi = rng.random_range(0.0..TAU);
    let s = (1.0 - z * z).max(0.0).sqrt();
    Vector3::new(s * phi.cos(), s * phi.sin(), z)
}

