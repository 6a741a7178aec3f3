//! Tree point clouds: a recursive tapered-cylinder branching model, and
//! area-weighted sampling of imported triangle meshes.

pub mod mesh;
pub mod obj;
mod model;
mod surface;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use mesh::{sample_mesh, TriangleMesh};
pub use model::generate_tree;

/// A value drawn per element as `mean + jitter * u`, `u ~ U(-1, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Jittered {
    pub mean: f64,
    pub jitter: f64,
}

impl Jittered {
    pub const fn new(mean: f64, jitter: f64) -> Self {
        Self { mean, jitter }
    }

    pub const fn fixed(mean: f64) -> Self {
        Self { mean, jitter: 0.0 }
    }

    pub fn sample(&self, rng: &mut impl rand::Rng) -> f64 {
        if self.jitter == 0.0 {
            self.mean
        } else {
            self.mean + self.jitter * rng.random_range(-1.0..=1.0)
        }
    }

    fn lo(&self) -> f64 {
        self.mean - self.jitter.abs()
    }

    fn hi(&self) -> f64 {
        self.mean + self.jitter.abs()
    }
}

// Accept `{ mean = 1.0, jitter = 0.1 }`, `[1.0, 0.1]` or a bare number.
impl<'de> Deserialize<'de> for Jittered {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Table { mean: f64, #[serde(default)] jitter: f64 },
            Pair(f64, f64),
            Plain(f64),
        }
        Ok(match Repr::deserialize(d)? {
            Repr::Table { mean, jitter } | Repr::Pair(mean, jitter) => Jittered { mean, jitter },
            Repr::Plain(mean) => Jittered::fixed(mean),
        })
    }
}

/// Shape parameters for every stem at one depth of the branching hierarchy
/// (index 0 describes the trunk).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelParams {
    /// Number of child stems spawned along each stem of this level.
    pub child_count: Jittered,
    /// Stem length as a fraction of its parent's length. Ignored for the trunk.
    pub length_ratio: Jittered,
    /// Base radius as a fraction of the parent radius at the attachment point.
    /// Ignored for the trunk.
    pub base_radius_ratio: Jittered,
    /// Tip radius over base radius.
    pub taper: Jittered,
    /// Angle between the stem and its parent's axis, degrees. For the trunk,
    /// the tilt away from vertical.
    pub down_angle: Jittered,
    /// Total bend along the stem, degrees.
    pub curvature: Jittered,
    /// Children of this stem attach over parent fractions
    /// `[mean - jitter, mean + jitter]`.
    pub start_fraction: Jittered,
}

/// Declarative description of a tree species.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeDefinition {
    #[serde(default)]
    pub name: String,
    /// Branch levels including the trunk, 1..=4.
    pub levels: u8,
    pub trunk_height: f64,
    pub trunk_base_radius: f64,
    /// One entry per level, trunk first.
    pub level_params: Vec<LevelParams>,
    /// Leaf disks per terminal stem; zero disables foliage.
    #[serde(default)]
    pub leaves_per_tip: u32,
    #[serde(default)]
    pub leaf_radius: f64,
    /// Target surface sampling spacing, metres.
    pub sample_spacing: f64,
}

impl TreeDefinition {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::config(format!("tree definition `{}`: {m}", self.name)));
        if !(1..=4).contains(&self.levels) {
            return bad(format!("levels must be in 1..=4, got {}", self.levels));
        }
        if self.level_params.len() != self.levels as usize {
            return bad(format!(
                "expected {} level_params entries, got {}",
                self.levels,
                self.level_params.len()
            ));
        }
        for (name, v) in [
            ("trunk_height", self.trunk_height),
            ("trunk_base_radius", self.trunk_base_radius),
            ("sample_spacing", self.sample_spacing),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        if self.leaves_per_tip > 0 && !(self.leaf_radius > 0.0 && self.leaf_radius.is_finite()) {
            return bad(format!("leaf_radius must be positive, got {}", self.leaf_radius));
        }
        for (depth, p) in self.level_params.iter().enumerate() {
            let ctx = |field: &str| format!("level {depth} {field}");
            let all = [
                p.child_count,
                p.length_ratio,
                p.base_radius_ratio,
                p.taper,
                p.down_angle,
                p.curvature,
                p.start_fraction,
            ];
            if all.iter().any(|j| !j.mean.is_finite() || !j.jitter.is_finite() || j.jitter < 0.0) {
                return bad(format!("level {depth}: values must be finite with non-negative jitter"));
            }
            if p.child_count.lo() < 0.0 {
                return bad(ctx("child_count must not go below zero"));
            }
            let ratios = [("taper", p.taper)];
            let child_ratios = [("length_ratio", p.length_ratio), ("base_radius_ratio", p.base_radius_ratio)];
            for (name, j) in ratios.iter().chain(if depth > 0 { &child_ratios[..] } else { &[] }) {
                if !(j.lo() > 0.0 && j.hi() <= 1.0) {
                    return bad(ctx(&format!("{name} must stay within (0, 1]")));
                }
            }
            if !(p.down_angle.lo() >= 0.0 && p.down_angle.hi() < 180.0) {
                return bad(ctx("down_angle must stay within [0, 180)"));
            }
            if !(p.curvature.lo() > -180.0 && p.curvature.hi() < 180.0) {
                return bad(ctx("curvature must stay within (-180, 180)"));
            }
            if !(p.start_fraction.lo() >= 0.0 && p.start_fraction.hi() <= 1.0) {
                return bad(ctx("start_fraction must stay within [0, 1]"));
            }
        }
        Ok(())
    }

    /// Parse a definition from TOML text.
    pub fn from_toml(text: &str) -> Result<Self> {
        let def: TreeDefinition = toml::from_str(text).map_err(|e| Error::config(e.to_string()))?;
        def.validate()?;
        Ok(def)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut def: TreeDefinition =
            toml::from_str(&text).map_err(|e| Error::parse(path, e.message().to_owned()))?;
        if def.name.is_empty() {
            def.name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("tree").to_owned();
        }
        def.validate()?;
        Ok(def)
    }
}

/// Surface sampling spacing at which a beam with the given search radius is
/// guaranteed to find a sample wherever it crosses the surface.
pub fn required_spacing(search_radius: f64, safety: f64) -> Result<f64> {
    if !(search_radius > 0.0) {
        return Err(Error::config(format!("search radius must be positive, got {search_radius}")));
    }
    if !(safety >= 1.0) {
        return Err(Error::config(format!("safety factor must be at least 1, got {safety}")));
    }
    Ok(search_radius / (2.0 * safety))
}
