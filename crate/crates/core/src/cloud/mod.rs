//! Labelled point clouds, the radius-query index and cloud file formats.

mod index;
pub mod io;

use nalgebra::Point3;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub use index::{Neighbour, SpatialIndex};

/// Branch level of a point: trunk, first and second order branches, leaf.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
#[repr(u8)]
pub enum Level {
    Trunk = 0,
    Branch = 1,
    Twig = 2,
    Leaf = 3,
}

impl Level {
    pub const ALL: [Level; 4] = [Level::Trunk, Level::Branch, Level::Twig, Level::Leaf];

    /// Wood level for a stem at `depth` below the trunk. Orders deeper than
    /// two share the second-order label since level 3 is reserved for leaves.
    pub fn for_stem_depth(depth: usize) -> Level {
        match depth {
            0 => Level::Trunk,
            1 => Level::Branch,
            _ => Level::Twig,
        }
    }
}

impl TryFrom<u8> for Level {
    type Error = String;

    fn try_from(v: u8) -> std::result::Result<Self, Self::Error> {
        match v {
            0 => Ok(Level::Trunk),
            1 => Ok(Level::Branch),
            2 => Ok(Level::Twig),
            3 => Ok(Level::Leaf),
            _ => Err(format!("level {v} is outside 0..=3")),
        }
    }
}

impl From<Level> for u8 {
    fn from(l: Level) -> u8 {
        l as u8
    }
}

/// Scan provenance carried by simulated returns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ScanTag {
    pub scanline_id: u32,
    pub pose_index: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabelledPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    /// Seed of the tree this point was sampled from.
    pub tree_id: u32,
    pub level: Level,
    /// Present on scan output only.
    pub scan: Option<ScanTag>,
}

impl LabelledPoint {
    pub fn new(position: [f64; 3], tree_id: u32, level: Level) -> Self {
        Self {
            x: position[0],
            y: position[1],
            z: position[2],
            tree_id,
            level,
            scan: None,
        }
    }

    #[inline]
    pub fn xyz(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn position(&self) -> Point3<f64> {
        Point3::new(self.x, self.y, self.z)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

/// Squared Euclidean distance. Every radius comparison in the crate goes
/// through this so index queries and exhaustive scans agree bit for bit.
#[inline]
pub fn dist2(a: [f64; 3], b: [f64; 3]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    dx * dx + dy * dy + dz * dz
}

/// Where a cloud came from.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    /// Pipeline stage that produced the cloud (`tree`, `stand`, `scan`, ...).
    pub stage: String,
    pub seed: u64,
    /// Hex digest of the parameters that produced the cloud.
    pub params_hash: String,
    /// Surface sampling spacing of a source cloud, if known.
    pub sample_spacing: Option<f64>,
}

impl Provenance {
    pub fn new(stage: &str, seed: u64, params: &impl Serialize) -> Self {
        Self {
            stage: stage.to_owned(),
            seed,
            params_hash: params_hash(params),
            sample_spacing: None,
        }
    }
}

/// First 16 hex digits of the SHA-256 of the JSON encoding of `params`.
pub fn params_hash(params: &impl Serialize) -> String {
    let json = serde_json::to_vec(params).expect("parameters serialise to JSON");
    hex::encode(&Sha256::digest(&json)[..8])
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LabelledCloud {
    pub points: Vec<LabelledPoint>,
    pub provenance: Provenance,
}

impl LabelledCloud {
    pub fn new(points: Vec<LabelledPoint>, provenance: Provenance) -> Self {
        Self { points, provenance }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Checks the per-point invariants: finite coordinates (levels and the
    /// both-or-neither scan tag are enforced by the types).
    pub fn validate(&self) -> Result<()> {
        match self.points.iter().position(|p| !p.is_finite()) {
            Some(i) => Err(Error::config(format!("point {i} has a non-finite coordinate"))),
            None => Ok(()),
        }
    }

    /// Axis-aligned bounds as (min, max), or `None` for an empty cloud.
    pub fn bounds(&self) -> Option<([f64; 3], [f64; 3])> {
        let first = self.points.first()?.xyz();
        Some(self.points.iter().fold((first, first), |(mut lo, mut hi), p| {
            for (k, v) in p.xyz().into_iter().enumerate() {
                lo[k] = lo[k].min(v);
                hi[k] = hi[k].max(v);
            }
            (lo, hi)
        }))
    }
}
