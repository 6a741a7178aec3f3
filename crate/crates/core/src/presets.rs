//! Bundled tree, stand, sensor and trajectory presets.
//!
//! The tree shapes are coarse stand-ins chosen to match qualitative
//! descriptions: `avocado` has a rounded, fairly dense crown on a short
//! trunk; `macadamia` is much wider with long, flat-lying limbs; `aspen`
//! carries its foliage high on a tall, clear stem.

use crate::error::{Error, Result};
use crate::sensor::SensorShape;
use crate::stand::{Extent, ForestParams, OrchardParams, StandLayout};
use crate::trajectory::{AerialParams, GroundParams, HandheldParams};
use crate::treegen::{Jittered, LevelParams, TreeDefinition};

pub const TREE_PRESETS: [&str; 3] = ["avocado", "macadamia", "aspen"];
pub const STAND_PRESETS: [&str; 2] = ["orchard-6x10", "forest-min6"];
pub const SENSOR_PRESETS: [&str; 2] = ["plane-270", "puck-9beam"];
pub const TRAJECTORY_PRESETS: [&str; 3] = ["handheld-loop", "ground-rows", "aerial-grid"];

/// Default sensor error radius; surfaces are sampled at half of it.
pub const SEARCH_RADIUS: f64 = 0.02;
pub const NOISE_SIGMA: f64 = 0.02;
pub const SENSOR_RANGE: f64 = 15.0;

const J: fn(f64, f64) -> Jittered = Jittered::new;

fn level(
    child_count: Jittered,
    length_ratio: Jittered,
    base_radius_ratio: Jittered,
    taper: Jittered,
    down_angle: Jittered,
    curvature: Jittered,
    start_fraction: Jittered,
) -> LevelParams {
    LevelParams {
        child_count,
        length_ratio,
        base_radius_ratio,
        taper,
        down_angle,
        curvature,
        start_fraction,
    }
}

pub fn tree(name: &str) -> Result<TreeDefinition> {
    let one = Jittered::fixed(1.0);
    let def = match name {
        "avocado" => TreeDefinition {
            name: name.into(),
            levels: 4,
            trunk_height: 3.4,
            trunk_base_radius: 0.14,
            level_params: vec![
                level(J(9.0, 2.0), one, one, J(0.35, 0.05), J(2.0, 2.0), J(0.0, 8.0), J(0.6, 0.35)),
                level(J(6.0, 1.0), J(0.62, 0.1), J(0.5, 0.05), J(0.3, 0.05), J(55.0, 10.0), J(20.0, 10.0), J(0.6, 0.35)),
                level(J(4.0, 1.0), J(0.5, 0.1), J(0.5, 0.05), J(0.4, 0.05), J(45.0, 10.0), J(15.0, 10.0), J(0.6, 0.35)),
                level(J(0.0, 0.0), J(0.5, 0.1), J(0.5, 0.05), J(0.5, 0.1), J(40.0, 10.0), J(10.0, 5.0), J(0.5, 0.0)),
            ],
            leaves_per_tip: 16,
            leaf_radius: 0.05,
            sample_spacing: 0.01,
        },
        "macadamia" => TreeDefinition {
            name: name.into(),
            levels: 4,
            trunk_height: 2.8,
            trunk_base_radius: 0.16,
            level_params: vec![
                level(J(11.0, 2.0), one, one, J(0.35, 0.05), J(2.0, 2.0), J(0.0, 6.0), J(0.55, 0.35)),
                level(J(7.0, 1.0), J(0.95, 0.05), J(0.5, 0.05), J(0.3, 0.05), J(72.0, 8.0), J(15.0, 10.0), J(0.6, 0.35)),
                level(J(5.0, 1.0), J(0.45, 0.1), J(0.5, 0.05), J(0.4, 0.05), J(45.0, 10.0), J(15.0, 10.0), J(0.6, 0.35)),
                level(J(0.0, 0.0), J(0.5, 0.1), J(0.5, 0.05), J(0.5, 0.1), J(40.0, 10.0), J(10.0, 5.0), J(0.5, 0.0)),
            ],
            leaves_per_tip: 18,
            leaf_radius: 0.045,
            sample_spacing: 0.01,
        },
        "aspen" => TreeDefinition {
            name: name.into(),
            levels: 3,
            trunk_height: 9.0,
            trunk_base_radius: 0.15,
            level_params: vec![
                level(J(28.0, 4.0), one, one, J(0.25, 0.05), J(1.0, 1.0), J(0.0, 5.0), J(0.76, 0.2)),
                level(J(7.0, 2.0), J(0.24, 0.05), J(0.45, 0.05), J(0.3, 0.05), J(50.0, 12.0), J(15.0, 10.0), J(0.6, 0.35)),
                level(J(0.0, 0.0), J(0.5, 0.1), J(0.5, 0.05), J(0.5, 0.1), J(45.0, 10.0), J(10.0, 5.0), J(0.5, 0.0)),
            ],
            leaves_per_tip: 14,
            leaf_radius: 0.035,
            sample_spacing: 0.01,
        },
        _ => return Err(unknown("tree", name, &TREE_PRESETS)),
    };
    Ok(def)
}

/// Stand presets. Orchards are 5 rows of 5 trees unless resized.
pub fn stand(name: &str, definition: &str, seed: u64) -> Result<StandLayout> {
    match name {
        "orchard-6x10" => Ok(StandLayout::Orchard(OrchardParams {
            rows: 5,
            trees_per_row: 5,
            tree_spacing: 6.0,
            row_spacing: 10.0,
            row_azimuth: 0.0,
            definition: definition.into(),
            seed,
        })),
        "forest-min6" => Ok(StandLayout::Forest(ForestParams {
            extent: Extent::new(-15.0, -15.0, 15.0, 15.0),
            tree_count: 16,
            min_spacing: 6.0,
            definition: definition.into(),
            seed,
            max_attempts: None,
        })),
        _ => Err(unknown("stand", name, &STAND_PRESETS)),
    }
}

/// Sensor presets: a 270° single-plane scanner at 0.675° resolution, and a
/// nine-plane variant spanning 30° across planes. Both nominally reach
/// [`SENSOR_RANGE`].
pub fn sensor(name: &str, range_step: f64, max_range: f64) -> Result<SensorShape> {
    match name {
        "plane-270" => SensorShape::single_plane(270.0, 0.675, max_range, range_step),
        "puck-9beam" => SensorShape::multi_plane(270.0, 0.675, max_range, range_step, 9, 30.0),
        _ => Err(unknown("sensor", name, &SENSOR_PRESETS)),
    }
}

pub fn handheld() -> HandheldParams {
    HandheldParams::default()
}

pub fn ground() -> GroundParams {
    GroundParams::default()
}

pub fn aerial(extent: Extent) -> AerialParams {
    AerialParams {
        extent,
        ..AerialParams::default()
    }
}

fn unknown(kind: &str, name: &str, known: &[&str]) -> Error {
    Error::config(format!("unknown {kind} preset `{name}` (known: {})", known.join(", ")))
}
