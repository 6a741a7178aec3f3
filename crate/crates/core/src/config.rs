//! Pipeline configuration: one TOML file naming trees, the stand, sensors,
//! trajectories, scans and analysis settings.
//!
//! ```toml
//! seed = 7
//! output_dir = "out"
//! format = "ply"
//!
//! [trees.avocado]
//! kind = "preset"
//! name = "avocado"
//!
//! [stand]
//! kind = "orchard"
//! rows = 3
//! trees_per_row = 3
//! tree_spacing = 6.0
//! row_spacing = 10.0
//! definition = "avocado"
//!
//! [sensors.plane]
//! kind = "preset"
//! name = "plane-270"
//!
//! [trajectories.walk]
//! kind = "handheld_loop"
//!
//! [[scans]]
//! name = "handheld"
//! sensor = "plane"
//! trajectory = "walk"
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::DEFAULT_VOXEL_EDGE;
use crate::cloud::LabelledCloud;
use crate::error::{Error, Result};
use crate::presets;
use crate::rng;
use crate::scanner::ScanParams;
use crate::sensor::SensorShape;
use crate::stand::{Extent, StandLayout};
use crate::trajectory::{
    read_trajectory, traj_aerial_grid, traj_ground_rows, traj_handheld_loop, AerialParams, GroundParams,
    HandheldParams, Trajectory,
};
use crate::treegen::TreeDefinition;

const SCAN_STREAM: u64 = 0x5CA7;
const CONTROL_STREAM: u64 = 0xC047;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Cloud file format for outputs: `ply` or `csv`.
    #[serde(default = "default_format")]
    pub format: String,
    #[serde(default)]
    pub trees: BTreeMap<String, TreeSource>,
    pub stand: Option<StandConfig>,
    #[serde(default)]
    pub sensors: BTreeMap<String, SensorConfig>,
    #[serde(default)]
    pub trajectories: BTreeMap<String, TrajectoryConfig>,
    #[serde(default)]
    pub scans: Vec<ScanRun>,
    #[serde(default)]
    pub scan: ScanSettings,
    #[serde(default)]
    pub analysis: AnalysisSettings,
    #[serde(default)]
    pub control: ControlSettings,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_format() -> String {
    "ply".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TreeSource {
    Preset {
        name: String,
        sample_spacing: Option<f64>,
    },
    /// A tree definition TOML file, relative to the config file.
    File { path: PathBuf },
    Inline(TreeDefinition),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StandConfig {
    /// A bundled stand, optionally resized.
    Preset {
        preset: String,
        definition: String,
        rows: Option<usize>,
        trees_per_row: Option<usize>,
    },
    Layout(StandLayout),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SensorConfig {
    Preset {
        name: String,
        /// Defaults to the scan search radius.
        range_step: Option<f64>,
        max_range: Option<f64>,
    },
    SinglePlane {
        fov_deg: f64,
        angular_res_deg: f64,
        max_range: f64,
        range_step: Option<f64>,
    },
    MultiPlane {
        fov_deg: f64,
        angular_res_deg: f64,
        max_range: f64,
        range_step: Option<f64>,
        n_planes: usize,
        vertical_fov_deg: f64,
    },
    Spherical {
        res_az_deg: f64,
        res_el_deg: f64,
        max_range: f64,
        range_step: Option<f64>,
    },
}

impl SensorConfig {
    pub fn build(&self, search_radius: f64) -> Result<SensorShape> {
        let step = |s: &Option<f64>| s.unwrap_or(search_radius);
        match self {
            SensorConfig::Preset {
                name,
                range_step,
                max_range,
            } => presets::sensor(name, step(range_step), max_range.unwrap_or(presets::SENSOR_RANGE)),
            SensorConfig::SinglePlane {
                fov_deg,
                angular_res_deg,
                max_range,
                range_step,
            } => SensorShape::single_plane(*fov_deg, *angular_res_deg, *max_range, step(range_step)),
            SensorConfig::MultiPlane {
                fov_deg,
                angular_res_deg,
                max_range,
                range_step,
                n_planes,
                vertical_fov_deg,
            } => SensorShape::multi_plane(
                *fov_deg,
                *angular_res_deg,
                *max_range,
                step(range_step),
                *n_planes,
                *vertical_fov_deg,
            ),
            SensorConfig::Spherical {
                res_az_deg,
                res_el_deg,
                max_range,
                range_step,
            } => SensorShape::spherical(*res_az_deg, *res_el_deg, *max_range, step(range_step)),
        }
    }
}

/// Aerial grid settings; without an explicit extent the grid covers the
/// stand's footprint grown by `margin`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AerialConfig {
    pub extent: Option<Extent>,
    pub margin: f64,
    pub altitude: f64,
    pub line_spacing: f64,
    pub step: f64,
}

impl Default for AerialConfig {
    fn default() -> Self {
        let d = AerialParams::default();
        Self {
            extent: None,
            margin: 5.0,
            altitude: d.altitude,
            line_spacing: d.line_spacing,
            step: d.step,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TrajectoryConfig {
    HandheldLoop(HandheldParams),
    GroundRows(GroundParams),
    AerialGrid(AerialConfig),
    /// A pose CSV, relative to the config file.
    File { path: PathBuf },
}

impl TrajectoryConfig {
    /// Build the trajectory. The stand layout is needed by ground rows and
    /// the stand cloud by aerial grids without an explicit extent.
    pub fn build(&self, layout: Option<&StandLayout>, stand: Option<&LabelledCloud>, base: &Path) -> Result<Trajectory> {
        match self {
            TrajectoryConfig::HandheldLoop(p) => traj_handheld_loop(p),
            TrajectoryConfig::GroundRows(p) => {
                let layout = layout.ok_or_else(|| Error::config("ground-rows needs a stand layout"))?;
                traj_ground_rows(layout, p)
            }
            TrajectoryConfig::AerialGrid(a) => traj_aerial_grid(&self.aerial_params(a, stand)?),
            TrajectoryConfig::File { path } => read_trajectory(&base.join(path)),
        }
    }

    fn aerial_params(&self, a: &AerialConfig, stand: Option<&LabelledCloud>) -> Result<AerialParams> {
        let (extent, top) = match (a.extent, stand.and_then(|s| s.bounds())) {
            (Some(e), b) => (e, b.map(|(_, hi)| hi[2])),
            (None, Some((lo, hi))) => (Extent::new(lo[0], lo[1], hi[0], hi[1]).grown(a.margin), Some(hi[2])),
            (None, None) => return Err(Error::config("aerial-grid needs an extent or a stand to cover")),
        };
        let p = AerialParams {
            extent,
            altitude: a.altitude,
            line_spacing: a.line_spacing,
            step: a.step,
        };
        if let Some(top) = top {
            crate::trajectory::check_altitude(&p, top)?;
        }
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanRun {
    pub name: String,
    pub sensor: String,
    pub trajectory: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanSettings {
    pub search_radius: f64,
    pub noise_sigma: f64,
    pub dedupe: bool,
}

impl Default for ScanSettings {
    fn default() -> Self {
        Self {
            search_radius: presets::SEARCH_RADIUS,
            noise_sigma: presets::NOISE_SIGMA,
            dedupe: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisSettings {
    pub voxel_edge: f64,
    /// Defaults to twice the scan search radius.
    pub match_radius: Option<f64>,
    pub profile_bins: usize,
}

impl Default for AnalysisSettings {
    fn default() -> Self {
        Self {
            voxel_edge: DEFAULT_VOXEL_EDGE,
            match_radius: None,
            profile_bins: 30,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControlSettings {
    /// Control size; defaults to the point count of the first scan.
    pub target_count: Option<usize>,
}

impl PipelineConfig {
    pub fn from_toml(text: &str, path: &Path) -> Result<Self> {
        let cfg: PipelineConfig = toml::from_str(text).map_err(|e| Error::parse(path, e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text, path)
    }

    /// Check that every name a scan or stand refers to is defined.
    pub fn validate(&self) -> Result<()> {
        if !matches!(self.format.as_str(), "ply" | "csv") {
            return Err(Error::config(format!("format must be `ply` or `csv`, got `{}`", self.format)));
        }
        if let Some(stand) = &self.stand {
            let def = stand.definition();
            if !self.trees.contains_key(def) {
                return Err(Error::config(format!("stand uses tree `{def}`, which is not defined under [trees]")));
            }
        }
        for run in &self.scans {
            if !self.sensors.contains_key(&run.sensor) {
                return Err(Error::config(format!("scan `{}` uses undefined sensor `{}`", run.name, run.sensor)));
            }
            if !self.trajectories.contains_key(&run.trajectory) {
                return Err(Error::config(format!(
                    "scan `{}` uses undefined trajectory `{}`",
                    run.name, run.trajectory
                )));
            }
        }
        let mut names: Vec<&str> = self.scans.iter().map(|r| r.name.as_str()).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::config("scan names must be unique"));
        }
        Ok(())
    }

    /// Stable hash of the whole configuration.
    pub fn hash(&self) -> String {
        crate::cloud::params_hash(self)
    }

    /// Resolve every tree source to a definition. Relative paths are taken
    /// from `base`.
    pub fn tree_definitions(&self, base: &Path) -> Result<BTreeMap<String, TreeDefinition>> {
        self.trees
            .iter()
            .map(|(name, src)| {
                let mut def = match src {
                    TreeSource::Preset { name, sample_spacing } => {
                        let mut d = presets::tree(name)?;
                        if let Some(s) = sample_spacing {
                            d.sample_spacing = *s;
                        }
                        d
                    }
                    TreeSource::File { path } => TreeDefinition::load(&base.join(path))?,
                    TreeSource::Inline(d) => d.clone(),
                };
                def.name = name.clone();
                def.validate()?;
                Ok((name.clone(), def))
            })
            .collect()
    }

    /// The stand layout with its seed taken from the global seed.
    pub fn stand_layout(&self) -> Result<StandLayout> {
        let stand = self.stand.as_ref().ok_or_else(|| Error::config("no [stand] section"))?;
        let mut layout = match stand {
            StandConfig::Preset {
                preset,
                definition,
                rows,
                trees_per_row,
            } => {
                let mut l = presets::stand(preset, definition, 0)?;
                if let StandLayout::Orchard(o) = &mut l {
                    o.rows = rows.unwrap_or(o.rows);
                    o.trees_per_row = trees_per_row.unwrap_or(o.trees_per_row);
                } else if rows.is_some() || trees_per_row.is_some() {
                    return Err(Error::config("rows and trees_per_row only apply to orchard presets"));
                }
                l
            }
            StandConfig::Layout(l) => l.clone(),
        };
        match &mut layout {
            StandLayout::Orchard(o) => o.seed = self.seed,
            StandLayout::Forest(f) => f.seed = self.seed,
        }
        Ok(layout)
    }

    pub fn sensor(&self, name: &str) -> Result<SensorShape> {
        self.sensors
            .get(name)
            .ok_or_else(|| Error::config(format!("sensor `{name}` is not defined")))?
            .build(self.scan.search_radius)
    }

    pub fn trajectory(&self, name: &str) -> Result<&TrajectoryConfig> {
        self.trajectories
            .get(name)
            .ok_or_else(|| Error::config(format!("trajectory `{name}` is not defined")))
    }

    /// Scan parameters for the `i`-th scan run, with a seed derived from the
    /// global seed.
    pub fn scan_params(&self, i: usize) -> ScanParams {
        ScanParams {
            search_radius: self.scan.search_radius,
            noise_sigma: self.scan.noise_sigma,
            seed: rng::derive_seed(self.seed, &[SCAN_STREAM, i as u64]),
            dedupe: self.scan.dedupe,
        }
    }

    pub fn control_seed(&self) -> u64 {
        rng::derive_seed(self.seed, &[CONTROL_STREAM])
    }

    pub fn match_radius(&self) -> f64 {
        self.analysis.match_radius.unwrap_or(2.0 * self.scan.search_radius)
    }

    /// Output path for an artifact, with the configured cloud extension
    /// when `cloud` is set.
    pub fn artifact(&self, out: &Path, stem: &str, cloud: bool) -> PathBuf {
        if cloud {
            out.join(format!("{stem}.{}", self.format))
        } else {
            out.join(stem)
        }
    }
}

impl StandConfig {
    pub fn definition(&self) -> &str {
        match self {
            StandConfig::Preset { definition, .. } => definition,
            StandConfig::Layout(l) => l.definition(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FULL: &str = r#"
seed = 11
output_dir = "results"
format = "csv"

[trees.avocado]
kind = "preset"
name = "avocado"
sample_spacing = 0.02

[stand]
preset = "orchard-6x10"
definition = "avocado"
rows = 2
trees_per_row = 3

[sensors.plane]
kind = "preset"
name = "plane-270"

[sensors.dome]
kind = "spherical"
res_az_deg = 10.0
res_el_deg = 10.0
max_range = 5.0
range_step = 0.02

[trajectories.walk]
kind = "handheld_loop"
r_wide = 6.0

[trajectories.drive]
kind = "ground_rows"

[trajectories.fly]
kind = "aerial_grid"
altitude = 20.0

[[scans]]
name = "handheld"
sensor = "plane"
trajectory = "walk"

[[scans]]
name = "dome"
sensor = "dome"
trajectory = "drive"

[scan]
noise_sigma = 0.0

[analysis]
voxel_edge = 0.25
"#;

    fn parse(text: &str) -> Result<PipelineConfig> {
        PipelineConfig::from_toml(text, Path::new("test.cfg"))
    }

    #[test]
    fn full_config_resolves() {
        let cfg = parse(FULL).unwrap();
        assert_eq!(cfg.seed, 11);
        assert_eq!(cfg.format, "csv");
        let defs = cfg.tree_definitions(Path::new(".")).unwrap();
        assert_eq!(defs["avocado"].sample_spacing, 0.02);
        let StandLayout::Orchard(o) = cfg.stand_layout().unwrap() else { panic!() };
        assert_eq!((o.rows, o.trees_per_row, o.seed), (2, 3, 11));
        assert_eq!(cfg.sensor("plane").unwrap().lines().len(), 401);
        assert_eq!(cfg.sensor("dome").unwrap().lines().len(), 36 * 19);
        let TrajectoryConfig::HandheldLoop(h) = cfg.trajectory("walk").unwrap() else { panic!() };
        assert_eq!((h.r_wide, h.r_close), (6.0, 2.5));
        assert_eq!(cfg.match_radius(), 0.04);
        assert_eq!(cfg.analysis.voxel_edge, 0.25);
        assert_ne!(cfg.scan_params(0).seed, cfg.scan_params(1).seed);
        assert_eq!(cfg.scan_params(0).noise_sigma, 0.0);
    }

    #[test]
    fn unresolved_names() {
        let bad = FULL.replace("sensor = \"dome\"", "sensor = \"nope\"");
        assert!(matches!(parse(&bad), Err(Error::Config(m)) if m.contains("nope")));
        let bad = FULL.replace("definition = \"avocado\"", "definition = \"pear\"");
        assert!(matches!(parse(&bad), Err(Error::Config(_))));
        let bad = FULL.replace("trajectory = \"drive\"", "trajectory = \"walk\"\n").replace("name = \"dome\"", "name = \"handheld\"");
        assert!(parse(&bad).is_err());
    }

    #[test]
    fn syntax_errors_are_parse_errors() {
        assert!(matches!(parse("seed = ["), Err(Error::Parse { .. })));
        assert!(matches!(parse("colour = 3"), Err(Error::Parse { .. })));
        assert!(matches!(parse("format = \"las\""), Err(Error::Config(_))));
    }

    #[test]
    fn aerial_extent_from_stand() {
        let cfg = parse(FULL).unwrap();
        let t = cfg.trajectory("fly").unwrap();
        assert!(t.build(None, None, Path::new(".")).is_err());
        let stand = LabelledCloud::new(
            vec![
                crate::cloud::LabelledPoint::new([-3.0, -2.0, 0.0], 0, crate::cloud::Level::Trunk),
                crate::cloud::LabelledPoint::new([3.0, 2.0, 4.0], 0, crate::cloud::Level::Leaf),
            ],
            Default::default(),
        );
        let traj = t.build(None, Some(&stand), Path::new(".")).unwrap();
        let xs = traj.poses.iter().map(|p| p.position.x);
        assert_eq!(xs.clone().fold(f64::INFINITY, f64::min), -8.0);
        assert_eq!(traj.poses[0].position.y, -7.0);
        assert!(traj.poses.iter().all(|p| p.position.z == 20.0));
    }

    #[test]
    fn bundled_configs_parse() {
        let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples");
        let mut n = 0;
        for entry in std::fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.extension().is_some_and(|e| e == "cfg") {
                let cfg = PipelineConfig::load(&path).unwrap();
                cfg.tree_definitions(&dir).unwrap();
                cfg.stand_layout().unwrap();
                n += 1;
            }
        }
        assert!(n > 0);
    }
}
