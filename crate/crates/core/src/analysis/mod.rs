//! Validation metrics: voxel density statistics, normalised density
//! profiles, occlusion maps and summary reports.

mod density;
mod occlusion;
mod profile;
mod report;

pub use density::{density_stats, DensityStats};
pub use occlusion::{occlusion_map, write_occlusion_csv, OcclusionMap};
pub use profile::{density_profile, write_profile_csv, Axis, DensityProfile, ProfileBin};
pub use report::{summary_report, Report, ReportBlock, ReportColumn, StandRuns};

pub const DEFAULT_VOXEL_EDGE: f64 = 0.5;
