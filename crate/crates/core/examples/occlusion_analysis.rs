//! Compare a simulated scan with a control sample of the same size:
//! occlusion, voxel density and the radial density profile.
//!
//!     cargo run --release --example occlusion_analysis

use std::collections::BTreeMap;

use simtreels::analysis::{density_profile, summary_report, Axis, StandRuns};
use simtreels::presets;
use simtreels::scanner::{control_sample, scan_cloud, ScanParams};
use simtreels::stand::{assemble_stand, StandLayout};
use simtreels::trajectory::traj_handheld_loop;

fn main() -> simtreels::Result<()> {
    let mut layout = presets::stand("orchard-6x10", "avocado", 3)?;
    if let StandLayout::Orchard(o) = &mut layout {
        o.rows = 3;
        o.trees_per_row = 1;
    }
    let defs = BTreeMap::from([("avocado".to_string(), presets::tree("avocado")?)]);
    let stand = assemble_stand(&layout.layout()?, &defs)?;

    let params = ScanParams {
        seed: 3,
        ..ScanParams::default()
    };
    let shape = presets::sensor("plane-270", params.search_radius, presets::SENSOR_RANGE)?;
    let scan = scan_cloud(&stand, &shape, &traj_handheld_loop(&presets::handheld())?, &params)?;
    let control = control_sample(&stand, scan.cloud.len(), 3)?;

    let runs = [StandRuns {
        name: "avocado, 3 trees".into(),
        source: &stand,
        control: &control,
        scans: vec![("Handheld".into(), &scan.cloud)],
    }];
    let report = summary_report(&runs, 0.5, 2.0 * params.search_radius)?;
    print!("{}", report.to_text());

    for (name, cloud) in [("control", &control), ("handheld", &scan.cloud)] {
        let p = density_profile(cloud, Axis::RadialXy, 30)?;
        println!("{name:<9} radial inner/outer density ratio {:.2}", p.inner_outer_ratio());
    }
    Ok(())
}
