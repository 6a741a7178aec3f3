//! Scan a single tree with the handheld loop and report what came back.
//!
//!     cargo run --release --example simulate_scan

use std::collections::BTreeMap;

use simtreels::cloud::{Level, SpatialIndex};
use simtreels::presets;
use simtreels::scanner::{simulate_scan, ScanParams};
use simtreels::stand::{assemble_stand, StandLayout};
use simtreels::trajectory::traj_handheld_loop;

fn main() -> simtreels::Result<()> {
    let mut layout = presets::stand("orchard-6x10", "avocado", 11)?;
    if let StandLayout::Orchard(o) = &mut layout {
        o.rows = 1;
        o.trees_per_row = 1;
    }
    let defs = BTreeMap::from([("avocado".to_string(), presets::tree("avocado")?)]);
    let stand = assemble_stand(&layout.layout()?, &defs)?;

    let params = ScanParams {
        seed: 11,
        ..ScanParams::default()
    };
    let shape = presets::sensor("plane-270", params.search_radius, presets::SENSOR_RANGE)?;
    let traj = traj_handheld_loop(&presets::handheld())?;

    let t0 = std::time::Instant::now();
    let index = SpatialIndex::build(&stand, params.search_radius)?;
    let scan = simulate_scan(&index, &shape, &traj, &params)?;
    println!(
        "{} stand points, {} poses, {} returns in {:.1?}",
        stand.len(),
        traj.len(),
        scan.cloud.len(),
        t0.elapsed()
    );

    let mut unique = scan.sources.clone();
    unique.sort_unstable();
    unique.dedup();
    println!(
        "{} distinct stand points observed ({:.1}%)",
        unique.len(),
        100.0 * unique.len() as f64 / stand.len() as f64
    );
    for level in Level::ALL {
        let seen = unique.iter().filter(|&&i| stand.points[i].level == level).count();
        let total = stand.points.iter().filter(|p| p.level == level).count();
        println!("  {level:?}: {seen} of {total}");
    }
    let busiest = scan.stats.returns_per_pose.iter().max().copied().unwrap_or(0);
    println!("busiest pose returned {busiest} points");
    Ok(())
}
