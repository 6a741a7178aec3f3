//! Generate the three bundled trajectories and write them as pose CSV.

use simtreels::presets;
use simtreels::trajectory::{traj_aerial_grid, traj_ground_rows, traj_handheld_loop, write_trajectory, Trajectory};

fn describe(t: &Trajectory) {
    let labels: Vec<&str> = t.meta.segments.iter().map(|s| s.label.as_str()).collect();
    println!(
        "{:<14} {:>5} poses, {:>7.1} m of path, segments {}",
        t.meta.generator,
        t.len(),
        t.path_length(),
        labels.join(" ")
    );
}

fn main() -> simtreels::Result<()> {
    let stand = presets::stand("orchard-6x10", "avocado", 0)?;
    let extent = simtreels::stand::Extent::new(-25.0, -17.0, 25.0, 17.0);
    let trajs = [
        traj_handheld_loop(&presets::handheld())?,
        traj_ground_rows(&stand, &presets::ground())?,
        traj_aerial_grid(&presets::aerial(extent))?,
    ];
    let dir = std::env::temp_dir();
    for t in &trajs {
        describe(t);
        let path = dir.join(format!("{}.csv", t.meta.generator));
        write_trajectory(&path, t)?;
        println!("  -> {}", path.display());
    }
    Ok(())
}
