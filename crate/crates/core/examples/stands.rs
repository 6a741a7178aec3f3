//! Orchard and forest layouts from the bundled stand presets.

use simtreels::presets;
use simtreels::stand::{StandLayout, TreePlacement};

fn show(name: &str, placements: &[TreePlacement]) {
    println!("{name}: {} trees", placements.len());
    for p in placements.iter().take(6) {
        println!(
            "  ({:>7.2}, {:>7.2})  yaw {:>6.1}  seed {}",
            p.position[0], p.position[1], p.yaw_deg, p.tree_seed
        );
    }
    if placements.len() > 6 {
        println!("  ...");
    }
}

fn main() -> simtreels::Result<()> {
    let orchard = presets::stand("orchard-6x10", "avocado", 5)?;
    show("orchard-6x10", &orchard.layout()?);

    let mut rotated = orchard.clone();
    if let StandLayout::Orchard(o) = &mut rotated {
        o.row_azimuth = 30.0;
    }
    show("orchard-6x10 rotated to 30 degrees", &rotated.layout()?);

    let forest = presets::stand("forest-min6", "aspen", 5)?;
    let trees = forest.layout()?;
    let closest = trees
        .iter()
        .enumerate()
        .flat_map(|(i, a)| trees[i + 1..].iter().map(move |b| (a, b)))
        .map(|(a, b)| (a.position[0] - b.position[0]).hypot(a.position[1] - b.position[1]))
        .fold(f64::INFINITY, f64::min);
    show("forest-min6", &trees);
    println!("  closest pair {closest:.2} m apart");
    Ok(())
}
