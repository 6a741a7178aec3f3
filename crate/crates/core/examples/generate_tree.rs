//! Grow one tree from a bundled definition and write it as PLY.
//!
//!     cargo run --release --example generate_tree -- macadamia 3

use simtreels::cloud::{io::write_cloud, Level};
use simtreels::presets;
use simtreels::treegen::generate_tree;

fn main() -> simtreels::Result<()> {
    let mut args = std::env::args().skip(1);
    let name = args.next().unwrap_or_else(|| "avocado".into());
    let seed: u32 = args.next().and_then(|s| s.parse().ok()).unwrap_or(1);

    let def = presets::tree(&name)?;
    let tree = generate_tree(&def, seed)?;

    let (lo, hi) = tree.bounds().expect("trees are never empty");
    println!("{name} (seed {seed}): {} points", tree.len());
    println!("  height {:.2} m, crown {:.2} x {:.2} m", hi[2] - lo[2], hi[0] - lo[0], hi[1] - lo[1]);
    for level in Level::ALL {
        let n = tree.points.iter().filter(|p| p.level == level).count();
        println!("  level {} {:?}: {n}", u8::from(level), level);
    }

    let path = std::env::temp_dir().join(format!("{name}_{seed}.ply"));
    write_cloud(&path, &tree)?;
    println!("wrote {}", path.display());
    Ok(())
}
