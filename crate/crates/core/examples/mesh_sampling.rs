//! Turn a labelled OBJ mesh into a point cloud by area-weighted sampling.

use simtreels::cloud::Level;
use simtreels::treegen::obj::{parse_obj, LabelMap};
use simtreels::treegen::sample_mesh;

// A square "trunk" prism and one leaf quad.
const OBJ: &str = "\
v -0.1 -0.1 0
v  0.1 -0.1 0
v  0.1  0.1 0
v -0.1  0.1 0
v -0.1 -0.1 2
v  0.1 -0.1 2
v  0.1  0.1 2
v -0.1  0.1 2
v  0.0  0.0 2
v  0.4  0.0 2.2
v  0.4  0.3 2.3
v  0.0  0.3 2.1
g trunk
f 1 2 6 5
f 2 3 7 6
f 3 4 8 7
f 4 1 5 8
g leaf_01
f 9 10 11 12
";

fn main() -> simtreels::Result<()> {
    let mesh = parse_obj(OBJ, &LabelMap::Heuristic, 0).map_err(simtreels::Error::Config)?;
    println!("{} faces, {:.3} m^2", mesh.faces.len(), mesh.total_area());
    for spacing in [0.05, 0.02, 0.01] {
        let cloud = sample_mesh(&mesh, spacing, 42)?;
        let leaves = cloud.points.iter().filter(|p| p.level == Level::Leaf).count();
        println!("spacing {spacing:>5} m: {:>6} points ({leaves} leaf)", cloud.len());
    }
    Ok(())
}
