//! Beam layouts of the bundled sensors and a spherical scanner.

use simtreels::presets;
use simtreels::sensor::SensorShape;

fn describe(name: &str, s: &SensorShape) {
    println!(
        "{name:<12} {:>5} scan lines x {:>4} samples = {:>9} samples",
        s.lines().len(),
        s.ranges().len(),
        s.sample_count()
    );
}

fn main() -> simtreels::Result<()> {
    let plane = presets::sensor("plane-270", 0.02, 15.0)?;
    let puck = presets::sensor("puck-9beam", 0.02, 15.0)?;
    let sphere = SensorShape::spherical(1.0, 1.0, 30.0, 0.02)?;
    describe("plane-270", &plane);
    describe("puck-9beam", &puck);
    describe("spherical", &sphere);

    let tilts = puck.plane_tilts();
    println!("puck plane tilts: {tilts:?}");
    let first = plane.lines().first().unwrap();
    let last = plane.lines().last().unwrap();
    println!(
        "plane-270 fan from {:.3?} to {:.3?}",
        first.direction.as_slice(),
        last.direction.as_slice()
    );
    Ok(())
}
