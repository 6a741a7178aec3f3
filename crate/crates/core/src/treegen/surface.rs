//! Deterministic surface samplers with nearest-neighbour spacing bounded by
//! the requested spacing.

use nalgebra::Vector3;

/// Two unit vectors completing `axis` to a right-handed orthonormal frame.
pub(crate) fn frame(axis: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let helper = if axis.z.abs() < 0.9 {
        Vector3::z()
    } else {
        Vector3::x()
    };
    let u = axis.cross(&helper).normalize();
    let v = axis.cross(&u);
    (u, v)
}

/// Lateral surface of a truncated cone from `a` (radius `ra`) to `b`
/// (radius `rb`). Rings sit at most `spacing` apart along the axis and
/// carry at least one point per `spacing` of circumference. The ring at `b`
/// is emitted only when `include_end` is set so consecutive segments share
/// their joint ring.
pub(crate) fn frustum(
    a: Vector3<f64>,
    b: Vector3<f64>,
    ra: f64,
    rb: f64,
    spacing: f64,
    include_end: bool,
    out: &mut impl FnMut(Vector3<f64>),
) {
    let axis = b - a;
    let len = axis.norm();
    if len <= 0.0 {
        return;
    }
    let dir = axis / len;
    let (u, v) = frame(&dir);
    let rings = (len / spacing).ceil().max(1.0) as usize;
    let last = if include_end { rings } else { rings - 1 };
    for j in 0..=last {
        let f = j as f64 / rings as f64;
        let centre = a + axis * f;
        let r = ra + (rb - ra) * f;
        let m = ((std::f64::consts::TAU * r / spacing).ceil() as usize).max(3);
        let phase = if j % 2 == 1 { std::f64::consts::PI / m as f64 } else { 0.0 };
        for k in 0..m {
            let th = phase + std::f64::consts::TAU * k as f64 / m as f64;
            out(centre + (u * th.cos() + v * th.sin()) * r);
        }
    }
}

/// Flat disk of `radius` around `centre` with the given unit `normal`,
/// filled with a sunflower spiral of `ceil(area / spacing²)` points.
pub(crate) fn disk(centre: Vector3<f64>, normal: Vector3<f64>, radius: f64, spacing: f64, out: &mut impl FnMut(Vector3<f64>)) {
    let (u, v) = frame(&normal);
    let area = std::f64::consts::PI * radius * radius;
    let n = ((area / (spacing * spacing)).ceil() as usize).max(1);
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    for i in 0..n {
        let rho = radius * ((i as f64 + 0.5) / n as f64).sqrt();
        let th = golden * i as f64;
        out(centre + (u * th.cos() + v * th.sin()) * rho);
    }
}
