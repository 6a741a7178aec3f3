use std::f64::consts::PI;

use nalgebra::{Point3, UnitQuaternion, Vector3};
use proptest::prelude::*;

use simtreels::analysis::{density_profile, density_stats, occlusion_map, Axis};
use simtreels::cloud::{LabelledCloud, LabelledPoint, Level, Provenance};
use simtreels::scanner::control_sample;
use simtreels::sensor::SensorShape;
use simtreels::stand::{layout_forest, layout_orchard, Extent, ForestParams, OrchardParams};
use simtreels::trajectory::{apply_pose, traj_aerial_grid, traj_handheld_loop, AerialParams, HandheldParams, Pose};

fn cloud(pts: &[[f64; 3]]) -> LabelledCloud {
    LabelledCloud::new(
        pts.iter().enumerate().map(|(i, &p)| LabelledPoint::new(p, (i % 3) as u32, Level::ALL[i % 4])).collect(),
        Provenance::default(),
    )
}

fn points(max: usize) -> impl Strategy<Value = Vec<[f64; 3]>> {
    prop::collection::vec([-5.0f64..5.0, -5.0f64..5.0, 0.0f64..4.0], 1..max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn handheld_poses_are_unit_and_steps_bounded(
        r_wide in 3.0f64..9.0,
        ratio in 0.2f64..0.9,
        step in 0.05f64..0.5,
        amp in 0.0f64..60.0,
        period in 0.2f64..2.0,
    ) {
        let p = HandheldParams {
            r_wide,
            r_close: r_wide * ratio,
            step,
            osc_amp_deg: amp,
            osc_period_m: period,
            ..HandheldParams::default()
        };
        let t = traj_handheld_loop(&p).unwrap();
        for pose in &t.poses {
            prop_assert!((pose.orientation.quaternion().norm() - 1.0).abs() < 1e-9);
            prop_assert!((pose.position.z - p.height).abs() < 1e-9);
        }
        for w in t.poses.windows(2) {
            prop_assert!((w[1].position - w[0].position).norm() <= step + 1e-9);
        }
    }

    #[test]
    fn aerial_grid_stays_at_altitude(w in 5.0f64..40.0, h in 5.0f64..40.0, spacing in 2.0f64..10.0) {
        let p = AerialParams {
            extent: Extent::new(-w / 2.0, -h / 2.0, w / 2.0, h / 2.0),
            line_spacing: spacing,
            ..AerialParams::default()
        };
        let t = traj_aerial_grid(&p).unwrap();
        for pose in &t.poses {
            prop_assert!((pose.position.z - p.altitude).abs() < 1e-9);
            // sensor looks straight down
            prop_assert!((pose.forward() - Vector3::new(0.0, 0.0, -1.0)).norm() < 1e-9);
        }
    }

    #[test]
    fn posing_preserves_ranges(
        pos in [-10.0f64..10.0, -10.0f64..10.0, -10.0f64..10.0],
        ang in [-PI..PI, -1.5f64..1.5, -PI..PI],
        fov in 10.0f64..360.0,
    ) {
        let shape = SensorShape::single_plane(fov, fov / 7.0, 2.0, 0.1).unwrap();
        let pose = Pose::new(Point3::from(pos), UnitQuaternion::from_euler_angles(ang[0], ang[1], ang[2]));
        let samples = apply_pose(&shape, &pose);
        prop_assert_eq!(samples.len(), shape.sample_count());
        for s in samples {
            prop_assert!(((s.position - pose.position).norm() - s.range).abs() < 1e-9);
        }
    }

    #[test]
    fn occlusion_shrinks_as_radius_grows(src in points(200), scan in points(60), a in 0.05f64..2.0, b in 0.05f64..2.0) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let (src, scan) = (cloud(&src), cloud(&scan));
        let small = occlusion_map(&src, &scan, lo).unwrap();
        let large = occlusion_map(&src, &scan, hi).unwrap();
        prop_assert!(large.occluded_fraction <= small.occluded_fraction);
        for (s, l) in small.visible.iter().zip(&large.visible) {
            prop_assert!(!s || *l);
        }
        prop_assert_eq!(occlusion_map(&src, &src, lo).unwrap().occluded_count(), 0);
    }

    #[test]
    fn density_accounts_for_every_point(pts in points(400), edge in 0.1f64..3.0) {
        let d = density_stats(&cloud(&pts), edge).unwrap();
        let recovered = d.mean_density * d.occupied_voxels as f64 * edge.powi(3);
        prop_assert!((recovered - pts.len() as f64).abs() < 1e-6 * pts.len() as f64);
        prop_assert!(d.stddev_density >= 0.0);
        prop_assert!(d.occupied_voxels <= pts.len());
    }

    #[test]
    fn profiles_peak_at_one(pts in points(400), bins in 2usize..40) {
        let c = cloud(&pts);
        for axis in [Axis::RadialXy, Axis::Height] {
            let p = density_profile(&c, axis, bins).unwrap();
            prop_assert_eq!(p.bins.len(), bins);
            let peak = p.bins.iter().map(|b| b.mean).fold(0.0, f64::max);
            prop_assert_eq!(peak, 1.0);
            prop_assert!(p.bins.iter().all(|b| b.mean >= 0.0 && b.stddev >= 0.0));
        }
    }

    #[test]
    fn control_is_a_stand_ordered_subset(n in 1usize..300, frac in 0.0f64..1.0, seed: u64) {
        let pts: Vec<[f64; 3]> = (0..n).map(|i| [i as f64, 0.0, 0.0]).collect();
        let stand = cloud(&pts);
        let k = ((n as f64 * frac) as usize).clamp(1, n);
        let c = control_sample(&stand, k, seed).unwrap();
        prop_assert_eq!(c.len(), k);
        // x doubles as the stand index, so strictly increasing means distinct and in order
        prop_assert!(c.points.windows(2).all(|w| w[0].x < w[1].x));
        for p in &c.points {
            prop_assert_eq!(p, &stand.points[p.x as usize]);
        }
        prop_assert_eq!(c, control_sample(&stand, k, seed).unwrap());
    }

    #[test]
    fn forest_keeps_min_spacing(count in 1usize..12, spacing in 1.0f64..5.0, seed: u64) {
        let params = ForestParams {
            extent: Extent::new(-15.0, -15.0, 15.0, 15.0),
            tree_count: count,
            min_spacing: spacing,
            definition: "t".into(),
            seed,
            max_attempts: None,
        };
        let trees = layout_forest(&params).unwrap();
        prop_assert_eq!(trees.len(), count);
        for (i, a) in trees.iter().enumerate() {
            prop_assert!(a.position[2] == 0.0);
            for b in &trees[i + 1..] {
                let d = (a.position[0] - b.position[0]).hypot(a.position[1] - b.position[1]);
                prop_assert!(d >= spacing);
            }
        }
    }

    #[test]
    fn orchard_is_a_regular_grid(rows in 1usize..6, per_row in 1usize..6, azimuth in 0.0f64..360.0) {
        let params = OrchardParams {
            rows,
            trees_per_row: per_row,
            tree_spacing: 6.0,
            row_spacing: 10.0,
            row_azimuth: azimuth,
            definition: "t".into(),
            seed: 1,
        };
        let trees = layout_orchard(&params).unwrap();
        prop_assert_eq!(trees.len(), rows * per_row);
        let mut nearest = f64::INFINITY;
        for (i, a) in trees.iter().enumerate() {
            for b in &trees[i + 1..] {
                nearest = nearest.min((a.position[0] - b.position[0]).hypot(a.position[1] - b.position[1]));
            }
        }
        if trees.len() > 1 {
            let want = if per_row > 1 { 6.0 } else { 10.0 };
            prop_assert!((nearest - want).abs() < 1e-9);
        }
    }
}
