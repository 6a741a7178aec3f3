use nalgebra::{Point3, UnitQuaternion};
use proptest::prelude::*;
use rustc_hash::FxHashSet;

use simtreels::cloud::io::write_csv;
use simtreels::cloud::{LabelledCloud, LabelledPoint, Level, Provenance, SpatialIndex};
use simtreels::scanner::{brute_force_scan, scan_cloud, simulate_scan, ScanParams};
use simtreels::sensor::SensorShape;
use simtreels::trajectory::{Pose, Trajectory, TrajectoryMeta};

fn trajectory(poses: Vec<Pose>) -> Trajectory {
    Trajectory {
        poses,
        meta: TrajectoryMeta {
            generator: "test".into(),
            params: serde_json::Value::Null,
            step: None,
            segments: Vec::new(),
        },
    }
}

fn csv(c: &LabelledCloud) -> Vec<u8> {
    let mut v = Vec::new();
    write_csv(&mut v, c).unwrap();
    v
}

fn pose() -> impl Strategy<Value = Pose> {
    ([-1.0f64..1.0, -1.0f64..1.0, -0.5f64..0.5], [-3.1f64..3.1, -1.5f64..1.5, -3.1f64..3.1]).prop_map(|(p, a)| {
        Pose::new(Point3::new(p[0], p[1], p[2]), UnitQuaternion::from_euler_angles(a[0], a[1], a[2]))
    })
}

/// Points on a slab and a ball, close enough to the poses to be hit.
fn stand() -> impl Strategy<Value = LabelledCloud> {
    prop::collection::vec(([-2.0f64..2.0, -2.0f64..2.0, -1.0f64..1.0], 0u32..3, 0usize..4), 1..600).prop_map(|v| {
        let pts = v
            .into_iter()
            .map(|(p, tree, level)| {
                let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt().max(1e-9);
                // push everything onto a 1.5 m shell around the origin
                let s = 1.5 / r;
                LabelledPoint::new([p[0] * s, p[1] * s, p[2] * s], tree, Level::ALL[level])
            })
            .collect();
        LabelledCloud::new(pts, Provenance::default())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn indexed_scan_equals_exhaustive_scan(
        cloud in stand(),
        poses in prop::collection::vec(pose(), 1..8),
        fov in 30.0f64..360.0,
        res in 8.0f64..30.0,
        r in 0.05f64..0.2,
        cell in 0.5f64..3.0,
        sigma in prop_oneof![Just(0.0), 0.0f64..0.05],
        dedupe: bool,
        seed: u64,
    ) {
        let shape = SensorShape::single_plane(fov, res.min(fov), 3.0, r).unwrap();
        let traj = trajectory(poses);
        let p = ScanParams { search_radius: r, noise_sigma: sigma, seed, dedupe };
        let index = SpatialIndex::build(&cloud, r * cell).unwrap();
        let fast = simulate_scan(&index, &shape, &traj, &p).unwrap();
        let slow = brute_force_scan(&cloud, &shape, &traj, &p).unwrap();
        prop_assert_eq!(csv(&fast.cloud), csv(&slow.cloud));
        prop_assert_eq!(&fast.stats, &slow.stats);
        prop_assert_eq!(&fast.sources, &slow.sources);
    }

    #[test]
    fn returns_respect_structure(
        cloud in stand(),
        poses in prop::collection::vec(pose(), 1..6),
        dedupe: bool,
        seed: u64,
    ) {
        let shape = SensorShape::multi_plane(180.0, 15.0, 3.0, 0.1, 3, 30.0).unwrap();
        let traj = trajectory(poses);
        let p = ScanParams { search_radius: 0.1, noise_sigma: 0.0, seed, dedupe };
        let res = scan_cloud(&cloud, &shape, &traj, &p).unwrap();
        let mut pairs = FxHashSet::default();
        let mut sources = FxHashSet::default();
        for (pt, &src) in res.cloud.points.iter().zip(&res.sources) {
            let tag = pt.scan.unwrap();
            prop_assert!(pairs.insert((tag.pose_index, tag.scanline_id)));
            if dedupe {
                prop_assert!(sources.insert(src));
            }
            // no noise: returns are stand points with their labels
            let s = &cloud.points[src];
            prop_assert_eq!(pt.xyz(), s.xyz());
            prop_assert_eq!((pt.tree_id, pt.level), (s.tree_id, s.level));
        }
        let per_pose: u32 = res.stats.returns_per_pose.iter().sum();
        prop_assert_eq!(per_pose as usize, res.cloud.len());
        prop_assert_eq!(res.stats.total_returns, res.cloud.len());
        prop_assert!(res.stats.hit_rate_per_line.iter().all(|h| (0.0..=1.0).contains(h)));
    }
}

#[test]
fn empty_stand_gives_no_returns() {
    let cloud = LabelledCloud::new(Vec::new(), Provenance::default());
    let shape = SensorShape::single_plane(90.0, 10.0, 3.0, 0.05).unwrap();
    let traj = trajectory(vec![Pose::new(Point3::origin(), UnitQuaternion::identity())]);
    let p = ScanParams { search_radius: 0.05, noise_sigma: 0.0, seed: 0, dedupe: false };
    let a = scan_cloud(&cloud, &shape, &traj, &p).unwrap();
    let b = brute_force_scan(&cloud, &shape, &traj, &p).unwrap();
    assert!(a.cloud.is_empty());
    assert_eq!(a, b);
    assert_eq!(a.stats.returns_per_pose, [0]);
}

#[test]
fn nearer_surface_hides_farther_one() {
    // two walls across the beam, 1 m and 2 m ahead
    let mut pts = Vec::new();
    for (x, level) in [(1.0, Level::Leaf), (2.0, Level::Trunk)] {
        for i in -20..=20 {
            for j in -20..=20 {
                pts.push(LabelledPoint::new([x, i as f64 * 0.01, j as f64 * 0.01], 0, level));
            }
        }
    }
    let cloud = LabelledCloud::new(pts, Provenance::default());
    let shape = SensorShape::single_plane(20.0, 1.0, 5.0, 0.01).unwrap();
    let traj = trajectory(vec![Pose::new(Point3::origin(), UnitQuaternion::identity())]);
    let p = ScanParams { search_radius: 0.01, noise_sigma: 0.0, seed: 0, dedupe: false };
    let res = scan_cloud(&cloud, &shape, &traj, &p).unwrap();
    assert!(!res.cloud.is_empty());
    assert!(res.cloud.points.iter().all(|p| p.level == Level::Leaf));
}
