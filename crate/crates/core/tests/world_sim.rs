mod common;

use mio_odometry::eval::imu_dead_reckoning;
use mio_odometry::sim::{record_sequence, routes, simulate, Floorplan, MotionScript, Sequence, SensorNoiseConfig};

fn error_at(est: &mio_odometry::Trajectory, truth: &mio_odometry::Trajectory, t: f64) -> f64 {
    let e = est.pose_near(t, 1e-6).unwrap().translation();
    let g = truth.pose_near(t, 1e-6).unwrap().translation();
    (e - g).norm()
}

#[test]
fn sixty_seconds_at_ten_hertz_is_six_hundred_records() {
    let plan = Floorplan::apartment();
    let script = MotionScript::walk(routes::LIVING_LOOP, 60.0, 1.0, 1.5).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let seq = record_sequence(&plan, &script, &SensorNoiseConfig::default().with_seed(4), dir.path()).unwrap();
    assert_eq!(seq.scans.len(), 600);
    let index = std::fs::read_to_string(dir.path().join("radar/index.csv")).unwrap();
    assert_eq!(index.lines().count(), 601);
    assert_eq!(std::fs::read_dir(dir.path().join("radar")).unwrap().count(), 601);
    let back = Sequence::read(dir.path()).unwrap();
    assert_eq!(back.scans, seq.scans);
    assert_eq!(back.imu, seq.imu);
}

#[test]
fn noisy_points_stay_within_four_sigma_of_max_range() {
    let seq = common::walk(routes::SWEEP_ALL, 60.0, 17);
    let cfg = &seq.meta.sensor;
    let limit = cfg.radar.max_range + 4.0 * cfg.range_sigma;
    let mut n = 0;
    for scan in &seq.scans {
        assert!(scan.points.len() <= cfg.radar.max_points);
        for p in &scan.points {
            assert!(p.range() <= limit, "range {} at t={}", p.range(), scan.timestamp);
            assert!((0.0..=1.0).contains(&p.intensity));
            n += 1;
        }
    }
    assert!(n > 50_000);
}

#[test]
fn same_seed_same_bits() {
    let a = common::walk(routes::EAST_BEDROOM, 30.0, 8);
    let b = common::walk(routes::EAST_BEDROOM, 30.0, 8);
    assert_eq!(a, b);
    let c = common::walk(routes::EAST_BEDROOM, 30.0, 9);
    assert_ne!(a.imu, c.imu);
    assert_ne!(a.scans, c.scans);
}

#[test]
fn clean_imu_integrates_back_to_the_truth() {
    let plan = Floorplan::apartment();
    let script = MotionScript::walk(routes::SWEEP_ALL, 60.0, 1.0, 1.5).unwrap();
    let seq = simulate(&plan, &script, &SensorNoiseConfig::noiseless()).unwrap();
    let origin = seq.truth.first().unwrap().1;
    let dr = imu_dead_reckoning(&seq.imu, origin).unwrap();
    assert_eq!(dr.len(), seq.truth.len());
    let mut worst: f64 = 0.0;
    for ((_, e), (_, g)) in dr.entries().iter().zip(seq.truth.entries()) {
        worst = worst.max((e.translation() - g.translation()).norm());
        worst = worst.max(e.relative_to(g).rotation_angle());
    }
    assert!(worst < 1e-3, "worst deviation {worst}");
}

#[test]
fn biased_imu_drifts_away() {
    let seq = common::walk(routes::LIVING_LOOP, 60.0, 23);
    let origin = seq.truth.first().unwrap().1;
    let dr = imu_dead_reckoning(&seq.imu, origin).unwrap();
    let t0 = seq.truth.first().unwrap().0;
    let errs: Vec<f64> = [15.0, 30.0, 60.0].iter().map(|s| error_at(&dr, &seq.truth, t0 + s)).collect();
    assert!(errs[2] > 1.0, "{errs:?}");
    assert!(errs[1] > 2.0 * errs[0] && errs[2] > 2.0 * errs[1], "{errs:?}");
}
