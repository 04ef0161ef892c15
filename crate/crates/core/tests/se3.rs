use std::f64::consts::FRAC_PI_2;

use mio_odometry::se3::{accumulate, pose_from_6dof, sixdof_from_pose};
use mio_odometry::{PoseSE3, SixDof};
use nalgebra::{Matrix3, Matrix4, Vector3, Vector4};
use proptest::prelude::*;

// Homogeneous-matrix oracle built from the raw quaternion components, with
// no help from the pose type.
fn matrix(p: &PoseSE3) -> Matrix4<f64> {
    let [w, x, y, z] = p.quaternion();
    let r = Matrix3::new(
        1.0 - 2.0 * (y * y + z * z),
        2.0 * (x * y - w * z),
        2.0 * (x * z + w * y),
        2.0 * (x * y + w * z),
        1.0 - 2.0 * (x * x + z * z),
        2.0 * (y * z - w * x),
        2.0 * (x * z - w * y),
        2.0 * (y * z + w * x),
        1.0 - 2.0 * (x * x + y * y),
    );
    let mut m = Matrix4::identity();
    m.fixed_view_mut::<3, 3>(0, 0).copy_from(&r);
    m.fixed_view_mut::<3, 1>(0, 3).copy_from(p.translation());
    m
}

fn pose() -> impl Strategy<Value = PoseSE3> {
    (
        prop::array::uniform4(-1.0..1.0f64),
        prop::array::uniform3(-10.0..10.0f64),
    )
        .prop_filter("quaternion away from zero", |(q, _)| q.iter().map(|v| v * v).sum::<f64>() > 1e-2)
        .prop_map(|(q, t)| PoseSE3::new(q, Vector3::from(t)))
}

fn max_abs(m: Matrix4<f64>) -> f64 {
    m.iter().fold(0.0f64, |a, v| a.max(v.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn compose_matches_matrix_product(a in pose(), b in pose()) {
        prop_assert!(max_abs(matrix(&a.compose(&b)) - matrix(&a) * matrix(&b)) < 1e-9);
    }

    #[test]
    fn invert_matches_matrix_inverse(p in pose()) {
        let inv = matrix(&p).try_inverse().unwrap();
        prop_assert!(max_abs(matrix(&p.invert()) - inv) < 1e-9);
        prop_assert!(max_abs(matrix(&p.compose(&p.invert())) - Matrix4::identity()) < 1e-9);
    }

    #[test]
    fn transform_point_matches_matrix(p in pose(), x in prop::array::uniform3(-5.0..5.0f64)) {
        let got = p.transform_point(&Vector3::from(x));
        let want = matrix(&p) * Vector4::new(x[0], x[1], x[2], 1.0);
        prop_assert!((got - want.xyz()).norm() < 1e-9);
    }

    #[test]
    fn transform_preserves_distance(
        p in pose(),
        x in prop::array::uniform3(-5.0..5.0f64),
        y in prop::array::uniform3(-5.0..5.0f64),
    ) {
        let (x, y) = (Vector3::from(x), Vector3::from(y));
        let d = (p.transform_point(&x) - p.transform_point(&y)).norm();
        prop_assert!((d - (x - y).norm()).abs() < 1e-9);
    }

    #[test]
    fn relative_to_recovers_the_step(a in pose(), b in pose()) {
        prop_assert!(max_abs(matrix(&a.compose(&a.relative_to(&b))) - matrix(&b)) < 1e-9);
    }

    #[test]
    fn sixdof_round_trip(
        t in prop::array::uniform3(-10.0..10.0f64),
        roll in -3.1..3.1f64,
        pitch in -1.5..1.5f64,
        yaw in -3.1..3.1f64,
    ) {
        let p = pose_from_6dof(&SixDof { translation: t, euler: [roll, pitch, yaw] });
        let back = pose_from_6dof(&sixdof_from_pose(&p).unwrap());
        prop_assert!(max_abs(matrix(&back) - matrix(&p)) < 1e-9);
    }
}

#[test]
fn yaw_quarter_turn() {
    let p = pose_from_6dof(&SixDof { translation: [0.0; 3], euler: [0.0, 0.0, FRAC_PI_2] });
    let h = 0.5f64.sqrt();
    let [w, x, y, z] = p.quaternion();
    assert!((w - h).abs() < 1e-15 && x.abs() < 1e-15 && y.abs() < 1e-15 && (z - h).abs() < 1e-15);
    let v = PoseSE3::from_yaw(FRAC_PI_2).transform_point(&Vector3::x());
    assert!((v - Vector3::y()).norm() < 1e-12);
}

#[test]
fn pitch_at_the_pole_is_gimbal_lock() {
    for pitch in [FRAC_PI_2, -FRAC_PI_2, FRAC_PI_2 - 1e-8] {
        let p = pose_from_6dof(&SixDof { translation: [0.0; 3], euler: [0.2, pitch, 0.3] });
        assert!(sixdof_from_pose(&p).is_err(), "pitch {pitch}");
    }
}

#[test]
fn rotation_stays_unit_after_long_chains() {
    let step = pose_from_6dof(&SixDof { translation: [0.01, 0.0, 0.0], euler: [0.003, -0.002, 0.011] });
    let mut p = PoseSE3::identity();
    for _ in 0..10_000 {
        p = p.compose(&step);
        p = p.compose(&step.invert()).compose(&step);
    }
    let n: f64 = p.quaternion().iter().map(|v| v * v).sum::<f64>().sqrt();
    assert!((n - 1.0).abs() < 1e-9, "norm {n}");
}

#[test]
fn accumulate_matches_matrix_chain() {
    let steps: Vec<(f64, PoseSE3)> = (1..=50)
        .map(|k| {
            let d = SixDof {
                translation: [0.1, 0.02 * (k as f64).sin(), 0.0],
                euler: [0.01, -0.02, 0.05 * (k as f64 * 0.3).cos()],
            };
            (k as f64 * 0.1, pose_from_6dof(&d))
        })
        .collect();
    let origin = PoseSE3::from_yaw_translation(0.4, Vector3::new(1.0, 2.0, 0.0));
    let traj = accumulate(origin, 0.0, &steps).unwrap();
    assert_eq!(traj.len(), 51);
    let mut m = matrix(&origin);
    for ((_, rel), (_, pose)) in steps.iter().zip(&traj.entries()[1..]) {
        m *= matrix(rel);
        assert!(max_abs(matrix(pose) - m) < 1e-9);
    }
    let empty = accumulate(origin, 3.0, &[]).unwrap();
    assert_eq!(empty.entries(), &[(3.0, origin)]);
}
