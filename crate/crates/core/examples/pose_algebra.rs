//! Composes, inverts and chains poses, and converts them to the network's
//! 6-DoF motion format.

use std::f64::consts::FRAC_PI_2;

use mio_odometry::se3::{accumulate, pose_from_6dof, sixdof_from_pose};
use mio_odometry::{PoseSE3, SixDof};
use nalgebra::Vector3;

fn show(label: &str, p: &PoseSE3) {
    let t = p.translation();
    let [w, x, y, z] = p.quaternion();
    println!("{label:<22} t=({:+.3}, {:+.3}, {:+.3}) q=({w:+.4}, {x:+.4}, {y:+.4}, {z:+.4})", t.x, t.y, t.z);
}

fn main() -> mio_odometry::Result<()> {
    let a = PoseSE3::from_yaw_translation(FRAC_PI_2, Vector3::new(1.0, 0.0, 0.0));
    let b = PoseSE3::from_translation(Vector3::new(0.5, 0.0, 0.0));
    show("a", &a);
    show("b", &b);
    show("a * b", &a.compose(&b));
    show("a * a^-1", &a.compose(&a.invert()));
    show("a -> a*b in a's frame", &a.relative_to(&a.compose(&b)));

    let d = SixDof {
        translation: [0.1, 0.02, 0.0],
        euler: [0.01, -0.02, 0.3],
    };
    let back = sixdof_from_pose(&pose_from_6dof(&d))?;
    println!("6-DoF round trip       {:?}", back.to_array());

    // a quarter-turn square, one step per second
    let step = PoseSE3::from_yaw_translation(FRAC_PI_2, Vector3::new(1.0, 0.0, 0.0));
    let steps: Vec<_> = (1..=4).map(|k| (k as f64, step)).collect();
    let square = accumulate(PoseSE3::identity(), 0.0, &steps)?;
    for (t, p) in square.entries() {
        show(&format!("square t={t}"), p);
    }
    Ok(())
}
