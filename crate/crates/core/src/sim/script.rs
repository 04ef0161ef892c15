use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::floorplan::Floorplan;
use crate::error::{Error, Result};
use crate::fmt::quantize9;
use crate::se3::{wrap_angle, PoseSE3, Trajectory};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Waypoint {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    /// Unwrapped heading, radians. Yaw is interpolated linearly between
    /// waypoints, so consecutive values should not jump by 2π.
    pub yaw: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MotionScript {
    pub waypoints: Vec<Waypoint>,
    pub imu_rate: f64,
    pub radar_rate: f64,
    /// Height of the handheld sensor above the floor, metres.
    #[serde(default = "default_height")]
    pub height: f64,
}

fn default_height() -> f64 {
    1.2
}

impl MotionScript {
    pub fn new(waypoints: Vec<Waypoint>) -> Self {
        Self {
            waypoints,
            imu_rate: 100.0,
            radar_rate: 10.0,
            height: default_height(),
        }
    }

    /// Builds a walk along `path`: stand still for `hold` seconds, then for
    /// every leg turn on the spot at `turn_rate` to face the next point and
    /// walk there at the constant speed that makes the whole script last
    /// `duration` seconds.
    pub fn walk(path: &[[f64; 2]], duration: f64, hold: f64, turn_rate: f64) -> Result<Self> {
        if path.len() < 2 {
            return Err(Error::TrajectoryTooShort {
                needed: 2,
                got: path.len(),
            });
        }
        let mut headings = Vec::with_capacity(path.len() - 1);
        let mut yaw = (path[1][1] - path[0][1]).atan2(path[1][0] - path[0][0]);
        let mut turn_time = 0.0;
        let mut length = 0.0;
        for (i, leg) in path.windows(2).enumerate() {
            let target = (leg[1][1] - leg[0][1]).atan2(leg[1][0] - leg[0][0]);
            if i > 0 {
                let delta = wrap_angle(target - yaw);
                turn_time += delta.abs() / turn_rate;
                yaw += delta;
            }
            headings.push(yaw);
            length += (leg[1][0] - leg[0][0]).hypot(leg[1][1] - leg[0][1]);
        }
        let walk_time = duration - hold - turn_time;
        if !(walk_time > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "a {duration} s script cannot fit {turn_time:.2} s of turning and a {hold} s hold"
            )));
        }
        let speed = length / walk_time;

        let mut wps = Vec::new();
        let mut t = 0.0;
        let [x0, y0] = path[0];
        wps.push(Waypoint { t, x: x0, y: y0, yaw: headings[0] });
        if hold > 0.0 {
            t += hold;
            wps.push(Waypoint { t, x: x0, y: y0, yaw: headings[0] });
        }
        for (i, leg) in path.windows(2).enumerate() {
            if i > 0 {
                let dyaw = (headings[i] - headings[i - 1]).abs();
                if dyaw > 1e-12 {
                    t += dyaw / turn_rate;
                    wps.push(Waypoint { t, x: leg[0][0], y: leg[0][1], yaw: headings[i] });
                }
            }
            t += (leg[1][0] - leg[0][0]).hypot(leg[1][1] - leg[0][1]) / speed;
            wps.push(Waypoint { t, x: leg[1][0], y: leg[1][1], yaw: headings[i] });
        }
        // absorb accumulated rounding so the script ends exactly at `duration`
        if let Some(last) = wps.last_mut() {
            last.t = duration;
        }
        Ok(Self::new(wps))
    }

    pub fn duration(&self) -> f64 {
        match (self.waypoints.first(), self.waypoints.last()) {
            (Some(a), Some(b)) => b.t - a.t,
            _ => 0.0,
        }
    }

    pub fn start_time(&self) -> f64 {
        self.waypoints.first().map_or(0.0, |w| w.t)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.imu_rate > 0.0 && self.radar_rate > 0.0) {
            return Err(Error::InvalidConfig("sensor rates must be > 0".into()));
        }
        if self.radar_rate > self.imu_rate {
            return Err(Error::InvalidConfig("radar_rate must not exceed imu_rate".into()));
        }
        for (i, w) in self.waypoints.windows(2).enumerate() {
            if !(w[1].t > w[0].t) {
                return Err(Error::NonMonotonicTimestamps { index: i + 1 });
            }
        }
        Ok(())
    }

    /// Piecewise-linear pose at time `t`, clamped to the scripted interval.
    pub fn pose_at(&self, t: f64) -> PoseSE3 {
        let wps = &self.waypoints;
        let i = wps.partition_point(|w| w.t <= t);
        let (x, y, yaw) = if i == 0 {
            (wps[0].x, wps[0].y, wps[0].yaw)
        } else if i == wps.len() {
            let w = wps[wps.len() - 1];
            (w.x, w.y, w.yaw)
        } else {
            let (a, b) = (wps[i - 1], wps[i]);
            let s = (t - a.t) / (b.t - a.t);
            (a.x + s * (b.x - a.x), a.y + s * (b.y - a.y), a.yaw + s * (b.yaw - a.yaw))
        };
        PoseSE3::from_yaw_translation(yaw, Vector3::new(x, y, self.height))
    }

    /// Moves each waypoint of a walk, endpoints included, by up to `amount`
    /// metres per axis. Perturbations that cut through a wall or come closer
    /// than 0.25 m to one are redrawn; after 32 failed draws the waypoint
    /// stays where it was.
    pub fn jittered_path(path: &[[f64; 2]], plan: &Floorplan, amount: f64, seed: u64) -> Vec<[f64; 2]> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = path.to_vec();
        for i in 0..out.len() {
            for _ in 0..32 {
                let cand = [
                    path[i][0] + rng.gen_range(-amount..=amount),
                    path[i][1] + rng.gen_range(-amount..=amount),
                ];
                let prev_ok = i == 0 || plan.segment_hits_wall(out[i - 1], cand).is_none();
                let next_ok = i + 1 == out.len() || plan.segment_hits_wall(cand, path[i + 1]).is_none();
                if prev_ok && next_ok && plan.clearance(cand) > 0.25 && plan.bounds().contains(cand) {
                    out[i] = cand;
                    break;
                }
            }
        }
        out
    }
}

/// Search routes through [`Floorplan::apartment`], each a wall-following
/// sweep of a different subset of rooms.
pub mod routes {
    pub const SWEEP_ALL: &[[f64; 2]] = &[
        [1.0, 1.0],
        [3.0, 1.0],
        [2.5, 3.0],
        [2.5, 5.0],
        [1.0, 5.0],
        [1.0, 7.0],
        [5.0, 7.0],
        [5.0, 5.0],
        [2.5, 5.0],
        [2.5, 3.0],
        [7.5, 3.0],
        [7.5, 5.0],
        [11.0, 5.0],
        [11.0, 7.0],
        [7.0, 7.0],
        [7.5, 5.0],
        [7.5, 3.0],
        [8.5, 1.0],
    ];

    pub const LIVING_LOOP: &[[f64; 2]] = &[
        [1.0, 2.0],
        [1.0, 3.3],
        [8.5, 3.3],
        [11.0, 3.3],
        [11.0, 1.0],
        [10.0, 1.0],
        [9.6, 3.0],
        [8.0, 3.0],
        [8.3, 0.8],
        [5.0, 0.8],
        [4.6, 2.2],
        [3.5, 2.2],
        [3.3, 0.7],
        [1.0, 0.7],
        [1.0, 2.0],
    ];

    pub const EAST_BEDROOM: &[[f64; 2]] = &[
        [10.5, 1.2],
        [9.7, 3.2],
        [7.5, 3.2],
        [7.5, 5.0],
        [7.0, 7.2],
        [11.2, 7.2],
        [11.2, 4.8],
        [8.8, 5.2],
        [8.8, 6.3],
        [7.5, 5.0],
        [7.5, 3.2],
        [5.0, 2.5],
        [3.0, 3.0],
    ];

    pub const WEST_BEDROOM: &[[f64; 2]] = &[
        [5.5, 1.0],
        [5.5, 3.0],
        [2.5, 3.0],
        [2.5, 5.0],
        [5.2, 5.0],
        [5.2, 7.2],
        [0.8, 7.2],
        [0.8, 4.8],
        [2.5, 5.0],
        [2.5, 3.0],
        [1.0, 2.5],
        [1.0, 1.0],
        [3.2, 0.8],
    ];

    pub const ALL: &[&[[f64; 2]]] = &[SWEEP_ALL, LIVING_LOOP, EAST_BEDROOM, WEST_BEDROOM];
}

/// Samples the script densely at `imu_rate` after checking it against the
/// floorplan.
pub fn generate_trajectory(script: &MotionScript, plan: &Floorplan) -> Result<Trajectory> {
    script.validate()?;
    if script.waypoints.is_empty() {
        return Err(Error::TrajectoryTooShort { needed: 1, got: 0 });
    }
    for (i, w) in script.waypoints.iter().enumerate() {
        if !plan.bounds().contains([w.x, w.y]) {
            return Err(Error::WaypointOutsideBounds { index: i, x: w.x, y: w.y });
        }
    }
    for (i, w) in script.waypoints.windows(2).enumerate() {
        let (a, b) = ([w[0].x, w[0].y], [w[1].x, w[1].y]);
        if a != b {
            if let Some(wall) = plan.segment_hits_wall(a, b) {
                return Err(Error::PathCrossesWall { index: i, wall });
            }
        }
    }
    let t0 = script.start_time();
    let n = (script.duration() * script.imu_rate).round() as usize;
    let entries = (0..=n)
        .map(|i| {
            let t = quantize9(t0 + i as f64 / script.imu_rate);
            (t, script.pose_at(t))
        })
        .collect();
    Trajectory::from_entries(entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn wp(t: f64, x: f64, y: f64, yaw: f64) -> Waypoint {
        Waypoint { t, x, y, yaw }
    }

    #[test]
    fn stationary_script() {
        let plan = Floorplan::square_room(8.0, 3.0);
        let script = MotionScript::new(vec![wp(0.0, 1.0, 1.0, 0.3), wp(5.0, 1.0, 1.0, 0.3)]);
        let traj = generate_trajectory(&script, &plan).unwrap();
        assert_eq!(traj.len(), 501);
        let first = traj.first().unwrap().1;
        assert!(traj.poses().all(|p| *p == first));
        assert_eq!(traj.last().unwrap().0, 5.0);
    }

    #[test]
    fn constant_velocity() {
        let plan = Floorplan::square_room(12.0, 3.0);
        let script = MotionScript::new(vec![wp(0.0, 0.0, 0.0, 0.0), wp(10.0, 5.0, 0.0, 0.0)]);
        let traj = generate_trajectory(&script, &plan).unwrap();
        assert_eq!(traj.len(), 1001);
        for (t, p) in traj.entries() {
            assert_abs_diff_eq!(p.translation().x, 0.5 * t, epsilon = 1e-12);
        }
    }

    #[test]
    fn closed_square_loop_returns_home() {
        let plan = Floorplan::square_room(8.0, 3.0);
        let path = [[-2.0, -2.0], [2.0, -2.0], [2.0, 2.0], [-2.0, 2.0], [-2.0, -2.0]];
        let script = MotionScript::walk(&path, 30.0, 1.0, 1.5).unwrap();
        let traj = generate_trajectory(&script, &plan).unwrap();
        let a = traj.first().unwrap().1.translation();
        let b = traj.last().unwrap().1.translation();
        assert!((a - b).norm() < 1e-9);
    }

    #[test]
    fn rejects_wall_crossing_and_out_of_bounds() {
        let plan = Floorplan::apartment();
        let s = MotionScript::new(vec![wp(0.0, 5.0, 3.0, 0.0), wp(5.0, 5.0, 5.0, 0.0)]);
        assert!(matches!(generate_trajectory(&s, &plan), Err(Error::PathCrossesWall { index: 0, wall: 5 })));
        let s = MotionScript::new(vec![wp(0.0, 5.0, 3.0, 0.0), wp(5.0, 13.0, 3.0, 0.0)]);
        assert!(matches!(
            generate_trajectory(&s, &plan),
            Err(Error::WaypointOutsideBounds { index: 1, .. })
        ));
    }

    #[test]
    fn built_in_routes_are_walkable() {
        let plan = Floorplan::apartment();
        for (i, route) in routes::ALL.iter().enumerate() {
            for p in route.iter() {
                assert!(plan.clearance(*p) > 0.3, "route {i} point {p:?} hugs a wall");
            }
            let script = MotionScript::walk(route, 60.0, 1.0, 1.5).unwrap();
            generate_trajectory(&script, &plan).unwrap_or_else(|e| panic!("route {i}: {e}"));
            let jit = MotionScript::jittered_path(route, &plan, 0.3, 7);
            let script = MotionScript::walk(&jit, 60.0, 1.0, 1.5).unwrap();
            generate_trajectory(&script, &plan).unwrap_or_else(|e| panic!("jittered route {i}: {e}"));
        }
    }
}
