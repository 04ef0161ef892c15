use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A vertical wall standing on the floor between two plan-view endpoints.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Wall {
    pub start: [f64; 2],
    pub end: [f64; 2],
    pub height: f64,
}

impl Wall {
    pub fn new(start: [f64; 2], end: [f64; 2], height: f64) -> Self {
        Self { start, end, height }
    }

    pub fn length(&self) -> f64 {
        (self.end[0] - self.start[0]).hypot(self.end[1] - self.start[1])
    }

    /// Plan-view distance from `p` to the wall segment.
    pub fn distance_to(&self, p: [f64; 2]) -> f64 {
        let (ax, ay) = (self.start[0], self.start[1]);
        let (dx, dy) = (self.end[0] - ax, self.end[1] - ay);
        let len2 = dx * dx + dy * dy;
        let u = (((p[0] - ax) * dx + (p[1] - ay) * dy) / len2).clamp(0.0, 1.0);
        (p[0] - ax - u * dx).hypot(p[1] - ay - u * dy)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bounds {
    pub min: [f64; 2],
    pub max: [f64; 2],
}

impl Bounds {
    pub fn contains(&self, p: [f64; 2]) -> bool {
        (self.min[0]..=self.max[0]).contains(&p[0]) && (self.min[1]..=self.max[1]).contains(&p[1])
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Floorplan {
    walls: Vec<Wall>,
    bounds: Bounds,
}

fn cross(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn sub(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

impl Floorplan {
    pub fn new(walls: Vec<Wall>, bounds: Bounds) -> Result<Self> {
        let plan = Self { walls, bounds };
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        for (i, w) in self.walls.iter().enumerate() {
            if !(w.length() > 0.0) || !(w.height > 0.0) {
                return Err(Error::InvalidConfig(format!("wall {i} has zero length or height")));
            }
            if !self.bounds.contains(w.start) || !self.bounds.contains(w.end) {
                return Err(Error::InvalidConfig(format!("wall {i} extends outside the bounds")));
            }
        }
        Ok(())
    }

    /// A 12 m x 8 m two-bedroom flat: a living area along the south side with
    /// a kitchen partition, and two bedrooms to the north reached through
    /// doorways at x in (2, 3) and x in (7, 8).
    pub fn apartment() -> Self {
        let h = 2.6;
        let walls = vec![
            Wall::new([0.0, 0.0], [12.0, 0.0], h),
            Wall::new([12.0, 0.0], [12.0, 8.0], h),
            Wall::new([12.0, 8.0], [0.0, 8.0], h),
            Wall::new([0.0, 8.0], [0.0, 0.0], h),
            Wall::new([0.0, 4.0], [2.0, 4.0], h),
            Wall::new([3.0, 4.0], [7.0, 4.0], h),
            Wall::new([8.0, 4.0], [12.0, 4.0], h),
            Wall::new([6.0, 4.0], [6.0, 8.0], h),
            Wall::new([9.0, 0.0], [9.0, 2.5], h),
            Wall::new([4.0, 0.0], [4.0, 1.2], h),
        ];
        let bounds = Bounds {
            min: [0.0, 0.0],
            max: [12.0, 8.0],
        };
        Self::new(walls, bounds).expect("built-in floorplan is valid")
    }

    /// Single square room of side `side` centred on the origin.
    pub fn square_room(side: f64, height: f64) -> Self {
        let s = 0.5 * side;
        let c = [[-s, -s], [s, -s], [s, s], [-s, s]];
        let walls = (0..4).map(|i| Wall::new(c[i], c[(i + 1) % 4], height)).collect();
        Self::new(walls, Bounds { min: [-s, -s], max: [s, s] }).expect("square room is valid")
    }

    pub fn walls(&self) -> &[Wall] {
        &self.walls
    }

    pub fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    /// Index of the first wall the plan-view segment `a -> b` touches.
    pub fn segment_hits_wall(&self, a: [f64; 2], b: [f64; 2]) -> Option<usize> {
        self.walls.iter().position(|w| segments_intersect(a, b, w.start, w.end))
    }

    /// Smallest plan-view distance from `p` to any wall.
    pub fn clearance(&self, p: [f64; 2]) -> f64 {
        self.walls.iter().map(|w| w.distance_to(p)).fold(f64::INFINITY, f64::min)
    }

    /// Distance along the unit direction `dir` from `origin` to the nearest wall
    /// face or floor (`z = 0`) within `max_range`.
    pub fn ray_cast(&self, origin: &Vector3<f64>, dir: &Vector3<f64>, max_range: f64) -> Option<f64> {
        let o = [origin.x, origin.y];
        let d = [dir.x, dir.y];
        let mut best: Option<f64> = None;
        if dir.z < 0.0 && origin.z >= 0.0 {
            let s = -origin.z / dir.z;
            if s > 0.0 && s <= max_range {
                best = Some(s);
            }
        }
        for w in &self.walls {
            let e = sub(w.end, w.start);
            let denom = cross(d, e);
            if denom.abs() < 1e-15 {
                continue;
            }
            let ao = sub(w.start, o);
            let s = cross(ao, e) / denom;
            let u = cross(ao, d) / denom;
            if s <= 0.0 || !(0.0..=1.0).contains(&u) || s > max_range {
                continue;
            }
            let z = origin.z + s * dir.z;
            if !(0.0..=w.height).contains(&z) {
                continue;
            }
            if best.is_none_or(|b| s < b) {
                best = Some(s);
            }
        }
        best
    }
}

fn segments_intersect(p1: [f64; 2], p2: [f64; 2], q1: [f64; 2], q2: [f64; 2]) -> bool {
    const EPS: f64 = 1e-12;
    let d1 = cross(sub(q2, q1), sub(p1, q1));
    let d2 = cross(sub(q2, q1), sub(p2, q1));
    let d3 = cross(sub(p2, p1), sub(q1, p1));
    let d4 = cross(sub(p2, p1), sub(q2, p1));
    if ((d1 > EPS && d2 < -EPS) || (d1 < -EPS && d2 > EPS)) && ((d3 > EPS && d4 < -EPS) || (d3 < -EPS && d4 > EPS)) {
        return true;
    }
    let on_segment = |a: [f64; 2], b: [f64; 2], p: [f64; 2]| {
        p[0] >= a[0].min(b[0]) - EPS
            && p[0] <= a[0].max(b[0]) + EPS
            && p[1] >= a[1].min(b[1]) - EPS
            && p[1] <= a[1].max(b[1]) + EPS
    };
    (d1.abs() <= EPS && on_segment(q1, q2, p1))
        || (d2.abs() <= EPS && on_segment(q1, q2, p2))
        || (d3.abs() <= EPS && on_segment(p1, p2, q1))
        || (d4.abs() <= EPS && on_segment(p1, p2, q2))
}
