//! Oriented-rectangle overlap via the separating axis theorem, and
//! per-horizon collision flags for a planned ego trajectory.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trajectory::{Trajectory, Waypoint};

use super::displacement::horizon_steps;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObstacleBox {
    pub center: Waypoint,
    /// Radians from +x.
    pub heading: f64,
    pub length: f64,
    pub width: f64,
}

impl ObstacleBox {
    pub fn new(center: Waypoint, heading: f64, length: f64, width: f64) -> Result<Self> {
        let b = Self {
            center,
            heading,
            length,
            width,
        };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length > 0.0 && self.width > 0.0) {
            return Err(Error::Domain(format!(
                "box dimensions must be positive, got {} × {}",
                self.length, self.width
            )));
        }
        if !(self.center.is_finite() && self.heading.is_finite() && self.length.is_finite() && self.width.is_finite()) {
            return Err(Error::Domain("box must be finite".into()));
        }
        Ok(())
    }

    /// Unit vectors along the length and width.
    pub fn axes(&self) -> [Waypoint; 2] {
        let (s, c) = self.heading.sin_cos();
        [Waypoint::new(c, s), Waypoint::new(-s, c)]
    }

    pub fn corners(&self) -> [Waypoint; 4] {
        let [u, v] = self.axes();
        let hl = self.length / 2.0;
        let hw = self.width / 2.0;
        let at = |a: f64, b: f64| Waypoint::new(self.center.x + u.x * a + v.x * b, self.center.y + u.y * a + v.y * b);
        [at(hl, hw), at(-hl, hw), at(-hl, -hw), at(hl, -hw)]
    }
}

fn project(corners: &[Waypoint; 4], axis: &Waypoint) -> (f64, f64) {
    corners.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
        let d = p.x * axis.x + p.y * axis.y;
        (lo.min(d), hi.max(d))
    })
}

/// True iff the closed rectangles intersect; touching counts.
pub fn boxes_overlap(a: &ObstacleBox, b: &ObstacleBox) -> bool {
    let ca = a.corners();
    let cb = b.corners();
    for axis in a.axes().iter().chain(b.axes().iter()) {
        let (a_lo, a_hi) = project(&ca, axis);
        let (b_lo, b_hi) = project(&cb, axis);
        if a_hi < b_lo || b_hi < a_lo {
            return false;
        }
    }
    true
}

/// Obstacle boxes over time. Entry `i` is the box at the time of waypoint
/// `i` of the plan being evaluated; the last entry holds afterwards.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObstacleTrack {
    pub boxes: Vec<ObstacleBox>,
}

impl ObstacleTrack {
    pub fn fixed(b: ObstacleBox) -> Self {
        Self { boxes: vec![b] }
    }

    pub fn at(&self, step: usize) -> Option<&ObstacleBox> {
        self.boxes.get(step).or_else(|| self.boxes.last())
    }
}

/// Ego footprint as `(length, width)` in metres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EgoDims {
    pub length: f64,
    pub width: f64,
}

impl Default for EgoDims {
    fn default() -> Self {
        Self {
            length: 4.08,
            width: 1.85,
        }
    }
}

/// Ego boxes centred on each waypoint, heading from forward differences.
pub fn ego_boxes(pred: &Trajectory, ego: EgoDims) -> Result<Vec<ObstacleBox>> {
    pred.headings()
        .into_iter()
        .zip(pred.points())
        .map(|(h, p)| ObstacleBox::new(*p, h, ego.length, ego.width))
        .collect()
}

/// For each horizon: does any ego box up to that horizon overlap any obstacle?
pub fn collision_flags(
    pred: &Trajectory,
    ego: EgoDims,
    obstacles: &[ObstacleTrack],
    horizons_s: &[f64],
) -> Result<Vec<bool>> {
    let boxes = ego_boxes(pred, ego)?;
    let hit_at: Vec<bool> = boxes
        .iter()
        .enumerate()
        .map(|(i, eb)| obstacles.iter().filter_map(|t| t.at(i)).any(|ob| boxes_overlap(eb, ob)))
        .collect();
    horizons_s
        .iter()
        .map(|&h| {
            let steps = horizon_steps(h, pred.dt(), pred.len())?;
            Ok(hit_at[..steps].iter().any(|x| *x))
        })
        .collect()
}

/// Collision rate in percent for a single evaluated sample (0 or 100 per
/// horizon). Dataset rates average these over samples.
pub fn collision_rate(
    pred: &Trajectory,
    ego: EgoDims,
    obstacles: &[ObstacleTrack],
    horizons_s: &[f64],
) -> Result<Vec<f64>> {
    Ok(collision_flags(pred, ego, obstacles, horizons_s)?
        .into_iter()
        .map(|c| if c { 100.0 } else { 0.0 })
        .collect())
}
