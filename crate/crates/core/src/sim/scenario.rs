use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{ObstacleBox, ObstacleTrack};
use crate::trajectory::{Pose2, Trajectory, Waypoint, DEFAULT_DT};

/// Reference path shape. Positive angles turn left.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ScenarioKind {
    Straight,
    /// A circular arc of `angle` radians, then straight along the exit tangent.
    ArcTurn {
        radius: f64,
        angle: f64,
    },
    /// Arc of `angle`, arc of `−angle`, then straight.
    SCurve {
        #[serde(default = "default_scurve_radius")]
        radius: f64,
        #[serde(default = "default_scurve_angle")]
        angle: f64,
    },
}

fn default_scurve_radius() -> f64 {
    30.0
}

fn default_scurve_angle() -> f64 {
    std::f64::consts::FRAC_PI_4
}

/// An obstacle box moving at constant world velocity from its initial pose.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObstacleScript {
    pub x: f64,
    pub y: f64,
    #[serde(default)]
    pub heading: f64,
    pub length: f64,
    pub width: f64,
    #[serde(default)]
    pub vx: f64,
    #[serde(default)]
    pub vy: f64,
}

impl ObstacleScript {
    pub fn box_at(&self, time: f64) -> ObstacleBox {
        ObstacleBox {
            center: Waypoint::new(self.x + self.vx * time, self.y + self.vy * time),
            heading: self.heading,
            length: self.length,
            width: self.width,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub kind: ScenarioKind,
    /// Seconds of ground truth generated after the start.
    pub duration: f64,
    /// Metres per second along the path.
    pub speed: f64,
    #[serde(default)]
    pub obstacles: Vec<ObstacleScript>,
    #[serde(default)]
    pub seed: u64,
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return Err(Error::Config(format!(
                "duration must be positive, got {}",
                self.duration
            )));
        }
        if !(self.speed.is_finite() && self.speed > 0.0) {
            return Err(Error::Config(format!("speed must be positive, got {}", self.speed)));
        }
        match self.kind {
            ScenarioKind::Straight => {}
            ScenarioKind::ArcTurn { radius, angle } | ScenarioKind::SCurve { radius, angle } => {
                if !(radius.is_finite() && radius > 0.0) {
                    return Err(Error::Config(format!("radius must be positive, got {radius}")));
                }
                if !angle.is_finite() {
                    return Err(Error::Config("angle must be finite".into()));
                }
            }
        }
        for (i, o) in self.obstacles.iter().enumerate() {
            o.box_at(0.0)
                .validate()
                .map_err(|e| Error::Config(format!("obstacle {i}: {e}")))?;
            if ![o.vx, o.vy].iter().all(|v| v.is_finite()) {
                return Err(Error::Config(format!("obstacle {i}: velocity must be finite")));
            }
        }
        Ok(())
    }

    /// Number of ground-truth steps after the start.
    pub fn steps(&self) -> usize {
        (self.duration / DEFAULT_DT).round().max(1.0) as usize
    }
}

/// Ground truth of one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    /// Waypoints at `dt, 2·dt, …, duration` in the world frame.
    pub gt_path: Trajectory,
    /// Ground-truth poses at `0, dt, …, duration` (entry 0 is the start).
    pub gt_poses: Vec<Pose2>,
    /// Obstacle boxes at `0, dt, …, duration`, one track per obstacle.
    pub obstacle_tracks: Vec<ObstacleTrack>,
}

/// Position and heading after travelling `s` metres along a sequence of
/// constant-curvature pieces starting at the origin facing +x.
fn walk(pieces: &[(f64, f64)], s: f64) -> (f64, f64, f64) {
    let (mut x, mut y, mut th) = (0.0_f64, 0.0_f64, 0.0_f64);
    let mut left = s;
    for &(len, curvature) in pieces {
        let step = left.min(len);
        if curvature == 0.0 {
            x += step * th.cos();
            y += step * th.sin();
        } else {
            let r = 1.0 / curvature;
            let th2 = th + step * curvature;
            x += r * (th2.sin() - th.sin());
            y += r * (th.cos() - th2.cos());
            th = th2;
        }
        left -= step;
        if left <= 0.0 {
            return (x, y, th);
        }
    }
    (x + left * th.cos(), y + left * th.sin(), th)
}

fn pieces(kind: &ScenarioKind) -> Vec<(f64, f64)> {
    match *kind {
        ScenarioKind::Straight => vec![],
        ScenarioKind::ArcTurn { radius, angle } => {
            vec![(radius * angle.abs(), angle.signum() / radius)]
        }
        ScenarioKind::SCurve { radius, angle } => vec![
            (radius * angle.abs(), angle.signum() / radius),
            (radius * angle.abs(), -angle.signum() / radius),
        ],
    }
}

pub fn gen_scenario(spec: &ScenarioSpec) -> Result<Scenario> {
    spec.validate()?;
    let n = spec.steps();
    let pieces = pieces(&spec.kind);
    let gt_poses: Vec<Pose2> = (0..=n)
        .map(|j| {
            let s = spec.speed * DEFAULT_DT * j as f64;
            let (x, y, th) = walk(&pieces, s);
            Pose2::from_heading(th, x, y)
        })
        .collect();
    let gt_path = Trajectory::new(gt_poses[1..].iter().map(Pose2::position).collect(), DEFAULT_DT)?;
    let obstacle_tracks = spec
        .obstacles
        .iter()
        .map(|o| ObstacleTrack {
            boxes: (0..=n).map(|j| o.box_at(DEFAULT_DT * j as f64)).collect(),
        })
        .collect();
    Ok(Scenario {
        gt_path,
        gt_poses,
        obstacle_tracks,
    })
}

/// ArcTurn scenarios over `seeds`: radius 20 m, a quarter turn, 3 m/s for 14 s
/// (the turn completes after about 10.5 s).
pub fn arc_turn_suite(seeds: impl IntoIterator<Item = u64>) -> Vec<ScenarioSpec> {
    seeds
        .into_iter()
        .map(|seed| ScenarioSpec {
            kind: ScenarioKind::ArcTurn {
                radius: 20.0,
                angle: std::f64::consts::FRAC_PI_2,
            },
            duration: 14.0,
            speed: 3.0,
            obstacles: vec![],
            seed,
        })
        .collect()
}
