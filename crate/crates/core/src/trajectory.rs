//! Trajectory and pose data model.
//!
//! Trajectories are ordered 2-D waypoint sequences sampled at a fixed `dt`.
//! Waypoint `i` of a plan made at time `t` sits at time `t + (i + 1) * dt`.
//! Poses are SE(2) transforms; [`Pose2::apply`] maps local coordinates into
//! the parent frame and [`Pose2::apply_inverse`] maps parent coordinates into
//! the local frame, `R⁻¹(p − Γ)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default waypoint spacing in seconds (2 Hz keyframes).
pub const DEFAULT_DT: f64 = 0.5;

const POSE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Waypoint {
    pub x: f64,
    pub y: f64,
}

impl Waypoint {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn distance(&self, other: &Waypoint) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        (dx * dx + dy * dy).sqrt()
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y).sqrt()
    }

    pub fn lerp(&self, other: &Waypoint, t: f64) -> Waypoint {
        Waypoint::new(self.x + (other.x - self.x) * t, self.y + (other.y - self.y) * t)
    }
}

impl From<[f64; 2]> for Waypoint {
    fn from(v: [f64; 2]) -> Self {
        Waypoint::new(v[0], v[1])
    }
}

impl From<Waypoint> for [f64; 2] {
    fn from(p: Waypoint) -> Self {
        [p.x, p.y]
    }
}

impl From<(f64, f64)> for Waypoint {
    fn from((x, y): (f64, f64)) -> Self {
        Waypoint::new(x, y)
    }
}

/// An ordered sequence of finite waypoints at a fixed time step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTrajectory")]
pub struct Trajectory {
    dt: f64,
    points: Vec<Waypoint>,
}

#[derive(Deserialize)]
struct RawTrajectory {
    dt: f64,
    points: Vec<Waypoint>,
}

impl TryFrom<RawTrajectory> for Trajectory {
    type Error = Error;

    fn try_from(raw: RawTrajectory) -> Result<Self> {
        Trajectory::new(raw.points, raw.dt)
    }
}

impl Trajectory {
    pub fn new(points: Vec<Waypoint>, dt: f64) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidTrajectory("trajectory has no waypoints".into()));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidTrajectory(format!("dt must be positive, got {dt}")));
        }
        if let Some(i) = points.iter().position(|p| !p.is_finite()) {
            return Err(Error::InvalidTrajectory(format!("waypoint {i} is not finite")));
        }
        Ok(Self { dt, points })
    }

    /// Builds a trajectory from `(x, y)` pairs.
    pub fn from_xy(xy: &[(f64, f64)], dt: f64) -> Result<Self> {
        Self::new(xy.iter().copied().map(Waypoint::from).collect(), dt)
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn points(&self) -> &[Waypoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    /// Always false; kept for API symmetry with collections.
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn first(&self) -> Waypoint {
        self.points[0]
    }

    pub fn last(&self) -> Waypoint {
        self.points[self.points.len() - 1]
    }

    pub fn into_points(self) -> Vec<Waypoint> {
        self.points
    }

    /// Applies `f` to every waypoint. The caller guarantees `f` keeps points finite.
    pub(crate) fn map_points(&self, f: impl Fn(&Waypoint) -> Waypoint) -> Trajectory {
        Trajectory {
            dt: self.dt,
            points: self.points.iter().map(f).collect(),
        }
    }

    /// Keeps the first `n` waypoints (at least one).
    pub fn truncated(&self, n: usize) -> Trajectory {
        let n = n.clamp(1, self.len());
        Trajectory {
            dt: self.dt,
            points: self.points[..n].to_vec(),
        }
    }

    /// Total polyline length.
    pub fn arc_length(&self) -> f64 {
        self.points.windows(2).map(|w| w[0].distance(&w[1])).sum()
    }

    /// Heading at each waypoint from forward differences. The last waypoint
    /// reuses the previous heading; zero-length steps carry the previous
    /// heading forward (0 if none is known yet).
    pub fn headings(&self) -> Vec<f64> {
        let n = self.points.len();
        let mut out = Vec::with_capacity(n);
        let mut last = 0.0;
        for i in 0..n {
            if i + 1 < n {
                let dx = self.points[i + 1].x - self.points[i].x;
                let dy = self.points[i + 1].y - self.points[i].y;
                if dx.hypot(dy) > 1e-12 {
                    last = dy.atan2(dx);
                }
            }
            out.push(last);
        }
        out
    }
}

/// Rigid 2-D transform: rotation matrix plus translation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPose")]
pub struct Pose2 {
    rotation: [[f64; 2]; 2],
    translation: [f64; 2],
}

#[derive(Deserialize)]
struct RawPose {
    rotation: [[f64; 2]; 2],
    translation: [f64; 2],
}

impl TryFrom<RawPose> for Pose2 {
    type Error = Error;

    fn try_from(raw: RawPose) -> Result<Self> {
        Pose2::new(raw.rotation, raw.translation)
    }
}

impl Pose2 {
    /// Validates orthonormality (`RᵀR = I`, `det R = 1`, both within 1e-9).
    pub fn new(rotation: [[f64; 2]; 2], translation: [f64; 2]) -> Result<Self> {
        let pose = Self { rotation, translation };
        pose.validate()?;
        Ok(pose)
    }

    pub fn identity() -> Self {
        Self {
            rotation: [[1.0, 0.0], [0.0, 1.0]],
            translation: [0.0, 0.0],
        }
    }

    /// Pose located at `(x, y)` facing `heading` radians from +x.
    pub fn from_heading(heading: f64, x: f64, y: f64) -> Self {
        let (s, c) = heading.sin_cos();
        Self {
            rotation: [[c, -s], [s, c]],
            translation: [x, y],
        }
    }

    pub fn rotation(&self) -> [[f64; 2]; 2] {
        self.rotation
    }

    pub fn translation(&self) -> [f64; 2] {
        self.translation
    }

    pub fn position(&self) -> Waypoint {
        Waypoint::new(self.translation[0], self.translation[1])
    }

    pub fn heading(&self) -> f64 {
        self.rotation[1][0].atan2(self.rotation[0][0])
    }

    pub fn validate(&self) -> Result<()> {
        let r = &self.rotation;
        let finite = r.iter().flatten().chain(self.translation.iter()).all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidPose("non-finite entry".into()));
        }
        // RᵀR
        let a = r[0][0] * r[0][0] + r[1][0] * r[1][0];
        let b = r[0][0] * r[0][1] + r[1][0] * r[1][1];
        let d = r[0][1] * r[0][1] + r[1][1] * r[1][1];
        let worst = (a - 1.0).abs().max(b.abs()).max((d - 1.0).abs());
        if worst > POSE_TOLERANCE {
            return Err(Error::InvalidPose(format!(
                "rotation is not orthonormal (|RᵀR − I| = {worst:e})"
            )));
        }
        let det = r[0][0] * r[1][1] - r[0][1] * r[1][0];
        if (det - 1.0).abs() > POSE_TOLERANCE {
            return Err(Error::InvalidPose(format!("rotation determinant is {det}, expected 1")));
        }
        Ok(())
    }

    /// Local → parent: `R p + Γ`.
    pub fn apply(&self, p: &Waypoint) -> Waypoint {
        let r = &self.rotation;
        Waypoint::new(
            r[0][0] * p.x + r[0][1] * p.y + self.translation[0],
            r[1][0] * p.x + r[1][1] * p.y + self.translation[1],
        )
    }

    /// Parent → local: `R⁻¹(p − Γ)`, with `R⁻¹ = Rᵀ`.
    pub fn apply_inverse(&self, p: &Waypoint) -> Waypoint {
        let r = &self.rotation;
        let dx = p.x - self.translation[0];
        let dy = p.y - self.translation[1];
        Waypoint::new(r[0][0] * dx + r[1][0] * dy, r[0][1] * dx + r[1][1] * dy)
    }

    /// `self ∘ other`: applies `other` first, then `self`.
    pub fn compose(&self, other: &Pose2) -> Pose2 {
        let a = &self.rotation;
        let b = &other.rotation;
        let mut rotation = [[0.0; 2]; 2];
        for (i, row) in rotation.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        let t = self.apply(&Waypoint::new(other.translation[0], other.translation[1]));
        Pose2 {
            rotation,
            translation: [t.x, t.y],
        }
    }

    pub fn inverse(&self) -> Pose2 {
        let r = &self.rotation;
        let rotation = [[r[0][0], r[1][0]], [r[0][1], r[1][1]]];
        let t = Waypoint::new(-self.translation[0], -self.translation[1]);
        let tx = rotation[0][0] * t.x + rotation[0][1] * t.y;
        let ty = rotation[1][0] * t.x + rotation[1][1] * t.y;
        Pose2 {
            rotation,
            translation: [tx, ty],
        }
    }
}

impl Default for Pose2 {
    fn default() -> Self {
        Self::identity()
    }
}

/// Re-expresses `traj` in the frame described by `pose`: every point `p`
/// becomes `R⁻¹(p − Γ)`.
pub fn transform_to_frame(traj: &Trajectory, pose: &Pose2) -> Result<Trajectory> {
    pose.validate()?;
    Ok(traj.map_points(|p| pose.apply_inverse(p)))
}

/// Inverse of [`transform_to_frame`]: every point `p` becomes `R p + Γ`.
pub fn transform_from_frame(traj: &Trajectory, pose: &Pose2) -> Result<Trajectory> {
    pose.validate()?;
    Ok(traj.map_points(|p| pose.apply(p)))
}

/// Frame delta between two ego world poses.
///
/// The returned pose plugs into [`transform_to_frame`] to carry points
/// expressed in the current ego frame into the previous ego frame. It is the
/// previous ego pose as seen from the current ego frame.
pub fn relative_pose(world_pose_prev: &Pose2, world_pose_cur: &Pose2) -> Result<Pose2> {
    world_pose_prev.validate()?;
    world_pose_cur.validate()?;
    Ok(world_pose_cur.inverse().compose(world_pose_prev))
}

/// Resamples `traj` to `n` points evenly spaced in arc length, interpolating
/// linearly along the polyline. Endpoints are copied exactly.
pub fn resample(traj: &Trajectory, n: usize) -> Result<Trajectory> {
    if traj.len() < 2 {
        return Err(Error::UnderspecifiedGeometry(
            "cannot resample a single-waypoint trajectory".into(),
        ));
    }
    if n < 2 {
        return Err(Error::UnderspecifiedGeometry(format!("cannot resample to {n} points")));
    }
    let pts = traj.points();
    let mut cumulative = Vec::with_capacity(pts.len());
    let mut acc = 0.0;
    cumulative.push(0.0);
    for w in pts.windows(2) {
        acc += w[0].distance(&w[1]);
        cumulative.push(acc);
    }
    let total = acc;

    let mut out = Vec::with_capacity(n);
    out.push(pts[0]);
    let mut seg = 0;
    for m in 1..n - 1 {
        let target = total * m as f64 / (n - 1) as f64;
        while seg + 2 < cumulative.len() && cumulative[seg + 1] < target {
            seg += 1;
        }
        let span = cumulative[seg + 1] - cumulative[seg];
        let t = if span > 0.0 {
            ((target - cumulative[seg]) / span).clamp(0.0, 1.0)
        } else {
            0.0
        };
        out.push(pts[seg].lerp(&pts[seg + 1], t));
    }
    out.push(traj.last());
    Trajectory::new(out, traj.dt())
}

/// Per-waypoint flags marking which waypoints of the current plan overlap
/// in time with the previous plan.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OverlapMask {
    flags: Vec<bool>,
    frame_gap_steps: usize,
}

impl OverlapMask {
    pub fn new(flags: Vec<bool>, frame_gap_steps: usize) -> Self {
        Self { flags, frame_gap_steps }
    }

    pub fn flags(&self) -> &[bool] {
        &self.flags
    }

    /// Steps between the previous and current plan; waypoint `i` of the
    /// current plan corresponds to waypoint `i + frame_gap_steps` of the previous.
    pub fn frame_gap_steps(&self) -> usize {
        self.frame_gap_steps
    }

    pub fn len(&self) -> usize {
        self.flags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flags.is_empty()
    }

    pub fn count(&self) -> usize {
        self.flags.iter().filter(|f| **f).count()
    }

    /// Clears every flag at index `>= n`.
    pub fn limited_to(&self, n: usize) -> OverlapMask {
        OverlapMask {
            flags: self.flags.iter().enumerate().map(|(i, f)| *f && i < n).collect(),
            frame_gap_steps: self.frame_gap_steps,
        }
    }
}

/// Flag `i` is set iff `i + frame_gap_steps < prev.len()`.
pub fn overlap_mask(cur: &Trajectory, prev: &Trajectory, frame_gap_steps: usize) -> OverlapMask {
    let flags = (0..cur.len()).map(|i| i + frame_gap_steps < prev.len()).collect();
    OverlapMask { flags, frame_gap_steps }
}
