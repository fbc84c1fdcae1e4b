use serde::{Deserialize, Serialize};

use crate::candidates::{argmax, TrajectorySet};
use crate::error::{Error, Result};
use crate::interactor::{mpi_forward_seq, MpiDims, PlanOutput, QueryBatch, WeightBundle};
use crate::linalg::Matrix;
use crate::matching::{ttm_select, DistanceKind};
use crate::trajectory::{Pose2, Trajectory, Waypoint};

/// Momentum planner settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MomentumConfig {
    pub distance: DistanceKind,
    /// Previous frames fed to the interactor; 0 disables momentum.
    pub history_depth: usize,
    pub weights_seed: u64,
    /// Multiplier on the seeded plan-head trajectory block. The default 0
    /// leaves the selected candidate unmodified until trained weights exist.
    pub head_traj_scale: f64,
}

impl Default for MomentumConfig {
    fn default() -> Self {
        Self {
            distance: DistanceKind::Hausdorff,
            history_depth: 1,
            weights_seed: 0,
            head_traj_scale: 0.0,
        }
    }
}

pub const MAX_HISTORY_DEPTH: usize = 2;

impl MomentumConfig {
    pub fn validate(&self) -> Result<()> {
        if self.history_depth > MAX_HISTORY_DEPTH {
            return Err(Error::Config(format!(
                "history depth must be at most {MAX_HISTORY_DEPTH}, got {}",
                self.history_depth
            )));
        }
        if !self.head_traj_scale.is_finite() {
            return Err(Error::Config("head_traj_scale must be finite".into()));
        }
        Ok(())
    }

    pub fn weights(&self, dims: MpiDims) -> WeightBundle {
        let mut w = WeightBundle::seeded(dims, self.weights_seed);
        w.head_w_traj = w.head_w_traj.scaled(self.head_traj_scale);
        w.head_b_traj = w.head_b_traj.scaled(self.head_traj_scale);
        w
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Planner {
    OneShot,
    Momentum(MomentumConfig),
}

impl Planner {
    pub fn history_depth(&self) -> usize {
        match self {
            Planner::OneShot => 0,
            Planner::Momentum(c) => c.history_depth,
        }
    }
}

/// Highest score wins; ties go to the lowest index.
pub fn step_oneshot(proposals: &TrajectorySet) -> Result<usize> {
    argmax(proposals.scores()).ok_or(Error::EmptyInput("proposals"))
}

/// What the momentum planner remembers from earlier frames.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanningHistory {
    /// Previously executed plan, in the previous planning frame.
    pub chosen: Trajectory,
    /// Query batches of earlier frames, oldest first.
    pub batches: Vec<QueryBatch>,
}

impl PlanningHistory {
    pub fn new(chosen: Trajectory, batches: Vec<QueryBatch>) -> Result<Self> {
        if batches.is_empty() {
            return Err(Error::EmptyInput("history query batches"));
        }
        Ok(Self { chosen, batches })
    }
}

/// One momentum planning decision.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumStep {
    /// Argmax of the refined scores (or of the raw scores without history).
    pub chosen: usize,
    /// Candidate picked by trajectory matching, `None` without history.
    pub selected: Option<usize>,
    /// Plan-head output, `None` without history.
    pub plan: Option<PlanOutput>,
    pub refined: TrajectorySet,
}

/// [`step_momentum_with_instances`] without surrounding agents.
pub fn step_momentum(
    proposals: &TrajectorySet,
    history: Option<&PlanningHistory>,
    frame_delta: &Pose2,
    weights: &WeightBundle,
    kind: DistanceKind,
) -> Result<MomentumStep> {
    let none = Matrix::zeros(0, weights.dims.d_q);
    step_momentum_with_instances(proposals, history, frame_delta, weights, kind, &none)
}

/// Matches the candidates against the previously executed plan, enriches the
/// matched candidate's query with the history batches, and regenerates the
/// candidates as the matched trajectory plus per-mode plan-head offsets.
/// Without history this is [`step_oneshot`] on the raw proposals.
pub fn step_momentum_with_instances(
    proposals: &TrajectorySet,
    history: Option<&PlanningHistory>,
    frame_delta: &Pose2,
    weights: &WeightBundle,
    kind: DistanceKind,
    instances: &Matrix,
) -> Result<MomentumStep> {
    let Some(history) = history else {
        return Ok(MomentumStep {
            chosen: step_oneshot(proposals)?,
            selected: None,
            plan: None,
            refined: proposals.clone(),
        });
    };
    if proposals.is_empty() {
        return Err(Error::EmptyInput("proposals"));
    }
    let dims = weights.dims;
    if proposals.len() != dims.k {
        return Err(Error::shape("proposal count", dims.k, proposals.len()));
    }
    if proposals.queries().is_empty() {
        return Err(Error::EmptyInput("proposal queries"));
    }
    let selected = ttm_select(proposals, &history.chosen, frame_delta, kind)?;
    let anchor = &proposals.trajectories()[selected];
    if anchor.len() != dims.n_t {
        return Err(Error::shape("trajectory length", dims.n_t, anchor.len()));
    }
    let plan = mpi_forward_seq(&proposals.queries()[selected], &history.batches, instances, weights)?;
    let refined = (0..dims.k)
        .map(|k| offset_trajectory(anchor, &plan, k, &Pose2::identity()))
        .collect::<Result<Vec<_>>>()?;
    let chosen = argmax(&plan.scores).expect("k > 0");
    let refined = TrajectorySet::new(refined, plan.scores.clone(), proposals.queries().to_vec())?;
    Ok(MomentumStep {
        chosen,
        selected: Some(selected),
        plan: Some(plan),
        refined,
    })
}

/// `anchor + R·offset_k`, where offsets are expressed in the frame whose
/// orientation is `frame`.
pub(crate) fn offset_trajectory(anchor: &Trajectory, plan: &PlanOutput, k: usize, frame: &Pose2) -> Result<Trajectory> {
    let r = frame.rotation();
    let pts = anchor
        .points()
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let [ox, oy] = plan.waypoint(k, i);
            Waypoint::new(p.x + (r[0][0] * ox + r[0][1] * oy), p.y + (r[1][0] * ox + r[1][1] * oy))
        })
        .collect();
    Trajectory::new(pts, anchor.dt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trajectory::relative_pose;

    fn line(offset: f64) -> Trajectory {
        let pts: Vec<(f64, f64)> = (1..=6).map(|i| (2.0 * i as f64, offset)).collect();
        Trajectory::from_xy(&pts, 0.5).unwrap()
    }

    fn set(offsets: &[f64], scores: &[f64], d: usize) -> TrajectorySet {
        let q = (0..offsets.len()).map(|k| vec![k as f64 * 0.1; d]).collect();
        TrajectorySet::new(offsets.iter().map(|o| line(*o)).collect(), scores.to_vec(), q).unwrap()
    }

    #[test]
    fn oneshot_argmax() {
        let s = set(&[0.0, 1.0, 2.0], &[0.1, 0.9, 0.3], 2);
        assert_eq!(step_oneshot(&s).unwrap(), 1);
        let s = set(&[0.0, 1.0, 2.0], &[0.5; 3], 2);
        assert_eq!(step_oneshot(&s).unwrap(), 0);
        let empty = TrajectorySet::without_queries(vec![], vec![]);
        assert!(empty.is_err() || step_oneshot(&empty.unwrap()).is_err());
    }

    #[test]
    fn no_history_falls_back() {
        let s = set(&[0.0, 1.0, 2.0], &[0.1, 0.9, 0.3], 4);
        let w = WeightBundle::seeded(MpiDims { d_q: 4, k: 3, n_t: 6 }, 1);
        let step = step_momentum(&s, None, &Pose2::identity(), &w, DistanceKind::Hausdorff).unwrap();
        assert_eq!(step.chosen, 1);
        assert_eq!(step.refined, s);
    }

    #[test]
    fn zero_weights_uniform_tie() {
        let d = 4;
        let s = set(&[3.0, 0.0, -2.0], &[0.9, 0.1, 0.5], d);
        let w = WeightBundle::zeros(MpiDims { d_q: d, k: 3, n_t: 6 });
        let batch = QueryBatch::new(s.queries().to_vec(), s.scores().to_vec()).unwrap();
        let h = PlanningHistory::new(line(0.0), vec![batch]).unwrap();
        let step = step_momentum(&s, Some(&h), &Pose2::identity(), &w, DistanceKind::Hausdorff).unwrap();
        assert_eq!(step.selected, Some(1));
        assert!(step.refined.scores().iter().all(|v| *v == 0.0));
        assert_eq!(step.chosen, 0);
        for t in step.refined.trajectories() {
            assert_eq!(t, &line(0.0));
        }
    }

    #[test]
    fn shape_errors() {
        let s = set(&[0.0, 1.0], &[0.5, 0.5], 4);
        let w = WeightBundle::zeros(MpiDims { d_q: 4, k: 3, n_t: 6 });
        let batch = QueryBatch::new(vec![vec![0.0; 4]], vec![0.0]).unwrap();
        let h = PlanningHistory::new(line(0.0), vec![batch]).unwrap();
        assert!(matches!(
            step_momentum(&s, Some(&h), &Pose2::identity(), &w, DistanceKind::Hausdorff),
            Err(Error::Shape { .. })
        ));
        assert!(PlanningHistory::new(line(0.0), vec![]).is_err());
        assert!(MomentumConfig {
            history_depth: 3,
            ..Default::default()
        }
        .validate()
        .is_err());
    }

    #[test]
    fn oscillating_leader() {
        // Two modes, left and right of the lane; the score leader alternates.
        let d = 4;
        let w = WeightBundle::zeros(MpiDims { d_q: d, k: 2, n_t: 6 });
        let frames = [
            set(&[1.5, -1.5], &[0.8, 0.2], d),
            set(&[1.5, -1.5], &[0.3, 0.7], d),
            set(&[1.5, -1.5], &[0.9, 0.1], d),
            set(&[1.5, -1.5], &[0.2, 0.8], d),
        ];
        // every frame is a 2 m step forward along +x
        let step = Pose2::from_heading(0.0, 2.0, 0.0);
        let delta = relative_pose(&Pose2::identity(), &step).unwrap();
        let mut oneshot = vec![];
        let mut momentum = vec![];
        let mut prev: Option<(Trajectory, QueryBatch)> = None;
        for f in &frames {
            oneshot.push(step_oneshot(f).unwrap());
            let h = prev
                .as_ref()
                .map(|(t, b)| PlanningHistory::new(t.clone(), vec![b.clone()]).unwrap());
            let m = step_momentum(f, h.as_ref(), &delta, &w, DistanceKind::Hausdorff).unwrap();
            let anchor = m.selected.unwrap_or(m.chosen);
            momentum.push(anchor);
            prev = Some((
                m.refined.trajectories()[m.chosen].clone(),
                QueryBatch::new(f.queries().to_vec(), f.scores().to_vec()).unwrap(),
            ));
        }
        assert_eq!(oneshot, [0, 1, 0, 1]);
        assert_eq!(momentum, [0, 0, 0, 0]);
    }
}
