use serde::{Deserialize, Serialize};

use crate::candidates::{argmax, argmin, TrajectorySet};
use crate::error::{Error, Result};
use crate::interactor::{MpiDims, QueryBatch};
use crate::metrics::{
    collision_flags, horizon_steps, l2_error, min_ade_fde, tpc, EgoDims, FrameMetrics, L2Protocol, MetricReport,
    ObstacleBox, ObstacleTrack,
};
use crate::trajectory::{overlap_mask, relative_pose, transform_to_frame, Pose2, Trajectory, Waypoint, DEFAULT_DT};

use super::planner::{offset_trajectory, step_momentum_with_instances, step_oneshot, Planner, PlanningHistory};
use super::proposals::{derive_seed, embed_obstacles, embed_trajectory, perturb_features, propose, ProposalConfig};
use super::scenario::{gen_scenario, ScenarioSpec};

const STREAM_PROPOSALS: u64 = 1;
const STREAM_QUERY_NOISE: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OcclusionMode {
    /// Exchange the best and worst scores.
    Swap,
    /// Replace every score by the mean score.
    Flatten,
}

/// Score corruption over frames `start..end`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Occlusion {
    pub start: usize,
    pub end: usize,
    pub mode: OcclusionMode,
}

impl Occlusion {
    fn corrupt(&self, frame: usize, scores: &mut [f64]) {
        if !(self.start..self.end).contains(&frame) || scores.is_empty() {
            return;
        }
        match self.mode {
            OcclusionMode::Swap => {
                let hi = argmax(scores).expect("non-empty");
                let lo = argmin(scores).expect("non-empty");
                scores.swap(hi, lo);
            }
            OcclusionMode::Flatten => {
                let m = scores.iter().sum::<f64>() / scores.len() as f64;
                scores.iter_mut().for_each(|s| *s = m);
            }
        }
    }
}

/// Everything besides the scenario and planner that shapes a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub proposals: ProposalConfig,
    /// Waypoints per plan.
    pub n_t: usize,
    /// Std-dev multiplier of the Gaussian noise added to planning queries.
    pub ns: f64,
    pub horizons_s: Vec<f64>,
    pub protocol: L2Protocol,
    pub ego: EgoDims,
    pub occlusion: Option<Occlusion>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            proposals: ProposalConfig::default(),
            n_t: 6,
            ns: 0.1,
            horizons_s: vec![1.0, 2.0, 3.0],
            protocol: L2Protocol::default(),
            ego: EgoDims::default(),
            occlusion: None,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        self.proposals.validate()?;
        if self.n_t < 2 {
            return Err(Error::Config(format!("n_t must be at least 2, got {}", self.n_t)));
        }
        if !(self.ns.is_finite() && self.ns >= 0.0) {
            return Err(Error::Config(format!("ns must be non-negative, got {}", self.ns)));
        }
        if self.horizons_s.is_empty() {
            return Err(Error::Config("at least one horizon is required".into()));
        }
        for &h in &self.horizons_s {
            horizon_steps(h, DEFAULT_DT, self.n_t).map_err(|e| Error::Config(e.to_string()))?;
        }
        ObstacleBox::new(Waypoint::default(), 0.0, self.ego.length, self.ego.width)
            .map_err(|e| Error::Config(format!("ego dims: {e}")))?;
        if let Some(o) = self.occlusion {
            if o.start > o.end {
                return Err(Error::Config("occlusion window must satisfy start ≤ end".into()));
            }
        }
        Ok(())
    }

    pub fn mpi_dims(&self) -> MpiDims {
        MpiDims {
            d_q: self.proposals.d_q,
            k: self.proposals.k,
            n_t: self.n_t,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EgoState {
    pub pose: Pose2,
    pub speed: f64,
    pub time: f64,
}

/// One planning cycle. Trajectories are in the world frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameRecord {
    pub time: f64,
    pub ego_pose: Pose2,
    pub proposals: TrajectorySet,
    pub chosen_index: usize,
    pub chosen_trajectory: Trajectory,
    /// Candidate picked by trajectory matching (momentum frames only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub selected_index: Option<usize>,
    /// Plan-head scores (momentum frames only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refined_scores: Option<Vec<f64>>,
}

/// First line of a log file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogHeader {
    pub spec: ScenarioSpec,
    pub seed: u64,
    pub sim: SimConfig,
    pub planner: Planner,
    /// Ground truth at `dt, 2·dt, …` in the world frame.
    pub gt_path: Trajectory,
    /// Obstacle boxes at `0, dt, 2·dt, …` in the world frame.
    pub obstacle_tracks: Vec<ObstacleTrack>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioLog {
    pub header: LogHeader,
    pub frames: Vec<FrameRecord>,
}

impl ScenarioLog {
    pub fn to_jsonl(&self) -> String {
        let mut out = serde_json::to_string(&self.header).expect("header serializes");
        out.push('\n');
        for f in &self.frames {
            out.push_str(&serde_json::to_string(f).expect("frame serializes"));
            out.push('\n');
        }
        out
    }

    /// Parses and validates a log. Errors carry 1-based line numbers.
    pub fn from_jsonl(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let corrupt = |line: usize, reason: String| Error::CorruptLog { line: line + 1, reason };
        let (hl, first) = lines.next().ok_or(Error::CorruptLog {
            line: 1,
            reason: "missing header".into(),
        })?;
        let header: LogHeader = serde_json::from_str(first).map_err(|e| corrupt(hl, e.to_string()))?;
        header.sim.validate().map_err(|e| corrupt(hl, e.to_string()))?;
        let n_t = header.sim.n_t;
        let mut frames: Vec<FrameRecord> = Vec::new();
        for (i, line) in lines {
            let f: FrameRecord = serde_json::from_str(line).map_err(|e| corrupt(i, e.to_string()))?;
            let idx = frames.len();
            if f.chosen_index >= f.proposals.len() {
                return Err(corrupt(i, format!("chosen index {} out of range", f.chosen_index)));
            }
            if f.chosen_trajectory.len() != n_t || f.proposals.trajectories().iter().any(|t| t.len() != n_t) {
                return Err(corrupt(i, format!("trajectories must hold {n_t} waypoints")));
            }
            if idx + n_t > header.gt_path.len() {
                return Err(corrupt(i, "frame extends past the ground truth".into()));
            }
            if (f.time - idx as f64 * DEFAULT_DT).abs() > 1e-9 {
                return Err(corrupt(
                    i,
                    format!("frame time {} breaks the {DEFAULT_DT} s cadence", f.time),
                ));
            }
            frames.push(f);
        }
        Ok(Self { header, frames })
    }
}

/// Number of planning frames: every frame needs `n_t` steps of ground truth.
fn frame_count(gt_len: usize, n_t: usize) -> Result<usize> {
    if gt_len < n_t {
        return Err(Error::Config(format!(
            "scenario provides {gt_len} future steps but a plan needs {n_t}"
        )));
    }
    Ok(gt_len - n_t + 1)
}

fn window(path: &Trajectory, start: usize, n: usize) -> Result<Trajectory> {
    Trajectory::new(path.points()[start..start + n].to_vec(), path.dt())
}

fn query_batch(set: &TrajectorySet) -> Result<QueryBatch> {
    QueryBatch::new(set.queries().to_vec(), set.scores().to_vec())
}

/// Simulates one scenario and evaluates it.
///
/// Proposals are drawn around the ground-truth future, so they are identical
/// for every planner given the same spec and config. Queries embed each
/// candidate in the ground-truth frame, then receive `ns` noise. The ego
/// executes the first waypoint of its plan and replans.
pub fn run_closed_loop(spec: &ScenarioSpec, sim: &SimConfig, planner: &Planner) -> Result<(ScenarioLog, MetricReport)> {
    sim.validate()?;
    let momentum = match planner {
        Planner::OneShot => None,
        Planner::Momentum(c) => {
            c.validate()?;
            Some((c, c.weights(sim.mpi_dims())))
        }
    };
    let scenario = gen_scenario(spec)?;
    let n_t = sim.n_t;
    let frames_total = frame_count(scenario.gt_path.len(), n_t)?;
    let depth = planner.history_depth();
    let k = sim.proposals.k;

    let mut ego = EgoState {
        pose: scenario.gt_poses[0],
        speed: spec.speed,
        time: 0.0,
    };
    let mut frames: Vec<FrameRecord> = Vec::with_capacity(frames_total);
    for f in 0..frames_total {
        let gt_future = window(&scenario.gt_path, f, n_t)?;
        let raw = propose(
            &gt_future,
            &sim.proposals,
            derive_seed(spec.seed, STREAM_PROPOSALS, f as u64),
        )?;
        let reference = scenario.gt_poses[f];
        let mut queries = Vec::with_capacity(k);
        for (i, t) in raw.trajectories().iter().enumerate() {
            let q = embed_trajectory(&transform_to_frame(t, &reference)?, sim.proposals.d_q);
            let seed = derive_seed(spec.seed, STREAM_QUERY_NOISE, (f * k + i) as u64);
            queries.push(perturb_features(&q, sim.ns, seed)?);
        }
        let mut scores = raw.scores().to_vec();
        if let Some(o) = &sim.occlusion {
            o.corrupt(f, &mut scores);
        }
        let proposals = raw.with_scores(scores)?.with_queries(queries)?;

        let (chosen_index, chosen_trajectory, selected_index, refined_scores) = match &momentum {
            Some((cfg, weights)) if depth > 0 && !frames.is_empty() => {
                let prev = frames.last().expect("non-empty");
                let start = frames.len().saturating_sub(depth);
                let batches = frames[start..]
                    .iter()
                    .map(|r| query_batch(&r.proposals))
                    .collect::<Result<Vec<_>>>()?;
                let history =
                    PlanningHistory::new(transform_to_frame(&prev.chosen_trajectory, &prev.ego_pose)?, batches)?;
                let delta = relative_pose(&prev.ego_pose, &ego.pose)?;
                let boxes: Vec<ObstacleBox> = scenario
                    .obstacle_tracks
                    .iter()
                    .filter_map(|t| t.at(f))
                    .map(|b| ObstacleBox {
                        center: ego.pose.apply_inverse(&b.center),
                        heading: b.heading - ego.pose.heading(),
                        ..*b
                    })
                    .collect();
                let instances = embed_obstacles(&boxes, sim.proposals.d_q);
                let local = proposals.mapped_to_frame(&ego.pose);
                let step =
                    step_momentum_with_instances(&local, Some(&history), &delta, weights, cfg.distance, &instances)?;
                let selected = step.selected.expect("history given");
                let plan = step.plan.as_ref().expect("history given");
                // offsets come out in the ego frame; apply them to the world-frame anchor
                let chosen_world =
                    offset_trajectory(&proposals.trajectories()[selected], plan, step.chosen, &ego.pose)?;
                (step.chosen, chosen_world, Some(selected), Some(plan.scores.clone()))
            }
            _ => {
                let idx = step_oneshot(&proposals)?;
                (idx, proposals.trajectories()[idx].clone(), None, None)
            }
        };

        let record = FrameRecord {
            time: ego.time,
            ego_pose: ego.pose,
            proposals,
            chosen_index,
            chosen_trajectory,
            selected_index,
            refined_scores,
        };
        ego = advance(&ego, &record.chosen_trajectory);
        frames.push(record);
    }

    let log = ScenarioLog {
        header: LogHeader {
            spec: spec.clone(),
            seed: spec.seed,
            sim: sim.clone(),
            planner: *planner,
            gt_path: scenario.gt_path,
            obstacle_tracks: scenario.obstacle_tracks,
        },
        frames,
    };
    let report = evaluate_log(&log, sim.protocol)?;
    Ok((log, report))
}

/// Moves to the plan's first waypoint, facing along the plan.
fn advance(ego: &EgoState, plan: &Trajectory) -> EgoState {
    let next = plan.first();
    let heading = plan.headings()[0];
    EgoState {
        pose: Pose2::from_heading(heading, next.x, next.y),
        speed: ego.pose.position().distance(&next) / plan.dt(),
        time: ego.time + plan.dt(),
    }
}

/// Recomputes the metrics of a log from its contents alone.
///
/// Plans of consecutive frames are both stored in the world frame, so the
/// frame transfer for TPC is the identity.
pub fn evaluate_log(log: &ScenarioLog, protocol: L2Protocol) -> Result<MetricReport> {
    let h = &log.header;
    let horizons = &h.sim.horizons_s;
    let n_t = h.sim.n_t;
    let mut per_frame = Vec::with_capacity(log.frames.len());
    for (f, rec) in log.frames.iter().enumerate() {
        let gt = window(&h.gt_path, f, n_t)?;
        let plan = &rec.chosen_trajectory;
        let l2 = l2_error(plan, &gt, horizons, protocol)?;
        let tracks: Vec<ObstacleTrack> = h
            .obstacle_tracks
            .iter()
            .map(|t| ObstacleTrack {
                boxes: (1..=n_t).filter_map(|i| t.at(f + i).copied()).collect(),
            })
            .collect();
        let collision = collision_flags(plan, h.sim.ego, &tracks, horizons)?;
        let tpc_h = match f.checked_sub(1).map(|p| &log.frames[p]) {
            None => vec![None; horizons.len()],
            Some(prev) => {
                let mask = overlap_mask(plan, &prev.chosen_trajectory, 1);
                horizons
                    .iter()
                    .map(|&hz| {
                        let steps = horizon_steps(hz, plan.dt(), plan.len())?;
                        tpc(
                            plan,
                            &prev.chosen_trajectory,
                            &Pose2::identity(),
                            &mask.limited_to(steps),
                        )
                    })
                    .collect::<Result<Vec<_>>>()?
            }
        };
        let (min_ade, min_fde, _) = min_ade_fde(&rec.proposals, &gt)?;
        per_frame.push(FrameMetrics {
            l2,
            collision,
            tpc: tpc_h,
            min_ade,
            min_fde,
        });
    }
    MetricReport::from_frames(horizons, &per_frame)
}
