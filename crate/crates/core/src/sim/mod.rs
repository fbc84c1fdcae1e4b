//! Seeded closed-loop simulation: scenario generation, synthetic multi-modal
//! proposals, one-shot and momentum planners, and replayable JSONL logs.

mod closed_loop;
mod planner;
mod proposals;
mod scenario;

pub use closed_loop::{
    evaluate_log, run_closed_loop, EgoState, FrameRecord, LogHeader, Occlusion, OcclusionMode, ScenarioLog, SimConfig,
};
pub use planner::{
    step_momentum, step_momentum_with_instances, step_oneshot, MomentumConfig, MomentumStep, Planner, PlanningHistory,
    MAX_HISTORY_DEPTH,
};
pub use proposals::{derive_seed, embed_obstacles, embed_trajectory, perturb_features, propose, ProposalConfig};
pub use scenario::{arc_turn_suite, gen_scenario, ObstacleScript, Scenario, ScenarioKind, ScenarioSpec};
