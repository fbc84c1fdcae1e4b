//! Planning evaluation: L2 displacement, collision rate, trajectory
//! prediction consistency (TPC), minADE/minFDE, and training criteria.

mod collision;
mod consistency;
mod displacement;
mod loss;
mod report;
mod summation;

pub use collision::{boxes_overlap, collision_flags, collision_rate, ego_boxes, EgoDims, ObstacleBox, ObstacleTrack};
pub use consistency::{tpc, tpc_dataset};
pub use displacement::{ade_fde, horizon_steps, l2_error, min_ade_fde, L2Protocol};
pub use loss::{
    combined_losses, focal_loss, l1_loss, DetectionTerms, LossWeights, MapTerms, MotionTerms, PlanTerms, StageLosses,
};
pub use report::{FrameMetrics, MetricReport, CSV_HEADER};
pub use summation::{mean, NeumaierSum};
