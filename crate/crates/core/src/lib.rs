//! Momentum-aware trajectory selection toolkit.
//!
//! * [`trajectory`]: waypoints, SE(2) poses, frame transfer, resampling, overlap masks.
//! * [`matching`]: Hausdorff / mean-Euclidean distances and history-consistent selection.
//! * [`interactor`]: gated LSTM history mixer, cross-attention and plan head, with gradients.
//! * [`metrics`]: L2, collision rate, TPC, minADE/minFDE and training criteria.
//! * [`sim`]: seeded closed-loop scenarios comparing one-shot and momentum planners.
//! * [`curation`]: turning-scenario filter for trajectory datasets.

pub mod candidates;
pub mod curation;
pub mod error;
pub mod interactor;
pub mod linalg;
pub mod matching;
pub mod metrics;
pub mod sim;
pub mod trajectory;

pub use candidates::TrajectorySet;
pub use error::{Error, Result};
pub use linalg::Matrix;
pub use matching::DistanceKind;
pub use trajectory::{OverlapMask, Pose2, Trajectory, Waypoint};
