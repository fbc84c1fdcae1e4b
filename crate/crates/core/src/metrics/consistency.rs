//! Trajectory prediction consistency (TPC).
//!
//! Per sample, the current plan is carried into the previous plan's frame and
//! compared to it on the temporally overlapping waypoints; the sample value is
//! the RMSE over those waypoints. The dataset value is the mean of sample
//! values over samples that have any overlap.

use crate::error::{Error, Result};
use crate::trajectory::{transform_to_frame, OverlapMask, Pose2, Trajectory};

use super::displacement::check_same_dt;
use super::summation::NeumaierSum;

/// RMSE between `cur_pred` (after frame transfer) and `prev_pred` over the
/// masked waypoints, or `None` when the mask selects nothing.
pub fn tpc(
    cur_pred: &Trajectory,
    prev_pred: &Trajectory,
    frame_delta: &Pose2,
    mask: &OverlapMask,
) -> Result<Option<f64>> {
    check_same_dt(cur_pred, prev_pred)?;
    if mask.len() != cur_pred.len() {
        return Err(Error::shape("overlap mask", cur_pred.len(), mask.len()));
    }
    let moved = transform_to_frame(cur_pred, frame_delta)?;
    let gap = mask.frame_gap_steps();
    let mut sum_sq = 0.0;
    let mut count = 0usize;
    for (i, (&flag, p)) in mask.flags().iter().zip(moved.points()).enumerate() {
        if !flag {
            continue;
        }
        let q = prev_pred
            .points()
            .get(i + gap)
            .ok_or_else(|| Error::shape("overlap mask correspondence", format!("< {}", prev_pred.len()), i + gap))?;
        let dx = p.x - q.x;
        let dy = p.y - q.y;
        sum_sq += dx * dx + dy * dy;
        count += 1;
    }
    if count == 0 {
        return Ok(None);
    }
    Ok(Some((sum_sq / count as f64).sqrt()))
}

/// Mean of the per-sample values, skipping samples without overlap.
pub fn tpc_dataset<I: IntoIterator<Item = Option<f64>>>(samples: I) -> Option<f64> {
    let mut sum = NeumaierSum::default();
    let mut n = 0usize;
    for v in samples.into_iter().flatten() {
        sum.add(v);
        n += 1;
    }
    (n > 0).then(|| sum.value() / n as f64)
}
