use serde::{Deserialize, Serialize};

use crate::candidates::TrajectorySet;
use crate::error::{Error, Result};
use crate::trajectory::Trajectory;

/// How L2 is reported at a horizon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum L2Protocol {
    /// Displacement at the horizon's waypoint (VAD style).
    #[default]
    AtTimestep,
    /// Mean displacement over every waypoint up to the horizon (UniAD style).
    AveragedUpTo,
}

impl std::str::FromStr for L2Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "vad" | "at_timestep" => Ok(L2Protocol::AtTimestep),
            "uniad" | "averaged_up_to" => Ok(L2Protocol::AveragedUpTo),
            other => Err(Error::Config(format!(
                "unknown protocol `{other}` (expected uniad or vad)"
            ))),
        }
    }
}

/// Number of waypoints covered by `horizon_s`; the horizon must be a whole
/// number of steps and fit inside `len` waypoints.
pub fn horizon_steps(horizon_s: f64, dt: f64, len: usize) -> Result<usize> {
    let out_of_range = || Error::HorizonOutOfRange { horizon_s, dt, len };
    if !(horizon_s.is_finite() && horizon_s > 0.0) {
        return Err(out_of_range());
    }
    let steps = horizon_s / dt;
    let rounded = steps.round();
    if (steps - rounded).abs() > 1e-9 || rounded < 1.0 || rounded as usize > len {
        return Err(out_of_range());
    }
    Ok(rounded as usize)
}

pub(crate) fn check_same_dt(a: &Trajectory, b: &Trajectory) -> Result<()> {
    if (a.dt() - b.dt()).abs() > 1e-12 {
        return Err(Error::Domain(format!("time steps differ: {} vs {}", a.dt(), b.dt())));
    }
    Ok(())
}

/// L2 displacement error at each horizon under `protocol`.
pub fn l2_error(pred: &Trajectory, gt: &Trajectory, horizons_s: &[f64], protocol: L2Protocol) -> Result<Vec<f64>> {
    check_same_dt(pred, gt)?;
    let len = pred.len().min(gt.len());
    let disp: Vec<f64> = pred
        .points()
        .iter()
        .zip(gt.points())
        .map(|(p, g)| p.distance(g))
        .collect();
    horizons_s
        .iter()
        .map(|&h| {
            let steps = horizon_steps(h, pred.dt(), len)?;
            Ok(match protocol {
                L2Protocol::AtTimestep => disp[steps - 1],
                L2Protocol::AveragedUpTo => disp[..steps].iter().sum::<f64>() / steps as f64,
            })
        })
        .collect()
}

/// Average and final displacement of one trajectory against ground truth.
pub fn ade_fde(pred: &Trajectory, gt: &Trajectory) -> Result<(f64, f64)> {
    if pred.len() != gt.len() {
        return Err(Error::Alignment {
            left: pred.len(),
            right: gt.len(),
        });
    }
    let disp: Vec<f64> = pred
        .points()
        .iter()
        .zip(gt.points())
        .map(|(p, g)| p.distance(g))
        .collect();
    let ade = disp.iter().sum::<f64>() / disp.len() as f64;
    Ok((ade, disp[disp.len() - 1]))
}

/// Candidate with the lowest ADE: `(ade, fde, index)`; ties go to the lowest index.
pub fn min_ade_fde(candidates: &TrajectorySet, gt: &Trajectory) -> Result<(f64, f64, usize)> {
    if candidates.is_empty() {
        return Err(Error::EmptyInput("min_ade_fde candidates"));
    }
    let mut best: Option<(f64, f64, usize)> = None;
    for (k, c) in candidates.trajectories().iter().enumerate() {
        let (ade, fde) = ade_fde(c, gt)?;
        if best.is_none_or(|(b, _, _)| ade < b) {
            best = Some((ade, fde, k));
        }
    }
    Ok(best.expect("non-empty"))
}
