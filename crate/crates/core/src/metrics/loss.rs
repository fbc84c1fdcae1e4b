//! Training criteria: focal classification loss, L1 regression and the
//! two-stage weighted objectives.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `−α (1 − p_t)^γ ln p_t` where `p_t = prob` for a positive target and
/// `1 − prob` otherwise.
pub fn focal_loss(prob: f64, positive: bool, alpha: f64, gamma: f64) -> Result<f64> {
    if !(prob > 0.0 && prob < 1.0) {
        return Err(Error::Domain(format!("probability must lie in (0, 1), got {prob}")));
    }
    let p_t = if positive { prob } else { 1.0 - prob };
    Ok(-alpha * (1.0 - p_t).powf(gamma) * p_t.ln())
}

/// Mean absolute error.
pub fn l1_loss(pred: &[f64], target: &[f64]) -> Result<f64> {
    if pred.len() != target.len() {
        return Err(Error::Alignment {
            left: pred.len(),
            right: target.len(),
        });
    }
    if pred.is_empty() {
        return Err(Error::EmptyInput("l1_loss"));
    }
    Ok(pred.iter().zip(target).map(|(a, b)| (a - b).abs()).sum::<f64>() / pred.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DetectionTerms {
    pub cls: f64,
    pub reg: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MapTerms {
    pub cls: f64,
    pub reg: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MotionTerms {
    pub cls: f64,
    pub reg: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PlanTerms {
    pub cls: f64,
    pub reg: f64,
    /// Ego-status regression.
    pub status: f64,
}

/// Loss coefficients. Defaults are the published training settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LossWeights {
    pub det_cls: f64,
    pub det_reg: f64,
    pub map_cls: f64,
    pub map_reg: f64,
    pub motion_cls: f64,
    pub motion_reg: f64,
    pub plan_cls: f64,
    pub plan_reg: f64,
    pub plan_status: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self {
            det_cls: 2.0,
            det_reg: 0.25,
            map_cls: 1.0,
            map_reg: 10.0,
            motion_cls: 0.2,
            motion_reg: 0.2,
            plan_cls: 0.5,
            plan_reg: 1.0,
            plan_status: 1.0,
        }
    }
}

impl LossWeights {
    pub fn validate(&self) -> Result<()> {
        let all = [
            ("det_cls", self.det_cls),
            ("det_reg", self.det_reg),
            ("map_cls", self.map_cls),
            ("map_reg", self.map_reg),
            ("motion_cls", self.motion_cls),
            ("motion_reg", self.motion_reg),
            ("plan_cls", self.plan_cls),
            ("plan_reg", self.plan_reg),
            ("plan_status", self.plan_status),
        ];
        for (name, v) in all {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Config(format!(
                    "loss weight {name} must be a non-negative number, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// The stage objectives `(L_D + L_M, L_D + L_M + L_MP)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageLosses {
    pub detection: f64,
    pub mapping: f64,
    pub motion_planning: f64,
    pub stage1: f64,
    pub stage2: f64,
}

pub fn combined_losses(
    det: DetectionTerms,
    map: MapTerms,
    motion: MotionTerms,
    plan: PlanTerms,
    weights: &LossWeights,
) -> Result<StageLosses> {
    weights.validate()?;
    let terms = [
        det.cls,
        det.reg,
        map.cls,
        map.reg,
        motion.cls,
        motion.reg,
        plan.cls,
        plan.reg,
        plan.status,
    ];
    if terms.iter().any(|t| !t.is_finite()) {
        return Err(Error::Domain("loss terms must be finite".into()));
    }
    let norms = [det.reg, map.reg, motion.reg, plan.reg, plan.status];
    if norms.iter().any(|t| *t < 0.0) {
        return Err(Error::Domain(
            "regression terms are norms and cannot be negative".into(),
        ));
    }
    let detection = weights.det_cls * det.cls + weights.det_reg * det.reg;
    let mapping = weights.map_cls * map.cls + weights.map_reg * map.reg;
    let motion_planning = weights.motion_cls * motion.cls
        + weights.motion_reg * motion.reg
        + weights.plan_cls * plan.cls
        + weights.plan_reg * plan.reg
        + weights.plan_status * plan.status;
    Ok(StageLosses {
        detection,
        mapping,
        motion_planning,
        stage1: detection + mapping,
        stage2: detection + mapping + motion_planning,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn focal_examples() {
        for p in [0.1f64, 0.5, 0.9] {
            let ce = -p.ln();
            assert!((focal_loss(p, true, 1.0, 0.0).unwrap() - ce).abs() < 1e-15);
        }
        assert!(focal_loss(1.0 - 1e-12, true, 0.25, 2.0).unwrap() < 1e-20);
        let v = focal_loss(0.5, true, 0.25, 2.0).unwrap();
        assert!((v - 0.25 * 0.25 * std::f64::consts::LN_2).abs() < 1e-15);
        assert!((v - 0.043321).abs() < 1e-6);
        assert!(matches!(focal_loss(0.0, true, 0.25, 2.0), Err(Error::Domain(_))));
        assert!(focal_loss(1.0, false, 0.25, 2.0).is_err());
        // negative target mirrors the probability
        assert_eq!(
            focal_loss(0.3, false, 0.5, 1.5).unwrap(),
            focal_loss(0.7, true, 0.5, 1.5).unwrap()
        );
    }

    #[test]
    fn weighted_sums() {
        let w = LossWeights::default();
        let z = combined_losses(
            Default::default(),
            Default::default(),
            Default::default(),
            Default::default(),
            &w,
        )
        .unwrap();
        assert_eq!((z.stage1, z.stage2), (0.0, 0.0));
        let det = combined_losses(
            DetectionTerms { cls: 1.0, reg: 1.0 },
            Default::default(),
            Default::default(),
            Default::default(),
            &w,
        )
        .unwrap();
        assert_eq!(det.detection, 2.25);
        let bad = LossWeights { map_reg: -1.0, ..w };
        assert!(matches!(
            combined_losses(
                Default::default(),
                Default::default(),
                Default::default(),
                Default::default(),
                &bad
            ),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn l1() {
        assert_eq!(l1_loss(&[1.0, -1.0], &[0.0, 1.0]).unwrap(), 1.5);
        assert!(l1_loss(&[1.0], &[]).is_err());
    }
}
