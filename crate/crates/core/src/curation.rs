//! Turning-scenario curation.
//!
//! A sample is turning when the x-coordinate of its ego future changes by at
//! least `epsilon` between waypoint 0 (0.5 s) and waypoint 5 (3 s). Whole
//! scenes are kept: any scene with one turning sample contributes all of its
//! samples, in input order. `epsilon` is compared against raw stored
//! coordinates.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trajectory::Trajectory;

pub const DEFAULT_EPSILON: f64 = 25.0;

const TURN_PROBE: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSample")]
pub struct SampleRecord {
    pub sample_id: String,
    pub scene_id: String,
    pub gt_future: Trajectory,
}

#[derive(Deserialize)]
struct RawSample {
    sample_id: String,
    scene_id: String,
    gt_future: Trajectory,
}

impl TryFrom<RawSample> for SampleRecord {
    type Error = Error;

    fn try_from(raw: RawSample) -> Result<Self> {
        SampleRecord::new(raw.sample_id, raw.scene_id, raw.gt_future)
    }
}

impl SampleRecord {
    pub fn new(sample_id: impl Into<String>, scene_id: impl Into<String>, gt_future: Trajectory) -> Result<Self> {
        if gt_future.len() <= TURN_PROBE {
            return Err(Error::InsufficientHorizon {
                needed: TURN_PROBE + 1,
                got: gt_future.len(),
            });
        }
        Ok(Self {
            sample_id: sample_id.into(),
            scene_id: scene_id.into(),
            gt_future,
        })
    }
}

pub fn is_turning(gt_future: &Trajectory, epsilon: f64) -> Result<bool> {
    let pts = gt_future.points();
    if pts.len() <= TURN_PROBE {
        return Err(Error::InsufficientHorizon {
            needed: TURN_PROBE + 1,
            got: pts.len(),
        });
    }
    Ok((pts[0].x - pts[TURN_PROBE].x).abs() >= epsilon)
}

/// Curated subset and the retained scene ids (in order of first appearance).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Curated {
    pub samples: Vec<SampleRecord>,
    pub scenes: Vec<String>,
}

pub fn curate(samples: &[SampleRecord], epsilon: f64) -> Curated {
    let turning_scenes: HashSet<&str> = samples
        .iter()
        .filter(|s| is_turning(&s.gt_future, epsilon).expect("records hold ≥ 6 waypoints"))
        .map(|s| s.scene_id.as_str())
        .collect();
    let kept: Vec<SampleRecord> = samples
        .iter()
        .filter(|s| turning_scenes.contains(s.scene_id.as_str()))
        .cloned()
        .collect();
    let mut seen = HashSet::new();
    let scenes = kept
        .iter()
        .filter(|s| seen.insert(s.scene_id.clone()))
        .map(|s| s.scene_id.clone())
        .collect();
    Curated { samples: kept, scenes }
}

/// Parses JSONL; blank lines are ignored, line numbers in errors are 1-based.
pub fn read_samples_jsonl(text: &str) -> Result<Vec<SampleRecord>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Error::CorruptLog {
                line: i + 1,
                reason: e.to_string(),
            })
        })
        .collect()
}

pub fn write_samples_jsonl(samples: &[SampleRecord]) -> String {
    samples
        .iter()
        .map(|s| serde_json::to_string(s).expect("sample serializes") + "\n")
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(id: &str, scene: &str, dx: f64) -> SampleRecord {
        let pts: Vec<(f64, f64)> = (0..6).map(|i| (dx * i as f64 / 5.0, 2.0 * i as f64)).collect();
        SampleRecord::new(id, scene, Trajectory::from_xy(&pts, 0.5).unwrap()).unwrap()
    }

    #[test]
    fn threshold_is_inclusive() {
        assert!(!is_turning(&sample("a", "s", 0.0).gt_future, DEFAULT_EPSILON).unwrap());
        let exact = Trajectory::from_xy(
            &[(0.0, 0.0), (1.0, 1.0), (2.0, 2.0), (3.0, 3.0), (4.0, 4.0), (25.0, 5.0)],
            0.5,
        )
        .unwrap();
        assert!(is_turning(&exact, 25.0).unwrap());
        let below = Trajectory::from_xy(
            &[(0.0, 0.0), (1.0, 1.0), (2.0, 2.0), (3.0, 3.0), (4.0, 4.0), (-24.9, 5.0)],
            0.5,
        )
        .unwrap();
        assert!(!is_turning(&below, 25.0).unwrap());
        let short = Trajectory::from_xy(&[(0.0, 0.0); 5], 0.5).unwrap();
        assert!(matches!(
            is_turning(&short, 25.0),
            Err(Error::InsufficientHorizon { needed: 6, got: 5 })
        ));
        assert!(SampleRecord::new("x", "y", short).is_err());
    }

    #[test]
    fn scene_level_closure() {
        assert_eq!(curate(&[], DEFAULT_EPSILON), Curated::default());
        let data = vec![
            sample("a1", "A", 0.0),
            sample("b1", "B", 1.0),
            sample("a2", "A", 30.0),
            sample("a3", "A", 2.0),
            sample("c1", "C", -40.0),
        ];
        let out = curate(&data, DEFAULT_EPSILON);
        let ids: Vec<&str> = out.samples.iter().map(|s| s.sample_id.as_str()).collect();
        assert_eq!(ids, ["a1", "a2", "a3", "c1"]);
        assert_eq!(out.scenes, ["A", "C"]);
    }

    #[test]
    fn jsonl_round_trip_and_errors() {
        let data = vec![sample("a1", "A", 0.0), sample("a2", "A", 30.0)];
        let text = write_samples_jsonl(&data);
        assert_eq!(read_samples_jsonl(&text).unwrap(), data);
        let broken = format!("{text}{{not json}}\n");
        assert!(matches!(
            read_samples_jsonl(&broken),
            Err(Error::CorruptLog { line: 3, .. })
        ));
    }
}
