use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trajectory::{Pose2, Trajectory};

/// K candidate trajectories with their score logits and planning-query embeddings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSet")]
pub struct TrajectorySet {
    trajectories: Vec<Trajectory>,
    scores: Vec<f64>,
    queries: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
struct RawSet {
    trajectories: Vec<Trajectory>,
    scores: Vec<f64>,
    #[serde(default)]
    queries: Vec<Vec<f64>>,
}

impl TryFrom<RawSet> for TrajectorySet {
    type Error = Error;

    fn try_from(raw: RawSet) -> Result<Self> {
        if raw.queries.is_empty() {
            TrajectorySet::without_queries(raw.trajectories, raw.scores)
        } else {
            TrajectorySet::new(raw.trajectories, raw.scores, raw.queries)
        }
    }
}

impl TrajectorySet {
    pub fn new(trajectories: Vec<Trajectory>, scores: Vec<f64>, queries: Vec<Vec<f64>>) -> Result<Self> {
        let k = trajectories.len();
        if scores.len() != k {
            return Err(Error::shape("trajectory set scores", k, scores.len()));
        }
        if queries.len() != k {
            return Err(Error::shape("trajectory set queries", k, queries.len()));
        }
        if let Some(q) = queries.first() {
            let d = q.len();
            if let Some(bad) = queries.iter().find(|q| q.len() != d) {
                return Err(Error::shape("query dimension", d, bad.len()));
            }
        }
        if scores.iter().chain(queries.iter().flatten()).any(|v| !v.is_finite()) {
            return Err(Error::Domain("scores and queries must be finite".into()));
        }
        Ok(Self {
            trajectories,
            scores,
            queries,
        })
    }

    /// A set whose candidates carry zero-length query embeddings.
    pub fn without_queries(trajectories: Vec<Trajectory>, scores: Vec<f64>) -> Result<Self> {
        let queries = vec![Vec::new(); trajectories.len()];
        Self::new(trajectories, scores, queries)
    }

    pub fn len(&self) -> usize {
        self.trajectories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trajectories.is_empty()
    }

    pub fn trajectories(&self) -> &[Trajectory] {
        &self.trajectories
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn queries(&self) -> &[Vec<f64>] {
        &self.queries
    }

    pub fn query_dim(&self) -> usize {
        self.queries.first().map_or(0, Vec::len)
    }

    pub fn with_scores(mut self, scores: Vec<f64>) -> Result<Self> {
        if scores.len() != self.len() {
            return Err(Error::shape("trajectory set scores", self.len(), scores.len()));
        }
        self.scores = scores;
        Ok(self)
    }

    pub fn with_queries(self, queries: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(self.trajectories, self.scores, queries)
    }

    /// Maps every trajectory through `pose.apply` (local → parent frame).
    pub fn mapped_from_frame(&self, pose: &Pose2) -> TrajectorySet {
        TrajectorySet {
            trajectories: self
                .trajectories
                .iter()
                .map(|t| t.map_points(|p| pose.apply(p)))
                .collect(),
            scores: self.scores.clone(),
            queries: self.queries.clone(),
        }
    }

    /// Maps every trajectory through `pose.apply_inverse` (parent → local frame).
    pub fn mapped_to_frame(&self, pose: &Pose2) -> TrajectorySet {
        TrajectorySet {
            trajectories: self
                .trajectories
                .iter()
                .map(|t| t.map_points(|p| pose.apply_inverse(p)))
                .collect(),
            scores: self.scores.clone(),
            queries: self.queries.clone(),
        }
    }
}

/// Index of the largest value; ties go to the lowest index.
pub(crate) fn argmax(values: &[f64]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &v) in values.iter().enumerate() {
        match best {
            Some((_, b)) if v <= b => {}
            _ => best = Some((i, v)),
        }
    }
    best.map(|(i, _)| i)
}

/// Index of the smallest value; ties go to the lowest index.
pub(crate) fn argmin(values: &[f64]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &v) in values.iter().enumerate() {
        match best {
            Some((_, b)) if v >= b => {}
            _ => best = Some((i, v)),
        }
    }
    best.map(|(i, _)| i)
}
