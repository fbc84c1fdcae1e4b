//! Trajectory distances and history-consistent candidate selection.
//!
//! Candidates planned in the current ego frame are carried into the frame of
//! the previously executed plan, scored against it with a [`DistanceKind`],
//! and the closest one wins. Hausdorff distances are taken over the discrete
//! waypoint sets.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::candidates::{argmin, TrajectorySet};
use crate::error::{Error, Result};
use crate::trajectory::{resample, transform_to_frame, Pose2, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceKind {
    #[default]
    Hausdorff,
    #[serde(alias = "euclidean")]
    MeanEuclidean,
}

impl std::str::FromStr for DistanceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hausdorff" => Ok(DistanceKind::Hausdorff),
            "euclidean" | "mean_euclidean" | "mean-euclidean" => Ok(DistanceKind::MeanEuclidean),
            other => Err(Error::Config(format!("unknown distance kind `{other}`"))),
        }
    }
}

/// `max_{p ∈ a} min_{h ∈ b} ‖p − h‖`.
pub fn directed_hausdorff(a: &Trajectory, b: &Trajectory) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyInput("directed_hausdorff"));
    }
    let mut worst = 0.0_f64;
    for p in a.points() {
        let mut nearest = f64::INFINITY;
        for h in b.points() {
            let d = p.distance(h);
            if d < nearest {
                nearest = d;
            }
        }
        if nearest > worst {
            worst = nearest;
        }
    }
    Ok(worst)
}

/// Symmetric Hausdorff distance between the waypoint sets of `a` and `b`.
pub fn hausdorff(a: &Trajectory, b: &Trajectory) -> Result<f64> {
    let forward = directed_hausdorff(a, b)?;
    let backward = directed_hausdorff(b, a)?;
    Ok(forward.max(backward))
}

/// Mean pointwise distance between equal-length trajectories.
pub fn mean_euclidean(a: &Trajectory, b: &Trajectory) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Alignment {
            left: a.len(),
            right: b.len(),
        });
    }
    let sum: f64 = a.points().iter().zip(b.points()).map(|(p, q)| p.distance(q)).sum();
    Ok(sum / a.len() as f64)
}

/// Mean-Euclidean baseline used for selection: unequal lengths are first
/// resampled to `max(len(a), len(b))` points; equal lengths compare index by index.
pub fn aligned_mean_euclidean(a: &Trajectory, b: &Trajectory) -> Result<f64> {
    if a.len() == b.len() {
        return mean_euclidean(a, b);
    }
    let n = a.len().max(b.len());
    let a = if a.len() == n { a.clone() } else { stretch(a, n)? };
    let b = if b.len() == n { b.clone() } else { stretch(b, n)? };
    mean_euclidean(&a, &b)
}

fn stretch(t: &Trajectory, n: usize) -> Result<Trajectory> {
    if t.len() == 1 {
        // A single point carries no path; compare it against every waypoint.
        return Trajectory::new(vec![t.first(); n], t.dt());
    }
    resample(t, n)
}

pub fn distance(kind: DistanceKind, a: &Trajectory, b: &Trajectory) -> Result<f64> {
    match kind {
        DistanceKind::Hausdorff => hausdorff(a, b),
        DistanceKind::MeanEuclidean => aligned_mean_euclidean(a, b),
    }
}

/// Distance of every candidate to `history` after carrying the candidate into
/// the historical frame through `frame_delta`.
pub fn ttm_distances(
    candidates: &TrajectorySet,
    history: &Trajectory,
    frame_delta: &Pose2,
    kind: DistanceKind,
) -> Result<Vec<f64>> {
    frame_delta.validate()?;
    candidates
        .trajectories()
        .iter()
        .map(|c| distance(kind, &transform_to_frame(c, frame_delta)?, history))
        .collect()
}

/// Selects the candidate closest to the previously executed plan.
/// Ties break to the lowest index.
pub fn ttm_select(
    candidates: &TrajectorySet,
    history: &Trajectory,
    frame_delta: &Pose2,
    kind: DistanceKind,
) -> Result<usize> {
    if candidates.is_empty() {
        return Err(Error::EmptyInput("ttm_select candidates"));
    }
    let d = ttm_distances(candidates, history, frame_delta, kind)?;
    Ok(argmin(&d).expect("non-empty"))
}

/// Same contract as [`ttm_select`], evaluating candidates on the rayon pool.
pub fn ttm_select_par(
    candidates: &TrajectorySet,
    history: &Trajectory,
    frame_delta: &Pose2,
    kind: DistanceKind,
) -> Result<usize> {
    if candidates.is_empty() {
        return Err(Error::EmptyInput("ttm_select candidates"));
    }
    frame_delta.validate()?;
    let d: Vec<f64> = candidates
        .trajectories()
        .par_iter()
        .map(|c| distance(kind, &transform_to_frame(c, frame_delta)?, history))
        .collect::<Result<_>>()?;
    Ok(argmin(&d).expect("non-empty"))
}

/// Restricts selection to `subset` (e.g. the candidates of the active
/// driving command). Returns an index into the full candidate set.
pub fn ttm_select_among(
    candidates: &TrajectorySet,
    subset: &[usize],
    history: &Trajectory,
    frame_delta: &Pose2,
    kind: DistanceKind,
) -> Result<usize> {
    if subset.is_empty() {
        return Err(Error::EmptyInput("ttm_select subset"));
    }
    frame_delta.validate()?;
    let mut dists = Vec::with_capacity(subset.len());
    for &k in subset {
        let c = candidates
            .trajectories()
            .get(k)
            .ok_or_else(|| Error::shape("candidate subset index", format!("< {}", candidates.len()), k))?;
        dists.push(distance(kind, &transform_to_frame(c, frame_delta)?, history)?);
    }
    Ok(subset[argmin(&dists).expect("non-empty")])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trajectory::{transform_from_frame, DEFAULT_DT};

    fn traj(xy: &[(f64, f64)]) -> Trajectory {
        Trajectory::from_xy(xy, DEFAULT_DT).unwrap()
    }

    fn set(ts: Vec<Trajectory>) -> TrajectorySet {
        let n = ts.len();
        TrajectorySet::without_queries(ts, vec![0.0; n]).unwrap()
    }

    #[test]
    fn directed_examples() {
        let a = traj(&[(0.0, 0.0)]);
        assert_eq!(directed_hausdorff(&a, &a).unwrap(), 0.0);
        assert_eq!(directed_hausdorff(&a, &traj(&[(3.0, 4.0)])).unwrap(), 5.0);
        let a = traj(&[(0.0, 0.0), (1.0, 0.0)]);
        let b = traj(&[(0.0, 1.0)]);
        // brute force: max(min(1), min(√2)) = √2
        assert_eq!(directed_hausdorff(&a, &b).unwrap(), 2.0_f64.sqrt());
        assert_eq!(directed_hausdorff(&b, &a).unwrap(), 1.0);
        assert_eq!(hausdorff(&a, &b).unwrap(), 2.0_f64.sqrt());
        assert_eq!(hausdorff(&b, &a).unwrap(), hausdorff(&a, &b).unwrap());
    }

    #[test]
    fn mean_euclidean_examples() {
        let a = traj(&[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)]);
        assert_eq!(mean_euclidean(&a, &a).unwrap(), 0.0);
        let shifted = traj(&[(0.0, 1.0), (1.0, 1.0), (2.0, 1.0)]);
        assert_eq!(mean_euclidean(&a, &shifted).unwrap(), 1.0);
        let b = traj(&[(0.0, 3.0), (4.0, 4.0), (2.0, 0.0)]);
        // per-index distances 3, 5, 0
        assert!((mean_euclidean(&a, &b).unwrap() - 8.0 / 3.0).abs() < 1e-15);
        assert!(matches!(
            mean_euclidean(&a, &traj(&[(0.0, 0.0)])),
            Err(Error::Alignment { left: 3, right: 1 })
        ));
        // aligned variant resamples instead of failing
        let short = traj(&[(0.0, 1.0), (2.0, 1.0)]);
        assert!((aligned_mean_euclidean(&a, &short).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn select_single_and_exact_match() {
        let h = traj(&[(0.0, 0.0), (1.0, 0.0)]);
        let one = set(vec![traj(&[(5.0, 5.0)])]);
        assert_eq!(
            ttm_select(&one, &h, &Pose2::identity(), DistanceKind::Hausdorff).unwrap(),
            0
        );

        let delta = Pose2::from_heading(0.3, 1.0, -2.0);
        // candidate 2 equals the history once carried into the history frame
        let exact = transform_from_frame(&h, &delta).unwrap();
        let cands = set(vec![
            traj(&[(9.0, 0.0), (9.0, 1.0)]),
            traj(&[(0.0, 4.0), (1.0, 4.0)]),
            exact,
        ]);
        for kind in [DistanceKind::Hausdorff, DistanceKind::MeanEuclidean] {
            assert_eq!(ttm_select(&cands, &h, &delta, kind).unwrap(), 2);
            assert_eq!(ttm_select_par(&cands, &h, &delta, kind).unwrap(), 2);
        }
        assert_eq!(
            ttm_select_among(&cands, &[0, 1], &h, &delta, DistanceKind::Hausdorff).unwrap(),
            1
        );
    }

    #[test]
    fn select_errors_on_empty() {
        let h = traj(&[(0.0, 0.0)]);
        let empty = set(vec![]);
        assert!(matches!(
            ttm_select(&empty, &h, &Pose2::identity(), DistanceKind::Hausdorff),
            Err(Error::EmptyInput(_))
        ));
    }

    #[test]
    fn arc_candidate_wins_on_quarter_turn() {
        use std::f64::consts::FRAC_PI_2;
        let r = 20.0;
        let arc: Vec<(f64, f64)> = (1..=6)
            .map(|i| {
                let th = FRAC_PI_2 * i as f64 / 6.0;
                (r * th.sin(), r - r * th.cos())
            })
            .collect();
        let history = traj(&arc);
        let arc_candidate = traj(&arc.iter().map(|&(x, y)| (x + 0.3, y)).collect::<Vec<_>>());
        let straight: Vec<(f64, f64)> = (1..=6).map(|i| (5.0 * i as f64, 0.0)).collect();
        let straight_left: Vec<(f64, f64)> = straight.iter().map(|&(x, y)| (x, y + 4.0)).collect();
        let cands = set(vec![traj(&straight), arc_candidate, traj(&straight_left)]);
        let brute: Vec<f64> = cands
            .trajectories()
            .iter()
            .map(|c| {
                let fwd = c
                    .points()
                    .iter()
                    .map(|p| {
                        history
                            .points()
                            .iter()
                            .map(|h| p.distance(h))
                            .fold(f64::INFINITY, f64::min)
                    })
                    .fold(0.0, f64::max);
                let bwd = history
                    .points()
                    .iter()
                    .map(|h| c.points().iter().map(|p| p.distance(h)).fold(f64::INFINITY, f64::min))
                    .fold(0.0, f64::max);
                fwd.max(bwd)
            })
            .collect();
        let expected = brute
            .iter()
            .enumerate()
            .fold(
                (0, f64::INFINITY),
                |(bi, bv), (i, &v)| if v < bv { (i, v) } else { (bi, bv) },
            )
            .0;
        assert_eq!(expected, 1);
        assert_eq!(
            ttm_select(&cands, &history, &Pose2::identity(), DistanceKind::Hausdorff).unwrap(),
            expected
        );
    }

    #[test]
    fn parses_kind() {
        assert_eq!("hausdorff".parse::<DistanceKind>().unwrap(), DistanceKind::Hausdorff);
        assert_eq!(
            "Euclidean".parse::<DistanceKind>().unwrap(),
            DistanceKind::MeanEuclidean
        );
        assert!("frechet".parse::<DistanceKind>().is_err());
    }
}
