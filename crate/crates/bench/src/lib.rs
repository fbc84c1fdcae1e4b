//! Deterministic inputs shared by the benchmarks.

use momad_core::interactor::{MpiDims, QueryBatch, WeightBundle};
use momad_core::sim::{perturb_features, propose, ProposalConfig};
use momad_core::{Matrix, Pose2, Trajectory, TrajectorySet};

/// Quarter circle of radius 20 m sampled with `n` waypoints.
pub fn arc(n: usize) -> Trajectory {
    let xy: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let a = std::f64::consts::FRAC_PI_2 * (i + 1) as f64 / n as f64;
            (20.0 * a.sin(), 20.0 * (1.0 - a.cos()))
        })
        .collect();
    Trajectory::from_xy(&xy, 0.5).expect("finite waypoints")
}

/// `k` noisy candidates around an `n`-waypoint arc, with `d_q`-wide queries.
pub fn candidates(k: usize, n: usize, d_q: usize, seed: u64) -> TrajectorySet {
    let cfg = ProposalConfig {
        k,
        d_q,
        ..ProposalConfig::default()
    };
    propose(&arc(n), &cfg, seed).expect("valid proposal config")
}

/// A small rigid step: 1.5 m forward with a slight yaw.
pub fn frame_delta() -> Pose2 {
    Pose2::from_heading(-0.07, -1.5, 0.0)
}

pub fn query_batch(set: &TrajectorySet, ns: f64, seed: u64) -> QueryBatch {
    let rows: Vec<Vec<f64>> = set
        .queries()
        .iter()
        .enumerate()
        .map(|(i, q)| perturb_features(q, ns, seed.wrapping_add(i as u64)).expect("ns ≥ 0"))
        .collect();
    QueryBatch::new(rows, set.scores().to_vec()).expect("non-empty batch")
}

pub struct MpiFixture {
    pub selected: Vec<f64>,
    pub history: Vec<QueryBatch>,
    pub instances: Matrix,
    pub weights: WeightBundle,
}

/// Interactor inputs with `depth` history frames of `k` queries each.
pub fn mpi_fixture(d_q: usize, k: usize, depth: usize) -> MpiFixture {
    let n_t = 6;
    let history: Vec<QueryBatch> = (0..depth as u64)
        .map(|f| query_batch(&candidates(k, n_t, d_q, f), 0.1, 100 + f))
        .collect();
    let current = candidates(k, n_t, d_q, 99);
    let instances = Matrix::from_rows(&current.queries()[..3.min(k)], d_q).expect("rows of width d_q");
    MpiFixture {
        selected: current.queries()[0].clone(),
        history,
        instances,
        weights: WeightBundle::seeded(MpiDims { d_q, k, n_t }, 7),
    }
}
