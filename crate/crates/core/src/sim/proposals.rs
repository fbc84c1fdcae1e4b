use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::candidates::TrajectorySet;
use crate::error::{Error, Result};
use crate::interactor::softmax;
use crate::linalg::Matrix;
use crate::metrics::{ade_fde, ObstacleBox};
use crate::trajectory::{Trajectory, Waypoint};

/// Candidate generator settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProposalConfig {
    pub k: usize,
    /// Std-dev (m) of each candidate's lateral mode offset at the last waypoint.
    pub mode_noise: f64,
    /// Std-dev (m) of independent per-waypoint jitter on each axis.
    pub jitter: f64,
    /// Width of the planning queries attached to each candidate.
    pub d_q: usize,
}

impl Default for ProposalConfig {
    fn default() -> Self {
        Self {
            k: 6,
            mode_noise: 1.0,
            jitter: 0.3,
            d_q: 32,
        }
    }
}

impl ProposalConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.d_q == 0 {
            return Err(Error::Config("k and d_q must be positive".into()));
        }
        for (name, v) in [("mode_noise", self.mode_noise), ("jitter", self.jitter)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Config(format!("{name} must be a non-negative number, got {v}")));
            }
        }
        Ok(())
    }
}

/// SplitMix64 finaliser.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent sub-seed for `(stream, index)` under `base`.
pub fn derive_seed(base: u64, stream: u64, index: u64) -> u64 {
    mix(mix(base ^ mix(stream)) ^ index)
}

const EMBED_SEED: u64 = 0x51ED_C0DE;

fn gaussian_matrix(rows: usize, cols: usize, seed: u64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = 1.0 / (cols as f64).sqrt();
    let data = (0..rows * cols)
        .map(|_| scale * Distribution::<f64>::sample(&StandardNormal, &mut rng))
        .collect();
    Matrix::from_vec(rows, cols, data).expect("sized buffer")
}

/// Fixed random projection of a centred, flattened trajectory to a query.
pub fn embed_trajectory(traj: &Trajectory, d_q: usize) -> Vec<f64> {
    let n = traj.len() as f64;
    let cx = traj.points().iter().map(|p| p.x).sum::<f64>() / n;
    let cy = traj.points().iter().map(|p| p.y).sum::<f64>() / n;
    let flat: Vec<f64> = traj.points().iter().flat_map(|p| [p.x - cx, p.y - cy]).collect();
    gaussian_matrix(d_q, flat.len(), EMBED_SEED ^ flat.len() as u64).matvec(&flat)
}

/// Instance features for obstacles given in the planning frame, one row each.
pub fn embed_obstacles(boxes: &[ObstacleBox], d_q: usize) -> Matrix {
    let proj = gaussian_matrix(d_q, 6, EMBED_SEED.rotate_left(17));
    let rows: Vec<Vec<f64>> = boxes
        .iter()
        .map(|b| {
            let raw = [
                b.center.x / 50.0,
                b.center.y / 50.0,
                b.heading.cos(),
                b.heading.sin(),
                b.length / 10.0,
                b.width / 10.0,
            ];
            proj.matvec(&raw)
        })
        .collect();
    Matrix::from_rows(&rows, d_q).expect("rows sized by projection")
}

fn normals(gt: &Trajectory) -> Vec<Waypoint> {
    gt.headings()
        .into_iter()
        .map(|h| Waypoint::new(-h.sin(), h.cos()))
        .collect()
}

fn offset_path(gt: &Trajectory, normals: &[Waypoint], amplitude: f64) -> Vec<Waypoint> {
    let n = gt.len() as f64;
    gt.points()
        .iter()
        .zip(normals)
        .enumerate()
        .map(|(i, (p, nv))| {
            let a = amplitude * (i + 1) as f64 / n;
            Waypoint::new(p.x + a * nv.x, p.y + a * nv.y)
        })
        .collect()
}

/// Candidates around `gt_future`: each gets a lateral mode offset growing
/// linearly to `N(0, mode_noise)` at the horizon plus per-waypoint jitter.
/// Scores are the softmax of negative ADE to a noisy observation of the same
/// future; queries embed each candidate.
pub fn propose(gt_future: &Trajectory, cfg: &ProposalConfig, seed: u64) -> Result<TrajectorySet> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mode = Normal::new(0.0, cfg.mode_noise).map_err(|e| Error::Config(e.to_string()))?;
    let jitter = Normal::new(0.0, cfg.jitter).map_err(|e| Error::Config(e.to_string()))?;
    let nv = normals(gt_future);
    let mut trajectories = Vec::with_capacity(cfg.k);
    for _ in 0..cfg.k {
        let a = mode.sample(&mut rng);
        let pts = offset_path(gt_future, &nv, a)
            .into_iter()
            .map(|p| {
                let jx = jitter.sample(&mut rng);
                let jy = jitter.sample(&mut rng);
                Waypoint::new(p.x + jx, p.y + jy)
            })
            .collect();
        trajectories.push(Trajectory::new(pts, gt_future.dt())?);
    }
    let observed = Trajectory::new(offset_path(gt_future, &nv, mode.sample(&mut rng)), gt_future.dt())?;
    let neg_ade = trajectories
        .iter()
        .map(|t| ade_fde(t, &observed).map(|(ade, _)| -ade))
        .collect::<Result<Vec<_>>>()?;
    let queries = trajectories.iter().map(|t| embed_trajectory(t, cfg.d_q)).collect();
    TrajectorySet::new(trajectories, softmax(&neg_ade), queries)
}

/// Adds `N(0, ns²)` noise to every feature.
pub fn perturb_features(features: &[f64], ns: f64, seed: u64) -> Result<Vec<f64>> {
    if !(ns.is_finite() && ns >= 0.0) {
        return Err(Error::Domain(format!("noise scale must be non-negative, got {ns}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(features
        .iter()
        .map(|v| {
            let e: f64 = StandardNormal.sample(&mut rng);
            v + ns * e
        })
        .collect())
}
