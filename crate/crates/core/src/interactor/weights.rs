use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Sizes that fix every weight shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MpiDims {
    /// Planning-query latent width.
    pub d_q: usize,
    /// Number of candidate modes regenerated by the plan head.
    pub k: usize,
    /// Waypoints per trajectory.
    pub n_t: usize,
}

impl Default for MpiDims {
    fn default() -> Self {
        Self { d_q: 32, k: 6, n_t: 6 }
    }
}

impl MpiDims {
    pub fn traj_outputs(&self) -> usize {
        self.k * self.n_t * 2
    }

    fn validate(&self) -> Result<()> {
        if self.d_q == 0 || self.k == 0 || self.n_t == 0 {
            return Err(Error::Config(format!("all dimensions must be positive: {self:?}")));
        }
        Ok(())
    }
}

/// Pointwise nonlinearity after the history MLP's affine map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MlpActivation {
    #[default]
    Identity,
    Relu,
    Tanh,
}

impl MlpActivation {
    pub(crate) fn apply(self, x: f64) -> f64 {
        match self {
            MlpActivation::Identity => x,
            MlpActivation::Relu => x.max(0.0),
            MlpActivation::Tanh => x.tanh(),
        }
    }

    pub(crate) fn derivative(self, x: f64) -> f64 {
        match self {
            MlpActivation::Identity => 1.0,
            MlpActivation::Relu => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            MlpActivation::Tanh => {
                let t = x.tanh();
                1.0 - t * t
            }
        }
    }
}

/// Parameters of the history mixer, cross-attention and plan head.
///
/// LSTM gate blocks are stacked in the order input, forget, cell, output.
/// The plan head reads the concatenation `[query; mean(instance features)]`,
/// so its matrices have `2 * d_q` columns.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightBundle {
    pub dims: MpiDims,
    pub mlp_activation: MlpActivation,
    pub mlp_w: Matrix,
    pub mlp_b: Matrix,
    pub lstm_w_ih: Matrix,
    pub lstm_w_hh: Matrix,
    pub lstm_b: Matrix,
    pub attn_w_q: Matrix,
    pub attn_w_k: Matrix,
    pub attn_w_v: Matrix,
    pub attn_w_o: Matrix,
    pub head_w_traj: Matrix,
    pub head_b_traj: Matrix,
    pub head_w_score: Matrix,
    pub head_b_score: Matrix,
}

pub const PARAM_NAMES: [&str; 13] = [
    "mlp.W",
    "mlp.b",
    "lstm.W_ih",
    "lstm.W_hh",
    "lstm.b",
    "attn.W_q",
    "attn.W_k",
    "attn.W_v",
    "attn.W_o",
    "head.W_traj",
    "head.b_traj",
    "head.W_score",
    "head.b_score",
];

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TensorEntry {
    shape: [usize; 2],
    data: Vec<f64>,
}

impl WeightBundle {
    pub fn zeros(dims: MpiDims) -> Self {
        let d = dims.d_q;
        let out = dims.traj_outputs();
        Self {
            dims,
            mlp_activation: MlpActivation::Identity,
            mlp_w: Matrix::zeros(d, d),
            mlp_b: Matrix::zeros(d, 1),
            lstm_w_ih: Matrix::zeros(4 * d, d),
            lstm_w_hh: Matrix::zeros(4 * d, d),
            lstm_b: Matrix::zeros(4 * d, 1),
            attn_w_q: Matrix::zeros(d, d),
            attn_w_k: Matrix::zeros(d, d),
            attn_w_v: Matrix::zeros(d, d),
            attn_w_o: Matrix::zeros(d, d),
            head_w_traj: Matrix::zeros(out, 2 * d),
            head_b_traj: Matrix::zeros(out, 1),
            head_w_score: Matrix::zeros(dims.k, 2 * d),
            head_b_score: Matrix::zeros(dims.k, 1),
        }
    }

    /// Every entry drawn from `U(−1/√d_q, 1/√d_q)` with a ChaCha8 stream.
    pub fn seeded(dims: MpiDims, seed: u64) -> Self {
        let mut w = Self::zeros(dims);
        let bound = 1.0 / (dims.d_q as f64).sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for (_, m) in w.params_mut() {
            for v in m.data_mut() {
                *v = rng.random_range(-bound..bound);
            }
        }
        w
    }

    pub fn with_mlp_activation(mut self, activation: MlpActivation) -> Self {
        self.mlp_activation = activation;
        self
    }

    pub fn params(&self) -> [(&'static str, &Matrix); 13] {
        [
            (PARAM_NAMES[0], &self.mlp_w),
            (PARAM_NAMES[1], &self.mlp_b),
            (PARAM_NAMES[2], &self.lstm_w_ih),
            (PARAM_NAMES[3], &self.lstm_w_hh),
            (PARAM_NAMES[4], &self.lstm_b),
            (PARAM_NAMES[5], &self.attn_w_q),
            (PARAM_NAMES[6], &self.attn_w_k),
            (PARAM_NAMES[7], &self.attn_w_v),
            (PARAM_NAMES[8], &self.attn_w_o),
            (PARAM_NAMES[9], &self.head_w_traj),
            (PARAM_NAMES[10], &self.head_b_traj),
            (PARAM_NAMES[11], &self.head_w_score),
            (PARAM_NAMES[12], &self.head_b_score),
        ]
    }

    pub fn params_mut(&mut self) -> [(&'static str, &mut Matrix); 13] {
        [
            (PARAM_NAMES[0], &mut self.mlp_w),
            (PARAM_NAMES[1], &mut self.mlp_b),
            (PARAM_NAMES[2], &mut self.lstm_w_ih),
            (PARAM_NAMES[3], &mut self.lstm_w_hh),
            (PARAM_NAMES[4], &mut self.lstm_b),
            (PARAM_NAMES[5], &mut self.attn_w_q),
            (PARAM_NAMES[6], &mut self.attn_w_k),
            (PARAM_NAMES[7], &mut self.attn_w_v),
            (PARAM_NAMES[8], &mut self.attn_w_o),
            (PARAM_NAMES[9], &mut self.head_w_traj),
            (PARAM_NAMES[10], &mut self.head_b_traj),
            (PARAM_NAMES[11], &mut self.head_w_score),
            (PARAM_NAMES[12], &mut self.head_b_score),
        ]
    }

    pub fn param_count(&self) -> usize {
        self.params().iter().map(|(_, m)| m.data().len()).sum()
    }

    fn expected_shapes(dims: &MpiDims) -> [(usize, usize); 13] {
        let z = Self::zeros(*dims);
        z.params().map(|(_, m)| m.shape())
    }

    /// Checks every shape against `dims` and rejects non-finite entries.
    pub fn validate(&self) -> Result<()> {
        self.dims.validate()?;
        let expected = Self::expected_shapes(&self.dims);
        for ((name, m), want) in self.params().iter().zip(expected) {
            if m.shape() != want {
                return Err(Error::Shape {
                    context: "weight bundle",
                    expected: format!("{name} {want:?}"),
                    actual: format!("{:?}", m.shape()),
                });
            }
            if !m.is_finite() {
                return Err(Error::Domain(format!("{name} has non-finite entries")));
            }
        }
        Ok(())
    }

    /// JSON object `name → {"shape": [r, c], "data": [...]}` in row-major order.
    pub fn to_json(&self) -> String {
        let map: BTreeMap<&str, TensorEntry> = self
            .params()
            .iter()
            .map(|(name, m)| {
                (
                    *name,
                    TensorEntry {
                        shape: [m.rows(), m.cols()],
                        data: m.data().to_vec(),
                    },
                )
            })
            .collect();
        serde_json::to_string_pretty(&map).expect("weight map serializes")
    }

    /// Parses [`WeightBundle::to_json`] output. Dimensions are recovered from
    /// `mlp.W` (d_q) and the head matrices (k, n_t).
    pub fn from_json(s: &str) -> Result<Self> {
        let mut map: BTreeMap<String, TensorEntry> =
            serde_json::from_str(s).map_err(|e| Error::Config(format!("weight file: {e}")))?;
        let shape_of = |map: &BTreeMap<String, TensorEntry>, name: &str| -> Result<[usize; 2]> {
            map.get(name)
                .map(|e| e.shape)
                .ok_or_else(|| Error::Config(format!("weight file is missing `{name}`")))
        };
        let d_q = shape_of(&map, "mlp.W")?[0];
        let k = shape_of(&map, "head.W_score")?[0];
        let traj_rows = shape_of(&map, "head.W_traj")?[0];
        if k == 0 || traj_rows % (2 * k) != 0 {
            return Err(Error::Config(format!(
                "head.W_traj has {traj_rows} rows, not a multiple of 2·k = {}",
                2 * k
            )));
        }
        let dims = MpiDims {
            d_q,
            k,
            n_t: traj_rows / (2 * k),
        };
        dims.validate()?;
        let mut w = Self::zeros(dims);
        for (name, slot) in w.params_mut() {
            let entry = map
                .remove(name)
                .ok_or_else(|| Error::Config(format!("weight file is missing `{name}`")))?;
            *slot = Matrix::from_vec(entry.shape[0], entry.shape[1], entry.data)?;
        }
        if let Some(extra) = map.keys().next() {
            return Err(Error::Config(format!("unknown weight `{extra}`")));
        }
        w.validate()?;
        Ok(w)
    }
}
