use crate::error::{Error, Result};
use crate::linalg::{dot, Matrix};

use super::weights::WeightBundle;

/// Historical planning queries (one row per candidate) with their score logits.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryBatch {
    rows: Matrix,
    scores: Vec<f64>,
}

impl QueryBatch {
    pub fn new(rows: Vec<Vec<f64>>, scores: Vec<f64>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyInput("query batch"));
        }
        if rows.len() != scores.len() {
            return Err(Error::shape("query batch scores", rows.len(), scores.len()));
        }
        let d = rows[0].len();
        let rows = Matrix::from_rows(&rows, d)?;
        if !rows.is_finite() || scores.iter().any(|s| !s.is_finite()) {
            return Err(Error::Domain("query batch must be finite".into()));
        }
        Ok(Self { rows, scores })
    }

    pub fn rows(&self) -> &Matrix {
        &self.rows
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.rows.cols()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LstmState {
    pub h: Vec<f64>,
    pub c: Vec<f64>,
}

impl LstmState {
    pub fn zeros(d: usize) -> Self {
        Self {
            h: vec![0.0; d],
            c: vec![0.0; d],
        }
    }
}

/// Plan-head output: `k × n_t` waypoints (flattened `[k][i][xy]`) and `k` score logits.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanOutput {
    pub k: usize,
    pub n_t: usize,
    pub trajectories: Vec<f64>,
    pub scores: Vec<f64>,
}

impl PlanOutput {
    pub fn waypoint(&self, k: usize, i: usize) -> [f64; 2] {
        let base = (k * self.n_t + i) * 2;
        [self.trajectories[base], self.trajectories[base + 1]]
    }

    pub fn squared_norm(&self) -> f64 {
        self.trajectories.iter().map(|v| v * v).sum()
    }
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Max-shifted softmax; safe for logits of any finite magnitude.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

fn check_dim(context: &'static str, expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::shape(context, expected, actual));
    }
    Ok(())
}

/// `σ(score_k) · act(W row_k + b)` for every row.
pub fn score_gate(batch: &QueryBatch, weights: &WeightBundle) -> Result<Matrix> {
    let d = weights.dims.d_q;
    check_dim("score_gate query width", d, batch.dim())?;
    let mut out = Vec::with_capacity(batch.len() * d);
    for (k, &s) in batch.scores().iter().enumerate() {
        let gate = sigmoid(s);
        let pre = weights.mlp_w.affine(batch.rows().row(k), weights.mlp_b.data());
        out.extend(pre.into_iter().map(|v| gate * weights.mlp_activation.apply(v)));
    }
    Matrix::from_vec(batch.len(), d, out)
}

pub(crate) struct LstmGates {
    pub i: Vec<f64>,
    pub f: Vec<f64>,
    pub g: Vec<f64>,
    pub o: Vec<f64>,
}

pub(crate) fn lstm_gates(x: &[f64], h: &[f64], weights: &WeightBundle) -> LstmGates {
    let d = weights.dims.d_q;
    let mut z = weights.lstm_w_ih.affine(x, weights.lstm_b.data());
    for (zi, v) in z.iter_mut().zip(weights.lstm_w_hh.matvec(h)) {
        *zi += v;
    }
    LstmGates {
        i: z[..d].iter().map(|v| sigmoid(*v)).collect(),
        f: z[d..2 * d].iter().map(|v| sigmoid(*v)).collect(),
        g: z[2 * d..3 * d].iter().map(|v| v.tanh()).collect(),
        o: z[3 * d..].iter().map(|v| sigmoid(*v)).collect(),
    }
}

/// One LSTM cell step: `c' = f·c + i·g`, `h' = o·tanh(c')`.
pub fn lstm_step(x: &[f64], state: &LstmState, weights: &WeightBundle) -> Result<(Vec<f64>, LstmState)> {
    let d = weights.dims.d_q;
    check_dim("lstm input", d, x.len())?;
    check_dim("lstm hidden state", d, state.h.len())?;
    check_dim("lstm cell state", d, state.c.len())?;
    let gates = lstm_gates(x, &state.h, weights);
    let c: Vec<f64> = (0..d)
        .map(|j| gates.f[j] * state.c[j] + gates.i[j] * gates.g[j])
        .collect();
    let h: Vec<f64> = (0..d).map(|j| gates.o[j] * c[j].tanh()).collect();
    Ok((h.clone(), LstmState { h, c }))
}

/// Gates one historical frame and runs a single LSTM step per row from a
/// zero state. Returns the `K × d_q` matrix of hidden outputs.
pub fn mix_history(history: &QueryBatch, weights: &WeightBundle) -> Result<Matrix> {
    mix_history_seq(std::slice::from_ref(history), weights)
}

/// Multi-frame variant: `frames` is ordered oldest first; row `k` of every
/// frame forms one input sequence. All frames must share `K`.
pub fn mix_history_seq(frames: &[QueryBatch], weights: &WeightBundle) -> Result<Matrix> {
    let first = frames.first().ok_or(Error::EmptyInput("history frames"))?;
    let k = first.len();
    let d = weights.dims.d_q;
    let gated = frames
        .iter()
        .map(|f| {
            check_dim("history frame candidate count", k, f.len())?;
            score_gate(f, weights)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::with_capacity(k * d);
    for row in 0..k {
        let mut state = LstmState::zeros(d);
        let mut h = vec![0.0; d];
        for g in &gated {
            let (next_h, next_state) = lstm_step(g.row(row), &state, weights)?;
            h = next_h;
            state = next_state;
        }
        out.extend(h);
    }
    Matrix::from_vec(k, d, out)
}

/// Softmax weights of single-head scaled dot-product attention.
pub fn attention_weights(q: &[f64], keys: &Matrix, weights: &WeightBundle) -> Result<Vec<f64>> {
    let d = weights.dims.d_q;
    check_dim("attention query", d, q.len())?;
    check_dim("attention keys", d, keys.cols())?;
    if keys.rows() == 0 {
        return Err(Error::EmptyInput("attention keys"));
    }
    let qp = weights.attn_w_q.matvec(q);
    let scale = (d as f64).sqrt();
    let logits: Vec<f64> = (0..keys.rows())
        .map(|r| dot(&qp, &weights.attn_w_k.matvec(keys.row(r))) / scale)
        .collect();
    Ok(softmax(&logits))
}

/// `W_o · Σ_k a_k (W_v v_k)` with `a = softmax((W_q q)·(W_k k_j) / √d_q)`.
pub fn cross_attention(q: &[f64], keys: &Matrix, values: &Matrix, weights: &WeightBundle) -> Result<Vec<f64>> {
    check_dim("attention values", keys.rows(), values.rows())?;
    check_dim("attention value width", weights.dims.d_q, values.cols())?;
    let a = attention_weights(q, keys, weights)?;
    let mut ctx = vec![0.0; weights.dims.d_q];
    for (r, ar) in a.iter().enumerate() {
        let vp = weights.attn_w_v.matvec(values.row(r));
        for (c, v) in ctx.iter_mut().zip(vp) {
            *c += ar * v;
        }
    }
    Ok(weights.attn_w_o.matvec(&ctx))
}

/// Concatenates `q` with the mean instance feature and applies the
/// trajectory and score affine maps. Zero instance rows pool to zeros.
pub fn plan_head(q: &[f64], instance_features: &Matrix, weights: &WeightBundle) -> Result<PlanOutput> {
    let d = weights.dims.d_q;
    check_dim("plan head query", d, q.len())?;
    check_dim("instance feature width", d, instance_features.cols())?;
    let mut feat = q.to_vec();
    feat.extend(instance_features.mean_rows());
    Ok(PlanOutput {
        k: weights.dims.k,
        n_t: weights.dims.n_t,
        trajectories: weights.head_w_traj.affine(&feat, weights.head_b_traj.data()),
        scores: weights.head_w_score.affine(&feat, weights.head_b_score.data()),
    })
}

/// Mix history, attend from the selected query, regenerate trajectories and scores.
pub fn mpi_forward(
    selected: &[f64],
    history: &QueryBatch,
    instance_features: &Matrix,
    weights: &WeightBundle,
) -> Result<PlanOutput> {
    mpi_forward_seq(selected, std::slice::from_ref(history), instance_features, weights)
}

/// [`mpi_forward`] over a multi-frame history (oldest first).
pub fn mpi_forward_seq(
    selected: &[f64],
    history: &[QueryBatch],
    instance_features: &Matrix,
    weights: &WeightBundle,
) -> Result<PlanOutput> {
    let mixed = mix_history_seq(history, weights)?;
    let enriched = cross_attention(selected, &mixed, &mixed, weights)?;
    plan_head(&enriched, instance_features, weights)
}
