//! Reverse-mode gradients of `L = ‖trajectories‖²` through the full
//! interactor (gate → LSTM → attention → plan head).

use crate::error::{Error, Result};
use crate::linalg::{dot, Matrix};

use super::blocks::{lstm_gates, sigmoid, softmax, QueryBatch};
use super::weights::WeightBundle;

struct StepCache {
    x: Vec<f64>,
    h_prev: Vec<f64>,
    c_prev: Vec<f64>,
    i: Vec<f64>,
    f: Vec<f64>,
    g: Vec<f64>,
    o: Vec<f64>,
    c: Vec<f64>,
}

struct GateCache {
    row: Vec<f64>,
    gate: f64,
    pre: Vec<f64>,
}

/// Loss value and its gradient with respect to every weight entry, laid
/// out as a [`WeightBundle`] of the same shapes.
pub fn trajectory_loss_grad(
    selected: &[f64],
    history: &[QueryBatch],
    instance_features: &Matrix,
    weights: &WeightBundle,
) -> Result<(f64, WeightBundle)> {
    weights.validate()?;
    let d = weights.dims.d_q;
    let first = history.first().ok_or(Error::EmptyInput("history frames"))?;
    let k = first.len();
    if selected.len() != d {
        return Err(Error::shape("selected query", d, selected.len()));
    }
    if instance_features.cols() != d {
        return Err(Error::shape("instance feature width", d, instance_features.cols()));
    }
    for f in history {
        if f.len() != k || f.dim() != d {
            return Err(Error::shape(
                "history frame",
                format!("{k}×{d}"),
                format!("{}×{}", f.len(), f.dim()),
            ));
        }
    }

    // Forward with caches.
    let gates: Vec<Vec<GateCache>> = history
        .iter()
        .map(|frame| {
            (0..k)
                .map(|r| {
                    let row = frame.rows().row(r).to_vec();
                    let pre = weights.mlp_w.affine(&row, weights.mlp_b.data());
                    GateCache {
                        row,
                        gate: sigmoid(frame.scores()[r]),
                        pre,
                    }
                })
                .collect()
        })
        .collect();

    let mut steps: Vec<Vec<StepCache>> = Vec::with_capacity(k);
    let mut mixed = Vec::with_capacity(k);
    for r in 0..k {
        let mut h = vec![0.0; d];
        let mut c = vec![0.0; d];
        let mut row_steps = Vec::with_capacity(history.len());
        for frame in &gates {
            let gc = &frame[r];
            let x: Vec<f64> = gc
                .pre
                .iter()
                .map(|v| gc.gate * weights.mlp_activation.apply(*v))
                .collect();
            let lg = lstm_gates(&x, &h, weights);
            let c_new: Vec<f64> = (0..d).map(|j| lg.f[j] * c[j] + lg.i[j] * lg.g[j]).collect();
            let h_new: Vec<f64> = (0..d).map(|j| lg.o[j] * c_new[j].tanh()).collect();
            row_steps.push(StepCache {
                x,
                h_prev: h,
                c_prev: c,
                i: lg.i,
                f: lg.f,
                g: lg.g,
                o: lg.o,
                c: c_new.clone(),
            });
            h = h_new;
            c = c_new;
        }
        steps.push(row_steps);
        mixed.push(h);
    }

    let scale = (d as f64).sqrt();
    let qp = weights.attn_w_q.matvec(selected);
    let kp: Vec<Vec<f64>> = mixed.iter().map(|m| weights.attn_w_k.matvec(m)).collect();
    let vp: Vec<Vec<f64>> = mixed.iter().map(|m| weights.attn_w_v.matvec(m)).collect();
    let logits: Vec<f64> = kp.iter().map(|kr| dot(&qp, kr) / scale).collect();
    let attn = softmax(&logits);
    let mut ctx = vec![0.0; d];
    for (a, v) in attn.iter().zip(&vp) {
        for (c, vj) in ctx.iter_mut().zip(v) {
            *c += a * vj;
        }
    }
    let enriched = weights.attn_w_o.matvec(&ctx);
    let mut feat = enriched;
    feat.extend(instance_features.mean_rows());
    let traj = weights.head_w_traj.affine(&feat, weights.head_b_traj.data());
    let loss: f64 = traj.iter().map(|v| v * v).sum();

    // Backward.
    let mut grad = WeightBundle::zeros(weights.dims);
    grad.mlp_activation = weights.mlp_activation;

    let dtraj: Vec<f64> = traj.iter().map(|v| 2.0 * v).collect();
    grad.head_w_traj.add_outer(&dtraj, &feat);
    grad.head_b_traj.add_assign_vec(&dtraj);
    let dfeat = weights.head_w_traj.matvec_t(&dtraj);
    let denriched = &dfeat[..d];

    grad.attn_w_o.add_outer(denriched, &ctx);
    let dctx = weights.attn_w_o.matvec_t(denriched);

    let da: Vec<f64> = vp.iter().map(|v| dot(&dctx, v)).collect();
    let mean_da: f64 = attn.iter().zip(&da).map(|(a, g)| a * g).sum();
    let dlogit: Vec<f64> = attn.iter().zip(&da).map(|(a, g)| a * (g - mean_da)).collect();

    let mut dqp = vec![0.0; d];
    let mut dmixed = vec![vec![0.0; d]; k];
    for r in 0..k {
        let dvp: Vec<f64> = dctx.iter().map(|g| attn[r] * g).collect();
        grad.attn_w_v.add_outer(&dvp, &mixed[r]);
        let dkp: Vec<f64> = qp.iter().map(|q| dlogit[r] * q / scale).collect();
        grad.attn_w_k.add_outer(&dkp, &mixed[r]);
        for (dq, kv) in dqp.iter_mut().zip(&kp[r]) {
            *dq += dlogit[r] * kv / scale;
        }
        let from_v = weights.attn_w_v.matvec_t(&dvp);
        let from_k = weights.attn_w_k.matvec_t(&dkp);
        for j in 0..d {
            dmixed[r][j] = from_v[j] + from_k[j];
        }
    }
    grad.attn_w_q.add_outer(&dqp, selected);

    for r in 0..k {
        let mut dh = dmixed[r].clone();
        let mut dc_next = vec![0.0; d];
        for (t, s) in steps[r].iter().enumerate().rev() {
            let mut dz = vec![0.0; 4 * d];
            let mut dc_prev = vec![0.0; d];
            for j in 0..d {
                let tc = s.c[j].tanh();
                let d_o = dh[j] * tc;
                let dc = dc_next[j] + dh[j] * s.o[j] * (1.0 - tc * tc);
                let di = dc * s.g[j];
                let dg = dc * s.i[j];
                let df = dc * s.c_prev[j];
                dc_prev[j] = dc * s.f[j];
                dz[j] = di * s.i[j] * (1.0 - s.i[j]);
                dz[d + j] = df * s.f[j] * (1.0 - s.f[j]);
                dz[2 * d + j] = dg * (1.0 - s.g[j] * s.g[j]);
                dz[3 * d + j] = d_o * s.o[j] * (1.0 - s.o[j]);
            }
            grad.lstm_w_ih.add_outer(&dz, &s.x);
            grad.lstm_w_hh.add_outer(&dz, &s.h_prev);
            grad.lstm_b.add_assign_vec(&dz);
            let dx = weights.lstm_w_ih.matvec_t(&dz);
            dh = weights.lstm_w_hh.matvec_t(&dz);
            dc_next = dc_prev;

            let gc = &gates[t][r];
            let dpre: Vec<f64> = dx
                .iter()
                .zip(&gc.pre)
                .map(|(g, p)| g * gc.gate * weights.mlp_activation.derivative(*p))
                .collect();
            grad.mlp_w.add_outer(&dpre, &gc.row);
            grad.mlp_b.add_assign_vec(&dpre);
        }
    }

    Ok((loss, grad))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interactor::blocks::mpi_forward_seq;
    use crate::interactor::weights::{MlpActivation, MpiDims};

    #[test]
    fn loss_matches_forward() {
        let dims = MpiDims { d_q: 4, k: 3, n_t: 6 };
        let w = WeightBundle::seeded(dims, 2);
        let hist = vec![
            QueryBatch::new(vec![vec![0.1, 0.4, -0.2, 0.3]; 3], vec![0.0, 1.0, -1.0]).unwrap(),
            QueryBatch::new(vec![vec![-0.3, 0.2, 0.5, 0.1]; 3], vec![0.5, 0.2, -0.7]).unwrap(),
        ];
        let inst = Matrix::from_rows(&[vec![0.2, 0.1, 0.0, -0.4]], 4).unwrap();
        let q = [0.3, -0.6, 0.2, 0.9];
        let (loss, g) = trajectory_loss_grad(&q, &hist, &inst, &w).unwrap();
        let out = mpi_forward_seq(&q, &hist, &inst, &w).unwrap();
        assert!((loss - out.squared_norm()).abs() < 1e-12);
        // score head never touches the trajectory loss
        assert!(g.head_w_score.data().iter().all(|v| *v == 0.0));
        assert!(g.head_b_score.data().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn sequence_and_activation_gradients_match_differences() {
        let dims = MpiDims { d_q: 3, k: 2, n_t: 6 };
        for act in [MlpActivation::Identity, MlpActivation::Tanh] {
            let w = WeightBundle::seeded(dims, 4).with_mlp_activation(act);
            let hist = vec![
                QueryBatch::new(vec![vec![0.4, -0.2, 0.1], vec![0.9, 0.3, -0.5]], vec![0.3, -0.4]).unwrap(),
                QueryBatch::new(vec![vec![-0.1, 0.6, 0.2], vec![0.2, 0.2, 0.7]], vec![1.1, 0.2]).unwrap(),
            ];
            let inst = Matrix::zeros(0, 3);
            let q = [0.5, 0.1, -0.8];
            let (_, g) = trajectory_loss_grad(&q, &hist, &inst, &w).unwrap();
            let h = 1e-6;
            for (pi, (name, m)) in w.params().iter().enumerate() {
                for idx in 0..m.data().len() {
                    let eval = |delta: f64| {
                        let mut wp = w.clone();
                        wp.params_mut()[pi].1.data_mut()[idx] += delta;
                        mpi_forward_seq(&q, &hist, &inst, &wp).unwrap().squared_norm()
                    };
                    let fd = (eval(h) - eval(-h)) / (2.0 * h);
                    let an = g.params()[pi].1.data()[idx];
                    assert!(
                        (fd - an).abs() <= 1e-6 * (1.0 + an.abs()),
                        "{name}[{idx}]: fd {fd} vs {an}"
                    );
                }
            }
        }
    }
}
