//! Double-double arithmetic (~32 significant digits) and an independent
//! interactor forward pass in it, used as a high-precision finite-difference
//! oracle.

use std::ops::{Add, Div, Mul, Neg, Sub};

use momad_core::interactor::{MlpActivation, QueryBatch, WeightBundle};
use momad_core::Matrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };
    const LN2: Dd = Dd {
        hi: std::f64::consts::LN_2,
        lo: 2.319_046_813_846_299_6e-17,
    };

    pub fn new(v: f64) -> Dd {
        Dd { hi: v, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    fn from_pair((hi, lo): (f64, f64)) -> Dd {
        Dd { hi, lo }
    }

    fn scale_pow2(self, s: f64) -> Dd {
        Dd {
            hi: self.hi * s,
            lo: self.lo * s,
        }
    }

    pub fn sqrt(self) -> Dd {
        if self.hi <= 0.0 {
            return Dd::ZERO;
        }
        let q = Dd::new(self.hi.sqrt());
        q + (self - q * q) / (q + q)
    }

    pub fn exp(self) -> Dd {
        let k = (self.hi / Dd::LN2.hi).round();
        let r = (self - Dd::LN2 * Dd::new(k)).scale_pow2(1.0 / 1024.0);
        let mut term = Dd::ONE;
        let mut sum = Dd::ONE;
        for n in 1..=16 {
            term = term * r / Dd::new(n as f64);
            sum = sum + term;
        }
        for _ in 0..10 {
            sum = sum * sum;
        }
        sum.scale_pow2(2f64.powi(k as i32))
    }

    pub fn tanh(self) -> Dd {
        if self.hi < 0.0 {
            return -(-self).tanh();
        }
        let e = (-(self + self)).exp();
        (Dd::ONE - e) / (Dd::ONE + e)
    }

    pub fn sigmoid(self) -> Dd {
        Dd::ONE / (Dd::ONE + (-self).exp())
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, y: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, y.hi);
        let (t, f) = two_sum(self.lo, y.lo);
        let (s, e) = quick_two_sum(s, e + t);
        Dd::from_pair(quick_two_sum(s, e + f))
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, y: Dd) -> Dd {
        self + (-y)
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, y: Dd) -> Dd {
        let p = self.hi * y.hi;
        let e = self.hi.mul_add(y.hi, -p);
        Dd::from_pair(quick_two_sum(p, e + (self.hi * y.lo + self.lo * y.hi)))
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, y: Dd) -> Dd {
        let q1 = self.hi / y.hi;
        let r = self - y * Dd::new(q1);
        let q2 = r.hi / y.hi;
        let r = r - y * Dd::new(q2);
        let q3 = r.hi / y.hi;
        Dd::from_pair(quick_two_sum(q1, q2)) + Dd::new(q3)
    }
}

pub struct DdMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Dd>,
}

impl DdMatrix {
    pub fn from(m: &Matrix) -> Self {
        DdMatrix {
            rows: m.rows(),
            cols: m.cols(),
            data: m.data().iter().map(|v| Dd::new(*v)).collect(),
        }
    }

    fn affine(&self, x: &[Dd], b: Option<&DdMatrix>) -> Vec<Dd> {
        (0..self.rows)
            .map(|r| {
                let mut acc = b.map_or(Dd::ZERO, |b| b.data[r]);
                for (w, xv) in self.data[r * self.cols..(r + 1) * self.cols].iter().zip(x) {
                    acc = acc + *w * *xv;
                }
                acc
            })
            .collect()
    }
}

/// The thirteen parameter blocks in their canonical order.
pub struct DdWeights {
    pub blocks: Vec<DdMatrix>,
    pub activation: MlpActivation,
    pub d: usize,
}

impl DdWeights {
    pub fn from(w: &WeightBundle) -> Self {
        DdWeights {
            blocks: w.params().iter().map(|(_, m)| DdMatrix::from(m)).collect(),
            activation: w.mlp_activation,
            d: w.dims.d_q,
        }
    }

    /// Adds `delta` (exactly) to entry `idx` of block `p`.
    pub fn nudge(&mut self, p: usize, idx: usize, delta: f64) {
        let v = &mut self.blocks[p].data[idx];
        *v = *v + Dd::new(delta);
    }

    fn act(&self, v: Dd) -> Dd {
        match self.activation {
            MlpActivation::Identity => v,
            MlpActivation::Tanh => v.tanh(),
            MlpActivation::Relu => {
                if v.hi > 0.0 {
                    v
                } else {
                    Dd::ZERO
                }
            }
        }
    }
}

/// `‖trajectories‖²` of gate → LSTM → attention → plan head.
pub fn trajectory_loss(selected: &[f64], history: &[QueryBatch], instances: &Matrix, w: &DdWeights) -> Dd {
    let [mlp_w, mlp_b, w_ih, w_hh, lstm_b, w_q, w_k, w_v, w_o, w_traj, b_traj, _, _] = &w.blocks[..] else {
        panic!("thirteen parameter blocks");
    };
    let d = w.d;
    let k = history[0].len();
    let mut mixed: Vec<Vec<Dd>> = Vec::with_capacity(k);
    for row in 0..k {
        let mut h = vec![Dd::ZERO; d];
        let mut c = vec![Dd::ZERO; d];
        for frame in history {
            let gate = Dd::new(frame.scores()[row]).sigmoid();
            let x: Vec<Dd> = frame.rows().row(row).iter().map(|v| Dd::new(*v)).collect();
            let gated: Vec<Dd> = mlp_w
                .affine(&x, Some(mlp_b))
                .into_iter()
                .map(|v| gate * w.act(v))
                .collect();
            let zi = w_ih.affine(&gated, Some(lstm_b));
            let zh = w_hh.affine(&h, None);
            let z: Vec<Dd> = zi.iter().zip(&zh).map(|(a, b)| *a + *b).collect();
            for j in 0..d {
                let i = z[j].sigmoid();
                let f = z[d + j].sigmoid();
                let g = z[2 * d + j].tanh();
                let o = z[3 * d + j].sigmoid();
                c[j] = f * c[j] + i * g;
                h[j] = o * c[j].tanh();
            }
        }
        mixed.push(h);
    }
    let q: Vec<Dd> = selected.iter().map(|v| Dd::new(*v)).collect();
    let qp = w_q.affine(&q, None);
    let scale = Dd::new(d as f64).sqrt();
    let logits: Vec<Dd> = mixed
        .iter()
        .map(|m| {
            let kp = w_k.affine(m, None);
            qp.iter().zip(&kp).fold(Dd::ZERO, |acc, (a, b)| acc + *a * *b) / scale
        })
        .collect();
    let exps: Vec<Dd> = logits.iter().map(|l| l.exp()).collect();
    let total = exps.iter().fold(Dd::ZERO, |acc, e| acc + *e);
    let mut ctx = vec![Dd::ZERO; d];
    for (m, e) in mixed.iter().zip(&exps) {
        let a = *e / total;
        for (cv, vv) in ctx.iter_mut().zip(w_v.affine(m, None)) {
            *cv = *cv + a * vv;
        }
    }
    let mut feat = w_o.affine(&ctx, None);
    let n = instances.rows();
    for col in 0..d {
        let mut s = Dd::ZERO;
        for r in 0..n {
            s = s + Dd::new(instances.get(r, col));
        }
        feat.push(if n == 0 { Dd::ZERO } else { s / Dd::new(n as f64) });
    }
    w_traj
        .affine(&feat, Some(b_traj))
        .into_iter()
        .fold(Dd::ZERO, |acc, v| acc + v * v)
}
