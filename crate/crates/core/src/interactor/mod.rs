//! Momentum planning interactor: score-gated history mixing, cross-attention
//! from the selected planning query, and the plan head that regenerates
//! trajectories and scores.

mod blocks;
mod grad;
mod weights;

pub use blocks::{
    attention_weights, cross_attention, lstm_step, mix_history, mix_history_seq, mpi_forward, mpi_forward_seq,
    plan_head, score_gate, sigmoid, softmax, LstmState, PlanOutput, QueryBatch,
};
pub use grad::trajectory_loss_grad;
pub use weights::{MlpActivation, MpiDims, WeightBundle, PARAM_NAMES};
