//! Recurrent network building blocks with hand-written backward passes.

pub mod adam;
pub mod bilstm;
pub mod checkpoint;
pub mod dense;
pub mod dropout;
pub mod gradcheck;
pub mod loss;
pub mod lstm;
pub mod model;

pub use adam::{adam_step, AdamState};
pub use bilstm::{bilstm_forward, BiLstmLayer};
pub use checkpoint::Checkpoint;
pub use dense::{dense_softmax_forward, DenseParams};
pub use dropout::dropout;
pub use gradcheck::{grad_check, GradCheckReport};
pub use loss::{cross_entropy, cross_entropy_grad};
pub use lstm::{lstm_cell_forward, lstm_sequence_forward, GateActivations, LstmParams, LstmState};
pub use model::{BiLstmClassifier, ModelGrads};
