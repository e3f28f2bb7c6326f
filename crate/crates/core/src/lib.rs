//! Analytics, lexicon sentiment labeling and a bidirectional LSTM classifier
//! for women's clothing e-commerce reviews.

pub mod analytics;
pub mod commands;
pub mod config;
pub mod data;
pub mod error;
pub mod metrics;
pub mod nn;
pub mod rng;
pub mod sentiment;
pub mod tensor;
pub mod text;
pub mod train;

pub use error::{Error, Result};
pub use rng::SeededRng;
pub use tensor::Tensor;
