//! Minimal deterministic neural-network engine.
//!
//! Dense and 1-D convolutional layers, batch normalization, the activations
//! used by the GAN and localizers, a factored Gaussian log-density head,
//! Adam, and a finite-difference gradient checker. Every forward pass has a
//! matching analytic backward pass; all computation is f64 with fixed
//! accumulation order, so identical inputs give bit-identical outputs.

pub mod activations;
pub mod adam;
pub mod batchnorm;
pub mod checkpoint;
pub mod conv1d;
pub mod dense;
pub mod gaussian;
pub mod gradcheck;
pub mod matmul;
pub mod tensor;

pub use adam::AdamState;
pub use batchnorm::{BatchNorm, NormMode};
pub use conv1d::Conv1d;
pub use dense::Dense;
pub use gaussian::{gaussian_log_density, gaussian_log_density_backward};
pub use gradcheck::grad_check;
pub use tensor::Tensor;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum NnError {
    #[error("shape mismatch in {op}: {detail}")]
    ShapeMismatch { op: &'static str, detail: String },
    #[error("batch normalization in train mode needs a batch of at least 2, got {batch}")]
    BatchTooSmall { batch: usize },
    #[error("sigma entries must be strictly positive")]
    NonPositiveSigma,
    #[error("non-finite value produced by {op}")]
    NonFinite { op: &'static str },
    #[error("bad checkpoint: {0}")]
    BadCheckpoint(String),
}
