//! Pair-embedding trainer.
//!
//! A small, fully deterministic engine that trains a feature embedding with
//! a joint objective: softmax cross-entropy on each input of a pair plus a
//! λ-weighted margin contrastive term on the pair's feature distance. Both
//! branches share one parameter set; all gradients are analytic and checked
//! against finite differences.
//!
//! Modules follow the pipeline: [`data`] generates and normalizes datasets,
//! [`pairing`] draws same/different-class pairs, [`net`] and [`losses`]
//! provide the forward passes and the objective, [`train`] runs SGD, and
//! [`eval`] measures accuracy, embedding separability and the λ tradeoff.

// Numeric kernels and their scalar oracles are written as index loops on
// purpose; iterator rewrites would obscure the accumulation order the
// reproducibility contract documents.
#![allow(clippy::needless_range_loop)]

pub mod checkpoint;
pub mod data;
pub mod error;
pub mod eval;
pub mod gradcheck;
pub mod losses;
pub mod net;
pub mod pairing;
pub mod tensor;
pub mod train;

pub use error::{Error, Result};
pub use tensor::Tensor;
