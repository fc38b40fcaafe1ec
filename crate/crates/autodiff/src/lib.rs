//! A minimal reverse-mode automatic differentiation engine.
//!
//! Values live in [`Tensor`]s; a [`Graph`] records operations on them as a
//! tape and replays it backwards to produce gradients. Trainable weights are
//! kept in a [`ParamStore`] and copied into a graph per forward pass, so a
//! graph never aliases the store and parameter updates happen after the
//! graph is dropped.
//!
//! Everything is generic over [`Scalar`]: `f32` for training, `f64` for
//! finite-difference verification.

mod adam;
mod checkpoint;
pub mod conv;
mod error;
mod gradcheck;
mod graph;
mod init;
pub mod nn;
mod params;
mod scalar;
mod tensor;

pub use adam::{Adam, AdamConfig};
pub use checkpoint::{load_checkpoint, save_checkpoint, CheckpointError, ManifestEntry};
pub use error::AutodiffError;
pub use gradcheck::{
    check_gradients, check_param_gradients, relative_error, GradcheckReport, RELATIVE_ERROR_FLOOR,
};
pub use graph::{Gradients, Graph, Var};
pub use init::{orthogonal, orthogonal_tensor};
pub use params::{ParamId, ParamStore};
pub use scalar::Scalar;
pub use tensor::Tensor;

pub type Result<T> = std::result::Result<T, AutodiffError>;
