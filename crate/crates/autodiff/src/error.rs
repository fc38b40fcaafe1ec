use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AutodiffError {
    #[error("{op}: shape mismatch between {left:?} and {right:?}")]
    ShapeMismatch {
        op: &'static str,
        left: Vec<usize>,
        right: Vec<usize>,
    },
    #[error("{op}: {reason} (shape {shape:?})")]
    BadShape {
        op: &'static str,
        reason: String,
        shape: Vec<usize>,
    },
    #[error("backward requires a scalar loss, got shape {0:?}")]
    NonScalarLoss(Vec<usize>),
}

pub(crate) fn mismatch(op: &'static str, left: &[usize], right: &[usize]) -> AutodiffError {
    AutodiffError::ShapeMismatch {
        op,
        left: left.to_vec(),
        right: right.to_vec(),
    }
}

pub(crate) fn bad_shape(op: &'static str, reason: impl Into<String>, shape: &[usize]) -> AutodiffError {
    AutodiffError::BadShape {
        op,
        reason: reason.into(),
        shape: shape.to_vec(),
    }
}
