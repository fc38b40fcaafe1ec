use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Dense `(channels, height, width)` image with values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObsImage {
    pub channels: usize,
    pub height: usize,
    pub width: usize,
    pub data: Vec<f32>,
}

impl ObsImage {
    pub fn zeros(channels: usize, height: usize, width: usize) -> Self {
        Self {
            channels,
            height,
            width,
            data: vec![0.0; channels * height * width],
        }
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.channels, self.height, self.width)
    }

    #[inline]
    pub fn offset(&self, c: usize, row: usize, col: usize) -> usize {
        (c * self.height + row) * self.width + col
    }

    #[inline]
    pub fn get(&self, c: usize, row: usize, col: usize) -> f32 {
        self.data[self.offset(c, row, col)]
    }

    #[inline]
    pub fn set(&mut self, c: usize, row: usize, col: usize, value: f32) {
        let i = self.offset(c, row, col);
        self.data[i] = value;
    }

    pub fn plane(&self, c: usize) -> &[f32] {
        let n = self.height * self.width;
        &self.data[c * n..(c + 1) * n]
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FrameError {
    #[error("cannot stack an empty frame history")]
    EmptyHistory,
    #[error("frame stack depth must be at least 1")]
    ZeroDepth,
    #[error("frame shapes differ: {0:?} vs {1:?}")]
    ShapeMismatch((usize, usize, usize), (usize, usize, usize)),
}

/// Channel-concatenates the `k` most recent frames of `history` (given oldest
/// first). Short histories are front-padded with their oldest frame.
pub fn stack_frames(history: &[ObsImage], k: usize) -> Result<ObsImage, FrameError> {
    if k == 0 {
        return Err(FrameError::ZeroDepth);
    }
    let first = history.first().ok_or(FrameError::EmptyHistory)?;
    let shape = first.shape();
    if let Some(bad) = history.iter().find(|f| f.shape() != shape) {
        return Err(FrameError::ShapeMismatch(shape, bad.shape()));
    }
    let recent = &history[history.len().saturating_sub(k)..];
    let pad = k - recent.len();
    let mut data = Vec::with_capacity(k * first.data.len());
    for _ in 0..pad {
        data.extend_from_slice(&recent[0].data);
    }
    for frame in recent {
        data.extend_from_slice(&frame.data);
    }
    Ok(ObsImage {
        channels: k * shape.0,
        height: shape.1,
        width: shape.2,
        data,
    })
}

/// Rolling window of the last `depth` frames.
#[derive(Debug, Clone)]
pub struct FrameStack {
    depth: usize,
    frames: VecDeque<ObsImage>,
}

impl FrameStack {
    pub fn new(depth: usize) -> Self {
        Self {
            depth: depth.max(1),
            frames: VecDeque::with_capacity(depth.max(1)),
        }
    }

    pub fn clear(&mut self) {
        self.frames.clear();
    }

    /// Appends a frame and returns the stacked observation.
    pub fn push(&mut self, frame: ObsImage) -> ObsImage {
        if self.frames.len() == self.depth {
            self.frames.pop_front();
        }
        self.frames.push_back(frame);
        if self.depth == 1 {
            return self.frames[0].clone();
        }
        let history: Vec<ObsImage> = self.frames.iter().cloned().collect();
        stack_frames(&history, self.depth).expect("non-empty history of one shape")
    }
}
