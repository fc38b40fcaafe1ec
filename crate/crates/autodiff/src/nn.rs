//! Layers that own parameter handles and build their forward pass on a
//! graph.

use rand::Rng;

use crate::graph::{Graph, Var};
use crate::init::orthogonal_tensor;
use crate::params::{ParamId, ParamStore};
use crate::scalar::Scalar;
use crate::tensor::Tensor;
use crate::Result;

/// How a layer's parameters enter a graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Binding {
    /// Parameters receive gradients.
    Trainable,
    /// Parameters are constants (target networks, evaluation).
    Frozen,
}

/// A parameter store together with how to bind it.
#[derive(Debug, Clone, Copy)]
pub struct Params<'a, T> {
    pub store: &'a ParamStore<T>,
    pub binding: Binding,
}

impl<'a, T: Scalar> Params<'a, T> {
    pub fn trainable(store: &'a ParamStore<T>) -> Self {
        Params {
            store,
            binding: Binding::Trainable,
        }
    }

    pub fn frozen(store: &'a ParamStore<T>) -> Self {
        Params {
            store,
            binding: Binding::Frozen,
        }
    }

    pub fn bind(&self, g: &mut Graph<T>, id: ParamId) -> Var {
        match self.binding {
            Binding::Trainable => g.param(self.store, id),
            Binding::Frozen => g.frozen_param(self.store, id),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Linear {
    pub w: ParamId,
    pub b: ParamId,
    pub fan_in: usize,
    pub fan_out: usize,
}

impl Linear {
    /// Orthogonal weight of shape `[fan_in, fan_out]`, zero bias.
    pub fn new<T: Scalar, R: Rng + ?Sized>(
        store: &mut ParamStore<T>,
        name: &str,
        fan_in: usize,
        fan_out: usize,
        rng: &mut R,
    ) -> Self {
        let w = store.add(format!("{name}.weight"), orthogonal_tensor(&[fan_in, fan_out], 1.0, rng));
        let b = store.add(format!("{name}.bias"), Tensor::zeros([fan_out]));
        Linear {
            w,
            b,
            fan_in,
            fan_out,
        }
    }

    pub fn forward<T: Scalar>(&self, g: &mut Graph<T>, p: &Params<'_, T>, x: Var) -> Result<Var> {
        let w = p.bind(g, self.w);
        let b = p.bind(g, self.b);
        g.linear(x, w, b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Conv2d {
    pub w: ParamId,
    pub b: ParamId,
    pub stride: usize,
}

impl Conv2d {
    /// Orthogonal `[out, in, k, k]` kernel, zero bias.
    pub fn new<T: Scalar, R: Rng + ?Sized>(
        store: &mut ParamStore<T>,
        name: &str,
        in_channels: usize,
        out_channels: usize,
        kernel: usize,
        stride: usize,
        rng: &mut R,
    ) -> Self {
        let shape = [out_channels, in_channels, kernel, kernel];
        let gain = std::f64::consts::SQRT_2;
        let w = store.add(format!("{name}.weight"), orthogonal_tensor(&shape, gain, rng));
        let b = store.add(format!("{name}.bias"), Tensor::zeros([out_channels]));
        Conv2d { w, b, stride }
    }

    pub fn forward<T: Scalar>(&self, g: &mut Graph<T>, p: &Params<'_, T>, x: Var) -> Result<Var> {
        let w = p.bind(g, self.w);
        let b = p.bind(g, self.b);
        g.conv2d(x, w, b, self.stride)
    }

    /// Output side length for a square input of side `input`.
    pub fn output_size(&self, input: usize, kernel: usize) -> usize {
        (input - kernel) / self.stride + 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayerNorm {
    pub gamma: ParamId,
    pub beta: ParamId,
}

impl LayerNorm {
    pub fn new<T: Scalar>(store: &mut ParamStore<T>, name: &str, features: usize) -> Self {
        let gamma = store.add(format!("{name}.gamma"), Tensor::full([features], T::one()));
        let beta = store.add(format!("{name}.beta"), Tensor::zeros([features]));
        LayerNorm { gamma, beta }
    }

    pub fn forward<T: Scalar>(&self, g: &mut Graph<T>, p: &Params<'_, T>, x: Var) -> Result<Var> {
        let gamma = p.bind(g, self.gamma);
        let beta = p.bind(g, self.beta);
        g.layer_norm(x, gamma, beta)
    }
}

/// Fully connected stack with ReLU between layers and a linear output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mlp {
    pub layers: Vec<Linear>,
}

impl Mlp {
    /// `hidden.len() + 1` linear layers mapping `input → … → output`.
    pub fn new<T: Scalar, R: Rng + ?Sized>(
        store: &mut ParamStore<T>,
        name: &str,
        input: usize,
        hidden: &[usize],
        output: usize,
        rng: &mut R,
    ) -> Self {
        let mut sizes = vec![input];
        sizes.extend_from_slice(hidden);
        sizes.push(output);
        let layers = sizes
            .windows(2)
            .enumerate()
            .map(|(i, w)| Linear::new(store, &format!("{name}.{i}"), w[0], w[1], rng))
            .collect();
        Mlp { layers }
    }

    pub fn forward<T: Scalar>(&self, g: &mut Graph<T>, p: &Params<'_, T>, x: Var) -> Result<Var> {
        let mut h = x;
        for (i, layer) in self.layers.iter().enumerate() {
            h = layer.forward(g, p, h)?;
            if i + 1 < self.layers.len() {
                h = g.relu(h);
            }
        }
        Ok(h)
    }

    pub fn param_ids(&self) -> Vec<ParamId> {
        self.layers.iter().flat_map(|l| [l.w, l.b]).collect()
    }
}
