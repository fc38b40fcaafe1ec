use serde::{Deserialize, Serialize};

use crate::graph::Gradients;
use crate::params::{ParamId, ParamStore};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// Adam with bias correction. Moments are created lazily for each parameter
/// the first time it receives a gradient.
#[derive(Debug, Clone)]
pub struct Adam<T> {
    pub config: AdamConfig,
    steps: u64,
    moments: Vec<Option<(Vec<T>, Vec<T>)>>,
}

impl<T: Scalar> Adam<T> {
    pub fn new(config: AdamConfig) -> Self {
        Adam {
            config,
            steps: 0,
            moments: Vec::new(),
        }
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Applies one update to every parameter present in `grads`.
    pub fn step(&mut self, store: &mut ParamStore<T>, grads: &Gradients<T>) {
        let updates = grads.params();
        self.apply(store, updates.iter().map(|(id, g)| (*id, g.as_slice())));
    }

    /// Applies one update from explicit `(parameter, gradient)` pairs.
    pub fn apply<'a>(
        &mut self,
        store: &mut ParamStore<T>,
        grads: impl IntoIterator<Item = (ParamId, &'a [T])>,
    ) {
        self.steps += 1;
        let c = self.config;
        let t = self.steps as i32;
        let bc1 = T::from_f64(1.0 - c.beta1.powi(t));
        let bc2 = T::from_f64(1.0 - c.beta2.powi(t));
        let (b1, b2) = (T::from_f64(c.beta1), T::from_f64(c.beta2));
        let (lr, eps) = (T::from_f64(c.lr), T::from_f64(c.eps));
        let one = T::one();
        for (id, g) in grads {
            if self.moments.len() <= id.index() {
                self.moments.resize_with(id.index() + 1, || None);
            }
            let (m, v) = self.moments[id.index()]
                .get_or_insert_with(|| (vec![T::zero(); g.len()], vec![T::zero(); g.len()]));
            let p = store.get_mut(id).data_mut();
            assert_eq!(p.len(), g.len(), "gradient length mismatch");
            for i in 0..g.len() {
                m[i] = b1 * m[i] + (one - b1) * g[i];
                v[i] = b2 * v[i] + (one - b2) * g[i] * g[i];
                let m_hat = m[i] / bc1;
                let v_hat = v[i] / bc2;
                p[i] = p[i] - lr * m_hat / (v_hat.sqrt() + eps);
            }
        }
    }
}
