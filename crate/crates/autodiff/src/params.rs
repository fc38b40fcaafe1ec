use std::collections::HashMap;

use crate::scalar::Scalar;
use crate::tensor::Tensor;

/// Handle to a tensor inside a [`ParamStore`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ParamId(pub(crate) usize);

impl ParamId {
    pub fn index(&self) -> usize {
        self.0
    }
}

/// Named trainable tensors, in insertion order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParamStore<T> {
    names: Vec<String>,
    tensors: Vec<Tensor<T>>,
    by_name: HashMap<String, usize>,
}

impl<T: Scalar> ParamStore<T> {
    pub fn new() -> Self {
        ParamStore {
            names: Vec::new(),
            tensors: Vec::new(),
            by_name: HashMap::new(),
        }
    }

    /// # Panics
    /// When `name` is already present.
    pub fn add(&mut self, name: impl Into<String>, tensor: Tensor<T>) -> ParamId {
        let name = name.into();
        assert!(
            !self.by_name.contains_key(&name),
            "duplicate parameter name `{name}`"
        );
        let id = self.tensors.len();
        self.by_name.insert(name.clone(), id);
        self.names.push(name);
        self.tensors.push(tensor);
        ParamId(id)
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn get(&self, id: ParamId) -> &Tensor<T> {
        &self.tensors[id.0]
    }

    pub fn get_mut(&mut self, id: ParamId) -> &mut Tensor<T> {
        &mut self.tensors[id.0]
    }

    pub fn name(&self, id: ParamId) -> &str {
        &self.names[id.0]
    }

    pub fn id(&self, name: &str) -> Option<ParamId> {
        self.by_name.get(name).map(|&i| ParamId(i))
    }

    pub fn ids(&self) -> impl Iterator<Item = ParamId> {
        (0..self.tensors.len()).map(ParamId)
    }

    pub fn iter(&self) -> impl Iterator<Item = (ParamId, &str, &Tensor<T>)> {
        self.names
            .iter()
            .zip(&self.tensors)
            .enumerate()
            .map(|(i, (n, t))| (ParamId(i), n.as_str(), t))
    }

    /// Total number of scalars across all tensors.
    pub fn num_scalars(&self) -> usize {
        self.tensors.iter().map(|t| t.numel()).sum()
    }

    pub fn cast<U: Scalar>(&self) -> ParamStore<U> {
        ParamStore {
            names: self.names.clone(),
            tensors: self.tensors.iter().map(|t| t.cast()).collect(),
            by_name: self.by_name.clone(),
        }
    }

    /// `self[id] ← (1 − τ)·self[id] + τ·source[id]` for each listed id.
    pub fn ema_from(&mut self, source: &ParamStore<T>, ids: &[ParamId], tau: T) {
        let keep = T::one() - tau;
        for &id in ids {
            let src = source.get(id);
            let dst = &mut self.tensors[id.0];
            assert_eq!(dst.shape(), src.shape(), "ema shape mismatch for {}", self.names[id.0]);
            for (d, &s) in dst.data_mut().iter_mut().zip(src.data()) {
                *d = keep * *d + tau * s;
            }
        }
    }

    pub fn all_finite(&self) -> bool {
        self.tensors.iter().all(|t| t.all_finite())
    }

    /// Structural equality: same names and shapes in the same order.
    pub fn same_layout(&self, other: &ParamStore<T>) -> bool {
        self.names == other.names
            && self
                .tensors
                .iter()
                .zip(&other.tensors)
                .all(|(a, b)| a.shape() == b.shape())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ema_closed_form() {
        let mut target = ParamStore::<f64>::new();
        let id = target.add("w", Tensor::zeros([3]));
        let mut online = target.clone();
        online.get_mut(id).data_mut().fill(1.0);
        target.ema_from(&online, &[id], 0.01);
        assert!(target.get(id).data().iter().all(|&x| x == 0.01));
        target.ema_from(&online, &[id], 1.0);
        assert!(target.get(id).data().iter().all(|&x| x == 1.0));
    }

    #[test]
    fn lookup_by_name() {
        let mut s = ParamStore::<f32>::new();
        let a = s.add("a", Tensor::zeros([2]));
        let b = s.add("b", Tensor::zeros([2, 2]));
        assert_eq!(s.id("b"), Some(b));
        assert_eq!(s.name(a), "a");
        assert_eq!(s.num_scalars(), 6);
    }
}
