use crate::conv::{self, ConvGeom};
use crate::error::{bad_shape, mismatch};
use crate::params::{ParamId, ParamStore};
use crate::scalar::Scalar;
use crate::tensor::Tensor;
use crate::{AutodiffError, Result};

/// Handle to a value recorded on a [`Graph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var(usize);

#[derive(Debug)]
enum Op<T> {
    Leaf,
    Param(ParamId),
    Conv2d {
        x: Var,
        w: Var,
        b: Var,
        geom: ConvGeom,
        cols: Vec<T>,
    },
    Linear {
        x: Var,
        w: Var,
        b: Var,
    },
    LayerNorm {
        x: Var,
        gamma: Var,
        beta: Var,
        xhat: Vec<T>,
        inv_std: Vec<T>,
    },
    Add(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    Min(Var, Var),
    MulScalarVar(Var, Var),
    Neg(Var),
    Scale(Var, T),
    AddConst(Var),
    Relu(Var),
    Tanh(Var),
    Exp(Var),
    Log(Var),
    Softplus(Var),
    Clamp(Var, T, T),
    Sum(Var),
    Mean(Var),
    SumCols(Var),
    ConcatCols(Var, Var),
    SliceCols(Var, usize),
    Reshape(Var),
}

#[derive(Debug)]
struct Node<T> {
    value: Tensor<T>,
    op: Op<T>,
    requires_grad: bool,
}

/// A tape of tensor operations supporting one reverse pass.
#[derive(Debug, Default)]
pub struct Graph<T> {
    nodes: Vec<Node<T>>,
}

const LAYER_NORM_EPS: f64 = 1e-5;

impl<T: Scalar> Graph<T> {
    pub fn new() -> Self {
        Graph { nodes: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, value: Tensor<T>, op: Op<T>, requires_grad: bool) -> Var {
        self.nodes.push(Node {
            value,
            op,
            requires_grad,
        });
        Var(self.nodes.len() - 1)
    }

    fn needs(&self, v: Var) -> bool {
        self.nodes[v.0].requires_grad
    }

    pub fn value(&self, v: Var) -> &Tensor<T> {
        &self.nodes[v.0].value
    }

    pub fn shape(&self, v: Var) -> &[usize] {
        self.nodes[v.0].value.shape()
    }

    fn data(&self, v: Var) -> &[T] {
        self.nodes[v.0].value.data()
    }

    /// A constant: gradients never flow into it.
    pub fn input(&mut self, t: Tensor<T>) -> Var {
        self.push(t, Op::Leaf, false)
    }

    /// A leaf whose gradient is reported by [`Gradients::wrt`].
    pub fn input_with_grad(&mut self, t: Tensor<T>) -> Var {
        self.push(t, Op::Leaf, true)
    }

    /// A trainable parameter, copied from the store.
    pub fn param(&mut self, store: &ParamStore<T>, id: ParamId) -> Var {
        self.push(store.get(id).clone(), Op::Param(id), true)
    }

    /// A parameter used as a constant (no gradient), e.g. a target network.
    pub fn frozen_param(&mut self, store: &ParamStore<T>, id: ParamId) -> Var {
        self.input(store.get(id).clone())
    }

    /// Same values, cut from the graph.
    pub fn detach(&mut self, v: Var) -> Var {
        let t = self.value(v).clone();
        self.input(t)
    }

    fn unary(&mut self, a: Var, f: impl Fn(T) -> T, op: Op<T>) -> Var {
        let value = self.value(a).map(f);
        let rg = self.needs(a);
        self.push(value, op, rg)
    }

    fn binary(
        &mut self,
        name: &'static str,
        a: Var,
        b: Var,
        f: impl Fn(T, T) -> T,
        op: Op<T>,
    ) -> Result<Var> {
        if self.shape(a) != self.shape(b) {
            return Err(mismatch(name, self.shape(a), self.shape(b)));
        }
        let data = self
            .data(a)
            .iter()
            .zip(self.data(b))
            .map(|(&x, &y)| f(x, y))
            .collect();
        let value = Tensor::new(self.shape(a).to_vec(), data);
        let rg = self.needs(a) || self.needs(b);
        Ok(self.push(value, op, rg))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        self.binary("add", a, b, |x, y| x + y, Op::Add(a, b))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        self.binary("sub", a, b, |x, y| x - y, Op::Sub(a, b))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        self.binary("mul", a, b, |x, y| x * y, Op::Mul(a, b))
    }

    /// Elementwise minimum; ties route the gradient to `a`.
    pub fn min(&mut self, a: Var, b: Var) -> Result<Var> {
        self.binary("min", a, b, |x, y| if x <= y { x } else { y }, Op::Min(a, b))
    }

    pub fn square(&mut self, a: Var) -> Var {
        self.mul(a, a).expect("a tensor matches its own shape")
    }

    /// Multiplies every element of `a` by the single element of `s`.
    pub fn mul_scalar_var(&mut self, a: Var, s: Var) -> Result<Var> {
        if self.value(s).numel() != 1 {
            return Err(bad_shape("mul_scalar_var", "scale must have one element", self.shape(s)));
        }
        let k = self.data(s)[0];
        let value = self.value(a).map(|x| x * k);
        let rg = self.needs(a) || self.needs(s);
        Ok(self.push(value, Op::MulScalarVar(a, s), rg))
    }

    pub fn neg(&mut self, a: Var) -> Var {
        self.unary(a, |x| -x, Op::Neg(a))
    }

    pub fn scale(&mut self, a: Var, k: f64) -> Var {
        let k = T::from_f64(k);
        self.unary(a, |x| x * k, Op::Scale(a, k))
    }

    pub fn add_const(&mut self, a: Var, c: f64) -> Var {
        let c = T::from_f64(c);
        self.unary(a, |x| x + c, Op::AddConst(a))
    }

    pub fn relu(&mut self, a: Var) -> Var {
        self.unary(a, |x| if x > T::zero() { x } else { T::zero() }, Op::Relu(a))
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        self.unary(a, |x| x.tanh(), Op::Tanh(a))
    }

    pub fn exp(&mut self, a: Var) -> Var {
        self.unary(a, |x| x.exp(), Op::Exp(a))
    }

    pub fn log(&mut self, a: Var) -> Var {
        self.unary(a, |x| x.ln(), Op::Log(a))
    }

    /// `log(1 + exp(x))`, computed without overflow.
    pub fn softplus(&mut self, a: Var) -> Var {
        self.unary(a, softplus, Op::Softplus(a))
    }

    /// Clamps into `[lo, hi]`; the gradient passes only inside the interval.
    pub fn clamp(&mut self, a: Var, lo: f64, hi: f64) -> Var {
        let (lo, hi) = (T::from_f64(lo), T::from_f64(hi));
        self.unary(a, |x| x.max(lo).min(hi), Op::Clamp(a, lo, hi))
    }

    pub fn sum(&mut self, a: Var) -> Var {
        let s = self.data(a).iter().copied().sum::<T>();
        let rg = self.needs(a);
        self.push(Tensor::scalar(s), Op::Sum(a), rg)
    }

    pub fn mean(&mut self, a: Var) -> Var {
        let n = T::from_f64(self.value(a).numel() as f64);
        let s = self.data(a).iter().copied().sum::<T>() / n;
        let rg = self.needs(a);
        self.push(Tensor::scalar(s), Op::Mean(a), rg)
    }

    fn matrix(&self, op: &'static str, v: Var) -> Result<(usize, usize)> {
        match *self.shape(v) {
            [r, c] => Ok((r, c)),
            _ => Err(bad_shape(op, "expected a 2-D tensor", self.shape(v))),
        }
    }

    /// Row sums of a `[n, m]` tensor, as `[n, 1]`.
    pub fn sum_cols(&mut self, a: Var) -> Result<Var> {
        let (_, m) = self.matrix("sum_cols", a)?;
        let data: Vec<T> = self.data(a).chunks(m.max(1)).map(|r| r.iter().copied().sum()).collect();
        let n = data.len();
        let rg = self.needs(a);
        Ok(self.push(Tensor::new([n, 1], data), Op::SumCols(a), rg))
    }

    pub fn concat_cols(&mut self, a: Var, b: Var) -> Result<Var> {
        let (n, ca) = self.matrix("concat_cols", a)?;
        let (nb, cb) = self.matrix("concat_cols", b)?;
        if n != nb {
            return Err(mismatch("concat_cols", self.shape(a), self.shape(b)));
        }
        let mut data = Vec::with_capacity(n * (ca + cb));
        for i in 0..n {
            data.extend_from_slice(&self.data(a)[i * ca..(i + 1) * ca]);
            data.extend_from_slice(&self.data(b)[i * cb..(i + 1) * cb]);
        }
        let rg = self.needs(a) || self.needs(b);
        Ok(self.push(Tensor::new([n, ca + cb], data), Op::ConcatCols(a, b), rg))
    }

    /// Columns `start..start + len` of a `[n, m]` tensor.
    pub fn slice_cols(&mut self, a: Var, start: usize, len: usize) -> Result<Var> {
        let (n, m) = self.matrix("slice_cols", a)?;
        if start + len > m {
            return Err(bad_shape(
                "slice_cols",
                format!("columns {start}..{} out of range", start + len),
                self.shape(a),
            ));
        }
        let mut data = Vec::with_capacity(n * len);
        for i in 0..n {
            data.extend_from_slice(&self.data(a)[i * m + start..i * m + start + len]);
        }
        let rg = self.needs(a);
        Ok(self.push(Tensor::new([n, len], data), Op::SliceCols(a, start), rg))
    }

    pub fn reshape(&mut self, a: Var, shape: &[usize]) -> Result<Var> {
        let value = self.value(a).clone().reshaped(shape.to_vec())?;
        let rg = self.needs(a);
        Ok(self.push(value, Op::Reshape(a), rg))
    }

    /// Flattens all axes after the first.
    pub fn flatten(&mut self, a: Var) -> Result<Var> {
        let shape = self.shape(a);
        let n = shape[0];
        let rest = shape[1..].iter().product();
        self.reshape(a, &[n, rest])
    }

    /// `x · w + b` for `x: [n, in]`, `w: [in, out]`, `b: [out]`.
    pub fn linear(&mut self, x: Var, w: Var, b: Var) -> Result<Var> {
        let (n, fin) = self.matrix("linear", x)?;
        let (win, fout) = self.matrix("linear", w)?;
        if fin != win {
            return Err(mismatch("linear", self.shape(x), self.shape(w)));
        }
        if self.shape(b) != [fout] {
            return Err(mismatch("linear bias", self.shape(w), self.shape(b)));
        }
        let mut out = Vec::with_capacity(n * fout);
        for _ in 0..n {
            out.extend_from_slice(self.data(b));
        }
        T::gemm(n, fin, fout, T::one(), self.data(x), false, self.data(w), false, T::one(), &mut out);
        let rg = self.needs(x) || self.needs(w) || self.needs(b);
        Ok(self.push(Tensor::new([n, fout], out), Op::Linear { x, w, b }, rg))
    }

    /// Valid 2-D convolution: `x: [n, c, h, w]`, `w: [o, c, kh, kw]`,
    /// `b: [o]`.
    pub fn conv2d(&mut self, x: Var, w: Var, b: Var, stride: usize) -> Result<Var> {
        let xs = self.shape(x).to_vec();
        let ws = self.shape(w).to_vec();
        let (&[n, c, h, wd], &[o, wc, kh, kw]) = (&xs[..], &ws[..]) else {
            return Err(mismatch("conv2d", &xs, &ws));
        };
        if c != wc || kh > h || kw > wd || stride == 0 {
            return Err(mismatch("conv2d", &xs, &ws));
        }
        if self.shape(b) != [o] {
            return Err(mismatch("conv2d bias", &ws, self.shape(b)));
        }
        let geom = ConvGeom {
            n,
            c,
            h,
            w: wd,
            o,
            kh,
            kw,
            stride,
            ho: (h - kh) / stride + 1,
            wo: (wd - kw) / stride + 1,
        };
        let rg = self.needs(x) || self.needs(w) || self.needs(b);
        let (out, cols) = conv::forward(self.data(x), self.data(w), self.data(b), &geom, rg);
        let value = Tensor::new([n, o, geom.ho, geom.wo], out);
        Ok(self.push(value, Op::Conv2d { x, w, b, geom, cols }, rg))
    }

    /// Normalizes each row of `x: [n, f]`, then scales by `gamma` and shifts
    /// by `beta` (both `[f]`).
    pub fn layer_norm(&mut self, x: Var, gamma: Var, beta: Var) -> Result<Var> {
        let (n, f) = self.matrix("layer_norm", x)?;
        if self.shape(gamma) != [f] || self.shape(beta) != [f] {
            return Err(mismatch("layer_norm", self.shape(x), self.shape(gamma)));
        }
        let eps = T::from_f64(LAYER_NORM_EPS);
        let fl = T::from_f64(f as f64);
        let mut xhat = Vec::with_capacity(n * f);
        let mut inv_std = Vec::with_capacity(n);
        for row in self.data(x).chunks(f) {
            let mean = row.iter().copied().sum::<T>() / fl;
            let var = row.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>() / fl;
            let inv = T::one() / (var + eps).sqrt();
            inv_std.push(inv);
            xhat.extend(row.iter().map(|&v| (v - mean) * inv));
        }
        let (g, bt) = (self.data(gamma), self.data(beta));
        let out: Vec<T> = xhat
            .iter()
            .enumerate()
            .map(|(i, &v)| v * g[i % f] + bt[i % f])
            .collect();
        let rg = self.needs(x) || self.needs(gamma) || self.needs(beta);
        let op = Op::LayerNorm {
            x,
            gamma,
            beta,
            xhat: if rg { xhat } else { Vec::new() },
            inv_std,
        };
        Ok(self.push(Tensor::new([n, f], out), op, rg))
    }

    /// Reparameterized Gaussian sample `mu + exp(log_std) · noise`.
    pub fn reparam_gaussian_sample(&mut self, mu: Var, log_std: Var, noise: Tensor<T>) -> Result<Var> {
        let std = self.exp(log_std);
        let eps = self.input(noise);
        let scaled = self.mul(std, eps)?;
        self.add(mu, scaled)
    }

    /// Reverse pass from a one-element `loss`.
    pub fn backward(&self, loss: Var) -> Result<Gradients<T>> {
        if self.value(loss).numel() != 1 {
            return Err(AutodiffError::NonScalarLoss(self.shape(loss).to_vec()));
        }
        let mut grads: Vec<Option<Vec<T>>> = (0..self.nodes.len()).map(|_| None).collect();
        grads[loss.0] = Some(vec![T::one()]);
        for i in (0..=loss.0).rev() {
            let node = &self.nodes[i];
            if !node.requires_grad {
                continue;
            }
            let Some(g) = grads[i].take() else { continue };
            self.backward_node(node, &g, &mut grads);
            grads[i] = Some(g);
        }
        let params = self
            .nodes
            .iter()
            .enumerate()
            .filter_map(|(i, n)| match n.op {
                Op::Param(id) => Some((id, Var(i))),
                _ => None,
            })
            .collect();
        Ok(Gradients { grads, params })
    }

    fn backward_node(&self, node: &Node<T>, g: &[T], grads: &mut [Option<Vec<T>>]) {
        let zero = T::zero();
        let one = T::one();
        match node.op {
            Op::Leaf | Op::Param(_) => {}
            Op::Add(a, b) => {
                self.acc(grads, a, |d| add_into(d, g));
                self.acc(grads, b, |d| add_into(d, g));
            }
            Op::Sub(a, b) => {
                self.acc(grads, a, |d| add_into(d, g));
                self.acc(grads, b, |d| d.iter_mut().zip(g).for_each(|(d, &g)| *d -= g));
            }
            Op::Mul(a, b) => {
                let (xa, xb) = (self.data(a), self.data(b));
                self.acc(grads, a, |d| {
                    for i in 0..d.len() {
                        d[i] += g[i] * xb[i];
                    }
                });
                self.acc(grads, b, |d| {
                    for i in 0..d.len() {
                        d[i] += g[i] * xa[i];
                    }
                });
            }
            Op::Min(a, b) => {
                let (xa, xb) = (self.data(a), self.data(b));
                self.acc(grads, a, |d| {
                    for i in 0..d.len() {
                        if xa[i] <= xb[i] {
                            d[i] += g[i];
                        }
                    }
                });
                self.acc(grads, b, |d| {
                    for i in 0..d.len() {
                        if xa[i] > xb[i] {
                            d[i] += g[i];
                        }
                    }
                });
            }
            Op::MulScalarVar(a, s) => {
                let k = self.data(s)[0];
                let xa = self.data(a);
                self.acc(grads, a, |d| d.iter_mut().zip(g).for_each(|(d, &g)| *d += g * k));
                self.acc(grads, s, |d| {
                    d[0] += g.iter().zip(xa).map(|(&g, &x)| g * x).sum::<T>();
                });
            }
            Op::Neg(a) => self.acc(grads, a, |d| d.iter_mut().zip(g).for_each(|(d, &g)| *d -= g)),
            Op::Scale(a, k) => {
                self.acc(grads, a, |d| d.iter_mut().zip(g).for_each(|(d, &g)| *d += g * k))
            }
            Op::AddConst(a) | Op::Reshape(a) => self.acc(grads, a, |d| add_into(d, g)),
            Op::Relu(a) => {
                let x = self.data(a);
                self.acc(grads, a, |d| {
                    for i in 0..d.len() {
                        if x[i] > zero {
                            d[i] += g[i];
                        }
                    }
                });
            }
            Op::Tanh(a) => {
                let y = node.value.data();
                self.acc(grads, a, |d| {
                    for i in 0..d.len() {
                        d[i] += g[i] * (one - y[i] * y[i]);
                    }
                });
            }
            Op::Exp(a) => {
                let y = node.value.data();
                self.acc(grads, a, |d| {
                    for i in 0..d.len() {
                        d[i] += g[i] * y[i];
                    }
                });
            }
            Op::Log(a) => {
                let x = self.data(a);
                self.acc(grads, a, |d| {
                    for i in 0..d.len() {
                        d[i] += g[i] / x[i];
                    }
                });
            }
            Op::Softplus(a) => {
                let x = self.data(a);
                self.acc(grads, a, |d| {
                    for i in 0..d.len() {
                        d[i] += g[i] * sigmoid(x[i]);
                    }
                });
            }
            Op::Clamp(a, lo, hi) => {
                let x = self.data(a);
                self.acc(grads, a, |d| {
                    for i in 0..d.len() {
                        if x[i] >= lo && x[i] <= hi {
                            d[i] += g[i];
                        }
                    }
                });
            }
            Op::Sum(a) => self.acc(grads, a, |d| d.iter_mut().for_each(|d| *d += g[0])),
            Op::Mean(a) => {
                let k = g[0] / T::from_f64(self.value(a).numel() as f64);
                self.acc(grads, a, |d| d.iter_mut().for_each(|d| *d += k));
            }
            Op::SumCols(a) => {
                let m = self.shape(a)[1];
                self.acc(grads, a, |d| {
                    for (i, row) in d.chunks_mut(m.max(1)).enumerate() {
                        row.iter_mut().for_each(|x| *x += g[i]);
                    }
                });
            }
            Op::ConcatCols(a, b) => {
                let ca = self.shape(a)[1];
                let cb = self.shape(b)[1];
                let w = ca + cb;
                self.acc(grads, a, |d| {
                    for (i, row) in d.chunks_mut(ca.max(1)).enumerate() {
                        add_into(row, &g[i * w..i * w + ca]);
                    }
                });
                self.acc(grads, b, |d| {
                    for (i, row) in d.chunks_mut(cb.max(1)).enumerate() {
                        add_into(row, &g[i * w + ca..(i + 1) * w]);
                    }
                });
            }
            Op::SliceCols(a, start) => {
                let m = self.shape(a)[1];
                let len = node.value.shape()[1];
                self.acc(grads, a, |d| {
                    for (i, row) in d.chunks_mut(m).enumerate() {
                        add_into(&mut row[start..start + len], &g[i * len..(i + 1) * len]);
                    }
                });
            }
            Op::Linear { x, w, b } => {
                let (n, fin) = (self.shape(x)[0], self.shape(x)[1]);
                let fout = self.shape(w)[1];
                let (xv, wv) = (self.data(x), self.data(w));
                self.acc(grads, x, |d| {
                    T::gemm(n, fout, fin, one, g, false, wv, true, one, d);
                });
                self.acc(grads, w, |d| {
                    T::gemm(fin, n, fout, one, xv, true, g, false, one, d);
                });
                self.acc(grads, b, |d| {
                    for row in g.chunks(fout) {
                        add_into(d, row);
                    }
                });
            }
            Op::Conv2d {
                x,
                w,
                b,
                geom,
                ref cols,
            } => {
                let need = (self.needs(x), self.needs(w), self.needs(b));
                let out = conv::backward(g, cols, self.data(w), &geom, need);
                if let Some(dx) = out.dx {
                    self.acc(grads, x, |d| add_into(d, &dx));
                }
                if let Some(dw) = out.dw {
                    self.acc(grads, w, |d| add_into(d, &dw));
                }
                if let Some(db) = out.db {
                    self.acc(grads, b, |d| add_into(d, &db));
                }
            }
            Op::LayerNorm {
                x,
                gamma,
                beta,
                ref xhat,
                ref inv_std,
            } => {
                let f = self.shape(x)[1];
                let gm = self.data(gamma);
                self.acc(grads, gamma, |d| {
                    for (gr, xr) in g.chunks(f).zip(xhat.chunks(f)) {
                        for j in 0..f {
                            d[j] += gr[j] * xr[j];
                        }
                    }
                });
                self.acc(grads, beta, |d| {
                    for gr in g.chunks(f) {
                        add_into(d, gr);
                    }
                });
                let fl = T::from_f64(f as f64);
                self.acc(grads, x, |d| {
                    let rows = g.chunks(f).zip(xhat.chunks(f)).zip(d.chunks_mut(f));
                    for (((gr, xr), dr), &inv) in rows.zip(inv_std) {
                        let mut s1 = zero;
                        let mut s2 = zero;
                        for j in 0..f {
                            let dxh = gr[j] * gm[j];
                            s1 += dxh;
                            s2 += dxh * xr[j];
                        }
                        for j in 0..f {
                            let dxh = gr[j] * gm[j];
                            dr[j] += inv / fl * (fl * dxh - s1 - xr[j] * s2);
                        }
                    }
                });
            }
        }
    }

    /// Runs `f` on the gradient buffer of `v` (zero-initialized on first
    /// use) when `v` takes part in differentiation.
    fn acc(&self, grads: &mut [Option<Vec<T>>], v: Var, f: impl FnOnce(&mut [T])) {
        if !self.needs(v) {
            return;
        }
        let n = self.value(v).numel();
        let buf = grads[v.0].get_or_insert_with(|| vec![T::zero(); n]);
        f(buf);
    }
}

fn add_into<T: Scalar>(d: &mut [T], g: &[T]) {
    d.iter_mut().zip(g).for_each(|(d, &g)| *d += g);
}

fn sigmoid<T: Scalar>(x: T) -> T {
    if x >= T::zero() {
        T::one() / (T::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (T::one() + e)
    }
}

fn softplus<T: Scalar>(x: T) -> T {
    x.max(T::zero()) + (-x.abs()).exp().ln_1p()
}

/// Result of a reverse pass.
#[derive(Debug)]
pub struct Gradients<T> {
    grads: Vec<Option<Vec<T>>>,
    params: Vec<(ParamId, Var)>,
}

impl<T: Scalar> Gradients<T> {
    /// Gradient with respect to a recorded value; `None` when nothing
    /// flowed into it.
    pub fn wrt(&self, v: Var) -> Option<&[T]> {
        self.grads[v.0].as_deref()
    }

    /// Gradient for each parameter that received one, summed over every
    /// place the parameter was used, ordered by parameter id.
    pub fn params(&self) -> Vec<(ParamId, Vec<T>)> {
        let mut out: Vec<(ParamId, Vec<T>)> = Vec::new();
        let mut sorted = self.params.clone();
        sorted.sort_by_key(|(id, v)| (*id, v.0));
        for (id, v) in sorted {
            let Some(g) = self.wrt(v) else { continue };
            match out.last_mut() {
                Some((last, acc)) if *last == id => add_into(acc, g),
                _ => out.push((id, g.to_vec())),
            }
        }
        out
    }

    pub fn param(&self, id: ParamId) -> Option<Vec<T>> {
        self.params().into_iter().find(|(p, _)| *p == id).map(|(_, g)| g)
    }

    /// Global L2 norm over all parameter gradients.
    pub fn param_norm(&self) -> f64 {
        self.params()
            .iter()
            .flat_map(|(_, g)| g.iter().map(|x| x.as_f64() * x.as_f64()))
            .sum::<f64>()
            .sqrt()
    }
}
