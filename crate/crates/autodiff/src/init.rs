use rand::Rng;
use rand_distr::StandardNormal;

use crate::scalar::Scalar;
use crate::tensor::Tensor;

/// A `rows × cols` row-major matrix with orthonormal rows (when rows ≤ cols)
/// or orthonormal columns (otherwise), scaled by `gain`. Built by
/// Gram–Schmidt on a Gaussian matrix, which is distributed uniformly over
/// the orthogonal group.
pub fn orthogonal<R: Rng + ?Sized>(rows: usize, cols: usize, gain: f64, rng: &mut R) -> Vec<f64> {
    let (short, long) = (rows.min(cols), rows.max(cols));
    // `short` vectors of length `long`
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(short);
    while basis.len() < short {
        let mut v: Vec<f64> = (0..long).map(|_| rng.sample(StandardNormal)).collect();
        // two passes keep the result orthogonal to working precision
        for _ in 0..2 {
            for b in &basis {
                let dot: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= dot * y);
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-10 {
            continue;
        }
        v.iter_mut().for_each(|x| *x /= norm);
        basis.push(v);
    }
    let mut out = vec![0.0; rows * cols];
    for (i, b) in basis.iter().enumerate() {
        for (j, &x) in b.iter().enumerate() {
            let (r, c) = if rows <= cols { (i, j) } else { (j, i) };
            out[r * cols + c] = gain * x;
        }
    }
    out
}

/// Orthogonal initialization for a weight whose first axis is treated as
/// rows and the remaining axes flattened into columns.
pub fn orthogonal_tensor<T: Scalar, R: Rng + ?Sized>(
    shape: &[usize],
    gain: f64,
    rng: &mut R,
) -> Tensor<T> {
    let rows = shape[0];
    let cols: usize = shape[1..].iter().product();
    Tensor::from_f64(shape.to_vec(), &orthogonal(rows, cols, gain, rng))
}
