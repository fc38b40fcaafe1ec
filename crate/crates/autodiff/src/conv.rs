//! im2col convolution kernels, batched over samples.

use std::sync::atomic::{AtomicBool, Ordering};

use crate::scalar::Scalar;

static PARALLEL: AtomicBool = AtomicBool::new(true);

/// Chooses whether batched kernels split work across samples on the rayon
/// pool. Has no effect without the `parallel` feature. Both settings give
/// bit-identical results.
pub fn set_parallel(enabled: bool) {
    PARALLEL.store(enabled, Ordering::Relaxed);
}

pub fn parallel_enabled() -> bool {
    cfg!(feature = "parallel") && PARALLEL.load(Ordering::Relaxed)
}

/// Calls `f(i, a_chunk, b_chunk)` for matching chunks of two buffers.
fn for_each_pair<A: Send, B: Send>(
    a: &mut [A],
    a_chunk: usize,
    b: &mut [B],
    b_chunk: usize,
    f: impl Fn(usize, &mut [A], &mut [B]) + Sync + Send,
) {
    #[cfg(feature = "parallel")]
    if parallel_enabled() {
        use rayon::prelude::*;
        a.par_chunks_mut(a_chunk)
            .zip(b.par_chunks_mut(b_chunk))
            .enumerate()
            .for_each(|(i, (x, y))| f(i, x, y));
        return;
    }
    a.chunks_mut(a_chunk)
        .zip(b.chunks_mut(b_chunk))
        .enumerate()
        .for_each(|(i, (x, y))| f(i, x, y));
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct ConvGeom {
    pub n: usize,
    pub c: usize,
    pub h: usize,
    pub w: usize,
    pub o: usize,
    pub kh: usize,
    pub kw: usize,
    pub stride: usize,
    pub ho: usize,
    pub wo: usize,
}

impl ConvGeom {
    pub fn patch(&self) -> usize {
        self.c * self.kh * self.kw
    }

    pub fn out_pixels(&self) -> usize {
        self.ho * self.wo
    }

    pub fn in_sample(&self) -> usize {
        self.c * self.h * self.w
    }

    pub fn out_sample(&self) -> usize {
        self.o * self.out_pixels()
    }
}

fn im2col<T: Scalar>(x: &[T], g: &ConvGeom, cols: &mut [T]) {
    let p = g.out_pixels();
    let mut row = 0;
    for c in 0..g.c {
        let plane = &x[c * g.h * g.w..(c + 1) * g.h * g.w];
        for ky in 0..g.kh {
            for kx in 0..g.kw {
                let dst = &mut cols[row * p..(row + 1) * p];
                for oy in 0..g.ho {
                    let src = &plane[(oy * g.stride + ky) * g.w + kx..];
                    let out = &mut dst[oy * g.wo..(oy + 1) * g.wo];
                    if g.stride == 1 {
                        out.copy_from_slice(&src[..g.wo]);
                    } else {
                        for (ox, o) in out.iter_mut().enumerate() {
                            *o = src[ox * g.stride];
                        }
                    }
                }
                row += 1;
            }
        }
    }
}

fn col2im_add<T: Scalar>(cols: &[T], g: &ConvGeom, dx: &mut [T]) {
    let p = g.out_pixels();
    let mut row = 0;
    for c in 0..g.c {
        let plane = &mut dx[c * g.h * g.w..(c + 1) * g.h * g.w];
        for ky in 0..g.kh {
            for kx in 0..g.kw {
                let src = &cols[row * p..(row + 1) * p];
                for oy in 0..g.ho {
                    let base = (oy * g.stride + ky) * g.w + kx;
                    for ox in 0..g.wo {
                        plane[base + ox * g.stride] += src[oy * g.wo + ox];
                    }
                }
                row += 1;
            }
        }
    }
}

/// Valid convolution. Returns the output and, when `keep_cols`, the im2col
/// buffers for the backward pass.
pub(crate) fn forward<T: Scalar>(
    x: &[T],
    w: &[T],
    b: &[T],
    g: &ConvGeom,
    keep_cols: bool,
) -> (Vec<T>, Vec<T>) {
    let patch = g.patch();
    let pix = g.out_pixels();
    let mut out = vec![T::zero(); g.n * g.out_sample()];
    let mut cols = vec![T::zero(); g.n * patch * pix];
    for_each_pair(&mut out, g.out_sample(), &mut cols, patch * pix, |i, y, col| {
        im2col(&x[i * g.in_sample()..(i + 1) * g.in_sample()], g, col);
        for (o, row) in y.chunks_mut(pix).enumerate() {
            row.fill(b[o]);
        }
        T::gemm(g.o, patch, pix, T::one(), w, false, col, false, T::one(), y);
    });
    if !keep_cols {
        cols = Vec::new();
    }
    (out, cols)
}

pub(crate) struct ConvGrads<T> {
    pub dx: Option<Vec<T>>,
    pub dw: Option<Vec<T>>,
    pub db: Option<Vec<T>>,
}

/// Gradients of a convolution given the upstream gradient `dy` and the
/// im2col buffers saved by [`forward`]. Per-sample weight gradients are
/// reduced in sample order so the result does not depend on scheduling.
pub(crate) fn backward<T: Scalar>(
    dy: &[T],
    cols: &[T],
    w: &[T],
    g: &ConvGeom,
    need: (bool, bool, bool),
) -> ConvGrads<T> {
    let patch = g.patch();
    let pix = g.out_pixels();
    let (need_dx, need_dw, need_db) = need;

    let dx = need_dx.then(|| {
        let mut dx = vec![T::zero(); g.n * g.in_sample()];
        let mut scratch = vec![T::zero(); g.n * patch * pix];
        for_each_pair(&mut dx, g.in_sample(), &mut scratch, patch * pix, |i, dxi, dcol| {
            let dyi = &dy[i * g.out_sample()..(i + 1) * g.out_sample()];
            T::gemm(patch, g.o, pix, T::one(), w, true, dyi, false, T::zero(), dcol);
            col2im_add(dcol, g, dxi);
        });
        dx
    });

    let dw = need_dw.then(|| {
        let wsize = g.o * patch;
        let mut partial = vec![T::zero(); g.n * wsize];
        let mut unused = vec![(); g.n];
        for_each_pair(&mut partial, wsize, &mut unused, 1, |i, dwi, _| {
            let dyi = &dy[i * g.out_sample()..(i + 1) * g.out_sample()];
            let col = &cols[i * patch * pix..(i + 1) * patch * pix];
            T::gemm(g.o, pix, patch, T::one(), dyi, false, col, true, T::zero(), dwi);
        });
        let mut dw = vec![T::zero(); wsize];
        for chunk in partial.chunks(wsize) {
            for (a, &b) in dw.iter_mut().zip(chunk) {
                *a += b;
            }
        }
        dw
    });

    let db = need_db.then(|| {
        let mut db = vec![T::zero(); g.o];
        for sample in dy.chunks(g.out_sample()) {
            for (o, row) in sample.chunks(pix).enumerate() {
                db[o] += row.iter().copied().sum::<T>();
            }
        }
        db
    });

    ConvGrads { dx, dw, db }
}
