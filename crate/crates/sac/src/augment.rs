use rand::Rng;

/// Shifts a `(c, h, w)` image by `(dx, dy)` pixels with edge replication:
/// output pixel `(y, x)` takes input pixel `(y − dy, x − dx)` clamped into
/// the image. Equivalent to padding every edge by `max(|dx|, |dy|)` with
/// replicated values and cropping the window offset by the shift.
pub fn shift_image(src: &[f32], c: usize, h: usize, w: usize, dx: i64, dy: i64, dst: &mut [f32]) {
    for ch in 0..c {
        let plane = &src[ch * h * w..(ch + 1) * h * w];
        let out = &mut dst[ch * h * w..(ch + 1) * h * w];
        for y in 0..h {
            let sy = (y as i64 - dy).clamp(0, h as i64 - 1) as usize;
            let row = &plane[sy * w..(sy + 1) * w];
            for x in 0..w {
                let sx = (x as i64 - dx).clamp(0, w as i64 - 1) as usize;
                out[y * w + x] = row[sx];
            }
        }
    }
}

/// Random shift of up to `radius` pixels in each direction (uniform crop of
/// the replicate-padded image).
pub fn rad_shift<R: Rng + ?Sized>(
    src: &[f32],
    c: usize,
    h: usize,
    w: usize,
    radius: usize,
    rng: &mut R,
    dst: &mut [f32],
) {
    if radius == 0 {
        dst.copy_from_slice(src);
        return;
    }
    let r = radius as i64;
    let dx = rng.random_range(-r..=r);
    let dy = rng.random_range(-r..=r);
    shift_image(src, c, h, w, dx, dy, dst);
}

/// Applies an independent random shift to every image of a `(n, c, h, w)`
/// batch.
pub fn rad_shift_batch<R: Rng + ?Sized>(
    batch: &[f32],
    shape: (usize, usize, usize),
    radius: usize,
    rng: &mut R,
) -> Vec<f32> {
    let (c, h, w) = shape;
    let size = c * h * w;
    let mut out = vec![0.0; batch.len()];
    for (src, dst) in batch.chunks(size).zip(out.chunks_mut(size)) {
        rad_shift(src, c, h, w, radius, rng, dst);
    }
    out
}
