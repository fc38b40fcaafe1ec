//! The tanh-squashed diagonal Gaussian policy distribution.
//!
//! Pre-squash samples `u ~ N(μ, σ²)` map to normalized actions
//! `a = tanh(u) ∈ (-1, 1)`, which are rescaled affinely onto the action
//! bounds. Densities are reported in environment units.

use std::f64::consts::{LN_2, PI};

use polarnav_core::{Action, ActionBounds};

/// Normalized actions are clamped this far inside ±1 before inversion.
pub const ATANH_CLAMP_EPS: f64 = 1e-6;

/// `log(1 − tanh²(u))`, stable for large |u|.
pub fn log_one_minus_tanh_sq(u: f64) -> f64 {
    2.0 * (LN_2 - u - softplus(-2.0 * u))
}

pub fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// Half-widths of the action box, per dimension.
pub fn half_widths(bounds: &ActionBounds) -> [f64; 2] {
    let (lo, hi) = (bounds.low(), bounds.high());
    [(hi[0] - lo[0]) / 2.0, (hi[1] - lo[1]) / 2.0]
}

/// Normalized action in `[-1, 1]²` to environment units.
pub fn to_env(a: [f64; 2], bounds: &ActionBounds) -> Action {
    let (lo, hi) = (bounds.low(), bounds.high());
    let f = |i: usize| lo[i] + (a[i] + 1.0) * 0.5 * (hi[i] - lo[i]);
    Action::new(f(0), f(1))
}

/// Environment action to normalized `[-1, 1]²`.
pub fn to_normalized(action: &Action, bounds: &ActionBounds) -> [f64; 2] {
    let (lo, hi) = (bounds.low(), bounds.high());
    let f = |x: f64, i: usize| 2.0 * (x - lo[i]) / (hi[i] - lo[i]) - 1.0;
    [f(action.v, 0), f(action.omega, 1)]
}

/// Log density of environment action `action` under the squashed Gaussian
/// with pre-squash mean `mu` and log standard deviation `log_std`.
///
/// Normalized coordinates at (or beyond) ±1 are clamped to
/// `±(1 − ATANH_CLAMP_EPS)` before inverting the tanh.
pub fn log_prob(mu: [f64; 2], log_std: [f64; 2], action: &Action, bounds: &ActionBounds) -> f64 {
    let a = to_normalized(action, bounds);
    let half = half_widths(bounds);
    let limit = 1.0 - ATANH_CLAMP_EPS;
    let mut lp = 0.0;
    for i in 0..2 {
        let ai = a[i].clamp(-limit, limit);
        let u = ai.atanh();
        let z = (u - mu[i]) / log_std[i].exp();
        lp += -0.5 * z * z - log_std[i] - 0.5 * (2.0 * PI).ln();
        lp -= log_one_minus_tanh_sq(u);
        lp -= half[i].ln();
    }
    lp
}

/// Log density from the pre-squash noise directly, as used when sampling:
/// `u = μ + σ·ε`.
pub fn log_prob_from_noise(log_std: [f64; 2], noise: [f64; 2], u: [f64; 2], bounds: &ActionBounds) -> f64 {
    let half = half_widths(bounds);
    (0..2)
        .map(|i| {
            -0.5 * noise[i] * noise[i] - log_std[i] - 0.5 * (2.0 * PI).ln()
                - log_one_minus_tanh_sq(u[i])
                - half[i].ln()
        })
        .sum()
}
