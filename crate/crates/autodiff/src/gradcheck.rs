use crate::graph::{Graph, Var};
use crate::params::{ParamId, ParamStore};
use crate::tensor::Tensor;
use crate::Result;

/// Smallest magnitude used as the denominator of a relative error, so that
/// gradients that are zero up to rounding compare by absolute difference.
pub const RELATIVE_ERROR_FLOOR: f64 = 1e-6;

/// `|a − n| / max(|a|, |n|, RELATIVE_ERROR_FLOOR)`.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    let denom = analytic.abs().max(numeric.abs()).max(RELATIVE_ERROR_FLOOR);
    (analytic - numeric).abs() / denom
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradcheckReport {
    pub max_relative_error: f64,
    pub max_absolute_error: f64,
    pub checked: usize,
    /// `(input, element)` with the largest relative error.
    pub worst: Option<(usize, usize)>,
}

/// Compares reverse-mode gradients of the scalar `f(inputs)` with central
/// differences of step `eps` for every element of every input.
pub fn check_gradients<F>(inputs: &[Tensor<f64>], eps: f64, f: F) -> Result<GradcheckReport>
where
    F: Fn(&mut Graph<f64>, &[Var]) -> Result<Var>,
{
    let eval = |values: &[Tensor<f64>]| -> Result<f64> {
        let mut g = Graph::new();
        let vars: Vec<Var> = values.iter().map(|t| g.input(t.clone())).collect();
        let out = f(&mut g, &vars)?;
        Ok(g.value(out).data()[0])
    };

    let mut g = Graph::new();
    let vars: Vec<Var> = inputs.iter().map(|t| g.input_with_grad(t.clone())).collect();
    let out = f(&mut g, &vars)?;
    let grads = g.backward(out)?;

    let mut report = GradcheckReport {
        max_relative_error: 0.0,
        max_absolute_error: 0.0,
        checked: 0,
        worst: None,
    };
    let mut work = inputs.to_vec();
    for (k, &v) in vars.iter().enumerate() {
        let analytic = grads.wrt(v).map(|s| s.to_vec()).unwrap_or_else(|| vec![0.0; inputs[k].numel()]);
        for i in 0..inputs[k].numel() {
            let x0 = inputs[k].data()[i];
            work[k].data_mut()[i] = x0 + eps;
            let up = eval(&work)?;
            work[k].data_mut()[i] = x0 - eps;
            let down = eval(&work)?;
            work[k].data_mut()[i] = x0;
            let numeric = (up - down) / (2.0 * eps);
            let rel = relative_error(analytic[i], numeric);
            report.max_absolute_error = report.max_absolute_error.max((analytic[i] - numeric).abs());
            if rel > report.max_relative_error || report.worst.is_none() {
                report.max_relative_error = rel.max(report.max_relative_error);
                report.worst = Some((k, i));
            }
            report.checked += 1;
        }
    }
    Ok(report)
}

/// Like [`check_gradients`], but differentiates with respect to the listed
/// parameters of `store`. `f` must bind those parameters as trainable.
pub fn check_param_gradients<F>(
    store: &ParamStore<f64>,
    ids: &[ParamId],
    eps: f64,
    f: F,
) -> Result<GradcheckReport>
where
    F: Fn(&mut Graph<f64>, &ParamStore<f64>) -> Result<Var>,
{
    let eval = |s: &ParamStore<f64>| -> Result<f64> {
        let mut g = Graph::new();
        let out = f(&mut g, s)?;
        Ok(g.value(out).data()[0])
    };
    let mut g = Graph::new();
    let out = f(&mut g, store)?;
    let grads = g.backward(out)?;

    let mut report = GradcheckReport {
        max_relative_error: 0.0,
        max_absolute_error: 0.0,
        checked: 0,
        worst: None,
    };
    let mut work = store.clone();
    for (k, &id) in ids.iter().enumerate() {
        let analytic = grads.param(id).unwrap_or_else(|| vec![0.0; store.get(id).numel()]);
        for i in 0..store.get(id).numel() {
            let x0 = store.get(id).data()[i];
            work.get_mut(id).data_mut()[i] = x0 + eps;
            let up = eval(&work)?;
            work.get_mut(id).data_mut()[i] = x0 - eps;
            let down = eval(&work)?;
            work.get_mut(id).data_mut()[i] = x0;
            let numeric = (up - down) / (2.0 * eps);
            let rel = relative_error(analytic[i], numeric);
            report.max_absolute_error = report.max_absolute_error.max((analytic[i] - numeric).abs());
            if rel > report.max_relative_error || report.worst.is_none() {
                report.max_relative_error = rel.max(report.max_relative_error);
                report.worst = Some((k, i));
            }
            report.checked += 1;
        }
    }
    Ok(report)
}
