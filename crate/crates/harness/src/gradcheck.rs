//! Finite-difference checks of the autodiff ops and the SAC losses, shared
//! by the `gradcheck` subcommand and the acceptance suite.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use polarnav_autodiff::nn::Params;
use polarnav_autodiff::{check_gradients, check_param_gradients, GradcheckReport, Graph, ParamStore, Result, Tensor, Var};
use polarnav_sac::losses::{actor_loss, alpha_loss, critic_loss, squashed_sample};
use polarnav_sac::networks::Networks;
use polarnav_sac::NetworkConfig;

/// Central-difference step.
pub const EPS: f64 = 1e-5;
/// Largest accepted relative error.
pub const TOLERANCE: f64 = 1e-4;

const OBS: (usize, usize, usize) = (2, 8, 8);

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub checked: usize,
    pub max_relative_error: f64,
    pub max_absolute_error: f64,
    pub passed: bool,
}

impl CheckResult {
    fn new(name: &'static str, r: Result<GradcheckReport>) -> Self {
        match r {
            Ok(r) => CheckResult {
                name,
                checked: r.checked,
                max_relative_error: r.max_relative_error,
                max_absolute_error: r.max_absolute_error,
                passed: r.max_relative_error <= TOLERANCE && r.checked > 0,
            },
            Err(_) => CheckResult {
                name,
                checked: 0,
                max_relative_error: f64::INFINITY,
                max_absolute_error: f64::INFINITY,
                passed: false,
            },
        }
    }
}

/// Values with magnitude in [0.1, 1) so relu and clamp kinks stay away.
fn random(shape: &[usize], rng: &mut ChaCha8Rng) -> Tensor<f64> {
    let n = shape.iter().product();
    let data: Vec<f64> = (0..n)
        .map(|_| {
            let m: f64 = rng.random_range(0.1..1.0);
            if rng.random::<bool>() {
                m
            } else {
                -m
            }
        })
        .collect();
    Tensor::new(shape.to_vec(), data)
}

fn uniform(shape: &[usize], lo: f64, hi: f64, rng: &mut ChaCha8Rng) -> Tensor<f64> {
    let n = shape.iter().product();
    Tensor::new(shape.to_vec(), (0..n).map(|_| rng.random_range(lo..hi)).collect())
}

/// Weighted sum so every output element reaches the scalar.
fn project(g: &mut Graph<f64>, y: Var, rng_seed: u64) -> Result<Var> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let w = g.input(random(&g.shape(y).to_vec(), &mut rng));
    let p = g.mul(y, w)?;
    Ok(g.sum(p))
}

fn op(name: &'static str, inputs: &[Tensor<f64>], f: impl Fn(&mut Graph<f64>, &[Var]) -> Result<Var>) -> CheckResult {
    CheckResult::new(
        name,
        check_gradients(inputs, EPS, |g, v| {
            let y = f(g, v)?;
            project(g, y, 17)
        }),
    )
}

fn tiny_networks(seed: u64) -> (Networks, ParamStore<f64>) {
    let net = NetworkConfig {
        conv_filters: vec![4, 4],
        conv_strides: vec![2, 1],
        latent_dim: 8,
        actor_hidden: vec![16, 16],
        critic_hidden: vec![16, 16],
        log_std_min: -10.0,
        log_std_max: 2.0,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut store = ParamStore::new();
    let nets = Networks::new(&mut store, OBS, &net, 0.1, &mut rng);
    // nonzero biases so every parameter path carries gradient
    for id in store.ids().collect::<Vec<_>>() {
        store.get_mut(id).data_mut().iter_mut().for_each(|v| {
            if *v == 0.0 {
                *v = rng.random_range(-0.1..0.1);
            }
        });
    }
    (nets, store)
}

/// Runs every check in a fixed order.
pub fn run_suite(seed: u64) -> Vec<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();

    let a = random(&[3, 4], &mut rng);
    let b = random(&[3, 4], &mut rng);
    let pos = random(&[3, 4], &mut rng).map(|v| v.abs() + 0.2);
    let s1 = random(&[1], &mut rng);
    out.push(op("add", &[a.clone(), b.clone()], |g, v| g.add(v[0], v[1])));
    out.push(op("sub", &[a.clone(), b.clone()], |g, v| g.sub(v[0], v[1])));
    out.push(op("mul", &[a.clone(), b.clone()], |g, v| g.mul(v[0], v[1])));
    out.push(op("min", &[a.clone(), b.clone()], |g, v| g.min(v[0], v[1])));
    out.push(op("neg", &[a.clone()], |g, v| Ok(g.neg(v[0]))));
    out.push(op("scale", &[a.clone()], |g, v| Ok(g.scale(v[0], -1.7))));
    out.push(op("add_const", &[a.clone()], |g, v| Ok(g.add_const(v[0], 0.3))));
    out.push(op("relu", &[a.clone()], |g, v| Ok(g.relu(v[0]))));
    out.push(op("tanh", &[a.clone()], |g, v| Ok(g.tanh(v[0]))));
    out.push(op("exp", &[a.clone()], |g, v| Ok(g.exp(v[0]))));
    out.push(op("log", &[pos], |g, v| Ok(g.log(v[0]))));
    out.push(op("softplus", &[a.clone()], |g, v| Ok(g.softplus(v[0]))));
    out.push(op("clamp", &[a.clone()], |g, v| Ok(g.clamp(v[0], -0.5, 0.55))));
    out.push(op("square", &[a.clone()], |g, v| Ok(g.square(v[0]))));
    out.push(op("mul_scalar_var", &[a.clone(), s1], |g, v| g.mul_scalar_var(v[0], v[1])));
    out.push(op("sum", &[a.clone()], |g, v| Ok(g.sum(v[0]))));
    out.push(op("mean", &[a.clone()], |g, v| Ok(g.mean(v[0]))));
    out.push(op("sum_cols", &[a.clone()], |g, v| g.sum_cols(v[0])));
    let c = random(&[3, 2], &mut rng);
    out.push(op("concat_cols", &[a.clone(), c], |g, v| g.concat_cols(v[0], v[1])));
    out.push(op("slice_cols", &[a.clone()], |g, v| g.slice_cols(v[0], 1, 3)));
    out.push(op("reshape", &[a.clone()], |g, v| g.reshape(v[0], &[2, 6])));
    let img4 = random(&[2, 2, 3, 3], &mut rng);
    out.push(op("flatten", &[img4], |g, v| g.flatten(v[0])));

    let x = random(&[3, 5], &mut rng);
    let w = random(&[5, 4], &mut rng);
    let b = random(&[4], &mut rng);
    out.push(op("linear", &[x, w, b], |g, v| g.linear(v[0], v[1], v[2])));

    let img = random(&[2, 2, 7, 7], &mut rng);
    let k = random(&[3, 2, 3, 3], &mut rng);
    let kb = random(&[3], &mut rng);
    out.push(op("conv2d_stride1", &[img.clone(), k.clone(), kb.clone()], |g, v| {
        g.conv2d(v[0], v[1], v[2], 1)
    }));
    out.push(op("conv2d_stride2", &[img, k, kb], |g, v| g.conv2d(v[0], v[1], v[2], 2)));

    let h = random(&[4, 6], &mut rng);
    let gamma = random(&[6], &mut rng);
    let beta = random(&[6], &mut rng);
    out.push(op("layer_norm", &[h, gamma, beta], |g, v| g.layer_norm(v[0], v[1], v[2])));

    let mu = random(&[4, 2], &mut rng);
    let log_std = random(&[4, 2], &mut rng);
    let noise = random(&[4, 2], &mut rng);
    out.push(op("reparam_gaussian_sample", &[mu, log_std], move |g, v| {
        g.reparam_gaussian_sample(v[0], v[1], noise.clone())
    }));

    let mu = random(&[4, 2], &mut rng);
    let log_std = uniform(&[4, 2], -1.0, 0.5, &mut rng);
    let noise = uniform(&[4, 2], -1.5, 1.5, &mut rng);
    out.push(op("squashed_sample_log_prob", &[mu, log_std], move |g, v| {
        let s = squashed_sample(g, v[0], v[1], noise.clone(), 0.1)?;
        let a = g.sum(s.action);
        let lp = g.sum(s.log_prob);
        g.add(a, lp)
    }));

    let (nets, store) = tiny_networks(seed.wrapping_add(1));
    let obs = uniform(&[3, OBS.0, OBS.1, OBS.2], 0.0, 1.0, &mut rng);
    let actions = uniform(&[3, 2], -0.9, 0.9, &mut rng);
    let y = uniform(&[3, 1], -1.0, 1.0, &mut rng);
    out.push(CheckResult::new(
        "critic_loss",
        check_param_gradients(&store, &nets.critic_ids(), EPS, |g, s| {
            critic_loss(g, &nets, &Params::trainable(s), obs.clone(), actions.clone(), y.clone())
        }),
    ));

    let noise = uniform(&[3, 2], -1.5, 1.5, &mut rng);
    out.push(CheckResult::new(
        "actor_loss",
        check_param_gradients(&store, &nets.actor_ids(), EPS, |g, s| {
            Ok(actor_loss(g, &nets, s, obs.clone(), noise.clone(), 0.2, 0.1)?.loss)
        }),
    ));

    let lp = uniform(&[5, 1], -4.0, 3.0, &mut rng);
    out.push(CheckResult::new(
        "alpha_loss",
        check_param_gradients(&store, &[nets.log_alpha], EPS, |g, s| {
            alpha_loss(g, &nets, &Params::trainable(s), &lp, -2.0)
        }),
    ));
    out
}
