//! Loss graphs for the critic, actor and temperature, generic over the
//! float type so the same builders run in f32 training and f64 gradchecks.

use std::f64::consts::{LN_2, PI};

use polarnav_autodiff::nn::Params;
use polarnav_autodiff::{Graph, ParamStore, Result, Scalar, Tensor, Var};

use crate::networks::Networks;

/// Reparameterized draw from the squashed Gaussian.
#[derive(Debug, Clone, Copy)]
pub struct SquashedSample {
    /// Normalized action `tanh(u)`, `[n, 2]`.
    pub action: Var,
    /// Log density in environment units, `[n, 1]`.
    pub log_prob: Var,
}

/// `u = μ + σ·noise`, `a = tanh(u)`, and its log density. `log_half_sum` is
/// `Σ log(half-width)` of the action box.
pub fn squashed_sample<T: Scalar>(
    g: &mut Graph<T>,
    mu: Var,
    log_std: Var,
    noise: Tensor<T>,
    log_half_sum: f64,
) -> Result<SquashedSample> {
    let half_log_2pi = 0.5 * (2.0 * PI).ln();
    let gauss_const = noise.map(|e| T::from_f64(-0.5 * e.as_f64() * e.as_f64() - half_log_2pi));
    let u = g.reparam_gaussian_sample(mu, log_std, noise)?;
    let action = g.tanh(u);
    let gc = g.input(gauss_const);
    let base = g.sub(gc, log_std)?;
    // −log(1 − tanh²u) = 2(u + softplus(−2u)) − 2·log 2
    let m2u = g.scale(u, -2.0);
    let sp = g.softplus(m2u);
    let t = g.add(u, sp)?;
    let t = g.scale(t, 2.0);
    let corr = g.add_const(t, -2.0 * LN_2);
    let per_dim = g.add(base, corr)?;
    let lp = g.sum_cols(per_dim)?;
    let log_prob = g.add_const(lp, -log_half_sum);
    Ok(SquashedSample { action, log_prob })
}

/// Per-transition inputs of the soft Bellman target.
#[derive(Debug, Clone, Copy)]
pub struct TargetBatch<'a, T> {
    pub rewards: &'a [T],
    pub dones: &'a [T],
    pub gamma: f64,
    /// Temperature α (not its log).
    pub alpha: f64,
    pub log_half_sum: f64,
}

/// `y = r + γ(1 − d)·(min(Q̄₁, Q̄₂)(s′, a′) − α·log π(a′|s′))` for one view
/// `next_obs` of the next observations, with `a′` drawn using `noise`.
/// The actor and encoder come from `online`; the Q estimate uses the
/// target encoder and target heads.
pub fn augmentation_target<T: Scalar>(
    nets: &Networks,
    online: &ParamStore<T>,
    target: &ParamStore<T>,
    next_obs: Tensor<T>,
    noise: Tensor<T>,
    batch: &TargetBatch<'_, T>,
) -> Result<Vec<T>> {
    let mut g = Graph::new();
    let on = Params::frozen(online);
    let tg = Params::frozen(target);
    let x = g.input(next_obs);
    let z = nets.encoder.forward(&mut g, &on, x)?;
    let (mu, ls) = nets.policy(&mut g, &on, z)?;
    let s = squashed_sample(&mut g, mu, ls, noise, batch.log_half_sum)?;
    let zt = nets.encoder.forward(&mut g, &tg, x)?;
    let (q1, q2) = nets.critics(&mut g, &tg, zt, s.action)?;
    let q = g.min(q1, q2)?;
    let gamma = T::from_f64(batch.gamma);
    let alpha = T::from_f64(batch.alpha);
    let one = T::one();
    let y = g
        .value(q)
        .data()
        .iter()
        .zip(g.value(s.log_prob).data())
        .zip(batch.rewards.iter().zip(batch.dones))
        .map(|((&q, &lp), (&r, &d))| r + gamma * (one - d) * (q - alpha * lp))
        .collect();
    Ok(y)
}

/// Mean of the per-view targets over `next_views` (K views, each with its
/// own noise draw). Terminal transitions get `y = r` exactly.
pub fn critic_targets<T: Scalar>(
    nets: &Networks,
    online: &ParamStore<T>,
    target: &ParamStore<T>,
    next_views: Vec<Tensor<T>>,
    noises: Vec<Tensor<T>>,
    batch: &TargetBatch<'_, T>,
) -> Result<Vec<T>> {
    assert_eq!(next_views.len(), noises.len(), "one noise draw per view");
    assert!(!next_views.is_empty(), "at least one view required");
    let k = T::from_f64(next_views.len() as f64);
    let mut acc: Option<Vec<T>> = None;
    for (view, noise) in next_views.into_iter().zip(noises) {
        let y = augmentation_target(nets, online, target, view, noise, batch)?;
        acc = Some(match acc {
            None => y,
            Some(mut a) => {
                a.iter_mut().zip(&y).for_each(|(a, &b)| *a += b);
                a
            }
        });
    }
    let mut y = acc.expect("non-empty");
    for ((y, &r), &d) in y.iter_mut().zip(batch.rewards).zip(batch.dones) {
        *y = if d == T::one() { r } else { *y / k };
    }
    Ok(y)
}

/// `½·(mean (Q₁ − y)² + mean (Q₂ − y)²)` over the batch. The encoder and
/// Q heads are bound through `p`.
pub fn critic_loss<T: Scalar>(
    g: &mut Graph<T>,
    nets: &Networks,
    p: &Params<'_, T>,
    obs: Tensor<T>,
    actions: Tensor<T>,
    y: Tensor<T>,
) -> Result<Var> {
    let x = g.input(obs);
    let z = nets.encoder.forward(g, p, x)?;
    let a = g.input(actions);
    let (q1, q2) = nets.critics(g, p, z, a)?;
    let y = g.input(y);
    let d1 = g.sub(q1, y)?;
    let d2 = g.sub(q2, y)?;
    let s1 = g.square(d1);
    let s2 = g.square(d2);
    let m1 = g.mean(s1);
    let m2 = g.mean(s2);
    let total = g.add(m1, m2)?;
    Ok(g.scale(total, 0.5))
}

#[derive(Debug, Clone, Copy)]
pub struct ActorLoss {
    pub loss: Var,
    /// Log densities of the reparameterized actions, `[n, 1]`.
    pub log_prob: Var,
}

/// `mean(α·log π(ã|s) − min(Q₁, Q₂)(s, ã))`. Only the actor head is
/// trainable; the encoder output and the critics are constants.
pub fn actor_loss<T: Scalar>(
    g: &mut Graph<T>,
    nets: &Networks,
    store: &ParamStore<T>,
    obs: Tensor<T>,
    noise: Tensor<T>,
    alpha: f64,
    log_half_sum: f64,
) -> Result<ActorLoss> {
    let frozen = Params::frozen(store);
    let train = Params::trainable(store);
    let x = g.input(obs);
    let z = nets.encoder.forward(g, &frozen, x)?;
    let z = g.detach(z);
    let (mu, ls) = nets.policy(g, &train, z)?;
    let s = squashed_sample(g, mu, ls, noise, log_half_sum)?;
    let (q1, q2) = nets.critics(g, &frozen, z, s.action)?;
    let q = g.min(q1, q2)?;
    let ent = g.scale(s.log_prob, alpha);
    let diff = g.sub(ent, q)?;
    Ok(ActorLoss {
        loss: g.mean(diff),
        log_prob: s.log_prob,
    })
}

/// `mean(−α·(log π + H̄))` with `log π` treated as data; the gradient flows
/// to `log α`.
pub fn alpha_loss<T: Scalar>(
    g: &mut Graph<T>,
    nets: &Networks,
    p: &Params<'_, T>,
    log_prob: &Tensor<T>,
    target_entropy: f64,
) -> Result<Var> {
    let la = p.bind(g, nets.log_alpha);
    let alpha = g.exp(la);
    let h = T::from_f64(target_entropy);
    let shifted = g.input(log_prob.map(|lp| lp + h));
    let prod = g.mul_scalar_var(shifted, alpha)?;
    let m = g.mean(prod);
    Ok(g.neg(m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::NetworkConfig;
    use crate::squash;
    use polarnav_core::ActionBounds;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tiny() -> (Networks, ParamStore<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut store = ParamStore::new();
        let net = NetworkConfig {
            conv_filters: vec![2],
            conv_strides: vec![2],
            latent_dim: 4,
            actor_hidden: vec![6],
            critic_hidden: vec![6],
            log_std_min: -10.0,
            log_std_max: 2.0,
        };
        let nets = Networks::new(&mut store, (1, 5, 5), &net, 0.2, &mut rng);
        (nets, store)
    }

    #[test]
    fn graph_log_prob_matches_closed_form() {
        let b = ActionBounds::default();
        let half = squash::half_widths(&b);
        let lhs = half[0].ln() + half[1].ln();
        let mu = [0.3, -1.1];
        let ls = [-0.7, 0.4];
        let eps = [1.3, -0.2];
        let mut g = Graph::<f64>::new();
        let m = g.input(Tensor::from_f64([1, 2], &mu));
        let l = g.input(Tensor::from_f64([1, 2], &ls));
        let s = squashed_sample(&mut g, m, l, Tensor::from_f64([1, 2], &eps), lhs).unwrap();
        let a = g.value(s.action).data().to_vec();
        let env = squash::to_env([a[0], a[1]], &b);
        let want = squash::log_prob(mu, ls, &env, &b);
        assert!((g.value(s.log_prob).data()[0] - want).abs() < 1e-9);
    }

    #[test]
    fn detached_encoder_gets_no_actor_gradient() {
        let (nets, store) = tiny();
        let mut g = Graph::new();
        let obs = Tensor::full([3, 1, 5, 5], 0.4);
        let noise = Tensor::from_f64([3, 2], &[0.1, -0.3, 0.5, 0.2, -1.0, 0.7]);
        let l = actor_loss(&mut g, &nets, &store, obs, noise, 0.2, 0.0).unwrap();
        let grads = g.backward(l.loss).unwrap();
        for id in nets.critic_ids() {
            assert!(grads.param(id).is_none(), "{}", store.name(id));
        }
        assert!(nets.actor_ids().iter().all(|&id| grads.param(id).is_some()));
    }

    #[test]
    fn alpha_gradient_sign() {
        let (nets, store) = tiny();
        let grad = |lp: f64| {
            let mut g = Graph::new();
            let p = Params::trainable(&store);
            let loss = alpha_loss(&mut g, &nets, &p, &Tensor::full([4, 1], lp), -2.0).unwrap();
            g.backward(loss).unwrap().param(nets.log_alpha).unwrap()[0]
        };
        // entropy −log π above the target → positive gradient → α decreases
        assert!(grad(-5.0) > 0.0);
        assert!(grad(5.0) < 0.0);
        assert_eq!(grad(2.0), 0.0);
    }

    #[test]
    fn terminal_and_zero_gamma_targets_equal_reward() {
        let (nets, store) = tiny();
        let rewards = [1.5, -0.25, 3.0];
        let views = || vec![Tensor::full([3, 1, 5, 5], 0.7), Tensor::full([3, 1, 5, 5], 0.2)];
        let noises = || vec![Tensor::full([3, 2], 0.3), Tensor::full([3, 2], -0.6)];
        let batch = TargetBatch {
            rewards: &rewards,
            dones: &[1.0, 1.0, 1.0],
            gamma: 0.99,
            alpha: 0.1,
            log_half_sum: 0.3,
        };
        let y = critic_targets(&nets, &store, &store, views(), noises(), &batch).unwrap();
        assert_eq!(y, rewards);
        let batch = TargetBatch {
            dones: &[0.0, 0.0, 0.0],
            gamma: 0.0,
            ..batch
        };
        let y = critic_targets(&nets, &store, &store, views(), noises(), &batch).unwrap();
        assert_eq!(y, rewards);
    }
}
