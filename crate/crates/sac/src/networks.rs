use rand::Rng;

use polarnav_autodiff::nn::{Conv2d, LayerNorm, Linear, Mlp, Params};
use polarnav_autodiff::{Graph, ParamId, ParamStore, Scalar, Tensor, Var};

use crate::config::NetworkConfig;

pub const ACTION_DIM: usize = 2;

/// Conv stack → flatten → linear → layer norm → tanh.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Encoder {
    pub convs: Vec<Conv2d>,
    pub fc: Linear,
    pub norm: LayerNorm,
}

impl Encoder {
    pub fn new<T: Scalar, R: Rng + ?Sized>(
        store: &mut ParamStore<T>,
        obs_shape: (usize, usize, usize),
        net: &NetworkConfig,
        rng: &mut R,
    ) -> Self {
        let (c, h, w) = obs_shape;
        assert_eq!(h, w, "encoder expects square observations");
        let side = net
            .feature_side(h)
            .expect("observation too small for the conv stack");
        let mut in_ch = c;
        let convs = net
            .conv_filters
            .iter()
            .zip(&net.conv_strides)
            .enumerate()
            .map(|(i, (&f, &s))| {
                let conv = Conv2d::new(store, &format!("encoder.conv{i}"), in_ch, f, 3, s, rng);
                in_ch = f;
                conv
            })
            .collect();
        let flat = in_ch * side * side;
        let fc = Linear::new(store, "encoder.fc", flat, net.latent_dim, rng);
        let norm = LayerNorm::new(store, "encoder.norm", net.latent_dim);
        Encoder { convs, fc, norm }
    }

    /// `x` is `[n, c, h, w]`; returns `[n, latent]`.
    pub fn forward<T: Scalar>(&self, g: &mut Graph<T>, p: &Params<'_, T>, x: Var) -> polarnav_autodiff::Result<Var> {
        let mut h = x;
        for conv in &self.convs {
            h = conv.forward(g, p, h)?;
            h = g.relu(h);
        }
        let h = g.flatten(h)?;
        let h = self.fc.forward(g, p, h)?;
        let h = self.norm.forward(g, p, h)?;
        Ok(g.tanh(h))
    }

    pub fn param_ids(&self) -> Vec<ParamId> {
        let mut ids: Vec<ParamId> = self.convs.iter().flat_map(|c| [c.w, c.b]).collect();
        ids.extend([self.fc.w, self.fc.b, self.norm.gamma, self.norm.beta]);
        ids
    }
}

/// Handles to every learned tensor of the agent, all living in one store.
#[derive(Debug, Clone, PartialEq)]
pub struct Networks {
    pub encoder: Encoder,
    /// Latent → (μ, log σ), 4 outputs.
    pub actor: Mlp,
    /// (latent, normalized action) → Q.
    pub q1: Mlp,
    pub q2: Mlp,
    pub log_alpha: ParamId,
    pub log_std_min: f64,
    pub log_std_max: f64,
}

impl Networks {
    pub fn new<T: Scalar, R: Rng + ?Sized>(
        store: &mut ParamStore<T>,
        obs_shape: (usize, usize, usize),
        net: &NetworkConfig,
        initial_temperature: f64,
        rng: &mut R,
    ) -> Self {
        let encoder = Encoder::new(store, obs_shape, net, rng);
        let l = net.latent_dim;
        let actor = Mlp::new(store, "actor", l, &net.actor_hidden, 2 * ACTION_DIM, rng);
        let q1 = Mlp::new(store, "q1", l + ACTION_DIM, &net.critic_hidden, 1, rng);
        let q2 = Mlp::new(store, "q2", l + ACTION_DIM, &net.critic_hidden, 1, rng);
        let log_alpha = store.add("log_alpha", Tensor::from_f64([1], &[initial_temperature.ln()]));
        Networks {
            encoder,
            actor,
            q1,
            q2,
            log_alpha,
            log_std_min: net.log_std_min,
            log_std_max: net.log_std_max,
        }
    }

    /// Encoder and both Q heads: the parameters the critic loss trains and
    /// the target network tracks.
    pub fn critic_ids(&self) -> Vec<ParamId> {
        let mut ids = self.encoder.param_ids();
        ids.extend(self.q1.param_ids());
        ids.extend(self.q2.param_ids());
        ids
    }

    pub fn actor_ids(&self) -> Vec<ParamId> {
        self.actor.param_ids()
    }

    /// Returns `(μ, log σ)`, each `[n, 2]`, with log σ clamped.
    pub fn policy<T: Scalar>(&self, g: &mut Graph<T>, p: &Params<'_, T>, latent: Var) -> polarnav_autodiff::Result<(Var, Var)> {
        let out = self.actor.forward(g, p, latent)?;
        let mu = g.slice_cols(out, 0, ACTION_DIM)?;
        let log_std = g.slice_cols(out, ACTION_DIM, ACTION_DIM)?;
        let log_std = g.clamp(log_std, self.log_std_min, self.log_std_max);
        Ok((mu, log_std))
    }

    /// Both Q estimates, each `[n, 1]`, for normalized actions `[n, 2]`.
    pub fn critics<T: Scalar>(
        &self,
        g: &mut Graph<T>,
        p: &Params<'_, T>,
        latent: Var,
        action: Var,
    ) -> polarnav_autodiff::Result<(Var, Var)> {
        let x = g.concat_cols(latent, action)?;
        let q1 = self.q1.forward(g, p, x)?;
        let q2 = self.q2.forward(g, p, x)?;
        Ok((q1, q2))
    }
}
