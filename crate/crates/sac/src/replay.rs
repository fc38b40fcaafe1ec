use rand::Rng;

use polarnav_core::costmap::ObsImage;

/// One stored transition with a normalized action.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub obs: ObsImage,
    pub action: [f64; 2],
    pub reward: f64,
    pub next_obs: ObsImage,
    /// Goal reached or collision; timeouts are not terminal.
    pub done: bool,
}

/// Minibatch in structure-of-arrays layout.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    pub size: usize,
    pub obs_shape: (usize, usize, usize),
    pub obs: Vec<f32>,
    pub actions: Vec<f32>,
    pub rewards: Vec<f32>,
    pub next_obs: Vec<f32>,
    pub dones: Vec<f32>,
}

/// Observations are stored as bytes at 1/254 resolution, which is exact for
/// costmap channels (integer costs over 254) and the binary marker.
const QUANT: f32 = 254.0;

fn encode(obs: &ObsImage, out: &mut [u8]) {
    for (o, &v) in out.iter_mut().zip(&obs.data) {
        *o = (v.clamp(0.0, 1.0) * QUANT).round() as u8;
    }
}

fn decode(bytes: &[u8], out: &mut [f32]) {
    for (o, &b) in out.iter_mut().zip(bytes) {
        *o = b as f32 / QUANT;
    }
}

/// Fixed-capacity FIFO ring of transitions.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    obs_shape: (usize, usize, usize),
    obs: Vec<u8>,
    next_obs: Vec<u8>,
    actions: Vec<[f64; 2]>,
    rewards: Vec<f64>,
    dones: Vec<bool>,
    len: usize,
    cursor: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize, obs_shape: (usize, usize, usize)) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        ReplayBuffer {
            capacity,
            obs_shape,
            obs: Vec::new(),
            next_obs: Vec::new(),
            actions: Vec::new(),
            rewards: Vec::new(),
            dones: Vec::new(),
            len: 0,
            cursor: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    fn obs_size(&self) -> usize {
        let (c, h, w) = self.obs_shape;
        c * h * w
    }

    /// # Panics
    /// When an observation's shape differs from the buffer's.
    pub fn push(&mut self, t: &Transition) {
        assert_eq!(t.obs.shape(), self.obs_shape, "observation shape mismatch");
        assert_eq!(t.next_obs.shape(), self.obs_shape, "observation shape mismatch");
        let n = self.obs_size();
        if self.len < self.capacity {
            self.obs.resize((self.len + 1) * n, 0);
            self.next_obs.resize((self.len + 1) * n, 0);
            self.actions.push(t.action);
            self.rewards.push(t.reward);
            self.dones.push(t.done);
            self.len += 1;
        } else {
            self.actions[self.cursor] = t.action;
            self.rewards[self.cursor] = t.reward;
            self.dones[self.cursor] = t.done;
        }
        let i = self.cursor;
        encode(&t.obs, &mut self.obs[i * n..(i + 1) * n]);
        encode(&t.next_obs, &mut self.next_obs[i * n..(i + 1) * n]);
        self.cursor = (self.cursor + 1) % self.capacity;
    }

    /// Stored transitions from oldest to newest.
    pub fn iter_oldest_first(&self) -> impl Iterator<Item = Transition> + '_ {
        let start = if self.len < self.capacity { 0 } else { self.cursor };
        (0..self.len).map(move |k| self.get((start + k) % self.capacity))
    }

    pub fn get(&self, i: usize) -> Transition {
        let n = self.obs_size();
        let (c, h, w) = self.obs_shape;
        let mut obs = ObsImage::zeros(c, h, w);
        let mut next_obs = ObsImage::zeros(c, h, w);
        decode(&self.obs[i * n..(i + 1) * n], &mut obs.data);
        decode(&self.next_obs[i * n..(i + 1) * n], &mut next_obs.data);
        Transition {
            obs,
            action: self.actions[i],
            reward: self.rewards[i],
            next_obs,
            done: self.dones[i],
        }
    }

    /// Uniform sample with replacement.
    ///
    /// # Panics
    /// When the buffer is empty.
    pub fn sample<R: Rng + ?Sized>(&self, size: usize, rng: &mut R) -> Batch {
        assert!(self.len > 0, "cannot sample from an empty buffer");
        let idx: Vec<usize> = (0..size).map(|_| rng.random_range(0..self.len)).collect();
        self.gather(&idx)
    }

    pub fn gather(&self, idx: &[usize]) -> Batch {
        let n = self.obs_size();
        let mut b = Batch {
            size: idx.len(),
            obs_shape: self.obs_shape,
            obs: vec![0.0; idx.len() * n],
            actions: Vec::with_capacity(idx.len() * 2),
            rewards: Vec::with_capacity(idx.len()),
            next_obs: vec![0.0; idx.len() * n],
            dones: Vec::with_capacity(idx.len()),
        };
        for (k, &i) in idx.iter().enumerate() {
            decode(&self.obs[i * n..(i + 1) * n], &mut b.obs[k * n..(k + 1) * n]);
            decode(&self.next_obs[i * n..(i + 1) * n], &mut b.next_obs[k * n..(k + 1) * n]);
            b.actions.extend(self.actions[i].iter().map(|&a| a as f32));
            b.rewards.push(self.rewards[i] as f32);
            b.dones.push(if self.dones[i] { 1.0 } else { 0.0 });
        }
        b
    }
}
