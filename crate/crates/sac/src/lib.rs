//! Soft actor-critic over costmap images: clipped double Q, EMA target
//! critics, learned temperature, and random-shift augmentation in RAD
//! (single shift) or DrQ (K-averaged target) form.

pub mod agent;
pub mod augment;
pub mod config;
pub mod losses;
pub mod networks;
pub mod planner;
pub mod replay;
pub mod squash;
pub mod train;

pub use agent::{ActMode, AgentError, SacAgent, UpdateStats};
pub use config::{Augmentation, NetworkConfig, SacConfig};
pub use planner::SacPlanner;
pub use replay::{Batch, ReplayBuffer, Transition};
pub use train::{
    evaluate, read_train_log, rollout, train, EpisodeLog, EvalRates, TrainError, TrainOptions, TrainReport, CHECKPOINT_DIR,
    TRAIN_LOG_FILE,
};
