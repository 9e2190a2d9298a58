//! Dense networks, Gaussian policies and their optimizer.

pub mod adam;
pub mod checkpoint;
pub mod gaussian;
pub mod init;
pub mod mlp;
pub mod normalizer;
pub mod policy;

pub use adam::{clip_grad_norm, polyak_update, Adam};
pub use checkpoint::Checkpoint;
pub use init::InitScheme;
pub use mlp::{Activation, MlpLayout, MlpTape};
pub use normalizer::ObsNormalizer;
pub use policy::{ActionMode, GaussianPolicy, Mlp, NetConfig, PolicySample, QNet, ValueNet};
