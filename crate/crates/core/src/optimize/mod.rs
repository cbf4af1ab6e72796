//! Optimizers over the relative residual energy.

mod gd;
mod history;
mod nft;
mod sinusoid;

pub use gd::{parameter_shift_component, parameter_shift_gradient, run_gd};
pub use history::{OptimizerSpec, OrderingMode, RunHistory, RunMeta};
pub use nft::{
    draw_ordering, ernft_epoch, nft_step, nft_step_in_place, run_ernft, run_ernft_observed, Epoch,
    ErnftConfig, NftConfig,
};
pub use sinusoid::{fit_sinusoid, wrap_angle, SinusoidFit};
