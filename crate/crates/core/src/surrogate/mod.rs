//! Gaussian-process surrogate: kernels, exact conditioning, Kriging-believer
//! updates and integrated posterior variance.

mod gp;
mod kernel;
mod pool;

pub use gp::{
    gp_condition_hallucinated, gp_fit, gp_predict, integrated_posterior_variance, GpDataset,
    GpPosterior, PosteriorSummary, VARIANCE_CLAMP,
};
pub use kernel::{kernel_eval, KernelKind, KernelSpec};
pub use pool::PooledPosterior;
pub(crate) use gp::dot;
