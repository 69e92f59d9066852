//! Measurement model, likelihood, information distances and the truncated prior.

mod dataset;
mod divergence;
mod interp;
mod prior;

pub use dataset::{log_likelihood, sample_dataset, Dataset, Record, SampleOptions, ZMode, MAX_RESAMPLE_FRACTION};
pub use divergence::{hellinger, hellinger_affinity, hellinger_sandwich, kappa, kl_divergence, variance_proxy, Sandwich};
pub use interp::ZInterpolator;
pub use prior::{gaussian_coefficients, sample_prior, Membership, PriorDraw, PriorSpec, TruncationSet};
