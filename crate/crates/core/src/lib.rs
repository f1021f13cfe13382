//! Wishart distributions on the cone of positive semi-definite matrices,
//! including singular scale matrices.
//!
//! The distribution with shape `p > 0` and PSD scale matrix `sigma` is
//! defined by its Laplace transform `det(I + sigma v)^{-p}` over PSD probes
//! `v`. It exists exactly when `p` lies in the admissible set for
//! `rank(sigma)`: the half-integers `1/2, 1, ..., (r-2)/2` together with the
//! ray `[(r-1)/2, oo)`. It is infinitely divisible exactly when the rank
//! is 1.
//!
//! The crate provides:
//! - the existence gate ([`WishartSpec`], [`gindikin_contains`]) and the
//!   divisibility test ([`WishartSpec::is_infinitely_divisible`],
//!   [`WishartSpec::divide`]);
//! - exact samplers for every admissible parameter pair ([`sample`] and the
//!   construction-specific entry points), deterministic per `(spec, n, seed)`
//!   regardless of worker count;
//! - closed-form, comparison, and Monte-Carlo transform evaluation
//!   ([`analytic_laplace`], [`riesz_laplace`], [`empirical_laplace`]);
//! - a z-score certification harness ([`certify`]) that checks batches
//!   against the closed form at randomized probes.
//!
//! The `parallel` feature (on by default) runs sampling and batch reduction
//! on a work-stealing thread pool; outputs are byte-identical with the
//! feature disabled.

pub mod certify;
pub mod domain;
pub mod error;
mod exec;
pub mod laplace;
pub mod sampler;
pub mod sym;

pub use certify::{certify, certify_batch, generate_probes, passes, Certification, Z_HARD, Z_SOFT};
pub use domain::{
    gindikin_contains, GindikinBranch, GindikinVerdict, WishartSpec, HALF_INTEGER_TOL,
};
pub use error::{Error, Result};
pub use laplace::{
    analytic_laplace, empirical_laplace, empirical_laplace_sequential, mean_matrix, riesz_laplace,
    LaplaceProbe, ProbeReport,
};
pub use sampler::{
    divisibility_demo, route_for, sample, sample_bartlett, sample_degenerate, sample_gaussian_sum,
    sample_rank1_gamma, sample_sequential, Route, SampleBatch,
};
pub use sym::{
    spectral_factorize, PsdCheck, ScaleFactorization, SymMatrix, DEFAULT_RANK_TOL,
    ORTHOGONALITY_TOL, SYMMETRY_TOL,
};
