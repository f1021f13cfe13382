//! Laplace-transform evaluation on the PSD cone.
//!
//! The distribution with shape `p` and scale `sigma` is pinned down by
//! `E exp(-tr(v X)) = det(I + sigma v)^{-p}` for PSD probes `v` (the
//! transform evaluated on the negative cone, with `-v` as the argument).
//! This module provides the closed form, a related comparison transform, the
//! Monte-Carlo estimator with standard errors, and the first moment.

use crate::domain::WishartSpec;
use crate::error::{Error, Result};
use crate::exec;
use crate::sym::{SymMatrix, DEFAULT_RANK_TOL};

/// A validated PSD probe point.
#[derive(Debug, Clone, PartialEq)]
pub struct LaplaceProbe {
    v: SymMatrix,
}

impl LaplaceProbe {
    /// Admits a PSD matrix; rejects anything with an eigenvalue below
    /// `-1e-10 * max(1, |lambda|_max)`.
    pub fn new(v: SymMatrix) -> Result<Self> {
        let check = v.psd_check(DEFAULT_RANK_TOL);
        if !check.is_psd {
            return Err(Error::NotPsd {
                min_eigenvalue: check.min_eigenvalue,
            });
        }
        Ok(LaplaceProbe { v })
    }

    /// The zero probe, where every transform equals 1.
    pub fn zero(dim: usize) -> Self {
        LaplaceProbe {
            v: SymMatrix::zeros(dim),
        }
    }

    pub fn matrix(&self) -> &SymMatrix {
        &self.v
    }

    pub fn dim(&self) -> usize {
        self.v.dim()
    }

    pub fn trace(&self) -> f64 {
        self.v.trace()
    }
}

/// One probe's certification record.
#[derive(Debug, Clone)]
pub struct ProbeReport {
    pub probe_index: usize,
    pub probe: LaplaceProbe,
    pub analytic: f64,
    pub empirical_mean: f64,
    pub empirical_stderr: f64,
    /// `(empirical_mean - analytic) / empirical_stderr`; 0 when both the
    /// deviation and the standard error vanish, signed infinity when only
    /// the standard error does.
    pub z_score: f64,
    pub n_samples: usize,
}

impl ProbeReport {
    pub const CSV_HEADER: &'static str =
        "probe_index,trace_v,analytic,empirical_mean,empirical_stderr,z_score,n_samples";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{}",
            self.probe_index,
            self.probe.trace(),
            self.analytic,
            self.empirical_mean,
            self.empirical_stderr,
            self.z_score,
            self.n_samples
        )
    }
}

pub(crate) fn z_score(deviation: f64, stderr: f64) -> f64 {
    if stderr > 0.0 {
        deviation / stderr
    } else if deviation == 0.0 {
        0.0
    } else {
        f64::INFINITY.copysign(deviation)
    }
}

/// Closed-form transform `det(I + sigma v)^{-p}`.
///
/// Evaluated as `exp(-p * sum log1p(mu_i))` over the eigenvalues `mu_i >= 0`
/// of the symmetrized product `sigma^{1/2} v sigma^{1/2}`, never through a
/// determinant of the non-symmetric `I + sigma v`. Result lies in `(0, 1]`.
pub fn analytic_laplace(spec: &WishartSpec, probe: &LaplaceProbe) -> Result<f64> {
    if probe.dim() != spec.dim() {
        return Err(Error::Dimension(format!(
            "probe dimension {} does not match scale dimension {}",
            probe.dim(),
            spec.dim()
        )));
    }
    let root = spec.factorization().sqrt_matrix();
    let product = root.to_dmatrix() * probe.matrix().to_dmatrix() * root.to_dmatrix();
    let sym = SymMatrix::from_dmatrix_symmetrized(&product);
    let log_det: f64 = sym
        .eigenvalues_desc()
        .iter()
        .map(|mu| mu.max(0.0).ln_1p())
        .sum();
    Ok((-spec.shape() * log_det).exp())
}

/// Comparison transform `det(project((I + v)^{-1}, r))^p`.
///
/// This is the transform of a different measure than the rank-`r` degenerate
/// one evaluated by [`analytic_laplace`]; the two coincide at some probes and
/// differ at others, which is the point of exposing it.
pub fn riesz_laplace(p: f64, r: usize, probe: &LaplaceProbe) -> Result<f64> {
    let d = probe.dim();
    if r < 1 || r > d {
        return Err(Error::Dimension(format!(
            "projection rank {r} out of range [1, {d}]"
        )));
    }
    if !(p > 0.0) {
        return Err(Error::TrivialParameter(format!(
            "comparison transform requires a positive exponent, got {p}"
        )));
    }
    let shifted = SymMatrix::identity(d).add(probe.matrix())?.to_dmatrix();
    // I + v has eigenvalues >= 1, so the Cholesky factorization exists.
    let inverse = shifted
        .cholesky()
        .expect("I + v is positive definite")
        .inverse();
    let block = inverse.view((0, 0), (r, r)).into_owned();
    let det = block.determinant();
    Ok(det.powf(p))
}

fn check_probe_dim(samples: &[SymMatrix], probe: &LaplaceProbe) -> Result<()> {
    if samples.is_empty() {
        return Err(Error::EmptyBatch);
    }
    if samples[0].dim() != probe.dim() {
        return Err(Error::Dimension(format!(
            "sample dimension {} does not match probe dimension {}",
            samples[0].dim(),
            probe.dim()
        )));
    }
    Ok(())
}

fn reduce_moments(chunk_moments: Vec<(f64, f64)>, n: usize) -> (f64, f64) {
    let (sum, sum_sq) = chunk_moments
        .into_iter()
        .fold((0.0, 0.0), |(s, q), (cs, cq)| (s + cs, q + cq));
    let n_f = n as f64;
    let mean = sum / n_f;
    let stderr = if n > 1 {
        let var = ((sum_sq - n_f * mean * mean) / (n_f - 1.0)).max(0.0);
        (var / n_f).sqrt()
    } else {
        0.0
    };
    (mean, stderr)
}

fn chunk_moments(samples: &[SymMatrix], probe: &LaplaceProbe, chunk: usize) -> (f64, f64) {
    let start = chunk * exec::REDUCE_CHUNK;
    let end = (start + exec::REDUCE_CHUNK).min(samples.len());
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for x in &samples[start..end] {
        let w = (-probe.matrix().trace_product(x)).exp();
        sum += w;
        sum_sq += w * w;
    }
    (sum, sum_sq)
}

/// Monte-Carlo estimate `(mean, stderr)` of the transform at `probe`:
/// `mean = (1/n) sum exp(-tr(v X_i))`, `stderr` the sample standard
/// deviation over `sqrt(n)`.
///
/// Reduction runs over fixed-size chunks whose partial sums are combined in
/// chunk order, so the result is byte-identical for any worker count.
pub fn empirical_laplace(samples: &[SymMatrix], probe: &LaplaceProbe) -> Result<(f64, f64)> {
    check_probe_dim(samples, probe)?;
    let n_chunks = samples.len().div_ceil(exec::REDUCE_CHUNK);
    let partials = exec::map_indexed(n_chunks, |c| chunk_moments(samples, probe, c));
    Ok(reduce_moments(partials, samples.len()))
}

/// Single-threaded twin of [`empirical_laplace`]; same bytes out, used to
/// benchmark the parallel path against a baseline.
pub fn empirical_laplace_sequential(
    samples: &[SymMatrix],
    probe: &LaplaceProbe,
) -> Result<(f64, f64)> {
    check_probe_dim(samples, probe)?;
    let n_chunks = samples.len().div_ceil(exec::REDUCE_CHUNK);
    let partials = exec::map_indexed_seq(n_chunks, |c| chunk_moments(samples, probe, c));
    Ok(reduce_moments(partials, samples.len()))
}

/// First moment `p * sigma`, the gradient of `-log L` at `v = 0`.
pub fn mean_matrix(spec: &WishartSpec) -> SymMatrix {
    spec.sigma().scaled(spec.shape())
}
