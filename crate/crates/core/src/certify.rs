//! Monte-Carlo certification: compare a batch's empirical transform against
//! the closed form at randomized PSD probes and apply a fixed z-score rule.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::laplace::{analytic_laplace, empirical_laplace, z_score, LaplaceProbe, ProbeReport};
use crate::sampler::{sample, SampleBatch};
use crate::sym::SymMatrix;
use crate::domain::WishartSpec;

/// A probe passes individually when `|z| <=` this.
pub const Z_SOFT: f64 = 4.0;

/// No probe may exceed this.
pub const Z_HARD: f64 = 6.0;

/// Fraction of probes (as a ratio) that must clear [`Z_SOFT`]: 19 of 20.
pub const SOFT_QUOTA: (usize, usize) = (19, 20);

/// Random PSD probes `v = W^T W` (standard normal `W`), rescaled so the
/// trace is uniform in `[0.1, 2]`. That range keeps `exp(-tr(v X))` away
/// from both 0 and 1, so the z-test has power.
pub fn generate_probes(dim: usize, n_probes: usize, probe_seed: u64) -> Vec<LaplaceProbe> {
    let mut rng = ChaCha12Rng::seed_from_u64(probe_seed);
    (0..n_probes)
        .map(|_| {
            let w = nalgebra::DMatrix::from_fn(dim, dim, |_, _| {
                rng.sample::<f64, _>(StandardNormal)
            });
            let gram = SymMatrix::from_dmatrix_symmetrized(&(w.transpose() * &w));
            let target: f64 = rng.random_range(0.1..2.0);
            let trace = gram.trace();
            // W^T W has zero trace only on a null set; fall back to the
            // identity rather than divide by zero.
            let v = if trace > 0.0 {
                gram.scaled(target / trace)
            } else {
                SymMatrix::identity(dim).scaled(target / dim as f64)
            };
            LaplaceProbe::new(v).expect("Gram matrices are PSD")
        })
        .collect()
}

/// Outcome of certifying one batch at a set of probes.
#[derive(Debug, Clone)]
pub struct Certification {
    pub reports: Vec<ProbeReport>,
    /// Probes with `|z| <= Z_SOFT`.
    pub n_soft_ok: usize,
    pub worst_abs_z: f64,
    pub pass: bool,
}

/// The acceptance rule: at least 19/20 of probes within [`Z_SOFT`], all
/// within [`Z_HARD`]. Exact integer arithmetic on the quota.
pub fn passes(reports: &[ProbeReport]) -> bool {
    if reports.is_empty() {
        return false;
    }
    let soft = reports
        .iter()
        .filter(|r| r.z_score.abs() <= Z_SOFT)
        .count();
    let hard = reports.iter().all(|r| r.z_score.abs() <= Z_HARD);
    soft * SOFT_QUOTA.1 >= reports.len() * SOFT_QUOTA.0 && hard
}

/// Certifies an existing batch against its own spec's closed form.
///
/// The batch need not have been produced by the dispatcher; the convolution
/// demonstration certifies its summed output against the undivided spec the
/// batch carries.
pub fn certify_batch(batch: &SampleBatch, probes: &[LaplaceProbe]) -> Result<Certification> {
    let mut reports = Vec::with_capacity(probes.len());
    for (index, probe) in probes.iter().enumerate() {
        let analytic = analytic_laplace(batch.spec(), probe)?;
        let (empirical_mean, empirical_stderr) = empirical_laplace(batch.samples(), probe)?;
        let z = z_score(empirical_mean - analytic, empirical_stderr);
        reports.push(ProbeReport {
            probe_index: index,
            probe: probe.clone(),
            analytic,
            empirical_mean,
            empirical_stderr,
            z_score: z,
            n_samples: batch.len(),
        });
    }
    let n_soft_ok = reports
        .iter()
        .filter(|r| r.z_score.abs() <= Z_SOFT)
        .count();
    let worst_abs_z = reports
        .iter()
        .map(|r| r.z_score.abs())
        .fold(0.0, f64::max);
    let pass = passes(&reports);
    Ok(Certification {
        reports,
        n_soft_ok,
        worst_abs_z,
        pass,
    })
}

/// Samples a fresh batch and certifies it at freshly generated probes.
pub fn certify(
    spec: &WishartSpec,
    n_samples: usize,
    seed: u64,
    n_probes: usize,
    probe_seed: u64,
) -> Result<(SampleBatch, Certification)> {
    let batch = sample(spec, n_samples, seed)?;
    let probes = generate_probes(spec.dim(), n_probes, probe_seed);
    let certification = certify_batch(&batch, &probes)?;
    Ok((batch, certification))
}
