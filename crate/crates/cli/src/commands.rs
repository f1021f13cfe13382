//! The four subcommands. Each returns the process exit code on the happy
//! path and a [`Failure`] (message + code) otherwise.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::num::NonZeroU32;
use std::path::Path;
use std::time::Instant;

use wishart_cone::{
    certify_batch, divisibility_demo, generate_probes, gindikin_contains, route_for, sample,
    spectral_factorize, Certification, GindikinBranch, ProbeReport, SampleBatch, WishartSpec,
};

use crate::config::ExperimentConfig;
use crate::failure::{Failure, EXIT_CERT_FAILED, EXIT_NONEXISTENT};
use crate::report::{HashingWriter, RunReport};

/// Degenerate batches must keep their off-range mass under this.
const SUPPORT_LEAK_LIMIT: f64 = 1e-8;

fn branch_label(branch: Option<GindikinBranch>) -> String {
    match branch {
        Some(GindikinBranch::Continuous) => "continuous-ray".to_owned(),
        Some(GindikinBranch::Discrete { numerator }) => {
            format!("discrete-point(numerator={numerator})")
        }
        None => "none".to_owned(),
    }
}

fn write_hashed(
    out: Option<&Path>,
    write_fn: impl FnOnce(&mut dyn Write) -> std::io::Result<()>,
) -> Result<(String, u64), Failure> {
    match out {
        Some(path) => {
            let file = File::create(path)
                .map_err(|e| Failure::io(&format!("cannot create {}", path.display()), e))?;
            let mut writer = HashingWriter::new(BufWriter::new(file));
            write_fn(&mut writer).map_err(|e| Failure::io("write failed", e))?;
            writer.finish().map_err(|e| Failure::io("flush failed", e))
        }
        None => {
            let stdout = std::io::stdout();
            let mut writer = HashingWriter::new(stdout.lock());
            write_fn(&mut writer).map_err(|e| Failure::io("write failed", e))?;
            writer.finish().map_err(|e| Failure::io("flush failed", e))
        }
    }
}

fn certification_csv(
    w: &mut dyn Write,
    command: &str,
    echo: &str,
    reports: &[ProbeReport],
) -> std::io::Result<()> {
    writeln!(w, "# command: {command}")?;
    writeln!(w, "# config: {echo}")?;
    writeln!(w, "{}", ProbeReport::CSV_HEADER)?;
    for r in reports {
        writeln!(w, "{}", r.csv_row())?;
    }
    Ok(())
}

fn push_certification(report: &mut RunReport, cert: &Certification) {
    report.push("n_probes", cert.reports.len());
    report.push("n_soft_ok", cert.n_soft_ok);
    report.push("worst_abs_z", format!("{:.16e}", cert.worst_abs_z));
    report.push("pass", cert.pass);
}

fn build_spec(config: &ExperimentConfig) -> Result<WishartSpec, Failure> {
    config.build_spec().map_err(Failure::from_core)
}

/// Existence and divisibility verdicts; no sampling. Exit 0 iff the
/// distribution exists.
pub fn cmd_check(config_path: &Path, seed_override: Option<u64>) -> Result<u8, Failure> {
    let started = Instant::now();
    let config = ExperimentConfig::load(config_path, seed_override)?;
    if !config.shape.is_finite() || config.shape <= 0.0 {
        return Err(Failure::invalid(format!(
            "shape must be positive and finite, got {}",
            config.shape
        )));
    }
    let factorization = spectral_factorize(&config.scale, config.rank_tolerance())
        .map_err(Failure::from_core)?;
    if factorization.rank() == 0 {
        return Err(Failure::invalid(
            "scale matrix is zero; the distribution degenerates to a point mass".into(),
        ));
    }
    let verdict =
        gindikin_contains(factorization.rank(), config.shape).map_err(Failure::from_core)?;

    let mut report = RunReport::new("check", config.echo());
    report.push("dim", factorization.dim());
    report.push("rank", factorization.rank());
    report.push("ray_start", verdict.ray_start);
    report.push("gindikin_branch", branch_label(verdict.branch));
    report.push("exists", verdict.member);
    report.push(
        "infinitely_divisible",
        verdict.member && factorization.rank() == 1,
    );
    if verdict.member {
        let spec = build_spec(&config)?;
        report.push("route", route_for(&spec).label());
    }
    report.print(started.elapsed());
    Ok(if verdict.member { 0 } else { EXIT_NONEXISTENT })
}

fn push_batch_facts(report: &mut RunReport, batch: &SampleBatch) {
    report.push("route", route_for(batch.spec()).label());
    report.push("n_samples", batch.len());
    report.push("seed", batch.seed());
    report.push("stream_layout", batch.stream_layout());
}

/// Draws a batch and writes it as CSV (to `--out` or stdout). Reports the
/// output hash and the range-support check.
pub fn cmd_sample(
    config_path: &Path,
    out: Option<&Path>,
    seed_override: Option<u64>,
) -> Result<u8, Failure> {
    let started = Instant::now();
    let config = ExperimentConfig::load(config_path, seed_override)?;
    let spec = build_spec(&config)?;
    let batch = sample(&spec, config.n_samples, config.seed).map_err(Failure::from_core)?;

    let echo = config.echo();
    let (hash, bytes) = write_hashed(out, |w| {
        writeln!(w, "# command: sample")?;
        writeln!(w, "# config: {echo}")?;
        batch.write_csv(w)
    })?;

    let leak = batch.max_support_leak();
    let mut report = RunReport::new("sample", echo);
    push_batch_facts(&mut report, &batch);
    report.push("support_leak_max", format!("{leak:.3e}"));
    report.push("support_ok", leak <= SUPPORT_LEAK_LIMIT);
    report.push("output_sha256", hash);
    report.push("output_bytes", bytes);
    report.print(started.elapsed());
    Ok(0)
}

/// Samples, probes, and applies the z-score rule. Exit 0 iff the batch
/// passes.
pub fn cmd_certify(
    config_path: &Path,
    out: Option<&Path>,
    seed_override: Option<u64>,
    min_samples: Option<usize>,
) -> Result<u8, Failure> {
    let started = Instant::now();
    let config = ExperimentConfig::load(config_path, seed_override)?;
    if let Some(min) = min_samples {
        if config.n_samples < min {
            return Err(Failure::invalid(format!(
                "n_samples = {} is below --min-samples = {min}; the z-test would be underpowered",
                config.n_samples
            )));
        }
    }
    let spec = build_spec(&config)?;
    let batch = sample(&spec, config.n_samples, config.seed).map_err(Failure::from_core)?;
    let probes = generate_probes(spec.dim(), config.n_probes, config.probe_seed);
    let cert = certify_batch(&batch, &probes).map_err(Failure::from_core)?;

    let echo = config.echo();
    let (hash, bytes) = write_hashed(out, |w| {
        certification_csv(w, "certify", &echo, &cert.reports)
    })?;

    let mut report = RunReport::new("certify", echo);
    push_batch_facts(&mut report, &batch);
    push_certification(&mut report, &cert);
    report.push("output_sha256", hash);
    report.push("output_bytes", bytes);
    report.print(started.elapsed());
    Ok(if cert.pass { 0 } else { EXIT_CERT_FAILED })
}

/// Rank 1: runs the convolution demonstration and certifies the summed
/// batch against the undivided spec. Rank 2 and above: reports the smallest
/// factor count the parameter gate refuses, as the non-divisibility witness.
pub fn cmd_divide(
    config_path: &Path,
    out: Option<&Path>,
    seed_override: Option<u64>,
) -> Result<u8, Failure> {
    let started = Instant::now();
    let config = ExperimentConfig::load(config_path, seed_override)?;
    let spec = build_spec(&config)?;

    if spec.rank() >= 2 {
        // The gate refuses every shape below 1/2, so a refusal exists by
        // n = ceil(2p) + 1; scan from 1 to find the first.
        let bound = (2.0 * spec.shape()).ceil() as u32 + 2;
        let refusal = (1..=bound)
            .find(|n| spec.divide(NonZeroU32::new(*n).expect("n >= 1")).is_err())
            .expect("rank >= 2 always hits a refusal");
        let mut report = RunReport::new("divide", config.echo());
        report.push("rank", spec.rank());
        report.push("infinitely_divisible", false);
        report.push("first_refusal_n_factors", refusal);
        report.push("refused_shape", spec.shape() / refusal as f64);
        report.print(started.elapsed());
        return Ok(EXIT_NONEXISTENT);
    }

    let n_factors = config.n_factors.ok_or_else(|| {
        Failure::invalid("n_factors is required to run divide on a rank-1 scale matrix".into())
    })?;
    let n_factors = NonZeroU32::new(n_factors).expect("validated at parse");
    let batch = divisibility_demo(&spec, n_factors, config.n_samples, config.seed)
        .map_err(Failure::from_core)?;
    let probes = generate_probes(spec.dim(), config.n_probes, config.probe_seed);
    let cert = certify_batch(&batch, &probes).map_err(Failure::from_core)?;

    let echo = config.echo();
    let mut report = RunReport::new("divide", echo.clone());
    report.push("rank", spec.rank());
    report.push("infinitely_divisible", true);
    report.push("n_factors", n_factors.get());
    report.push("factor_shape", spec.shape() / n_factors.get() as f64);
    push_batch_facts(&mut report, &batch);
    push_certification(&mut report, &cert);
    if out.is_some() {
        let (hash, bytes) = write_hashed(out, |w| {
            certification_csv(w, "divide", &echo, &cert.reports)
        })?;
        report.push("output_sha256", hash);
        report.push("output_bytes", bytes);
    }
    report.print(started.elapsed());
    Ok(if cert.pass { 0 } else { EXIT_CERT_FAILED })
}
