//! Monte-Carlo checks of the samplers against the closed-form transform and
//! the first moment. Every test uses a fixed seed, so outcomes are
//! reproducible; sample sizes are chosen so the z thresholds have wide
//! margins.

use nalgebra::DMatrix;
use wishart_cone::{
    analytic_laplace, certify, certify_batch, divisibility_demo, empirical_laplace,
    generate_probes, passes, sample, sample_bartlett, sample_gaussian_sum, LaplaceProbe,
    ProbeReport, SymMatrix, WishartSpec, Z_SOFT,
};

fn spec(p: f64, sigma: &SymMatrix) -> WishartSpec {
    WishartSpec::new(p, sigma).unwrap()
}

fn z(diff: f64, stderr: f64) -> f64 {
    if stderr > 0.0 {
        diff / stderr
    } else if diff == 0.0 {
        0.0
    } else {
        f64::INFINITY.copysign(diff)
    }
}

/// Certification of a raw sample list against a spec's closed form.
fn certify_samples(
    target: &WishartSpec,
    samples: &[SymMatrix],
    probes: &[LaplaceProbe],
) -> Vec<ProbeReport> {
    probes
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let analytic = analytic_laplace(target, v).unwrap();
            let (mean, stderr) = empirical_laplace(samples, v).unwrap();
            ProbeReport {
                probe_index: i,
                probe: v.clone(),
                analytic,
                empirical_mean: mean,
                empirical_stderr: stderr,
                z_score: z(mean - analytic, stderr),
                n_samples: samples.len(),
            }
        })
        .collect()
}

fn entry_mean_and_stderr(samples: &[SymMatrix], i: usize, j: usize) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean: f64 = samples.iter().map(|x| x.get(i, j)).sum::<f64>() / n;
    let var: f64 = samples
        .iter()
        .map(|x| (x.get(i, j) - mean).powi(2))
        .sum::<f64>()
        / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[test]
fn gaussian_sum_degenerate_scalar_marginal() {
    // p = 0.5, sigma = diag(1,0,0): the top-left entry is gamma(1/2, 1).
    let s = spec(0.5, &SymMatrix::from_diagonal(&[1.0, 0.0, 0.0]));
    let batch = sample_gaussian_sum(&s, 50_000, 2024).unwrap();
    let (mean, stderr) = entry_mean_and_stderr(batch.samples(), 0, 0);
    assert!(
        (mean - 0.5).abs() <= 4.0 * stderr,
        "mean = {mean}, stderr = {stderr}"
    );
}

#[test]
fn bartlett_certifies_on_degenerate_diagonal() {
    let s = spec(0.75, &SymMatrix::from_diagonal(&[4.0, 1.0, 0.0]));
    let batch = sample_bartlett(&s, 30_000, 7).unwrap();
    let probes = generate_probes(3, 10, 8);
    let cert = certify_batch(&batch, &probes).unwrap();
    assert!(cert.pass, "worst |z| = {}", cert.worst_abs_z);
}

#[test]
fn bartlett_mean_matches_first_moment() {
    let s = spec(2.3, &SymMatrix::identity(3));
    let batch = sample_bartlett(&s, 30_000, 31).unwrap();
    for i in 0..3 {
        for j in i..3 {
            let (mean, stderr) = entry_mean_and_stderr(batch.samples(), i, j);
            let expected = if i == j { 2.3 } else { 0.0 };
            assert!(
                (mean - expected).abs() <= 5.0 * stderr,
                "entry ({i},{j}): mean = {mean}, stderr = {stderr}"
            );
        }
    }
}

#[test]
fn path_equivalence_gaussian_vs_triangular() {
    // 2p = 4 is an integer above r - 1 = 2: both constructions are valid and
    // must agree with the closed form (distributional equality).
    let sigma = SymMatrix::from_rows(&[
        vec![2.0, 0.3, 0.0],
        vec![0.3, 1.0, 0.2],
        vec![0.0, 0.2, 0.8],
    ])
    .unwrap();
    let s = spec(2.0, &sigma);
    let probes = generate_probes(3, 10, 99);

    let gauss = sample_gaussian_sum(&s, 30_000, 100).unwrap();
    let bart = sample_bartlett(&s, 30_000, 101).unwrap();
    let cert_g = certify_batch(&gauss, &probes).unwrap();
    let cert_b = certify_batch(&bart, &probes).unwrap();
    assert!(cert_g.pass, "gaussian worst |z| = {}", cert_g.worst_abs_z);
    assert!(cert_b.pass, "triangular worst |z| = {}", cert_b.worst_abs_z);
}

#[test]
fn conjugation_equivariance_of_samplers() {
    // Sampling with a rotated scale matrix and rotating samples afterward
    // target the same distribution.
    let sigma = SymMatrix::from_diagonal(&[2.0, 1.0, 0.0]);
    let p = 1.25;
    let rot = DMatrix::from_row_slice(
        3,
        3,
        &[
            0.36, 0.48, -0.8, //
            -0.8, 0.6, 0.0, //
            0.48, 0.64, 0.6,
        ],
    );
    // Orthogonality sanity for the hand-built frame.
    let dev = (rot.transpose() * &rot - DMatrix::<f64>::identity(3, 3)).norm();
    assert!(dev <= 1e-12, "frame deviation {dev}");

    let rotated_sigma = sigma.conjugate(&rot).unwrap();
    let target = spec(p, &rotated_sigma);
    let probes = generate_probes(3, 10, 55);

    let direct = sample(&target, 30_000, 56).unwrap();
    let reports_direct = certify_samples(&target, direct.samples(), &probes);
    assert!(passes(&reports_direct), "direct sampling failed");

    let base = sample(&spec(p, &sigma), 30_000, 57).unwrap();
    let rotated_samples: Vec<SymMatrix> = base
        .samples()
        .iter()
        .map(|x| x.conjugate(&rot).unwrap())
        .collect();
    let reports_rotated = certify_samples(&target, &rotated_samples, &probes);
    assert!(passes(&reports_rotated), "rotated samples failed");
}

#[test]
fn rank1_with_shape_forbidden_above_rank_one() {
    // p = 0.1 exists only because the rank is 1; the transform collapses to
    // a scalar form in the single positive eigendirection.
    let s = spec(0.1, &SymMatrix::from_diagonal(&[1.0, 0.0, 0.0]));
    let probes = generate_probes(3, 10, 5);
    for v in &probes {
        let expected = (1.0 + v.matrix().get(0, 0)).powf(-0.1);
        let got = analytic_laplace(&s, v).unwrap();
        assert!(
            (got - expected).abs() <= 1e-12 * expected,
            "analytic deviates from the scalar form"
        );
    }
    let (_, cert) = certify(&s, 30_000, 6, 10, 5).unwrap();
    assert!(cert.pass, "worst |z| = {}", cert.worst_abs_z);
}

#[test]
fn divisibility_demo_certifies_against_parent() {
    // sigma = lambda q q^T with a non-axis q; three-fold convolution of the
    // shape-0.3 factors reproduces the shape-0.9 distribution.
    let q = [2.0 / 3.0, 2.0 / 3.0, 1.0 / 3.0];
    let sigma = SymMatrix::from_fn(3, |i, j| 1.5 * q[i] * q[j]);
    let s = spec(0.9, &sigma);
    let m = std::num::NonZeroU32::new(3).unwrap();
    let batch = divisibility_demo(&s, m, 30_000, 77).unwrap();
    let probes = generate_probes(3, 10, 78);
    let cert = certify_batch(&batch, &probes).unwrap();
    assert!(cert.pass, "worst |z| = {}", cert.worst_abs_z);

    // And the convolved mean is the undivided mean.
    for i in 0..3 {
        for j in i..3 {
            let (mean, stderr) = entry_mean_and_stderr(batch.samples(), i, j);
            let expected = 0.9 * sigma.get(i, j);
            assert!(
                (mean - expected).abs() <= 5.0 * stderr.max(1e-12),
                "entry ({i},{j}): mean = {mean}, expected = {expected}"
            );
        }
    }
}

#[test]
fn rank_law_bounds_sample_rank() {
    // 2p = 2 summands, full-rank scale of dimension 4: sample rank <= 2.
    let s = spec(1.0, &SymMatrix::identity(4));
    let batch = sample(&s, 200, 3).unwrap();
    for x in batch.samples() {
        let eigs = x.eigenvalues_desc();
        let significant = eigs
            .iter()
            .filter(|e| **e > 1e-10 * eigs[0].max(1e-300))
            .count();
        assert!(significant <= 2, "eigenvalues {eigs:?}");
    }
}

#[test]
fn sampler_invariants_across_routes() {
    let rot5 = {
        let m = DMatrix::from_fn(5, 5, |i, j| ((i * 5 + j) as f64 * 0.7).sin() + if i == j { 2.0 } else { 0.0 });
        m.qr().q()
    };
    let lam = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![3.0, 1.5, 0.0, 0.0, 0.0]));
    let m5 = rot5.transpose() * &lam * &rot5;
    let sigma5 = SymMatrix::from_fn(5, |i, j| 0.5 * (m5[(i, j)] + m5[(j, i)]));

    let cases = vec![
        spec(1.7, &sigma5),                                        // d=5 rank 2, ray
        spec(0.5, &SymMatrix::identity(4)),                        // discrete point j=1
        spec(1.0, &SymMatrix::identity(4)),                        // discrete point j=2 = r-2
        spec(0.3, &SymMatrix::from_diagonal(&[1.0, 0.0])),         // rank 1
        spec(2.2, &SymMatrix::identity(5)),                        // full-rank ray
        spec(1.25, &SymMatrix::from_diagonal(&[3.0, 1.0, 0.0])),   // degenerate ray
    ];
    for s in &cases {
        let batch = sample(s, 2_000, 11).unwrap();
        assert!(
            batch.all_samples_psd(1e-10),
            "PSD violation for p={}, d={}",
            s.shape(),
            s.dim()
        );
        let leak = batch.max_support_leak();
        assert!(
            leak <= 1e-8,
            "support leak {leak} for p={}, rank={}",
            s.shape(),
            s.rank()
        );
    }
}

#[test]
fn empirical_laplace_validates_against_known_value() {
    // Large batch at a fixed probe: |z| under 4 against 0.25.
    let s = spec(1.0, &SymMatrix::identity(2));
    let batch = sample(&s, 100_000, 12).unwrap();
    let v = LaplaceProbe::new(SymMatrix::identity(2)).unwrap();
    let (mean, stderr) = empirical_laplace(batch.samples(), &v).unwrap();
    let z_val = (mean - 0.25) / stderr;
    assert!(z_val.abs() <= Z_SOFT, "z = {z_val}");
}
