//! Admissible shape parameters for a given rank, and the existence gate that
//! combines a shape with a factorized scale matrix.
//!
//! For rank `r` the admissible set is the union of the half-integer points
//! `1/2, 1, ..., (r-2)/2` and the closed ray `[(r-1)/2, oo)`. A distribution
//! with scale matrix `sigma` exists exactly when the shape lies in the set
//! for `r = rank(sigma)`; membership never depends on anything about `sigma`
//! beyond its rank.

use std::num::NonZeroU32;

use crate::error::{Error, Result};
use crate::sym::{spectral_factorize, ScaleFactorization, SymMatrix, DEFAULT_RANK_TOL};

/// Absolute slack admitted around the discrete points and the ray endpoint.
pub const HALF_INTEGER_TOL: f64 = 1e-9;

/// Which part of the admissible set a member shape belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GindikinBranch {
    /// Isolated point `numerator / 2` with `1 <= numerator <= r - 2`.
    Discrete { numerator: u32 },
    /// The ray `[(r-1)/2, oo)`.
    Continuous,
}

/// Membership verdict for a shape against the admissible set of one rank.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GindikinVerdict {
    pub member: bool,
    /// Present exactly when `member` holds.
    pub branch: Option<GindikinBranch>,
    /// Start of the continuous ray, `(rank - 1) / 2`.
    pub ray_start: f64,
}

/// Tests `shape` against the admissible set for matrices of rank `rank`.
///
/// Shapes at distance up to [`HALF_INTEGER_TOL`] from a discrete point or
/// from the ray endpoint count as members. Non-positive shapes never do.
pub fn gindikin_contains(rank: usize, shape: f64) -> Result<GindikinVerdict> {
    if rank < 1 {
        return Err(Error::InvalidDimension);
    }
    if !shape.is_finite() {
        return Err(Error::NonFinite(shape));
    }
    let ray_start = (rank as f64 - 1.0) / 2.0;
    let mut verdict = GindikinVerdict {
        member: false,
        branch: None,
        ray_start,
    };
    if shape <= 0.0 {
        return Ok(verdict);
    }
    if shape >= ray_start - HALF_INTEGER_TOL {
        verdict.member = true;
        verdict.branch = Some(GindikinBranch::Continuous);
        return Ok(verdict);
    }
    for j in 1..=rank.saturating_sub(2) as u32 {
        if (shape - j as f64 / 2.0).abs() <= HALF_INTEGER_TOL {
            verdict.member = true;
            verdict.branch = Some(GindikinBranch::Discrete { numerator: j });
            return Ok(verdict);
        }
    }
    Ok(verdict)
}

/// A validated distribution: shape in the admissible set of the scale
/// matrix's rank, scale matrix PSD with rank at least 1.
#[derive(Debug, Clone)]
pub struct WishartSpec {
    shape: f64,
    factorization: ScaleFactorization,
    branch: GindikinBranch,
}

impl WishartSpec {
    /// Validates with the default rank tolerance.
    pub fn new(shape: f64, sigma: &SymMatrix) -> Result<Self> {
        Self::with_rank_tolerance(shape, sigma, DEFAULT_RANK_TOL)
    }

    /// Full existence gate: factorizes `sigma`, rejects trivial inputs
    /// (non-positive shape, zero scale matrix), and requires the shape to be
    /// admissible for the detected rank.
    pub fn with_rank_tolerance(shape: f64, sigma: &SymMatrix, rank_tolerance: f64) -> Result<Self> {
        if !shape.is_finite() {
            return Err(Error::NonFinite(shape));
        }
        if shape <= 0.0 {
            return Err(Error::TrivialParameter(format!(
                "shape {shape} is not positive; the distribution degenerates to a point mass"
            )));
        }
        let factorization = spectral_factorize(sigma, rank_tolerance)?;
        if factorization.rank() == 0 {
            return Err(Error::TrivialParameter(
                "scale matrix is zero; the distribution degenerates to a point mass".to_owned(),
            ));
        }
        let verdict = gindikin_contains(factorization.rank(), shape)?;
        match verdict.branch {
            Some(branch) => Ok(WishartSpec {
                shape,
                factorization,
                branch,
            }),
            None => Err(Error::NonExistent {
                shape,
                rank: factorization.rank(),
            }),
        }
    }

    pub fn shape(&self) -> f64 {
        self.shape
    }

    pub fn sigma(&self) -> &SymMatrix {
        self.factorization.sigma()
    }

    pub fn factorization(&self) -> &ScaleFactorization {
        &self.factorization
    }

    pub fn dim(&self) -> usize {
        self.factorization.dim()
    }

    pub fn rank(&self) -> usize {
        self.factorization.rank()
    }

    pub fn branch(&self) -> GindikinBranch {
        self.branch
    }

    /// Whether arbitrary convolution roots exist; holds exactly for rank 1.
    pub fn is_infinitely_divisible(&self) -> bool {
        self.rank() == 1
    }

    /// The `n`-th convolution root: same scale matrix, shape divided by `n`.
    ///
    /// Fails with [`Error::NonExistent`] when the divided shape leaves the
    /// admissible set, which for rank at least 2 happens for all large `n`.
    pub fn divide(&self, n: NonZeroU32) -> Result<WishartSpec> {
        let shape = self.shape / n.get() as f64;
        let verdict = gindikin_contains(self.rank(), shape)?;
        match verdict.branch {
            Some(branch) => Ok(WishartSpec {
                shape,
                factorization: self.factorization.clone(),
                branch,
            }),
            None => Err(Error::NonExistent {
                shape,
                rank: self.rank(),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nz(n: u32) -> NonZeroU32 {
        NonZeroU32::new(n).unwrap()
    }

    #[test]
    fn rank_one_set_is_positive_reals() {
        for p in [1e-12, 0.1, 0.5, 3.0, 1e6] {
            let v = gindikin_contains(1, p).unwrap();
            assert!(v.member, "p = {p}");
            assert_eq!(v.branch, Some(GindikinBranch::Continuous));
        }
        assert!(!gindikin_contains(1, 0.0).unwrap().member);
        assert!(!gindikin_contains(1, -0.5).unwrap().member);
    }

    #[test]
    fn rank_three_set() {
        // {1/2} union [1, oo).
        let v = gindikin_contains(3, 0.5).unwrap();
        assert_eq!(v.branch, Some(GindikinBranch::Discrete { numerator: 1 }));
        assert!(!gindikin_contains(3, 0.75).unwrap().member);
        assert_eq!(
            gindikin_contains(3, 1.0).unwrap().branch,
            Some(GindikinBranch::Continuous)
        );
        assert!(gindikin_contains(3, 42.0).unwrap().member);
        assert_eq!(gindikin_contains(3, 1.0).unwrap().ray_start, 1.0);
    }

    #[test]
    fn rank_five_set() {
        // {1/2, 1, 3/2} union [2, oo).
        for (p, j) in [(0.5, 1), (1.0, 2), (1.5, 3)] {
            let v = gindikin_contains(5, p).unwrap();
            assert_eq!(v.branch, Some(GindikinBranch::Discrete { numerator: j }));
        }
        assert!(!gindikin_contains(5, 0.25).unwrap().member);
        assert!(!gindikin_contains(5, 1.75).unwrap().member);
        assert!(gindikin_contains(5, 2.0).unwrap().member);
    }

    #[test]
    fn membership_tolerance_near_points_and_endpoint() {
        assert!(gindikin_contains(3, 0.5 + 0.5e-9).unwrap().member);
        assert!(gindikin_contains(3, 0.5 - 0.5e-9).unwrap().member);
        assert!(!gindikin_contains(3, 0.5 + 2e-9).unwrap().member);
        assert!(gindikin_contains(3, 1.0 - 0.5e-9).unwrap().member);
        assert!(!gindikin_contains(3, 1.0 - 2e-9).unwrap().member);
    }

    #[test]
    fn gindikin_rejects_bad_inputs() {
        assert!(matches!(
            gindikin_contains(0, 1.0),
            Err(Error::InvalidDimension)
        ));
        assert!(matches!(
            gindikin_contains(2, f64::NAN),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn spec_gate_accepts_and_rejects() {
        let i2 = SymMatrix::identity(2);
        let ok = WishartSpec::new(1.0, &i2).unwrap();
        assert_eq!(ok.rank(), 2);
        assert_eq!(ok.branch(), GindikinBranch::Continuous);
        assert!(!ok.is_infinitely_divisible());

        assert!(matches!(
            WishartSpec::new(0.3, &i2),
            Err(Error::NonExistent { rank: 2, .. })
        ));
        assert!(matches!(
            WishartSpec::new(-1.0, &i2),
            Err(Error::TrivialParameter(_))
        ));
        assert!(matches!(
            WishartSpec::new(1.0, &SymMatrix::zeros(2)),
            Err(Error::TrivialParameter(_))
        ));
    }

    #[test]
    fn rank_one_spec_is_infinitely_divisible() {
        let sigma = SymMatrix::from_diagonal(&[1.0, 0.0]);
        let spec = WishartSpec::new(0.3, &sigma).unwrap();
        assert_eq!(spec.rank(), 1);
        assert!(spec.is_infinitely_divisible());
        for n in [1, 2, 7, 1000] {
            let root = spec.divide(nz(n)).unwrap();
            assert_eq!(root.shape(), 0.3 / n as f64);
            assert_eq!(root.rank(), 1);
        }
    }

    #[test]
    fn divide_full_rank_hits_a_wall() {
        let spec = WishartSpec::new(1.0, &SymMatrix::identity(2)).unwrap();
        assert!(spec.divide(nz(1)).is_ok());
        // 1/2 is exactly the ray endpoint for rank 2.
        assert!(spec.divide(nz(2)).is_ok());
        assert!(matches!(
            spec.divide(nz(3)),
            Err(Error::NonExistent { rank: 2, .. })
        ));
        assert!(spec.divide(nz(100)).is_err());
    }

    #[test]
    fn verdict_rank_dependence_only_through_rank() {
        // Same rank, different sizes and spectra: identical membership.
        let shapes = [0.3, 0.5, 0.9, 1.0, 2.5];
        for p in shapes {
            let a = gindikin_contains(2, p).unwrap().member;
            let sigma_small = SymMatrix::from_diagonal(&[3.0, 0.1]);
            let sigma_big = SymMatrix::from_diagonal(&[1.0, 7.0, 0.0, 0.0]);
            let via_small = WishartSpec::new(p, &sigma_small).map(|_| true).unwrap_or(false);
            let via_big = WishartSpec::new(p, &sigma_big).map(|_| true).unwrap_or(false);
            assert_eq!(a, via_small, "p = {p}");
            assert_eq!(a, via_big, "p = {p}");
        }
    }
}
