//! Dense real symmetric matrices and the structural maps between cones of
//! different dimension: spectral factorization with numerical rank detection,
//! projection onto a leading block, zero-padded embedding, and orthogonal
//! conjugation.
//!
//! [`SymMatrix`] stores the full square matrix row-major and is exactly
//! symmetric by construction: inputs within the admission tolerance are
//! symmetrized as `(a + a^T)/2`, larger asymmetry is an error. All types here
//! are immutable after construction.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Largest relative asymmetry accepted (and silently symmetrized) on input.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Frobenius-norm tolerance on `||U^T U - I||_F` for conjugation inputs.
pub const ORTHOGONALITY_TOL: f64 = 1e-12;

/// Default relative eigenvalue threshold for numerical rank detection.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// Dense symmetric `d x d` matrix, `entries[i*d + j] == entries[j*d + i]`
/// exactly.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct SymMatrix {
    dim: usize,
    entries: Vec<f64>,
}

impl SymMatrix {
    /// Zero matrix of dimension `dim >= 1`.
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be at least 1");
        SymMatrix {
            dim,
            entries: vec![0.0; dim * dim],
        }
    }

    /// Identity matrix of dimension `dim >= 1`.
    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.entries[i * dim + i] = 1.0;
        }
        m
    }

    /// Diagonal matrix from the given entries.
    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &x) in diag.iter().enumerate() {
            m.entries[i * diag.len() + i] = x;
        }
        m
    }

    /// Builds the matrix from `f(i, j)`, evaluated once per unordered pair.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in i..dim {
                let x = f(i, j);
                m.entries[i * dim + j] = x;
                m.entries[j * dim + i] = x;
            }
        }
        m
    }

    /// Validates a row-major square input and symmetrizes it.
    ///
    /// Rejects ragged or empty input, non-finite entries, and relative
    /// asymmetry above [`SYMMETRY_TOL`].
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::InvalidDimension);
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::Dimension(format!(
                    "row {i} has {} entries, expected {dim}",
                    row.len()
                )));
            }
        }
        let mut max_abs: f64 = 0.0;
        let mut asym: f64 = 0.0;
        for i in 0..dim {
            for j in 0..dim {
                let x = rows[i][j];
                if !x.is_finite() {
                    return Err(Error::NonFinite(x));
                }
                max_abs = max_abs.max(x.abs());
                asym = asym.max((x - rows[j][i]).abs());
            }
        }
        let scale = max_abs.max(1.0);
        if asym > SYMMETRY_TOL * scale {
            return Err(Error::NotSymmetric {
                asymmetry: asym / scale,
                tolerance: SYMMETRY_TOL,
            });
        }
        Ok(Self::from_fn(dim, |i, j| 0.5 * (rows[i][j] + rows[j][i])))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim + j]
    }

    /// Row-major copy, one `Vec` per row.
    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim)
            .map(|i| self.entries[i * self.dim..(i + 1) * self.dim].to_vec())
            .collect()
    }

    /// Entries of the upper triangle in row-major order:
    /// `(0,0), (0,1), ..., (0,d-1), (1,1), ...`.
    pub fn upper_triangle(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.dim * (self.dim + 1) / 2);
        for i in 0..self.dim {
            for j in i..self.dim {
                out.push(self.get(i, j));
            }
        }
        out
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// `tr(self * other)`; for symmetric matrices this is the entrywise dot
    /// product.
    pub fn trace_product(&self, other: &SymMatrix) -> f64 {
        debug_assert_eq!(self.dim, other.dim);
        self.entries
            .iter()
            .zip(other.entries.iter())
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn scaled(&self, factor: f64) -> SymMatrix {
        SymMatrix {
            dim: self.dim,
            entries: self.entries.iter().map(|x| x * factor).collect(),
        }
    }

    pub fn add(&self, other: &SymMatrix) -> Result<SymMatrix> {
        if self.dim != other.dim {
            return Err(Error::Dimension(format!(
                "cannot add {}x{0} and {}x{1} matrices",
                self.dim, other.dim
            )));
        }
        Ok(SymMatrix {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(other.entries.iter())
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &SymMatrix) -> Result<SymMatrix> {
        self.add(&other.scaled(-1.0))
    }

    /// Leading principal `r x r` block, `1 <= r <= d`.
    pub fn project(&self, r: usize) -> Result<SymMatrix> {
        if r < 1 || r > self.dim {
            return Err(Error::Dimension(format!(
                "projection target {r} out of range [1, {}]",
                self.dim
            )));
        }
        Ok(SymMatrix::from_fn(r, |i, j| self.get(i, j)))
    }

    /// Zero-padded embedding into dimension `d >= self.dim()`: the matrix in
    /// the leading block, exact zeros elsewhere.
    pub fn embed(&self, d: usize) -> Result<SymMatrix> {
        if d < self.dim {
            return Err(Error::Dimension(format!(
                "embedding target {d} below source dimension {}",
                self.dim
            )));
        }
        let mut m = SymMatrix::zeros(d);
        for i in 0..self.dim {
            for j in 0..self.dim {
                m.entries[i * d + j] = self.get(i, j);
            }
        }
        Ok(m)
    }

    /// Conjugation `U * self * U^T` by an orthogonal matrix, exactly
    /// symmetrized.
    pub fn conjugate(&self, u_orth: &DMatrix<f64>) -> Result<SymMatrix> {
        if u_orth.nrows() != self.dim || u_orth.ncols() != self.dim {
            return Err(Error::Dimension(format!(
                "conjugating matrix is {}x{}, expected {}x{2}",
                u_orth.nrows(),
                u_orth.ncols(),
                self.dim
            )));
        }
        check_orthogonal(u_orth)?;
        let product = u_orth * self.to_dmatrix() * u_orth.transpose();
        Ok(Self::from_dmatrix_symmetrized(&product))
    }

    /// Eigenvalue screening against `min_eig >= -tol * max(1, |lambda|_max)`.
    pub fn psd_check(&self, tolerance: f64) -> PsdCheck {
        let eigs = self.eigenvalues_desc();
        let min_eigenvalue = *eigs.last().expect("dim >= 1");
        let max_mag = eigs.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        PsdCheck {
            matrix: self.clone(),
            min_eigenvalue,
            is_psd: min_eigenvalue >= -tolerance * max_mag.max(1.0),
            tolerance_used: tolerance,
        }
    }

    /// Eigenvalues sorted in descending order.
    pub fn eigenvalues_desc(&self) -> Vec<f64> {
        let eig = self.to_dmatrix().symmetric_eigen();
        let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        vals.sort_by(|a, b| b.partial_cmp(a).expect("finite eigenvalues"));
        vals
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |i, j| self.get(i, j))
    }

    /// Exact symmetrization of a nearly-symmetric product.
    pub(crate) fn from_dmatrix_symmetrized(m: &DMatrix<f64>) -> SymMatrix {
        debug_assert_eq!(m.nrows(), m.ncols());
        SymMatrix::from_fn(m.nrows(), |i, j| 0.5 * (m[(i, j)] + m[(j, i)]))
    }
}

impl TryFrom<Vec<Vec<f64>>> for SymMatrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        SymMatrix::from_rows(&rows)
    }
}

impl From<SymMatrix> for Vec<Vec<f64>> {
    fn from(m: SymMatrix) -> Self {
        m.rows()
    }
}

fn check_orthogonal(u: &DMatrix<f64>) -> Result<()> {
    let gram = u.transpose() * u;
    let dev = (gram - DMatrix::<f64>::identity(u.nrows(), u.ncols())).norm();
    if dev > ORTHOGONALITY_TOL {
        return Err(Error::NotOrthogonal { deviation: dev });
    }
    Ok(())
}

/// Outcome of a positive semi-definiteness screening.
#[derive(Debug, Clone)]
pub struct PsdCheck {
    pub matrix: SymMatrix,
    pub min_eigenvalue: f64,
    pub is_psd: bool,
    /// Relative tolerance the verdict was taken at.
    pub tolerance_used: f64,
}

/// Spectral factorization `U * sigma * U^T = diag(eigs)` of a PSD matrix,
/// with eigenvalues sorted descending and those below
/// `rank_tolerance * eigs[0]` truncated to exact zeros. `rank` counts the
/// survivors.
#[derive(Debug, Clone)]
pub struct ScaleFactorization {
    sigma: SymMatrix,
    u_orth: DMatrix<f64>,
    eigs: Vec<f64>,
    rank: usize,
    rank_tolerance: f64,
}

impl ScaleFactorization {
    /// The (symmetrized) input matrix.
    pub fn sigma(&self) -> &SymMatrix {
        &self.sigma
    }

    /// Orthogonal `U` with `U * sigma * U^T = diag(eigs)`; its rows are the
    /// eigenvectors.
    pub fn u_orth(&self) -> &DMatrix<f64> {
        &self.u_orth
    }

    /// All `d` eigenvalues, descending, truncated.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigs
    }

    /// Numerical rank: number of eigenvalues above the truncation threshold.
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn rank_tolerance(&self) -> f64 {
        self.rank_tolerance
    }

    pub fn dim(&self) -> usize {
        self.sigma.dim()
    }

    /// The positive eigenvalues, i.e. the first `rank` entries.
    pub fn positive_eigenvalues(&self) -> &[f64] {
        &self.eigs[..self.rank]
    }

    /// The full-rank `r x r` diagonal block `D`.
    pub fn diag_block(&self) -> SymMatrix {
        SymMatrix::from_diagonal(self.positive_eigenvalues())
    }

    /// Orthogonal projector onto `range(sigma)`: `U^T diag(1_r, 0) U`.
    pub fn range_projector(&self) -> SymMatrix {
        let d = self.dim();
        let mut sel = DMatrix::<f64>::zeros(d, d);
        for k in 0..self.rank {
            sel[(k, k)] = 1.0;
        }
        let p = self.u_orth.transpose() * sel * &self.u_orth;
        SymMatrix::from_dmatrix_symmetrized(&p)
    }

    /// Symmetric square root `U^T diag(sqrt(eigs)) U`.
    pub fn sqrt_matrix(&self) -> SymMatrix {
        let d = self.dim();
        let mut root = DMatrix::<f64>::zeros(d, d);
        for k in 0..d {
            root[(k, k)] = self.eigs[k].sqrt();
        }
        let s = self.u_orth.transpose() * root * &self.u_orth;
        SymMatrix::from_dmatrix_symmetrized(&s)
    }

    /// `U^T diag(eigs) U`, for reconstruction checks.
    pub fn reconstruct(&self) -> SymMatrix {
        let d = self.dim();
        let mut lam = DMatrix::<f64>::zeros(d, d);
        for k in 0..d {
            lam[(k, k)] = self.eigs[k];
        }
        let m = self.u_orth.transpose() * lam * &self.u_orth;
        SymMatrix::from_dmatrix_symmetrized(&m)
    }
}

/// Eigendecomposition of a PSD matrix with rank detection.
///
/// Eigenvalues below `rank_tolerance * eigs[0]` become exact zeros; a minimum
/// eigenvalue under `-rank_tolerance * eigs[0]` is rejected as [`Error::NotPsd`].
/// The zero matrix factorizes with rank 0.
pub fn spectral_factorize(sigma: &SymMatrix, rank_tolerance: f64) -> Result<ScaleFactorization> {
    if !(rank_tolerance > 0.0 && rank_tolerance < 1.0) {
        return Err(Error::InvalidTolerance(rank_tolerance));
    }
    let d = sigma.dim();
    let eig = sigma.to_dmatrix().symmetric_eigen();

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .expect("finite eigenvalues")
    });

    let mut eigs: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    // Rows of U are the eigenvectors, so U sigma U^T = diag(eigs).
    let u_orth = DMatrix::from_fn(d, d, |i, j| eig.eigenvectors[(j, order[i])]);

    let scale = eigs[0].max(0.0);
    let min_eig = eigs[d - 1];
    if min_eig < -rank_tolerance * scale {
        return Err(Error::NotPsd {
            min_eigenvalue: min_eig,
        });
    }
    let threshold = rank_tolerance * scale;
    let mut rank = 0;
    for e in eigs.iter_mut() {
        if *e > threshold {
            rank += 1;
        } else {
            *e = 0.0;
        }
    }

    Ok(ScaleFactorization {
        sigma: sigma.clone(),
        u_orth,
        eigs,
        rank,
        rank_tolerance,
    })
}
