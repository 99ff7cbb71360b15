//! Dense matrix primitives and the two loss functions used throughout the crate.
//!
//! The Gram loss `L(X, Y) = d / (n(n+1)) * ||X - Y||_F^2` is normalized so that the
//! trivial estimate `I_n` has unit risk under the Gaussian prior. The Procrustes
//! loss `l(A, B) = (1/n) inf_O ||A - B O||_F^2` is evaluated in closed form through
//! the SVD of `B^T A`.

use std::ops::Deref;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};

/// Relative eigenvalue floor below which a symmetric matrix is rejected as not PSD.
pub const PSD_TOLERANCE: f64 = 1e-10;



const SYMMETRY_TOLERANCE: f64 = 1e-12;

/// An `n x d` matrix whose rows are latent vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentMatrix(DMatrix<f64>);

impl LatentMatrix {
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        if entries.nrows() == 0 || entries.ncols() == 0 {
            return Err(Error::param("latent matrix must have n >= 1 and d >= 1"));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self(entries))
    }

    pub(crate) fn from_trusted(entries: DMatrix<f64>) -> Self {
        Self(entries)
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn d(&self) -> usize {
        self.0.ncols()
    }

    pub fn row_norms(&self) -> Vec<f64> {
        self.0.row_iter().map(|r| r.norm()).collect()
    }

    /// `Z Z^T`.
    pub fn gram(&self) -> GramMatrix {
        GramMatrix::from_latents(self)
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }
}

impl Deref for LatentMatrix {
    type Target = DMatrix<f64>;

    fn deref(&self) -> &DMatrix<f64> {
        &self.0
    }
}

/// A symmetric PSD `n x n` matrix of inner products.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    entries: DMatrix<f64>,
    rank_bound: usize,
}

impl GramMatrix {
    /// Validates symmetry, finiteness and positive semidefiniteness.
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        let n = entries.nrows();
        if n == 0 || entries.ncols() != n {
            return Err(Error::dims((n, n), entries.shape()));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        check_symmetric(&entries)?;
        let eig = entries.clone().symmetric_eigen();
        check_eigenvalues(eig.eigenvalues.as_slice())?;
        Ok(Self {
            entries,
            rank_bound: n,
        })
    }

    pub fn from_latents(z: &LatentMatrix) -> Self {
        let mut entries = &z.0 * z.0.transpose();
        symmetrize(&mut entries);
        Self {
            entries,
            rank_bound: z.n().min(z.d()),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            entries: DMatrix::identity(n, n),
            rank_bound: n,
        }
    }

    pub(crate) fn from_trusted(entries: DMatrix<f64>, rank_bound: usize) -> Self {
        Self {
            entries,
            rank_bound,
        }
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    /// Upper bound on the rank; `min(n, d)` when built from latents.
    pub fn rank_bound(&self) -> usize {
        self.rank_bound
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.entries
    }
}

impl Deref for GramMatrix {
    type Target = DMatrix<f64>;

    fn deref(&self) -> &DMatrix<f64> {
        &self.entries
    }
}

fn check_symmetric(m: &DMatrix<f64>) -> Result<()> {
    let scale = m.amax().max(1.0);
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            if (m[(i, j)] - m[(j, i)]).abs() > SYMMETRY_TOLERANCE * scale {
                return Err(Error::domain(format!(
                    "matrix not symmetric at ({i}, {j})"
                )));
            }
        }
    }
    Ok(())
}

fn check_eigenvalues(eigenvalues: &[f64]) -> Result<()> {
    let scale = eigenvalues.iter().fold(1.0_f64, |acc, v| acc.max(v.abs()));
    let min = eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if min < -PSD_TOLERANCE * scale {
        return Err(Error::NotPsd {
            min_eigenvalue: min,
        });
    }
    Ok(())
}

pub(crate) fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = avg;
            m[(j, i)] = avg;
        }
    }
}

/// `L(X, Y) = d / (n(n+1)) * ||X - Y||_F^2`.
///
/// The normalizer uses the latent dimension `d`, which the matrices do not carry.
pub fn gram_loss(x: &DMatrix<f64>, y: &DMatrix<f64>, d: usize) -> Result<f64> {
    let n = x.nrows();
    if x.ncols() != n {
        return Err(Error::dims((n, n), x.shape()));
    }
    if y.shape() != x.shape() {
        return Err(Error::dims(x.shape(), y.shape()));
    }
    if d == 0 {
        return Err(Error::param("latent dimension d must be positive"));
    }
    let sq: f64 = x.iter().zip(y.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(d as f64 / (n * (n + 1)) as f64 * sq)
}

fn to_faer(m: &DMatrix<f64>) -> faer::Mat<f64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn from_faer(m: faer::MatRef<'_, f64>) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Thin SVD `M = U diag(s) V^T` through faer, whose bidiagonal solver stays accurate on
/// rank-deficient input (nalgebra's does not always).
fn thin_svd(m: &DMatrix<f64>) -> Result<(DMatrix<f64>, Vec<f64>, DMatrix<f64>)> {
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let svd = to_faer(m)
        .thin_svd()
        .map_err(|_| Error::Degenerate("SVD did not converge".into()))?;
    let s = svd.S().column_vector();
    let sv = (0..s.nrows()).map(|i| s[i]).collect();
    Ok((from_faer(svd.U()), sv, from_faer(svd.V())))
}

/// Closed-form solution of the orthogonal Procrustes problem.
#[derive(Debug, Clone)]
pub struct ProcrustesFit {
    /// `(1/n) min_O ||A - B O||_F^2`.
    pub loss: f64,
    /// The minimizing orthogonal `d x d` matrix.
    pub rotation: DMatrix<f64>,
}

/// Procrustes loss `l(A, B)` and the aligning rotation.
///
/// With `B^T A = U S V^T`, the optimum is `O = U V^T` and
/// `n * l = ||A||^2 + ||B||^2 - 2 tr(S)`.
pub fn procrustes_loss(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<ProcrustesFit> {
    if a.shape() != b.shape() {
        return Err(Error::dims(a.shape(), b.shape()));
    }
    let n = a.nrows();
    if n == 0 || a.ncols() == 0 {
        return Err(Error::param("empty matrices"));
    }
    let (u, sv, v) = thin_svd(&(b.transpose() * a))?;
    let trace: f64 = sv.iter().sum();
    let rotation = u * v.transpose();
    let raw = a.norm_squared() + b.norm_squared() - 2.0 * trace;
    Ok(ProcrustesFit {
        loss: raw.max(0.0) / n as f64,
        rotation,
    })
}

/// Symmetric PSD square root through the eigendecomposition.
///
/// Eigenvalues in `[-tol, 0)` are clipped to zero; anything more negative is rejected.
pub fn psd_sqrt(m: &GramMatrix) -> Result<GramMatrix> {
    let eig = m.entries.clone().symmetric_eigen();
    check_eigenvalues(eig.eigenvalues.as_slice())?;
    let roots = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    let v = &eig.eigenvectors;
    let mut s = v * DMatrix::from_diagonal(&roots) * v.transpose();
    symmetrize(&mut s);
    Ok(GramMatrix::from_trusted(s, m.rank_bound))
}

/// Sum of singular values.
pub fn nuclear_norm(m: &DMatrix<f64>) -> Result<f64> {
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    if m.is_empty() {
        return Ok(0.0);
    }
    let sv = to_faer(m)
        .singular_values()
        .map_err(|_| Error::Degenerate("SVD did not converge".into()))?;
    Ok(sv.iter().sum())
}

/// `A = P U` with `P = (A A^T)^{1/2}` and `U` having orthonormal rows (`n <= d`)
/// or orthonormal columns (`n >= d`).
#[derive(Debug, Clone)]
pub struct PolarDecomposition {
    pub psd: DMatrix<f64>,
    pub factor: DMatrix<f64>,
}

pub fn polar_decompose(a: &DMatrix<f64>) -> Result<PolarDecomposition> {
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let (u, sv, v) = thin_svd(a)?;
    let mut psd = &u * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(sv)) * u.transpose();
    symmetrize(&mut psd);
    let factor = u * v.transpose();
    Ok(PolarDecomposition { psd, factor })
}

/// Per-pair breakdown of the chain `l <= (1/n)||sqrt(X) - sqrt(Y)||^2 <= (1/n)||X - Y||_* <= sqrt(2d)/n ||X - Y||_F`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LossChain {
    pub procrustes: f64,
    pub sqrt_difference: f64,
    pub nuclear: f64,
    pub frobenius: f64,
    pub gram_loss: f64,
}

impl LossChain {
    pub fn evaluate(a: &LatentMatrix, b: &LatentMatrix) -> Result<Self> {
        let n = a.n();
        let d = a.d();
        let procrustes = procrustes_loss(a, b)?.loss;
        let x = a.gram();
        let y = b.gram();
        let diff_sqrt = &*psd_sqrt(&x)? - &*psd_sqrt(&y)?;
        let diff = &*x - &*y;
        Ok(Self {
            procrustes,
            sqrt_difference: diff_sqrt.norm_squared() / n as f64,
            nuclear: nuclear_norm(&diff)? / n as f64,
            frobenius: diff.norm(),
            gram_loss: gram_loss(&x, &y, d)?,
        })
    }
}
