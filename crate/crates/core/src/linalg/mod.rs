//! Dense real matrix primitives with explicit tolerance control.
//!
//! Matrices are `nalgebra` dynamic matrices. Every rank decision goes
//! through a [`TolerancePolicy`] so that the same cutoff governs rank,
//! pseudoinverse, image bases and the order predicates built on them.

mod io;
mod svd;

pub use io::{
    matrix_from_json, matrix_serde, matrix_to_json, opt_matrix_serde, parse_matrix, read_matrix_file,
    write_matrix_text, MatrixJson,
};

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use serde::{Deserialize, Serialize};
pub(crate) use svd::thin_svd;

use crate::error::{Error, Result};

/// Real `m x n` matrix.
pub type DenseMatrix = DMatrix<f64>;
/// Real column vector.
pub type Vector = DVector<f64>;

const EIG_MAX_ITER: usize = 10_000;
const ORTHONORMAL_TOL: f64 = 1e-10;

/// Tolerances used by every numerical decision in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TolerancePolicy {
    /// Singular values at or below `rank_rel_tol * sigma_max` count as zero.
    pub rank_rel_tol: f64,
    /// Entrywise tolerance for symmetry and equality checks.
    pub sym_abs_tol: f64,
    /// Eigenvalues down to `-psd_eig_tol` are accepted as zero.
    pub psd_eig_tol: f64,
}

impl Default for TolerancePolicy {
    fn default() -> Self {
        Self {
            rank_rel_tol: 1e-10,
            sym_abs_tol: 1e-9,
            psd_eig_tol: 1e-9,
        }
    }
}

impl TolerancePolicy {
    pub fn new(rank_rel_tol: f64, sym_abs_tol: f64, psd_eig_tol: f64) -> Result<Self> {
        let policy = Self {
            rank_rel_tol,
            sym_abs_tol,
            psd_eig_tol,
        };
        policy.validate()?;
        Ok(policy)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("rank_rel_tol", self.rank_rel_tol),
            ("sym_abs_tol", self.sym_abs_tol),
            ("psd_eig_tol", self.psd_eig_tol),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidPolicy(format!("{name} = {v} must lie in (0, 1)")));
            }
        }
        Ok(())
    }
}

/// Counts of positive, negative and zero eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Inertia {
    pub n_plus: usize,
    pub n_minus: usize,
    pub n_zero: usize,
}

impl Inertia {
    pub fn dim(&self) -> usize {
        self.n_plus + self.n_minus + self.n_zero
    }
}

/// Spectral decomposition of a symmetric matrix, eigenvalues descending.
#[derive(Debug, Clone)]
pub struct SymEig {
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns, in the order of `values`.
    pub vectors: DenseMatrix,
}

/// Symmetric positive semidefinite matrix certified under a policy.
///
/// The stored matrix is exactly symmetric. Its spectral form has
/// eigenvalues clamped at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct PsdMatrix {
    mat: DenseMatrix,
    eigenvalues: Vec<f64>,
    eigenvectors: DenseMatrix,
    rank: usize,
}

impl PsdMatrix {
    pub fn new(mat: DenseMatrix, policy: &TolerancePolicy) -> Result<Self> {
        ensure_finite(&mat)?;
        let asym = asymmetry(&mat)?;
        if asym > policy.sym_abs_tol {
            return Err(Error::NotSymmetric { asymmetry: asym });
        }
        let mat = symmetrize(&mat);
        let eig = sym_eig_unchecked(&mat)?;
        let min = eig.values.last().copied().unwrap_or(0.0);
        if min < -policy.psd_eig_tol {
            return Err(Error::NotPositiveSemidefinite { min_eigenvalue: min });
        }
        let rank = rank(&mat, policy);
        let eigenvalues = eig.values.iter().map(|&l| l.max(0.0)).collect();
        Ok(Self {
            mat,
            eigenvalues,
            eigenvectors: eig.vectors,
            rank,
        })
    }

    /// `G G^T`, PSD by construction.
    pub fn from_factor(g: &DenseMatrix, policy: &TolerancePolicy) -> Result<Self> {
        Self::new(g * g.transpose(), policy)
    }

    pub fn identity(n: usize, policy: &TolerancePolicy) -> Self {
        Self::new(DenseMatrix::identity(n, n), policy).expect("identity is PSD")
    }

    pub fn zeros(n: usize, policy: &TolerancePolicy) -> Self {
        Self::new(DenseMatrix::zeros(n, n), policy).expect("zero is PSD")
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> DenseMatrix {
        self.mat
    }

    pub fn n(&self) -> usize {
        self.mat.nrows()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Eigenvalues in descending order, clamped at zero.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DenseMatrix {
        &self.eigenvectors
    }

    pub fn is_zero(&self) -> bool {
        self.rank == 0
    }
}

pub fn ensure_finite(m: &DenseMatrix) -> Result<()> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

pub(crate) fn ensure_square(m: &DenseMatrix) -> Result<usize> {
    if m.nrows() == m.ncols() {
        Ok(m.nrows())
    } else {
        Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        })
    }
}

pub(crate) fn ensure_same_shape(a: &DenseMatrix, b: &DenseMatrix) -> Result<()> {
    if a.shape() == b.shape() {
        Ok(())
    } else {
        Err(Error::ShapeMismatch {
            left: a.shape(),
            right: b.shape(),
        })
    }
}

/// Largest absolute entry.
pub fn max_abs(m: &DenseMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

/// Largest entry of `|M - M^T|`.
pub fn asymmetry(m: &DenseMatrix) -> Result<f64> {
    let n = ensure_square(m)?;
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    Ok(worst)
}

/// `(M + M^T) / 2`.
pub fn symmetrize(m: &DenseMatrix) -> DenseMatrix {
    (m + m.transpose()) * 0.5
}

/// `x x^T`.
pub fn outer(x: &Vector) -> DenseMatrix {
    x * x.transpose()
}

/// Standard basis vector `e_i` (zero based).
pub fn unit_vector(n: usize, i: usize) -> Vector {
    let mut v = Vector::zeros(n);
    v[i] = 1.0;
    v
}

/// Matrix unit `E_ij` (zero based).
pub fn matrix_unit(n: usize, i: usize, j: usize) -> DenseMatrix {
    let mut m = DenseMatrix::zeros(n, n);
    m[(i, j)] = 1.0;
    m
}

/// `E_k = E_11 + ... + E_kk`.
pub fn leading_identity(n: usize, k: usize) -> DenseMatrix {
    DenseMatrix::from_fn(n, n, |i, j| if i == j && i < k { 1.0 } else { 0.0 })
}

/// Singular values in descending order.
pub fn singular_values(m: &DenseMatrix) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    thin_svd(m).s
}

/// Spectral norm.
pub fn spectral_norm(m: &DenseMatrix) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

fn sym_eig_unchecked(m: &DenseMatrix) -> Result<SymEig> {
    let n = m.nrows();
    if n == 0 {
        return Ok(SymEig {
            values: Vec::new(),
            vectors: DenseMatrix::zeros(0, 0),
        });
    }
    let eig = SymmetricEigen::try_new(m.clone(), f64::EPSILON, EIG_MAX_ITER)
        .ok_or(Error::ConvergenceFailure("symmetric eigensolver"))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DenseMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(SymEig { values, vectors })
}

/// Eigendecomposition of a symmetric matrix, eigenvalues descending.
pub fn sym_eig(m: &DenseMatrix, policy: &TolerancePolicy) -> Result<SymEig> {
    ensure_finite(m)?;
    let asym = asymmetry(m)?;
    if asym > policy.sym_abs_tol {
        return Err(Error::NotSymmetric { asymmetry: asym });
    }
    sym_eig_unchecked(&symmetrize(m))
}

/// Cutoff below which singular values count as zero, relative to the
/// larger of the matrix's own top singular value and `reference_scale`.
fn cutoff(sigma_max: f64, reference_scale: f64, policy: &TolerancePolicy) -> f64 {
    policy.rank_rel_tol * sigma_max.max(reference_scale)
}

/// Number of singular values above `rank_rel_tol * sigma_max`.
pub fn rank(m: &DenseMatrix, policy: &TolerancePolicy) -> usize {
    rank_with_reference(m, 0.0, policy)
}

/// Rank of a matrix that was computed from operands of spectral scale
/// `reference_scale` (typically a difference `B - A`). Singular values
/// below `rank_rel_tol * max(sigma_max, reference_scale)` are roundoff.
pub fn rank_with_reference(m: &DenseMatrix, reference_scale: f64, policy: &TolerancePolicy) -> usize {
    let s = singular_values(m);
    let smax = s.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return 0;
    }
    let cut = cutoff(smax, reference_scale, policy);
    s.iter().filter(|&&v| v > cut).count()
}

/// Moore-Penrose inverse via SVD, truncated with the rank cutoff.
pub fn moore_penrose(m: &DenseMatrix, policy: &TolerancePolicy) -> DenseMatrix {
    let (rows, cols) = m.shape();
    if m.is_empty() {
        return DenseMatrix::zeros(cols, rows);
    }
    let svd = thin_svd(m);
    let smax = svd.s.iter().copied().fold(0.0_f64, f64::max);
    let mut out = DenseMatrix::zeros(cols, rows);
    if smax == 0.0 {
        return out;
    }
    let cut = cutoff(smax, 0.0, policy);
    for (k, &sk) in svd.s.iter().enumerate() {
        if sk > cut {
            out += (svd.v.column(k) * svd.u.column(k).transpose()) / sk;
        }
    }
    out
}

/// Largest entries of `AXA - A`, `XAX - X`, `(AX)^T - AX`, `(XA)^T - XA`.
pub fn penrose_residuals(a: &DenseMatrix, x: &DenseMatrix) -> [f64; 4] {
    let ax = a * x;
    let xa = x * a;
    [
        max_abs(&(&ax * a - a)),
        max_abs(&(&xa * x - x)),
        max_abs(&(ax.transpose() - &ax)),
        max_abs(&(xa.transpose() - &xa)),
    ]
}

/// An inner generalized inverse `X` with `M X M = M`; this is `M^+`.
pub fn inner_inverse(m: &DenseMatrix, policy: &TolerancePolicy) -> DenseMatrix {
    moore_penrose(m, policy)
}

pub fn inertia_of(m: &DenseMatrix, policy: &TolerancePolicy) -> Result<Inertia> {
    let eig = sym_eig(m, policy)?;
    let tol = policy.psd_eig_tol;
    let n_plus = eig.values.iter().filter(|&&l| l > tol).count();
    let n_minus = eig.values.iter().filter(|&&l| l < -tol).count();
    Ok(Inertia {
        n_plus,
        n_minus,
        n_zero: eig.values.len() - n_plus - n_minus,
    })
}

/// `S A S^T`, symmetrized.
pub fn congruence(s: &DenseMatrix, a: &DenseMatrix, policy: &TolerancePolicy) -> Result<DenseMatrix> {
    let n = ensure_square(s)?;
    ensure_square(a)?;
    ensure_same_shape(s, a)?;
    let r = rank(s, policy);
    if r < n {
        return Err(Error::SingularTransform { rank: r, n });
    }
    let asym = asymmetry(a)?;
    if asym > policy.sym_abs_tol {
        return Err(Error::NotSymmetric { asymmetry: asym });
    }
    Ok(symmetrize(&(s * a * s.transpose())))
}

/// Positive definite square root.
pub fn sqrt_pd(a: &PsdMatrix, policy: &TolerancePolicy) -> Result<PsdMatrix> {
    let min = a.eigenvalues().last().copied().unwrap_or(0.0);
    if min <= policy.psd_eig_tol {
        return Err(Error::NotPositiveDefinite { min_eigenvalue: min });
    }
    let v = a.eigenvectors();
    let d = DenseMatrix::from_diagonal(&Vector::from_iterator(a.n(), a.eigenvalues().iter().map(|l| l.sqrt())));
    PsdMatrix::new(symmetrize(&(v * d * v.transpose())), policy)
}

/// Inverse of a positive definite matrix through its spectral form.
pub(crate) fn inverse_pd(a: &PsdMatrix, policy: &TolerancePolicy) -> Result<DenseMatrix> {
    let min = a.eigenvalues().last().copied().unwrap_or(0.0);
    if min <= policy.psd_eig_tol {
        return Err(Error::NotPositiveDefinite { min_eigenvalue: min });
    }
    let v = a.eigenvectors();
    let d = DenseMatrix::from_diagonal(&Vector::from_iterator(a.n(), a.eigenvalues().iter().map(|l| 1.0 / l)));
    Ok(symmetrize(&(v * d * v.transpose())))
}

/// Orthonormal basis of the column space, one column per retained
/// singular value.
pub fn image_basis(m: &DenseMatrix, policy: &TolerancePolicy) -> DenseMatrix {
    let rows = m.nrows();
    if m.is_empty() {
        return DenseMatrix::zeros(rows, 0);
    }
    let svd = thin_svd(m);
    let smax = svd.s.iter().copied().fold(0.0_f64, f64::max);
    if smax == 0.0 {
        return DenseMatrix::zeros(rows, 0);
    }
    let cut = cutoff(smax, 0.0, policy);
    let mut keep: Vec<usize> = (0..svd.s.len()).filter(|&k| svd.s[k] > cut).collect();
    keep.sort_by(|&a, &b| svd.s[b].total_cmp(&svd.s[a]));
    DenseMatrix::from_fn(rows, keep.len(), |i, j| svd.u[(i, keep[j])])
}

/// Largest entry of `|V^T V - I|`.
pub fn orthonormality_residual(basis: &DenseMatrix) -> f64 {
    let k = basis.ncols();
    max_abs(&(basis.transpose() * basis - DenseMatrix::identity(k, k)))
}

/// Orthogonal projector `V V^T` onto the span of orthonormal columns.
pub fn projector_onto(basis: &DenseMatrix, policy: &TolerancePolicy) -> Result<PsdMatrix> {
    let residual = orthonormality_residual(basis);
    if residual > ORTHONORMAL_TOL {
        return Err(Error::NotOrthonormal { residual });
    }
    PsdMatrix::new(symmetrize(&(basis * basis.transpose())), policy)
}

/// Whether `Im B = Im A (+) Im C` as a direct sum.
///
/// Ranks of `C` and of the stacked matrices are measured against the
/// common scale of all three operands, since `C` is usually `B - A`.
pub fn image_direct_sum(a: &DenseMatrix, c: &DenseMatrix, b: &DenseMatrix, policy: &TolerancePolicy) -> bool {
    if a.nrows() != b.nrows() || c.nrows() != b.nrows() {
        return false;
    }
    let scale = spectral_norm(a).max(spectral_norm(b)).max(spectral_norm(c));
    let ra = rank(a, policy);
    let rb = rank(b, policy);
    let rc = rank_with_reference(c, scale, policy);
    let ac = hstack(&[a, c]);
    let r_ac = rank_with_reference(&ac, scale, policy);
    let r_bac = rank_with_reference(&hstack(&[b, a, c]), scale, policy);
    ra + rc == r_ac && r_ac == rb && r_bac == rb
}

pub(crate) fn hstack(blocks: &[&DenseMatrix]) -> DenseMatrix {
    let rows = blocks.first().map_or(0, |b| b.nrows());
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = DenseMatrix::zeros(rows, cols);
    let mut offset = 0;
    for b in blocks {
        out.view_mut((0, offset), (rows, b.ncols())).copy_from(*b);
        offset += b.ncols();
    }
    out
}
