//! The minus partial order.
//!
//! `A <=- B` is decided three independent ways:
//!
//! * rank subtractivity, `rank(B - A) = rank B - rank A`;
//! * the direct-sum condition `Im B = Im A (+) Im(B - A)`;
//! * feasibility of `AXA = A, X(A - B) = 0, (A - B)X = 0`, an affine
//!   system in `X` decided by least squares.
//!
//! Rank-one minorants `xx^T <=- A` are exactly the points of the ellipsoid
//! `E_A = {x in Im A : x^T A^+ x = 1}`, which [`EllipsoidDescriptor`]
//! represents.

pub mod suites;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    ensure_same_shape, ensure_square, image_basis, image_direct_sum, max_abs, moore_penrose, opt_matrix_serde, rank,
    rank_with_reference, spectral_norm, symmetrize, DenseMatrix, PsdMatrix, TolerancePolicy, Vector,
};
use crate::random::{rng_from_seed, unit_vector};

/// Membership tolerance for `x^T A^+ x = 1` and `x in Im A`.
pub const MEMBERSHIP_TOL: f64 = 1e-8;
/// Relative residual below which the inner-inverse system is feasible.
pub const FEASIBILITY_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OrderMethod {
    RankSubtractivity,
    ImageDirectSum,
    InnerInverseFeasibility,
}

/// Outcome of one order predicate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderVerdict {
    pub holds: bool,
    pub method: OrderMethod,
    pub residual: f64,
    /// Feasible inner inverse for [`OrderMethod::InnerInverseFeasibility`].
    #[serde(with = "opt_matrix_serde", default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<DenseMatrix>,
}

fn operand_scale(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
    spectral_norm(a).max(spectral_norm(b))
}

/// `rank(B - A) = rank(B) - rank(A)`.
pub fn minus_leq_rank(a: &DenseMatrix, b: &DenseMatrix, policy: &TolerancePolicy) -> Result<bool> {
    ensure_same_shape(a, b)?;
    let ra = rank(a, policy);
    let rb = rank(b, policy);
    let rd = rank_with_reference(&(b - a), operand_scale(a, b), policy);
    Ok(rb >= ra && rd == rb - ra)
}

/// Verdict form of [`minus_leq_rank`]; the residual is the rank defect
/// `|rank(B - A) - (rank B - rank A)|`.
pub fn minus_leq_rank_verdict(a: &DenseMatrix, b: &DenseMatrix, policy: &TolerancePolicy) -> Result<OrderVerdict> {
    ensure_same_shape(a, b)?;
    let ra = rank(a, policy) as f64;
    let rb = rank(b, policy) as f64;
    let rd = rank_with_reference(&(b - a), operand_scale(a, b), policy) as f64;
    let defect = (rd - (rb - ra)).abs();
    Ok(OrderVerdict {
        holds: defect == 0.0,
        method: OrderMethod::RankSubtractivity,
        residual: defect,
        witness: None,
    })
}

/// `Im B = Im A (+) Im(B - A)`.
pub fn minus_leq_image(a: &DenseMatrix, b: &DenseMatrix, policy: &TolerancePolicy) -> Result<bool> {
    ensure_square(a)?;
    ensure_same_shape(a, b)?;
    Ok(image_direct_sum(a, &(b - a), b, policy))
}

/// Least-squares solution of `M x = rhs`.
///
/// Uses the LAPACK-style cutoff `eps * max(dim) * sigma_max`; the policy
/// cutoff is too coarse because the Kronecker blocks square the
/// conditioning of `A`. For the same reason the SVD solution alone has a
/// residual of order `eps * cond(A)^2`; two steps of iterative refinement
/// bring it back to roundoff.
fn least_squares(m: &DenseMatrix, rhs: &Vector) -> Vector {
    let rcond = f64::EPSILON * m.nrows().max(m.ncols()) as f64;
    let policy = TolerancePolicy {
        rank_rel_tol: rcond,
        ..TolerancePolicy::default()
    };
    let pinv = moore_penrose(m, &policy);
    let mut x = &pinv * rhs;
    for _ in 0..2 {
        let r = rhs - m * &x;
        x += &pinv * r;
    }
    x
}

/// Decides `A <=- B` as feasibility of
/// `AXA = A, X(A - B) = 0, (A - B)X = 0`.
///
/// With column-major `vec`, `vec(PXQ) = (Q^T (x) P) vec X`, so the three
/// constraints stack into one `3n^2 x n^2` system. The relation holds iff
/// the least-squares residual is below `1e-7 (1 + |A| + |B|)`.
pub fn minus_leq_inner(a: &DenseMatrix, b: &DenseMatrix, _policy: &TolerancePolicy) -> Result<OrderVerdict> {
    let n = ensure_square(a)?;
    ensure_same_shape(a, b)?;
    let d = a - b;
    let id = DenseMatrix::identity(n, n);
    let nn = n * n;

    let mut m = DenseMatrix::zeros(3 * nn, nn);
    m.view_mut((0, 0), (nn, nn)).copy_from(&a.transpose().kronecker(a));
    m.view_mut((nn, 0), (nn, nn)).copy_from(&d.transpose().kronecker(&id));
    m.view_mut((2 * nn, 0), (nn, nn)).copy_from(&id.kronecker(&d));
    let mut rhs = Vector::zeros(3 * nn);
    rhs.rows_mut(0, nn).copy_from_slice(a.as_slice());

    let x = least_squares(&m, &rhs);
    let residual = (&m * &x - &rhs).norm();
    let holds = residual < FEASIBILITY_TOL * (1.0 + spectral_norm(a) + spectral_norm(b));
    Ok(OrderVerdict {
        holds,
        method: OrderMethod::InnerInverseFeasibility,
        residual,
        witness: holds.then(|| DenseMatrix::from_column_slice(n, n, x.as_slice())),
    })
}

/// Verdict form of [`minus_leq_image`]; the residual is 0 or 1.
pub fn minus_leq_image_verdict(a: &DenseMatrix, b: &DenseMatrix, policy: &TolerancePolicy) -> Result<OrderVerdict> {
    let holds = minus_leq_image(a, b, policy)?;
    Ok(OrderVerdict {
        holds,
        method: OrderMethod::ImageDirectSum,
        residual: if holds { 0.0 } else { 1.0 },
        witness: None,
    })
}

/// `A <=- B` and `A != B` (entrywise beyond `sym_abs_tol`).
pub fn minus_lt(a: &DenseMatrix, b: &DenseMatrix, policy: &TolerancePolicy) -> Result<bool> {
    Ok(minus_leq_rank(a, b, policy)? && max_abs(&(a - b)) > policy.sym_abs_tol)
}

fn check_rank_one_args(x: &Vector, a: &PsdMatrix) -> Result<()> {
    if x.len() != a.n() {
        return Err(Error::ShapeMismatch {
            left: (x.len(), 1),
            right: (a.n(), a.n()),
        });
    }
    if x.iter().all(|&v| v == 0.0) {
        return Err(Error::ZeroVector);
    }
    if a.is_zero() {
        return Err(Error::ZeroMatrix);
    }
    Ok(())
}

/// `xx^T <=- A`, tested as `x in Im A` and `x^T A^+ x = 1`.
pub fn rank_one_dominated(x: &Vector, a: &PsdMatrix, policy: &TolerancePolicy) -> Result<bool> {
    check_rank_one_args(x, a)?;
    Ok(ellipsoid_of(a, policy)?.contains(x))
}

/// Coordinates `beta` of a dominated `x` in the eigenbasis of `A`
/// restricted to nonzero eigenvalues `alpha`; `sum beta_k^2 / alpha_k = 1`.
pub fn dominated_rank_ones_coords(x: &Vector, a: &PsdMatrix, policy: &TolerancePolicy) -> Result<Vec<f64>> {
    if !rank_one_dominated(x, a, policy)? {
        return Err(Error::NotDominated);
    }
    let v = a.eigenvectors();
    Ok((0..a.rank()).map(|k| v.column(k).dot(x)).collect())
}

/// `E_A = {x in Im A : x^T A^+ x = 1}`.
#[derive(Debug, Clone)]
pub struct EllipsoidDescriptor {
    pub source: PsdMatrix,
    pub pinv: DenseMatrix,
    /// Orthonormal basis of `Im A`.
    pub image: DenseMatrix,
    pub dim: usize,
}

impl EllipsoidDescriptor {
    /// Both tests of [`rank_one_dominated`]. `x` must have length `n`.
    pub fn contains(&self, x: &Vector) -> bool {
        self.image_residual(x) < MEMBERSHIP_TOL * x.norm() && self.level_residual(x) < MEMBERSHIP_TOL
    }

    /// `|P x - x|` with `P` the projector onto `Im A`.
    pub fn image_residual(&self, x: &Vector) -> f64 {
        (&self.image * (self.image.transpose() * x) - x).norm()
    }

    /// `|x^T A^+ x - 1|`.
    pub fn level_residual(&self, x: &Vector) -> f64 {
        (x.dot(&(&self.pinv * x)) - 1.0).abs()
    }
}

pub fn ellipsoid_of(a: &PsdMatrix, policy: &TolerancePolicy) -> Result<EllipsoidDescriptor> {
    if a.is_zero() {
        return Err(Error::ZeroMatrix);
    }
    let image = image_basis(a.matrix(), policy);
    Ok(EllipsoidDescriptor {
        source: a.clone(),
        pinv: symmetrize(&moore_penrose(a.matrix(), policy)),
        dim: image.ncols(),
        image,
    })
}

/// `k` points of `E_A`: uniform directions on the unit sphere of `Im A`,
/// each scaled radially onto the ellipsoid.
pub fn sample_ellipsoid(desc: &EllipsoidDescriptor, k: usize, seed: u64) -> Vec<Vector> {
    let mut rng = rng_from_seed(seed);
    (0..k)
        .map(|_| {
            let x0 = &desc.image * unit_vector(&mut rng, desc.dim);
            let q = x0.dot(&(&desc.pinv * &x0));
            x0 / q.sqrt()
        })
        .collect()
}

/// Result of comparing two PSD matrices through their rank-one minorants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinorantEquality {
    /// Every sampled point of `E_A` lies on `E_B` and vice versa.
    pub sampled: bool,
    /// `|A - B|_max <= sym_abs_tol`.
    pub exact: bool,
}

/// Samples `k` points of each ellipsoid and cross-tests membership.
/// Sampling can only falsify equality; `exact` decides it.
pub fn equal_by_minorants(
    a: &PsdMatrix,
    b: &PsdMatrix,
    k: usize,
    policy: &TolerancePolicy,
    seed: u64,
) -> Result<MinorantEquality> {
    if a.n() != b.n() {
        return Err(Error::ShapeMismatch {
            left: (a.n(), a.n()),
            right: (b.n(), b.n()),
        });
    }
    let ea = ellipsoid_of(a, policy)?;
    let eb = ellipsoid_of(b, policy)?;
    let mut sampled = true;
    for (from, to, s) in [(&ea, &eb, seed), (&eb, &ea, seed.wrapping_add(1))] {
        for x in sample_ellipsoid(from, k, s) {
            if !to.contains(&x) {
                sampled = false;
            }
        }
    }
    Ok(MinorantEquality {
        sampled,
        exact: max_abs(&(a.matrix() - b.matrix())) <= policy.sym_abs_tol,
    })
}

/// `P <=- I`, cross-checked against `P^2 = P`.
pub fn is_idempotent_below_identity(p: &DenseMatrix, policy: &TolerancePolicy) -> Result<bool> {
    let n = ensure_square(p)?;
    let by_order = minus_leq_rank(p, &DenseMatrix::identity(n, n), policy)?;
    let by_square = spectral_norm(&(p * p - p)) < 1e-8 * (1.0 + spectral_norm(p));
    if by_order != by_square {
        return Err(Error::InternalInconsistency(format!(
            "P <=- I is {by_order} but P^2 = P is {by_square}"
        )));
    }
    Ok(by_order)
}

#[cfg(test)]
mod tests;
