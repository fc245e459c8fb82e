//! Black-box maps on PSD matrices: bi-monotonicity testing and recovery
//! of the congruence `A -> S A S^T` behind an order automorphism.
//!
//! A map that preserves the minus order in both directions is, for
//! `n >= 3`, a congruence. The pipeline in [`pipeline`] walks through
//! the checks that argument relies on (zero fixed, rank preserved,
//! normalization at `I`, projectors to projectors, lines to lines) and
//! ends by reading `S` off the images of rank-one projectors.

mod monotone;
pub mod pipeline;

pub use monotone::{test_bimonotone, Direction, MonotonicityReport, Violation, STREAM_BIMONOTONE};
pub use pipeline::{
    check_fixes_zero, check_projector_lattice, check_rank_preserving, normalize_at_identity, projector_lattice_report,
    recover_congruence, recover_linear_map_on_lines, rigidity_suite, run_pipeline, LatticeReport, PipelineReport,
    Stage,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{rank, symmetrize, DenseMatrix, TolerancePolicy};

/// A map from `n x n` PSD matrices to `n x n` matrices.
///
/// Implementations are black boxes: nothing checks that outputs are PSD
/// until a pipeline stage needs it. Evaluation must be thread safe because
/// suites run trials in parallel.
pub trait PsdMap: Send + Sync {
    fn dim(&self) -> usize;
    fn apply(&self, a: &DenseMatrix) -> DenseMatrix;
}

impl<M: PsdMap + ?Sized> PsdMap for &M {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn apply(&self, a: &DenseMatrix) -> DenseMatrix {
        (**self).apply(a)
    }
}

impl<M: PsdMap + ?Sized> PsdMap for Box<M> {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn apply(&self, a: &DenseMatrix) -> DenseMatrix {
        (**self).apply(a)
    }
}

/// `A -> S A S^T` for invertible `S`.
#[derive(Debug, Clone, PartialEq)]
pub struct CongruenceMap {
    s: DenseMatrix,
}

impl CongruenceMap {
    pub fn new(s: DenseMatrix, policy: &TolerancePolicy) -> Result<Self> {
        let n = s.nrows();
        if s.ncols() != n {
            return Err(Error::NotSquare {
                rows: n,
                cols: s.ncols(),
            });
        }
        let r = rank(&s, policy);
        if r < n {
            return Err(Error::SingularTransform { rank: r, n });
        }
        Ok(Self { s })
    }

    pub fn s(&self) -> &DenseMatrix {
        &self.s
    }
}

impl PsdMap for CongruenceMap {
    fn dim(&self) -> usize {
        self.s.nrows()
    }

    fn apply(&self, a: &DenseMatrix) -> DenseMatrix {
        symmetrize(&(&self.s * a * self.s.transpose()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IdentityMap {
    pub n: usize,
}

impl PsdMap for IdentityMap {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, a: &DenseMatrix) -> DenseMatrix {
        a.clone()
    }
}

/// A map given by a closure.
pub struct FnMap<F> {
    n: usize,
    f: F,
}

impl<F> FnMap<F>
where
    F: Fn(&DenseMatrix) -> DenseMatrix + Send + Sync,
{
    pub fn new(n: usize, f: F) -> Self {
        Self { n, f }
    }
}

impl<F> PsdMap for FnMap<F>
where
    F: Fn(&DenseMatrix) -> DenseMatrix + Send + Sync,
{
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, a: &DenseMatrix) -> DenseMatrix {
        (self.f)(a)
    }
}

/// `A -> W map(A) W` with `W = map(I)^{-1/2}`, so that `I` is fixed.
pub struct Normalized<M> {
    inner: M,
    w: DenseMatrix,
}

impl<M: PsdMap> Normalized<M> {
    pub(crate) fn new(inner: M, w: DenseMatrix) -> Self {
        Self { inner, w }
    }

    /// The factor `map(I)^{-1/2}`.
    pub fn factor(&self) -> &DenseMatrix {
        &self.w
    }

    pub fn inner(&self) -> &M {
        &self.inner
    }
}

impl<M: PsdMap> PsdMap for Normalized<M> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn apply(&self, a: &DenseMatrix) -> DenseMatrix {
        symmetrize(&(&self.w * self.inner.apply(a) * &self.w))
    }
}

/// `A -> U^T map(V A V^T) U` for orthogonal `U`, `V`.
pub struct Conjugated<M> {
    inner: M,
    u: DenseMatrix,
    v: DenseMatrix,
}

impl<M: PsdMap> Conjugated<M> {
    pub fn new(inner: M, u: DenseMatrix, v: DenseMatrix) -> Self {
        Self { inner, u, v }
    }
}

impl<M: PsdMap> PsdMap for Conjugated<M> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn apply(&self, a: &DenseMatrix) -> DenseMatrix {
        let inside = &self.v * a * self.v.transpose();
        symmetrize(&(self.u.transpose() * self.inner.apply(&inside) * &self.u))
    }
}

/// Ways to break a congruence map, each caught by a different stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Fault {
    /// The image of `E_11` gets `1e-3 I` added, so it is no longer a projector.
    Projector,
    /// Inputs of rank two or more are cut down to their top eigenpair.
    Rank,
    /// Every output is shifted by `E_11`, so zero is not fixed.
    Zero,
}

impl Fault {
    /// Pipeline stage expected to reject a map with this fault.
    pub fn expected_stage(self) -> Stage {
        match self {
            Fault::Projector => Stage::ProjectorLattice,
            Fault::Rank => Stage::RankPreserving,
            Fault::Zero => Stage::FixesZero,
        }
    }
}

/// A congruence map with one injected fault.
#[derive(Debug, Clone)]
pub struct FaultyMap {
    base: CongruenceMap,
    fault: Fault,
    policy: TolerancePolicy,
}

impl FaultyMap {
    pub fn new(base: CongruenceMap, fault: Fault, policy: &TolerancePolicy) -> Self {
        Self {
            base,
            fault,
            policy: *policy,
        }
    }
}

const FAULT_SIZE: f64 = 1e-3;

impl PsdMap for FaultyMap {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn apply(&self, a: &DenseMatrix) -> DenseMatrix {
        let n = self.dim();
        let e11 = crate::linalg::matrix_unit(n, 0, 0);
        match self.fault {
            Fault::Projector => {
                let out = self.base.apply(a);
                if (a - &e11).amax() < self.policy.sym_abs_tol {
                    out + DenseMatrix::identity(n, n) * FAULT_SIZE
                } else {
                    out
                }
            }
            Fault::Rank => {
                let input = match crate::linalg::sym_eig(a, &self.policy) {
                    Ok(eig) if rank(a, &self.policy) >= 2 => {
                        let v = eig.vectors.column(0);
                        v * v.transpose() * eig.values[0]
                    }
                    _ => a.clone(),
                };
                self.base.apply(&input)
            }
            Fault::Zero => self.base.apply(a) + e11,
        }
    }
}
