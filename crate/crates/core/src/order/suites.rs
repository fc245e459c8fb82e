//! Randomized property suites for the minus order.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{
    ellipsoid_of, minus_leq_image, minus_leq_inner, minus_leq_rank, minus_lt, rank_one_dominated, sample_ellipsoid,
};
use crate::linalg::{
    congruence, leading_identity, max_abs, outer, rank, rank_with_reference, spectral_norm, DenseMatrix,
    TolerancePolicy,
};
use crate::random::{random_invertible, random_psd, unit_vector, SeedStream, SuiteRng};
use crate::report::{run_trials, PropertyReport, Trial};

pub const STREAM_AGREEMENT: u64 = 1;
pub const STREAM_AXIOMS: u64 = 2;
pub const STREAM_CONGRUENCE: u64 = 3;
pub const STREAM_RANK_ONE: u64 = 4;

/// How a random pair was constructed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PairKind {
    /// `S E_i S^T, S E_j S^T` with `i <= j`.
    Chain,
    /// `S D_i S^T, S D_j S^T` with `D` a positive diagonal, `D_i` its
    /// leading `i x i` block.
    WeightedChain,
    /// A chain pair in the wrong order.
    ReversedChain,
    /// Two independent random PSD matrices of random rank.
    Independent,
    /// `(0, B)`.
    ZeroBelow,
    /// `(A, A)`.
    Equal,
    /// `(xx^T, B)` with `x` on `E_B`.
    RankOneOn,
    /// `(xx^T, B)` with `x` scaled off `E_B` by 1.1.
    RankOneOff,
}

/// Sample from a mix of comparable and incomparable pairs.
pub fn random_pair(rng: &mut SuiteRng, n: usize, policy: &TolerancePolicy) -> (DenseMatrix, DenseMatrix, PairKind) {
    let kind = match rng.random_range(0..8) {
        0 => PairKind::Chain,
        1 => PairKind::WeightedChain,
        2 => PairKind::ReversedChain,
        3 => PairKind::Independent,
        4 => PairKind::ZeroBelow,
        5 => PairKind::Equal,
        6 => PairKind::RankOneOn,
        _ => PairKind::RankOneOff,
    };
    let (a, b) = match kind {
        PairKind::Chain | PairKind::ReversedChain => {
            let s = random_invertible(rng, n);
            let i = rng.random_range(0..=n);
            let j = rng.random_range(i..=n);
            let a = congruence(&s, &leading_identity(n, i), policy).expect("invertible S");
            let b = congruence(&s, &leading_identity(n, j), policy).expect("invertible S");
            if kind == PairKind::Chain {
                (a, b)
            } else {
                (b, a)
            }
        }
        PairKind::WeightedChain => {
            let s = random_invertible(rng, n);
            let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..10.0)).collect();
            let i = rng.random_range(0..=n);
            let j = rng.random_range(i..=n);
            let d = |k: usize| DenseMatrix::from_fn(n, n, |r, c| if r == c && r < k { w[r] } else { 0.0 });
            (
                congruence(&s, &d(i), policy).expect("invertible S"),
                congruence(&s, &d(j), policy).expect("invertible S"),
            )
        }
        PairKind::Independent => {
            let ra = rng.random_range(0..=n);
            let rb = rng.random_range(0..=n);
            (
                random_psd(rng, n, ra, policy).into_matrix(),
                random_psd(rng, n, rb, policy).into_matrix(),
            )
        }
        PairKind::ZeroBelow => {
            let rb = rng.random_range(0..=n);
            (DenseMatrix::zeros(n, n), random_psd(rng, n, rb, policy).into_matrix())
        }
        PairKind::Equal => {
            let r = rng.random_range(0..=n);
            let a = random_psd(rng, n, r, policy).into_matrix();
            (a.clone(), a)
        }
        PairKind::RankOneOn | PairKind::RankOneOff => {
            let rb = rng.random_range(1..=n);
            let b = random_psd(rng, n, rb, policy);
            let desc = ellipsoid_of(&b, policy).expect("nonzero B");
            let seed = rng.random::<u64>();
            let mut x = sample_ellipsoid(&desc, 1, seed).remove(0);
            if kind == PairKind::RankOneOff {
                x *= 1.1;
            }
            (outer(&x), b.into_matrix())
        }
    };
    (a, b, kind)
}

/// The three order predicates agree on random pairs.
pub fn predicate_agreement(n: usize, trials: usize, seeds: SeedStream, policy: &TolerancePolicy) -> PropertyReport {
    run_trials(&format!("predicate agreement (n = {n})"), trials, |i| {
        let mut rng = seeds.rng(STREAM_AGREEMENT, i);
        let (a, b, kind) = random_pair(&mut rng, n, policy);
        let by_rank = minus_leq_rank(&a, &b, policy).expect("square pair");
        let by_image = minus_leq_image(&a, &b, policy).expect("square pair");
        let inner = minus_leq_inner(&a, &b, policy).expect("square pair");
        let residual = if inner.holds { inner.residual } else { 0.0 };
        Trial::check(by_rank == by_image && by_image == inner.holds, residual, || {
            format!(
                "{kind:?}: rank {by_rank}, image {by_image}, inner {} (residual {:.3e})",
                inner.holds, inner.residual
            )
        })
    })
}

/// Reflexivity, antisymmetry and transitivity on congruence chains, plus
/// strictness (`A <- B` implies `rank A < rank B`).
pub fn order_axioms(n: usize, trials: usize, seeds: SeedStream, policy: &TolerancePolicy) -> PropertyReport {
    run_trials(&format!("partial order axioms (n = {n})"), trials, |t| {
        let mut rng = seeds.rng(STREAM_AXIOMS, t);
        let s = random_invertible(&mut rng, n);
        let mut idx = [
            rng.random_range(0..=n),
            rng.random_range(0..=n),
            rng.random_range(0..=n),
        ];
        idx.sort_unstable();
        let [a, b, c] = idx.map(|k| congruence(&s, &leading_identity(n, k), policy).expect("invertible S"));
        let leq = |x: &DenseMatrix, y: &DenseMatrix| minus_leq_rank(x, y, policy).expect("square");

        if !leq(&a, &a) {
            return Trial::fail(0.0, "reflexivity");
        }
        if !(leq(&a, &b) && leq(&b, &c) && leq(&a, &c)) {
            return Trial::fail(0.0, format!("transitivity on chain {idx:?}"));
        }
        let gap = max_abs(&(&a - &c));
        if leq(&c, &a) && gap >= policy.sym_abs_tol {
            return Trial::fail(gap, format!("antisymmetry on chain {idx:?}"));
        }
        let (ra, rc) = (rank(&a, policy), rank(&c, policy));
        if minus_lt(&a, &c, policy).expect("square") && ra >= rc {
            return Trial::fail(0.0, format!("strict pair with ranks {ra} >= {rc}"));
        }
        Trial::pass(0.0)
    })
}

/// `A <=- B` iff `SAS^T <=- SBS^T`.
pub fn congruence_invariance(n: usize, trials: usize, seeds: SeedStream, policy: &TolerancePolicy) -> PropertyReport {
    run_trials(&format!("congruence bi-invariance (n = {n})"), trials, |i| {
        let mut rng = seeds.rng(STREAM_CONGRUENCE, i);
        let (a, b, kind) = random_pair(&mut rng, n, policy);
        let s = random_invertible(&mut rng, n);
        let before = minus_leq_rank(&a, &b, policy).expect("square");
        let sa = congruence(&s, &a, policy).expect("invertible S");
        let sb = congruence(&s, &b, policy).expect("invertible S");
        let after = minus_leq_rank(&sa, &sb, policy).expect("square");
        Trial::check(before == after, 0.0, || {
            format!("{kind:?}: {before} before, {after} after congruence")
        })
    })
}

/// Points of `E_A` are exactly the rank-one minorants of `A`; a point
/// pushed off the ellipsoid by 1.1 is not.
pub fn rank_one_equivalence(n: usize, trials: usize, seeds: SeedStream, policy: &TolerancePolicy) -> PropertyReport {
    run_trials(&format!("rank-one minorants (n = {n})"), trials, |i| {
        let mut rng = seeds.rng(STREAM_RANK_ONE, i);
        let j = rng.random_range(1..=n);
        let a = random_psd(&mut rng, n, j, policy);
        let desc = ellipsoid_of(&a, policy).expect("nonzero");
        let z = unit_vector(&mut rng, desc.dim);
        let x0 = &desc.image * z;
        let x = &x0 / x0.dot(&(&desc.pinv * &x0)).sqrt();

        let on = rank_one_dominated(&x, &a, policy).expect("valid input");
        let drop = rank_with_reference(&(a.matrix() - outer(&x)), spectral_norm(a.matrix()), policy);
        let off = rank_one_dominated(&(&x * 1.1), &a, policy).expect("valid input");
        let residual = desc.level_residual(&x);
        Trial::check(on && drop + 1 == j && !off, residual, || {
            format!("rank {j}: on-ellipsoid {on}, rank(A - xx^T) = {drop}, off-ellipsoid {off}")
        })
    })
}
