//! Randomized test of `A <=- B  <=>  map(A) <=- map(B)`.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::PsdMap;
use crate::linalg::{congruence, leading_identity, matrix_serde, outer, DenseMatrix, TolerancePolicy};
use crate::order::minus_leq_rank;
use crate::random::{random_invertible, random_psd, unit_vector, SeedStream, SuiteRng};

pub const STREAM_BIMONOTONE: u64 = 21;

/// Rejection cap when sampling an incomparable pair.
const MAX_REJECTIONS: usize = 100;
/// Incomparable pairs must stay incomparable under this looser rank
/// cutoff. A congruence with condition number `k` moves relative singular
/// values by up to `k^2`, so pairs closer than this to comparable can flip.
const INCOMPARABLE_MARGIN: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// `A <=- B` but not `map(A) <=- map(B)`.
    Forward,
    /// `map(A) <=- map(B)` but not `A <=- B`.
    Backward,
}

/// A pair on which the map fails to preserve or reflect the order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    #[serde(with = "matrix_serde")]
    pub a: DenseMatrix,
    #[serde(with = "matrix_serde")]
    pub b: DenseMatrix,
    pub direction: Direction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub trials: usize,
    pub seed: u64,
    pub verdict: bool,
    pub violations: Vec<Violation>,
}

/// `(S E_i S^T, S E_j S^T)` with `i <= j`.
fn comparable_pair(rng: &mut SuiteRng, n: usize, policy: &TolerancePolicy) -> (DenseMatrix, DenseMatrix) {
    let s = random_invertible(rng, n);
    let i = rng.random_range(0..=n);
    let j = rng.random_range(i..=n);
    let a = congruence(&s, &leading_identity(n, i), policy).expect("invertible S");
    let b = congruence(&s, &leading_identity(n, j), policy).expect("invertible S");
    (a, b)
}

/// Random PSD pair comparable in neither order, with margin. Falls back to
/// projectors onto two distinct, non-orthogonal lines, which have equal
/// rank and so cannot be comparable.
fn incomparable_pair(rng: &mut SuiteRng, n: usize, policy: &TolerancePolicy) -> (DenseMatrix, DenseMatrix) {
    let loose = TolerancePolicy {
        rank_rel_tol: INCOMPARABLE_MARGIN,
        ..*policy
    };
    let leq = |x: &DenseMatrix, y: &DenseMatrix| {
        minus_leq_rank(x, y, policy).expect("square pair") || minus_leq_rank(x, y, &loose).expect("square pair")
    };
    for _ in 0..MAX_REJECTIONS {
        let ra = rng.random_range(1..=n);
        let rb = rng.random_range(1..=n);
        let a = random_psd(rng, n, ra, policy);
        let b = random_psd(rng, n, rb, policy);
        let ranks_clear =
            crate::linalg::rank(a.matrix(), &loose) == ra && crate::linalg::rank(b.matrix(), &loose) == rb;
        let (a, b) = (a.into_matrix(), b.into_matrix());
        if ranks_clear && !leq(&a, &b) && !leq(&b, &a) {
            return (a, b);
        }
    }
    let u = unit_vector(rng, n);
    let mut v = unit_vector(rng, n);
    v += &u;
    v /= v.norm();
    (outer(&u), outer(&v))
}

fn check_pair(map: &dyn PsdMap, a: &DenseMatrix, b: &DenseMatrix, policy: &TolerancePolicy) -> Vec<Violation> {
    let (fa, fb) = (map.apply(a), map.apply(b));
    let mut out = Vec::new();
    for (x, y, fx, fy) in [(a, b, &fa, &fb), (b, a, &fb, &fa)] {
        let before = minus_leq_rank(x, y, policy).expect("square pair");
        // An image of the wrong shape compares with nothing.
        let after = minus_leq_rank(fx, fy, policy).unwrap_or(!before);
        if before != after {
            out.push(Violation {
                a: x.clone(),
                b: y.clone(),
                direction: if before {
                    Direction::Forward
                } else {
                    Direction::Backward
                },
            });
        }
    }
    out
}

/// Alternates comparable chain pairs with incomparable pairs and checks
/// the order both ways through `map`. Deterministic given `seed`.
pub fn test_bimonotone(
    map: &dyn PsdMap,
    trials: usize,
    n: usize,
    seed: u64,
    policy: &TolerancePolicy,
) -> MonotonicityReport {
    let seeds = SeedStream::new(seed);
    let per_trial: Vec<Vec<Violation>> = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = seeds.rng(STREAM_BIMONOTONE, i);
            let (a, b) = if i % 2 == 0 {
                comparable_pair(&mut rng, n, policy)
            } else {
                incomparable_pair(&mut rng, n, policy)
            };
            check_pair(map, &a, &b, policy)
        })
        .collect();
    let violations: Vec<Violation> = per_trial.into_iter().flatten().collect();
    MonotonicityReport {
        trials,
        seed,
        verdict: violations.is_empty(),
        violations,
    }
}
