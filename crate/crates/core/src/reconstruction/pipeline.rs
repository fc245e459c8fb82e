//! Stage-by-stage recovery of `S` from a congruence-induced map.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{CongruenceMap, Conjugated, Normalized, PsdMap};
use crate::conic::phi_hat;
use crate::error::{Error, Result};
use crate::linalg::{
    asymmetry, inverse_pd, leading_identity, matrix_serde, max_abs, moore_penrose, outer, rank, sqrt_pd, sym_eig,
    thin_svd, unit_vector, DenseMatrix, PsdMatrix, TolerancePolicy, Vector,
};
use crate::random::{random_invertible, random_psd, rng_from_seed, SeedStream};
use crate::report::{run_trials, PropertyReport, Trial};

/// `|map(I) - I|_max` accepted after normalization.
const NORMALIZED_TOL: f64 = 1e-8;
/// Idempotency, symmetry and containment tolerance for projector images.
const PROJECTOR_TOL: f64 = 1e-8;
/// Line-image consistency tolerance.
const LINE_TOL: f64 = 1e-7;
/// Relative tolerance of the final `S A S^T` verification.
const VERIFY_TOL: f64 = 1e-7;
/// Cross-term size below which a relative sign cannot be read.
const SIGN_TOL: f64 = 0.5;
/// Random lines added to the projector family.
const RANDOM_LINES: usize = 20;
/// Random PSD samples in the final verification.
const VERIFY_SAMPLES: usize = 100;
/// Fixed seeds for the random lines and verification samples.
const LATTICE_SEED: u64 = 0x01A7_71CE;
const VERIFY_SEED: u64 = 0x0005_EED5;
/// Rank-preservation samples per rank inside the pipeline.
const RANK_SAMPLES: usize = 4;
/// Points of the unit disk used for the rank-one fixing check.
const DISK_SAMPLES: usize = 16;

pub const STREAM_RIGIDITY: u64 = 31;

/// Pipeline stages, in order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    FixesZero,
    RankPreserving,
    Normalize,
    ProjectorLattice,
    LineRecovery,
    SvdReduction,
    RankOneFixing,
    RecoverCongruence,
}

impl Stage {
    pub fn label(self) -> &'static str {
        match self {
            Stage::FixesZero => "fixes_zero",
            Stage::RankPreserving => "rank_preserving",
            Stage::Normalize => "normalize",
            Stage::ProjectorLattice => "projector_lattice",
            Stage::LineRecovery => "line_recovery",
            Stage::SvdReduction => "svd_reduction",
            Stage::RankOneFixing => "rank_one_fixing",
            Stage::RecoverCongruence => "recover_congruence",
        }
    }
}

/// `|map(0)|_max < sym_abs_tol`.
pub fn check_fixes_zero(map: &dyn PsdMap, policy: &TolerancePolicy) -> bool {
    zero_residual(map) < policy.sym_abs_tol
}

fn zero_residual(map: &dyn PsdMap) -> f64 {
    let n = map.dim();
    max_abs(&map.apply(&DenseMatrix::zeros(n, n)))
}

/// First rank mismatch over `trials` random samples of every rank `0..=n`.
fn rank_mismatch(map: &dyn PsdMap, trials: usize, n: usize, seed: u64, policy: &TolerancePolicy) -> Option<String> {
    let mut rng = rng_from_seed(seed);
    for _ in 0..trials {
        for k in 0..=n {
            let a = random_psd(&mut rng, n, k, policy);
            let image = map.apply(a.matrix());
            let r = if image.shape() == (n, n) {
                rank(&image, policy)
            } else {
                usize::MAX
            };
            if r != k {
                return Some(format!("rank {k} input mapped to rank {r}"));
            }
        }
    }
    None
}

/// `rank(map(A)) = rank(A)` on `trials` random samples of each rank.
pub fn check_rank_preserving(map: &dyn PsdMap, trials: usize, n: usize, seed: u64, policy: &TolerancePolicy) -> bool {
    rank_mismatch(map, trials, n, seed, policy).is_none()
}

/// `A -> map(I)^{-1/2} map(A) map(I)^{-1/2}`.
pub fn normalize_at_identity<M: PsdMap>(map: M, policy: &TolerancePolicy) -> Result<Normalized<M>> {
    let n = map.dim();
    let id = DenseMatrix::identity(n, n);
    let b = PsdMatrix::new(map.apply(&id), policy).map_err(|_| Error::IdentityImageSingular)?;
    let root = sqrt_pd(&b, policy).map_err(|_| Error::IdentityImageSingular)?;
    let w = inverse_pd(&root, policy).map_err(|_| Error::IdentityImageSingular)?;
    let normalized = Normalized::new(map, w);
    let residual = max_abs(&(normalized.apply(&id) - id));
    if residual >= NORMALIZED_TOL {
        return Err(Error::NotNormalized { residual });
    }
    Ok(normalized)
}

fn line_projector(x: &Vector) -> DenseMatrix {
    outer(x) / x.norm_squared()
}

/// `E_1..E_n`, lines through `e_i` and `e_i +- e_j`, and random lines.
fn projector_family(n: usize) -> Vec<DenseMatrix> {
    let mut family: Vec<DenseMatrix> = (1..=n).map(|k| leading_identity(n, k)).collect();
    for i in 0..n {
        family.push(line_projector(&unit_vector(n, i)));
        for j in i + 1..n {
            family.push(line_projector(&(unit_vector(n, i) + unit_vector(n, j))));
            family.push(line_projector(&(unit_vector(n, i) - unit_vector(n, j))));
        }
    }
    let mut rng = rng_from_seed(LATTICE_SEED);
    family.extend((0..RANDOM_LINES).map(|_| line_projector(&crate::random::unit_vector(&mut rng, n))));
    family
}

/// `Im P` inside `Im Q`, measured as `|Q P - P|_max`.
fn containment_residual(p: &DenseMatrix, q: &DenseMatrix) -> f64 {
    max_abs(&(q * p - p))
}

/// Outcome of [`projector_lattice_report`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeReport {
    pub passed: bool,
    pub projectors: usize,
    pub max_idempotency_residual: f64,
    pub max_symmetry_residual: f64,
    pub containment_mismatches: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first_failure: Option<String>,
}

/// Images of a family of projectors are symmetric idempotents, and
/// `Im P <= Im Q` iff `Im map(P) <= Im map(Q)`.
pub fn projector_lattice_report(map: &dyn PsdMap, n: usize, _policy: &TolerancePolicy) -> Result<LatticeReport> {
    let id = DenseMatrix::identity(n, n);
    let residual = max_abs(&(map.apply(&id) - &id));
    if residual >= NORMALIZED_TOL {
        return Err(Error::NotNormalized { residual });
    }
    let family = projector_family(n);
    let images: Vec<DenseMatrix> = family.iter().map(|p| map.apply(p)).collect();
    let mut report = LatticeReport {
        passed: true,
        projectors: family.len(),
        max_idempotency_residual: 0.0,
        max_symmetry_residual: 0.0,
        containment_mismatches: 0,
        first_failure: None,
    };
    for (k, img) in images.iter().enumerate() {
        if img.shape() != (n, n) {
            report.passed = false;
            report
                .first_failure
                .get_or_insert_with(|| format!("projector {k}: image has shape {:?}", img.shape()));
            continue;
        }
        let idem = max_abs(&(img * img - img));
        let sym = asymmetry(img)?;
        report.max_idempotency_residual = report.max_idempotency_residual.max(idem);
        report.max_symmetry_residual = report.max_symmetry_residual.max(sym);
        if idem >= PROJECTOR_TOL || sym >= PROJECTOR_TOL {
            report.passed = false;
            report
                .first_failure
                .get_or_insert_with(|| format!("projector {k}: idempotency {idem:.2e}, asymmetry {sym:.2e}"));
        }
    }
    if !report.passed {
        return Ok(report);
    }
    for (i, (p, fp)) in family.iter().zip(&images).enumerate() {
        for (j, (q, fq)) in family.iter().zip(&images).enumerate() {
            let before = containment_residual(p, q) < PROJECTOR_TOL;
            let after = containment_residual(fp, fq) < PROJECTOR_TOL;
            if before != after {
                report.passed = false;
                report.containment_mismatches += 1;
                report
                    .first_failure
                    .get_or_insert_with(|| format!("projectors {i} <= {j}: {before} before, {after} after"));
            }
        }
    }
    Ok(report)
}

pub fn check_projector_lattice(map: &dyn PsdMap, n: usize, policy: &TolerancePolicy) -> Result<bool> {
    projector_lattice_report(map, n, policy).map(|r| r.passed)
}

/// Unit vector spanning the dominant eigenspace of a symmetric image.
fn dominant_direction(m: &DenseMatrix, policy: &TolerancePolicy) -> Result<Vector> {
    let eig = sym_eig(m, policy)?;
    Ok(eig.vectors.column(0).into_owned())
}

/// Operator `T`, up to the scale of its first column, with
/// `map(P_x) = P_{Tx}` for lines `x`.
///
/// Column `i` is read from `map(e_i e_i^T)` up to scale; the scale is
/// fixed by requiring `T e_1 + T e_i` to span the image line of
/// `e_1 + e_i`. The result is then checked against the images of all
/// lines `e_i` and `e_i +- e_j`.
pub fn recover_linear_map_on_lines(map: &dyn PsdMap, n: usize, policy: &TolerancePolicy) -> Result<DenseMatrix> {
    let e = |i: usize| unit_vector(n, i);
    let t1 = dominant_direction(&map.apply(&line_projector(&e(0))), policy)?;
    let mut t = DenseMatrix::zeros(n, n);
    t.set_column(0, &t1);
    for i in 1..n {
        let ti = dominant_direction(&map.apply(&line_projector(&e(i))), policy)?;
        let w = dominant_direction(&map.apply(&line_projector(&(e(0) + e(i)))), policy)?;
        // alpha w - c t_i = t_1
        let m = DenseMatrix::from_columns(&[w, -&ti]);
        let coef = moore_penrose(&m, policy) * &t1;
        let residual = (&m * &coef - &t1).norm();
        if residual > LINE_TOL || coef[1].abs() < LINE_TOL {
            return Err(Error::InconsistentLineImages { residual });
        }
        t.set_column(i, &(ti * coef[1]));
    }

    let mut worst = 0.0_f64;
    for i in 0..n {
        worst = worst.max(line_mismatch(map, &t, &e(i)));
        for j in i + 1..n {
            worst = worst.max(line_mismatch(map, &t, &(e(i) + e(j))));
            worst = worst.max(line_mismatch(map, &t, &(e(i) - e(j))));
        }
    }
    if worst >= LINE_TOL {
        return Err(Error::InconsistentLineImages { residual: worst });
    }
    Ok(t)
}

/// `|map(P_x) - P_{Tx}|_max`.
pub(crate) fn line_mismatch(map: &dyn PsdMap, t: &DenseMatrix, x: &Vector) -> f64 {
    max_abs(&(map.apply(&line_projector(x)) - line_projector(&(t * x))))
}

/// Flips `s` so that the first entry of its first column with magnitude
/// above roundoff is positive.
pub fn canonical_sign(s: &DenseMatrix) -> DenseMatrix {
    let scale = max_abs(s);
    let first = s.column(0).iter().copied().find(|v| v.abs() > 1e-12 * scale);
    match first {
        Some(v) if v < 0.0 => -s,
        _ => s.clone(),
    }
}

/// Recovers `S` with `map(A) = S A S^T`, global sign canonical.
///
/// Columns come from `map(e_i e_i^T) = s_i s_i^T`; the sign of `s_i`
/// relative to `s_1` from the cross term of `map((e_1 + e_i)(e_1 + e_i)^T)`.
/// The result is verified on random PSD matrices.
pub fn recover_congruence(map: &dyn PsdMap, n: usize, policy: &TolerancePolicy) -> Result<DenseMatrix> {
    let e = |i: usize| unit_vector(n, i);
    let images: Vec<DenseMatrix> = (0..n).map(|i| map.apply(&outer(&e(i)))).collect();
    let mut s = DenseMatrix::zeros(n, n);
    for (i, img) in images.iter().enumerate() {
        let eig = sym_eig(img, policy).map_err(|_| Error::NotCongruenceInduced {
            residual: f64::INFINITY,
        })?;
        let col = eig.vectors.column(0) * eig.values[0].max(0.0).sqrt();
        let residual = max_abs(&(img - outer(&col)));
        if residual > VERIFY_TOL * (1.0 + max_abs(img)) {
            return Err(Error::NotCongruenceInduced { residual });
        }
        s.set_column(i, &col);
    }
    let s1 = s.column(0).into_owned();
    for i in 1..n {
        let si = s.column(i).into_owned();
        let cross = map.apply(&outer(&(e(0) + e(i)))) - &images[0] - &images[i];
        let basis = &s1 * si.transpose() + &si * s1.transpose();
        let sigma = cross.dot(&basis) / basis.norm_squared();
        if !(sigma.abs() > SIGN_TOL) {
            return Err(Error::SignResolutionFailure { column: i });
        }
        if sigma < 0.0 {
            s.set_column(i, &(-si));
        }
    }
    let s = canonical_sign(&s);

    let mut rng = rng_from_seed(VERIFY_SEED);
    let mut worst = 0.0_f64;
    for _ in 0..VERIFY_SAMPLES {
        let k = rng.random_range(1..=n);
        let a = random_psd(&mut rng, n, k, policy).into_matrix();
        let gap = max_abs(&(map.apply(&a) - &s * &a * s.transpose())) / (1.0 + max_abs(&a));
        worst = worst.max(gap);
    }
    if worst >= VERIFY_TOL {
        return Err(Error::NotCongruenceInduced { residual: worst });
    }
    Ok(s)
}

/// Residual recorded for one completed stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: Stage,
    pub residual: f64,
}

/// Everything the pipeline learned about a map that passed every stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub stages: Vec<StageRecord>,
    /// Singular values of the line operator after normalization.
    pub singular_values: Vec<f64>,
    /// Parameters read off the reduced map in the `e_1, e_2` plane.
    pub a0: f64,
    pub gamma: f64,
    #[serde(with = "matrix_serde")]
    pub recovered: DenseMatrix,
}

fn stage_err(stage: Stage) -> impl Fn(Error) -> Error {
    move |e| e.in_stage(stage.label())
}

fn check_failed(stage: Stage, detail: String) -> Error {
    Error::CheckFailed {
        check: stage.label(),
        detail,
    }
    .in_stage(stage.label())
}

/// Reads `(a0, gamma)` off a reduced map and checks that it fixes the
/// rank-one matrices `x x^T`, `|x| < 1`, of the `e_1, e_2` plane, as
/// `phi_hat(4, 1, .)` predicts.
fn rank_one_fixing(map: &dyn PsdMap, d: &[f64], n: usize) -> Result<(f64, f64, f64)> {
    let gamma = d[1] / d[0];
    let quarter = leading_identity(n, 2) * 0.25;
    let block = map.apply(&quarter).view((0, 0), (2, 2)).into_owned();
    let inv = block.try_inverse().ok_or(Error::IdentityImageSingular)?;
    let a0 = inv[(0, 0)];
    let mut worst = (a0 - 4.0)
        .abs()
        .max((gamma - 1.0).abs())
        .max(inv[(0, 1)].abs())
        .max((inv[(1, 1)] - 4.0).abs());
    for k in 0..DISK_SAMPLES {
        let theta = std::f64::consts::TAU * k as f64 / DISK_SAMPLES as f64;
        let rho = (k + 1) as f64 / (DISK_SAMPLES + 1) as f64;
        let p = [rho * theta.cos(), rho * theta.sin()];
        let q = phi_hat(4.0, 1.0, p)?;
        let plane = |v: [f64; 2]| Vector::from_fn(n, |i, _| if i < 2 { v[i] } else { 0.0 });
        let (input, x) = (plane(p), plane(q));
        worst = worst.max(max_abs(&(map.apply(&outer(&input)) - outer(&x))));
    }
    Ok((a0, gamma, worst))
}

/// Runs every stage on `map`; the first failure is returned with its
/// stage label.
pub fn run_pipeline(map: &dyn PsdMap, seed: u64, policy: &TolerancePolicy) -> Result<PipelineReport> {
    let n = map.dim();
    let mut stages = Vec::new();

    let z = zero_residual(map);
    if z >= policy.sym_abs_tol {
        return Err(check_failed(Stage::FixesZero, format!("|map(0)| = {z:.3e}")));
    }
    stages.push(StageRecord {
        stage: Stage::FixesZero,
        residual: z,
    });

    if let Some(detail) = rank_mismatch(map, RANK_SAMPLES, n, seed, policy) {
        return Err(check_failed(Stage::RankPreserving, detail));
    }
    stages.push(StageRecord {
        stage: Stage::RankPreserving,
        residual: 0.0,
    });

    let normalized = normalize_at_identity(map, policy).map_err(stage_err(Stage::Normalize))?;
    let id = DenseMatrix::identity(n, n);
    stages.push(StageRecord {
        stage: Stage::Normalize,
        residual: max_abs(&(normalized.apply(&id) - id)),
    });

    let lattice = projector_lattice_report(&normalized, n, policy).map_err(stage_err(Stage::ProjectorLattice))?;
    if !lattice.passed {
        return Err(check_failed(
            Stage::ProjectorLattice,
            lattice.first_failure.unwrap_or_default(),
        ));
    }
    stages.push(StageRecord {
        stage: Stage::ProjectorLattice,
        residual: lattice.max_idempotency_residual.max(lattice.max_symmetry_residual),
    });

    let t = recover_linear_map_on_lines(&normalized, n, policy).map_err(stage_err(Stage::LineRecovery))?;
    stages.push(StageRecord {
        stage: Stage::LineRecovery,
        residual: 0.0,
    });

    let svd = thin_svd(&t);
    let reduced = Conjugated::new(&normalized, svd.u.clone(), svd.v.clone());
    let diag_residual = (0..n)
        .map(|i| max_abs(&(reduced.apply(&outer(&unit_vector(n, i))) - outer(&unit_vector(n, i)))))
        .fold(0.0, f64::max);
    if diag_residual >= PROJECTOR_TOL {
        return Err(check_failed(
            Stage::SvdReduction,
            format!("|map(E_ii) - E_ii| = {diag_residual:.3e}"),
        ));
    }
    stages.push(StageRecord {
        stage: Stage::SvdReduction,
        residual: diag_residual,
    });

    let (a0, gamma, fix) = rank_one_fixing(&reduced, &svd.s, n).map_err(stage_err(Stage::RankOneFixing))?;
    if fix >= PROJECTOR_TOL {
        return Err(check_failed(
            Stage::RankOneFixing,
            format!("a0 = {a0}, gamma = {gamma}, rank-one residual {fix:.3e}"),
        ));
    }
    stages.push(StageRecord {
        stage: Stage::RankOneFixing,
        residual: fix,
    });

    let recovered = recover_congruence(map, n, policy).map_err(stage_err(Stage::RecoverCongruence))?;
    stages.push(StageRecord {
        stage: Stage::RecoverCongruence,
        residual: 0.0,
    });

    Ok(PipelineReport {
        stages,
        singular_values: svd.s,
        a0,
        gamma,
        recovered,
    })
}

/// End-to-end pipeline on congruence maps with random invertible `S`;
/// each trial passes when every stage does and the recovered matrix is
/// `+-S` within `1e-7` entrywise.
pub fn rigidity_suite(n: usize, trials: usize, seed: u64, policy: &TolerancePolicy) -> Result<PropertyReport> {
    if n < 3 {
        return Err(Error::DomainError(format!("rigidity needs n >= 3, got {n}")));
    }
    let seeds = SeedStream::new(seed);
    Ok(run_trials(&format!("congruence recovery (n = {n})"), trials, |i| {
        let mut rng = seeds.rng(STREAM_RIGIDITY, i);
        let s = random_invertible(&mut rng, n);
        let map = match CongruenceMap::new(s.clone(), policy) {
            Ok(m) => m,
            Err(e) => return Trial::fail(f64::INFINITY, e.to_string()),
        };
        match run_pipeline(&map, seeds.derive(STREAM_RIGIDITY, i), policy) {
            Ok(report) => {
                let gap = max_abs(&(report.recovered - canonical_sign(&s)));
                Trial::check(gap < VERIFY_TOL, gap, || format!("recovered S off by {gap:.3e}"))
            }
            Err(e) => Trial::fail(f64::INFINITY, e.to_string()),
        }
    }))
}
