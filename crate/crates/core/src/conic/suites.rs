//! Randomized property suites for the conic engine.

use std::f64::consts::FRAC_PI_2;

use nalgebra::{Matrix2, Vector2};
use rand::Rng;

use super::touching::linearity_coefficient;
use super::{
    canonical, coplanarity_by_incidence, eig2, four_ellipse_configuration, intersect_concentric,
    phi_for_vertical_intersection, phi_hat, quadric_image_coeffs, rotation, same_plane, touching_ellipse,
    touching_r_closed_form, vertical_intersection, Conic2, IntersectionKind, PlanarEllipseND, Point2,
};
use crate::error::Result;
use crate::linalg::{DenseMatrix, PsdMatrix, TolerancePolicy};
use crate::random::{gaussian_matrix, random_orthogonal, random_psd, SeedStream, SuiteRng};
use crate::report::{run_trials, PropertyReport, Trial};

pub const STREAM_TANGENCY: u64 = 11;
pub const STREAM_CLOSED_FORM: u64 = 12;
pub const STREAM_IDENTITY: u64 = 13;
pub const STREAM_QUADRIC: u64 = 14;
pub const STREAM_VERTICAL: u64 = 15;
pub const STREAM_CONFIGURATION: u64 = 16;
pub const STREAM_COPLANAR: u64 = 17;

pub const DET_TOL: f64 = 1e-8;
pub const MEMBERSHIP_TOL: f64 = 1e-8;
pub const GRADIENT_TOL: f64 = 1e-6;
pub const CLOSED_FORM_TOL: f64 = 1e-9;
pub const LINEARITY_TOL: f64 = 1e-10;
pub const IDENTITY_TOL: f64 = 1e-12;
pub const QUADRIC_TOL: f64 = 1e-8;
pub const ROUND_TRIP_TOL: f64 = 1e-10;
pub const INCIDENCE_TOL: f64 = 1e-7;

fn log_uniform(rng: &mut SuiteRng, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo.ln()..hi.ln()).exp()
}

fn open_angle(rng: &mut SuiteRng) -> f64 {
    rng.random_range(0.01..FRAC_PI_2 - 0.01)
}

/// Rotated ellipse with both eigenvalues in `(lo, hi)`.
fn random_conic(rng: &mut SuiteRng, lo: f64, hi: f64) -> Conic2 {
    let r = rotation(rng.random_range(0.0..std::f64::consts::PI));
    let d = Matrix2::new(log_uniform(rng, lo, hi), 0.0, 0.0, log_uniform(rng, lo, hi));
    Conic2::from_matrix(&(r * d * r.transpose())).expect("positive definite by construction")
}

/// Uniform point of the open unit disk.
fn disk_point(rng: &mut SuiteRng) -> Point2 {
    let rho = rng.random_range(0.0_f64..1.0).sqrt() * 0.999;
    let t = rng.random_range(0.0..std::f64::consts::TAU);
    [rho * t.cos(), rho * t.sin()]
}

fn describe(e: impl std::fmt::Display) -> Trial {
    Trial::fail(f64::INFINITY, e.to_string())
}

/// Touching-ellipse invariants on random `(Q, phi)` with `Q` strictly
/// inside the unit circle.
pub fn tangency(trials: usize, seeds: SeedStream) -> PropertyReport {
    run_trials("touching ellipse invariants", trials, |i| {
        let mut rng = seeds.rng(STREAM_TANGENCY, i);
        let q = random_conic(&mut rng, 1.05, 50.0);
        let phi = open_angle(&mut rng);
        let sol = match touching_ellipse(&q, phi) {
            Ok(s) => s,
            Err(e) => return describe(e),
        };
        let det = sol.det_residual(&q);
        let member = sol.membership_residual(&q);
        let angle = sol.gradient_angle(&q);
        let lin = linearity_coefficient(&q, phi).abs();
        let with_q = intersect_concentric(&sol.conic, &q).kind;
        let with_circle = intersect_concentric(&sol.conic, &Conic2::unit_circle()).kind;
        let ok = det < DET_TOL
            && member < MEMBERSHIP_TOL
            && angle < GRADIENT_TOL
            && lin > LINEARITY_TOL
            && with_q == IntersectionKind::Touching
            && with_circle == IntersectionKind::Touching;
        Trial::check(ok, det.max(member), || {
            format!("det {det:.2e}, membership {member:.2e}, angle {angle:.2e}, linear {lin:.2e}, vs Q {with_q:?}, vs circle {with_circle:?}")
        })
    })
}

/// Closed-form `r` against the determinant root for `diag(a, b)`.
pub fn closed_form_agreement(trials: usize, seeds: SeedStream) -> PropertyReport {
    run_trials("closed-form touching parameter", trials, |i| {
        let mut rng = seeds.rng(STREAM_CLOSED_FORM, i);
        let a = rng.random_range(1.01..100.0);
        let b = rng.random_range(1.01..100.0);
        let phi = open_angle(&mut rng);
        let q = Conic2::new(a, 0.0, b).expect("a, b > 1");
        let (closed, root) = match (touching_r_closed_form(a, b, phi), touching_ellipse(&q, phi)) {
            (Ok(c), Ok(s)) => (c, s.r),
            (Err(e), _) | (_, Err(e)) => return describe(e),
        };
        let gap = (closed - root).abs() / closed.abs();
        Trial::check(gap < CLOSED_FORM_TOL, gap, || {
            format!("(a, b, phi) = ({a}, {b}, {phi}): {closed} vs {root}")
        })
    })
}

/// `phi_hat(4, 1, .)` is the identity on canonical representatives.
pub fn rigidity_identity(points: usize, seeds: SeedStream) -> PropertyReport {
    run_trials("phi_hat(4, 1) is the identity", points, |i| {
        let mut rng = seeds.rng(STREAM_IDENTITY, i);
        let p = disk_point(&mut rng);
        let expect = canonical(Vector2::from(p));
        match phi_hat(4.0, 1.0, p) {
            Ok(q) => {
                let dev = (Vector2::from(q) - expect).amax();
                Trial::check(dev < IDENTITY_TOL, dev, || format!("{p:?} -> {q:?}"))
            }
            Err(e) => describe(e),
        }
    })
}

/// Points of a random quadric inside the unit disk, pushed through
/// `phi_hat`, satisfy the transported quadric.
pub fn quadric_transport(cases: usize, samples: usize, seeds: SeedStream) -> PropertyReport {
    run_trials("quadric transport", cases, |i| {
        let mut rng = seeds.rng(STREAM_QUADRIC, i);
        let gamma = log_uniform(&mut rng, 0.3, 3.0);
        let a0 = rng.random_range(1.05..4.0_f64.min(1.0 + 3.0 * gamma * gamma));
        let q = random_conic(&mut rng, 1.05, 30.0);
        let coeffs = match quadric_image_coeffs(a0, gamma, q.q11, 2.0 * q.q12, q.q22) {
            Ok(c) => c,
            Err(e) => return describe(e),
        };
        let (lam, vecs) = eig2(&q.matrix());
        let h = vecs * Matrix2::from_diagonal(&lam.map(|l| 1.0 / l.sqrt())) * vecs.transpose();
        let mut worst = 0.0_f64;
        for k in 0..samples {
            let t = std::f64::consts::TAU * k as f64 / samples as f64;
            let p = h * Vector2::new(t.cos(), t.sin());
            match phi_hat(a0, gamma, [p.x, p.y]) {
                Ok(image) => worst = worst.max(coeffs.residual(image)),
                Err(e) => return describe(e),
            }
        }
        Trial::check(worst < QUADRIC_TOL, worst, || {
            format!("(a0, gamma) = ({a0}, {gamma}): residual {worst:.2e}")
        })
    })
}

/// Feasible `(rho0, r)`: `1/r < rho0^2 < 1`.
fn feasible_pair(rng: &mut SuiteRng) -> (f64, f64) {
    let r = log_uniform(rng, 1.5, 60.0);
    let lo = 1.0 / r;
    let rho2 = rng.random_range(lo + 0.02 * (1.0 - lo)..1.0 - 0.02 * (1.0 - lo));
    (rho2.sqrt(), r)
}

/// `vertical_intersection(r, phi_for_vertical_intersection(rho0, r)) = rho0`.
pub fn vertical_round_trip(trials: usize, seeds: SeedStream) -> PropertyReport {
    run_trials("vertical intersection round trip", trials, |i| {
        let mut rng = seeds.rng(STREAM_VERTICAL, i);
        let (rho0, r) = feasible_pair(&mut rng);
        match phi_for_vertical_intersection(rho0, r) {
            Ok(phi) => {
                let gap = (vertical_intersection(r, phi) - rho0).abs();
                Trial::check(gap < ROUND_TRIP_TOL, gap, || {
                    format!("(rho0, r) = ({rho0}, {r}): gap {gap:.2e}")
                })
            }
            Err(e) => describe(e),
        }
    })
}

/// Axis points of the four-ellipse configuration lie on the base ellipse
/// and the four images touch the common standard ellipse.
pub fn configuration_incidence(trials: usize, seeds: SeedStream) -> PropertyReport {
    run_trials("four-ellipse incidence", trials, |i| {
        let mut rng = seeds.rng(STREAM_CONFIGURATION, i);
        let (rho0, r) = feasible_pair(&mut rng);
        let gamma = log_uniform(&mut rng, 0.3, 3.0);
        let a0 = rng.random_range(1.1..8.0);
        match four_ellipse_configuration(rho0, r, gamma, a0) {
            Ok(c) => {
                let touching = c.touching.conic();
                let kinds: Vec<IntersectionKind> = c
                    .images()
                    .iter()
                    .map(|e| intersect_concentric(e, &touching).kind)
                    .collect();
                let all_touch = kinds.iter().all(|k| *k == IntersectionKind::Touching);
                let ok = c.incidence_residual < INCIDENCE_TOL && c.tangency_residual < INCIDENCE_TOL && all_touch;
                Trial::check(ok, c.incidence_residual.max(c.tangency_residual), || {
                    format!(
                        "(rho0, r, gamma, a0) = ({rho0}, {r}, {gamma}, {a0}): incidence {:.2e}, tangency {:.2e}, kinds {kinds:?}",
                        c.incidence_residual, c.tangency_residual
                    )
                })
            }
            Err(e) => describe(e),
        }
    })
}

/// Random SPD `2 x 2` factor with condition number at most about 100.
fn plane_form(rng: &mut SuiteRng) -> DenseMatrix {
    let q = random_orthogonal(rng, 2);
    let d = DenseMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
        log_uniform(rng, 0.1, 10.0),
        log_uniform(rng, 0.1, 10.0),
    ]));
    &q * d * q.transpose()
}

fn planar(basis: &DenseMatrix, form: &DenseMatrix, policy: &TolerancePolicy) -> Result<PlanarEllipseND> {
    let m = basis * form * basis.transpose();
    PlanarEllipseND::new(PsdMatrix::new(0.5 * (&m + m.transpose()), policy)?, policy)
}

/// Which plane the second ellipse of a coplanarity trial lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PlaneRelation {
    Same,
    SharedLine,
    Generic,
}

/// Random rank-two pair in `R^n`: same plane, planes sharing a line, or
/// independent.
fn random_planar_pair(
    rng: &mut SuiteRng,
    n: usize,
    policy: &TolerancePolicy,
) -> Result<(PlanarEllipseND, PlanarEllipseND, PlaneRelation)> {
    let relation = match rng.random_range(0..3) {
        0 => PlaneRelation::Same,
        1 => PlaneRelation::SharedLine,
        _ => PlaneRelation::Generic,
    };
    let q = random_orthogonal(rng, n);
    let v1 = q.columns(0, 2).into_owned();
    let e1 = planar(&v1, &plane_form(rng), policy)?;
    let e2 = match relation {
        PlaneRelation::Same => {
            // A different basis of the same plane.
            let mix = gaussian_matrix(rng, 2, 2);
            planar(&(&v1 * mix), &plane_form(rng), policy)?
        }
        PlaneRelation::SharedLine => {
            let basis = DenseMatrix::from_columns(&[q.column(0), q.column(2)]);
            planar(&basis, &plane_form(rng), policy)?
        }
        PlaneRelation::Generic => PlanarEllipseND::new(random_psd(rng, n, 2, policy), policy)?,
    };
    Ok((e1, e2, relation))
}

/// The four-point incidence test agrees with the subspace comparison.
pub fn coplanarity_agreement(n: usize, trials: usize, seeds: SeedStream, policy: &TolerancePolicy) -> PropertyReport {
    run_trials(&format!("coplanarity by incidence (n = {n})"), trials, |i| {
        let mut rng = seeds.rng(STREAM_COPLANAR, i);
        let (e1, e2, relation) = match random_planar_pair(&mut rng, n, policy) {
            Ok(p) => p,
            Err(e) => return describe(e),
        };
        let subspace = same_plane(&e1, &e2);
        match coplanarity_by_incidence(&e1, &e2) {
            Ok(rep) => {
                let expected = relation == PlaneRelation::Same;
                Trial::check(rep.coplanar == subspace && subspace == expected, 0.0, || {
                    format!(
                        "{relation:?}: incidence {} ({} / {} points), same_plane {subspace}",
                        rep.coplanar, rep.count_e1, rep.count_e2
                    )
                })
            }
            Err(e) => describe(e),
        }
    })
}
