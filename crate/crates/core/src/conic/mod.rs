//! Concentric conics in the plane.
//!
//! A [`Conic2`] is a 2x2 positive definite matrix `Q` standing for the
//! origin-centered ellipse `x^T Q x = 1`. Larger `Q` means a smaller
//! ellipse; the unit circle is `Q = I`.
//!
//! Points are identified with their antipodes throughout. Every point a
//! function returns is put in canonical form: `y > 0`, or `y = 0` and
//! `x >= 0` (see [`canonical`]).

mod planar;
mod rigidity;
pub mod suites;
pub mod svg;
mod touching;

pub use planar::{coplanarity_by_incidence, same_plane, IncidenceReport, PlanarEllipseND};
pub use rigidity::{
    base_b0, four_ellipse_configuration, image_of_circle, phi_hat, phi_hat_inverse, quadric_image_coeffs,
    surjectivity_constraints, touching_params_ab, FourEllipseConfiguration, QuadricCoeffs, SurjectivityReport,
};
pub use touching::{
    phi_for_vertical_intersection, touching_conic_matrix, touching_ellipse, touching_r_closed_form,
    vertical_intersection, witness_touching_ellipse, TouchingSolution,
};

use std::f64::consts::FRAC_PI_2;

use nalgebra::{Matrix2, SymmetricEigen, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Planar point, serialized as `[x, y]`.
pub type Point2 = [f64; 2];

/// Eigenvalues of a conic must exceed this to count as positive definite.
const PD_TOL: f64 = 1e-9;
/// Relative threshold under which an eigenvalue of `Q1 - Q2` is zero.
const PENCIL_REL_TOL: f64 = 1e-9;
/// Absolute floor for the same decision when `Q1 - Q2` is tiny.
const PENCIL_ABS_TOL: f64 = 1e-12;
/// `|Q1 - Q2|_max` below this fraction of the operands means identical.
const IDENTICAL_TOL: f64 = 1e-10;
/// Residual accepted when confirming that a computed point lies on a conic.
const ON_CONIC_TOL: f64 = 1e-8;

/// Concentric ellipse `q11 x^2 + 2 q12 xy + q22 y^2 = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawConic")]
pub struct Conic2 {
    pub q11: f64,
    pub q12: f64,
    pub q22: f64,
}

#[derive(Deserialize)]
struct RawConic {
    q11: f64,
    q12: f64,
    q22: f64,
}

impl TryFrom<RawConic> for Conic2 {
    type Error = Error;

    fn try_from(raw: RawConic) -> Result<Self> {
        Conic2::new(raw.q11, raw.q12, raw.q22)
    }
}

impl Conic2 {
    pub fn new(q11: f64, q12: f64, q22: f64) -> Result<Self> {
        if ![q11, q12, q22].iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite);
        }
        let c = Self { q11, q12, q22 };
        let (min, _) = c.eigenvalues();
        if min <= PD_TOL {
            return Err(Error::NotPositiveDefinite { min_eigenvalue: min });
        }
        Ok(c)
    }

    /// Symmetric part of `m`, which must be positive definite.
    pub fn from_matrix(m: &Matrix2<f64>) -> Result<Self> {
        Self::new(m[(0, 0)], 0.5 * (m[(0, 1)] + m[(1, 0)]), m[(1, 1)])
    }

    pub fn unit_circle() -> Self {
        Self {
            q11: 1.0,
            q12: 0.0,
            q22: 1.0,
        }
    }

    /// Circle of radius `radius`.
    pub fn circle(radius: f64) -> Result<Self> {
        let c = 1.0 / (radius * radius);
        Self::new(c, 0.0, c)
    }

    pub fn matrix(&self) -> Matrix2<f64> {
        Matrix2::new(self.q11, self.q12, self.q12, self.q22)
    }

    /// Eigenvalues `(min, max)`.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let mid = 0.5 * (self.q11 + self.q22);
        let rad = (0.5 * (self.q11 - self.q22)).hypot(self.q12);
        (mid - rad, mid + rad)
    }

    /// `p^T Q p`.
    pub fn value(&self, p: &Vector2<f64>) -> f64 {
        p.dot(&(self.matrix() * p))
    }

    /// `|p^T Q p - 1|`.
    pub fn residual(&self, p: &Vector2<f64>) -> f64 {
        (self.value(p) - 1.0).abs()
    }

    /// The point of the conic in direction `d`.
    pub fn point_along(&self, d: &Vector2<f64>) -> Vector2<f64> {
        d / self.value(d).sqrt()
    }

    /// Largest entry of `|Q - other|`.
    pub fn distance(&self, other: &Conic2) -> f64 {
        (self.matrix() - other.matrix()).amax()
    }
}

/// Standard ellipse `a x^2 + b y^2 = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StandardEllipse {
    pub a: f64,
    pub b: f64,
}

impl StandardEllipse {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0) || !a.is_finite() || !b.is_finite() {
            return Err(Error::DomainError(format!(
                "standard ellipse needs a, b > 0, got ({a}, {b})"
            )));
        }
        Ok(Self { a, b })
    }

    pub fn conic(&self) -> Conic2 {
        Conic2 {
            q11: self.a,
            q12: 0.0,
            q22: self.b,
        }
    }
}

/// Antipodal representative with `y > 0`, or `y = 0` and `x >= 0`.
pub fn canonical(p: Vector2<f64>) -> Vector2<f64> {
    if p.y < 0.0 || (p.y == 0.0 && p.x < 0.0) {
        -p
    } else {
        p
    }
}

pub(crate) fn point2(p: &Vector2<f64>) -> Point2 {
    [p.x, p.y]
}

/// `R_phi = [[cos, -sin], [sin, cos]]`.
pub fn rotation(phi: f64) -> Matrix2<f64> {
    let (s, c) = phi.sin_cos();
    Matrix2::new(c, -s, s, c)
}

/// `R_phi diag(1, r) R_phi^T`: the ellipse with unit semi-axis along angle
/// `phi` and semi-axis `1/sqrt(r)` across it.
pub fn ellipse_at_angle(phi: f64, r: f64) -> Result<Conic2> {
    if !(r > 0.0) {
        return Err(Error::NonPositiveR(r));
    }
    let (s, c) = phi.sin_cos();
    Conic2::new((r - 1.0) * s * s + 1.0, -(r - 1.0) * s * c, (r - 1.0) * c * c + 1.0)
}

pub(crate) fn check_open_angle(phi: f64) -> Result<()> {
    if phi > 0.0 && phi < FRAC_PI_2 {
        Ok(())
    } else {
        Err(Error::DomainError(format!("angle {phi} must lie in (0, pi/2)")))
    }
}

/// How two concentric conics meet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IntersectionKind {
    Identical,
    Disjoint,
    Touching,
    Crossing,
}

/// Classification plus the common points. Points come in antipodal pairs,
/// canonical representative first; pairs are sorted by polar angle of the
/// representative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Intersection {
    pub kind: IntersectionKind,
    pub points: Vec<Point2>,
}

impl Intersection {
    /// Canonical representatives only.
    pub fn representatives(&self) -> impl Iterator<Item = Vector2<f64>> + '_ {
        self.points.iter().step_by(2).map(|p| Vector2::new(p[0], p[1]))
    }
}

fn eig2(m: &Matrix2<f64>) -> (Vector2<f64>, Matrix2<f64>) {
    let e = SymmetricEigen::new(*m);
    if e.eigenvalues[0] <= e.eigenvalues[1] {
        (e.eigenvalues, e.eigenvectors)
    } else {
        let v = e.eigenvectors;
        (
            Vector2::new(e.eigenvalues[1], e.eigenvalues[0]),
            Matrix2::from_columns(&[v.column(1).into_owned(), v.column(0).into_owned()]),
        )
    }
}

/// Solves `x^T (Q1 - Q2) x = 0` on `E_{Q1}` and classifies the result.
pub fn intersect_concentric(q1: &Conic2, q2: &Conic2) -> Intersection {
    let scale = q1.matrix().amax().max(q2.matrix().amax());
    let d = q1.matrix() - q2.matrix();
    if d.amax() < IDENTICAL_TOL * scale {
        return Intersection {
            kind: IntersectionKind::Identical,
            points: Vec::new(),
        };
    }
    let (lam, vecs) = eig2(&d);
    let norm = lam[0].abs().max(lam[1].abs());
    let is_zero = |l: f64| l.abs() < PENCIL_REL_TOL * norm || l.abs() < PENCIL_ABS_TOL;
    let (z0, z1) = (is_zero(lam[0]), is_zero(lam[1]));

    let directions: Vec<Vector2<f64>> = if z0 && z1 {
        return Intersection {
            kind: IntersectionKind::Identical,
            points: Vec::new(),
        };
    } else if z0 || z1 {
        vec![vecs.column(if z0 { 0 } else { 1 }).into_owned()]
    } else if lam[0] < 0.0 && lam[1] > 0.0 {
        let span = lam[1] - lam[0];
        let c = (lam[1] / span).sqrt();
        let s = (-lam[0] / span).sqrt();
        let (e0, e1) = (vecs.column(0).into_owned(), vecs.column(1).into_owned());
        vec![e0 * c + e1 * s, e0 * c - e1 * s]
    } else {
        Vec::new()
    };

    let mut reps: Vec<Vector2<f64>> = directions
        .iter()
        .map(|d| canonical(q1.point_along(d)))
        .filter(|p| q2.residual(p) < ON_CONIC_TOL * (1.0 + scale))
        .collect();
    reps.sort_by(|a, b| a.y.atan2(a.x).total_cmp(&b.y.atan2(b.x)));
    let kind = match (directions.len(), reps.len()) {
        (_, 0) => IntersectionKind::Disjoint,
        (1, _) => IntersectionKind::Touching,
        _ => IntersectionKind::Crossing,
    };
    Intersection {
        kind,
        points: reps.iter().flat_map(|p| [point2(p), point2(&-p)]).collect(),
    }
}

/// `lambda_min(Q) > 1`: the ellipse lies strictly inside the unit circle.
pub fn lies_inside_unit_circle(q: &Conic2) -> bool {
    q.eigenvalues().0 > 1.0 + PD_TOL
}

/// Largest generalized eigenvalue of the pencil `(outer, inner)`,
/// i.e. the largest eigenvalue of `L^-1 Q_outer L^-T` with `Q_inner = L L^T`.
fn max_generalized_eigenvalue(outer: &Conic2, inner: &Conic2) -> f64 {
    let l = inner.matrix().cholesky().expect("conics are positive definite").l();
    let l_inv = l.try_inverse().expect("Cholesky factor is invertible");
    let m = l_inv * outer.matrix() * l_inv.transpose();
    eig2(&(0.5 * (m + m.transpose()))).0[1]
}

/// `E_inner` lies in the open interior of `E_outer`.
pub fn contains(outer: &Conic2, inner: &Conic2) -> bool {
    max_generalized_eigenvalue(outer, inner) < 1.0 - PD_TOL
}

#[cfg(test)]
mod tests;
