//! The planar rigidity map and the four-ellipse configuration.
//!
//! A bijection of the plane that keeps concentric ellipses concentric
//! ellipses and acts on the unit circle by `x -> Tx/|Tx|`, `T = diag(mu,
//! lambda)`, is pinned down by two numbers: `gamma = lambda / mu` and the
//! parameter `a0` of the image `a0 x^2 + b0 y^2 = 1` of the circle of
//! radius 1/2. On that circle's interior it must be
//!
//! ```text
//! phi_hat(x, y) = sqrt(3) (x, gamma y) / sqrt((a0 - 1)(1 - x^2 - y^2) + 3 (x^2 + gamma^2 y^2))
//! ```
//!
//! Surjectivity forces both `a0 <= 4, a0 <= 1 + 3 gamma^2` and the reverse
//! inequalities, hence `a0 = 4, gamma = 1` and `phi_hat` is the identity.

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use super::touching::{conic_from_tan, phi_for_vertical_intersection};
use super::{canonical, intersect_concentric, point2, Conic2, IntersectionKind, Point2, StandardEllipse};
use crate::error::{Error, Result};

/// Tolerance on the surjectivity inequalities.
const SURJECT_TOL: f64 = 1e-12;

fn check_params(a0: f64, gamma: f64) -> Result<()> {
    if a0 > 1.0 && gamma > 0.0 && a0.is_finite() && gamma.is_finite() {
        Ok(())
    } else {
        Err(Error::DomainError(format!(
            "need a0 > 1 and gamma > 0, got a0 = {a0}, gamma = {gamma}"
        )))
    }
}

/// `b0 = (a0 - 1) / gamma^2 + 1`, the partner of `a0` on the base ellipse.
pub fn base_b0(a0: f64, gamma: f64) -> f64 {
    (a0 - 1.0) / (gamma * gamma) + 1.0
}

/// Parameters of the standard ellipse touching the four rotated images at
/// slope `t = tan phi`: `a = a0 (1 + t^2) - t^2`,
/// `b = (a0 - 1)(1 + t^2) / gamma^2 + 1`.
pub fn touching_params_ab(a0: f64, gamma: f64, t: f64) -> Result<(f64, f64)> {
    check_params(a0, gamma)?;
    if !(t > 0.0) {
        return Err(Error::DomainError(format!("need t > 0, got {t}")));
    }
    let s = 1.0 + t * t;
    Ok((a0 * s - t * t, (a0 - 1.0) * s / (gamma * gamma) + 1.0))
}

/// Image of the circle of radius `1/sqrt(r)`, `r >= 4`:
/// `a = (a0 - 1)(r - 1)/3 + 1`, `b = (a0 - 1)(r - 1)/(3 gamma^2) + 1`.
pub fn image_of_circle(a0: f64, gamma: f64, r: f64) -> Result<StandardEllipse> {
    check_params(a0, gamma)?;
    if !(r >= 4.0) {
        return Err(Error::DomainError(format!(
            "circle radius must be at most 1/2 (r >= 4), got r = {r}"
        )));
    }
    let k = (a0 - 1.0) * (r - 1.0) / 3.0;
    StandardEllipse::new(k + 1.0, k / (gamma * gamma) + 1.0)
}

/// The rigidity map, canonical representative.
pub fn phi_hat(a0: f64, gamma: f64, p: Point2) -> Result<Point2> {
    check_params(a0, gamma)?;
    let [x, y] = p;
    let radicand = (a0 - 1.0) * (1.0 - x * x - y * y) + 3.0 * (x * x + gamma * gamma * y * y);
    if !(radicand > 0.0) {
        return Err(Error::ImaginaryDenominator {
            radicand,
            constraint: format!(
                "(a0 - 1)(1 - x^2 - y^2) + 3(x^2 + gamma^2 y^2) > 0; always true inside the unit disk, and on the whole plane iff a0 <= 4 and a0 <= 1 + 3 gamma^2 (a0 = {a0}, gamma = {gamma})"
            ),
        });
    }
    let k = 3.0_f64.sqrt() / radicand.sqrt();
    Ok(point2(&canonical(Vector2::new(k * x, k * gamma * y))))
}

/// Preimage under [`phi_hat`]:
/// `x^2 = (a0 - 1) gamma^2 u^2 / D`, `y^2 = (a0 - 1) v^2 / D` with
/// `D = (a0 - 4) gamma^2 u^2 + (a0 - 1 - 3 gamma^2) v^2 + 3 gamma^2`,
/// signs taken from `(u, v)` (the map preserves rays).
pub fn phi_hat_inverse(a0: f64, gamma: f64, p: Point2) -> Result<Point2> {
    check_params(a0, gamma)?;
    let [u, v] = p;
    let g2 = gamma * gamma;
    let den = (a0 - 4.0) * g2 * u * u + (a0 - 1.0 - 3.0 * g2) * v * v + 3.0 * g2;
    if !(den > 0.0) {
        return Err(Error::NotInRange {
            denominator: den,
            constraint: format!(
                "(a0 - 4) gamma^2 u^2 + (a0 - 1 - 3 gamma^2) v^2 + 3 gamma^2 > 0; the image covers the unit disk only when a0 >= 4 and a0 >= 1 + 3 gamma^2 (a0 = {a0}, gamma = {gamma})"
            ),
        });
    }
    let k = ((a0 - 1.0) / den).sqrt();
    Ok(point2(&canonical(Vector2::new(k * gamma * u, k * v))))
}

/// Coefficients of `A x^2 + B xy + C y^2 = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadricCoeffs {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl QuadricCoeffs {
    pub fn residual(&self, p: Point2) -> f64 {
        let [x, y] = p;
        (self.a * x * x + self.b * x * y + self.c * y * y - 1.0).abs()
    }
}

/// [`phi_hat`] maps the quadric `a x^2 + b xy + c y^2 = 1` onto
/// `A x^2 + B xy + C y^2 = 1` with `A = (a (a0 - 1) - a0 + 4) / 3`,
/// `B = (a0 - 1) b / (3 gamma)`, `C = (a0 - 1)(c - 1) / (3 gamma^2) + 1`.
pub fn quadric_image_coeffs(a0: f64, gamma: f64, a: f64, b: f64, c: f64) -> Result<QuadricCoeffs> {
    check_params(a0, gamma)?;
    Ok(QuadricCoeffs {
        a: (a * (a0 - 1.0) - a0 + 4.0) / 3.0,
        b: (a0 - 1.0) * b / (3.0 * gamma),
        c: (a0 - 1.0) * (c - 1.0) / (3.0 * gamma * gamma) + 1.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurjectivityReport {
    /// `a0 <= 4` and `a0 <= 1 + 3 gamma^2`: `phi_hat` is defined on the whole plane.
    pub upper_bounds_hold: bool,
    /// `a0 >= 4` and `a0 >= 1 + 3 gamma^2`: the image covers the disk.
    pub lower_bounds_hold: bool,
    /// Both, i.e. `a0 = 4` and `gamma = 1`.
    pub rigid: bool,
}

pub fn surjectivity_constraints(a0: f64, gamma: f64) -> Result<SurjectivityReport> {
    check_params(a0, gamma)?;
    let bound = 1.0 + 3.0 * gamma * gamma;
    let upper = a0 <= 4.0 + SURJECT_TOL && a0 <= bound + SURJECT_TOL;
    let lower = a0 >= 4.0 - SURJECT_TOL && a0 >= bound - SURJECT_TOL;
    Ok(SurjectivityReport {
        upper_bounds_hold: upper,
        lower_bounds_hold: lower,
        rigid: upper && lower,
    })
}

/// Images of four ellipses placed symmetrically about both axes, their
/// common touching standard ellipse, and the incidence checks that tie
/// them to the base ellipse `a0 x^2 + b0 y^2 = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourEllipseConfiguration {
    pub rho0: f64,
    pub r: f64,
    pub gamma: f64,
    /// Angle of the preimage ellipses.
    pub phi: f64,
    pub base: StandardEllipse,
    pub touching: StandardEllipse,
    /// Images at angles `-+ atan(gamma tan phi)` (E1, E2) and
    /// `-+ atan(gamma cot phi)` (E3, E4).
    pub e1: Conic2,
    pub e2: Conic2,
    pub e3: Conic2,
    pub e4: Conic2,
    /// Common point of E1, E2 on the y-axis.
    pub vertical_point: Point2,
    /// Common point of E3, E4 on the x-axis.
    pub horizontal_point: Point2,
    /// Largest base-ellipse residual of the two points.
    pub incidence_residual: f64,
    /// Largest determinant residual `|det(E_i - touching)|` relative to `|E_i|^2`.
    pub tangency_residual: f64,
}

impl FourEllipseConfiguration {
    pub fn images(&self) -> [Conic2; 4] {
        [self.e1, self.e2, self.e3, self.e4]
    }

    /// The six conics of the picture: four images, the touching ellipse
    /// and the base ellipse.
    pub fn conics(&self) -> Vec<Conic2> {
        let mut all = self.images().to_vec();
        all.push(self.touching.conic());
        all.push(self.base.conic());
        all
    }
}

/// Common point of two mirror-image conics on the y-axis (`vertical`)
/// or the x-axis.
fn axis_point(e: &Conic2, f: &Conic2, vertical: bool) -> Result<Vector2<f64>> {
    let cut = intersect_concentric(e, f);
    if cut.kind != IntersectionKind::Crossing {
        return Err(Error::InfeasibleConfiguration(format!(
            "mirror images meet as {:?}",
            cut.kind
        )));
    }
    let off_axis = |p: &Vector2<f64>| if vertical { p.x.abs() } else { p.y.abs() };
    Ok(cut
        .representatives()
        .min_by(|p, q| off_axis(p).total_cmp(&off_axis(q)))
        .expect("crossing has points"))
}

pub fn four_ellipse_configuration(rho0: f64, r: f64, gamma: f64, a0: f64) -> Result<FourEllipseConfiguration> {
    check_params(a0, gamma)?;
    let phi = phi_for_vertical_intersection(rho0, r)?;
    let t = phi.tan();
    let (a, b) = touching_params_ab(a0, gamma, t)?;
    let touching = StandardEllipse::new(a, b)?;
    let base = StandardEllipse::new(a0, base_b0(a0, gamma))?;

    let (tt, tc) = (gamma * t, gamma / t);
    let e1 = conic_from_tan(a, b, tt)?;
    let e2 = conic_from_tan(a, b, -tt)?;
    let e3 = conic_from_tan(a, b, tc)?;
    let e4 = conic_from_tan(a, b, -tc)?;

    let vertical = axis_point(&e1, &e2, true)?;
    let horizontal = axis_point(&e3, &e4, false)?;
    let base_conic = base.conic();
    let incidence_residual = base_conic.residual(&vertical).max(base_conic.residual(&horizontal));

    let tangency_residual = [e1, e2, e3, e4]
        .iter()
        .map(|e| (e.matrix() - touching.conic().matrix()).determinant().abs() / e.matrix().amax().powi(2))
        .fold(0.0, f64::max);

    Ok(FourEllipseConfiguration {
        rho0,
        r,
        gamma,
        phi,
        base,
        touching,
        e1,
        e2,
        e3,
        e4,
        vertical_point: point2(&vertical),
        horizontal_point: point2(&horizontal),
        incidence_residual,
        tangency_residual,
    })
}
