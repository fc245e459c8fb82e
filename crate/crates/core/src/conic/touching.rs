//! Ellipses touching the unit circle and an inner conic.

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use super::{
    canonical, check_open_angle, contains, eig2, ellipse_at_angle, lies_inside_unit_circle, point2, rotation, Conic2,
    Point2,
};
use crate::error::{Error, Result};

/// Relative size below which an eigenvalue of `Q - C` counts as zero when
/// reading off the touch direction.
const KERNEL_TOL: f64 = 1e-9;

/// The ellipse `R_phi diag(1, r) R_phi^T` touching both the unit circle
/// and a given inner conic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TouchingSolution {
    pub phi: f64,
    pub r: f64,
    pub conic: Conic2,
    /// Common point with the inner conic (canonical representative).
    pub touch_point: Point2,
}

impl TouchingSolution {
    /// `|det(Q - C)|` relative to `|Q|^2`.
    pub fn det_residual(&self, q: &Conic2) -> f64 {
        let d = q.matrix() - self.conic.matrix();
        d.determinant().abs() / q.matrix().amax().powi(2)
    }

    /// Largest of the two conic residuals at the touch point.
    pub fn membership_residual(&self, q: &Conic2) -> f64 {
        let p = Vector2::from(self.touch_point);
        q.residual(&p).max(self.conic.residual(&p))
    }

    /// Angle in radians between the normals `Q p` and `C p` at the touch point.
    pub fn gradient_angle(&self, q: &Conic2) -> f64 {
        let p = Vector2::from(self.touch_point);
        let (g1, g2) = (q.matrix() * p, self.conic.matrix() * p);
        let cross = g1.x * g2.y - g1.y * g2.x;
        cross.abs().atan2(g1.dot(&g2))
    }
}

/// Solves `det(Q - R_phi diag(1, r) R_phi^T) = 0` for `r`.
///
/// With `M = R_phi^T Q R_phi` the determinant is
/// `(m11 - 1)(m22 - r) - m12^2`, linear in `r` because `m11 > 1` for `Q`
/// inside the unit circle.
pub fn touching_ellipse(q: &Conic2, phi: f64) -> Result<TouchingSolution> {
    if !lies_inside_unit_circle(q) {
        return Err(Error::NotInsideUnitCircle {
            min_eigenvalue: q.eigenvalues().0,
        });
    }
    check_open_angle(phi)?;
    let rot = rotation(phi);
    let m = rot.transpose() * q.matrix() * rot;
    let lead = m[(0, 0)] - 1.0;
    let r = m[(1, 1)] - m[(0, 1)] * m[(0, 1)] / lead;
    let conic = ellipse_at_angle(phi, r)?;
    let touch = touch_direction(&(q.matrix() - conic.matrix()))?;
    Ok(TouchingSolution {
        phi,
        r,
        conic,
        touch_point: point2(&canonical(q.point_along(&touch))),
    })
}

/// Leading coefficient `m11 - 1` of the determinant equation; nonzero for
/// every `Q` inside the unit circle.
pub(crate) fn linearity_coefficient(q: &Conic2, phi: f64) -> f64 {
    let rot = rotation(phi);
    (rot.transpose() * q.matrix() * rot)[(0, 0)] - 1.0
}

/// Kernel direction of a rank-one symmetric matrix.
fn touch_direction(d: &Matrix2<f64>) -> Result<Vector2<f64>> {
    let (lam, vecs) = eig2(d);
    let scale = lam[0].abs().max(lam[1].abs());
    let zeros: Vec<usize> = (0..2).filter(|&k| lam[k].abs() <= KERNEL_TOL * scale).collect();
    match zeros.as_slice() {
        [k] => Ok(vecs.column(*k).into_owned()),
        _ if scale == 0.0 => Err(Error::DegenerateKernel { dim: 2 }),
        other => Err(Error::DegenerateKernel { dim: other.len() }),
    }
}

fn check_ab(a: f64, b: f64, phi: f64) -> Result<()> {
    if !(a > 1.0 && b > 1.0) {
        return Err(Error::DomainError(format!("need a, b > 1, got ({a}, {b})")));
    }
    check_open_angle(phi)
}

/// Closed form of the touching parameter for `Q = diag(a, b)`:
/// `r = ((a-1) b + a (b-1) t^2) / ((a-1) + (b-1) t^2)`, `t = tan phi`.
pub fn touching_r_closed_form(a: f64, b: f64, phi: f64) -> Result<f64> {
    check_ab(a, b, phi)?;
    let t2 = phi.tan().powi(2);
    Ok(((a - 1.0) * b + a * (b - 1.0) * t2) / ((a - 1.0) + (b - 1.0) * t2))
}

/// The touching conic for `Q = diag(a, b)` written directly in `a, b, tan phi`.
pub fn touching_conic_matrix(a: f64, b: f64, phi: f64) -> Result<Conic2> {
    check_ab(a, b, phi)?;
    conic_from_tan(a, b, phi.tan())
}

/// Same formula with `tan phi` supplied directly, for rotated images
/// where the slope is `gamma tan phi`. Negative `t` mirrors the conic.
pub(crate) fn conic_from_tan(a: f64, b: f64, t: f64) -> Result<Conic2> {
    let (u, v) = (a - 1.0, b - 1.0);
    let den = u + v * t * t;
    Conic2::new((u + a * v * t * t) / den, -u * v * t / den, (u * b + v * t * t) / den)
}

/// Angle at which the ellipses `R_{+-phi} diag(1, r) R_{+-phi}^T` meet on
/// the y-axis at height `rho0`:
/// `phi = acos((2 - rho0^2 (r + 1)) / (rho0^2 (r - 1))) / 2`.
pub fn phi_for_vertical_intersection(rho0: f64, r: f64) -> Result<f64> {
    if !(rho0 > 0.0 && rho0 < 1.0) || !(r > 1.0) {
        return Err(Error::InfeasibleConfiguration(format!(
            "need 0 < rho0 < 1 and r > 1, got rho0 = {rho0}, r = {r}"
        )));
    }
    let rho2 = rho0 * rho0;
    let arg = (2.0 - rho2 * (r + 1.0)) / (rho2 * (r - 1.0));
    if !(arg > -1.0 && arg < 1.0) {
        return Err(Error::InfeasibleConfiguration(format!(
            "arccos argument {arg} outside (-1, 1) for rho0 = {rho0}, r = {r}"
        )));
    }
    Ok(0.5 * arg.acos())
}

/// Height `1 / sqrt(r cos^2 phi + sin^2 phi)` at which the ellipses at
/// angles `+-phi` cross the y-axis.
pub fn vertical_intersection(r: f64, phi: f64) -> f64 {
    let (s, c) = phi.sin_cos();
    1.0 / (r * c * c + s * s).sqrt()
}

/// An ellipse at angle `phi` touching both `outer` and `inner`.
///
/// The congruence `x -> Q_outer^{1/2} x` sends `E_outer` to the unit
/// circle, where [`touching_ellipse`] applies; the result is mapped back.
pub fn witness_touching_ellipse(inner: &Conic2, outer: &Conic2, phi: f64) -> Result<Conic2> {
    if !contains(outer, inner) {
        return Err(Error::NotNested);
    }
    let (lam, vecs) = eig2(&outer.matrix());
    let half = |p: f64| vecs * Matrix2::from_diagonal(&lam.map(|l| l.powf(p))) * vecs.transpose();
    let (h, h_inv) = (half(0.5), half(-0.5));
    let reduced = Conic2::from_matrix(&(h_inv * inner.matrix() * h_inv))?;
    let sol = touching_ellipse(&reduced, phi)?;
    Conic2::from_matrix(&(h * sol.conic.matrix() * h))
}
