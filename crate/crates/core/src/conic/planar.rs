//! Ellipses of rank-two PSD matrices in `R^n` and whether two of them
//! share a plane.
//!
//! Two planar ellipses lie in the same plane iff some ellipse crosses both
//! of them in four points. Distinct planes through the origin share at
//! most a line, and a line meets an ellipse in at most two points.

use nalgebra::Vector2;

use super::{intersect_concentric, Conic2};
use crate::error::{Error, Result};
use crate::linalg::{thin_svd, DenseMatrix, PsdMatrix, TolerancePolicy, Vector};
use crate::order::{ellipsoid_of, EllipsoidDescriptor};

/// Residual below which one plane's basis lies in the other plane.
const PLANE_TOL: f64 = 1e-8;

/// `E_A` for a rank-two PSD matrix `A`.
#[derive(Debug, Clone)]
pub struct PlanarEllipseND {
    pub source: PsdMatrix,
    ellipsoid: EllipsoidDescriptor,
}

impl PlanarEllipseND {
    pub fn new(source: PsdMatrix, policy: &TolerancePolicy) -> Result<Self> {
        if source.rank() != 2 {
            return Err(Error::RankNotTwo(source.rank()));
        }
        let ellipsoid = ellipsoid_of(&source, policy)?;
        if ellipsoid.dim != 2 {
            return Err(Error::RankNotTwo(ellipsoid.dim));
        }
        Ok(Self { source, ellipsoid })
    }

    /// `n x 2` orthonormal basis of the plane.
    pub fn basis(&self) -> &DenseMatrix {
        &self.ellipsoid.image
    }

    /// The ellipse in the coordinates of an orthonormal `basis`, i.e.
    /// `V^T A^+ V`. Only meaningful when `basis` spans this plane.
    pub fn in_coordinates(&self, basis: &DenseMatrix) -> Result<Conic2> {
        let q = basis.transpose() * &self.ellipsoid.pinv * basis;
        Conic2::new(q[(0, 0)], 0.5 * (q[(0, 1)] + q[(1, 0)]), q[(1, 1)])
    }

    pub fn contains(&self, x: &Vector) -> bool {
        self.ellipsoid.contains(x)
    }

    /// `(I - P) V` for the projector `P` onto this plane.
    fn off_plane(&self, v: &DenseMatrix) -> DenseMatrix {
        let b = self.basis();
        v - b * (b.transpose() * v)
    }
}

fn plane_residual(e: &PlanarEllipseND, f: &PlanarEllipseND) -> f64 {
    e.off_plane(f.basis()).norm()
}

/// Both planes coincide: each basis lies in the other plane.
pub fn same_plane(e1: &PlanarEllipseND, e2: &PlanarEllipseND) -> bool {
    plane_residual(e2, e1) < PLANE_TOL && plane_residual(e1, e2) < PLANE_TOL
}

/// Outcome of the four-point incidence test.
#[derive(Debug, Clone)]
pub struct IncidenceReport {
    pub coplanar: bool,
    /// Witness ellipse in the coordinates of `E1`'s plane basis.
    pub witness: Conic2,
    pub count_e1: usize,
    pub count_e2: usize,
    /// Ambient points of `E ∩ E2`.
    pub points: Vec<Vector>,
}

/// Builds an ellipse `E` in `E1`'s plane crossing `E1` in four points,
/// then counts the points of `E` that lie on `E2` in `R^n`.
///
/// In plane coordinates `E = diag(s, 1/s)` with `s` larger than every
/// eigenvalue (and `1/s` smaller than every eigenvalue) of `E1` and of
/// the restriction of `E2`, so `E - E_i` is indefinite and the two
/// conics cross.
pub fn coplanarity_by_incidence(e1: &PlanarEllipseND, e2: &PlanarEllipseND) -> Result<IncidenceReport> {
    let v1 = e1.basis();
    let q1 = e1.in_coordinates(v1)?;
    let (lo1, hi1) = q1.eigenvalues();

    // Directions of E1's plane that also lie in E2's plane.
    let svd = thin_svd(&e2.off_plane(v1));
    let shared: Vec<Vector2<f64>> = (0..2)
        .filter(|&k| svd.s[k] < PLANE_TOL)
        .map(|k| Vector2::new(svd.v[(0, k)], svd.v[(1, k)]))
        .collect();

    let restricted = if shared.len() == 2 {
        Some(e2.in_coordinates(v1)?)
    } else {
        None
    };
    let (lo2, hi2) = restricted.map_or((1.0, 1.0), |q| q.eigenvalues());
    let s = 2.0 * hi1.max(hi2).max(1.0 / lo1).max(1.0 / lo2);
    let witness = Conic2::new(s, 0.0, 1.0 / s)?;

    let count_e1 = intersect_concentric(&witness, &q1).points.len();
    let to_ambient = |c: &Vector2<f64>| v1 * Vector::from_column_slice(c.as_slice());

    let candidates: Vec<Vector> = match (shared.len(), restricted) {
        (2, Some(q2)) => intersect_concentric(&witness, &q2)
            .points
            .iter()
            .map(|p| to_ambient(&Vector2::new(p[0], p[1])))
            .collect(),
        (1, _) => {
            let p = witness.point_along(&shared[0]);
            vec![to_ambient(&p), to_ambient(&-p)]
        }
        _ => Vec::new(),
    };
    let points: Vec<Vector> = candidates.into_iter().filter(|x| e2.contains(x)).collect();
    let count_e2 = points.len();

    Ok(IncidenceReport {
        coplanar: count_e1 >= 4 && count_e2 >= 4,
        witness,
        count_e1,
        count_e2,
        points,
    })
}
