//! One-sided Jacobi SVD.
//!
//! Used instead of nalgebra's bidiagonal SVD, which can return an
//! inaccurate factorization for rank-deficient inputs whose trailing
//! singular values are exactly zero. Jacobi rotations are slower but
//! accurate to a few ulps of `sigma_max`, which is what the rank cutoff
//! relies on. Matrices here are small.

use super::DenseMatrix;

const MAX_SWEEPS: usize = 80;

pub(crate) struct ThinSvd {
    /// `rows x k` left singular vectors; columns with zero singular value are zero.
    pub u: DenseMatrix,
    /// `k = min(rows, cols)` singular values, descending.
    pub s: Vec<f64>,
    /// `cols x k` right singular vectors.
    pub v: DenseMatrix,
}

pub(crate) fn thin_svd(m: &DenseMatrix) -> ThinSvd {
    if m.nrows() < m.ncols() {
        let t = jacobi(m.transpose());
        return ThinSvd { u: t.v, s: t.s, v: t.u };
    }
    jacobi(m.clone())
}

/// Requires `rows >= cols`.
fn jacobi(mut u: DenseMatrix) -> ThinSvd {
    let (rows, n) = u.shape();
    let mut v = DenseMatrix::identity(n, n);
    let tol = f64::EPSILON * rows.max(1) as f64;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..n {
            for j in (i + 1)..n {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                for r in 0..rows {
                    let (x, y) = (u[(r, i)], u[(r, j)]);
                    alpha += x * x;
                    beta += y * y;
                    gamma += x * y;
                }
                if alpha == 0.0 || beta == 0.0 || gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut u, i, j, c, s);
                rotate(&mut v, i, j, c, s);
            }
        }
        if !rotated {
            break;
        }
    }
    let norms: Vec<f64> = (0..n).map(|j| u.column(j).norm()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]));
    let s: Vec<f64> = order.iter().map(|&k| norms[k]).collect();
    let u_sorted = DenseMatrix::from_fn(rows, n, |r, c| {
        let k = order[c];
        if norms[k] > 0.0 {
            u[(r, k)] / norms[k]
        } else {
            0.0
        }
    });
    let v_sorted = DenseMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    ThinSvd {
        u: u_sorted,
        s,
        v: v_sorted,
    }
}

fn rotate(m: &mut DenseMatrix, i: usize, j: usize, c: f64, s: f64) {
    for r in 0..m.nrows() {
        let (x, y) = (m[(r, i)], m[(r, j)]);
        m[(r, i)] = c * x - s * y;
        m[(r, j)] = s * x + c * y;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reconstructs_rank_deficient_input() {
        let g1 = DenseMatrix::from_row_slice(5, 2, &[1.0, 2.0, -0.5, 0.3, 2.2, -1.0, 0.0, 4.0, 1.5, 1.5]);
        let g2 = DenseMatrix::from_row_slice(2, 5, &[0.2, -1.0, 3.0, 0.5, 0.0, 1.0, 1.0, -2.0, 0.7, 0.4]);
        for m in [&g1 * &g2, (&g1 * &g2).transpose(), g1.clone(), g2.clone()] {
            let svd = thin_svd(&m);
            let d = DenseMatrix::from_diagonal(&nalgebra::DVector::from_vec(svd.s.clone()));
            let back = &svd.u * d * svd.v.transpose();
            assert!((back - &m).amax() < 1e-13 * m.amax().max(1.0));
            assert!(svd.s.windows(2).all(|w| w[0] >= w[1]));
        }
    }
}
