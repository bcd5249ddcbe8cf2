//! Small dense helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector, Matrix2};

/// Singular values sorted descending with matching left/right vectors.
pub struct SortedSvd {
    pub u: DMatrix<f64>,
    pub s: Vec<f64>,
    pub v: DMatrix<f64>,
}

pub fn svd_sorted(a: &DMatrix<f64>) -> SortedSvd {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return SortedSvd { u: DMatrix::zeros(m, 0), s: vec![], v: DMatrix::zeros(n, 0) };
    }
    // Pad to a square-ish shape so that full V is available when m < n.
    let svd = if m >= n {
        a.clone().svd(true, true)
    } else {
        let mut padded = DMatrix::zeros(n, n);
        padded.view_mut((0, 0), (m, n)).copy_from(a);
        padded.svd(true, true)
    };
    let u = svd.u.unwrap();
    let vt = svd.v_t.unwrap();
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let k = order.len();
    let s = order.iter().map(|&i| svd.singular_values[i]).collect();
    let urows = m;
    let mut us = DMatrix::zeros(urows, k);
    let mut vs = DMatrix::zeros(n, k);
    for (c, &i) in order.iter().enumerate() {
        us.set_column(c, &u.column(i).rows(0, urows));
        vs.set_column(c, &vt.row(i).transpose());
    }
    SortedSvd { u: us, s, v: vs }
}

/// Nearest orthogonal matrix (polar factor).
pub fn orthonormalize(a: &DMatrix<f64>) -> DMatrix<f64> {
    let svd = a.clone().svd(true, true);
    svd.u.unwrap() * svd.v_t.unwrap()
}

/// Orthonormal basis of the orthogonal complement of the columns of `q`
/// (assumed orthonormal), completed from the coordinate axes.
pub fn complete_basis(q: &DMatrix<f64>, dim: usize) -> DMatrix<f64> {
    let k = q.ncols();
    let mut cols: Vec<DVector<f64>> = Vec::new();
    let mut basis = q.clone();
    for axis in 0..dim {
        if cols.len() + k == dim {
            break;
        }
        let mut e = DVector::zeros(dim);
        e[axis] = 1.0;
        for _ in 0..2 {
            let proj = basis.transpose() * &e;
            e -= &basis * proj;
        }
        let n = e.norm();
        if n > 1e-6 {
            e /= n;
            let nc = basis.ncols();
            basis = basis.insert_column(nc, 0.0);
            let last = basis.ncols() - 1;
            basis.set_column(last, &e);
            cols.push(e);
        }
    }
    DMatrix::from_columns(&cols)
}

/// Operator 2-norm.
pub fn op_norm(a: &DMatrix<f64>) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.clone().singular_values().max()
}

pub fn to_dmatrix2(a: &Matrix2<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(2, 2, |i, j| a[(i, j)])
}

pub fn rot90() -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0])
}

pub fn rotation2(theta: f64) -> DMatrix<f64> {
    let (s, c) = theta.sin_cos();
    DMatrix::from_row_slice(2, 2, &[c, -s, s, c])
}

/// Least-squares solve `x a = b` for `x`, returning `(x, relative residual)`.
pub fn right_lstsq(a: &DMatrix<f64>, b: &DMatrix<f64>) -> (DMatrix<f64>, f64) {
    let at = a.transpose();
    let bt = b.transpose();
    let svd = at.clone().svd(true, true);
    let xt = svd.solve(&bt, 1e-13 * svd.singular_values.max()).unwrap_or_else(|_| DMatrix::zeros(a.nrows(), b.nrows()));
    let x = xt.transpose();
    let scale = b.norm().max(a.norm()).max(1e-300);
    let res = (&x * a - b).norm() / scale;
    (x, res)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sorted_svd_wide_matrix() {
        let a = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 0.0, 3.0, 0.0]);
        let s = svd_sorted(&a);
        assert!((s.s[0] - 3.0).abs() < 1e-14);
        assert!((s.s[1] - 1.0).abs() < 1e-14);
        assert_eq!(s.v.nrows(), 3);
        let recon = &s.u.columns(0, 2) * DMatrix::from_diagonal(&DVector::from_vec(s.s[..2].to_vec())) * s.v.columns(0, 2).transpose();
        assert!((recon - a).norm() < 1e-13);
    }

    #[test]
    fn completion_is_orthonormal() {
        let q = DMatrix::from_column_slice(3, 1, &[1.0 / 2f64.sqrt(), 1.0 / 2f64.sqrt(), 0.0]);
        let c = complete_basis(&q, 3);
        assert_eq!(c.ncols(), 2);
        let full = DMatrix::from_fn(3, 3, |i, j| if j == 0 { q[(i, 0)] } else { c[(i, j - 1)] });
        assert!((full.transpose() * &full - DMatrix::identity(3, 3)).norm() < 1e-14);
    }
}
