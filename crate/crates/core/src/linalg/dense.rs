//! SVD-backed helpers on raw dense matrices.
//!
//! Everything here works on `DMatrix<f64>` directly and tolerates empty
//! shapes (zero rows or zero columns), which show up naturally for the
//! zero subspace.

use nalgebra::{DMatrix, DVector};

/// Default relative singular-value cutoff for rank decisions.
pub const RANK_RTOL: f64 = 1e-10;

/// Thin SVD with singular values sorted in decreasing order.
pub(crate) struct SortedSvd {
    pub u: DMatrix<f64>,
    pub sigma: Vec<f64>,
    pub v_t: DMatrix<f64>,
}

pub(crate) fn sorted_svd(m: &DMatrix<f64>) -> SortedSvd {
    let (rows, cols) = m.shape();
    let k = rows.min(cols);
    if k == 0 {
        return SortedSvd {
            u: DMatrix::zeros(rows, 0),
            sigma: Vec::new(),
            v_t: DMatrix::zeros(0, cols),
        };
    }
    match to_faer(m).thin_svd() {
        Ok(svd) => {
            let (u, v) = (svd.U(), svd.V());
            SortedSvd {
                u: DMatrix::from_fn(rows, k, |i, j| u[(i, j)]),
                sigma: (0..k).map(|j| svd.S()[j]).collect(),
                v_t: DMatrix::from_fn(k, cols, |i, j| v[(j, i)]),
            }
        }
        Err(_) => nalgebra_svd(m),
    }
}

fn to_faer(m: &DMatrix<f64>) -> faer::Mat<f64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn nalgebra_svd(m: &DMatrix<f64>) -> SortedSvd {
    let (rows, cols) = m.shape();
    let k = rows.min(cols);
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("u requested");
    let v_t = svd.v_t.expect("v_t requested");
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let mut su = DMatrix::zeros(rows, k);
    let mut sv = DMatrix::zeros(k, cols);
    let mut sigma = Vec::with_capacity(k);
    for (dst, &src) in order.iter().enumerate() {
        su.set_column(dst, &u.column(src));
        sv.set_row(dst, &v_t.row(src));
        sigma.push(svd.singular_values[src]);
    }
    SortedSvd { u: su, sigma, v_t: sv }
}

fn cutoff(sigma: &[f64], rtol: f64) -> f64 {
    sigma.first().copied().unwrap_or(0.0) * rtol
}

fn numerical_rank(sigma: &[f64], rtol: f64) -> usize {
    let max = sigma.first().copied().unwrap_or(0.0);
    if max <= 0.0 || !max.is_finite() {
        return 0;
    }
    let c = cutoff(sigma, rtol);
    sigma.iter().take_while(|&&s| s > c).count()
}

/// Decreasing singular values (length `min(rows, cols)`).
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows().min(m.ncols()) == 0 {
        return Vec::new();
    }
    let mut s = to_faer(m)
        .singular_values()
        .unwrap_or_else(|_| m.singular_values().iter().copied().collect());
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Largest singular value; 0 for empty or zero matrices.
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Smallest singular value of `m` viewed as a map on its columns:
/// 0 whenever `m` has more columns than rows.
pub fn min_singular_value(m: &DMatrix<f64>) -> f64 {
    if m.ncols() == 0 {
        return f64::INFINITY;
    }
    if m.nrows() < m.ncols() {
        return 0.0;
    }
    singular_values(m).last().copied().unwrap_or(0.0)
}

pub fn rank(m: &DMatrix<f64>, rtol: f64) -> usize {
    numerical_rank(&singular_values(m), rtol)
}

/// Moore-Penrose inverse with singular values below `rtol * sigma_max`
/// treated as zero.
pub fn pinv(m: &DMatrix<f64>, rtol: f64) -> DMatrix<f64> {
    let (rows, cols) = m.shape();
    let svd = sorted_svd(m);
    let r = numerical_rank(&svd.sigma, rtol);
    let mut g = DMatrix::zeros(cols, rows);
    for k in 0..r {
        let v = svd.v_t.row(k).transpose();
        let u = svd.u.column(k);
        g += (v * u.transpose()) / svd.sigma[k];
    }
    g
}

/// Orthonormal basis (as columns) of the column space.
pub fn range_basis(m: &DMatrix<f64>, rtol: f64) -> DMatrix<f64> {
    let svd = sorted_svd(m);
    let r = numerical_rank(&svd.sigma, rtol);
    svd.u.columns(0, r).into_owned()
}

/// Orthonormal basis (as columns) of the null space.
pub fn kernel_basis(m: &DMatrix<f64>, rtol: f64) -> DMatrix<f64> {
    let (rows, cols) = m.shape();
    if cols == 0 {
        return DMatrix::zeros(0, 0);
    }
    // Pad to at least square so the SVD returns a full right basis.
    let padded = if rows < cols {
        let mut p = DMatrix::zeros(cols, cols);
        p.rows_mut(0, rows).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = sorted_svd(&padded);
    let r = numerical_rank(&svd.sigma, rtol);
    svd.v_t.rows(r, cols - r).transpose()
}

/// Orthogonal projector onto the column space.
pub fn range_projector(m: &DMatrix<f64>, rtol: f64) -> DMatrix<f64> {
    let b = range_basis(m, rtol);
    &b * b.transpose()
}

pub(crate) fn identity(n: usize) -> DMatrix<f64> {
    DMatrix::identity(n, n)
}

/// `max(1, x)`, the scale used by every residual threshold.
pub fn unit_floor(x: f64) -> f64 {
    x.max(1.0)
}

pub(crate) fn column_vec(m: &DMatrix<f64>, j: usize) -> DVector<f64> {
    m.column(j).into_owned()
}
