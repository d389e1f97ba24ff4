//! Moore-Penrose and complement-parameterized generalized inverses.

use nalgebra::DMatrix;

use super::dense::{self, unit_floor, RANK_RTOL};
use super::space::LinearMap;
use crate::error::{Error, Result};

/// Residual budget for the contract identities of a generalized inverse.
pub const INVERSE_IDENTITY_TOL: f64 = 1e-9;
/// Idempotence budget for projections.
pub const PROJECTION_TOL: f64 = 1e-10;

/// Moore-Penrose inverse of `a` (codomain -> domain), with singular values
/// below `tol * sigma_max` treated as zero.
pub fn moore_penrose(a: &LinearMap, tol: f64) -> LinearMap {
    LinearMap::new(*a.codomain(), *a.domain(), dense::pinv(a.matrix(), tol))
        .expect("pseudo-inverse shape is the transposed shape")
}

/// Residuals of the four Penrose identities, in the order
/// `AGA = A`, `GAG = G`, `(AG)^T = AG`, `(GA)^T = GA`.
///
/// The first two are scaled by `max(1, |A|)` and `max(1, |G|)`
/// respectively; the symmetry residuals are absolute.
pub fn penrose_residuals(a: &DMatrix<f64>, g: &DMatrix<f64>) -> [f64; 4] {
    let ag = a * g;
    let ga = g * a;
    [
        dense::spectral_norm(&(&ag * a - a)) / unit_floor(dense::spectral_norm(a)),
        dense::spectral_norm(&(&ga * g - g)) / unit_floor(dense::spectral_norm(g)),
        dense::spectral_norm(&(ag.transpose() - &ag)),
        dense::spectral_norm(&(ga.transpose() - &ga)),
    ]
}

fn idempotence_residual(m: &DMatrix<f64>) -> f64 {
    dense::spectral_norm(&(m * m - m)) / unit_floor(dense::spectral_norm(m))
}

pub fn is_projection(m: &DMatrix<f64>, tol: f64) -> Result<()> {
    let r = idempotence_residual(m);
    if r > tol {
        return Err(Error::NotProjection { residual: r });
    }
    Ok(())
}

/// Projections `P` on the domain (onto `ker A`) and `Q` on the codomain
/// (onto `Range A`).
#[derive(Clone, Debug, PartialEq)]
pub struct ComplementPair {
    kernel_projection: LinearMap,
    range_projection: LinearMap,
}

impl ComplementPair {
    pub fn new(kernel_projection: LinearMap, range_projection: LinearMap) -> Result<Self> {
        for (name, m) in [("P", &kernel_projection), ("Q", &range_projection)] {
            if m.domain().dim() != m.codomain().dim() {
                return Err(Error::Shape(format!("{name} must be square")));
            }
            is_projection(m.matrix(), PROJECTION_TOL)?;
        }
        Ok(ComplementPair {
            kernel_projection,
            range_projection,
        })
    }

    /// Orthogonal projections onto `ker A` and `Range A`: the Moore-Penrose case.
    pub fn orthogonal(a: &LinearMap, tol: f64) -> Self {
        let m = a.matrix();
        let n = m.ncols();
        let p = dense::identity(n) - dense::range_projector(&m.transpose(), tol);
        let q = dense::range_projector(m, tol);
        ComplementPair {
            kernel_projection: LinearMap::new(*a.domain(), *a.domain(), p).expect("square"),
            range_projection: LinearMap::new(*a.codomain(), *a.codomain(), q).expect("square"),
        }
    }

    /// `P`, projecting onto the kernel.
    pub fn kernel_projection(&self) -> &LinearMap {
        &self.kernel_projection
    }

    /// `Q`, projecting onto the range.
    pub fn range_projection(&self) -> &LinearMap {
        &self.range_projection
    }
}

fn mismatch(identity: &str, residual: f64) -> Error {
    Error::ComplementMismatch {
        identity: identity.to_string(),
        residual,
    }
}

/// Rank of a projection: the number of singular values above 1/2.
fn projection_rank(p: &DMatrix<f64>) -> usize {
    dense::singular_values(p).iter().filter(|&&s| s > 0.5).count()
}

/// Generalized inverse `G` with `GA = I - P` and `AG = Q`.
///
/// `G` inverts `A` restricted to `Range(I - P)` on `Range Q` and vanishes
/// on `Range(I - Q)`; it is assembled as `(I - P) A^+ Q`.
pub fn generalized_inverse(a: &LinearMap, complements: &ComplementPair, tol: f64) -> Result<LinearMap> {
    let m = a.matrix();
    let (rows, cols) = m.shape();
    let p = complements.kernel_projection.matrix();
    let q = complements.range_projection.matrix();
    if p.nrows() != cols {
        return Err(Error::mismatch("kernel projection dim", cols, p.nrows()));
    }
    if q.nrows() != rows {
        return Err(Error::mismatch("range projection dim", rows, q.nrows()));
    }

    let a_norm = unit_floor(dense::spectral_norm(m));
    let ap = dense::spectral_norm(&(m * p)) / (a_norm * unit_floor(dense::spectral_norm(p)));
    if ap > INVERSE_IDENTITY_TOL {
        return Err(mismatch("A P = 0 (Range P inside ker A)", ap));
    }
    let qa = dense::spectral_norm(&(q * m - m)) / (a_norm * unit_floor(dense::spectral_norm(q)));
    if qa > INVERSE_IDENTITY_TOL {
        return Err(mismatch("Q A = A (Range A inside Range Q)", qa));
    }
    let rank_a = dense::rank(m, tol);
    let rank_p = projection_rank(p);
    let rank_q = projection_rank(q);
    if rank_p + rank_a != cols {
        return Err(mismatch(
            "rank P = dim - rank A (Range P equals ker A)",
            (rank_p as f64 - (cols - rank_a) as f64).abs(),
        ));
    }
    if rank_q != rank_a {
        return Err(mismatch(
            "rank Q = rank A (Range Q equals Range A)",
            (rank_q as f64 - rank_a as f64).abs(),
        ));
    }

    let g = (dense::identity(cols) - p) * dense::pinv(m, tol) * q;
    LinearMap::new(*a.codomain(), *a.domain(), g)
}

/// Residuals of the generalized-inverse contract:
/// `AGA = A`, `GAG = G`, `GA = I - P`, `AG = Q`.
pub fn generalized_inverse_residuals(a: &DMatrix<f64>, g: &DMatrix<f64>, complements: &ComplementPair) -> [f64; 4] {
    let p = complements.kernel_projection.matrix();
    let q = complements.range_projection.matrix();
    let n = a.ncols();
    let ga = g * a;
    let ag = a * g;
    [
        dense::spectral_norm(&(&ag * a - a)) / unit_floor(dense::spectral_norm(a)),
        dense::spectral_norm(&(&ga * g - g)) / unit_floor(dense::spectral_norm(g)),
        dense::spectral_norm(&(ga - (dense::identity(n) - p))),
        dense::spectral_norm(&(ag - q)),
    ]
}

/// Checks on a pair `(T, S)` with `TST = T` and `STS = S`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectionReport {
    pub tst_residual: f64,
    pub sts_residual: f64,
    pub ts_idempotence: f64,
    pub st_idempotence: f64,
    pub rank_t: usize,
    pub rank_s: usize,
    pub rank_ts: usize,
    pub rank_st: usize,
}

impl ProjectionReport {
    pub fn passes(&self) -> bool {
        self.ts_idempotence <= PROJECTION_TOL
            && self.st_idempotence <= PROJECTION_TOL
            && self.rank_ts == self.rank_t
            && self.rank_st == self.rank_s
    }
}

pub fn projection_checks(t: &LinearMap, s: &LinearMap) -> Result<ProjectionReport> {
    let tm = t.matrix();
    let sm = s.matrix();
    if sm.shape() != (tm.ncols(), tm.nrows()) {
        return Err(Error::Shape(format!(
            "S must be {}x{} to pair with T",
            tm.ncols(),
            tm.nrows()
        )));
    }
    let ts = tm * sm;
    let st = sm * tm;
    Ok(ProjectionReport {
        tst_residual: dense::spectral_norm(&(&ts * tm - tm)) / unit_floor(dense::spectral_norm(tm)),
        sts_residual: dense::spectral_norm(&(&st * sm - sm)) / unit_floor(dense::spectral_norm(sm)),
        ts_idempotence: idempotence_residual(&ts),
        st_idempotence: idempotence_residual(&st),
        rank_t: dense::rank(tm, RANK_RTOL),
        rank_s: dense::rank(sm, RANK_RTOL),
        rank_ts: dense::rank(&ts, RANK_RTOL),
        rank_st: dense::rank(&st, RANK_RTOL),
    })
}
