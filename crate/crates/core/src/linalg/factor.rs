//! Range inclusion and Douglas-type factorization `S = V T`.

use nalgebra::DMatrix;

use super::dense::{self, unit_floor, RANK_RTOL};
use super::space::LinearMap;
use crate::error::{Error, Result};

/// Verdict of a numerical range test together with the residual it was
/// decided on.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Inclusion {
    pub holds: bool,
    pub residual: f64,
    pub threshold: f64,
}

fn inclusion_matrix(b: &DMatrix<f64>, a: &DMatrix<f64>, tol: f64) -> Inclusion {
    let projector = dense::range_projector(a, RANK_RTOL);
    let residual = dense::spectral_norm(&(b - projector * b));
    let threshold = tol * unit_floor(dense::spectral_norm(b));
    Inclusion {
        holds: residual <= threshold,
        residual,
        threshold,
    }
}

/// `Range B ⊆ Range A`, decided by `|(I - A A^+) B| <= tol * max(1, |B|)`.
pub fn range_inclusion(b: &LinearMap, a: &LinearMap, tol: f64) -> Result<Inclusion> {
    if b.codomain().dim() != a.codomain().dim() {
        return Err(Error::mismatch(
            "range inclusion codomains",
            a.codomain().dim(),
            b.codomain().dim(),
        ));
    }
    Ok(inclusion_matrix(b.matrix(), a.matrix(), tol))
}

/// `|S - S T^+ T|`: the kernel-domination form of the factorization
/// criterion, evaluated without forming `V`.
pub fn kernel_domination_residual(s: &LinearMap, t: &LinearMap) -> Result<f64> {
    if s.domain().dim() != t.domain().dim() {
        return Err(Error::mismatch("shared domain", t.domain().dim(), s.domain().dim()));
    }
    let sm = s.matrix();
    let tm = t.matrix();
    let r = sm - sm * dense::pinv(tm, RANK_RTOL) * tm;
    Ok(dense::spectral_norm(&r))
}

/// `V` with `S = V T`, namely `V = S T^+`.
///
/// Fails when `Range S* ⊄ Range T*` (equivalently `ker T ⊄ ker S`).
pub fn douglas_factor(s: &LinearMap, t: &LinearMap, tol: f64) -> Result<LinearMap> {
    if s.domain().dim() != t.domain().dim() {
        return Err(Error::mismatch("shared domain", t.domain().dim(), s.domain().dim()));
    }
    let inc = range_inclusion(&s.adjoint(), &t.adjoint(), tol)?;
    if !inc.holds {
        return Err(Error::InclusionFailure {
            residual: inc.residual,
            threshold: inc.threshold,
        });
    }
    let v = s.matrix() * dense::pinv(t.matrix(), RANK_RTOL);
    let residual = dense::spectral_norm(&(s.matrix() - &v * t.matrix()));
    let threshold = tol * unit_floor(dense::spectral_norm(s.matrix()));
    if residual > threshold {
        return Err(Error::InclusionFailure { residual, threshold });
    }
    LinearMap::new(*t.codomain(), *s.codomain(), v)
}
