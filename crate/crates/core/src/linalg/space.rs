use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// A norm exponent `p` in `[1, inf]`.
///
/// The conjugate exponent is stored alongside the value so that
/// `dual` is an exact involution; `p = inf` is a distinguished value
/// paired with `p' = 1`.
#[derive(Clone, Copy)]
pub struct Exponent {
    value: f64,
    conjugate: f64,
}

impl Exponent {
    pub const ONE: Exponent = Exponent {
        value: 1.0,
        conjugate: f64::INFINITY,
    };
    pub const TWO: Exponent = Exponent {
        value: 2.0,
        conjugate: 2.0,
    };
    pub const INFINITY: Exponent = Exponent {
        value: f64::INFINITY,
        conjugate: 1.0,
    };

    pub fn new(p: f64) -> Result<Self> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::InvalidExponent(p));
        }
        Ok(if p == 1.0 {
            Self::ONE
        } else if p.is_infinite() {
            Self::INFINITY
        } else if p == 2.0 {
            Self::TWO
        } else {
            Exponent {
                value: p,
                conjugate: p / (p - 1.0),
            }
        })
    }

    pub fn value(self) -> f64 {
        self.value
    }

    pub fn dual(self) -> Self {
        Exponent {
            value: self.conjugate,
            conjugate: self.value,
        }
    }

    pub fn is_infinite(self) -> bool {
        self.value.is_infinite()
    }

    pub fn is_one(self) -> bool {
        self.value == 1.0
    }

    pub fn is_two(self) -> bool {
        self.value == 2.0
    }

    /// `1/p`, with `1/inf = 0`.
    pub fn reciprocal(self) -> f64 {
        if self.is_infinite() {
            0.0
        } else {
            1.0 / self.value
        }
    }

    /// l^p norm of a slice.
    pub fn norm(self, v: &[f64]) -> f64 {
        lp_norm(v, self)
    }
}

impl PartialEq for Exponent {
    fn eq(&self, other: &Self) -> bool {
        self.value == other.value
    }
}

impl fmt::Debug for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            write!(f, "inf")
        } else {
            write!(f, "{}", self.value)
        }
    }
}

/// l^p norm of a slice, scaled to avoid overflow for large `p`.
pub(crate) fn lp_norm(v: &[f64], p: Exponent) -> f64 {
    let max = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if p.is_infinite() || max == 0.0 {
        return max;
    }
    if p.is_one() {
        return v.iter().map(|x| x.abs()).sum();
    }
    if p.is_two() {
        return max * v.iter().map(|x| (x / max).powi(2)).sum::<f64>().sqrt();
    }
    let e = p.value();
    max * v.iter().map(|x| (x.abs() / max).powf(e)).sum::<f64>().powf(1.0 / e)
}

/// Coordinate space `R^dim` with the l^p norm: the model of `X`, `X*`
/// and of coefficient spaces.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PNormSpace {
    dim: usize,
    p: Exponent,
}

impl PNormSpace {
    pub fn new(dim: usize, p: Exponent) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        Ok(PNormSpace { dim, p })
    }

    pub fn euclidean(dim: usize) -> Result<Self> {
        Self::new(dim, Exponent::TWO)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn p(&self) -> Exponent {
        self.p
    }

    pub fn dual(&self) -> Self {
        PNormSpace {
            dim: self.dim,
            p: self.p.dual(),
        }
    }

    pub(crate) fn check(&self, v: &DVector<f64>, context: &str) -> Result<()> {
        if v.len() != self.dim {
            return Err(Error::mismatch(context, self.dim, v.len()));
        }
        Ok(())
    }
}

pub fn vector_norm(space: &PNormSpace, v: &DVector<f64>) -> Result<f64> {
    space.check(v, "vector length")?;
    Ok(lp_norm(v.as_slice(), space.p))
}

/// Dense real matrix with attached domain and codomain spaces.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearMap {
    domain: PNormSpace,
    codomain: PNormSpace,
    matrix: DMatrix<f64>,
}

impl LinearMap {
    pub fn new(domain: PNormSpace, codomain: PNormSpace, matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() != codomain.dim() {
            return Err(Error::mismatch("matrix rows (codomain dim)", codomain.dim(), matrix.nrows()));
        }
        if matrix.ncols() != domain.dim() {
            return Err(Error::mismatch("matrix columns (domain dim)", domain.dim(), matrix.ncols()));
        }
        Ok(LinearMap {
            domain,
            codomain,
            matrix,
        })
    }

    pub fn identity(space: PNormSpace) -> Self {
        LinearMap {
            domain: space,
            codomain: space,
            matrix: DMatrix::identity(space.dim(), space.dim()),
        }
    }

    pub fn zero(domain: PNormSpace, codomain: PNormSpace) -> Self {
        LinearMap {
            domain,
            codomain,
            matrix: DMatrix::zeros(codomain.dim(), domain.dim()),
        }
    }

    pub fn domain(&self) -> &PNormSpace {
        &self.domain
    }

    pub fn codomain(&self) -> &PNormSpace {
        &self.codomain
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }

    pub fn apply(&self, v: &DVector<f64>) -> Result<DVector<f64>> {
        self.domain.check(v, "operator input")?;
        Ok(&self.matrix * v)
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &LinearMap) -> Result<LinearMap> {
        if inner.codomain.dim() != self.domain.dim() {
            return Err(Error::mismatch(
                "composition (inner codomain vs outer domain)",
                self.domain.dim(),
                inner.codomain.dim(),
            ));
        }
        Ok(LinearMap {
            domain: inner.domain,
            codomain: self.codomain,
            matrix: &self.matrix * &inner.matrix,
        })
    }

    /// Banach adjoint: `codomain* -> domain*` with the transposed matrix.
    pub fn adjoint(&self) -> LinearMap {
        LinearMap {
            domain: self.codomain.dual(),
            codomain: self.domain.dual(),
            matrix: self.matrix.transpose(),
        }
    }

    /// Same matrix, re-attached to other spaces of matching dimension.
    pub fn with_spaces(&self, domain: PNormSpace, codomain: PNormSpace) -> Result<LinearMap> {
        LinearMap::new(domain, codomain, self.matrix.clone())
    }
}
