//! Triangular coefficient arrays and approximative X_d-Bessel families.
//!
//! A family `{h_{n,i}}` is stored level by level: level `n` is an
//! `m_n x d` matrix whose rows are the functionals `h_{n,1..m_n}`.
//! The coefficient space `X_d` is realized by one of two concrete norms
//! on triangular arrays (see [`NormMode`]).

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{
    dense, lp_norm, matrix_lower_bound, matrix_norm, BoundEstimate, BoundMethod, Exponent, LinearMap,
    PNormSpace,
};
use crate::random;

/// Level sizes `m_1 <= m_2 <= ... <= m_N`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TriangularScheme {
    level_sizes: Vec<usize>,
}

impl TriangularScheme {
    pub fn new(level_sizes: Vec<usize>) -> Result<Self> {
        if level_sizes.is_empty() {
            return Err(Error::InvalidScheme("at least one level is required".into()));
        }
        if let Some(n) = level_sizes.iter().position(|&m| m == 0) {
            return Err(Error::InvalidScheme(format!("level {} has size 0", n + 1)));
        }
        if let Some(n) = level_sizes.windows(2).position(|w| w[1] < w[0]) {
            return Err(Error::InvalidScheme(format!(
                "level sizes must be nondecreasing: m_{} = {} > m_{} = {}",
                n + 1,
                level_sizes[n],
                n + 2,
                level_sizes[n + 1]
            )));
        }
        Ok(TriangularScheme { level_sizes })
    }

    /// `m_n = n` for `n = 1..=count`.
    pub fn classical(count: usize) -> Result<Self> {
        Self::new((1..=count).collect())
    }

    pub fn levels(&self) -> usize {
        self.level_sizes.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.level_sizes
    }

    /// Size of the last level, `m_N`.
    pub fn final_size(&self) -> usize {
        *self.level_sizes.last().expect("nonempty")
    }

    pub fn total(&self) -> usize {
        self.level_sizes.iter().sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum NormMode {
    /// l^q norm of all entries concatenated.
    Flat,
    /// Supremum over levels of the l^q norm of each level.
    #[default]
    RowSup,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SequenceNormConfig {
    pub q: Exponent,
    pub mode: NormMode,
}

impl SequenceNormConfig {
    pub fn new(q: Exponent, mode: NormMode) -> Self {
        SequenceNormConfig { q, mode }
    }
}

impl Default for SequenceNormConfig {
    fn default() -> Self {
        SequenceNormConfig {
            q: Exponent::TWO,
            mode: NormMode::RowSup,
        }
    }
}

/// An element `{c_{n,i}}` of X_d.
#[derive(Clone, Debug, PartialEq)]
pub struct TriangularArray {
    scheme: TriangularScheme,
    values: Vec<Vec<f64>>,
}

impl TriangularArray {
    pub fn new(scheme: TriangularScheme, values: Vec<Vec<f64>>) -> Result<Self> {
        if values.len() != scheme.levels() {
            return Err(Error::mismatch("array levels", scheme.levels(), values.len()));
        }
        for (n, (row, &m)) in values.iter().zip(scheme.sizes()).enumerate() {
            if row.len() != m {
                return Err(Error::mismatch(format!("array level {}", n + 1), m, row.len()));
            }
        }
        Ok(TriangularArray { scheme, values })
    }

    pub fn scheme(&self) -> &TriangularScheme {
        &self.scheme
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn level(&self, n: usize) -> &[f64] {
        &self.values[n]
    }
}

pub fn array_norm(a: &TriangularArray, cfg: &SequenceNormConfig) -> f64 {
    match cfg.mode {
        NormMode::Flat => {
            let flat: Vec<f64> = a.values.iter().flatten().copied().collect();
            lp_norm(&flat, cfg.q)
        }
        NormMode::RowSup => a.values.iter().map(|row| lp_norm(row, cfg.q)).fold(0.0, f64::max),
    }
}

/// Functionals `h_{n,i}` on a coordinate space, one matrix per level.
#[derive(Clone, Debug, PartialEq)]
pub struct TriangularFunctionalFamily {
    scheme: TriangularScheme,
    space: PNormSpace,
    levels: Vec<DMatrix<f64>>,
}

impl TriangularFunctionalFamily {
    pub fn new(space: PNormSpace, levels: Vec<DMatrix<f64>>) -> Result<Self> {
        for (n, l) in levels.iter().enumerate() {
            if l.ncols() != space.dim() {
                return Err(Error::mismatch(
                    format!("functional length at level {}", n + 1),
                    space.dim(),
                    l.ncols(),
                ));
            }
        }
        let scheme = TriangularScheme::new(levels.iter().map(|l| l.nrows()).collect())?;
        Ok(TriangularFunctionalFamily { scheme, space, levels })
    }

    pub fn scheme(&self) -> &TriangularScheme {
        &self.scheme
    }

    pub fn space(&self) -> &PNormSpace {
        &self.space
    }

    pub fn levels(&self) -> &[DMatrix<f64>] {
        &self.levels
    }

    pub fn level(&self, n: usize) -> &DMatrix<f64> {
        &self.levels[n]
    }

    pub fn final_level(&self) -> &DMatrix<f64> {
        self.levels.last().expect("nonempty")
    }

    /// All levels stacked vertically: the matrix of the analysis map into
    /// the flat model of X_d.
    pub fn stacked(&self) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.scheme.total(), self.space.dim());
        let mut row = 0;
        for l in &self.levels {
            out.rows_mut(row, l.nrows()).copy_from(l);
            row += l.nrows();
        }
        out
    }

    /// `atoms x d` matrix whose first `m_N` rows are the final-level
    /// functionals and the rest zero: the coefficient map paired with a
    /// synthesis operator on `atoms` coordinates.
    pub fn coefficient_matrix(&self, atoms: usize) -> Result<DMatrix<f64>> {
        let fin = self.final_level();
        if fin.nrows() > atoms {
            return Err(Error::Shape(format!(
                "final level uses {} atoms but only {atoms} are available",
                fin.nrows()
            )));
        }
        let mut out = DMatrix::zeros(atoms, self.space.dim());
        out.rows_mut(0, fin.nrows()).copy_from(fin);
        Ok(out)
    }

    /// Whether each level is a prefix of the next one, as for a classical
    /// family embedded with `m_n = n`.
    pub fn is_nested(&self) -> bool {
        self.levels.windows(2).all(|w| {
            let (a, b) = (&w[0], &w[1]);
            b.rows(0, a.nrows()) == a.rows(0, a.nrows())
        })
    }

    /// The functionals `h_{n,i} ∘ a`, living on `a.domain()`.
    pub fn precompose(&self, a: &LinearMap) -> Result<Self> {
        if a.codomain().dim() != self.space.dim() {
            return Err(Error::mismatch(
                "precompose (operator codomain)",
                self.space.dim(),
                a.codomain().dim(),
            ));
        }
        let levels = self.levels.iter().map(|l| l * a.matrix()).collect();
        TriangularFunctionalFamily::new(*a.domain(), levels)
    }
}

pub fn analyze(h: &TriangularFunctionalFamily, x: &DVector<f64>) -> Result<TriangularArray> {
    h.space.check(x, "analyze input")?;
    let values = h.levels.iter().map(|l| (l * x).as_slice().to_vec()).collect();
    Ok(TriangularArray {
        scheme: h.scheme.clone(),
        values,
    })
}

/// Classical family `{f_i}` (rows of `functionals`) as the triangular
/// family with `m_n = n` and level `n` equal to `(f_1, ..., f_n)`.
pub fn embed_classical(space: PNormSpace, functionals: &DMatrix<f64>) -> Result<TriangularFunctionalFamily> {
    if functionals.nrows() == 0 {
        return Err(Error::Empty("embed_classical needs at least one functional"));
    }
    if functionals.ncols() != space.dim() {
        return Err(Error::mismatch("functional length", space.dim(), functionals.ncols()));
    }
    let levels = (1..=functionals.nrows())
        .map(|n| functionals.rows(0, n).into_owned())
        .collect();
    TriangularFunctionalFamily::new(space, levels)
}

/// Upper X_d-Bessel bound: `sup_{|x| = 1} |analyze(h, x)|`.
pub fn xd_bessel_bound(h: &TriangularFunctionalFamily, cfg: &SequenceNormConfig) -> BoundEstimate {
    let p = h.space.p();
    match cfg.mode {
        NormMode::Flat => matrix_norm(&h.stacked(), p, cfg.q),
        NormMode::RowSup => {
            let per_level: Vec<BoundEstimate> = h.levels.iter().map(|l| matrix_norm(l, p, cfg.q)).collect();
            max_of(&per_level)
        }
    }
}

fn max_of(bounds: &[BoundEstimate]) -> BoundEstimate {
    let lower = bounds.iter().map(|b| b.lower).fold(0.0, f64::max);
    let upper = bounds.iter().map(|b| b.upper).fold(0.0, f64::max);
    let all_exact = bounds.iter().all(|b| b.exact);
    let method = bounds
        .iter()
        .find(|b| !b.exact)
        .or(bounds.first())
        .map(|b| b.method)
        .unwrap_or(BoundMethod::Svd);
    if all_exact {
        BoundEstimate::exact(upper, method)
    } else {
        BoundEstimate::sandwich(lower, upper, method)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct XdFrameBounds {
    pub lower: BoundEstimate,
    pub upper: BoundEstimate,
}

impl XdFrameBounds {
    pub fn is_frame(&self) -> bool {
        self.lower.lower > 0.0
    }
}

const ROW_SUP_SAMPLES: usize = 48;

fn row_sup_ratio(h: &TriangularFunctionalFamily, x: &DVector<f64>, q: Exponent) -> Option<f64> {
    let nx = lp_norm(x.as_slice(), h.space.p());
    if nx == 0.0 {
        return None;
    }
    let v = h
        .levels
        .iter()
        .map(|l| lp_norm((l * x).as_slice(), q))
        .fold(0.0, f64::max);
    Some(v / nx)
}

fn row_sup_lower(h: &TriangularFunctionalFamily, q: Exponent) -> BoundEstimate {
    let p = h.space.p();
    let d = h.space.dim();
    if h.is_nested() {
        // Level norms are nondecreasing in n, so the sup is the last level.
        return matrix_lower_bound(h.final_level(), p, q);
    }
    let stacked = h.stacked();
    let flat = matrix_lower_bound(&stacked, p, q);
    if flat.exact && flat.lower == 0.0 {
        return flat;
    }
    // sup_n a_n >= (sum_n a_n^q / N)^(1/q) and sup_n a_n >= a_k for each k.
    let shrink = (h.scheme.levels() as f64).powf(-q.reciprocal());
    let best_level = h
        .levels
        .iter()
        .map(|l| matrix_lower_bound(l, p, q).lower)
        .fold(0.0, f64::max);
    let lower = best_level.max(shrink * flat.lower);

    let mut upper = flat.upper;
    let mut rng = random::rng(0xa70b_5eed ^ d as u64);
    let mut consider = |x: &DVector<f64>| {
        if let Some(r) = row_sup_ratio(h, x, q) {
            upper = upper.min(r);
        }
    };
    for j in 0..d {
        let mut e = DVector::zeros(d);
        e[j] = 1.0;
        consider(&e);
    }
    let svd = dense::sorted_svd(&stacked);
    if svd.v_t.nrows() > 0 {
        consider(&svd.v_t.row(svd.v_t.nrows() - 1).transpose());
    }
    for _ in 0..ROW_SUP_SAMPLES {
        consider(&DVector::from_fn(d, |_, _| StandardNormal.sample(&mut rng)));
    }
    BoundEstimate::sandwich(lower, upper, BoundMethod::SamplePowerIteration)
}

/// Lower and upper approximative X_d-frame bounds.
pub fn xd_frame_bounds(h: &TriangularFunctionalFamily, cfg: &SequenceNormConfig) -> XdFrameBounds {
    let lower = match cfg.mode {
        NormMode::Flat => matrix_lower_bound(&h.stacked(), h.space.p(), cfg.q),
        NormMode::RowSup => row_sup_lower(h, cfg.q),
    };
    XdFrameBounds {
        lower,
        upper: xd_bessel_bound(h, cfg),
    }
}
