//! Operator-norm and lower-bound estimation between l^p coordinate spaces.
//!
//! Exact formulas exist for `2 -> 2` (singular values), `1 -> q` (largest
//! column norm) and `p -> inf` (largest row norm in the conjugate
//! exponent). Every other pair gets a certified sandwich: the lower end
//! of a norm estimate is always the ratio of an explicitly evaluated
//! vector, the upper end a product of exactly computable norms.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::dense::{self, RANK_RTOL};
use super::space::{lp_norm, Exponent, LinearMap};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundMethod {
    Svd,
    ColumnFormula,
    RowFormula,
    SamplePowerIteration,
}

/// A certified interval `[lower, upper]` around a norm-type quantity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundEstimate {
    #[serde(with = "crate::float")]
    pub lower: f64,
    #[serde(with = "crate::float")]
    pub upper: f64,
    pub exact: bool,
    pub method: BoundMethod,
}

impl BoundEstimate {
    pub fn exact(value: f64, method: BoundMethod) -> Self {
        BoundEstimate {
            lower: value,
            upper: value,
            exact: true,
            method,
        }
    }

    pub fn sandwich(lower: f64, upper: f64, method: BoundMethod) -> Self {
        let lower = lower.max(0.0);
        BoundEstimate {
            lower: lower.min(upper),
            upper,
            exact: false,
            method,
        }
    }

    /// Midpoint; the value itself for exact estimates.
    pub fn value(&self) -> f64 {
        if self.exact {
            self.lower
        } else {
            0.5 * (self.lower + self.upper)
        }
    }

    pub fn is_finite(&self) -> bool {
        self.upper.is_finite()
    }

    pub fn contains(&self, x: f64, slack: f64) -> bool {
        x >= self.lower - slack && x <= self.upper + slack
    }

    /// Intersection of two certified intervals for the same quantity.
    pub fn intersect(self, other: BoundEstimate) -> BoundEstimate {
        if self.exact {
            return self;
        }
        if other.exact {
            return other;
        }
        BoundEstimate::sandwich(self.lower.max(other.lower), self.upper.min(other.upper), self.method)
    }

    pub fn scaled(self, c: f64) -> BoundEstimate {
        let c = c.abs();
        BoundEstimate {
            lower: self.lower * c,
            upper: self.upper * c,
            ..self
        }
    }
}

const RANDOM_SAMPLES: usize = 24;
const POWER_STARTS: usize = 4;
const POWER_STEPS: usize = 60;
const SAMPLE_SEED: u64 = 0x5eed_a70b_0000_0001;

fn rng_for(m: &DMatrix<f64>) -> ChaCha8Rng {
    let seed = SAMPLE_SEED ^ ((m.nrows() as u64) << 32) ^ (m.ncols() as u64);
    ChaCha8Rng::seed_from_u64(seed)
}

/// `||I_n||` from l^from to l^to.
pub(crate) fn identity_norm(n: usize, from: Exponent, to: Exponent) -> f64 {
    let e = (to.reciprocal() - from.reciprocal()).max(0.0);
    if e == 0.0 {
        1.0
    } else {
        (n as f64).powf(e)
    }
}

fn max_column_norm(m: &DMatrix<f64>, q: Exponent) -> f64 {
    m.column_iter()
        .map(|c| lp_norm(c.clone_owned().as_slice(), q))
        .fold(0.0, f64::max)
}

fn max_row_norm(m: &DMatrix<f64>, p_dual: Exponent) -> f64 {
    m.row_iter()
        .map(|r| lp_norm(r.transpose().as_slice(), p_dual))
        .fold(0.0, f64::max)
}

fn ratio(m: &DMatrix<f64>, x: &DVector<f64>, p: Exponent, q: Exponent) -> Option<f64> {
    let nx = lp_norm(x.as_slice(), p);
    if nx == 0.0 || !nx.is_finite() {
        return None;
    }
    Some(lp_norm((m * x).as_slice(), q) / nx)
}

/// Norming functional of `y` in l^r: `z` with `||z||_{r'} = 1` and
/// `<z, y> = ||y||_r`.
fn norming_dual(y: &DVector<f64>, r: Exponent) -> DVector<f64> {
    let ny = lp_norm(y.as_slice(), r);
    if ny == 0.0 {
        return DVector::zeros(y.len());
    }
    if r.is_infinite() {
        let (k, _) = y.iter().enumerate().fold((0, 0.0f64), |(bk, bv), (i, v)| {
            if v.abs() > bv {
                (i, v.abs())
            } else {
                (bk, bv)
            }
        });
        let mut z = DVector::zeros(y.len());
        z[k] = y[k].signum();
        return z;
    }
    if r.is_one() {
        return y.map(|v| if v == 0.0 { 0.0 } else { v.signum() });
    }
    let e = r.value() - 1.0;
    y.map(|v| v.signum() * (v.abs() / ny).powf(e))
}

/// Alternating power iteration for `max ||m x||_q / ||x||_p`.
fn power_iterate(m: &DMatrix<f64>, start: &DVector<f64>, p: Exponent, q: Exponent) -> (f64, DVector<f64>) {
    let mut x = start.clone();
    let mut best = ratio(m, &x, p, q).unwrap_or(0.0);
    let mut best_x = x.clone();
    let mt = m.transpose();
    for _ in 0..POWER_STEPS {
        let y = m * &x;
        let z = &mt * norming_dual(&y, q);
        let next = norming_dual(&z, p.dual());
        let Some(r) = ratio(m, &next, p, q) else { break };
        let improved = r > best * (1.0 + 1e-15);
        if r > best {
            best = r;
            best_x = next.clone();
        }
        x = next;
        if !improved {
            break;
        }
    }
    (best, best_x)
}

fn candidate_vectors(m: &DMatrix<f64>) -> Vec<DVector<f64>> {
    let n = m.ncols();
    let mut out = Vec::with_capacity(n + RANDOM_SAMPLES + 2);
    for j in 0..n {
        let mut e = DVector::zeros(n);
        e[j] = 1.0;
        out.push(e);
    }
    out.push(DVector::from_element(n, 1.0));
    let svd = dense::sorted_svd(m);
    if svd.v_t.nrows() > 0 {
        out.push(svd.v_t.row(0).transpose());
        out.push(svd.v_t.row(svd.v_t.nrows() - 1).transpose());
    }
    let mut rng = rng_for(m);
    for _ in 0..RANDOM_SAMPLES {
        out.push(DVector::from_fn(n, |_, _| StandardNormal.sample(&mut rng)));
    }
    out
}

/// Largest sampled ratio, refined by power iteration from the best starts.
fn sampled_maximum(m: &DMatrix<f64>, p: Exponent, q: Exponent) -> (f64, DVector<f64>) {
    let mut scored: Vec<(f64, DVector<f64>)> = candidate_vectors(m)
        .into_iter()
        .filter_map(|x| ratio(m, &x, p, q).map(|r| (r, x)))
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut best = scored
        .first()
        .cloned()
        .unwrap_or_else(|| (0.0, DVector::zeros(m.ncols())));
    for (_, start) in scored.iter().take(POWER_STARTS) {
        let (r, x) = power_iterate(m, start, p, q);
        if r > best.0 {
            best = (r, x);
        }
    }
    best
}

fn exact_norm(m: &DMatrix<f64>, p: Exponent, q: Exponent) -> Option<BoundEstimate> {
    if p.is_two() && q.is_two() {
        return Some(BoundEstimate::exact(dense::spectral_norm(m), BoundMethod::Svd));
    }
    if p.is_one() {
        return Some(BoundEstimate::exact(max_column_norm(m, q), BoundMethod::ColumnFormula));
    }
    if q.is_infinite() {
        return Some(BoundEstimate::exact(max_row_norm(m, p.dual()), BoundMethod::RowFormula));
    }
    None
}

fn norm_upper(m: &DMatrix<f64>, p: Exponent, q: Exponent) -> f64 {
    let (rows, cols) = m.shape();
    let through_one = identity_norm(cols, p, Exponent::ONE) * max_column_norm(m, q);
    let through_inf = max_row_norm(m, p.dual()) * identity_norm(rows, Exponent::INFINITY, q);
    let through_two = identity_norm(cols, p, Exponent::TWO)
        * dense::spectral_norm(m)
        * identity_norm(rows, Exponent::TWO, q);
    let mut best = through_one.min(through_inf).min(through_two);
    if p == q {
        // Interpolation between the 1 and inf norms of |m|.
        let abs = m.abs();
        let col = max_column_norm(&abs, Exponent::ONE);
        let row = max_row_norm(&abs, Exponent::ONE);
        best = best.min(col.powf(p.reciprocal()) * row.powf(p.dual().reciprocal()));
    }
    best
}

/// Norm of `matrix` from l^p (dim = cols) to l^q (dim = rows).
pub fn matrix_norm(m: &DMatrix<f64>, p: Exponent, q: Exponent) -> BoundEstimate {
    if m.nrows() == 0 || m.ncols() == 0 {
        return BoundEstimate::exact(0.0, BoundMethod::Svd);
    }
    if let Some(b) = exact_norm(m, p, q) {
        return b;
    }
    let upper = norm_upper(m, p, q);
    let (lower, _) = sampled_maximum(m, p, q);
    BoundEstimate::sandwich(lower, upper, BoundMethod::SamplePowerIteration)
}

pub fn operator_norm(a: &LinearMap) -> BoundEstimate {
    matrix_norm(a.matrix(), a.domain().p(), a.codomain().p())
}

/// Sandwich on `inf_{||x||_p = 1} ||m x||_q`.
pub fn matrix_lower_bound(m: &DMatrix<f64>, p: Exponent, q: Exponent) -> BoundEstimate {
    let (rows, cols) = m.shape();
    if cols == 0 {
        return BoundEstimate::exact(f64::INFINITY, BoundMethod::Svd);
    }
    if rows == 0 || dense::rank(m, RANK_RTOL) < cols {
        return BoundEstimate::exact(0.0, BoundMethod::Svd);
    }
    let sigma_min = dense::min_singular_value(m);
    if p.is_two() && q.is_two() {
        return BoundEstimate::exact(sigma_min, BoundMethod::Svd);
    }

    // Any left inverse L gives ||x||_p <= ||L||_{q->p} ||m x||_q.
    let left = dense::pinv(m, RANK_RTOL);
    let left_norm = matrix_norm(&left, q, p);
    let via_left = if left_norm.upper > 0.0 {
        1.0 / left_norm.upper
    } else {
        0.0
    };
    let via_two =
        sigma_min / (identity_norm(rows, q, Exponent::TWO) * identity_norm(cols, Exponent::TWO, p));
    let lower = via_left.max(via_two);

    if rows == cols && left_norm.exact && left_norm.lower > 0.0 {
        return BoundEstimate::exact(1.0 / left_norm.lower, left_norm.method);
    }

    let mut upper = f64::INFINITY;
    let mut consider = |x: &DVector<f64>| {
        if let Some(r) = ratio(m, x, p, q) {
            upper = upper.min(r);
        }
    };
    for x in candidate_vectors(m) {
        consider(&x);
    }
    let (_, y) = sampled_maximum(&left, q, p);
    consider(&(&left * y));
    BoundEstimate::sandwich(lower, upper, BoundMethod::SamplePowerIteration)
}

pub fn lower_homogeneous_bound(a: &LinearMap) -> BoundEstimate {
    matrix_lower_bound(a.matrix(), a.domain().p(), a.codomain().p())
}
