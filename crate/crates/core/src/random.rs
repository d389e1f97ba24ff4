//! Seeded random instance builders: Gaussian matrices of prescribed rank,
//! random subspaces and oblique projections with a conditioning cap.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::dense;

pub type Rng = ChaCha8Rng;

/// Smallest principal angle allowed between a random subspace and its
/// random complement.
pub const MIN_ANGLE: f64 = 0.1;

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 step, used to derive independent per-instance seeds.
pub fn derive_seed(base: u64, stream: u64, index: u64) -> u64 {
    let mut z = base
        .wrapping_add(stream.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(index.wrapping_mul(0xD1B5_4A32_D192_ED03))
        .wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn gaussian(rng: &mut Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

/// Largest accepted ratio `sigma_1 / sigma_rank` for [`with_rank`].
pub const MAX_CONDITION: f64 = 1e3;

/// `rows x cols` matrix of rank `rank`, as a product of Gaussian factors,
/// resampled until its nonzero singular values are within `MAX_CONDITION`.
pub fn with_rank(rng: &mut Rng, rows: usize, cols: usize, rank: usize) -> DMatrix<f64> {
    assert!(rank <= rows.min(cols), "rank {rank} exceeds {rows}x{cols}");
    if rank == 0 {
        return DMatrix::zeros(rows, cols);
    }
    let mut best = None;
    let mut best_cond = f64::INFINITY;
    for _ in 0..64 {
        let m = gaussian(rng, rows, rank) * gaussian(rng, rank, cols);
        let s = dense::singular_values(&m);
        let cond = s[0] / s[rank - 1];
        if cond <= MAX_CONDITION {
            return m;
        }
        if cond < best_cond {
            best_cond = cond;
            best = Some(m);
        }
    }
    best.expect("at least one sample")
}

/// Orthonormal basis of a random `k`-dimensional subspace of `R^n`.
pub fn orthonormal(rng: &mut Rng, n: usize, k: usize) -> DMatrix<f64> {
    if k == 0 {
        return DMatrix::zeros(n, 0);
    }
    dense::range_basis(&gaussian(rng, n, k), dense::RANK_RTOL)
}

/// Smallest principal angle between two column spaces.
pub fn min_principal_angle(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    if a.ncols() == 0 || b.ncols() == 0 {
        return std::f64::consts::FRAC_PI_2;
    }
    let qa = dense::range_basis(a, dense::RANK_RTOL);
    let qb = dense::range_basis(b, dense::RANK_RTOL);
    let cos = dense::spectral_norm(&(qa.transpose() * qb)).min(1.0);
    cos.acos()
}

/// Orthonormal basis of a random complement of `Range base` in `R^n`,
/// resampled until its angle to `base` is at least `min_angle`.
pub fn complement_of(rng: &mut Rng, base: &DMatrix<f64>, min_angle: f64) -> DMatrix<f64> {
    let n = base.nrows();
    let k = dense::rank(base, dense::RANK_RTOL);
    for _ in 0..256 {
        let c = orthonormal(rng, n, n - k);
        if min_principal_angle(base, &c) >= min_angle {
            return c;
        }
    }
    dense::kernel_basis(&base.transpose(), dense::RANK_RTOL)
}

/// Projection onto `Range onto` along `Range along`; the two column spaces
/// must be complementary.
pub fn oblique_projection(onto: &DMatrix<f64>, along: &DMatrix<f64>) -> DMatrix<f64> {
    let n = onto.nrows();
    let k = onto.ncols();
    assert_eq!(k + along.ncols(), n, "subspaces must have complementary dimensions");
    let mut basis = DMatrix::zeros(n, n);
    basis.columns_mut(0, k).copy_from(onto);
    basis.columns_mut(k, n - k).copy_from(along);
    let inv = basis.clone().try_inverse().expect("complementary subspaces");
    let mut selector = DMatrix::zeros(n, n);
    for i in 0..k {
        selector[(i, i)] = 1.0;
    }
    basis * selector * inv
}

/// Random rank-`rank` projection on `R^n` with range and kernel at least
/// `MIN_ANGLE` apart.
pub fn projection(rng: &mut Rng, n: usize, rank: usize) -> DMatrix<f64> {
    let onto = orthonormal(rng, n, rank);
    projection_onto(rng, &onto)
}

/// Random projection onto `Range onto` along a random complement.
pub fn projection_onto(rng: &mut Rng, onto: &DMatrix<f64>) -> DMatrix<f64> {
    let onto = dense::range_basis(onto, dense::RANK_RTOL);
    let along = complement_of(rng, &onto, MIN_ANGLE);
    oblique_projection(&onto, &along)
}
