//! Finite vector families in X: synthesis/analysis operators, Bessel and
//! frame bounds relative to the coefficient space, and the Hilbert-space
//! K-frame specialization.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{
    dense, lower_homogeneous_bound, operator_norm, range_inclusion, BoundEstimate, BoundMethod, Exponent,
    LinearMap, PNormSpace, RANK_RTOL,
};

/// Atoms `x_1..x_M` (columns of `atoms`) with coefficient exponent `q`:
/// `X_d` is `(R^M, l^q)` and `Y_d` its dual `(R^M, l^{q'})`.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorFamily {
    space: PNormSpace,
    atoms: DMatrix<f64>,
    coeff_exponent: Exponent,
}

impl VectorFamily {
    pub fn new(space: PNormSpace, atoms: DMatrix<f64>, coeff_exponent: Exponent) -> Result<Self> {
        if atoms.nrows() != space.dim() {
            return Err(Error::mismatch("atom length", space.dim(), atoms.nrows()));
        }
        if atoms.ncols() == 0 {
            return Err(Error::Empty("a vector family needs at least one atom"));
        }
        Ok(VectorFamily {
            space,
            atoms,
            coeff_exponent,
        })
    }

    pub fn from_atoms(space: PNormSpace, atoms: &[DVector<f64>], coeff_exponent: Exponent) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::Empty("a vector family needs at least one atom"));
        }
        for (n, a) in atoms.iter().enumerate() {
            space.check(a, &format!("atom {}", n + 1))?;
        }
        Self::new(space, DMatrix::from_columns(atoms), coeff_exponent)
    }

    /// Shifted canonical vectors `e_2, ..., e_d` in `(R^d, l^1)` with
    /// `l^1` coefficients: Bessel, but the synthesis map is not onto.
    pub fn shift_example(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::Shape("shift example needs d >= 2".into()));
        }
        let space = PNormSpace::new(d, Exponent::ONE)?;
        let atoms = DMatrix::from_fn(d, d - 1, |i, j| if i == j + 1 { 1.0 } else { 0.0 });
        Self::new(space, atoms, Exponent::ONE)
    }

    /// Three unit vectors at 120 degrees in the Euclidean plane.
    pub fn mercedes_benz() -> Self {
        let angles = [90.0f64, 210.0, 330.0].map(f64::to_radians);
        let atoms = DMatrix::from_fn(2, 3, |i, j| if i == 0 { angles[j].cos() } else { angles[j].sin() });
        Self::new(PNormSpace::euclidean(2).expect("dim 2"), atoms, Exponent::TWO).expect("valid family")
    }

    pub fn space(&self) -> &PNormSpace {
        &self.space
    }

    pub fn atoms(&self) -> &DMatrix<f64> {
        &self.atoms
    }

    pub fn atom(&self, n: usize) -> DVector<f64> {
        dense::column_vec(&self.atoms, n)
    }

    pub fn len(&self) -> usize {
        self.atoms.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.ncols() == 0
    }

    pub fn coeff_exponent(&self) -> Exponent {
        self.coeff_exponent
    }

    /// `(R^M, l^q)`.
    pub fn coefficient_space(&self) -> PNormSpace {
        PNormSpace::new(self.len(), self.coeff_exponent).expect("M >= 1")
    }

    pub fn scaled(&self, c: f64) -> Self {
        VectorFamily {
            atoms: &self.atoms * c,
            ..self.clone()
        }
    }

    /// The family `{A x_n}`, living in `a.codomain()`.
    pub fn mapped(&self, a: &LinearMap) -> Result<Self> {
        if a.domain().dim() != self.space.dim() {
            return Err(Error::mismatch("mapped family", a.domain().dim(), self.space.dim()));
        }
        Self::new(*a.codomain(), a.matrix() * &self.atoms, self.coeff_exponent)
    }
}

/// `T: X_d -> X`, `T{c} = sum c_n x_n`.
pub fn synthesis_operator(f: &VectorFamily) -> LinearMap {
    LinearMap::new(f.coefficient_space(), f.space, f.atoms.clone()).expect("shapes agree")
}

/// `R(h) = {h(x_n)}`.
pub fn dual_analysis(f: &VectorFamily, h: &DVector<f64>) -> Result<DVector<f64>> {
    f.space.check(h, "dual functional")?;
    Ok(f.atoms.tr_mul(h))
}

/// Analysis map `X* -> Y_d`, the adjoint of the synthesis operator.
pub fn analysis_operator(f: &VectorFamily) -> LinearMap {
    synthesis_operator(f).adjoint()
}

/// Bessel bound: the norm of `h -> {h(x_n)}` from `X*` to `Y_d`.
pub fn bessel_bound(f: &VectorFamily) -> BoundEstimate {
    let t = synthesis_operator(f);
    // |R| = |T| exactly; the two routes give independent sandwiches.
    operator_norm(&t.adjoint()).intersect(operator_norm(&t))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrameBounds {
    pub lower: BoundEstimate,
    pub upper: BoundEstimate,
    pub onto: bool,
    pub synthesis_rank: usize,
}

impl FrameBounds {
    pub fn is_frame(&self) -> bool {
        self.lower.lower > 0.0
    }

    /// Lower bound positive exactly when the synthesis map is onto.
    pub fn consistent(&self) -> bool {
        self.is_frame() == self.onto
    }

    /// Bounds in the squared Hilbert convention `A|f|^2 <= sum |<f, x_n>|^2`.
    pub fn squared(&self) -> (f64, f64) {
        (self.lower.value().powi(2), self.upper.value().powi(2))
    }
}

pub fn frame_bounds(f: &VectorFamily) -> FrameBounds {
    let t = synthesis_operator(f);
    let synthesis_rank = dense::rank(t.matrix(), RANK_RTOL);
    FrameBounds {
        lower: lower_homogeneous_bound(&t.adjoint()),
        upper: bessel_bound(f),
        onto: synthesis_rank == f.space.dim(),
        synthesis_rank,
    }
}

/// K-frame bounds in the squared convention
/// `A |K* x|^2 <= sum |<x, x_n>|^2 <= B |x|^2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KFrameBounds {
    /// `None` when `K = 0` and the lower inequality is vacuous.
    pub lower: Option<BoundEstimate>,
    pub upper: BoundEstimate,
}

pub fn kframe_bounds(f: &VectorFamily, k: &LinearMap) -> Result<KFrameBounds> {
    let p = f.space.p();
    let q = f.coeff_exponent;
    if !(p.is_two() && q.is_two()) {
        return Err(Error::NotHilbert {
            p: p.to_string(),
            q: q.to_string(),
        });
    }
    let d = f.space.dim();
    if k.domain().dim() != d || k.codomain().dim() != d {
        return Err(Error::Shape(format!("K must map R^{d} to itself")));
    }
    let t = synthesis_operator(f);
    let sigma = dense::spectral_norm(t.matrix());
    let upper = BoundEstimate::exact(sigma * sigma, BoundMethod::Svd);
    if dense::rank(k.matrix(), RANK_RTOL) == 0 {
        return Ok(KFrameBounds { lower: None, upper });
    }
    let km = k.matrix();
    let inclusion = range_inclusion(k, &t, 1e-9)?;
    let lower = if inclusion.holds {
        // On (ker K*)^perp the optimal constant is 1 / |T^+ K|^2.
        let g = dense::spectral_norm(&(dense::pinv(t.matrix(), RANK_RTOL) * km));
        BoundEstimate::exact(1.0 / (g * g), BoundMethod::Svd)
    } else {
        BoundEstimate::exact(0.0, BoundMethod::Svd)
    };
    Ok(KFrameBounds {
        lower: Some(lower),
        upper,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random;

    fn standard(d: usize) -> VectorFamily {
        VectorFamily::new(PNormSpace::euclidean(d).unwrap(), DMatrix::identity(d, d), Exponent::TWO).unwrap()
    }

    #[test]
    fn synthesis_examples() {
        assert_eq!(synthesis_operator(&standard(2)).matrix(), &DMatrix::identity(2, 2));
        let f = VectorFamily::from_atoms(
            PNormSpace::euclidean(2).unwrap(),
            &[
                DVector::from_column_slice(&[1.0, 0.0]),
                DVector::from_column_slice(&[0.0, 1.0]),
                DVector::from_column_slice(&[1.0, 1.0]),
            ],
            Exponent::TWO,
        )
        .unwrap();
        let t = synthesis_operator(&f);
        assert_eq!(t.matrix(), &DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 1.0, 0.0, 1.0, 1.0]));
        for n in 0..3 {
            let mut e = DVector::zeros(3);
            e[n] = 1.0;
            assert_eq!(t.apply(&e).unwrap(), f.atom(n));
        }
    }

    #[test]
    fn dual_analysis_examples() {
        let h = DVector::from_column_slice(&[2.0, -3.0]);
        assert_eq!(dual_analysis(&standard(2), &h).unwrap(), h);
        assert_eq!(dual_analysis(&standard(2), &DVector::zeros(2)).unwrap(), DVector::zeros(2));
        let mut rng = random::rng(4);
        let f = VectorFamily::new(PNormSpace::euclidean(3).unwrap(), random::gaussian(&mut rng, 3, 5), Exponent::TWO)
            .unwrap();
        let h = DVector::from_column_slice(&[0.5, 1.0, -2.0]);
        let direct = DVector::from_fn(5, |n, _| f.atom(n).dot(&h));
        assert!((dual_analysis(&f, &h).unwrap() - direct).norm() < 1e-14);
        assert_eq!(analysis_operator(&f).matrix(), &synthesis_operator(&f).matrix().transpose());
    }

    #[test]
    fn bessel_examples() {
        let b = bessel_bound(&standard(3));
        assert!(b.exact && (b.upper - 1.0).abs() < 1e-14);
        let b3 = bessel_bound(&standard(3).scaled(3.0));
        assert!((b3.upper - 3.0).abs() < 1e-14);
        let shift = VectorFamily::shift_example(6).unwrap();
        let b = bessel_bound(&shift);
        assert!(b.exact && b.upper == 1.0);
    }

    #[test]
    fn frame_examples() {
        let fb = frame_bounds(&standard(2));
        assert!(fb.onto && fb.consistent());
        assert!((fb.lower.value() - 1.0).abs() < 1e-14 && (fb.upper.value() - 1.0).abs() < 1e-14);

        let fb = frame_bounds(&VectorFamily::shift_example(5).unwrap());
        assert!(!fb.onto && fb.lower.exact && fb.lower.upper == 0.0 && fb.consistent());
        assert_eq!(fb.synthesis_rank, 4);

        // Singular values of the 2x3 Mercedes-Benz synthesis matrix are both
        // sqrt(3/2): T T^T = (3/2) I.
        let mb = VectorFamily::mercedes_benz();
        let tt = mb.atoms() * mb.atoms().transpose();
        assert!((tt - DMatrix::identity(2, 2) * 1.5).norm() < 1e-14);
        let fb = frame_bounds(&mb);
        let (a2, b2) = fb.squared();
        assert!((a2 - 1.5).abs() < 1e-12 && (b2 - 1.5).abs() < 1e-12);
        assert!((fb.lower.value() - 1.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn kframe_examples() {
        let s = PNormSpace::euclidean(2).unwrap();
        let kb = kframe_bounds(&standard(2), &LinearMap::identity(s)).unwrap();
        assert!((kb.lower.unwrap().value() - 1.0).abs() < 1e-12 && (kb.upper.value() - 1.0).abs() < 1e-12);

        let e1 = VectorFamily::new(s, DMatrix::from_row_slice(2, 1, &[1.0, 0.0]), Exponent::TWO).unwrap();
        let proj = LinearMap::new(s, s, DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0])).unwrap();
        let kb = kframe_bounds(&e1, &proj).unwrap();
        assert!((kb.lower.unwrap().value() - 1.0).abs() < 1e-12 && (kb.upper.value() - 1.0).abs() < 1e-12);

        let kb = kframe_bounds(&e1, &LinearMap::zero(s, s)).unwrap();
        assert!(kb.lower.is_none());

        let kb = kframe_bounds(&e1, &LinearMap::identity(s)).unwrap();
        assert_eq!(kb.lower.unwrap().value(), 0.0);

        assert!(matches!(
            kframe_bounds(&VectorFamily::shift_example(3).unwrap(), &LinearMap::identity(PNormSpace::new(3, Exponent::ONE).unwrap())),
            Err(Error::NotHilbert { .. })
        ));
    }

    #[test]
    fn kframe_lower_constant_is_sharp() {
        let mut rng = random::rng(12);
        let s = PNormSpace::euclidean(4).unwrap();
        let t = random::with_rank(&mut rng, 4, 6, 3);
        let k = &t * random::gaussian(&mut rng, 6, 4);
        let f = VectorFamily::new(s, t.clone(), Exponent::TWO).unwrap();
        let km = LinearMap::new(s, s, k.clone()).unwrap();
        let a = kframe_bounds(&f, &km).unwrap().lower.unwrap().value();
        assert!(a > 0.0);
        let mut worst = f64::INFINITY;
        for _ in 0..2000 {
            let x = DVector::from_fn(4, |_, _| rand_distr::Distribution::sample(&rand_distr::StandardNormal, &mut rng));
            let kx = k.tr_mul(&x).norm_squared();
            if kx > 1e-12 {
                let tx = t.tr_mul(&x).norm_squared();
                assert!(a * kx <= tx * (1.0 + 1e-9));
                worst = worst.min(tx / kx);
            }
        }
        assert!(worst >= a * (1.0 - 1e-9));
    }
}
