use atomkit::generate::{Dims, Exponents, InstanceSpec, Ranks, Scenario};
use atomkit::io::{self, ExponentDto, MapDto, NormModeDto};
use atomkit_core::atomic::{Certificate, LowerConstants, Note, Verdict};
use atomkit_core::linalg::{BoundEstimate, BoundMethod, Exponent, LinearMap, PNormSpace};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn any_float() -> impl Strategy<Value = f64> {
    prop_oneof![
        4 => proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO,
        1 => Just(f64::INFINITY),
        1 => Just(f64::NEG_INFINITY),
    ]
}

fn exponent() -> impl Strategy<Value = Exponent> {
    prop_oneof![
        Just(Exponent::INFINITY),
        (1.0f64..50.0).prop_map(|p| Exponent::new(p).unwrap()),
    ]
}

fn map() -> impl Strategy<Value = LinearMap> {
    (1usize..6, 1usize..6, exponent(), exponent()).prop_flat_map(|(r, c, p, q)| {
        proptest::collection::vec(proptest::num::f64::NORMAL | proptest::num::f64::ZERO, r * c).prop_map(
            move |v| {
                LinearMap::new(
                    PNormSpace::new(c, p).unwrap(),
                    PNormSpace::new(r, q).unwrap(),
                    DMatrix::from_vec(r, c, v),
                )
                .unwrap()
            },
        )
    })
}

fn certificate() -> impl Strategy<Value = Certificate> {
    (
        any::<bool>(),
        proptest::collection::vec(any_float(), 1..5),
        any_float(),
        any_float(),
        proptest::option::of((any_float(), any_float())),
    )
        .prop_map(|(pass, residuals, lo, tol, consts)| Certificate {
            verdict: Verdict::from_bool(pass),
            tolerance: tol,
            bessel_atoms: BoundEstimate {
                lower: lo,
                upper: f64::INFINITY,
                exact: false,
                method: BoundMethod::Svd,
            },
            bessel_functionals: BoundEstimate {
                lower: 0.0,
                upper: lo,
                exact: true,
                method: BoundMethod::Svd,
            },
            notes: residuals.iter().map(|&r| Note::new("n", pass, r)).collect(),
            level_residuals: residuals,
            constants: consts.map(|(c, d)| LowerConstants { c, d }),
        })
}

proptest! {
    #[test]
    fn maps_round_trip_bitwise(a in map()) {
        let text = io::to_string(&MapDto::from_map(&a));
        let back = io::from_str::<MapDto>(&text, "mem").unwrap().to_map().unwrap();
        prop_assert_eq!(back.domain(), a.domain());
        prop_assert_eq!(back.codomain(), a.codomain());
        for (x, y) in back.matrix().iter().zip(a.matrix().iter()) {
            prop_assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn certificates_round_trip(c in certificate()) {
        let text = io::to_string(&c);
        let back: Certificate = io::from_str(&text, "mem").unwrap();
        prop_assert_eq!(back.verdict, c.verdict);
        prop_assert_eq!(io::to_string(&back), text);
    }

    #[test]
    fn instance_specs_round_trip(seed in any::<u64>(), d in 1usize..9, m in 1usize..9, k in 0usize..4, p in exponent()) {
        let spec = InstanceSpec {
            seed,
            scenario: Scenario::ALL[(seed % 8) as usize],
            dims: Dims { d, m, levels: 1 + (seed % 3) as usize },
            exponents: Exponents { p: ExponentDto(p), q: ExponentDto(Exponent::TWO) },
            ranks: Ranks { k, t: k },
            adversarial: seed % 5 == 0,
            norm_mode: if seed % 2 == 0 { NormModeDto::Flat } else { NormModeDto::RowSup },
        };
        let back: InstanceSpec = io::from_str(&io::to_string(&spec), "mem").unwrap();
        prop_assert_eq!(back, spec);
    }
}
