//! Dense real linear algebra over l^p coordinate spaces.

pub mod dense;
mod factor;
mod inverse;
mod norm;
mod space;

pub use dense::RANK_RTOL;
pub use factor::{douglas_factor, kernel_domination_residual, range_inclusion, Inclusion};
pub use inverse::{
    generalized_inverse, generalized_inverse_residuals, is_projection, moore_penrose, penrose_residuals,
    projection_checks, ComplementPair, ProjectionReport, INVERSE_IDENTITY_TOL, PROJECTION_TOL,
};
pub use norm::{
    lower_homogeneous_bound, matrix_lower_bound, matrix_norm, operator_norm, BoundEstimate, BoundMethod,
};
pub use space::{vector_norm, Exponent, LinearMap, PNormSpace};
pub(crate) use space::lp_norm;
