//! Inner-function diagnostics, Schur projection onto finite Blaschke
//! products, the pin corrector and the generating families.

mod diagnostics;
mod family;
mod schur;

pub use diagnostics::{
    good_inner_integral, good_inner_trend, jensen_oracle, radial_modulus_report, GoodInnerReport,
    RadialReport, TorusMean, DEFAULT_CLAMP,
};
pub use family::{
    make_corrector, make_generating_element, GeneratingElement, MAX_CORRECTOR_INDEX, PIN_TOL,
};
pub use schur::{schur_parameters, schur_project, schur_project_adaptive, SchurProjection};
