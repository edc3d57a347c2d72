//! Renewal inter-arrival laws, mass functions and the intersection renewal
//! of two independent copies.

mod law;
mod mass;
mod sampling;
mod slowly_varying;

pub use law::{
    build_power_law, build_power_law_with, build_srw_returns, model_tail_defect, model_tail_sum, recurrent_reduction, RegularVariation,
    RenewalLaw, SrwVariant, Truncation, RECURRENT_TOL,
};
pub use mass::{
    doney_constant, doney_ratio, first_intersection_from_mass, first_intersection_law, intersection_tail, marginal_ell,
    mass_function, mass_function_with, tail_from_q, MassFunction,
};
pub use sampling::{draw_jump, sample_renewal, sample_renewal_into};
pub use slowly_varying::{ell_sum, SlowlyVarying};
