//! Numerical versions of the objects in the degree estimate's proof: the
//! average extension of `g` into the unit ball, the stopping radius `ρ`, the
//! bound `|deg g| ≲ ∫_{ρ<1} ρ^{-d}`, and the interval/disk inequality for
//! mean increments.

mod extension;
mod lemma1;

pub use extension::{
    average_extension, cap_average, rho, rho_degree_bound, rho_field, rho_march, RhoBound, RhoField, RhoMarch, ALPHA,
    RHO_STEP_RANGE,
};
pub use lemma1::{lemma1_check, lemma1_checks, lemma1_population, random_function, Domain, FunctionKind, Lemma1Report, ScalarFn};
