//! Reference implementations used to validate the estimator.
//!
//! Nothing here is fast. The exhaustive oracles recompute target quantities
//! from first principles on small inputs; the Monte Carlo oracle simulates
//! the walk directly and reports a confidence interval.

pub mod closed_form;
pub mod enumerate;
pub mod exact;
pub mod mc;
