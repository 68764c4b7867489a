//! Deterministic estimation of random-walk cover times on trees.
//!
//! Given a tree with positive edge resistances and a start vertex, the
//! estimator computes a certified interval for the expected time of the
//! conductance-weighted random walk to visit every vertex and return to the
//! start, together with point estimates for related quantities (plain cover
//! time, covering a vertex subset, hitting times). The core is a truncated
//! dynamic program over per-edge coverage profiles on a binarized tree; all
//! truncation error is tracked and reported as an interval that is
//! guaranteed to contain the true expectation.
//!
//! Two interchangeable numeric backends drive the dynamic program: exact
//! rational arithmetic (slow, bit-for-bit reproducible certificates) and a
//! deterministic floating-point engine (fast, reproducible across thread
//! counts and platforms that implement IEEE 754 arithmetic).
//!
//! Randomized and exhaustive reference oracles live in [`oracles`]; they
//! exist to validate the estimator and are exercised heavily by the test
//! suite.

pub mod cli;
pub mod cover;
pub mod dp;
pub mod estimate;
pub mod hitting;
pub mod error;
pub mod gadget;
pub mod kernel;
pub mod numeric;
pub mod oracles;
pub mod params;
pub mod profile;
pub mod report;
pub mod subset;
pub mod tree;
pub mod weighted;

pub use cli::run_cli;
pub use error::{Error, Result};
