//! The truncated dynamic program over coverage profiles.
//!
//! Three implementations coexist:
//!
//! * [`reference`] materializes kernel tables and evaluates the propagation
//!   double sum literally. It is quadratic memory and cubic time per node
//!   and only suitable for small depths, but it is the easiest to audit and
//!   anchors the other two in tests.
//! * [`exact`] evaluates an algebraically identical rearrangement of the
//!   same sums in exact rational arithmetic without materializing tables
//!   (quadratic time, linear memory per node).
//! * [`float`] evaluates the rearranged sums in deterministic floating
//!   point with banded summation, for depths where rational arithmetic is
//!   hopeless.
//!
//! All three force the final profile entry to one and report the pre-cap
//! value; see [`crate::profile`].

pub mod exact;
pub mod float;
pub mod last;
pub mod reference;
mod rowsum;

use std::time::Instant;

use crate::error::{Error, Result};
use crate::profile::CoverageProfile;

/// Shared run controls. The deadline is cooperative: long loops poll it and
/// abort with a resource error, so callers can bound wallclock spent on a
/// hopeless configuration without killing the process.
#[derive(Debug, Clone, Default)]
pub struct DpContext {
    pub deadline: Option<Instant>,
}

impl DpContext {
    pub fn check(&self) -> Result<()> {
        if let Some(d) = self.deadline {
            if Instant::now() >= d {
                return Err(Error::resource(
                    "computation exceeded its wallclock budget",
                ));
            }
        }
        Ok(())
    }
}

/// Propagation variants shared by all three engines.
///
/// With `pessimistic` false a run produces optimistic profiles: coverage is
/// overstated wherever truncation loses mass, so the root traversal sum is a
/// certified lower bound on the true expectation. With `pessimistic` true
/// the engines instead treat every child's out-of-cap mass as covering
/// nothing beyond what the child certifies at its cap (a constant extension
/// of the child gap by its pre-cap value), which understates coverage
/// everywhere. Pessimistic profiles are stored shifted: `gaps[t]` holds the
/// raw pessimistic gap minus its value at the cap, and `precap_gap` holds
/// that cap value, so the raw gap is `gaps[t] + precap_gap` and the stored
/// vector keeps the `gaps[cap] == 0` shape the banded loops rely on.
#[derive(Debug, Clone, Copy, Default)]
pub struct DpOptions {
    /// Keep every interior profile instead of freeing them once consumed.
    pub keep_all: bool,
    /// Propagate certified upper bounds on gaps instead of lower bounds.
    pub pessimistic: bool,
}

/// Output of a dynamic-program run over the whole binarized tree.
#[derive(Debug, Clone)]
pub struct DpRun<S> {
    /// Per-node profiles; `None` for the super root and for nodes whose
    /// profile was dropped early to save memory.
    pub profiles: Vec<Option<CoverageProfile<S>>>,
    /// Largest pre-cap gap seen at any node (the delta diagnostic source).
    pub max_precap_gap: S,
}

impl<S> DpRun<S> {
    /// Profile at the start node (the root edge's lower endpoint).
    pub fn root(&self) -> &CoverageProfile<S> {
        self.profiles[1].as_ref().expect("root profile is always kept")
    }
}
