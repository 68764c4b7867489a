//! Truncated coverage profiles.
//!
//! For a node i of the binarized tree, entry t of the profile is the
//! probability that the subtree below i is fully visited within the walk's
//! first t stays below i's parent edge. The table is truncated at `cap`:
//! the final entry is forced to one (coverage assumed complete), which makes
//! every stored profile dominate the true one pointwise, and the value that
//! was computed for the final slot before forcing is kept as a diagnostic.
//!
//! Internally the complement is stored: `gaps[t] = 1 - P(t)`. The gaps are
//! the quantities the estimator actually sums, and for floating-point
//! backends they stay well-scaled where the probabilities would saturate.

use num_traits::{One, Zero};

use crate::numeric::Rat;

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageProfile<S> {
    /// Truncation depth N; valid traversal counts are 1..=cap.
    pub cap: usize,
    /// gaps[t] = 1 - P(t) for t in 0..=cap. gaps[0] = 1 by convention
    /// (coverage cannot precede the first stay) and gaps[cap] = 0.
    pub gaps: Vec<S>,
    /// The gap computed for t = cap before it was forced to zero.
    pub precap_gap: S,
}

impl<S> CoverageProfile<S> {
    pub fn len(&self) -> usize {
        self.cap
    }

    pub fn is_empty(&self) -> bool {
        self.cap == 0
    }
}

impl CoverageProfile<Rat> {
    /// Profile of a leaf subtree: covered from the first stay on.
    pub fn leaf(cap: usize) -> Self {
        let mut gaps = vec![Rat::zero(); cap + 1];
        gaps[0] = Rat::one();
        CoverageProfile {
            cap,
            gaps,
            precap_gap: Rat::zero(),
        }
    }

    /// Coverage probability at traversal count `t <= cap`.
    pub fn p(&self, t: usize) -> Rat {
        &Rat::one() - &self.gaps[t]
    }
}

/// Expected number of stays not yet covering the subtree,
/// `sum_{t=1..cap} (1 - P(t))`. For the start node this is the quantity the
/// cover-and-return time scales from.
pub fn expected_traversals(profile: &CoverageProfile<Rat>) -> Rat {
    let mut e = Rat::zero();
    for t in 1..=profile.cap {
        e += &profile.gaps[t];
    }
    e
}

impl CoverageProfile<f64> {
    pub fn leaf(cap: usize) -> Self {
        let mut gaps = vec![0.0; cap + 1];
        gaps[0] = 1.0;
        CoverageProfile {
            cap,
            gaps,
            precap_gap: 0.0,
        }
    }

    pub fn p(&self, t: usize) -> f64 {
        1.0 - self.gaps[t]
    }
}

/// Floating-point twin of [`expected_traversals`]; summed in increasing t
/// for a fixed, platform-independent result.
pub fn expected_traversals_f64(profile: &CoverageProfile<f64>) -> f64 {
    let mut e = 0.0;
    for t in 1..=profile.cap {
        e += profile.gaps[t];
    }
    e
}
