//! Truncation depth selection.
//!
//! The dynamic program tracks coverage profiles only up to a traversal count
//! `N` and folds the tails. With `N = 4 n^2 k` the per-fold distortion is
//! bounded by `delta = 2^(1-k)`, and the total undercount of the expected
//! traversal count is at most
//!
//! ```text
//! err(N) = N ((1 + delta)^(2 n) - 1) + 2 N delta.
//! ```
//!
//! `choose_truncation` picks the smallest admissible depth whose bound meets
//! the requested accuracy, evaluating the bound in exact arithmetic so the
//! choice is reproducible everywhere.

use num_traits::{One, Signed};

use crate::error::{Error, Result};
use crate::numeric::{pow_rat, rat_u, Rat};

/// Largest multiplier tried before giving up; depths beyond this are far
/// outside what either backend can evaluate anyway.
const MAX_K: usize = 512;

/// Smallest admissible multiplier. The error analysis needs the fold
/// distortion below one half, i.e. `k >= 3`.
const MIN_K: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncationParams {
    /// Truncation depth N (table indices run to N).
    pub n_trunc: usize,
    /// A-priori bound on each fold's relative distortion.
    pub delta: Rat,
    /// A-priori bound on the undercount of the expected traversal count.
    pub err_bound: Rat,
}

/// Evaluates the undercount bound for a tree size (or effective size)
/// `n_eff` at depth `n_trunc`, with `delta = 2^(1 - floor(N / 4 n_eff^2))`.
pub fn error_bound(n_eff: usize, n_trunc: usize) -> (Rat, Rat) {
    assert!(n_eff >= 1 && n_trunc >= 1);
    let k = n_trunc / (4 * n_eff * n_eff);
    let delta = if k == 0 {
        rat_u(2)
    } else {
        Rat::new(2.into(), num_bigint::BigInt::from(1) << k)
    };
    let n = rat_u(n_trunc as u64);
    let growth = pow_rat(&(Rat::one() + &delta), 2 * n_eff as u64) - Rat::one();
    let err = &(&n * &growth) + &(&(&n * &delta) * &rat_u(2));
    (delta, err)
}

/// Smallest truncation depth `N = 4 n_eff^2 k`, `k >= 3`, whose undercount
/// bound is at most `eps`. Fails with a resource error when no admissible
/// depth exists below the hard cap.
pub fn choose_truncation(n_eff: usize, eps: &Rat) -> Result<TruncationParams> {
    if n_eff == 0 {
        return Err(Error::input("effective size must be at least 1"));
    }
    if !eps.is_positive() {
        return Err(Error::input("accuracy target must be positive"));
    }
    let base = 4 * n_eff * n_eff;
    for k in MIN_K..=MAX_K {
        let n_trunc = base * k;
        let (delta, err_bound) = error_bound(n_eff, n_trunc);
        if &err_bound <= eps {
            return Ok(TruncationParams {
                n_trunc,
                delta,
                err_bound,
            });
        }
    }
    Err(Error::resource(format!(
        "no truncation depth up to {} meets accuracy {eps}",
        base * MAX_K
    )))
}

impl TruncationParams {
    /// Parameters for an explicitly requested depth (not necessarily a
    /// multiple of the natural block size); the bound uses the floored
    /// multiplier and is infinite-like (`None`-style huge) only through
    /// `delta >= 1/2`, which callers must check before certifying.
    pub fn explicit(n_eff: usize, n_trunc: usize) -> TruncationParams {
        let (delta, err_bound) = error_bound(n_eff, n_trunc);
        TruncationParams {
            n_trunc,
            delta,
            err_bound,
        }
    }

    /// True when the distortion bound is too large for the error analysis
    /// to certify anything (delta >= 1/2).
    pub fn uncertifiable(&self) -> bool {
        self.delta >= Rat::new(1.into(), 2.into())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::rat_i64;

    /// Definition check, written independently of the chooser: the selected
    /// depth satisfies the bound and the next smaller admissible depth does
    /// not.
    fn assert_minimal(n_eff: usize, eps: &Rat, expect_n: usize) {
        let p = choose_truncation(n_eff, eps).unwrap();
        assert_eq!(p.n_trunc, expect_n, "depth for n_eff={n_eff}, eps={eps}");
        assert!(&p.err_bound <= eps);
        let base = 4 * n_eff * n_eff;
        let k = p.n_trunc / base;
        if k > MIN_K {
            let (_, prev) = error_bound(n_eff, base * (k - 1));
            assert!(&prev > eps, "depth below {expect_n} would also satisfy eps");
        }
    }

    #[test]
    fn frozen_depths() {
        let milli = rat_i64(1, 1000);
        assert_minimal(1, &milli, 80);
        assert_minimal(2, &rat_i64(1, 2), 208);
        assert_minimal(3, &milli, 864);
        assert_minimal(8, &milli, 7168);
        assert_minimal(10, &milli, 11600);
        assert_minimal(50, &milli, 370_000);
    }

    #[test]
    fn floor_at_min_k() {
        // A huge accuracy target still yields k = 3: the analysis breaks
        // down for larger distortions.
        let p = choose_truncation(2, &rat_i64(1000, 1)).unwrap();
        assert_eq!(p.n_trunc, 4 * 4 * 3);
        assert_eq!(p.delta, rat_i64(1, 4));
    }

    #[test]
    fn unreachable_accuracy_is_a_resource_error() {
        // eps so small that no depth under the cap can reach it.
        let eps = Rat::new(1.into(), num_bigint::BigInt::from(1) << 600);
        match choose_truncation(1, &eps) {
            Err(Error::Resource(_)) => {}
            other => panic!("expected resource error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(choose_truncation(0, &rat_i64(1, 2)).is_err());
        assert!(choose_truncation(2, &rat_i64(0, 1)).is_err());
        assert!(choose_truncation(2, &rat_i64(-1, 2)).is_err());
    }

    #[test]
    fn explicit_depth_flags_uncertifiable() {
        let p = TruncationParams::explicit(5, 16);
        assert!(p.uncertifiable());
        let q = TruncationParams::explicit(1, 16);
        assert!(!q.uncertifiable());
        assert_eq!(q.delta, rat_i64(2, 16));
    }
}
