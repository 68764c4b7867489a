//! Certified interval for the expected cover time (no return leg).
//!
//! The base estimator bounds the cover-and-return time C+, the expected
//! time to visit every vertex and then stand at the start again. The walk
//! finishes covering at the instant it first steps onto its final
//! uncovered vertex; from there the return leg is an ordinary hitting
//! time, and the strong Markov property splits the two:
//!
//!   C+ = C + sum_u P[u covered last] H(u -> start)
//!
//! On a tree the last-covered vertex is always a degree-one vertex other
//! than the start: the start is covered at time zero, and an internal
//! vertex separates the start from at least one branch, so it is visited
//! strictly before that branch is finished and cannot be last. Hitting
//! times to the start are exact, and the last-vertex recursion yields
//! certified lower bounds pt_u <= P[u covered last]. With
//! d = 1 - sum pt_u >= 0 the unassigned mass,
//!
//!   sum pt_u H(u) + d min H  <=  E[H(last)]  <=  sum pt_u H(u) + d max H
//!
//! and subtracting the matching ends from the cover-and-return interval
//! leaves a certified interval for C alone. Both runs share one backend
//! and truncation depth, so the report fields carry over unchanged.

use num_traits::{One, Signed, Zero};

use crate::dp::exact::run_dp_exact;
use crate::dp::float::{inv_table, run_dp_float};
use crate::dp::last::{leaf_last_bound_exact, leaf_last_bound_float, original_nodes};
use crate::dp::DpOptions;
use crate::error::{Error, Result};
use crate::estimate::{
    auto_backend, cover_return_time, resolve_depth, EstimateOutcome, EstimateRequest,
    EstimateValues, FLOAT_GUARD,
};
use crate::gadget::binarize;
use crate::hitting::hitting_times_to;
use crate::numeric::{rat_to_f64, Rat};
use crate::tree::{attach_super_root, WeightedTree};

/// Certified interval for the expected cover time of the walk on a
/// unit-resistance tree started at vertex `start`. The point estimate is
/// the certified lower endpoint; `upper` is absent whenever the underlying
/// cover-and-return run cannot certify its tail.
pub fn cover_time(
    tree: &WeightedTree,
    start: usize,
    req: &EstimateRequest,
) -> Result<EstimateOutcome> {
    if !tree.is_unit() {
        return Err(Error::input(
            "tree has non-unit resistances; cover-time bounds need a unit tree",
        ));
    }
    let n = tree.n();
    if n == 1 {
        return Ok(EstimateOutcome::trivial(1));
    }
    let gt = binarize(&attach_super_root(tree, start));
    let trunc = resolve_depth(&req.depth, n)?;
    let backend = req
        .backend
        .unwrap_or_else(|| auto_backend(gt.len(), trunc.n_trunc));
    let mut pinned = req.clone();
    pinned.backend = Some(backend);
    let cr = cover_return_time(tree, start, &pinned)?;

    let hit = hitting_times_to(tree, start);
    let leaves: Vec<usize> = (0..n)
        .filter(|&v| v != start && tree.neighbors(v).len() == 1)
        .collect();
    debug_assert!(!leaves.is_empty());
    let node_of = original_nodes(&gt);
    let opts = DpOptions {
        keep_all: true,
        pessimistic: true,
    };

    let EstimateOutcome {
        trunc, backend, values, ..
    } = cr;
    let values = match values {
        EstimateValues::Rational {
            estimate: cr_lower,
            upper: cr_upper,
            delta_empirical,
        } => {
            let run = run_dp_exact(&gt, trunc.n_trunc, &req.ctx, opts)?;
            let hmax = leaves.iter().map(|&u| &hit.times[u]).max().unwrap();
            let hmin = leaves.iter().map(|&u| &hit.times[u]).min().unwrap();
            let mut sum_p = Rat::zero();
            let mut sum_ph = Rat::zero();
            for &u in &leaves {
                let p = leaf_last_bound_exact(&gt, &run, node_of[u], &req.ctx)?;
                if !p.is_zero() {
                    sum_ph += &(&p * &hit.times[u]);
                    sum_p += &p;
                }
            }
            let deficit = &Rat::one() - &sum_p;
            debug_assert!(!deficit.is_negative(), "last-vertex bounds exceeded one");
            let eh_hi = &sum_ph + &(&deficit * hmax);
            let eh_lo = &sum_ph + &(&deficit * hmin);
            let mut lower = &cr_lower - &eh_hi;
            if lower.is_negative() {
                lower = Rat::zero();
            }
            EstimateValues::Rational {
                estimate: lower,
                upper: cr_upper.map(|u| &u - &eh_lo),
                delta_empirical,
            }
        }
        EstimateValues::Float {
            estimate: cr_lower,
            upper: cr_upper,
            delta_empirical,
        } => {
            let run = run_dp_float(&gt, trunc.n_trunc, &req.ctx, opts)?;
            let inv = inv_table(trunc.n_trunc);
            let hs: Vec<f64> = leaves.iter().map(|&u| rat_to_f64(&hit.times[u])).collect();
            let hmax = hs.iter().cloned().fold(f64::MIN, f64::max);
            let hmin = hs.iter().cloned().fold(f64::MAX, f64::min);
            let mut sum_p = 0.0f64;
            let mut sum_ph = 0.0f64;
            for (&u, h) in leaves.iter().zip(&hs) {
                let raw = leaf_last_bound_float(&gt, &run, node_of[u], &inv, &req.ctx)?;
                // shave each bound so rounding in the walk cannot push it
                // past the true probability
                let p = (raw * (1.0 - FLOAT_GUARD)).clamp(0.0, 1.0);
                sum_ph += p * h;
                sum_p += p;
            }
            let deficit = (1.0 - sum_p).max(0.0);
            let eh_hi = (sum_ph + deficit * hmax) * (1.0 + FLOAT_GUARD);
            let eh_lo = (sum_ph + deficit * hmin) * (1.0 - FLOAT_GUARD);
            EstimateValues::Float {
                estimate: (cr_lower - eh_hi).max(0.0),
                upper: cr_upper.map(|u| u - eh_lo),
                delta_empirical,
            }
        }
    };
    Ok(EstimateOutcome {
        n,
        trunc,
        backend,
        values,
    })
}

/// Guarded lower bounds on the last-vertex law, one entry per vertex of
/// the input tree (nonzero only on non-start degree-one vertices), plus
/// the a-priori truncation-mass certificate of the run: the bounds sum to
/// at most one, and the true law exceeds them by at most the certificate
/// in total. Runs the float pipeline regardless of the requested backend.
pub fn last_vertex_bounds(
    tree: &WeightedTree,
    start: usize,
    req: &EstimateRequest,
) -> Result<(Vec<f64>, f64)> {
    if !tree.is_unit() {
        return Err(Error::input(
            "tree has non-unit resistances; last-vertex bounds need a unit tree",
        ));
    }
    let n = tree.n();
    if n == 1 {
        return Ok((vec![1.0], 0.0));
    }
    let gt = binarize(&attach_super_root(tree, start));
    let trunc = resolve_depth(&req.depth, n)?;
    let run = run_dp_float(
        &gt,
        trunc.n_trunc,
        &req.ctx,
        DpOptions {
            keep_all: true,
            pessimistic: true,
        },
    )?;
    let inv = inv_table(trunc.n_trunc);
    let node_of = original_nodes(&gt);
    let mut probs = vec![0.0; n];
    for v in 0..n {
        if v != start && tree.neighbors(v).len() == 1 {
            let raw = leaf_last_bound_float(&gt, &run, node_of[v], &inv, &req.ctx)?;
            probs[v] = (raw * (1.0 - FLOAT_GUARD)).clamp(0.0, 1.0);
        }
    }
    Ok((probs, rat_to_f64(&trunc.err_bound)))
}
