//! Cover-and-return on trees with rational edge resistances.
//!
//! The walk leaves a vertex through an edge with probability proportional
//! to the edge's conductance. Two step conventions are supported:
//!
//! * chain steps: each move of that walk counts 1, whatever the edge;
//! * subdivided steps: each edge of resistance R stands for a chain of R
//!   unit resistors and a move across it counts R steps in expectation.
//!
//! Both reduce to the same recursion. With the anchor edge fixed at
//! resistance 1, the expected commute between the start and the anchor is
//! 2 * (1 + total resistance), so the step scale per expected traversal is
//! twice the total conductance in chain units and twice the total
//! resistance in subdivided units. Subdivided units require integral
//! resistances, so inputs are rescaled by the least common denominator
//! first; that rescaling also sizes the tail bound, because the weighted
//! walk is the subdivided walk watched on the original vertices and every
//! anchor traversal of one is an anchor traversal of the other.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};

use crate::error::{Error, Result};
use crate::estimate::{estimate_on_gadget, EstimateOutcome, EstimateRequest};
use crate::gadget::binarize;
use crate::numeric::{rat_u, Rat};
use crate::tree::{attach_super_root, WeightedTree};

/// What one unit of reported time means.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Units {
    ChainSteps,
    SubdividedSteps,
}

/// Largest unit-resistor count after rescaling. The tail bound is
/// quadratic in this count, so past a few thousand no certified depth
/// fits in memory anyway.
pub const SUBDIV_CAP: usize = 4096;

/// Certified interval for the expected cover-and-return time of the
/// conductance walk, in the requested units.
pub fn cover_return_weighted(
    tree: &WeightedTree,
    start: usize,
    units: Units,
    req: &EstimateRequest,
) -> Result<EstimateOutcome> {
    let n = tree.n();
    if n == 1 {
        return Ok(EstimateOutcome::trivial(1));
    }
    let lambda = tree
        .edges()
        .iter()
        .fold(BigInt::one(), |acc, (_, _, r)| acc.lcm(r.denom()));
    let total_r: Rat = tree.edges().iter().map(|(_, _, r)| r).sum();
    let scaled_total = (&total_r * Rat::from(lambda.clone())).to_integer();
    let n_sub = (&scaled_total + BigInt::one())
        .to_usize()
        .filter(|&m| m <= SUBDIV_CAP)
        .ok_or_else(|| {
            Error::resource(format!(
                "tree needs {} unit resistors after rescaling, cap is {SUBDIV_CAP}",
                &scaled_total + BigInt::one()
            ))
        })?;
    let (walk_tree, walk_start, scale);
    match units {
        Units::ChainSteps => {
            let cond: Rat = tree.edges().iter().map(|(_, _, r)| r.recip()).sum();
            walk_tree = None;
            walk_start = start;
            scale = &rat_u(2) * &cond;
        }
        Units::SubdividedSteps => {
            // rescale resistances to integers; the walk itself only sees
            // conductance ratios at each vertex, which shift because the
            // anchor edge stays at 1
            let mut text = String::new();
            for (u, v, r) in tree.edges() {
                text.push_str(tree.label(*u));
                text.push(' ');
                text.push_str(tree.label(*v));
                text.push(' ');
                text.push_str(&(r * Rat::from(lambda.clone())).to_integer().to_string());
                text.push('\n');
            }
            let scaled = WeightedTree::parse(&text)?;
            walk_start = scaled.vertex(tree.label(start))?;
            walk_tree = Some(scaled);
            scale = rat_u(2 * (n_sub as u64 - 1));
        }
    }
    let walk = walk_tree.as_ref().unwrap_or(tree);
    let gt = binarize(&attach_super_root(walk, walk_start));
    estimate_on_gadget(&gt, n_sub, n, &scale, req)
}
