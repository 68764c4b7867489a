//! Cover-and-return restricted to a target set of vertices.
//!
//! Only the minimal subtree spanning the targets and the start matters:
//! excursions outside it never change how often the start's parent edge
//! has been traversed when a target is first reached, and the walk watched
//! on that subtree is again the conductance walk of the subtree. So the
//! profile recursion runs on the spanning subtree while the step scale
//! stays that of the full tree.

use crate::error::{Error, Result};
use crate::estimate::{estimate_on_gadget, EstimateOutcome, EstimateRequest};
use crate::gadget::binarize;
use crate::numeric::rat_u;
use crate::tree::{attach_super_root, WeightedTree};

/// Vertices of the minimal subtree spanning `targets` and `start`.
fn steiner_vertices(tree: &WeightedTree, start: usize, targets: &[usize]) -> Vec<bool> {
    let n = tree.n();
    let mut parent = vec![usize::MAX; n];
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    seen[start] = true;
    let mut queue = std::collections::VecDeque::from([start]);
    while let Some(v) = queue.pop_front() {
        order.push(v);
        for &(w, _) in tree.neighbors(v) {
            if !seen[w] {
                seen[w] = true;
                parent[w] = v;
                queue.push_back(w);
            }
        }
    }
    let mut keep = vec![false; n];
    keep[start] = true;
    for &t in targets {
        let mut v = t;
        while !keep[v] {
            keep[v] = true;
            v = parent[v];
        }
    }
    keep
}

/// Certified interval for the expected time to visit every target and
/// return to the start, on a unit-resistance tree.
pub fn cover_return_subset(
    tree: &WeightedTree,
    start: usize,
    targets: &[usize],
    req: &EstimateRequest,
) -> Result<EstimateOutcome> {
    if !tree.is_unit() {
        return Err(Error::input(
            "subset cover needs unit resistances; use the weighted estimator for full covers",
        ));
    }
    if targets.is_empty() {
        return Err(Error::input("target set is empty"));
    }
    let n = tree.n();
    let keep = steiner_vertices(tree, start, targets);
    let kept = keep.iter().filter(|&&k| k).count();
    if kept == 1 {
        return Ok(EstimateOutcome::trivial(n));
    }
    // rebuild the spanning subtree through the parser to reuse its checks
    let mut text = String::new();
    for &(u, v, _) in tree.edges() {
        if keep[u] && keep[v] {
            text.push_str(tree.label(u));
            text.push(' ');
            text.push_str(tree.label(v));
            text.push('\n');
        }
    }
    let sub = WeightedTree::parse(&text)?;
    debug_assert_eq!(sub.n(), kept);
    let sub_start = sub.vertex(tree.label(start))?;
    let gt = binarize(&attach_super_root(&sub, sub_start));
    let scale = rat_u(2 * (n as u64 - 1));
    estimate_on_gadget(&gt, kept, n, &scale, req)
}
