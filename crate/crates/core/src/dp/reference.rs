//! Literal table-based propagation, kept as the auditable reference.

use std::collections::HashMap;

use num_traits::{One, Zero};

use crate::error::Result;
use crate::gadget::{GadgetTree, NodeClass};
use crate::kernel::{build_kernel, TraversalKernel};
use crate::numeric::Rat;
use crate::profile::CoverageProfile;

use super::{DpContext, DpRun};

/// Propagates child coverage profiles through a node's kernel table by the
/// defining double sum (zero-count terms are skipped: an uncovered child
/// cannot have been covered with zero traversals). Summation runs with tl
/// outer and tr inner, both ascending.
///
/// Optimistic consumption takes the child coverage at face value, which at
/// the folded index means certain coverage. Pessimistic consumption
/// subtracts the child's pre-cap gap from its coverage at every positive
/// count, the constant extension of the child gap beyond its cap, and the
/// result is shift-stored (see [`super::DpOptions`]).
pub fn propagate_profile(
    kernel: &TraversalKernel,
    left: &CoverageProfile<Rat>,
    right: Option<&CoverageProfile<Rat>>,
    pessimistic: bool,
) -> CoverageProfile<Rat> {
    let n = kernel.n;
    assert_eq!(left.cap, n, "profile length must match the kernel");
    if let Some(r) = right {
        assert_eq!(r.cap, n, "profile length must match the kernel");
    }
    let one_child = matches!(kernel.class, NodeClass::OneChild { .. });
    assert_eq!(one_child, right.is_none(), "child count must match the class");
    let consume = |prof: &CoverageProfile<Rat>, count: usize| {
        let mut v = prof.p(count);
        if pessimistic {
            v -= &prof.precap_gap;
        }
        v
    };
    let mut gaps = vec![Rat::zero(); n + 1];
    gaps[0] = Rat::one();
    for t in 1..=n {
        let mut p = Rat::zero();
        for tl in 1..=n {
            let pl_val = consume(left, tl);
            if pl_val.is_zero() {
                continue;
            }
            match right {
                None => p += &(kernel.entry(tl, 0, t) * &pl_val),
                Some(r) => {
                    let mut inner = Rat::zero();
                    for tr in 1..=n {
                        let e = kernel.entry(tl, tr, t);
                        if e.is_zero() {
                            continue;
                        }
                        inner += &(e * &consume(r, tr));
                    }
                    p += &(&inner * &pl_val);
                }
            }
        }
        gaps[t] = &Rat::one() - &p;
    }
    let precap = std::mem::replace(&mut gaps[n], Rat::zero());
    if pessimistic && !precap.is_zero() {
        for g in gaps[1..n].iter_mut() {
            *g -= &precap;
        }
    }
    CoverageProfile {
        cap: n,
        gaps,
        precap_gap: precap,
    }
}

/// Bottom-up run over the whole tree with materialized kernel tables,
/// cached per node class. Keeps every node's profile.
pub fn run_dp_reference(
    gt: &GadgetTree,
    n: usize,
    ctx: &DpContext,
    pessimistic: bool,
) -> Result<DpRun<Rat>> {
    let mut profiles: Vec<Option<CoverageProfile<Rat>>> = vec![None; gt.len()];
    let mut kernels: HashMap<NodeClass, TraversalKernel> = HashMap::new();
    let mut max_gap = Rat::zero();
    for &v in &gt.post_order {
        ctx.check()?;
        let class = &gt.class[v];
        let prof = match class {
            NodeClass::Leaf => CoverageProfile::<Rat>::leaf(n),
            _ => {
                let kernel = kernels
                    .entry(class.clone())
                    .or_insert_with(|| build_kernel(class, n));
                let kids = &gt.children[v];
                let left = profiles[kids[0]].as_ref().unwrap();
                let right = kids.get(1).map(|&r| profiles[r].as_ref().unwrap());
                propagate_profile(kernel, left, right, pessimistic)
            }
        };
        if prof.precap_gap > max_gap {
            max_gap = prof.precap_gap.clone();
        }
        profiles[v] = Some(prof);
    }
    Ok(DpRun {
        profiles,
        max_precap_gap: max_gap,
    })
}
