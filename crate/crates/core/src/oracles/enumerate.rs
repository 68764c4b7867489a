//! Exhaustive references for the per-node traversal kernels.
//!
//! Both entry points here recompute kernel probabilities from the bare walk
//! semantics, without the closed forms used by the production tables:
//!
//! * the `*_recursive` family runs a first-move recursion over move-count
//!   states (how many moves to the left child, right child, and parent have
//!   occurred), and
//! * the `*_strings` family literally enumerates every move string of the
//!   required length and filters by simulating the stopping rule.
//!
//! They are deliberately slow and simple; the test suite compares the
//! production kernel tables against them entry by entry.

use num_traits::{One, Zero};

use crate::gadget::NodeClass;
use crate::numeric::Rat;

fn probs(class: &NodeClass) -> (Rat, Rat, Rat) {
    match class {
        NodeClass::Leaf => panic!("leaf nodes have no kernel"),
        NodeClass::OneChild { pp, pl } => (pl.clone(), Rat::zero(), pp.clone()),
        NodeClass::TwoChild { pp, pl, pr } => (pl.clone(), pr.clone(), pp.clone()),
        NodeClass::Gadget { pl, pr } => (pl.clone(), pr.clone(), Rat::zero()),
    }
}

/// reach[a][b][c] = probability that the move string at the node passes
/// through the count state (a left, b right, c parent moves). Every prefix
/// determines its count state uniquely, so this is a plain lattice-path sum.
fn reach(pl: &Rat, pr: &Rat, pp: &Rat, a_max: usize, b_max: usize, c_max: usize) -> Vec<Vec<Vec<Rat>>> {
    let mut t = vec![vec![vec![Rat::zero(); c_max + 1]; b_max + 1]; a_max + 1];
    t[0][0][0] = Rat::one();
    for a in 0..=a_max {
        for b in 0..=b_max {
            for c in 0..=c_max {
                if a == 0 && b == 0 && c == 0 {
                    continue;
                }
                let mut v = Rat::zero();
                if a > 0 {
                    v += pl * &t[a - 1][b][c];
                }
                if b > 0 {
                    v += pr * &t[a][b - 1][c];
                }
                if c > 0 {
                    v += pp * &t[a][b][c - 1];
                }
                t[a][b][c] = v;
            }
        }
    }
    t
}

/// Uncapped coverage-kernel entry: the probability that at the moment of the
/// t-th parent departure (for weight-one nodes) or after the t-th descent
/// (for relays), the left and right child edges have been taken `tl` and
/// `tr` times.
pub fn q_entry_recursive(class: &NodeClass, tl: usize, tr: usize, t: usize) -> Rat {
    assert!(t >= 1);
    let (pl, pr, pp) = probs(class);
    match class {
        NodeClass::Gadget { .. } => {
            if tl + tr != t {
                return Rat::zero();
            }
            let r = reach(&pl, &pr, &Rat::zero(), tl, tr, 0);
            r[tl][tr][0].clone()
        }
        NodeClass::OneChild { .. } if tr > 0 => Rat::zero(),
        _ => {
            let r = reach(&pl, &pr, &pp, tl, tr, t - 1);
            &r[tl][tr][t - 1] * &pp
        }
    }
}

/// Uncapped last-vertex kernel entry for a left-side target: the probability
/// that the tl-th left move happens while the parent edge count is t-1 and
/// the right count is exactly tr. Relays constrain tl + tr = t instead.
pub fn r_entry_recursive(class: &NodeClass, tl: usize, tr: usize, t: usize) -> Rat {
    assert!(t >= 1 && tl >= 1);
    let (pl, pr, pp) = probs(class);
    match class {
        NodeClass::Gadget { .. } => {
            if tl + tr != t {
                return Rat::zero();
            }
            let r = reach(&pl, &pr, &Rat::zero(), tl - 1, tr, 0);
            &r[tl - 1][tr][0] * &pl
        }
        NodeClass::OneChild { .. } if tr > 0 => Rat::zero(),
        _ => {
            let r = reach(&pl, &pr, &pp, tl - 1, tr, t - 1);
            &r[tl - 1][tr][t - 1] * &pl
        }
    }
}

/// Same as [`r_entry_recursive`] with the roles of the two children
/// exchanged (target in the right subtree).
pub fn r_entry_recursive_right(class: &NodeClass, tl: usize, tr: usize, t: usize) -> Rat {
    let swapped = match class {
        NodeClass::TwoChild { pp, pl, pr } => NodeClass::TwoChild {
            pp: pp.clone(),
            pl: pr.clone(),
            pr: pl.clone(),
        },
        NodeClass::Gadget { pl, pr } => NodeClass::Gadget {
            pl: pr.clone(),
            pr: pl.clone(),
        },
        _ => panic!("right-side target needs two children"),
    };
    r_entry_recursive(&swapped, tr, tl, t)
}

const MAX_STRING_MOVES: u32 = 14;

/// Literal enumeration over all move strings of the exact event length;
/// each string is simulated against the stopping rule. Only viable for
/// tiny counts (3^len strings) and used to anchor the recursive reference.
pub fn q_entry_strings(class: &NodeClass, tl: usize, tr: usize, t: usize) -> Rat {
    let (pl, pr, pp) = probs(class);
    if matches!(class, NodeClass::Gadget { .. }) {
        if tl + tr != t {
            return Rat::zero();
        }
        return sum_strings(&[pl, pr], t as u32, |s| {
            s.iter().filter(|&&c| c == 0).count() == tl
        });
    }
    let len = (tl + tr + t) as u32;
    sum_strings(&[pl, pr, pp], len, |s| {
        // Event: the t-th parent move is the final move, with child counts
        // (tl, tr) at that moment.
        let mut counts = [0usize; 3];
        for (i, &c) in s.iter().enumerate() {
            counts[c] += 1;
            if c == 2 && counts[2] == t {
                return i == s.len() - 1 && counts[0] == tl && counts[1] == tr;
            }
        }
        false
    })
}

/// Literal-enumeration analogue of [`r_entry_recursive`].
pub fn r_entry_strings(class: &NodeClass, tl: usize, tr: usize, t: usize) -> Rat {
    let (pl, pr, pp) = probs(class);
    if matches!(class, NodeClass::Gadget { .. }) {
        if tl + tr != t {
            return Rat::zero();
        }
        return sum_strings(&[pl, pr], t as u32, |s| {
            // tl-th left descent is the last move of the string.
            *s.last().unwrap() == 0 && s.iter().filter(|&&c| c == 0).count() == tl
        });
    }
    let len = (tl + tr + t - 1) as u32;
    sum_strings(&[pl, pr, pp], len, |s| {
        let mut counts = [0usize; 3];
        for (i, &c) in s.iter().enumerate() {
            counts[c] += 1;
            if c == 0 && counts[0] == tl {
                return i == s.len() - 1 && counts[1] == tr && counts[2] == t - 1;
            }
        }
        false
    })
}

fn sum_strings<F: Fn(&[usize]) -> bool>(p: &[Rat], len: u32, event: F) -> Rat {
    let k = p.len();
    assert!(len <= MAX_STRING_MOVES, "string enumeration limited to tiny cases");
    let mut total = Rat::zero();
    let mut s = vec![0usize; len as usize];
    let count = (k as u64).pow(len);
    for mut code in 0..count {
        for slot in s.iter_mut() {
            *slot = (code % k as u64) as usize;
            code /= k as u64;
        }
        if event(&s) {
            let mut prob = Rat::one();
            for &c in &s {
                prob *= &p[c];
            }
            total += prob;
        }
    }
    total
}
