//! Per-node traversal kernels.
//!
//! For a node with branch probabilities as in [`NodeClass`], the coverage
//! kernel gives the joint distribution of child-edge traversal counts at the
//! moment of the node's t-th parent-edge traversal. The tables are truncated
//! at a cap `N`: the row and column at index `N` absorb the entire tail mass
//! of their coordinate, so every t-slice of the coverage table sums to
//! exactly one. Tail columns are computed as a thinned one-dimensional
//! marginal minus the explicit partial sum, which keeps them exact.
//!
//! The last-vertex kernel is the analogous distribution conditioned on the
//! target child edge being taken for the tl-th time; its tl coordinate is
//! deliberately not folded (mass beyond the cap is dropped, matching how the
//! last-vertex recursion consumes the table), while the off-target
//! coordinate folds its tail like the coverage table.

use num_bigint::BigInt;
use num_integer::binomial;
use num_traits::{One, Zero};

use crate::gadget::NodeClass;
use crate::numeric::Rat;

/// Truncated coverage kernel table for one node class.
#[derive(Debug, Clone)]
pub struct TraversalKernel {
    pub class: NodeClass,
    /// Truncation cap; indices run over tl, tr in 0..=n and t in 1..=n.
    pub n: usize,
    /// Row-major per-t slices: data[t-1][tl * (n+1) + tr].
    data: Vec<Vec<Rat>>,
}

impl TraversalKernel {
    pub fn entry(&self, tl: usize, tr: usize, t: usize) -> &Rat {
        &self.data[t - 1][tl * (self.n + 1) + tr]
    }

    pub fn slice(&self, t: usize) -> &[Rat] {
        &self.data[t - 1]
    }
}

fn pow_table(x: &Rat, max: usize) -> Vec<Rat> {
    let mut v = Vec::with_capacity(max + 1);
    v.push(Rat::one());
    for k in 1..=max {
        v.push(&v[k - 1] * x);
    }
    v
}

fn choose(n: usize, k: usize) -> Rat {
    if k > n {
        return Rat::zero();
    }
    Rat::from_integer(binomial(BigInt::from(n), BigInt::from(k)))
}

/// Builds the truncated coverage kernel for `class` with cap `n >= 1`.
pub fn build_kernel(class: &NodeClass, n: usize) -> TraversalKernel {
    assert!(n >= 1);
    assert!(!matches!(class, NodeClass::Leaf), "leaf nodes have no kernel");
    let w = n + 1;
    let mut data = Vec::with_capacity(n);
    match class {
        NodeClass::TwoChild { pp, pl, pr } => {
            let ppt = pow_table(pp, n);
            let plt = pow_table(pl, n);
            let prt = pow_table(pr, n);
            // Thinned marginals: integrate one coordinate out exactly.
            let sl = pp + pl;
            let sr = pp + pr;
            let left_base = pow_table(&(pl / &sl), n);
            let left_par = pow_table(&(pp / &sl), n);
            let right_base = pow_table(&(pr / &sr), n);
            let right_par = pow_table(&(pp / &sr), n);
            for t in 1..=n {
                let mut s = vec![Rat::zero(); w * w];
                let mut total = Rat::zero();
                let mut col_sums = vec![Rat::zero(); n];
                for tl in 0..n {
                    let mut row_sum = Rat::zero();
                    for tr in 0..n {
                        let v = &(&choose(t + tl + tr - 1, tl) * &choose(t + tr - 1, tr))
                            * &(&(&ppt[t] * &plt[tl]) * &prt[tr]);
                        row_sum += &v;
                        col_sums[tr] += &v;
                        total += &v;
                        s[tl * w + tr] = v;
                    }
                    // tr tail: marginal over tr minus the explicit cells.
                    let marg = &choose(t + tl - 1, tl) * &(&left_base[tl] * &left_par[t]);
                    let tail = &marg - &row_sum;
                    total += &tail;
                    s[tl * w + n] = tail;
                }
                for tr in 0..n {
                    let marg = &choose(t + tr - 1, tr) * &(&right_base[tr] * &right_par[t]);
                    let tail = &marg - &col_sums[tr];
                    total += &tail;
                    s[n * w + tr] = tail;
                }
                // Corner absorbs the rest; the slice then sums to one.
                s[n * w + n] = &Rat::one() - &total;
                data.push(s);
            }
        }
        NodeClass::OneChild { pp, pl } => {
            let ppt = pow_table(pp, n);
            let plt = pow_table(pl, n);
            for t in 1..=n {
                let mut s = vec![Rat::zero(); w * w];
                let mut total = Rat::zero();
                for tl in 0..n {
                    let v = &choose(t + tl - 1, tl) * &(&ppt[t] * &plt[tl]);
                    total += &v;
                    s[tl * w] = v;
                }
                s[n * w] = &Rat::one() - &total;
                data.push(s);
            }
        }
        NodeClass::Gadget { pl, pr } => {
            let plt = pow_table(pl, n);
            let prt = pow_table(pr, n);
            for t in 1..=n {
                let mut s = vec![Rat::zero(); w * w];
                let mut total = Rat::zero();
                for tl in 0..=t.min(n - 1) {
                    let tr = t - tl;
                    // tr >= n (only possible at tl = 0, t = n) folds into
                    // the tr tail cell.
                    let v = &choose(t, tl) * &(&plt[tl] * &prt[tr]);
                    s[tl * w + tr.min(n)] = v.clone();
                    total += &v;
                }
                // tl >= n tail: with t <= n the only such cell is
                // (tl = n, tr = 0) in the t = n slice.
                if t == n {
                    let v = plt[n].clone();
                    s[n * w] = v.clone();
                    total += &v;
                }
                s[n * w + n] = &Rat::one() - &total;
                data.push(s);
            }
        }
        NodeClass::Leaf => unreachable!(),
    }
    TraversalKernel {
        class: class.clone(),
        n,
        data,
    }
}

/// Truncated last-vertex kernel for a target under the left or right child.
#[derive(Debug, Clone)]
pub struct LastKernel {
    pub class: NodeClass,
    pub n: usize,
    pub target_right: bool,
    /// data[t-1][tl * (n+1) + tr]; tl is the target-side count in 1..=n,
    /// tr the off-target count in 0..=n.
    data: Vec<Vec<Rat>>,
}

impl LastKernel {
    /// Entry with `tl` counting the target-side child edge.
    pub fn entry(&self, tl: usize, tr: usize, t: usize) -> &Rat {
        &self.data[t - 1][tl * (self.n + 1) + tr]
    }
}

/// Builds the truncated last-vertex kernel. `target_right` exchanges child
/// roles; the returned table always indexes the target side first.
pub fn build_last_kernel(class: &NodeClass, n: usize, target_right: bool) -> LastKernel {
    assert!(n >= 1);
    let (pl, pr, pp) = match class {
        NodeClass::TwoChild { pp, pl, pr } => {
            let (a, b) = if target_right { (pr, pl) } else { (pl, pr) };
            (a.clone(), b.clone(), pp.clone())
        }
        NodeClass::OneChild { pp, pl } => {
            assert!(!target_right, "one-child node has no right target");
            (pl.clone(), Rat::zero(), pp.clone())
        }
        NodeClass::Gadget { pl, pr } => {
            let (a, b) = if target_right { (pr, pl) } else { (pl, pr) };
            (a.clone(), b.clone(), Rat::zero())
        }
        NodeClass::Leaf => panic!("leaf nodes have no kernel"),
    };
    let w = n + 1;
    let relay = matches!(class, NodeClass::Gadget { .. });
    let mut data = Vec::with_capacity(n);
    let plt = pow_table(&pl, n);
    let prt = pow_table(&pr, n);
    if relay {
        for t in 1..=n {
            let mut s = vec![Rat::zero(); w * w];
            for tl in 1..=n.min(t) {
                let tr = t - tl;
                let v = &choose(t - 1, tr) * &(&plt[tl] * &prt[tr]);
                s[tl * w + tr.min(n)] = v;
            }
            data.push(s);
        }
    } else {
        let ppt = pow_table(&pp, n);
        let one_child = matches!(class, NodeClass::OneChild { .. });
        // Thinning out tr leaves a one-child-shaped marginal over the
        // remaining moves, renormalized by s = pp + pl.
        let s_norm = &pp + &pl;
        let thin_l = pow_table(&(&pl / &s_norm), n);
        let thin_p = pow_table(&(&pp / &s_norm), n);
        for t in 1..=n {
            let mut s = vec![Rat::zero(); w * w];
            for tl in 1..=n {
                if one_child {
                    s[tl * w] = &choose(t + tl - 2, tl - 1) * &(&ppt[t - 1] * &plt[tl]);
                    continue;
                }
                let mut row_sum = Rat::zero();
                for tr in 0..n {
                    // multinomial over (t-1, tl-1, tr) move prefixes, then
                    // the tl-th target move.
                    let v = &(&choose(t + tl + tr - 2, tl - 1) * &choose(t + tr - 1, tr))
                        * &(&(&ppt[t - 1] * &plt[tl]) * &prt[tr]);
                    row_sum += &v;
                    s[tl * w + tr] = v;
                }
                // Off-target tail: thinned marginal minus explicit cells.
                let marg = &choose(t + tl - 2, tl - 1) * &(&thin_l[tl] * &thin_p[t - 1]);
                s[tl * w + n] = &marg - &row_sum;
            }
            data.push(s);
        }
    }
    LastKernel {
        class: class.clone(),
        n,
        target_right,
        data,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::rat_i64;
    use crate::oracles::enumerate::{
        q_entry_recursive, r_entry_recursive, r_entry_recursive_right,
    };

    fn classes() -> Vec<NodeClass> {
        vec![
            NodeClass::TwoChild {
                pp: rat_i64(1, 3),
                pl: rat_i64(1, 3),
                pr: rat_i64(1, 3),
            },
            NodeClass::TwoChild {
                pp: rat_i64(1, 4),
                pl: rat_i64(1, 4),
                pr: rat_i64(1, 2),
            },
            NodeClass::TwoChild {
                pp: rat_i64(2, 9),
                pl: rat_i64(4, 9),
                pr: rat_i64(1, 3),
            },
            NodeClass::OneChild {
                pp: rat_i64(1, 2),
                pl: rat_i64(1, 2),
            },
            NodeClass::OneChild {
                pp: rat_i64(2, 5),
                pl: rat_i64(3, 5),
            },
            NodeClass::Gadget {
                pl: rat_i64(1, 3),
                pr: rat_i64(2, 3),
            },
            NodeClass::Gadget {
                pl: rat_i64(2, 7),
                pr: rat_i64(5, 7),
            },
        ]
    }

    #[test]
    fn frozen_examples() {
        let unit = &classes()[0];
        let k = build_kernel(unit, 4);
        assert_eq!(*k.entry(1, 1, 1), rat_i64(2, 27));
        assert_eq!(*k.entry(0, 0, 1), rat_i64(1, 3));
        let relay = &classes()[5];
        let k = build_kernel(relay, 4);
        assert_eq!(*k.entry(1, 1, 2), rat_i64(4, 9));
        assert_eq!(*k.entry(1, 2, 2), Rat::zero());
        let lk = build_last_kernel(unit, 4, false);
        assert_eq!(*lk.entry(1, 0, 1), rat_i64(1, 3));
        assert_eq!(*lk.entry(1, 1, 1), rat_i64(1, 9));
        let lk = build_last_kernel(relay, 4, false);
        assert_eq!(*lk.entry(1, 1, 2), rat_i64(2, 9));
    }

    #[test]
    fn coverage_slices_are_stochastic() {
        let n = 6;
        for class in classes() {
            let k = build_kernel(&class, n);
            for t in 1..=n {
                let total: Rat = k.slice(t).iter().sum();
                assert!(total.is_one(), "slice t={t} sums to {total} for {class:?}");
            }
        }
    }

    #[test]
    fn coverage_interior_matches_enumeration() {
        let n = 5;
        for class in classes() {
            let one_child = matches!(class, NodeClass::OneChild { .. });
            let k = build_kernel(&class, n);
            for t in 1..=n {
                for tl in 0..n {
                    for tr in 0..(if one_child { 1 } else { n }) {
                        assert_eq!(
                            *k.entry(tl, tr, t),
                            q_entry_recursive(&class, tl, tr, t),
                            "{class:?} at ({tl},{tr};{t})"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn coverage_tail_columns_match_thinned_marginal() {
        // The folded column at tr = n must equal the independently derived
        // one-child marginal minus the explicit cells.
        let n = 4;
        for class in classes() {
            let (pp, pl) = match &class {
                NodeClass::TwoChild { pp, pl, .. } => (pp.clone(), pl.clone()),
                _ => continue,
            };
            let k = build_kernel(&class, n);
            let s = &pp + &pl;
            let thinned = NodeClass::OneChild {
                pp: &pp / &s,
                pl: &pl / &s,
            };
            for t in 1..=n {
                for tl in 0..n {
                    let mut expect = q_entry_recursive(&thinned, tl, 0, t);
                    for tr in 0..n {
                        expect -= q_entry_recursive(&class, tl, tr, t);
                    }
                    assert_eq!(*k.entry(tl, n, t), expect, "{class:?} tail ({tl},n;{t})");
                }
            }
        }
    }

    #[test]
    fn last_kernel_matches_enumeration() {
        let n = 5;
        for class in classes() {
            let one_child = matches!(class, NodeClass::OneChild { .. });
            let lk = build_last_kernel(&class, n, false);
            for t in 1..=n {
                for tl in 1..=n {
                    for tr in 0..(if one_child { 1 } else { n }) {
                        assert_eq!(
                            *lk.entry(tl, tr, t),
                            r_entry_recursive(&class, tl, tr, t),
                            "{class:?} at ({tl},{tr};{t})"
                        );
                    }
                }
            }
            if one_child {
                continue;
            }
            let rk = build_last_kernel(&class, n, true);
            for t in 1..=n {
                for tgt in 1..=n {
                    for off in 0..n {
                        assert_eq!(
                            *rk.entry(tgt, off, t),
                            r_entry_recursive_right(&class, off, tgt, t),
                            "{class:?} right target at ({off},{tgt};{t})"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn last_kernel_tail_matches_thinned_marginal() {
        let n = 4;
        for class in classes() {
            let (pp, pl) = match &class {
                NodeClass::TwoChild { pp, pl, .. } => (pp.clone(), pl.clone()),
                _ => continue,
            };
            let lk = build_last_kernel(&class, n, false);
            let s = &pp + &pl;
            let thinned = NodeClass::OneChild {
                pp: &pp / &s,
                pl: &pl / &s,
            };
            for t in 1..=n {
                for tl in 1..=n {
                    let mut expect = r_entry_recursive(&thinned, tl, 0, t);
                    for tr in 0..n {
                        expect -= r_entry_recursive(&class, tl, tr, t);
                    }
                    assert_eq!(*lk.entry(tl, n, t), expect, "{class:?} tail ({tl},n;{t})");
                }
            }
        }
    }

    #[test]
    fn last_kernel_rows_are_sub_stochastic() {
        // For a fixed target count tl the kernel sums over (tr, t) to one;
        // the truncated table keeps that mass at or below one because the
        // t direction is plainly dropped past the cap.
        let n = 5;
        for class in classes() {
            let lk = build_last_kernel(&class, n, false);
            for tl in 1..=n {
                let mut mass = Rat::zero();
                for t in 1..=n {
                    for tr in 0..=n {
                        mass += lk.entry(tl, tr, t);
                    }
                }
                assert!(mass <= Rat::one(), "{class:?} tl={tl} mass {mass}");
            }
        }
    }
}
