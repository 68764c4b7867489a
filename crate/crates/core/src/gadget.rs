use num_traits::Zero;

use crate::numeric::Rat;
use crate::tree::RootedTree;

/// Structural role of a node in the binarized tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    /// The virtual super root (index 0).
    Root,
    /// An original vertex (payload: vertex id in the source tree).
    Original(usize),
    /// A branching-relay node fanning out the children of an original
    /// vertex (payload: that vertex's source id).
    Gadget(usize),
}

/// Local walk behaviour at a node, as branch probabilities.
///
/// Weight-one nodes redistribute over parent and children proportionally to
/// edge conductance. Relay nodes entered from the parent dive into a child
/// proportionally to the subtree mass and, entered from a child, move to the
/// parent deterministically; only the dive split is needed here.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum NodeClass {
    Leaf,
    OneChild { pp: Rat, pl: Rat },
    TwoChild { pp: Rat, pl: Rat, pr: Rat },
    Gadget { pl: Rat, pr: Rat },
}

/// Binarized rooted tree: every node has at most two children, produced by
/// expanding each vertex of degree d > 2 into a caterpillar of relay nodes.
/// The walk on this tree projects to the conductance walk on the original.
#[derive(Debug, Clone)]
pub struct GadgetTree {
    pub parent: Vec<Option<usize>>,
    pub children: Vec<Vec<usize>>,
    /// Selection mass seen from above: for an original node the conductance
    /// of its original parent edge, for a relay the total conductance mass
    /// of the children it still carries.
    pub up_mass: Vec<Rat>,
    pub role: Vec<Role>,
    pub class: Vec<NodeClass>,
    /// Nodes with children listed before parents; starts at leaves, ends
    /// with node 1 (the start vertex). The super root is excluded.
    pub post_order: Vec<usize>,
    pub n_original: usize,
}

/// Expands `rt` into its binarized form. Child order is taken from the
/// rooted tree; relays inherit the remaining children in that order.
pub fn binarize(rt: &RootedTree) -> GadgetTree {
    let base = rt.orig.len();
    let mut gt = GadgetTree {
        parent: rt.parent.clone(),
        children: vec![Vec::new(); base],
        up_mass: Vec::with_capacity(base),
        role: Vec::with_capacity(base),
        class: Vec::new(),
        post_order: Vec::new(),
        n_original: rt.n_original,
    };
    gt.role.push(Role::Root);
    gt.up_mass.push(Rat::zero());
    for v in 1..base {
        gt.role.push(Role::Original(rt.orig[v]));
        gt.up_mass.push(rt.up_r[v].recip());
    }
    for v in 1..base {
        let kids = &rt.children[v];
        let d = kids.len();
        if d <= 2 {
            gt.children[v] = kids.clone();
            continue;
        }
        // Suffix masses: relay k (0-based) carries kids[k+1..].
        let mut suffix = vec![Rat::zero(); d + 1];
        for j in (0..d).rev() {
            suffix[j] = &suffix[j + 1] + &gt.up_mass[kids[j]];
        }
        let owner = rt.orig[v];
        let mut upper = v;
        for k in 0..d - 2 {
            let relay = gt.parent.len();
            gt.parent.push(Some(upper));
            gt.children.push(Vec::new());
            gt.up_mass.push(suffix[k + 1].clone());
            gt.role.push(Role::Gadget(owner));
            gt.children[upper] = vec![kids[k], relay];
            gt.parent[kids[k]] = Some(upper);
            upper = relay;
        }
        gt.children[upper] = vec![kids[d - 2], kids[d - 1]];
        gt.parent[kids[d - 2]] = Some(upper);
        gt.parent[kids[d - 1]] = Some(upper);
    }
    gt.children[0] = vec![1];

    gt.class = (0..gt.parent.len())
        .map(|v| classify(&gt, v))
        .collect();
    gt.post_order = post_order(&gt);
    gt
}

fn classify(gt: &GadgetTree, v: usize) -> NodeClass {
    if v == 0 {
        return NodeClass::Leaf;
    }
    let kids = &gt.children[v];
    match gt.role[v] {
        Role::Gadget(_) => {
            let ml = &gt.up_mass[kids[0]];
            let mr = &gt.up_mass[kids[1]];
            let total = ml + mr;
            NodeClass::Gadget {
                pl: ml / &total,
                pr: mr / &total,
            }
        }
        _ => match kids.len() {
            0 => NodeClass::Leaf,
            1 => {
                let mp = &gt.up_mass[v];
                let ml = &gt.up_mass[kids[0]];
                let total = mp + ml;
                NodeClass::OneChild {
                    pp: mp / &total,
                    pl: ml / &total,
                }
            }
            2 => {
                let mp = &gt.up_mass[v];
                let ml = &gt.up_mass[kids[0]];
                let mr = &gt.up_mass[kids[1]];
                let total = &(mp + ml) + mr;
                NodeClass::TwoChild {
                    pp: mp / &total,
                    pl: ml / &total,
                    pr: mr / &total,
                }
            }
            _ => unreachable!("binarized node with more than two children"),
        },
    }
}

fn post_order(gt: &GadgetTree) -> Vec<usize> {
    let mut order = Vec::with_capacity(gt.parent.len().saturating_sub(1));
    // Two-phase stack: push node, revisit after children.
    let mut stack = vec![(1usize, false)];
    while let Some((v, expanded)) = stack.pop() {
        if expanded {
            order.push(v);
            continue;
        }
        stack.push((v, true));
        for &c in gt.children[v].iter().rev() {
            stack.push((c, false));
        }
    }
    order
}

impl GadgetTree {
    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn is_relay(&self, v: usize) -> bool {
        matches!(self.role[v], Role::Gadget(_))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::rat_i64;
    use crate::tree::{attach_super_root, WeightedTree};

    fn star(k: usize) -> WeightedTree {
        let mut s = String::new();
        for i in 0..k {
            s.push_str(&format!("c x{i}\n"));
        }
        WeightedTree::parse(&s).unwrap()
    }

    #[test]
    fn degree_three_fanout() {
        let t = star(3);
        let gt = binarize(&attach_super_root(&t, 0));
        // super root, center, 3 leaves, 1 relay.
        assert_eq!(gt.len(), 6);
        let center = 1;
        assert_eq!(gt.children[center].len(), 2);
        let relay = gt.children[center][1];
        assert!(gt.is_relay(relay));
        assert_eq!(gt.up_mass[relay], rat_i64(2, 1));
        assert_eq!(
            gt.class[center],
            NodeClass::TwoChild {
                pp: rat_i64(1, 4),
                pl: rat_i64(1, 4),
                pr: rat_i64(1, 2),
            }
        );
        assert_eq!(
            gt.class[relay],
            NodeClass::Gadget {
                pl: rat_i64(1, 2),
                pr: rat_i64(1, 2),
            }
        );
    }

    #[test]
    fn relay_chain_masses_decrease() {
        let t = star(5);
        let gt = binarize(&attach_super_root(&t, 0));
        // masses along the relay chain: 4, 3, 2 in the unit star.
        let masses: Vec<Rat> = (0..gt.len())
            .filter(|&v| gt.is_relay(v))
            .map(|v| gt.up_mass[v].clone())
            .collect();
        assert_eq!(masses, vec![rat_i64(4, 1), rat_i64(3, 1), rat_i64(2, 1)]);
        // Node bound: originals + relays + super root stays within 2n.
        assert!(gt.len() <= 2 * t.n());
        // Every leaf in the binarized tree is an original leaf.
        for v in 1..gt.len() {
            if gt.children[v].is_empty() {
                assert!(matches!(gt.role[v], Role::Original(_)));
            }
        }
    }

    #[test]
    fn post_order_visits_children_first() {
        let t = star(4);
        let gt = binarize(&attach_super_root(&t, 0));
        let pos: Vec<usize> = {
            let mut pos = vec![0; gt.len()];
            for (i, &v) in gt.post_order.iter().enumerate() {
                pos[v] = i;
            }
            pos
        };
        for v in 1..gt.len() {
            for &c in &gt.children[v] {
                assert!(pos[c] < pos[v]);
            }
        }
        assert_eq!(*gt.post_order.last().unwrap(), 1);
    }

    #[test]
    fn path_needs_no_relays() {
        let t = WeightedTree::parse("a b\nb c\nc d\n").unwrap();
        let gt = binarize(&attach_super_root(&t, 0));
        assert_eq!(gt.len(), 5);
        assert!(!(0..gt.len()).any(|v| gt.is_relay(v)));
        // Interior path nodes seen from the start are one-child with a fair
        // coin between parent and child.
        assert_eq!(
            gt.class[1],
            NodeClass::OneChild {
                pp: rat_i64(1, 2),
                pl: rat_i64(1, 2),
            }
        );
    }

    #[test]
    fn weighted_split_uses_conductances() {
        // start s with heavy edge to a (r=1/2 -> c=2) and light to b (r=2 -> c=1/2),
        // plus c making degree three.
        let t = WeightedTree::parse("s a 1/2\ns b 2\ns c 1\n").unwrap();
        let gt = binarize(&attach_super_root(&t, 0));
        // children of s in input order: a, relay{b, c}; relay mass = 1/2 + 1 = 3/2.
        let s = 1;
        let relay = gt.children[s][1];
        assert_eq!(gt.up_mass[relay], rat_i64(3, 2));
        // At s: parent conductance 1, a's 2, relay 3/2; total 9/2.
        assert_eq!(
            gt.class[s],
            NodeClass::TwoChild {
                pp: rat_i64(2, 9),
                pl: rat_i64(4, 9),
                pr: rat_i64(3, 9),
            }
        );
        assert_eq!(
            gt.class[relay],
            NodeClass::Gadget {
                pl: rat_i64(1, 3),
                pr: rat_i64(2, 3),
            }
        );
    }
}
