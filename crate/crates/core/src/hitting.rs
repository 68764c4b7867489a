//! Exact expected hitting times on trees.
//!
//! Crossing an edge (x, parent) from below takes 1 + 2 * W / c steps in
//! expectation, where c is the edge's conductance and W the total
//! conductance of the subtree hanging under x: every sub-edge must be
//! commuted back before the walk can leave. Hitting times are sums of
//! these one-edge values along the unique path, so one rooted pass gives
//! H[x, target] for every x at once.

use num_traits::{One, Zero};

use crate::error::Result;
use crate::numeric::{rat_u, Rat};
use crate::tree::WeightedTree;

/// Exact hitting times into one target vertex.
#[derive(Debug, Clone)]
pub struct HittingTable {
    pub target: usize,
    /// times[x] = expected steps from x to target; times[target] = 0.
    pub times: Vec<Rat>,
}

/// H[x, target] for every vertex, in O(n) conductance sums.
pub fn hitting_times_to(tree: &WeightedTree, target: usize) -> HittingTable {
    let n = tree.n();
    let mut parent = vec![usize::MAX; n];
    let mut parent_edge = vec![usize::MAX; n];
    let mut order = Vec::with_capacity(n);
    let mut queue = std::collections::VecDeque::from([target]);
    let mut seen = vec![false; n];
    seen[target] = true;
    while let Some(v) = queue.pop_front() {
        order.push(v);
        for &(w, eid) in tree.neighbors(v) {
            if !seen[w] {
                seen[w] = true;
                parent[w] = v;
                parent_edge[w] = eid;
                queue.push_back(w);
            }
        }
    }
    // conductance mass strictly below each vertex, children first
    let mut below = vec![Rat::zero(); n];
    for &v in order.iter().rev() {
        for &(w, eid) in tree.neighbors(v) {
            if parent[w] == v {
                let add = &below[w] + &tree.resistance(eid).recip();
                below[v] += &add;
            }
        }
    }
    // accumulate one-edge crossing values top-down
    let mut times = vec![Rat::zero(); n];
    for &v in &order {
        if v == target {
            continue;
        }
        let r = tree.resistance(parent_edge[v]);
        let step = &Rat::one() + &(&(&rat_u(2) * &below[v]) * r);
        times[v] = &times[parent[v]] + &step;
    }
    HittingTable { target, times }
}

/// Exact expected steps from u to v.
pub fn hitting_time_exact(tree: &WeightedTree, u: usize, v: usize) -> Result<Rat> {
    Ok(hitting_times_to(tree, v).times[u].clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::rat_to_f64;

    /// Independent check: solve h_x = 1 + sum_y P(x,y) h_y, h_target = 0
    /// by dense elimination over one-step transition probabilities.
    fn linear_system_oracle(tree: &WeightedTree, target: usize) -> Vec<Rat> {
        let n = tree.n();
        let idx: Vec<usize> = (0..n).filter(|&v| v != target).collect();
        let pos = |v: usize| idx.iter().position(|&x| x == v);
        let m = idx.len();
        let mut a = vec![vec![Rat::zero(); m + 1]; m];
        for (row, &v) in idx.iter().enumerate() {
            a[row][row] = Rat::one();
            a[row][m] = Rat::one();
            for (w, p) in tree.step_distribution(v) {
                if let Some(col) = pos(w) {
                    a[row][col] -= &p;
                }
            }
        }
        // forward elimination + back substitution, exact pivots
        for col in 0..m {
            let piv = (col..m).find(|&r| !a[r][col].is_zero()).unwrap();
            a.swap(col, piv);
            let p = a[col][col].clone();
            for entry in a[col].iter_mut() {
                *entry /= &p;
            }
            for r in 0..m {
                if r != col && !a[r][col].is_zero() {
                    let f = a[r][col].clone();
                    for c in col..=m {
                        let sub = &f * &a[col][c];
                        a[r][c] -= &sub;
                    }
                }
            }
        }
        let mut out = vec![Rat::zero(); n];
        for (row, &v) in idx.iter().enumerate() {
            out[v] = a[row][m].clone();
        }
        out
    }

    #[test]
    fn path_examples() {
        let t = WeightedTree::parse("a b\nb c\n").unwrap();
        let (a, b, c) = (0usize, 1, 2);
        assert!(hitting_time_exact(&t, a, a).unwrap().is_zero());
        assert_eq!(hitting_time_exact(&t, b, a).unwrap(), rat_u(3));
        assert_eq!(hitting_time_exact(&t, c, a).unwrap(), rat_u(4));
        assert_eq!(hitting_time_exact(&t, a, c).unwrap(), rat_u(4));
    }

    #[test]
    fn adjacent_commute_is_twice_total_resistance() {
        let cases = [
            "a b\nb c\nc d\nb e\n",
            "a b 2\nb c 1/3\nc d 5\n",
            "hub a 1\nhub b 1/2\nhub c 3\n",
        ];
        for text in cases {
            let t = WeightedTree::parse(text).unwrap();
            // commute across edge e = 2 * c_total * r_e with c_total the
            // total conductance; for unit trees this is 2(n-1)
            let c_tot: Rat = t
                .edges()
                .iter()
                .fold(Rat::zero(), |acc, (_, _, r)| &acc + &r.recip());
            for &(u, v, ref r) in t.edges() {
                let com = &hitting_time_exact(&t, u, v).unwrap()
                    + &hitting_time_exact(&t, v, u).unwrap();
                assert_eq!(com, &(&rat_u(2) * &c_tot) * r, "{text:?}");
            }
        }
    }

    #[test]
    fn matches_linear_system_oracle() {
        let cases = [
            "a b\nb c\nc d\nd e\nb f\nf g\n",
            "a b 1/2\nb c 4\nb d 1\nd e 2/3\na f 7\n",
            "s a\ns b\ns c\ns d\n",
        ];
        for text in cases {
            let t = WeightedTree::parse(text).unwrap();
            for target in 0..t.n() {
                let table = hitting_times_to(&t, target);
                let want = linear_system_oracle(&t, target);
                assert_eq!(table.times, want, "{text:?} target {target}");
            }
        }
    }

    #[test]
    fn weighted_path_from_spec_of_the_walk() {
        // a-b resistance 1, b-c resistance 2: H[b,a] = 2 (direct solve)
        let t = WeightedTree::parse("a b 1\nb c 2\n").unwrap();
        assert_eq!(hitting_time_exact(&t, 1, 0).unwrap(), rat_u(2));
        // from c: forced to b (1 step), then H[b,a]
        let hca = rat_to_f64(&hitting_time_exact(&t, 2, 0).unwrap());
        assert_eq!(hca, 3.0);
    }
}
