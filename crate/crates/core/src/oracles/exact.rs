//! Exhaustive exact oracle for small trees.
//!
//! Expected cover times are solved from first principles: the walk is lifted
//! to states `(position, visited set)`, and since the visited set only ever
//! grows, the linear system decomposes into layers (one per set) that are
//! solved in decreasing-coverage order by rational Gaussian elimination.
//! Everything is exact; nothing here shares code with the estimator.

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::gadget::{GadgetTree, NodeClass};
use crate::numeric::Rat;
use crate::tree::WeightedTree;

/// Hard cap on vertex count; the state space is exponential.
pub const MAX_EXACT_N: usize = 14;

/// Exact expectations and the last-vertex distribution.
#[derive(Debug, Clone)]
pub struct ExactResult {
    /// Expected steps to visit every vertex and be back at the start.
    pub cover_return: Rat,
    /// Expected steps to visit every vertex.
    pub cover: Rat,
    /// p_last[v] = probability that v is the final vertex to be visited.
    pub p_last: Vec<Rat>,
}

/// Solves the dense system `a x = rhs` (multi-column rhs) in place.
/// Panics on singular systems; the chains here are absorbing, so their
/// restricted transition matrices are always invertible.
fn solve(mut a: Vec<Vec<Rat>>, mut rhs: Vec<Vec<Rat>>) -> Vec<Vec<Rat>> {
    let n = a.len();
    let m = rhs.first().map_or(0, |r| r.len());
    for col in 0..n {
        let pivot = (col..n)
            .find(|&r| !a[r][col].is_zero())
            .expect("singular layer system");
        a.swap(col, pivot);
        rhs.swap(col, pivot);
        let inv = a[col][col].clone().recip();
        for c in col..n {
            a[col][c] *= &inv;
        }
        for c in 0..m {
            rhs[col][c] *= &inv;
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for c in col..n {
                let sub = &f * &a[col][c];
                a[r][c] -= sub;
            }
            for c in 0..m {
                let sub = &f * &rhs[col][c];
                rhs[r][c] -= sub;
            }
        }
    }
    rhs
}

fn check_size(tree: &WeightedTree) -> Result<()> {
    if tree.n() > MAX_EXACT_N {
        return Err(Error::resource(format!(
            "exact oracle limited to {MAX_EXACT_N} vertices, got {}",
            tree.n()
        )));
    }
    Ok(())
}

/// Visited sets reachable from the start, i.e. connected and containing it,
/// grouped by size (ascending).
fn reachable_sets(tree: &WeightedTree, start: usize) -> Vec<Vec<u32>> {
    let n = tree.n();
    let mut by_size: Vec<Vec<u32>> = vec![Vec::new(); n + 1];
    for set in 0u32..(1 << n) {
        if set & (1 << start) == 0 {
            continue;
        }
        // connectivity within the induced subgraph
        let mut seen = 1u32 << start;
        let mut stack = vec![start];
        while let Some(v) = stack.pop() {
            for &(u, _) in tree.neighbors(v) {
                if set & (1 << u) != 0 && seen & (1 << u) == 0 {
                    seen |= 1 << u;
                    stack.push(u);
                }
            }
        }
        if seen == set {
            by_size[set.count_ones() as usize].push(set);
        }
    }
    by_size
}

/// Expected steps from `(start, {start})` until the visited set is full and,
/// if `return_to_start`, the walk is back at the start.
fn expected_cover(tree: &WeightedTree, start: usize, return_to_start: bool) -> Rat {
    let n = tree.n();
    if n == 1 {
        return Rat::zero();
    }
    let full = (1u32 << n) - 1;
    let steps: Vec<Vec<(usize, Rat)>> = (0..n).map(|v| tree.step_distribution(v)).collect();
    // h[v][set index] unknowns per layer; store solved values densely.
    let mut solved: std::collections::HashMap<(usize, u32), Rat> = std::collections::HashMap::new();
    let by_size = reachable_sets(tree, start);
    for size in (1..=n).rev() {
        for &set in &by_size[size] {
            // Positions inside `set`; when the set is full and we require a
            // return, the start is absorbing.
            let verts: Vec<usize> = (0..n).filter(|&v| set & (1 << v) != 0).collect();
            let idx_of = |v: usize| verts.iter().position(|&x| x == v).unwrap();
            let mut a = vec![vec![Rat::zero(); verts.len()]; verts.len()];
            let mut rhs = vec![vec![Rat::zero()]; verts.len()];
            for (i, &v) in verts.iter().enumerate() {
                if set == full && (!return_to_start || v == start) {
                    // Absorbed: expectation 0. (Cover without return
                    // absorbs everywhere in the full layer.)
                    a[i][i] = Rat::one();
                    continue;
                }
                a[i][i] = Rat::one();
                rhs[i][0] = Rat::one();
                for (u, p) in &steps[v] {
                    let nset = set | (1 << u);
                    if nset == set {
                        a[i][idx_of(*u)] -= p;
                    } else {
                        let down = solved
                            .get(&(*u, nset))
                            .expect("superset layer must be solved first");
                        rhs[i][0] += &(p * down);
                    }
                }
            }
            let x = solve(a, rhs);
            for (i, &v) in verts.iter().enumerate() {
                solved.insert((v, set), x[i][0].clone());
            }
        }
    }
    solved.remove(&(start, 1 << start)).unwrap()
}

/// Probability, per vertex, of being the last one visited.
fn last_vertex_distribution(tree: &WeightedTree, start: usize) -> Vec<Rat> {
    let n = tree.n();
    if n == 1 {
        let mut p = vec![Rat::zero(); 1];
        p[0] = Rat::one();
        return p;
    }
    let full = (1u32 << n) - 1;
    let steps: Vec<Vec<(usize, Rat)>> = (0..n).map(|v| tree.step_distribution(v)).collect();
    let mut solved: std::collections::HashMap<(usize, u32), Vec<Rat>> =
        std::collections::HashMap::new();
    let by_size = reachable_sets(tree, start);
    for size in (1..n).rev() {
        for &set in &by_size[size] {
            let verts: Vec<usize> = (0..n).filter(|&v| set & (1 << v) != 0).collect();
            let idx_of = |v: usize| verts.iter().position(|&x| x == v).unwrap();
            let mut a = vec![vec![Rat::zero(); verts.len()]; verts.len()];
            let mut rhs = vec![vec![Rat::zero(); n]; verts.len()];
            for (i, &v) in verts.iter().enumerate() {
                a[i][i] = Rat::one();
                for (u, p) in &steps[v] {
                    let nset = set | (1 << u);
                    if nset == set {
                        a[i][idx_of(*u)] -= p;
                    } else if nset == full {
                        // Entering the final vertex completes coverage.
                        rhs[i][*u] += p;
                    } else {
                        let down = solved
                            .get(&(*u, nset))
                            .expect("superset layer must be solved first");
                        for (c, d) in down.iter().enumerate() {
                            rhs[i][c] += &(p * d);
                        }
                    }
                }
            }
            let x = solve(a, rhs);
            for (i, &v) in verts.iter().enumerate() {
                solved.insert((v, set), x[i].clone());
            }
        }
    }
    solved.remove(&(start, 1 << start)).unwrap()
}

/// Runs the full exact oracle.
pub fn oracle_exact(tree: &WeightedTree, start: usize) -> Result<ExactResult> {
    check_size(tree)?;
    Ok(ExactResult {
        cover_return: expected_cover(tree, start, true),
        cover: expected_cover(tree, start, false),
        p_last: last_vertex_distribution(tree, start),
    })
}

/// Position states for the binarized-subtree walk: weight-one nodes are
/// memoryless, relays remember the direction they were entered from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Pos {
    Plain(usize),
    RelayDown(usize),
    RelayUp(usize),
}

/// Exact per-node coverage profile on the binarized tree: element t-1 is
/// the probability that the subtree below `node` is fully visited within
/// the walk's first t stays below the node's parent edge.
///
/// This is the semantic reference for the dynamic program's profiles; it
/// simulates the binarized walk rules directly and shares nothing with the
/// kernel machinery.
pub fn exact_profile(gt: &GadgetTree, node: usize, t_max: usize) -> Result<Vec<Rat>> {
    assert!(node >= 1 && node < gt.len());
    // Collect the subtree and its original vertices.
    let mut sub = Vec::new();
    let mut stack = vec![node];
    while let Some(v) = stack.pop() {
        sub.push(v);
        for &c in &gt.children[v] {
            stack.push(c);
        }
    }
    let originals: Vec<usize> = sub
        .iter()
        .copied()
        .filter(|&v| !gt.is_relay(v))
        .collect();
    if originals.len() > 20 {
        return Err(Error::resource(
            "profile oracle limited to 20 original vertices in the subtree",
        ));
    }
    let bit_of = |v: usize| originals.iter().position(|&x| x == v).unwrap();
    let full: u32 = (1u32 << originals.len()) - 1;

    // Enumerate position states.
    let mut positions: Vec<Pos> = Vec::new();
    for &v in &sub {
        if gt.is_relay(v) {
            positions.push(Pos::RelayDown(v));
            positions.push(Pos::RelayUp(v));
        } else {
            positions.push(Pos::Plain(v));
        }
    }
    let pos_idx = |p: Pos| positions.iter().position(|&x| x == p).unwrap();
    let in_sub = |v: usize| sub.contains(&v);

    // Moves from each position: Err(()) marks the exit through the parent
    // edge of `node`.
    #[derive(Clone)]
    enum Target {
        Inside(Pos, Option<u32>),
        Exit,
    }
    let enter = |v: usize| -> (Pos, Option<u32>) {
        if gt.is_relay(v) {
            (Pos::RelayDown(v), None)
        } else {
            (Pos::Plain(v), Some(1u32 << bit_of(v)))
        }
    };
    let up_target = |v: usize| -> Target {
        if v == node {
            return Target::Exit;
        }
        let p = gt.parent[v].unwrap();
        if !in_sub(p) {
            // Only possible for v == node, handled above.
            unreachable!("walked above the profiled node");
        }
        if gt.is_relay(p) {
            Target::Inside(Pos::RelayUp(p), None)
        } else {
            let (q, bit) = enter(p);
            Target::Inside(q, bit)
        }
    };
    let moves: Vec<Vec<(Target, Rat)>> = positions
        .iter()
        .map(|&p| match p {
            Pos::Plain(v) => {
                let kids = &gt.children[v];
                match &gt.class[v] {
                    NodeClass::Leaf => vec![(up_target(v), Rat::one())],
                    NodeClass::OneChild { pp, pl } => {
                        let (q, b) = enter(kids[0]);
                        vec![
                            (up_target(v), pp.clone()),
                            (Target::Inside(q, b), pl.clone()),
                        ]
                    }
                    NodeClass::TwoChild { pp, pl, pr } => {
                        let (ql, bl) = enter(kids[0]);
                        let (qr, br) = enter(kids[1]);
                        vec![
                            (up_target(v), pp.clone()),
                            (Target::Inside(ql, bl), pl.clone()),
                            (Target::Inside(qr, br), pr.clone()),
                        ]
                    }
                    NodeClass::Gadget { .. } => unreachable!(),
                }
            }
            Pos::RelayDown(v) => {
                let kids = &gt.children[v];
                match &gt.class[v] {
                    NodeClass::Gadget { pl, pr } => {
                        let (ql, bl) = enter(kids[0]);
                        let (qr, br) = enter(kids[1]);
                        vec![
                            (Target::Inside(ql, bl), pl.clone()),
                            (Target::Inside(qr, br), pr.clone()),
                        ]
                    }
                    _ => unreachable!(),
                }
            }
            Pos::RelayUp(v) => vec![(up_target(v), Rat::one())],
        })
        .collect();

    // Entry state for each stay.
    let (entry_pos, entry_bit) = enter(node);
    let entry = pos_idx(entry_pos);

    // One stay: from a distribution over (position, set), flow until exit;
    // returns (exit distribution over sets, newly covered mass). Sets only
    // grow, so we sweep layers in ascending popcount order.
    let np = positions.len();
    let stay = |start_mass: &std::collections::HashMap<u32, Rat>| {
        let mut layer_in: std::collections::HashMap<u32, Vec<Rat>> =
            std::collections::HashMap::new();
        for (&set, mass) in start_mass {
            let mut v = vec![Rat::zero(); np];
            v[entry] = mass.clone();
            layer_in.entry(set).or_insert(v);
        }
        let mut covered = Rat::zero();
        let mut exited: std::collections::HashMap<u32, Rat> = std::collections::HashMap::new();
        let mut sets: Vec<u32> = layer_in.keys().copied().collect();
        sets.sort_by_key(|s| (s.count_ones(), *s));
        let mut qi = 0;
        while qi < sets.len() {
            let set = sets[qi];
            qi += 1;
            let mass_in = match layer_in.remove(&set) {
                Some(m) => m,
                None => continue,
            };
            if mass_in.iter().all(|x| x.is_zero()) {
                continue;
            }
            // Solve the within-layer flow: x = mass_in + x A, where A keeps
            // moves that stay in `set`. Solve (I - A^T) x = mass_in.
            let mut a = vec![vec![Rat::zero(); np]; np];
            for i in 0..np {
                a[i][i] = Rat::one();
            }
            let mut keep = Vec::new();
            for (i, mv) in moves.iter().enumerate() {
                for (tgt, p) in mv {
                    if let Target::Inside(q, bit) = tgt {
                        let stays = match bit {
                            Some(b) => set & b != 0,
                            None => true,
                        };
                        if stays {
                            let j = pos_idx(*q);
                            a[j][i] -= p;
                            keep.push((i, j));
                        }
                    }
                }
            }
            let rhs: Vec<Vec<Rat>> = mass_in.iter().map(|m| vec![m.clone()]).collect();
            let x = solve(a, rhs);
            // Route outflow: exits and set-growing moves.
            for (i, mv) in moves.iter().enumerate() {
                if x[i][0].is_zero() {
                    continue;
                }
                for (tgt, p) in mv {
                    let flow = &x[i][0] * p;
                    match tgt {
                        Target::Exit => {
                            *exited.entry(set).or_insert_with(Rat::zero) += &flow;
                        }
                        Target::Inside(q, bit) => {
                            let (nset, grew) = match bit {
                                Some(b) if set & b == 0 => (set | b, true),
                                _ => (set, false),
                            };
                            if !grew {
                                continue;
                            }
                            if nset == full {
                                covered += &flow;
                            } else {
                                let j = pos_idx(*q);
                                let entry_vec = layer_in
                                    .entry(nset)
                                    .or_insert_with(|| vec![Rat::zero(); np]);
                                entry_vec[j] += &flow;
                                if !sets.contains(&nset) {
                                    sets.push(nset);
                                    sets[qi..].sort_by_key(|s| (s.count_ones(), *s));
                                }
                            }
                        }
                    }
                }
            }
        }
        (exited, covered)
    };

    let mut profile = Vec::with_capacity(t_max);
    let mut cum = Rat::zero();
    let mut dist: std::collections::HashMap<u32, Rat> = std::collections::HashMap::new();
    let init_set = entry_bit.unwrap_or(0);
    if init_set == full {
        // Single-vertex subtree: covered from the first stay on.
        return Ok(vec![Rat::one(); t_max]);
    }
    dist.insert(init_set, Rat::one());
    for _ in 0..t_max {
        let (exited, covered) = stay(&dist);
        cum += &covered;
        profile.push(cum.clone());
        dist = exited;
    }
    Ok(profile)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gadget::binarize;
    use crate::numeric::{rat_i64, rat_u};
    use crate::tree::attach_super_root;

    fn path(n: usize) -> WeightedTree {
        let mut s = String::new();
        for i in 1..n {
            s.push_str(&format!("v{} v{}\n", i - 1, i));
        }
        if n == 1 {
            s.push_str("v0\n");
        }
        WeightedTree::parse(&s).unwrap()
    }

    fn star(k: usize) -> WeightedTree {
        let mut s = String::new();
        for i in 0..k {
            s.push_str(&format!("c x{i}\n"));
        }
        WeightedTree::parse(&s).unwrap()
    }

    #[test]
    fn two_vertex_closed_forms() {
        let t = path(2);
        let r = oracle_exact(&t, 0).unwrap();
        assert_eq!(r.cover_return, rat_u(2));
        assert_eq!(r.cover, rat_u(1));
        assert_eq!(r.p_last, vec![Rat::zero(), Rat::one()]);
    }

    #[test]
    fn path_endpoint_closed_forms() {
        // From an endpoint: cover = (n-1)^2, cover and return = 2 (n-1)^2.
        for n in 2..=6 {
            let t = path(n);
            let r = oracle_exact(&t, 0).unwrap();
            let m = (n - 1) as u64;
            assert_eq!(r.cover, rat_u(m * m), "cover, n={n}");
            assert_eq!(r.cover_return, rat_u(2 * m * m), "cover_return, n={n}");
            // Last vertex from an endpoint is always the far endpoint.
            assert_eq!(r.p_last[n - 1], Rat::one());
        }
    }

    #[test]
    fn star_center_closed_forms() {
        // Coupon collecting: each leaf round trip costs two steps.
        // cover_return = 2 (n-1) H_{n-1}; the last excursion's return step
        // is not needed for plain cover, so cover = cover_return - 1.
        for k in 2..=5usize {
            let t = star(k);
            let r = oracle_exact(&t, 0).unwrap();
            let mut h = Rat::zero();
            for j in 1..=k as i64 {
                h += rat_i64(1, j);
            }
            let expect = &rat_u(2 * k as u64) * &h;
            assert_eq!(r.cover_return, expect, "star k={k}");
            assert_eq!(r.cover, &expect - &Rat::one());
            // Symmetric leaves are equally likely last.
            for leaf in 1..=k {
                assert_eq!(r.p_last[leaf], rat_i64(1, k as i64));
            }
        }
    }

    #[test]
    fn p_last_sums_to_one() {
        let t = WeightedTree::parse("a b\nb c\nb d\nd e\n").unwrap();
        for start in 0..t.n() {
            let r = oracle_exact(&t, start).unwrap();
            let total: Rat = r.p_last.iter().sum();
            assert!(total.is_one());
            assert!(r.p_last[start].is_zero() || t.n() == 1);
        }
    }

    #[test]
    fn weighted_walks() {
        // A single edge is deterministic whatever its resistance.
        let t = WeightedTree::parse("a b 5/2\n").unwrap();
        let r = oracle_exact(&t, 0).unwrap();
        assert_eq!(r.cover_return, rat_u(2));
        assert_eq!(r.cover, rat_u(1));

        // Weighted path a - b - c (resistances 1 and 2) from endpoint a:
        // cover-and-return equals the a..c commute, 2 (sum of conductances)
        // x (path resistance) = 2 * 3/2 * 3 = 9; plain cover equals the
        // hitting time of c, 9 - 3 = 6 by the edge-crossing decomposition.
        let t = WeightedTree::parse("a b 1\nb c 2\n").unwrap();
        let r = oracle_exact(&t, 0).unwrap();
        assert_eq!(r.cover_return, rat_u(9));
        assert_eq!(r.cover, rat_u(6));
    }

    #[test]
    fn profile_of_leaf_edge_is_one() {
        // A leaf subtree is covered by its first stay.
        let t = path(3);
        let gt = binarize(&attach_super_root(&t, 0));
        // node ids: 0 super root, 1 = v0, 2 = v1, 3 = v2.
        let p = exact_profile(&gt, 3, 4).unwrap();
        assert_eq!(p, vec![Rat::one(); 4]);
    }

    #[test]
    fn profile_of_one_child_chain() {
        // Subtree = v1 - v2 seen through edge (v0, v1): covered during the
        // first t stays unless every stay departs upward immediately;
        // P(t) = 1 - 2^(-t).
        let t = path(3);
        let gt = binarize(&attach_super_root(&t, 0));
        let p = exact_profile(&gt, 2, 5).unwrap();
        for (i, v) in p.iter().enumerate() {
            let t = i + 1;
            assert_eq!(*v, &Rat::one() - &rat_i64(1, 1 << t), "t={t}");
        }
    }

    #[test]
    fn profile_root_two_leaves() {
        // Root with two leaf children: P(1) = probability both children
        // are visited before the first departure = 1/3 for the uniform
        // three-way split.
        let t = star(2);
        let gt = binarize(&attach_super_root(&t, 0));
        let p = exact_profile(&gt, 1, 3).unwrap();
        assert_eq!(p[0], rat_i64(1, 3));
    }

    #[test]
    fn relay_profile_two_leaves() {
        // Relay bundling two leaves under a degree-three center: covered
        // within t descents iff both sides were chosen; the split here is
        // (1/2, 1/2), so P(t) = 1 - 2 * 2^(-t).
        let t = star(3);
        let gt = binarize(&attach_super_root(&t, 0));
        let relay = (0..gt.len()).find(|&v| gt.is_relay(v)).unwrap();
        let p = exact_profile(&gt, relay, 5).unwrap();
        for (i, v) in p.iter().enumerate() {
            let t = i + 1;
            assert_eq!(*v, &Rat::one() - &rat_i64(2, 1 << t), "t={t}");
        }
    }
}
