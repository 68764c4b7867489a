use std::collections::HashMap;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::numeric::{parse_rat, Rat};

/// A finite tree with positive edge resistances.
///
/// Vertices are indexed densely in order of first appearance in the input;
/// `labels[i]` recovers the user-facing name. Adjacency lists preserve input
/// order, which fixes the child order used everywhere downstream.
#[derive(Debug, Clone)]
pub struct WeightedTree {
    labels: Vec<String>,
    index: HashMap<String, usize>,
    /// (u, v, resistance) in input order.
    edges: Vec<(usize, usize, Rat)>,
    /// adj[v] = (neighbor, edge id) in input order.
    adj: Vec<Vec<(usize, usize)>>,
    unit: bool,
}

impl WeightedTree {
    /// Parses the line-oriented edge-list format: `u v` (unit resistance),
    /// `u v r` (resistance `r > 0`), or a lone `u` declaring an isolated
    /// vertex (only useful for the single-vertex tree). `#` starts a comment.
    pub fn parse(text: &str) -> Result<WeightedTree> {
        let mut t = WeightedTree {
            labels: Vec::new(),
            index: HashMap::new(),
            edges: Vec::new(),
            adj: Vec::new(),
            unit: true,
        };
        let mut seen_pairs: HashMap<(usize, usize), ()> = HashMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(i) => &raw[..i],
                None => raw,
            };
            let toks: Vec<&str> = line.split_whitespace().collect();
            match toks.len() {
                0 => continue,
                1 => {
                    t.intern(toks[0]);
                }
                2 | 3 => {
                    let u = t.intern(toks[0]);
                    let v = t.intern(toks[1]);
                    if u == v {
                        return Err(Error::input(format!(
                            "line {}: self-loop at '{}'",
                            lineno + 1,
                            toks[0]
                        )));
                    }
                    let key = (u.min(v), u.max(v));
                    if seen_pairs.insert(key, ()).is_some() {
                        return Err(Error::input(format!(
                            "line {}: duplicate edge {} {}",
                            lineno + 1,
                            toks[0],
                            toks[1]
                        )));
                    }
                    let r = if toks.len() == 3 {
                        let r = parse_rat(toks[2])?;
                        if !r.is_positive() {
                            return Err(Error::input(format!(
                                "line {}: resistance must be positive",
                                lineno + 1
                            )));
                        }
                        r
                    } else {
                        Rat::one()
                    };
                    if !r.is_one() {
                        t.unit = false;
                    }
                    let eid = t.edges.len();
                    t.edges.push((u, v, r));
                    t.adj[u].push((v, eid));
                    t.adj[v].push((u, eid));
                }
                _ => {
                    return Err(Error::input(format!(
                        "line {}: expected 'u v [resistance]'",
                        lineno + 1
                    )))
                }
            }
        }
        if t.labels.is_empty() {
            return Err(Error::input("empty tree file"));
        }
        if t.edges.len() + 1 != t.labels.len() {
            return Err(Error::input(format!(
                "{} vertices and {} edges do not form a tree",
                t.labels.len(),
                t.edges.len()
            )));
        }
        // n-1 edges without duplicates or loops: connected iff acyclic, and
        // a BFS from vertex 0 certifies it.
        let mut seen = vec![false; t.labels.len()];
        let mut queue = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = queue.pop() {
            for &(u, _) in &t.adj[v] {
                if !seen[u] {
                    seen[u] = true;
                    count += 1;
                    queue.push(u);
                }
            }
        }
        if count != t.labels.len() {
            return Err(Error::input("tree file is disconnected"));
        }
        Ok(t)
    }

    fn intern(&mut self, label: &str) -> usize {
        if let Some(&i) = self.index.get(label) {
            return i;
        }
        let i = self.labels.len();
        self.labels.push(label.to_string());
        self.index.insert(label.to_string(), i);
        self.adj.push(Vec::new());
        i
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn label(&self, v: usize) -> &str {
        &self.labels[v]
    }

    pub fn vertex(&self, label: &str) -> Result<usize> {
        self.index
            .get(label)
            .copied()
            .ok_or_else(|| Error::input(format!("unknown vertex '{label}'")))
    }

    pub fn edges(&self) -> &[(usize, usize, Rat)] {
        &self.edges
    }

    /// Neighbors of `v` with the connecting edge id, in input order.
    pub fn neighbors(&self, v: usize) -> &[(usize, usize)] {
        &self.adj[v]
    }

    pub fn resistance(&self, eid: usize) -> &Rat {
        &self.edges[eid].2
    }

    pub fn is_unit(&self) -> bool {
        self.unit
    }

    /// Sum of edge resistances.
    pub fn total_resistance(&self) -> Rat {
        let mut s = Rat::zero();
        for (_, _, r) in &self.edges {
            s += r;
        }
        s
    }

    /// One-step transition probabilities of the conductance-weighted walk at
    /// `v`: each incident edge is taken with probability proportional to its
    /// conductance 1/r. Returned in adjacency (input) order.
    pub fn step_distribution(&self, v: usize) -> Vec<(usize, Rat)> {
        let mut total = Rat::zero();
        let mut cond = Vec::with_capacity(self.adj[v].len());
        for &(u, eid) in &self.adj[v] {
            let c = self.edges[eid].2.recip();
            total += &c;
            cond.push((u, c));
        }
        cond.into_iter().map(|(u, c)| (u, c / &total)).collect()
    }
}

/// A tree rooted for the estimator: a virtual super root above the start
/// vertex, joined by a unit-resistance edge. Node 0 is the super root and
/// node 1 is the start; remaining nodes keep their `WeightedTree` identity
/// through `orig`.
#[derive(Debug, Clone)]
pub struct RootedTree {
    /// orig[i] = vertex id in the source tree; orig[0] is unused (super root).
    pub orig: Vec<usize>,
    pub parent: Vec<Option<usize>>,
    /// children in input-file adjacency order.
    pub children: Vec<Vec<usize>>,
    /// Resistance of the edge to the parent; up_r[0] is unused.
    pub up_r: Vec<Rat>,
    pub n_original: usize,
}

/// Roots `tree` at `start` and attaches the super root.
pub fn attach_super_root(tree: &WeightedTree, start: usize) -> RootedTree {
    let n = tree.n();
    assert!(start < n);
    let mut rt = RootedTree {
        orig: vec![usize::MAX, start],
        parent: vec![None, Some(0)],
        children: vec![vec![1], Vec::new()],
        up_r: vec![Rat::zero(), Rat::one()],
        n_original: n,
    };
    let mut node_of = vec![usize::MAX; n];
    node_of[start] = 1;
    // Depth-first in input-adjacency order keeps children ordered as in the
    // file; an explicit stack avoids recursion depth limits on long paths.
    let mut stack = vec![1usize];
    while let Some(node) = stack.pop() {
        let v = rt.orig[node];
        let mut new_children = Vec::new();
        for &(u, eid) in tree.neighbors(v) {
            if node_of[u] != usize::MAX {
                continue;
            }
            let child = rt.orig.len();
            node_of[u] = child;
            rt.orig.push(u);
            rt.parent.push(Some(node));
            rt.children.push(Vec::new());
            rt.up_r.push(tree.resistance(eid).clone());
            rt.children[node].push(child);
            new_children.push(child);
        }
        // Reverse so the stack pops children in input order (cosmetic: the
        // children lists above are already in input order).
        for c in new_children.into_iter().rev() {
            stack.push(c);
        }
    }
    rt
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::rat_i64;

    #[test]
    fn parse_basic_path() {
        let t = WeightedTree::parse("a b\nb c # comment\n").unwrap();
        assert_eq!(t.n(), 3);
        assert!(t.is_unit());
        assert_eq!(t.vertex("b").unwrap(), 1);
        let d = t.step_distribution(1);
        assert_eq!(d, vec![(0, rat_i64(1, 2)), (2, rat_i64(1, 2))]);
    }

    #[test]
    fn parse_weighted() {
        let t = WeightedTree::parse("a b 2\nb c 1/3\n").unwrap();
        assert!(!t.is_unit());
        assert_eq!(t.total_resistance(), rat_i64(7, 3));
        // conductances at b: 1/2 and 3 -> probabilities 1/7 and 6/7.
        let d = t.step_distribution(1);
        assert_eq!(d[0].1, rat_i64(1, 7));
        assert_eq!(d[1].1, rat_i64(6, 7));
    }

    #[test]
    fn parse_rejects_bad_input() {
        assert!(WeightedTree::parse("a a\n").is_err());
        assert!(WeightedTree::parse("a b\na b\n").is_err());
        assert!(WeightedTree::parse("a b\nc d\n").is_err());
        assert!(WeightedTree::parse("a b 0\n").is_err());
        assert!(WeightedTree::parse("a b -1\n").is_err());
        assert!(WeightedTree::parse("").is_err());
        assert!(WeightedTree::parse("a b c d\n").is_err());
    }

    #[test]
    fn single_vertex() {
        let t = WeightedTree::parse("solo\n").unwrap();
        assert_eq!(t.n(), 1);
        assert_eq!(t.edges().len(), 0);
    }

    #[test]
    fn rooting_orders_children_by_input() {
        let t = WeightedTree::parse("c a\nc b\nc d\n").unwrap();
        let start = t.vertex("c").unwrap();
        let rt = attach_super_root(&t, start);
        assert_eq!(rt.parent[1], Some(0));
        let kids: Vec<&str> = rt.children[1].iter().map(|&k| t.label(rt.orig[k])).collect();
        assert_eq!(kids, vec!["a", "b", "d"]);
        assert_eq!(rt.up_r[1], Rat::one());
    }
}
