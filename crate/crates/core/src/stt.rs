//! Search trees on trees.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::rational::{qi, Rational};
use crate::topology::{nodes_of, NodeSet, Topology};

const NONE: u8 = u8::MAX;
const ROOT: u8 = u8::MAX - 1;

/// A search tree over a topology, stored as a parent array.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SearchTree {
    root: usize,
    // parent per node; NONE outside the tree, ROOT for the root
    parent: Vec<u8>,
}

impl SearchTree {
    fn from_parent(parent: Vec<u8>) -> Self {
        let root = parent.iter().position(|&p| p == ROOT).expect("tree has a root");
        SearchTree { root, parent }
    }

    /// Builds a tree from a parent map (`None` for the root), validating it
    /// against the topology.
    pub fn from_parents(u: &Topology, parents: &[Option<usize>]) -> Result<Self> {
        if parents.len() != u.n() {
            return Err(Error::Dimension { expected: u.n(), got: parents.len() });
        }
        let mut parent = vec![NONE; u.n()];
        let mut roots = 0;
        for (v, p) in parents.iter().enumerate() {
            parent[v] = match p {
                None => {
                    roots += 1;
                    ROOT
                }
                Some(p) if *p < u.n() && *p != v => *p as u8,
                Some(_) => return Err(Error::Invalid("bad parent".into())),
            };
        }
        if roots != 1 {
            return Err(Error::Invalid("exactly one root required".into()));
        }
        let t = SearchTree::from_parent(parent);
        t.validate(u)?;
        Ok(t)
    }

    pub fn n(&self) -> usize {
        self.parent.len()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        match self.parent[v] {
            NONE | ROOT => None,
            p => Some(p as usize),
        }
    }

    pub fn contains(&self, v: usize) -> bool {
        self.parent[v] != NONE
    }

    pub fn node_set(&self) -> NodeSet {
        self.parent.iter().enumerate().filter(|(_, &p)| p != NONE).fold(0, |s, (v, _)| s | 1 << v)
    }

    /// Children of `v`, ordered by their smallest subtree node.
    pub fn children(&self, v: usize) -> Vec<usize> {
        let mut kids: Vec<(usize, usize)> = (0..self.n())
            .filter(|&c| self.parent[c] == v as u8 && self.parent[c] != ROOT)
            .map(|c| (self.subtree_min(c), c))
            .collect();
        kids.sort_unstable();
        kids.into_iter().map(|x| x.1).collect()
    }

    fn subtree_min(&self, v: usize) -> usize {
        (0..self.n()).find(|&u| self.contains(u) && self.is_ancestor_or_self(v, u)).unwrap_or(v)
    }

    pub fn is_ancestor_or_self(&self, a: usize, v: usize) -> bool {
        let mut c = v;
        loop {
            if c == a {
                return true;
            }
            match self.parent(c) {
                Some(p) => c = p,
                None => return false,
            }
        }
    }

    /// Strict ancestry.
    pub fn is_ancestor(&self, a: usize, v: usize) -> bool {
        a != v && self.is_ancestor_or_self(a, v)
    }

    pub fn subtree(&self, v: usize) -> NodeSet {
        (0..self.n()).filter(|&u| self.contains(u) && self.is_ancestor_or_self(v, u)).fold(0, |s, u| s | 1 << u)
    }

    pub fn lca(&self, a: usize, b: usize) -> usize {
        let mut c = a;
        loop {
            if self.is_ancestor_or_self(c, b) {
                return c;
            }
            c = self.parent(c).expect("nodes share the tree");
        }
    }

    /// Strict ancestor counts (root 0); nodes outside the tree get 0.
    pub fn depth_counts(&self) -> Vec<u32> {
        (0..self.n())
            .map(|v| {
                if !self.contains(v) {
                    return 0;
                }
                let mut d = 0;
                let mut c = v;
                while let Some(p) = self.parent(c) {
                    d += 1;
                    c = p;
                }
                d
            })
            .collect()
    }

    pub fn depths(&self) -> Vec<Rational> {
        self.depth_counts().into_iter().map(|d| qi(d as i64)).collect()
    }

    /// Checks that every subtree is one connected component of its parent's
    /// component minus the parent.
    pub fn validate(&self, u: &Topology) -> Result<()> {
        if self.n() != u.n() {
            return Err(Error::Dimension { expected: u.n(), got: self.n() });
        }
        // cycle check through parent pointers
        for v in 0..self.n() {
            if !self.contains(v) {
                continue;
            }
            let mut c = v;
            let mut steps = 0;
            while let Some(p) = self.parent(c) {
                if !self.contains(p) {
                    return Err(Error::Invalid("parent outside tree".into()));
                }
                c = p;
                steps += 1;
                if steps > self.n() {
                    return Err(Error::Invalid("parent cycle".into()));
                }
            }
        }
        let all = self.node_set();
        if !u.is_connected_set(all) {
            return Err(Error::Invalid("tree nodes are not connected in the topology".into()));
        }
        self.validate_at(u, self.root, all)
    }

    fn validate_at(&self, u: &Topology, r: usize, comp: NodeSet) -> Result<()> {
        let comps = u.components(comp, r);
        let kids = self.children(r);
        if comps.len() != kids.len() {
            return Err(Error::Invalid(format!(
                "node {} has {} children but {} components",
                r + 1,
                kids.len(),
                comps.len()
            )));
        }
        for (c, k) in comps.iter().zip(&kids) {
            if self.subtree(*k) != *c {
                return Err(Error::Invalid(format!("subtree of {} is not a component", k + 1)));
            }
            self.validate_at(u, *k, *c)?;
        }
        Ok(())
    }

    /// Nested form `root(child,...)` with 1-based ids.
    pub fn to_nested(&self) -> String {
        let mut s = String::new();
        self.nested_at(self.root, &mut s);
        s
    }

    fn nested_at(&self, v: usize, s: &mut String) {
        s.push_str(&(v + 1).to_string());
        let kids = self.children(v);
        if !kids.is_empty() {
            s.push('(');
            for (i, k) in kids.iter().enumerate() {
                if i > 0 {
                    s.push(',');
                }
                self.nested_at(*k, s);
            }
            s.push(')');
        }
    }

    /// Parses the nested form and validates it against `u`.
    pub fn parse_nested(u: &Topology, text: &str) -> Result<Self> {
        let bytes: Vec<char> = text.chars().filter(|c| !c.is_whitespace()).collect();
        let mut pos = 0;
        let mut parent = vec![NONE; u.n()];
        fn node(b: &[char], pos: &mut usize, parent: &mut [u8], up: u8) -> Result<()> {
            let start = *pos;
            while *pos < b.len() && b[*pos].is_ascii_digit() {
                *pos += 1;
            }
            let id: usize = b[start..*pos]
                .iter()
                .collect::<String>()
                .parse()
                .map_err(|_| Error::Parse("expected node id".into()))?;
            if id == 0 || id > parent.len() {
                return Err(Error::Parse(format!("node {id} out of range")));
            }
            if parent[id - 1] != NONE {
                return Err(Error::Parse(format!("node {id} repeated")));
            }
            parent[id - 1] = up;
            if *pos < b.len() && b[*pos] == '(' {
                *pos += 1;
                loop {
                    node(b, pos, parent, (id - 1) as u8)?;
                    match b.get(*pos) {
                        Some(',') => *pos += 1,
                        Some(')') => {
                            *pos += 1;
                            break;
                        }
                        _ => return Err(Error::Parse("unbalanced parentheses".into())),
                    }
                }
            }
            Ok(())
        }
        node(&bytes, &mut pos, &mut parent, ROOT)?;
        if pos != bytes.len() {
            return Err(Error::Parse("trailing characters".into()));
        }
        let t = SearchTree::from_parent(parent);
        t.validate(u)?;
        Ok(t)
    }
}

impl fmt::Debug for SearchTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_nested())
    }
}

impl fmt::Display for SearchTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_nested())
    }
}

/// Memoized enumeration of all search trees over node subsets.
struct Enumerator<'a> {
    u: &'a Topology,
    memo: HashMap<NodeSet, Vec<Vec<u8>>>,
}

impl<'a> Enumerator<'a> {
    fn trees(&mut self, comp: NodeSet) -> Vec<Vec<u8>> {
        if let Some(v) = self.memo.get(&comp) {
            return v.clone();
        }
        let n = self.u.n();
        let mut out = Vec::new();
        for r in nodes_of(comp) {
            let comps = self.u.components(comp, r);
            let subs: Vec<Vec<Vec<u8>>> = comps.iter().map(|&c| self.trees(c)).collect();
            let mut base = vec![NONE; n];
            base[r] = ROOT;
            let mut acc = vec![base];
            for list in &subs {
                let mut next = Vec::with_capacity(acc.len() * list.len());
                for a in &acc {
                    for s in list {
                        let mut t = a.clone();
                        for v in 0..n {
                            if s[v] == ROOT {
                                t[v] = r as u8;
                            } else if s[v] != NONE {
                                t[v] = s[v];
                            }
                        }
                        next.push(t);
                    }
                }
                acc = next;
            }
            out.extend(acc);
        }
        self.memo.insert(comp, out.clone());
        out
    }
}

/// Every search tree over `u`: roots ascending, components by smallest node,
/// the earliest component varying slowest.
pub fn enumerate_stts(u: &Topology) -> Vec<SearchTree> {
    let mut e = Enumerator { u, memo: HashMap::new() };
    e.trees(u.all_nodes()).into_iter().map(SearchTree::from_parent).collect()
}

/// Depth vectors of all search trees, in enumeration order.
pub fn stt_depth_vectors(u: &Topology) -> Vec<Vec<Rational>> {
    enumerate_stts(u).iter().map(|t| t.depths()).collect()
}

/// Number of search trees, by dynamic programming over components.
pub fn count_stts(u: &Topology) -> u128 {
    fn rec(u: &Topology, comp: NodeSet, memo: &mut HashMap<NodeSet, u128>) -> u128 {
        if let Some(&c) = memo.get(&comp) {
            return c;
        }
        let mut total = 0u128;
        for r in nodes_of(comp) {
            let mut prod = 1u128;
            for c in u.components(comp, r) {
                prod *= rec(u, c, memo);
            }
            total += prod;
        }
        memo.insert(comp, total);
        total
    }
    rec(u, u.all_nodes(), &mut HashMap::new())
}

/// Search-tree cost with the root at depth one: `f·D + Σf`.
pub fn cost(t: &SearchTree, f: &[Rational]) -> Result<Rational> {
    if f.len() != t.n() {
        return Err(Error::Dimension { expected: t.n(), got: f.len() });
    }
    if f.iter().any(|w| w.is_negative()) {
        return Err(Error::Invalid("negative weight".into()));
    }
    Ok(cost_of_depths(&t.depths(), f))
}

/// `f·D + Σf` for an arbitrary depth vector.
pub fn cost_of_depths(d: &[Rational], f: &[Rational]) -> Rational {
    crate::rational::dot(d, f) + f.iter().sum::<Rational>()
}

/// Ancestry and LCA indicators of a search tree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InducedPoint {
    /// `x[i][j]` is 1 iff i is a strict ancestor of j.
    pub x: Vec<Vec<Rational>>,
    /// `(k, i, j)` with `i < j` and `k` interior to the i..j path.
    pub z: Vec<((usize, usize, usize), Rational)>,
    pub d: Vec<Rational>,
}

pub fn induced_point(u: &Topology, t: &SearchTree) -> InducedPoint {
    let n = u.n();
    let mut x = vec![vec![Rational::zero(); n]; n];
    for (i, row) in x.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            if t.is_ancestor(i, j) {
                *cell = Rational::one();
            }
        }
    }
    let mut z = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let l = t.lca(i, j);
            let mut ks: Vec<usize> = u.interior(i, j).to_vec();
            ks.sort_unstable();
            for k in ks {
                let v = if k == l { Rational::one() } else { Rational::zero() };
                z.push(((k, i, j), v));
            }
        }
    }
    z.sort_by_key(|e| e.0);
    InducedPoint { x, z, d: t.depths() }
}

/// Result of the exact best-search-tree computation.
#[derive(Clone, Debug)]
pub struct BestStt {
    pub tree: SearchTree,
    /// Minimum of `w·D` (root depth zero).
    pub value: Rational,
    /// Roots of all optimal trees.
    pub optimal_roots: Vec<usize>,
}

pub const DEFAULT_BEST_CAP: usize = 8;

#[derive(Clone)]
struct Best {
    value: Rational,
    depths: Vec<u32>,
    parent: Vec<u8>,
    roots: Vec<usize>,
}

/// Minimum weighted depth over all search trees, with the lexicographically
/// smallest optimal depth vector as witness.
pub fn best_stt(u: &Topology, w: &[Rational]) -> Result<BestStt> {
    best_stt_capped(u, w, DEFAULT_BEST_CAP)
}

pub fn best_stt_capped(u: &Topology, w: &[Rational], cap: usize) -> Result<BestStt> {
    if u.n() > cap {
        return Err(Error::TooLarge(format!("best search tree limited to {cap} nodes, topology has {}", u.n())));
    }
    if w.len() != u.n() {
        return Err(Error::Dimension { expected: u.n(), got: w.len() });
    }
    if w.iter().any(|x| x.is_negative()) {
        return Err(Error::Invalid("negative weight".into()));
    }
    let mut memo = HashMap::new();
    let b = best_rec(u, w, u.all_nodes(), &mut memo);
    Ok(BestStt { tree: SearchTree::from_parent(b.parent), value: b.value, optimal_roots: b.roots })
}

/// Component-restricted best value (used by rounding on sub-instances).
pub fn best_value_on(u: &Topology, w: &[Rational], comp: NodeSet) -> Rational {
    let mut memo = HashMap::new();
    best_rec(u, w, comp, &mut memo).value
}

fn best_rec(u: &Topology, w: &[Rational], comp: NodeSet, memo: &mut HashMap<NodeSet, Best>) -> Best {
    if let Some(b) = memo.get(&comp) {
        return b.clone();
    }
    let n = u.n();
    let comp_weight: Rational = nodes_of(comp).iter().map(|&v| &w[v]).sum();
    let mut best: Option<Best> = None;
    for r in nodes_of(comp) {
        let mut value = &comp_weight - &w[r];
        let mut depths = vec![0u32; n];
        let mut parent = vec![NONE; n];
        parent[r] = ROOT;
        for c in u.components(comp, r) {
            let sub = best_rec(u, w, c, memo);
            value += &sub.value;
            for v in nodes_of(c) {
                depths[v] = sub.depths[v] + 1;
                parent[v] = if sub.parent[v] == ROOT { r as u8 } else { sub.parent[v] };
            }
        }
        let cand = Best { value, depths, parent, roots: vec![r] };
        best = Some(match best {
            None => cand,
            Some(mut b) => match cand.value.cmp(&b.value) {
                std::cmp::Ordering::Less => cand,
                std::cmp::Ordering::Greater => b,
                std::cmp::Ordering::Equal => {
                    let mut roots = b.roots.clone();
                    roots.push(r);
                    if cand.depths < b.depths {
                        b = cand;
                    }
                    b.roots = roots;
                    b
                }
            },
        });
    }
    let b = best.expect("non-empty component");
    memo.insert(comp, b.clone());
    b
}

/// Optimal search tree on a star whose center is node 0 and whose leaves are
/// nodes 1..=k. Leaves are queried by decreasing weight; only the center's
/// position varies. Returns the tree and its cost (root depth one).
pub fn optimal_star_stt(center_weight: &Rational, leaf_weights: &[Rational]) -> Result<(SearchTree, Rational)> {
    if center_weight.is_negative() || leaf_weights.iter().any(|w| w.is_negative()) {
        return Err(Error::Invalid("negative weight".into()));
    }
    let k = leaf_weights.len();
    let n = k + 1;
    let mut order: Vec<usize> = (0..k).collect();
    // stable: equal weights keep index order
    order.sort_by(|&a, &b| leaf_weights[b].cmp(&leaf_weights[a]));
    // suffix sums of sorted leaf weights
    let mut suffix = vec![Rational::zero(); k + 1];
    for t in (0..k).rev() {
        suffix[t] = &suffix[t + 1] + &leaf_weights[order[t]];
    }
    let mut best: Option<(usize, Rational)> = None;
    let mut prefix = Rational::zero();
    for p in 0..=k {
        if p > 0 {
            prefix += &leaf_weights[order[p - 1]] * qi(p as i64);
        }
        let cost = &prefix + center_weight * qi(p as i64 + 1) + &suffix[p] * qi(p as i64 + 2);
        if best.as_ref().is_none_or(|(_, c)| cost < *c) {
            best = Some((p, cost));
        }
    }
    let (p, cost) = best.expect("at least one position");
    let mut parents: Vec<Option<usize>> = vec![None; n];
    // chain of the first p leaves, then the center, then the rest below it
    let mut prev: Option<usize> = None;
    for &l in order.iter().take(p) {
        parents[l + 1] = prev;
        prev = Some(l + 1);
    }
    parents[0] = prev;
    for &l in order.iter().skip(p) {
        parents[l + 1] = Some(0);
    }
    let star = Topology::star(n);
    let tree = SearchTree::from_parents(&star, &parents)?;
    Ok((tree, cost))
}
