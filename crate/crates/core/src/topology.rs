//! Tree topologies: validation, path queries, canonical forms, the small-tree
//! catalog, automorphisms and the extension/combination constructions.
//!
//! Nodes are 0-based here; every text format uses 1-based ids.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::error::{Error, Result};

/// Bitmask over node ids (topologies are limited to 64 nodes).
pub type NodeSet = u64;

pub const MAX_NODES: usize = 64;

#[derive(Clone, PartialEq, Eq)]
pub struct Topology {
    n: usize,
    edges: Vec<(usize, usize)>,
    adj: Vec<Vec<usize>>,
    // interior of the i..j path, ordered from the i side
    paths: Vec<Vec<Vec<usize>>>,
    name: Option<String>,
}

impl fmt::Debug for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Topology({}; {})", self.n, self.edge_string())
    }
}

impl Topology {
    /// Builds from 0-based edges.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::Topology("empty topology".into()));
        }
        if n > MAX_NODES {
            return Err(Error::Topology(format!("at most {MAX_NODES} nodes supported")));
        }
        if edges.len() != n - 1 {
            return Err(Error::Topology(format!("{} nodes need {} edges, got {}", n, n - 1, edges.len())));
        }
        let mut adj = vec![Vec::new(); n];
        let mut norm = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::Topology(format!("node {} out of range 1..{}", a.max(b) + 1, n)));
            }
            if a == b {
                return Err(Error::Topology(format!("self-loop at node {}", a + 1)));
            }
            let e = (a.min(b), a.max(b));
            if norm.contains(&e) {
                return Err(Error::Topology(format!("duplicate edge ({},{})", e.0 + 1, e.1 + 1)));
            }
            norm.push(e);
            adj[a].push(b);
            adj[b].push(a);
        }
        // union-find for cycle detection
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            let mut c = x;
            while p[c] != r {
                let nx = p[c];
                p[c] = r;
                c = nx;
            }
            r
        }
        for &(a, b) in &norm {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra == rb {
                return Err(Error::Topology(format!("cycle detected through edge ({},{})", a + 1, b + 1)));
            }
            parent[ra] = rb;
        }
        norm.sort_unstable();
        for l in adj.iter_mut() {
            l.sort_unstable();
        }
        let mut t = Topology { n, edges: norm, adj, paths: Vec::new(), name: None };
        t.paths = t.compute_paths();
        Ok(t)
    }

    /// Builds from 1-based edges; `n` is inferred from the largest id.
    pub fn parse_edges(edges: &[(usize, usize)]) -> Result<Self> {
        if edges.is_empty() {
            return Self::from_edges(1, &[]);
        }
        if edges.iter().any(|&(a, b)| a == 0 || b == 0) {
            return Err(Error::Topology("node ids are 1-based".into()));
        }
        let n = edges.iter().map(|&(a, b)| a.max(b)).max().unwrap_or(1);
        let zero: Vec<(usize, usize)> = edges.iter().map(|&(a, b)| (a - 1, b - 1)).collect();
        Self::from_edges(n, &zero)
    }

    /// Parses the text format: first line `n`, then one `i j` pair per line.
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let first = lines.next().ok_or_else(|| Error::Parse("missing node count".into()))?;
        let n: usize = first.parse().map_err(|_| Error::Parse(format!("bad node count {first:?}")))?;
        let mut edges = Vec::new();
        for l in lines {
            let parts: Vec<&str> = l.split_whitespace().collect();
            if parts.len() != 2 {
                return Err(Error::Parse(format!("bad edge line {l:?}")));
            }
            let a: usize = parts[0].parse().map_err(|_| Error::Parse(format!("bad node {:?}", parts[0])))?;
            let b: usize = parts[1].parse().map_err(|_| Error::Parse(format!("bad node {:?}", parts[1])))?;
            if a == 0 || b == 0 {
                return Err(Error::Topology("node ids are 1-based".into()));
            }
            edges.push((a - 1, b - 1));
        }
        Self::from_edges(n, &edges)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{}\n", self.n);
        for &(a, b) in &self.edges {
            s.push_str(&format!("{} {}\n", a + 1, b + 1));
        }
        s
    }

    pub fn path(n: usize) -> Self {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Self::from_edges(n, &edges).expect("path is a tree")
    }

    /// Star with center node 0 and leaves 1..n-1.
    pub fn star(n: usize) -> Self {
        let edges: Vec<_> = (1..n).map(|i| (0, i)).collect();
        Self::from_edges(n, &edges).expect("star is a tree")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn label(&self) -> String {
        self.name.clone().unwrap_or_else(|| format!("tree[{}]", self.edge_string()))
    }

    pub fn all_nodes(&self) -> NodeSet {
        if self.n == 64 {
            u64::MAX
        } else {
            (1u64 << self.n) - 1
        }
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a].binary_search(&b).is_ok()
    }

    /// 1-based comma list such as `(1,2),(2,3)`.
    pub fn edge_string(&self) -> String {
        self.edges.iter().map(|&(a, b)| format!("({},{})", a + 1, b + 1)).collect::<Vec<_>>().join(",")
    }

    fn compute_paths(&self) -> Vec<Vec<Vec<usize>>> {
        let n = self.n;
        let mut out = vec![vec![Vec::new(); n]; n];
        for (i, row) in out.iter_mut().enumerate() {
            // BFS parents from i
            let mut parent = vec![usize::MAX; n];
            parent[i] = i;
            let mut queue = std::collections::VecDeque::from([i]);
            while let Some(u) = queue.pop_front() {
                for &w in &self.adj[u] {
                    if parent[w] == usize::MAX {
                        parent[w] = u;
                        queue.push_back(w);
                    }
                }
            }
            for (j, slot) in row.iter_mut().enumerate() {
                if j == i {
                    continue;
                }
                let mut seq = Vec::new();
                let mut c = parent[j];
                while c != i {
                    seq.push(c);
                    c = parent[c];
                }
                seq.reverse();
                *slot = seq;
            }
        }
        out
    }

    /// Interior of the unique path, ordered from the `i` side.
    pub fn path_between(&self, i: usize, j: usize) -> Result<&[usize]> {
        if i >= self.n || j >= self.n {
            return Err(Error::Invalid("node out of range".into()));
        }
        if i == j {
            return Err(Error::Invalid("path endpoints must differ".into()));
        }
        Ok(&self.paths[i][j])
    }

    /// Unchecked variant for hot loops.
    #[inline]
    pub fn interior(&self, i: usize, j: usize) -> &[usize] {
        &self.paths[i][j]
    }

    pub fn distance(&self, i: usize, j: usize) -> usize {
        if i == j {
            0
        } else {
            self.paths[i][j].len() + 1
        }
    }

    pub fn diameter(&self) -> usize {
        let mut d = 0;
        for i in 0..self.n {
            for j in i + 1..self.n {
                d = d.max(self.distance(i, j));
            }
        }
        d
    }

    /// Connected components of `set` after deleting `removed`, ordered by
    /// their smallest node.
    pub fn components(&self, set: NodeSet, removed: usize) -> Vec<NodeSet> {
        let mut rest = set & !(1u64 << removed);
        let mut comps = Vec::new();
        while rest != 0 {
            let s = rest.trailing_zeros() as usize;
            let mut comp = 1u64 << s;
            let mut stack = vec![s];
            while let Some(u) = stack.pop() {
                for &w in &self.adj[u] {
                    let bit = 1u64 << w;
                    if rest & bit != 0 && comp & bit == 0 {
                        comp |= bit;
                        stack.push(w);
                    }
                }
            }
            rest &= !comp;
            comps.push(comp);
        }
        comps
    }

    pub fn is_connected_set(&self, set: NodeSet) -> bool {
        if set == 0 {
            return false;
        }
        let s = set.trailing_zeros() as usize;
        let mut seen = 1u64 << s;
        let mut stack = vec![s];
        while let Some(u) = stack.pop() {
            for &w in &self.adj[u] {
                let bit = 1u64 << w;
                if set & bit != 0 && seen & bit == 0 {
                    seen |= bit;
                    stack.push(w);
                }
            }
        }
        seen == set
    }

    /// Induced subtree on a connected node set, plus the map from new ids to
    /// old ids (ascending).
    pub fn induced(&self, set: NodeSet) -> Result<(Topology, Vec<usize>)> {
        if !self.is_connected_set(set) {
            return Err(Error::Invalid("node set is not connected".into()));
        }
        let nodes = nodes_of(set);
        let mut pos = vec![usize::MAX; self.n];
        for (k, &v) in nodes.iter().enumerate() {
            pos[v] = k;
        }
        let edges: Vec<_> = self
            .edges
            .iter()
            .filter(|&&(a, b)| set >> a & 1 == 1 && set >> b & 1 == 1)
            .map(|&(a, b)| (pos[a], pos[b]))
            .collect();
        Ok((Topology::from_edges(nodes.len(), &edges)?, nodes))
    }

    /// Relabels nodes: node `v` becomes `perm[v]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Topology> {
        let edges: Vec<_> = self.edges.iter().map(|&(a, b)| (perm[a], perm[b])).collect();
        Topology::from_edges(self.n, &edges)
    }

    /// Centers of the tree (one or two nodes).
    pub fn centers(&self) -> Vec<usize> {
        let n = self.n;
        if n <= 2 {
            return (0..n).collect();
        }
        let mut deg: Vec<usize> = (0..n).map(|v| self.adj[v].len()).collect();
        let mut leaves: Vec<usize> = (0..n).filter(|&v| deg[v] == 1).collect();
        let mut remaining = n;
        while remaining > 2 {
            remaining -= leaves.len();
            let mut next = Vec::new();
            for &l in &leaves {
                deg[l] = 0;
                for &w in &self.adj[l] {
                    if deg[w] > 0 {
                        deg[w] -= 1;
                        if deg[w] == 1 {
                            next.push(w);
                        }
                    }
                }
            }
            leaves = next;
        }
        let mut c = leaves;
        c.sort_unstable();
        c
    }

    fn ahu(&self, v: usize, parent: usize) -> String {
        let mut kids: Vec<String> = self.adj[v].iter().filter(|&&w| w != parent).map(|&w| self.ahu(w, v)).collect();
        kids.sort();
        format!("({})", kids.concat())
    }

    /// Canonical string: equal iff the trees are isomorphic.
    pub fn canonical_form(&self) -> String {
        self.centers().iter().map(|&c| self.ahu(c, usize::MAX)).min().unwrap_or_default()
    }

    pub fn is_isomorphic(&self, other: &Topology) -> bool {
        self.n == other.n && self.canonical_form() == other.canonical_form()
    }

    /// All automorphisms as node maps, identity first, lexicographic order.
    pub fn automorphisms(&self) -> Vec<Vec<usize>> {
        let n = self.n;
        let mut out = Vec::new();
        let mut map = vec![usize::MAX; n];
        let mut used = vec![false; n];
        self.auto_rec(0, &mut map, &mut used, &mut out);
        out
    }

    fn auto_rec(&self, v: usize, map: &mut [usize], used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        let n = self.n;
        if v == n {
            out.push(map.to_vec());
            return;
        }
        for img in 0..n {
            if used[img] || self.adj[img].len() != self.adj[v].len() {
                continue;
            }
            // edges to already-mapped nodes must be preserved both ways
            let ok = (0..v).all(|u| self.has_edge(u, v) == self.has_edge(map[u], img));
            if !ok {
                continue;
            }
            map[v] = img;
            used[img] = true;
            self.auto_rec(v + 1, map, used, out);
            used[img] = false;
            map[v] = usize::MAX;
        }
    }

    /// Adds node `n` (0-based id) as a new leaf or inside an edge.
    pub fn extend(&self, ext: Extension) -> Result<Topology> {
        let n = self.n;
        let mut edges = self.edges.clone();
        match ext {
            Extension::LeafAt(v) => {
                if v >= n {
                    return Err(Error::Invalid(format!("unknown node {}", v + 1)));
                }
                edges.push((v, n));
            }
            Extension::Subdivide(a, b) => {
                let e = (a.min(b), a.max(b));
                let Some(p) = edges.iter().position(|&x| x == e) else {
                    return Err(Error::Invalid(format!("unknown edge ({},{})", a + 1, b + 1)));
                };
                edges.remove(p);
                edges.push((e.0, n));
                edges.push((n, e.1));
            }
        }
        Topology::from_edges(n + 1, &edges)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Extension {
    LeafAt(usize),
    Subdivide(usize, usize),
}

/// Result of joining several trees through a fresh center node.
#[derive(Clone, Debug)]
pub struct Combined {
    pub topology: Topology,
    /// `maps[p][v]` is the id of node `v` of part `p` in the combined tree.
    pub maps: Vec<Vec<usize>>,
    pub center: usize,
}

/// Disjoint union of the parts plus a new last node adjacent to each attach
/// node.
pub fn combine(parts: &[Topology], attach: &[usize]) -> Result<Combined> {
    if parts.len() < 2 {
        return Err(Error::Invalid("combine needs at least two parts".into()));
    }
    if parts.len() != attach.len() {
        return Err(Error::Invalid("one attach node per part".into()));
    }
    let mut edges = Vec::new();
    let mut maps = Vec::new();
    let mut offset = 0;
    for (p, &a) in parts.iter().zip(attach) {
        if a >= p.n() {
            return Err(Error::Invalid(format!("attach node {} out of range", a + 1)));
        }
        maps.push((0..p.n()).map(|v| v + offset).collect::<Vec<_>>());
        edges.extend(p.edges().iter().map(|&(x, y)| (x + offset, y + offset)));
        offset += p.n();
    }
    let center = offset;
    for (k, &a) in attach.iter().enumerate() {
        edges.push((maps[k][a], center));
    }
    Ok(Combined { topology: Topology::from_edges(offset + 1, &edges)?, maps, center })
}

pub fn nodes_of(set: NodeSet) -> Vec<usize> {
    let mut v = Vec::with_capacity(set.count_ones() as usize);
    let mut s = set;
    while s != 0 {
        let i = s.trailing_zeros() as usize;
        v.push(i);
        s &= s - 1;
    }
    v
}

/// Catalog of every tree with 2..=8 nodes, named `(n,i)` with 1-based edges.
pub const CATALOG: &[(usize, usize, &[(usize, usize)])] = &[
    (2, 0, &[(1, 2)]),
    (3, 0, &[(1, 2), (2, 3)]),
    (4, 0, &[(1, 2), (2, 3), (3, 4)]),
    (4, 1, &[(1, 2), (2, 3), (2, 4)]),
    (5, 0, &[(1, 2), (2, 3), (3, 4), (4, 5)]),
    (5, 1, &[(1, 2), (2, 3), (2, 5), (3, 4)]),
    (5, 2, &[(1, 2), (2, 3), (2, 4), (2, 5)]),
    (6, 0, &[(1, 2), (2, 3), (3, 4), (4, 5), (5, 6)]),
    (6, 1, &[(1, 2), (2, 3), (2, 6), (3, 4), (4, 5)]),
    (6, 2, &[(1, 2), (2, 3), (3, 4), (3, 6), (4, 5)]),
    (6, 3, &[(1, 2), (2, 3), (2, 5), (3, 4), (3, 6)]),
    (6, 4, &[(1, 2), (2, 3), (2, 5), (2, 6), (3, 4)]),
    (6, 5, &[(1, 2), (2, 3), (2, 4), (2, 5), (2, 6)]),
    (7, 0, &[(1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7)]),
    (7, 1, &[(1, 2), (2, 3), (2, 7), (3, 4), (4, 5), (5, 6)]),
    (7, 2, &[(1, 2), (2, 3), (3, 4), (3, 7), (4, 5), (5, 6)]),
    (7, 3, &[(1, 2), (2, 3), (3, 4), (3, 6), (4, 5), (6, 7)]),
    (7, 4, &[(1, 2), (2, 3), (3, 4), (4, 5), (4, 6), (4, 7)]),
    (7, 5, &[(1, 2), (2, 3), (3, 4), (3, 6), (4, 5), (4, 7)]),
    (7, 6, &[(1, 2), (2, 3), (3, 4), (3, 6), (3, 7), (4, 5)]),
    (7, 7, &[(1, 2), (2, 3), (2, 6), (3, 4), (4, 5), (4, 7)]),
    (7, 8, &[(1, 2), (2, 3), (2, 5), (3, 4), (3, 6), (3, 7)]),
    (7, 9, &[(1, 2), (2, 3), (3, 4), (3, 5), (3, 6), (3, 7)]),
    (7, 10, &[(1, 2), (2, 3), (2, 4), (2, 5), (2, 6), (2, 7)]),
    (8, 0, &[(1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7), (7, 8)]),
    (8, 1, &[(1, 2), (2, 3), (2, 8), (3, 4), (4, 5), (5, 6), (6, 7)]),
    (8, 2, &[(1, 2), (2, 3), (3, 4), (3, 8), (4, 5), (5, 6), (6, 7)]),
    (8, 3, &[(1, 2), (2, 3), (3, 4), (4, 5), (4, 8), (5, 6), (6, 7)]),
    (8, 4, &[(1, 2), (2, 3), (3, 4), (3, 7), (4, 5), (5, 6), (7, 8)]),
    (8, 5, &[(1, 2), (2, 3), (2, 7), (3, 4), (3, 8), (4, 5), (5, 6)]),
    (8, 6, &[(1, 2), (2, 3), (2, 7), (3, 4), (4, 5), (4, 8), (5, 6)]),
    (8, 7, &[(1, 2), (2, 3), (3, 4), (3, 7), (4, 5), (4, 8), (5, 6)]),
    (8, 8, &[(1, 2), (2, 3), (2, 7), (2, 8), (3, 4), (4, 5), (5, 6)]),
    (8, 9, &[(1, 2), (2, 3), (3, 4), (3, 7), (3, 8), (4, 5), (5, 6)]),
    (8, 10, &[(1, 2), (2, 3), (2, 7), (3, 4), (4, 5), (5, 6), (5, 8)]),
    (8, 11, &[(1, 2), (2, 3), (3, 4), (3, 6), (3, 7), (4, 5), (7, 8)]),
    (8, 12, &[(1, 2), (2, 3), (2, 6), (3, 4), (3, 7), (4, 5), (7, 8)]),
    (8, 13, &[(1, 2), (2, 3), (2, 6), (3, 4), (3, 7), (4, 5), (4, 8)]),
    (8, 14, &[(1, 2), (2, 3), (2, 6), (2, 7), (3, 4), (3, 8), (4, 5)]),
    (8, 15, &[(1, 2), (2, 3), (2, 6), (3, 4), (3, 7), (3, 8), (4, 5)]),
    (8, 16, &[(1, 2), (2, 3), (2, 6), (3, 4), (4, 5), (4, 7), (4, 8)]),
    (8, 17, &[(1, 2), (2, 3), (3, 4), (3, 6), (3, 7), (3, 8), (4, 5)]),
    (8, 18, &[(1, 2), (2, 3), (2, 6), (2, 7), (2, 8), (3, 4), (4, 5)]),
    (8, 19, &[(1, 2), (2, 3), (2, 5), (2, 6), (3, 4), (3, 7), (3, 8)]),
    (8, 20, &[(1, 2), (2, 3), (2, 5), (2, 6), (2, 7), (3, 4), (3, 8)]),
    (8, 21, &[(1, 2), (2, 3), (2, 5), (2, 6), (2, 7), (2, 8), (3, 4)]),
    (8, 22, &[(1, 2), (2, 3), (2, 4), (2, 5), (2, 6), (2, 7), (2, 8)]),
];

pub fn catalog_name(n: usize, i: usize) -> String {
    format!("U_{n}_{i}")
}

/// Looks up a catalog tree by `U_7_3`, `U_(7,3)`, `(7,3)` or `7,3`; also
/// accepts `path-N` and `star-N` for any size.
pub fn catalog(name: &str) -> Result<Topology> {
    for (prefix, make) in [("path-", Topology::path as fn(usize) -> Topology), ("star-", Topology::star)] {
        if let Some(k) = name.trim().strip_prefix(prefix) {
            let n: usize = k.parse().map_err(|_| Error::Topology(format!("bad size in {name:?}")))?;
            if n == 0 {
                return Err(Error::Topology("empty tree".into()));
            }
            return Ok(make(n).with_name(format!("{prefix}{n}")));
        }
    }
    let cleaned: String = name
        .trim()
        .trim_start_matches("U_")
        .trim_start_matches('U')
        .chars()
        .filter(|c| !matches!(c, '(' | ')' | ' '))
        .collect();
    let parts: Vec<&str> = cleaned.split(['_', ',']).collect();
    let parsed = match parts.as_slice() {
        [a, b] => a.parse::<usize>().ok().zip(b.parse::<usize>().ok()),
        _ => None,
    };
    let (n, i) = parsed.ok_or_else(|| Error::Topology(format!("unknown topology name {name:?}")))?;
    catalog_entry(n, i).ok_or_else(|| Error::Topology(format!("no catalog entry ({n},{i})")))
}

pub fn catalog_entry(n: usize, i: usize) -> Option<Topology> {
    CATALOG
        .iter()
        .find(|&&(cn, ci, _)| cn == n && ci == i)
        .map(|&(cn, ci, e)| Topology::parse_edges(e).expect("catalog trees are valid").with_name(catalog_name(cn, ci)))
}

/// All catalog trees in table order.
pub fn catalog_all() -> Vec<Topology> {
    CATALOG.iter().map(|&(n, i, _)| catalog_entry(n, i).expect("present")).collect()
}

/// Finds the catalog name of a tree isomorphic to `t`.
pub fn identify(t: &Topology) -> Option<String> {
    let cf = t.canonical_form();
    CATALOG
        .iter()
        .filter(|&&(n, _, _)| n == t.n())
        .find(|&&(n, i, _)| catalog_entry(n, i).expect("present").canonical_form() == cf)
        .map(|&(n, i, _)| catalog_name(n, i))
}

/// One representative per isomorphism class of trees on `n` nodes.
///
/// Trees are grown by attaching a leaf to every node of each smaller
/// representative. Up to eight nodes the output is the catalog itself (table
/// order and node labels); beyond that it is sorted by non-increasing
/// diameter, then canonical form.
pub fn enumerate_topologies(n: usize) -> Result<Vec<Topology>> {
    if n < 2 {
        return Err(Error::Invalid("need at least 2 nodes".into()));
    }
    let mut level: BTreeMap<String, Topology> = BTreeMap::new();
    let p2 = Topology::path(2);
    level.insert(p2.canonical_form(), p2);
    for _ in 3..=n {
        let mut next = BTreeMap::new();
        for t in level.values() {
            for v in 0..t.n() {
                let e = t.extend(Extension::LeafAt(v))?;
                next.entry(e.canonical_form()).or_insert(e);
            }
        }
        level = next;
    }
    if CATALOG.iter().any(|&(cn, _, _)| cn == n) {
        let by_form: HashMap<String, Topology> = level.into_iter().collect();
        let mut out = Vec::new();
        for &(cn, ci, _) in CATALOG.iter().filter(|&&(cn, _, _)| cn == n) {
            let t = catalog_entry(cn, ci).expect("present");
            if !by_form.contains_key(&t.canonical_form()) {
                return Err(Error::Verification(format!("catalog tree ({cn},{ci}) not generated")));
            }
            out.push(t);
        }
        if out.len() != by_form.len() {
            return Err(Error::Verification("catalog size mismatch".into()));
        }
        return Ok(out);
    }
    let mut out: Vec<(usize, String, Topology)> = level.into_iter().map(|(k, t)| (t.diameter(), k, t)).collect();
    out.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
    Ok(out.into_iter().map(|x| x.2).collect())
}

/// Catalog listing: name, diameter and 1-based edges, one tree per line.
pub fn catalog_tsv() -> String {
    let mut s = String::from("name\tdiameter\tedges\n");
    for t in catalog_all() {
        s.push_str(&format!("{}\t{}\t{}\n", t.name().unwrap_or(""), t.diameter(), t.edge_string()));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_inputs() {
        assert!(Topology::parse_edges(&[(1, 2), (2, 3), (1, 3)]).is_err());
        assert!(Topology::parse_edges(&[(1, 1)]).is_err());
        assert!(Topology::parse_edges(&[(1, 2), (3, 4)]).is_err());
        assert!(Topology::from_edges(3, &[(0, 5), (0, 1)]).is_err());
        assert!(Topology::parse_edges(&[(1, 2), (1, 2)]).is_err());
    }

    #[test]
    fn long_star_paths() {
        let t = catalog("U_7_3").unwrap();
        assert_eq!(t.path_between(0, 4).unwrap(), &[1, 2, 3]);
        assert_eq!(t.path_between(0, 6).unwrap(), &[1, 2, 5]);
        assert!(t.path_between(0, 1).unwrap().is_empty());
        assert!(t.path_between(2, 2).is_err());
    }

    #[test]
    fn text_roundtrip() {
        let t = catalog("(8,13)").unwrap();
        let back = Topology::parse_text(&t.to_text()).unwrap();
        assert_eq!(back.edges(), t.edges());
    }

    #[test]
    fn catalog_names_parse() {
        assert_eq!(catalog("path-10").unwrap().n(), 10);
        assert!(catalog("star-0").is_err());
        for name in ["U_7_3", "U_(7,3)", "(7,3)", "7,3"] {
            assert_eq!(catalog(name).unwrap().n(), 7);
        }
        assert!(catalog("U_9_0").is_err());
    }

    #[test]
    fn components_split() {
        let t = Topology::path(5);
        assert_eq!(t.components(t.all_nodes(), 2), vec![0b00011, 0b11000]);
        assert_eq!(t.components(0b00111, 0), vec![0b00110]);
    }

    #[test]
    fn induced_sub() {
        let t = catalog("U_7_3").unwrap();
        let (sub, map) = t.induced(0b0011111).unwrap();
        assert_eq!(map, vec![0, 1, 2, 3, 4]);
        assert!(sub.is_isomorphic(&Topology::path(5)));
        assert!(t.induced(0b1000001).is_err());
    }

    #[test]
    fn centers_of_paths() {
        assert_eq!(Topology::path(5).centers(), vec![2]);
        assert_eq!(Topology::path(4).centers(), vec![1, 2]);
    }
}
