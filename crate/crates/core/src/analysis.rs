//! Cross-cutting analyses over scans, vertices and dual solutions.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lpmodel::{build_primal, build_z_eliminated, LpModel, Point, Sense, Var};
use crate::normals::ScanReport;
use crate::parallel::Parallelism;
use crate::polytope::enumerate_vertices;
use crate::rational::Rational;
use crate::simplex::{certify_unique_optimum, is_vertex, solve_with_separation, Status};
use crate::stt::{enumerate_stts, SearchTree};
use crate::topology::{Combined, Extension, Topology};

/// One direction of an integrality-gap table.
#[derive(Clone, Debug, Serialize)]
pub struct GapRecord {
    pub topology: String,
    pub direction: Vec<i64>,
    /// LP optimum of `h·D` (root depth zero).
    pub lp_value: Rational,
    /// Best search tree value of `h·D`.
    pub stt_value: Rational,
    /// `(stt + Σh) / (lp + Σh)`: costs with root depth one.
    pub gap_ratio: Rational,
    /// `stt / lp` on the depth values themselves.
    pub raw_ratio: Rational,
    pub additive_gap: Rational,
}

impl GapRecord {
    pub const TSV_HEADER: &'static str = "topology\tdirection\tlp\tstt\traw_gap\traw_decimal\tcost_gap\tadditive";

    pub fn tsv_row(&self) -> String {
        let dir: Vec<String> = self.direction.iter().map(|x| x.to_string()).collect();
        format!(
            "{}\t({})\t{}\t{}\t{}\t{}\t{}\t{}",
            self.topology,
            dir.join(","),
            self.lp_value,
            self.stt_value,
            self.raw_ratio,
            self.raw_ratio.to_decimal(4),
            self.gap_ratio,
            self.additive_gap
        )
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GapTable {
    pub rows: Vec<GapRecord>,
    /// Index of the largest additive gap (first in facet order on ties).
    pub additive_best: Option<usize>,
    /// Index of the largest raw ratio (first in facet order on ties).
    pub ratio_best: Option<usize>,
}

impl GapTable {
    /// Largest raw ratio found, one when there are no false facets.
    pub fn gap(&self) -> Rational {
        self.ratio_best.map(|k| self.rows[k].raw_ratio.clone()).unwrap_or_else(Rational::one)
    }
}

/// Gap per false-facet direction: the facet offset is the best tree value
/// and the discovered vertex attains the LP value.
pub fn integrality_gap(u: &Topology, scan: &ScanReport) -> GapTable {
    let mut rows = Vec::with_capacity(scan.false_facets.len());
    for f in &scan.false_facets {
        let s = Rational::from_int(f.normal.iter().sum());
        let raw_ratio = if f.lp_value.is_zero() { Rational::one() } else { &f.offset / &f.lp_value };
        rows.push(GapRecord {
            topology: u.label(),
            direction: f.normal.clone(),
            lp_value: f.lp_value.clone(),
            stt_value: f.offset.clone(),
            gap_ratio: (&f.offset + &s) / (&f.lp_value + &s),
            raw_ratio,
            additive_gap: &f.offset - &f.lp_value,
        });
    }
    let arg_max = |key: &dyn Fn(&GapRecord) -> &Rational| {
        let mut best: Option<usize> = None;
        for (k, r) in rows.iter().enumerate() {
            if best.is_none_or(|b| key(r) > key(&rows[b])) {
                best = Some(k);
            }
        }
        best
    };
    let additive_best = arg_max(&|r| &r.additive_gap);
    let ratio_best = arg_max(&|r| &r.raw_ratio);
    GapTable { rows, additive_best, ratio_best }
}

/// Reduced denominators over all coordinates.
pub fn denominator_profile<P: AsRef<[Rational]>>(points: impl IntoIterator<Item = P>) -> BTreeSet<u64> {
    let mut out = BTreeSet::new();
    for p in points {
        for x in p.as_ref() {
            out.insert(x.denom().try_into().unwrap_or(u64::MAX));
        }
    }
    out
}

/// Largest reduced denominator of a point.
pub fn max_denominator_u64(p: &[Rational]) -> u64 {
    denominator_profile([p]).into_iter().max().unwrap_or(1)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ModelFlavor {
    Primal,
    ZEliminated,
}

impl ModelFlavor {
    pub fn build(&self, u: &Topology) -> LpModel {
        match self {
            ModelFlavor::Primal => build_primal(u),
            ModelFlavor::ZEliminated => build_z_eliminated(u),
        }
    }
}

/// Which coordinates receive random weight.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum DirectionFlavor {
    Xzd,
    Xd,
    D,
}

impl DirectionFlavor {
    fn weighs(&self, v: &Var) -> bool {
        match (self, v) {
            (_, Var::D(_)) => true,
            (DirectionFlavor::Xzd | DirectionFlavor::Xd, Var::X(..)) => true,
            (DirectionFlavor::Xzd, Var::Z(..)) => true,
            _ => false,
        }
    }
}

/// Largest weight drawn per coordinate.
pub const SAMPLE_WEIGHT_MAX: i64 = 20;

#[derive(Clone, Debug, Serialize)]
pub struct SampleCensus {
    pub topology: String,
    pub model: ModelFlavor,
    pub directions: DirectionFlavor,
    pub samples: usize,
    pub seed: u64,
    /// Reduced denominators over every optimal vertex.
    pub denominators: BTreeSet<u64>,
    /// Sample count per largest denominator of the optimal vertex.
    pub by_max_denominator: BTreeMap<u64, usize>,
}

impl SampleCensus {
    pub fn all_integer(&self) -> bool {
        self.denominators.iter().all(|&d| d == 1)
    }
}

/// Random nonnegative integer direction for sample `k` (one stream per
/// sample so results do not depend on scheduling).
pub fn sample_direction(model: &LpModel, flavor: DirectionFlavor, seed: u64, k: usize) -> Vec<(usize, Rational)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k as u64);
    let mut obj = Vec::new();
    for (i, v) in model.vars().iter().enumerate() {
        if flavor.weighs(v) {
            obj.push((i, Rational::from_int(rng.gen_range(0..=SAMPLE_WEIGHT_MAX))));
        }
    }
    obj
}

/// Solves the model in `count` seeded directions and profiles the
/// denominators of the optimal vertices.
pub fn sample_directions(
    u: &Topology,
    model: ModelFlavor,
    directions: DirectionFlavor,
    count: usize,
    seed: u64,
    par: Parallelism,
) -> Result<SampleCensus> {
    if count == 0 {
        return Err(Error::Invalid("sample count must be positive".into()));
    }
    let m = model.build(u);
    let ks: Vec<usize> = (0..count).collect();
    let points: Vec<Result<Point>> = par.map(&ks, |&k| {
        let obj = sample_direction(&m, directions, seed, k);
        let r = solve_with_separation(&m, &obj, Sense::Min)?;
        if r.status != Status::Optimal {
            return Err(Error::Verification(format!("sample {k} not optimal")));
        }
        Ok(r.point)
    });
    let mut denominators = BTreeSet::new();
    let mut by_max_denominator = BTreeMap::new();
    for p in points {
        let p = p?;
        let prof = denominator_profile([&p]);
        *by_max_denominator.entry(prof.iter().max().copied().unwrap_or(1)).or_insert(0) += 1;
        denominators.extend(prof);
    }
    Ok(SampleCensus { topology: u.label(), model, directions, samples: count, seed, denominators, by_max_denominator })
}

/// Integer depths with at least one fractional ancestry coordinate.
pub fn detect_partially_integer(model: &LpModel, p: &[Rational]) -> bool {
    let d_int = model.d_part(p).iter().all(|x| x.is_integer());
    let x_frac = model.x_part(p).iter().flatten().any(|x| !x.is_integer());
    d_int && x_frac
}

/// The partially integer vertex of the six-node path: X and D as
/// published, Z completed to the unique vertex.
pub fn partially_integer_example() -> (Topology, LpModel, Point) {
    let u = Topology::path(6);
    let m = build_primal(&u);
    let xm: [[i64; 6]; 6] = [
        [0, 2, 0, 0, 0, 0],
        [0, 0, 1, 0, 0, 2],
        [2, 1, 0, 1, 1, 0],
        [1, 1, 1, 0, 1, 2],
        [1, 0, 0, 1, 0, 2],
        [0, 0, 2, 0, 0, 0],
    ];
    let x: Vec<Vec<Rational>> = xm.iter().map(|r| r.iter().map(|&v| Rational::new(v, 2)).collect()).collect();
    let d: Vec<Rational> = [2, 2, 2, 1, 1, 3].iter().map(|&v| Rational::from_int(v)).collect();
    // 1-based (k, i, j) keys at one half; every other Z is zero
    const HALF: [(usize, usize, usize); 8] =
        [(3, 1, 4), (3, 1, 5), (4, 1, 6), (5, 1, 6), (3, 2, 4), (3, 2, 5), (4, 2, 5), (4, 3, 5)];
    let z = |k: usize, i: usize, j: usize| {
        if HALF.contains(&(k + 1, i + 1, j + 1)) {
            Rational::new(1, 2)
        } else {
            Rational::zero()
        }
    };
    let p = m.point_from_parts(&x, &z, &d);
    (u, m, p)
}

/// Depth weights `n^(4·(maxdepth - depth))` under which the tree is the
/// unique optimum.
pub fn stt_certificate(t: &SearchTree) -> Vec<Rational> {
    let n = Rational::from_int(t.n() as i64);
    let depths = t.depth_counts();
    let top = depths.iter().copied().max().unwrap_or(0);
    depths.iter().map(|&d| n.pow(4 * (top - d))).collect()
}

/// Certificate direction for a search tree, verified to have the tree's
/// point as the unique optimum.
pub fn certify_stt_vertex(u: &Topology, t: &SearchTree) -> Result<Vec<Rational>> {
    if u.n() < 2 {
        return Err(Error::Invalid("certificate needs at least two nodes".into()));
    }
    let w = stt_certificate(t);
    let m = build_primal(u);
    let p = m.stt_point(u, t);
    if !certify_unique_optimum(&m, &m.d_objective(&w), &p)? {
        return Err(Error::Verification(format!("tree {} is not the unique optimum", t.to_nested())));
    }
    Ok(w)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum NonTreeKind {
    CyclicAncestry,
    LcaAbuse,
}

/// Integer vertex that no search tree induces.
pub fn construct_nontree_vertex(u: &Topology, kind: NonTreeKind, seed: u64) -> Result<Point> {
    let n = u.n();
    if n < 3 {
        return Err(Error::Invalid("needs at least three nodes".into()));
    }
    let m = build_primal(u);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let zero = Rational::zero;
    let one = Rational::one;
    let candidates: Vec<Point> = match kind {
        NonTreeKind::CyclicAncestry => {
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut rng);
            let mut x = vec![vec![zero(); n]; n];
            for a in 0..n {
                for b in a + 1..n {
                    x[order[a]][order[b]] = one();
                }
            }
            let mut picks: Vec<usize> = (0..n).collect();
            picks.shuffle(&mut rng);
            let mut t: Vec<usize> = picks[..3].to_vec();
            t.sort_by_key(|&v| order.iter().position(|&o| o == v));
            x[t[0]][t[2]] = zero();
            x[t[2]][t[0]] = one();
            let d: Vec<Rational> = (0..n).map(|j| (0..n).map(|i| x[i][j].clone()).sum()).collect();
            vec![m.point_from_parts(&x, &|_, _, _| zero(), &d)]
        }
        NonTreeKind::LcaAbuse => {
            let mut trees = enumerate_stts(u);
            trees.shuffle(&mut rng);
            let mut out = Vec::new();
            for t in &trees {
                let ip = crate::stt::induced_point(u, t);
                let mut zs: Vec<(usize, usize, usize)> =
                    ip.z.iter().filter(|(_, v)| v.is_one()).map(|(k, _)| *k).collect();
                zs.shuffle(&mut rng);
                for (k, i, j) in zs {
                    let (b, c) = if rng.gen_bool(0.5) { (i, j) } else { (j, i) };
                    let mut x = ip.x.clone();
                    x[b][c] = one();
                    x[c][b] = zero();
                    let d: Vec<Rational> = (0..n).map(|v| (0..n).map(|a| x[a][v].clone()).sum()).collect();
                    let z = |kk: usize, ii: usize, jj: usize| {
                        if (kk, ii, jj) == (k, i, j) {
                            zero()
                        } else {
                            ip.z.iter().find(|e| e.0 == (kk, ii, jj)).map(|e| e.1.clone()).unwrap_or_default()
                        }
                    };
                    out.push(m.point_from_parts(&x, &z, &d));
                }
                if !out.is_empty() {
                    break;
                }
            }
            if out.is_empty() {
                return Err(Error::Invalid("no search tree has an LCA variable set".into()));
            }
            out
        }
    };
    for p in candidates {
        if m.is_feasible(&p) && is_vertex(&m, &p)? {
            return Ok(p);
        }
    }
    Err(Error::Verification("no constructed point is a vertex".into()))
}

/// Lifts a feasible point to the topology with one more node. The new node
/// is placed below its neighbor(s) and ancestor of none.
pub fn extend_vertex(p: &[Rational], u: &Topology, ext: Extension) -> Result<(Topology, Point)> {
    let old = build_primal(u);
    old.check_dims(p)?;
    let v = u.extend(ext)?;
    let a = u.n();
    let m = build_primal(&v);
    let n = v.n();
    let get = |var: Var| p[old.idx(var)].clone();
    let ox = |i: usize, j: usize| if i == j { Rational::zero() } else { get(Var::X(i, j)) };
    let oz = |k: usize, i: usize, j: usize| get(Var::Z(k, i.min(j), i.max(j)));
    // side(i): neighbor of a through which i is reached
    let side = |i: usize| -> usize {
        match ext {
            Extension::LeafAt(b) => b,
            Extension::Subdivide(b, c) => {
                if v.interior(a, i).contains(&b) || i == b {
                    b
                } else {
                    c
                }
            }
        }
    };
    let mut x = vec![vec![Rational::zero(); n]; n];
    for i in 0..a {
        for j in 0..a {
            x[i][j] = ox(i, j);
        }
        let b = side(i);
        x[i][a] = if i == b { Rational::one() } else { ox(i, b) };
    }
    let z = |k: usize, i: usize, j: usize| -> Rational {
        if i != a && j != a {
            if k == a {
                return Rational::zero();
            }
            return oz(k, i, j);
        }
        let o = if i == a { j } else { i };
        let b = side(o);
        if k == b {
            ox(b, o)
        } else {
            oz(k, b, o)
        }
    };
    let mut d: Vec<Rational> = old.d_part(p);
    d.push((0..a).map(|i| x[i][a].clone()).sum());
    let q = m.point_from_parts(&x, &z, &d);
    let bad = m.check_feasible(&q)?;
    if !bad.is_empty() {
        return Err(Error::Verification(format!("extended point violates {}", bad.join(", "))));
    }
    Ok((v, q))
}

/// Restriction of a point to the variables of a smaller model.
pub fn project(from: &LpModel, to: &LpModel, p: &[Rational]) -> Point {
    to.vars().iter().map(|&var| p[from.idx(var)].clone()).collect()
}

/// Joins part vertices through the center: the center is everyone's
/// ancestor, cross-part pairs take the center as LCA, part depths shift by one.
pub fn product_vertex(parts: &[(Topology, Point)], combined: &Combined) -> Result<Point> {
    if parts.len() != combined.maps.len() {
        return Err(Error::Invalid("one vertex per combined part".into()));
    }
    let u = &combined.topology;
    let n = u.n();
    let r = combined.center;
    let mut owner = vec![usize::MAX; n];
    let mut local = vec![0; n];
    let models: Vec<LpModel> = parts.iter().map(|(t, _)| build_primal(t)).collect();
    for (k, ((t, p), map)) in parts.iter().zip(&combined.maps).enumerate() {
        if t.n() != map.len() {
            return Err(Error::Dimension { expected: map.len(), got: t.n() });
        }
        models[k].check_dims(p)?;
        if !models[k].is_feasible(p) {
            return Err(Error::Invalid(format!("part {} point is infeasible", k + 1)));
        }
        for (v, &g) in map.iter().enumerate() {
            owner[g] = k;
            local[g] = v;
        }
    }
    let mut x = vec![vec![Rational::zero(); n]; n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            x[i][j] = if i == r {
                Rational::one()
            } else if j == r || owner[i] != owner[j] {
                Rational::zero()
            } else {
                let k = owner[i];
                parts[k].1[models[k].idx(Var::X(local[i], local[j]))].clone()
            };
        }
    }
    let z = |k: usize, i: usize, j: usize| -> Rational {
        if i == r || j == r {
            Rational::zero()
        } else if owner[i] != owner[j] {
            if k == r {
                Rational::one()
            } else {
                Rational::zero()
            }
        } else {
            let o = owner[i];
            let (a, b) = (local[i].min(local[j]), local[i].max(local[j]));
            parts[o].1[models[o].idx(Var::Z(local[k], a, b))].clone()
        }
    };
    let d: Vec<Rational> = (0..n)
        .map(|g| {
            if g == r {
                Rational::zero()
            } else {
                let k = owner[g];
                &parts[k].1[models[k].idx(Var::D(local[g]))] + Rational::one()
            }
        })
        .collect();
    let m = build_primal(u);
    let p = m.point_from_parts(&x, &z, &d);
    let bad = m.check_feasible(&p)?;
    if !bad.is_empty() {
        return Err(Error::Verification(format!("product point violates {}", bad.join(", "))));
    }
    Ok(p)
}

/// One subtree step of the weak-duality audit.
#[derive(Clone, Debug, Serialize)]
pub struct SubtreeStep {
    pub node: usize,
    /// `Σ R_ab` over pairs in the subtree whose LCA is the node.
    pub dual: Rational,
    /// Weight of the strict descendants.
    pub primal: Rational,
    pub slack: Rational,
}

#[derive(Clone, Debug, Serialize)]
pub struct DualityAudit {
    pub steps: Vec<SubtreeStep>,
    pub dual_value: Rational,
    pub primal_value: Rational,
    /// Every step tight, which certifies the tree optimal.
    pub equality_chain: bool,
}

impl DualityAudit {
    pub fn holds(&self) -> bool {
        self.steps.iter().all(|s| !s.slack.is_negative())
    }
}

/// Checks the per-subtree bound of a dual solution against a search tree.
pub fn audit_weak_duality(
    u: &Topology,
    t: &SearchTree,
    dual: &LpModel,
    y: &[Rational],
    f: &[Rational],
) -> Result<DualityAudit> {
    let bad = dual.check_feasible(y)?;
    if !bad.is_empty() {
        return Err(Error::Invalid(format!("dual point violates {}", bad.join(", "))));
    }
    let n = u.n();
    let mut steps = Vec::new();
    for i in 0..n {
        let desc = t.subtree(i) & !(1u64 << i);
        if desc == 0 {
            continue;
        }
        let members = crate::topology::nodes_of(t.subtree(i));
        let mut lhs = Rational::zero();
        for (x, &a) in members.iter().enumerate() {
            for &b in &members[x + 1..] {
                if t.lca(a, b) == i {
                    lhs += &y[dual.idx(Var::R(a.min(b), a.max(b)))];
                }
            }
        }
        let rhs: Rational = crate::topology::nodes_of(desc).into_iter().map(|a| f[a].clone()).sum();
        steps.push(SubtreeStep { node: i, slack: &rhs - &lhs, dual: lhs, primal: rhs });
    }
    let dual_value: Rational =
        (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).map(|(i, j)| y[dual.idx(Var::R(i, j))].clone()).sum();
    let primal_value = crate::rational::dot(&t.depths(), f);
    let equality_chain = steps.iter().all(|s| s.slack.is_zero());
    Ok(DualityAudit { steps, dual_value, primal_value, equality_chain })
}

#[derive(Clone, Debug, Serialize)]
pub struct Collisions {
    /// Vertex indices sharing a depth vector, groups of two or more.
    pub groups: Vec<Vec<usize>>,
    /// No group contains a search-tree depth vector.
    pub stt_collision_free: bool,
}

/// Groups vertices by exact depth projection.
pub fn d_projection_collisions(model: &LpModel, vertices: &[Point]) -> Collisions {
    let mut by_d: BTreeMap<Vec<Rational>, Vec<usize>> = BTreeMap::new();
    for (k, v) in vertices.iter().enumerate() {
        by_d.entry(model.d_part(v)).or_default().push(k);
    }
    let stt_ds: BTreeSet<Vec<Rational>> = match model.topology() {
        Some(u) if u.n() <= crate::stt::DEFAULT_BEST_CAP => crate::stt::stt_depth_vectors(u).into_iter().collect(),
        _ => BTreeSet::new(),
    };
    let mut groups = Vec::new();
    let mut stt_collision_free = true;
    for (d, g) in by_d {
        if g.len() >= 2 {
            if stt_ds.contains(&d) {
                stt_collision_free = false;
            }
            groups.push(g);
        }
    }
    Collisions { groups, stt_collision_free }
}

/// Every vertex of the star's LP is integer.
pub fn star_integrality_check(n: usize) -> Result<bool> {
    let u = Topology::star(n);
    let vs = enumerate_vertices(&build_primal(&u))?;
    Ok(vs.iter().all(|p| p.iter().all(|x| x.is_integer())))
}

/// Size of the smallest subset violating `Σ_S D ≥ |S| - 1`, if any. The
/// `s` smallest coordinates form the tightest subset of size `s`.
pub fn depth_bounds_violation(d: &[Rational]) -> Option<usize> {
    let mut sorted = d.to_vec();
    sorted.sort();
    let mut acc = Rational::zero();
    for (k, x) in sorted.iter().enumerate() {
        acc += x;
        if acc < Rational::from_int(k as i64) {
            return Some(k + 1);
        }
    }
    None
}

/// At most `k` coordinates are `≤ k/(k+1)`.
pub fn small_depth_count_ok(d: &[Rational], k: usize) -> bool {
    let cap = Rational::new(k as i64, k as i64 + 1);
    d.iter().filter(|x| **x <= cap).count() <= k
}
