//! Root rounding of fractional LP points into search trees, exhaustive over
//! every admissible root choice, plus the iterated variant and the
//! approximation-ratio drivers.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lpmodel::{build_bc_ratio_lp, build_primal, LpModel, Sense, Var};
use crate::normals::ScanReport;
use crate::parallel::Parallelism;
use crate::rational::{dot, join, lcm_denoms, Rational};
use crate::simplex::{lexmin_face, solve, Status};
use crate::stt::{best_stt, cost_of_depths, stt_depth_vectors, SearchTree};
use crate::topology::{nodes_of, NodeSet, Topology};

/// Outcome cap for [`round_all`].
pub const DEFAULT_ROUND_BUDGET: usize = 200_000;

/// Nodes `r` of `comp` with `Σ_{u ∈ comp, r ∈ [u..v)} X_uv ≥ 1/2` for every
/// other `v` in `comp`.
pub fn candidate_roots(u: &Topology, x: &[Vec<Rational>], comp: NodeSet) -> Vec<usize> {
    let nodes = nodes_of(comp);
    let half = Rational::new(1, 2);
    nodes
        .iter()
        .copied()
        .filter(|&r| {
            nodes.iter().all(|&v| {
                if v == r {
                    return true;
                }
                let s: Rational = nodes
                    .iter()
                    .filter(|&&w| w != v && (w == r || u.interior(w, v).contains(&r)))
                    .map(|&w| &x[w][v])
                    .sum();
                s >= half
            })
        })
        .collect()
}

fn x_matrix(model: &LpModel, p: &[Rational]) -> Vec<Vec<Rational>> {
    model.x_part(p)
}

/// One rounded tree with the choices that produced it.
#[derive(Clone, Debug)]
pub struct RoundingOutcome {
    pub stt: SearchTree,
    pub depths: Vec<Rational>,
    /// `(component, chosen root, candidate set)` in pre-order.
    pub trace: Vec<(NodeSet, usize, Vec<usize>)>,
}

impl RoundingOutcome {
    pub fn cost(&self, w: &[Rational]) -> Rational {
        cost_of_depths(&self.depths, w)
    }
}

#[derive(Clone, Debug)]
pub struct RoundAll {
    pub outcomes: Vec<RoundingOutcome>,
    /// False when the budget stopped the expansion; `outcomes` is then a
    /// subset.
    pub complete: bool,
}

impl RoundAll {
    /// `(best, worst)` cost with the root at depth one.
    pub fn bounds(&self, w: &[Rational]) -> Option<(Rational, Rational)> {
        let costs: Vec<Rational> = self.outcomes.iter().map(|o| o.cost(w)).collect();
        Some((costs.iter().min()?.clone(), costs.iter().max()?.clone()))
    }

    pub fn contains_depths(&self, d: &[Rational]) -> bool {
        self.outcomes.iter().any(|o| o.depths == d)
    }
}

type Partial = (Vec<Option<usize>>, Vec<(NodeSet, usize, Vec<usize>)>);

struct Expander<'a> {
    u: &'a Topology,
    x: Vec<Vec<Rational>>,
    memo: HashMap<NodeSet, Vec<Partial>>,
    budget: usize,
    truncated: bool,
}

impl Expander<'_> {
    fn expand(&mut self, comp: NodeSet) -> Result<Vec<Partial>> {
        if let Some(v) = self.memo.get(&comp) {
            return Ok(v.clone());
        }
        let n = self.u.n();
        let cands = candidate_roots(self.u, &self.x, comp);
        if cands.is_empty() {
            return Err(Error::Verification(format!(
                "no admissible root in component {{{}}}",
                nodes_of(comp).iter().map(|v| (v + 1).to_string()).collect::<Vec<_>>().join(",")
            )));
        }
        let mut out: Vec<Partial> = Vec::new();
        for &r in &cands {
            let mut base = vec![None; n];
            base[r] = Some(r);
            let mut acc: Vec<Partial> = vec![(base, vec![(comp, r, cands.clone())])];
            for c in self.u.components(comp, r) {
                let subs = self.expand(c)?;
                let mut next = Vec::with_capacity(acc.len() * subs.len());
                'outer: for a in &acc {
                    for s in &subs {
                        if next.len() + out.len() >= self.budget {
                            self.truncated = true;
                            break 'outer;
                        }
                        let mut t = a.clone();
                        for v in nodes_of(c) {
                            // sub-root is marked by a self parent
                            t.0[v] = if s.0[v] == Some(v) { Some(r) } else { s.0[v] };
                        }
                        t.1.extend(s.1.iter().cloned());
                        next.push(t);
                    }
                }
                acc = next;
            }
            out.extend(acc);
            if out.len() >= self.budget {
                self.truncated = true;
                break;
            }
        }
        self.memo.insert(comp, out.clone());
        Ok(out)
    }
}

/// Every tree root rounding can produce from `p` (a point of `model`).
pub fn round_all(model: &LpModel, u: &Topology, p: &[Rational], budget: usize) -> Result<RoundAll> {
    model.check_dims(p)?;
    let mut e = Expander { u, x: x_matrix(model, p), memo: HashMap::new(), budget, truncated: false };
    let parts = e.expand(u.all_nodes())?;
    let mut outcomes = Vec::with_capacity(parts.len());
    for (parents, trace) in parts {
        let root = trace[0].1;
        let ps: Vec<Option<usize>> =
            parents.iter().enumerate().map(|(v, p)| if v == root { None } else { *p }).collect();
        let stt = SearchTree::from_parents(u, &ps)?;
        outcomes.push(RoundingOutcome { depths: stt.depths(), stt, trace });
    }
    Ok(RoundAll { outcomes, complete: !e.truncated })
}

/// Best and worst rounding cost by dynamic programming over components,
/// without listing outcomes.
pub fn round_bounds(model: &LpModel, u: &Topology, p: &[Rational], w: &[Rational]) -> Result<(Rational, Rational)> {
    let x = x_matrix(model, p);
    fn rec(
        u: &Topology,
        x: &[Vec<Rational>],
        w: &[Rational],
        comp: NodeSet,
        memo: &mut HashMap<NodeSet, (Rational, Rational)>,
    ) -> Result<(Rational, Rational)> {
        if let Some(v) = memo.get(&comp) {
            return Ok(v.clone());
        }
        let cands = candidate_roots(u, x, comp);
        if cands.is_empty() {
            return Err(Error::Verification("no admissible root".into()));
        }
        let total: Rational = nodes_of(comp).iter().map(|&v| &w[v]).sum();
        let mut lo: Option<Rational> = None;
        let mut hi: Option<Rational> = None;
        for r in cands {
            // every node below r gains one level
            let mut a = &total - &w[r];
            let mut b = a.clone();
            for c in u.components(comp, r) {
                let (l, h) = rec(u, x, w, c, memo)?;
                a += l;
                b += h;
            }
            if lo.as_ref().is_none_or(|v| a < *v) {
                lo = Some(a);
            }
            if hi.as_ref().is_none_or(|v| b > *v) {
                hi = Some(b);
            }
        }
        let res = (lo.expect("candidates"), hi.expect("candidates"));
        memo.insert(comp, res.clone());
        Ok(res)
    }
    let (lo, hi) = rec(u, &x, w, u.all_nodes(), &mut HashMap::new())?;
    let s: Rational = w.iter().sum();
    Ok((lo + &s, hi + s))
}

/// Root choice for [`iterated_round`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RootPick {
    Smallest,
    Largest,
}

/// Root rounding that re-solves the LP on every component after each
/// choice. `first` forces the top-level root (it must be admissible).
pub fn iterated_round(
    u: &Topology,
    p0: &[Rational],
    w: &[Rational],
    pick: RootPick,
    first: Option<usize>,
) -> Result<RoundingOutcome> {
    let n = u.n();
    let mut parents: Vec<Option<usize>> = vec![None; n];
    let mut trace = Vec::new();
    let model = build_primal(u);
    model.check_dims(p0)?;
    // (component, point of the component's own LP, its topology, id map, parent)
    let mut stack: Vec<(NodeSet, Vec<Vec<Rational>>, Option<usize>, Option<usize>)> =
        vec![(u.all_nodes(), model.x_part(p0), None, first)];
    while let Some((comp, xfull, parent, forced)) = stack.pop() {
        let cands = candidate_roots(u, &xfull, comp);
        if cands.is_empty() {
            return Err(Error::Verification("no admissible root".into()));
        }
        let r = match forced {
            Some(f) if cands.contains(&f) => f,
            Some(f) => return Err(Error::Invalid(format!("node {} is not an admissible root", f + 1))),
            None => match pick {
                RootPick::Smallest => cands[0],
                RootPick::Largest => *cands.last().expect("non-empty"),
            },
        };
        parents[r] = parent;
        trace.push((comp, r, cands));
        let children = u.components(comp, r);
        for c in children.into_iter().rev() {
            let (sub, map) = u.induced(c)?;
            let sm = build_primal(&sub);
            let sw: Vec<Rational> = map.iter().map(|&v| w[v].clone()).collect();
            let res = solve(&sm, &sm.d_objective(&sw), Sense::Min)?;
            if res.status != Status::Optimal {
                return Err(Error::Verification("component LP not optimal".into()));
            }
            let sx = sm.x_part(&res.point);
            let mut x = vec![vec![Rational::zero(); n]; n];
            for (a, &va) in map.iter().enumerate() {
                for (b, &vb) in map.iter().enumerate() {
                    x[va][vb] = sx[a][b].clone();
                }
            }
            stack.push((c, x, Some(r), None));
        }
    }
    let stt = SearchTree::from_parents(u, &parents)?;
    Ok(RoundingOutcome { depths: stt.depths(), stt, trace })
}

/// One row of an approximation-ratio table (costs with root depth one).
#[derive(Clone, Debug, Serialize)]
pub struct RatioRow {
    pub direction: Vec<Rational>,
    pub opt: Rational,
    pub best_case: Rational,
    pub worst_case: Rational,
    pub complete: bool,
}

impl RatioRow {
    pub fn bc_ratio(&self) -> Rational {
        &self.best_case / &self.opt
    }

    pub fn wc_ratio(&self) -> Rational {
        &self.worst_case / &self.opt
    }

    pub const TSV_HEADER: &'static str = "direction\topt\tbc\twc\tbc_ratio\twc_ratio\tbc_decimal\twc_decimal";

    pub fn tsv_row(&self) -> String {
        format!(
            "({})\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            join(&self.direction),
            self.opt,
            self.best_case,
            self.worst_case,
            self.bc_ratio(),
            self.wc_ratio(),
            self.bc_ratio().to_decimal(4),
            self.wc_ratio().to_decimal(4)
        )
    }
}

/// Ratio row for one direction: LP optimum (lexicographically smallest
/// depth vector on the optimal face), all its roundings, best tree.
pub fn ratio_row(u: &Topology, w: &[Rational]) -> Result<RatioRow> {
    let model = build_primal(u);
    let obj = model.d_objective(w);
    let d_vars: Vec<usize> = (0..u.n()).map(|i| model.idx(Var::D(i))).collect();
    let r = lexmin_face(&model, &obj, &d_vars)?;
    if r.status != Status::Optimal {
        return Err(Error::Verification("LP not optimal".into()));
    }
    ratio_row_at(&model, u, w, &r.point)
}

/// Ratio row for a given optimal point.
pub fn ratio_row_at(model: &LpModel, u: &Topology, w: &[Rational], p: &[Rational]) -> Result<RatioRow> {
    let best = best_stt(u, w)?;
    let s: Rational = w.iter().sum();
    let (bc, wc) = round_bounds(model, u, p, w)?;
    Ok(RatioRow { direction: w.to_vec(), opt: best.value + s, best_case: bc, worst_case: wc, complete: true })
}

/// Ratio rows at every known non-tree vertex that is optimal in direction
/// `w`, paired with the vertex index in the report.
pub fn ratio_rows_on_face(u: &Topology, w: &[Rational], report: &ScanReport) -> Result<Vec<(usize, RatioRow)>> {
    let model = build_primal(u);
    let opt = solve(&model, &model.d_objective(w), Sense::Min)?.value;
    let mut out = Vec::new();
    for (k, v) in report.new_vertices.iter().enumerate() {
        if weighted_depth(&v.d, w) == opt {
            out.push((k, ratio_row_at(&model, u, w, &v.point)?));
        }
    }
    Ok(out)
}

/// Worst-case rounding over every false-facet direction of a scan.
pub fn wc_over_primary(u: &Topology, report: &ScanReport, par: Parallelism) -> Result<Vec<RatioRow>> {
    let model = build_primal(u);
    let rows = par.map(&report.false_facets, |f| {
        let w: Vec<Rational> = f.normal.iter().map(|&x| Rational::from_int(x)).collect();
        ratio_row_at(&model, u, &w, &f.point)
    });
    rows.into_iter().collect()
}

/// Result of the best-case separation search.
#[derive(Clone, Debug, Serialize)]
pub struct BcSearch {
    /// Normalized direction (sums to one).
    pub direction: Vec<Rational>,
    /// Optimal separation `min S·f - D'·f`.
    pub separation: Rational,
    /// Index of the guessed minimizer among the tree depth vectors.
    pub guess: usize,
    /// Ratio row realized by the integer-scaled direction.
    pub realized: Option<RatioRow>,
    /// Guesses whose LP was infeasible.
    pub infeasible_guesses: usize,
}

/// Sweeps every tree depth vector as the guessed minimizer and keeps the
/// direction with the largest separation between `p`'s roundings and the
/// best tree.
pub fn bc_ratio_search(u: &Topology, p: &[Rational], epsilon: &Rational, par: Parallelism) -> Result<BcSearch> {
    let model = build_primal(u);
    let p_d = model.d_part(p);
    let stts = stt_depth_vectors(u);
    let rounds = round_all(&model, u, p, DEFAULT_ROUND_BUDGET)?;
    if !rounds.complete {
        return Err(Error::Budget("rounding expansion exceeded its budget".into()));
    }
    let mut rd: Vec<Vec<Rational>> = rounds.outcomes.iter().map(|o| o.depths.clone()).collect();
    rd.sort();
    rd.dedup();
    let idx: Vec<usize> = (0..stts.len()).collect();
    let solved: Vec<Result<Option<(Rational, Vec<Rational>)>>> = par.map(&idx, |&g| {
        let lp = build_bc_ratio_lp(&p_d, &stts[g], &stts, &rd, epsilon)?;
        let (sense, obj) = lp.objective.clone().expect("objective set");
        let r = solve(&lp, &obj, sense)?;
        Ok(match r.status {
            Status::Optimal => {
                let f: Vec<Rational> = (0..u.n()).map(|i| r.point[lp.idx(Var::Freq(i))].clone()).collect();
                Some((r.value, f))
            }
            _ => None,
        })
    });
    let mut best: Option<(Rational, Vec<Rational>, usize)> = None;
    let mut infeasible = 0;
    for (g, s) in solved.into_iter().enumerate() {
        match s? {
            None => infeasible += 1,
            Some((v, f)) => {
                if best.as_ref().is_none_or(|b| v > b.0) {
                    best = Some((v, f, g));
                }
            }
        }
    }
    let Some((separation, direction, guess)) = best else {
        return Ok(BcSearch {
            direction: vec![Rational::zero(); u.n()],
            separation: Rational::zero(),
            guess: 0,
            realized: None,
            infeasible_guesses: infeasible,
        });
    };
    let realized = if separation.is_positive() {
        let l = Rational::from_bigint(lcm_denoms(direction.iter()));
        let w: Vec<Rational> = direction.iter().map(|x| x * &l).collect();
        Some(ratio_row_at(&model, u, &w, p)?)
    } else {
        None
    };
    Ok(BcSearch { direction, separation, guess, realized, infeasible_guesses: infeasible })
}

/// `w·D` of a depth vector (root depth zero).
pub fn weighted_depth(d: &[Rational], w: &[Rational]) -> Rational {
    dot(d, w)
}
