//! The normals method: facets of the dominance hull of known depth vectors
//! are used as LP directions; a facet whose LP optimum falls strictly below
//! it reveals a depth-space vertex no search tree induces.

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::analysis::denominator_profile;
use crate::error::{Error, Result};
use crate::lpmodel::{build_primal, LpModel, Point, Sense, Var};
use crate::parallel::Parallelism;
use crate::polytope::{dominance_hull_facets, point_below_facet, Facet};
use crate::rational::{join, Rational};
use crate::simplex::{lexmin_face, Simplex, Status};
use crate::stt::stt_depth_vectors;
use crate::topology::Topology;

/// Facet directions solved per warm-started tableau. Fixed so results do
/// not depend on the thread count.
const CHUNK: usize = 64;

#[derive(Clone, Debug)]
pub struct ScanOptions {
    pub parallelism: Parallelism,
    /// Facets beyond this count are not scanned (report marked incomplete).
    pub facet_cap: Option<usize>,
    /// Wall-clock budget for the phase.
    pub time_budget: Option<Duration>,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions { parallelism: Parallelism::Auto, facet_cap: None, time_budget: None }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FalseFacet {
    pub normal: Vec<i64>,
    pub offset: Rational,
    pub lp_value: Rational,
    #[serde(skip)]
    pub point: Point,
    pub d: Vec<Rational>,
}

#[derive(Clone, Debug, Serialize)]
pub struct NewVertex {
    pub d: Vec<Rational>,
    #[serde(skip)]
    pub point: Point,
    /// Indices into the report's false facets.
    pub directions: Vec<usize>,
    /// Strictly below at least one facet of the phase hull.
    pub below_some_facet: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanReport {
    pub topology: String,
    pub phase: usize,
    pub stt_count: usize,
    pub primary_direction_count: usize,
    pub false_facet_count: usize,
    pub false_facets: Vec<FalseFacet>,
    pub new_vertices: Vec<NewVertex>,
    pub vertex_classes: usize,
    pub denominators_d: BTreeSet<u64>,
    pub denominators_xzd: BTreeSet<u64>,
    /// False when a facet cap or time budget cut the phase short.
    pub complete: bool,
    /// All known depth-space points after this phase (search trees first).
    #[serde(skip)]
    pub known: Vec<Vec<Rational>>,
}

impl ScanReport {
    pub fn is_closed(&self) -> bool {
        self.complete && self.new_vertices.is_empty()
    }

    /// One TSV line: name, STTs, directions, false facets, new vertices,
    /// classes, D denominators, XZD denominators.
    pub fn tsv_row(&self) -> String {
        let fmt = |s: &BTreeSet<u64>| {
            if s.is_empty() {
                "-".to_string()
            } else {
                s.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
            }
        };
        format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            self.topology,
            self.stt_count,
            self.primary_direction_count,
            self.false_facet_count,
            self.new_vertices.len(),
            self.vertex_classes,
            fmt(&self.denominators_d),
            fmt(&self.denominators_xzd)
        )
    }

    pub const TSV_HEADER: &'static str =
        "topology\tstts\tdirections\tfalse_facets\tfrac_vertices\tclasses\td_denoms\txzd_denoms";
}

/// Solves the model in every facet direction (objective on D only).
/// Returns per facet the optimal value, or `None` past the budget.
fn solve_facets(model: &LpModel, facets: &[Facet], opts: &ScanOptions) -> Result<Vec<Option<Rational>>> {
    let base = Simplex::new(model)?;
    let start = Instant::now();
    let limit = opts.facet_cap.unwrap_or(usize::MAX).min(facets.len());
    let chunks: Vec<(usize, usize)> = (0..limit).step_by(CHUNK).map(|s| (s, (s + CHUNK).min(limit))).collect();
    let results: Vec<Result<Vec<Option<Rational>>>> = opts.parallelism.map(&chunks, |&(s, e)| {
        if opts.time_budget.is_some_and(|b| start.elapsed() > b) {
            return Ok(vec![None; e - s]);
        }
        let mut sx = base.clone();
        let mut out = Vec::with_capacity(e - s);
        for f in &facets[s..e] {
            let obj = model.d_objective(&f.normal_q());
            let r = sx.optimize(&obj, Sense::Min)?;
            if r.status != Status::Optimal {
                return Err(Error::Verification(format!("LP not optimal in direction {:?}", f.normal)));
            }
            out.push(Some(r.value));
        }
        Ok(out)
    });
    let mut all = Vec::with_capacity(facets.len());
    for r in results {
        all.extend(r?);
    }
    all.resize(facets.len(), None);
    Ok(all)
}

fn run_phase(
    u: &Topology,
    known: Vec<Vec<Rational>>,
    stt_count: usize,
    phase: usize,
    opts: &ScanOptions,
) -> Result<ScanReport> {
    let model = build_primal(u);
    let facets = dominance_hull_facets(&known)?;
    let solved = solve_facets(&model, &facets, opts)?;
    let complete = solved.iter().all(|s| s.is_some());
    let d_vars: Vec<usize> = (0..u.n()).map(|i| model.idx(Var::D(i))).collect();
    let mut false_facets = Vec::new();
    for (f, s) in facets.iter().zip(&solved) {
        let Some(value) = s else { continue };
        if *value < f.offset {
            // degenerate optima: take the lexicographically smallest depth
            // vector on the optimal face, which is a depth-space vertex
            let obj = model.d_objective(&f.normal_q());
            let r = lexmin_face(&model, &obj, &d_vars)?;
            debug_assert_eq!(&r.value, value);
            false_facets.push(FalseFacet {
                normal: f.normal.clone(),
                offset: f.offset.clone(),
                lp_value: value.clone(),
                d: model.d_part(&r.point),
                point: r.point,
            });
        } else if *value > f.offset {
            return Err(Error::Verification(format!(
                "LP optimum {} above facet offset {} for normal {:?}",
                value, f.offset, f.normal
            )));
        }
    }
    let known_set: BTreeSet<&Vec<Rational>> = known.iter().collect();
    let mut by_d: BTreeMap<Vec<Rational>, NewVertex> = BTreeMap::new();
    for (k, ff) in false_facets.iter().enumerate() {
        if known_set.contains(&ff.d) {
            continue;
        }
        by_d.entry(ff.d.clone())
            .or_insert_with(|| NewVertex {
                d: ff.d.clone(),
                point: ff.point.clone(),
                directions: Vec::new(),
                below_some_facet: false,
            })
            .directions
            .push(k);
    }
    let mut new_vertices: Vec<NewVertex> = by_d.into_values().collect();
    for v in new_vertices.iter_mut() {
        v.below_some_facet = facets.iter().any(|f| point_below_facet(f, &v.d));
    }
    let ds: Vec<Vec<Rational>> = new_vertices.iter().map(|v| v.d.clone()).collect();
    let vertex_classes = orbit_classes(&ds, u).len();
    let denominators_d = denominator_profile(ds.iter());
    let denominators_xzd = denominator_profile(new_vertices.iter().map(|v| &v.point));
    let mut all_known = known;
    all_known.extend(ds);
    Ok(ScanReport {
        topology: u.label(),
        phase,
        stt_count,
        primary_direction_count: facets.len(),
        false_facet_count: false_facets.len(),
        false_facets,
        new_vertices,
        vertex_classes,
        denominators_d,
        denominators_xzd,
        complete,
        known: all_known,
    })
}

/// First phase: facets of the hull of all search-tree depth vectors.
pub fn scan(u: &Topology, opts: &ScanOptions) -> Result<ScanReport> {
    let known = stt_depth_vectors(u);
    let count = known.len();
    run_phase(u, known, count, 1, opts)
}

/// Next phase over search trees plus every vertex discovered so far.
pub fn iterate(u: &Topology, prior: &ScanReport, opts: &ScanOptions) -> Result<ScanReport> {
    if !prior.complete {
        return Err(Error::Invalid("previous phase is incomplete".into()));
    }
    run_phase(u, prior.known.clone(), prior.stt_count, prior.phase + 1, opts)
}

/// Runs phases until no new vertex appears or `max_phases` is reached.
pub fn scan_to_closure(u: &Topology, opts: &ScanOptions, max_phases: usize) -> Result<Vec<ScanReport>> {
    let mut reports = vec![scan(u, opts)?];
    while reports.len() < max_phases {
        let last = reports.last().expect("non-empty");
        if last.new_vertices.is_empty() || !last.complete {
            break;
        }
        let next = iterate(u, last, opts)?;
        reports.push(next);
    }
    Ok(reports)
}

/// Image of a depth vector under a node permutation.
pub fn permute(d: &[Rational], perm: &[usize]) -> Vec<Rational> {
    let mut out = vec![Rational::zero(); d.len()];
    for (i, &p) in perm.iter().enumerate() {
        out[p] = d[i].clone();
    }
    out
}

/// Partition of the vertices into automorphism orbits (indices, each orbit
/// sorted, orbits ordered by first member).
pub fn orbit_classes(vertices: &[Vec<Rational>], u: &Topology) -> Vec<Vec<usize>> {
    let autos = u.automorphisms();
    let mut by_key: BTreeMap<Vec<Rational>, Vec<usize>> = BTreeMap::new();
    for (i, v) in vertices.iter().enumerate() {
        let key = autos.iter().map(|a| permute(v, a)).min().unwrap_or_else(|| v.clone());
        by_key.entry(key).or_default().push(i);
    }
    let mut out: Vec<Vec<usize>> = by_key.into_values().collect();
    out.sort();
    out
}

/// Canonical representative of a direction under the automorphism group.
pub fn canonical_direction(h: &[i64], u: &Topology) -> Vec<i64> {
    u.automorphisms()
        .iter()
        .map(|a| {
            let mut out = vec![0; h.len()];
            for (i, &p) in a.iter().enumerate() {
                out[p] = h[i];
            }
            out
        })
        .min()
        .unwrap_or_else(|| h.to_vec())
}

/// True iff every coordinate is a multiple of one half.
pub fn is_half_integral(p: &[Rational]) -> bool {
    p.iter().all(|x| {
        let d = x.denom();
        d == 1.into() || d == 2.into()
    })
}

/// Human-readable summary used by the command line.
pub fn describe(r: &ScanReport) -> String {
    let mut s = String::new();
    s.push_str(&format!(
        "phase {}: {} directions, {} false facets, {} new vertices in {} classes{}\n",
        r.phase,
        r.primary_direction_count,
        r.false_facet_count,
        r.new_vertices.len(),
        r.vertex_classes,
        if r.complete { "" } else { " (incomplete)" }
    ));
    for v in &r.new_vertices {
        s.push_str(&format!("  D = ({}) from {} directions\n", join(&v.d), v.directions.len()));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};
    use crate::topology::catalog;

    #[test]
    fn small_paths_are_closed() {
        for name in ["U_3_0", "U_4_0", "U_4_1"] {
            let u = catalog(name).unwrap();
            let r = scan(&u, &ScanOptions::default()).unwrap();
            assert_eq!(r.false_facet_count, 0, "{name}");
            assert!(r.is_closed());
        }
    }

    #[test]
    fn orbits_on_path() {
        let u = Topology::path(3);
        let vs = vec![vec![qi(0), qi(1), qi(2)], vec![qi(2), qi(1), qi(0)], vec![q(1, 2), qi(0), q(1, 2)]];
        assert_eq!(orbit_classes(&vs, &u), vec![vec![0, 1], vec![2]]);
    }
}
