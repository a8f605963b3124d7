//! Exact two-phase simplex on a dense tableau.
//!
//! Pricing is most-negative reduced cost with a switch to least-index
//! (Bland) after a run of degenerate pivots; a nondegenerate pivot switches
//! back. Both phases run on the canonical variable order, so results are
//! deterministic. The tableau can be re-optimized for a new objective from
//! its current basis, and rows can be appended and repaired with the dual
//! simplex (used by the cutting-plane loop).

use crate::error::{Error, Result};
use crate::linalg::{bigint_to_mod, integer_row, rank, ModEchelon};
use crate::lpmodel::{Family, LpModel, Point, Rel, Row, Sense, Var};
use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
}

/// A constraint active at a basic solution.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Active {
    /// Model row (index into `rows`; cut rows follow the model rows).
    Row(usize),
    /// Nonnegativity bound of a variable.
    Bound(usize),
}

#[derive(Clone, Debug)]
pub struct OptResult {
    pub status: Status,
    pub value: Rational,
    pub point: Point,
    /// Constraints that define the basic solution; all tight at `point`.
    pub basis: Vec<Active>,
    /// No nonbasic column has zero reduced cost (sufficient for a unique
    /// optimum).
    pub unique: bool,
    pub pivots: usize,
    /// Rows added by separation, in order.
    pub cuts: Vec<Row>,
}

impl OptResult {
    fn empty(status: Status, nvars: usize) -> Self {
        OptResult {
            status,
            value: Rational::zero(),
            point: vec![Rational::zero(); nvars],
            basis: Vec::new(),
            unique: false,
            pivots: 0,
            cuts: Vec::new(),
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == Status::Optimal
    }
}

/// Degenerate pivots tolerated before switching to least-index pricing.
const DEGENERATE_STREAK: usize = 32;
/// Circuit breaker on total pivots per optimization.
pub const PIVOT_LIMIT: usize = 2_000_000;

#[derive(Clone, Copy, Debug)]
enum Col {
    /// Model variable with sign (+1, or -1 for the negative half of a free
    /// variable).
    Struct {
        var: usize,
        neg: bool,
    },
    Slack,
    Art,
}

/// Simplex tableau over a model's explicit rows.
#[derive(Clone)]
pub struct Simplex {
    nvars: usize,
    cols: Vec<Col>,
    // positive column index of each variable; negative half when free
    var_cols: Vec<(usize, Option<usize>)>,
    a: Vec<Vec<Rational>>,
    b: Vec<Rational>,
    basis: Vec<usize>,
    // row index of each basic column
    pos: Vec<Option<usize>>,
    // model row behind each tableau row
    row_origin: Vec<usize>,
    // slack column per model row (None for equalities)
    row_slack: Vec<Option<usize>>,
    // sign applied to the model row when it entered the tableau
    row_sign: Vec<bool>,
    cost: Vec<Rational>,
    d: Vec<Rational>,
    z: Rational,
    nrows_model: usize,
    feasible: bool,
    pub pivots: usize,
    rows: Vec<Row>,
}

impl Simplex {
    /// Builds the tableau and runs phase one.
    pub fn new(model: &LpModel) -> Result<Self> {
        Self::from_rows(model, &model.rows)
    }

    pub fn from_rows(model: &LpModel, rows: &[Row]) -> Result<Self> {
        let nvars = model.num_vars();
        let mut cols = Vec::new();
        let mut var_cols = Vec::with_capacity(nvars);
        for v in 0..nvars {
            let p = cols.len();
            cols.push(Col::Struct { var: v, neg: false });
            let n = if model.nonneg[v] {
                None
            } else {
                cols.push(Col::Struct { var: v, neg: true });
                Some(p + 1)
            };
            var_cols.push((p, n));
        }
        let mut row_slack = Vec::with_capacity(rows.len());
        for r in rows {
            if r.rel == Rel::Eq {
                row_slack.push(None);
            } else {
                row_slack.push(Some(cols.len()));
                cols.push(Col::Slack);
            }
        }
        let width_no_art = cols.len();
        let m = rows.len();
        let mut a = vec![vec![Rational::zero(); width_no_art]; m];
        let mut b = vec![Rational::zero(); m];
        let mut row_sign = vec![false; m];
        let mut need_art = Vec::new();
        let mut basis = vec![usize::MAX; m];
        for (i, r) in rows.iter().enumerate() {
            for (v, c) in &r.coeffs {
                let (p, n) = var_cols[*v];
                a[i][p] = c.clone();
                if let Some(n) = n {
                    a[i][n] = -c;
                }
            }
            let slack_coef = match r.rel {
                Rel::Le => Some(Rational::one()),
                Rel::Ge => Some(-Rational::one()),
                Rel::Eq => None,
            };
            if let (Some(s), Some(c)) = (row_slack[i], slack_coef.clone()) {
                a[i][s] = c;
            }
            b[i] = r.rhs.clone();
            // make rhs >= 0; a zero rhs flips when that makes the slack +1
            let flip = b[i].is_negative() || (b[i].is_zero() && r.rel == Rel::Ge);
            if flip {
                for x in a[i].iter_mut() {
                    if !x.is_zero() {
                        *x = -&*x;
                    }
                }
                b[i] = -&b[i];
                row_sign[i] = true;
            }
            match row_slack[i] {
                Some(s) if a[i][s].is_one() => basis[i] = s,
                _ => need_art.push(i),
            }
        }
        for &i in &need_art {
            let c = cols.len();
            cols.push(Col::Art);
            for (k, row) in a.iter_mut().enumerate() {
                row.push(if k == i { Rational::one() } else { Rational::zero() });
            }
            basis[i] = c;
        }
        let width = cols.len();
        let mut pos = vec![None; width];
        for (i, &c) in basis.iter().enumerate() {
            pos[c] = Some(i);
        }
        let mut s = Simplex {
            nvars,
            cols,
            var_cols,
            a,
            b,
            basis,
            pos,
            row_origin: (0..m).collect(),
            row_slack,
            row_sign,
            cost: vec![Rational::zero(); width],
            d: vec![Rational::zero(); width],
            z: Rational::zero(),
            nrows_model: rows.len(),
            feasible: false,
            pivots: 0,
            rows: rows.to_vec(),
        };
        s.phase_one(width_no_art)?;
        Ok(s)
    }

    pub fn is_feasible(&self) -> bool {
        self.feasible
    }

    fn phase_one(&mut self, width_no_art: usize) -> Result<()> {
        let width = self.cols.len();
        if width > width_no_art {
            let mut cost = vec![Rational::zero(); width];
            for c in cost.iter_mut().skip(width_no_art) {
                *c = Rational::one();
            }
            self.set_cost(cost);
            let st = self.primal()?;
            debug_assert_eq!(st, Status::Optimal);
            if self.z.is_positive() {
                self.feasible = false;
                return Ok(());
            }
            // drive zero-level artificials out, dropping redundant rows
            let mut i = 0;
            while i < self.a.len() {
                if self.basis[i] >= width_no_art {
                    if let Some(j) = (0..width_no_art).find(|&j| !self.a[i][j].is_zero()) {
                        self.pivot(i, j);
                        i += 1;
                    } else {
                        self.remove_row(i);
                    }
                } else {
                    i += 1;
                }
            }
            for row in self.a.iter_mut() {
                row.truncate(width_no_art);
            }
            self.cols.truncate(width_no_art);
            self.pos.truncate(width_no_art);
        }
        self.feasible = true;
        let w = self.cols.len();
        self.cost = vec![Rational::zero(); w];
        self.d = vec![Rational::zero(); w];
        self.z = Rational::zero();
        Ok(())
    }

    fn remove_row(&mut self, i: usize) {
        let c = self.basis[i];
        self.pos[c] = None;
        self.a.remove(i);
        self.b.remove(i);
        self.basis.remove(i);
        self.row_origin.remove(i);
        for (k, &c) in self.basis.iter().enumerate() {
            self.pos[c] = Some(k);
        }
    }

    fn set_cost(&mut self, cost: Vec<Rational>) {
        let w = self.cols.len();
        let mut d = cost.clone();
        let mut z = Rational::zero();
        for (i, &bc) in self.basis.iter().enumerate() {
            let cb = &cost[bc];
            if cb.is_zero() {
                continue;
            }
            z += cb * &self.b[i];
            for (j, dj) in d.iter_mut().enumerate().take(w) {
                let aij = &self.a[i][j];
                if !aij.is_zero() {
                    *dj = dj.sub_mul(cb, aij);
                }
            }
        }
        self.cost = cost;
        self.d = d;
        self.z = z;
    }

    /// Sets a (sparse) objective over model variables.
    pub fn set_objective(&mut self, obj: &[(usize, Rational)], sense: Sense) {
        let mut cost = vec![Rational::zero(); self.cols.len()];
        for (v, c) in obj {
            let c = match sense {
                Sense::Min => c.clone(),
                Sense::Max => -c,
            };
            let (p, n) = self.var_cols[*v];
            if let Some(n) = n {
                cost[n] = -&c;
            }
            cost[p] = c;
        }
        self.set_cost(cost);
    }

    fn pivot(&mut self, r: usize, q: usize) {
        self.pivots += 1;
        let inv = self.a[r][q].recip();
        if !inv.is_one() {
            for x in self.a[r].iter_mut() {
                if !x.is_zero() {
                    *x = &*x * &inv;
                }
            }
            self.b[r] = &self.b[r] * &inv;
        }
        let nz: Vec<usize> = (0..self.a[r].len()).filter(|&j| !self.a[r][j].is_zero()).collect();
        let prow: Vec<Rational> = nz.iter().map(|&j| self.a[r][j].clone()).collect();
        let pb = self.b[r].clone();
        for i in 0..self.a.len() {
            if i == r || self.a[i][q].is_zero() {
                continue;
            }
            let f = self.a[i][q].clone();
            let row = &mut self.a[i];
            for (k, &j) in nz.iter().enumerate() {
                row[j] = row[j].sub_mul(&f, &prow[k]);
            }
            row[q] = Rational::zero();
            if !pb.is_zero() {
                self.b[i] = self.b[i].sub_mul(&f, &pb);
            }
        }
        if !self.d[q].is_zero() {
            let f = self.d[q].clone();
            for (k, &j) in nz.iter().enumerate() {
                self.d[j] = self.d[j].sub_mul(&f, &prow[k]);
            }
            self.d[q] = Rational::zero();
            // z tracks c_B·b
            self.z += &f * &pb;
        }
        let old = self.basis[r];
        self.pos[old] = None;
        self.basis[r] = q;
        self.pos[q] = Some(r);
    }

    fn entering(&self, bland: bool) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (j, dj) in self.d.iter().enumerate() {
            if !dj.is_negative() || self.pos[j].is_some() {
                continue;
            }
            if bland {
                return Some(j);
            }
            match best {
                Some(b) if self.d[b] <= *dj => {}
                _ => best = Some(j),
            }
        }
        best
    }

    fn leaving(&self, q: usize) -> Option<usize> {
        let mut best: Option<(usize, Rational)> = None;
        for i in 0..self.a.len() {
            let aiq = &self.a[i][q];
            if !aiq.is_positive() {
                continue;
            }
            let ratio = &self.b[i] / aiq;
            let better = match &best {
                None => true,
                Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
            };
            if better {
                best = Some((i, ratio));
            }
        }
        best.map(|x| x.0)
    }

    fn primal(&mut self) -> Result<Status> {
        let mut streak = 0;
        let start = self.pivots;
        loop {
            let bland = streak >= DEGENERATE_STREAK;
            let Some(q) = self.entering(bland) else {
                return Ok(Status::Optimal);
            };
            let Some(r) = self.leaving(q) else {
                return Ok(Status::Unbounded);
            };
            if self.b[r].is_zero() {
                streak += 1;
            } else {
                streak = 0;
            }
            self.pivot(r, q);
            if self.pivots - start > PIVOT_LIMIT {
                return Err(Error::Budget("simplex pivot limit reached".into()));
            }
        }
    }

    /// Optimizes an objective from the current basis.
    pub fn optimize(&mut self, obj: &[(usize, Rational)], sense: Sense) -> Result<OptResult> {
        if !self.feasible {
            return Ok(OptResult::empty(Status::Infeasible, self.nvars));
        }
        let start = self.pivots;
        self.set_objective(obj, sense);
        let st = self.primal()?;
        if st == Status::Unbounded {
            let mut r = OptResult::empty(Status::Unbounded, self.nvars);
            r.pivots = self.pivots - start;
            return Ok(r);
        }
        let mut res = self.result(sense);
        res.pivots = self.pivots - start;
        Ok(res)
    }

    /// Re-optimizes the current objective (after cuts were repaired).
    fn result(&self, sense: Sense) -> OptResult {
        let point = self.point();
        let value = match sense {
            Sense::Min => self.z.clone(),
            Sense::Max => -&self.z,
        };
        OptResult {
            status: Status::Optimal,
            value,
            point,
            basis: self.active(),
            unique: self.unique_flag(),
            pivots: 0,
            cuts: Vec::new(),
        }
    }

    pub fn point(&self) -> Point {
        let mut p = vec![Rational::zero(); self.nvars];
        for (i, &c) in self.basis.iter().enumerate() {
            if let Col::Struct { var, neg } = self.cols[c] {
                if neg {
                    p[var] -= &self.b[i];
                } else {
                    p[var] += &self.b[i];
                }
            }
        }
        p
    }

    fn active(&self) -> Vec<Active> {
        let mut out = Vec::new();
        for (r, s) in self.row_slack.iter().enumerate() {
            match s {
                None => out.push(Active::Row(r)),
                Some(c) if self.pos[*c].is_none() => out.push(Active::Row(r)),
                _ => {}
            }
        }
        for (v, &(p, n)) in self.var_cols.iter().enumerate() {
            if n.is_none() && self.pos[p].is_none() {
                out.push(Active::Bound(v));
            }
        }
        out.sort();
        out
    }

    fn unique_flag(&self) -> bool {
        for (j, dj) in self.d.iter().enumerate() {
            if self.pos[j].is_some() || !dj.is_zero() {
                continue;
            }
            // the mirror half of a basic free variable always prices at zero
            if let Col::Struct { var, .. } = self.cols[j] {
                let (p, n) = self.var_cols[var];
                if let Some(n) = n {
                    let twin = if j == p { n } else { p };
                    if self.pos[twin].is_some() {
                        continue;
                    }
                }
            }
            return false;
        }
        true
    }

    /// Appends a row (satisfied or not) and restores primal feasibility with
    /// the dual simplex; the current objective must be dual feasible.
    pub fn add_row(&mut self, row: &Row) -> Result<Status> {
        let w = self.cols.len();
        let model_row = self.rows.len();
        self.rows.push(row.clone());
        // new slack column (or a pair of bounds for equalities)
        let mut rels = Vec::new();
        match row.rel {
            Rel::Le => rels.push(false),
            Rel::Ge => rels.push(true),
            Rel::Eq => {
                rels.push(false);
                rels.push(true);
            }
        }
        let mut status = Status::Optimal;
        for (k, ge) in rels.into_iter().enumerate() {
            let s = self.cols.len();
            self.cols.push(Col::Slack);
            if k == 0 {
                self.row_slack.push(Some(s));
                self.row_sign.push(ge);
            }
            for r in self.a.iter_mut() {
                r.push(Rational::zero());
            }
            self.pos.push(None);
            self.cost.push(Rational::zero());
            self.d.push(Rational::zero());
            // row in "<=" orientation: sign * (a·x) + s = sign * rhs
            let sign = if ge { -Rational::one() } else { Rational::one() };
            let mut dense = vec![Rational::zero(); w + k + 1];
            for (v, c) in &row.coeffs {
                let (p, n) = self.var_cols[*v];
                dense[p] = &sign * c;
                if let Some(n) = n {
                    dense[n] = -(&sign * c);
                }
            }
            let mut rhs = &sign * &row.rhs;
            dense[s] = Rational::one();
            // eliminate basic columns
            for (i, &bc) in self.basis.iter().enumerate() {
                if bc < dense.len() && !dense[bc].is_zero() {
                    let f = dense[bc].clone();
                    for (j, aij) in self.a[i].iter().enumerate() {
                        if !aij.is_zero() && j < dense.len() {
                            dense[j] = dense[j].sub_mul(&f, aij);
                        }
                    }
                    rhs = rhs.sub_mul(&f, &self.b[i]);
                }
            }
            dense.resize(self.cols.len(), Rational::zero());
            let idx = self.a.len();
            self.a.push(dense);
            self.b.push(rhs);
            self.basis.push(s);
            self.pos[s] = Some(idx);
            self.row_origin.push(model_row);
            status = self.dual()?;
            if status == Status::Infeasible {
                self.feasible = false;
                return Ok(status);
            }
        }
        self.nrows_model = self.rows.len();
        Ok(status)
    }

    fn dual(&mut self) -> Result<Status> {
        let start = self.pivots;
        loop {
            // leaving: most negative rhs, ties to the lowest row
            let mut r: Option<usize> = None;
            for i in 0..self.b.len() {
                if self.b[i].is_negative() && r.is_none_or(|k| self.b[i] < self.b[k]) {
                    r = Some(i);
                }
            }
            let Some(r) = r else {
                return Ok(Status::Optimal);
            };
            let mut q: Option<(usize, Rational)> = None;
            for j in 0..self.cols.len() {
                let arj = &self.a[r][j];
                if !arj.is_negative() || self.pos[j].is_some() {
                    continue;
                }
                let ratio = &self.d[j] / &(-arj);
                if q.as_ref().is_none_or(|(_, br)| ratio < *br) {
                    q = Some((j, ratio));
                }
            }
            let Some((q, _)) = q else {
                return Ok(Status::Infeasible);
            };
            self.pivot(r, q);
            if self.pivots - start > PIVOT_LIMIT {
                return Err(Error::Budget("dual simplex pivot limit reached".into()));
            }
        }
    }

    /// Current result after rows were added.
    pub fn current(&mut self, sense: Sense) -> Result<OptResult> {
        if !self.feasible {
            return Ok(OptResult::empty(Status::Infeasible, self.nvars));
        }
        // primal cleanup in case of zero reduced-cost drift
        let st = self.primal()?;
        if st == Status::Unbounded {
            return Ok(OptResult::empty(Status::Unbounded, self.nvars));
        }
        Ok(self.result(sense))
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }
}

/// Solves the explicit rows of a model (implicit families are ignored; use
/// [`solve_with_separation`] for those).
pub fn solve(model: &LpModel, obj: &[(usize, Rational)], sense: Sense) -> Result<OptResult> {
    for (v, _) in obj {
        if *v >= model.num_vars() {
            return Err(Error::Invalid(format!("objective references unknown variable {v}")));
        }
    }
    let mut s = Simplex::new(model)?;
    let mut r = s.optimize(obj, sense)?;
    r.pivots = s.pivots;
    Ok(r)
}

/// Solves with the model's own objective.
pub fn solve_model(model: &LpModel) -> Result<OptResult> {
    let (sense, obj) = model.objective.clone().ok_or_else(|| Error::Invalid("model has no objective".into()))?;
    if model.families.is_empty() {
        solve(model, &obj, sense)
    } else {
        solve_with_separation(model, &obj, sense)
    }
}

/// Seed rows for implicit families: for the Z-eliminated family one row per
/// pair (every interior node on the first endpoint's side).
fn seed_rows(model: &LpModel) -> Vec<Row> {
    let mut rows = Vec::new();
    if model.families.contains(&Family::ZEliminatedAncestry) {
        let u = model.topology().expect("topology attached");
        for i in 0..u.n() {
            for j in i + 1..u.n() {
                let choice = vec![i; u.interior(i, j).len()];
                rows.push(model.z_elim_row(u, i, j, &choice));
            }
        }
    }
    rows
}

/// Cutting-plane loop: solve the explicit relaxation, add the most violated
/// row of every implicit family, repeat until none is violated.
pub fn solve_with_separation(model: &LpModel, obj: &[(usize, Rational)], sense: Sense) -> Result<OptResult> {
    if model.families.is_empty() {
        return solve(model, obj, sense);
    }
    let mut rows = seed_rows(model);
    rows.extend(model.rows.iter().cloned());
    let mut s = Simplex::from_rows(model, &rows)?;
    let mut res = s.optimize(obj, sense)?;
    let mut cuts = Vec::new();
    loop {
        if res.status != Status::Optimal {
            break;
        }
        let mut added = false;
        for fam in &model.families {
            if fam == &Family::ZEliminatedAncestry {
                // every violated pair's tightest row
                let u = model.topology().expect("topology attached");
                let mut violated = Vec::new();
                for i in 0..u.n() {
                    for j in i + 1..u.n() {
                        let r = model.z_elim_tightest(u, i, j, &res.point);
                        if !r.satisfied(&res.point) {
                            violated.push(r);
                        }
                    }
                }
                for r in violated {
                    s.add_row(&r)?;
                    cuts.push(r);
                    added = true;
                }
            } else if let Some(r) = model.separate(*fam, &res.point) {
                s.add_row(&r)?;
                cuts.push(r);
                added = true;
            }
        }
        if !added {
            break;
        }
        res = s.current(sense)?;
    }
    res.pivots = s.pivots;
    res.cuts = cuts;
    Ok(res)
}

/// Minimizes `obj`, then lexicographically minimizes `coords` over the
/// optimal face, fixing each in turn. Every stage is a face of the
/// polyhedron, so the final basic solution is a vertex of it and its
/// `coords` projection is a vertex of the projected polyhedron.
pub fn lexmin_face(model: &LpModel, obj: &[(usize, Rational)], coords: &[usize]) -> Result<OptResult> {
    let mut s = Simplex::new(model)?;
    let first = s.optimize(obj, Sense::Min)?;
    if first.status != Status::Optimal {
        return Ok(first);
    }
    s.add_row(&Row::new(obj.to_vec(), Rel::Eq, first.value.clone(), "level"))?;
    for &c in coords {
        let r = s.optimize(&[(c, Rational::one())], Sense::Min)?;
        if r.status != Status::Optimal {
            return Err(Error::Verification("face minimization failed".into()));
        }
        s.add_row(&Row::new(vec![(c, Rational::one())], Rel::Eq, r.value, "fix"))?;
    }
    let mut r = s.current(Sense::Min)?;
    r.value = first.value;
    r.pivots = s.pivots;
    Ok(r)
}

/// Tight constraint normals at a feasible point, each oriented as `a·x ≥ b`
/// (equalities flagged). Includes tight rows of implicit families.
pub fn tight_normals(model: &LpModel, p: &[Rational]) -> Result<Vec<(Vec<Rational>, bool)>> {
    let nv = model.num_vars();
    let mut out = Vec::new();
    for (v, &nn) in model.nonneg.iter().enumerate() {
        if nn && p[v].is_zero() {
            let mut e = vec![Rational::zero(); nv];
            e[v] = Rational::one();
            out.push((e, false));
        }
    }
    let mut push_row = |r: &Row| {
        if r.is_tight(p) {
            let mut dense = vec![Rational::zero(); nv];
            for (v, c) in &r.coeffs {
                dense[*v] = if r.rel == Rel::Le { -c } else { c.clone() };
            }
            out.push((dense, r.rel == Rel::Eq));
        }
    };
    for r in &model.rows {
        push_row(r);
    }
    for r in family_tight_rows(model, p)? {
        push_row(&r);
    }
    Ok(out)
}

/// All implicit-family rows tight at `p`.
pub fn family_tight_rows(model: &LpModel, p: &[Rational]) -> Result<Vec<Row>> {
    let mut out = Vec::new();
    for fam in &model.families {
        let u = model.topology().expect("topology attached");
        match fam {
            Family::ZEliminatedAncestry => {
                for i in 0..u.n() {
                    for j in i + 1..u.n() {
                        let inner = u.interior(i, j);
                        let d = inner.len();
                        if d > crate::lpmodel::Z_ELIM_CAP {
                            return Err(Error::TooLarge("pair path too long for explicit rows".into()));
                        }
                        // only choices achieving the minimum can be tight
                        let t = model.z_elim_tightest(u, i, j, p);
                        if !t.is_tight(p) {
                            continue;
                        }
                        let mut options: Vec<Vec<usize>> = Vec::new();
                        for &k in inner {
                            let a = &p[model.idx(Var::X(k, i))];
                            let b = &p[model.idx(Var::X(k, j))];
                            options.push(match a.cmp(b) {
                                std::cmp::Ordering::Less => vec![i],
                                std::cmp::Ordering::Greater => vec![j],
                                std::cmp::Ordering::Equal => vec![i, j],
                            });
                        }
                        let mut choice = Vec::with_capacity(d);
                        fn rec(
                            t: usize,
                            options: &[Vec<usize>],
                            choice: &mut Vec<usize>,
                            emit: &mut dyn FnMut(&[usize]),
                        ) {
                            if t == options.len() {
                                emit(choice);
                                return;
                            }
                            for &g in &options[t] {
                                choice.push(g);
                                rec(t + 1, options, choice, emit);
                                choice.pop();
                            }
                        }
                        rec(0, &options, &mut choice, &mut |c| out.push(model.z_elim_row(u, i, j, c)));
                    }
                }
            }
            Family::FixedPointFree => {
                let n = u.n();
                let x = model.x_part(p);
                let mut perm = vec![usize::MAX; n];
                let mut used = vec![false; n];
                fn rec(
                    i: usize,
                    n: usize,
                    x: &[Vec<Rational>],
                    acc: Rational,
                    perm: &mut Vec<usize>,
                    used: &mut Vec<bool>,
                    emit: &mut dyn FnMut(&[usize]),
                ) {
                    if acc > Rational::one() {
                        return;
                    }
                    if i == n {
                        if acc.is_one() {
                            emit(perm);
                        }
                        return;
                    }
                    for j in 0..n {
                        if j == i || used[j] {
                            continue;
                        }
                        used[j] = true;
                        perm[i] = j;
                        rec(i + 1, n, x, &acc + &x[i][j], perm, used, emit);
                        used[j] = false;
                    }
                }
                rec(0, n, &x, Rational::zero(), &mut perm, &mut used, &mut |pm| {
                    let coeffs =
                        pm.iter().enumerate().map(|(i, &j)| (model.idx(Var::X(i, j)), Rational::one())).collect();
                    out.push(Row::new(coeffs, Rel::Ge, Rational::one(), "perm"));
                });
            }
        }
    }
    Ok(out)
}

/// Rank of a set of rational rows, modular first, exact on doubt.
pub fn rank_fast(rows: &[Vec<Rational>], cols: usize) -> usize {
    let mut e = ModEchelon::new(cols);
    let mut ints = Vec::with_capacity(rows.len());
    for r in rows {
        let ir = integer_row(r);
        let m: Vec<u64> = ir.iter().map(bigint_to_mod).collect();
        e.push(&m);
        ints.push(r.clone());
        if e.rank() == cols {
            return cols;
        }
    }
    rank(&ints)
}

/// True iff the point is feasible and its tight constraints have full rank.
pub fn is_vertex(model: &LpModel, p: &[Rational]) -> Result<bool> {
    let bad = model.check_feasible(p)?;
    if !bad.is_empty() {
        return Err(Error::Invalid(format!("point is infeasible: {}", bad.join(", "))));
    }
    let tight = tight_normals(model, p)?;
    let rows: Vec<Vec<Rational>> = tight.into_iter().map(|t| t.0).collect();
    Ok(rank_fast(&rows, model.num_vars()) == model.num_vars())
}

/// Some feasible point agreeing with `p` outside `free`, if one exists.
/// Used for auxiliary variables whose values the caller does not know.
pub fn complete_point(model: &LpModel, p: &[Rational], free: &[usize]) -> Result<Option<Point>> {
    model.check_dims(p)?;
    let mut m = model.clone();
    for i in (0..m.num_vars()).filter(|i| !free.contains(i)) {
        m.add_row(Row::new(vec![(i, Rational::one())], Rel::Eq, p[i].clone(), format!("fix{i}")));
    }
    let r =
        if m.families.is_empty() { solve(&m, &[], Sense::Min)? } else { solve_with_separation(&m, &[], Sense::Min)? };
    Ok((r.status == Status::Optimal).then_some(r.point))
}

/// True iff `p` is the only optimum of `obj` (minimization).
///
/// The point must be a vertex, and no nonzero feasible direction at `p` may
/// keep the objective level: the cone `{d : A_T d ≥ 0, c·d = 0}` over the
/// tight constraints must be trivial. Because the tight constraints have full
/// rank, any nonzero `d` in the cone has `Σ A_T d > 0`, so one bounded LP
/// decides it.
pub fn certify_unique_optimum(model: &LpModel, obj: &[(usize, Rational)], p: &[Rational]) -> Result<bool> {
    let value = model.objective_value(obj, p);
    let best = if model.families.is_empty() {
        solve(model, obj, Sense::Min)?
    } else {
        solve_with_separation(model, obj, Sense::Min)?
    };
    if best.status != Status::Optimal {
        return Err(Error::Invalid("objective has no optimum".into()));
    }
    if best.value != value || !model.is_feasible(p) {
        return Err(Error::Invalid("point is not optimal".into()));
    }
    if !is_vertex(model, p)? {
        return Ok(false);
    }
    let nv = model.num_vars();
    let tight = tight_normals(model, p)?;
    let mut cone = LpModel::new();
    for i in 0..nv {
        cone.add_var(Var::Aux(i), false);
    }
    let mut sum = vec![Rational::zero(); nv];
    for (k, (a, eq)) in tight.iter().enumerate() {
        let coeffs: Vec<(usize, Rational)> =
            a.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(i, c)| (i, c.clone())).collect();
        cone.add_row(Row::new(coeffs, if *eq { Rel::Eq } else { Rel::Ge }, Rational::zero(), format!("t{k}")));
        if !eq {
            for (s, c) in sum.iter_mut().zip(a) {
                *s += c;
            }
        }
    }
    let level: Vec<(usize, Rational)> = obj.to_vec();
    cone.add_row(Row::new(level, Rel::Eq, Rational::zero(), "level"));
    let sum_coeffs: Vec<(usize, Rational)> =
        sum.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(i, c)| (i, c.clone())).collect();
    cone.add_row(Row::new(sum_coeffs.clone(), Rel::Le, Rational::one(), "cap"));
    let r = solve(&cone, &sum_coeffs, Sense::Max)?;
    Ok(r.status == Status::Optimal && r.value.is_zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lpmodel::{build_primal, build_z_eliminated, build_z_eliminated_explicit};
    use crate::rational::{q, qi};
    use crate::topology::Topology;

    #[test]
    fn completion_fixes_the_rest() {
        let mut m = LpModel::new();
        let a = m.add_var(Var::Aux(0), true);
        let b = m.add_var(Var::Aux(1), true);
        m.add_row(Row::new(vec![(a, Rational::one()), (b, Rational::one())], Rel::Eq, qi(3), "s"));
        let p = complete_point(&m, &[qi(1), qi(0)], &[b]).unwrap().unwrap();
        assert_eq!(p, vec![qi(1), qi(2)]);
        assert!(complete_point(&m, &[qi(4), qi(0)], &[b]).unwrap().is_none());
    }

    fn w(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| qi(x)).collect()
    }

    #[test]
    fn tiny_lp() {
        // max x + y s.t. x + 2y <= 4, 3x + y <= 6
        let mut m = LpModel::new();
        let x = m.add_var(Var::Aux(0), true);
        let y = m.add_var(Var::Aux(1), true);
        m.add_row(Row::new(vec![(x, qi(1)), (y, qi(2))], Rel::Le, qi(4), "a"));
        m.add_row(Row::new(vec![(x, qi(3)), (y, qi(1))], Rel::Le, qi(6), "b"));
        let r = solve(&m, &[(x, qi(1)), (y, qi(1))], Sense::Max).unwrap();
        assert_eq!(r.value, q(14, 5));
        assert_eq!(r.point, vec![q(8, 5), q(6, 5)]);
        assert!(r.unique);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut m = LpModel::new();
        let x = m.add_var(Var::Aux(0), true);
        m.add_row(Row::new(vec![(x, qi(1))], Rel::Le, qi(-1), "neg"));
        assert_eq!(solve(&m, &[(x, qi(1))], Sense::Min).unwrap().status, Status::Infeasible);
        let mut m = LpModel::new();
        let x = m.add_var(Var::Aux(0), false);
        m.add_row(Row::new(vec![(x, qi(1))], Rel::Le, qi(3), "cap"));
        assert_eq!(solve(&m, &[(x, qi(1))], Sense::Min).unwrap().status, Status::Unbounded);
        assert_eq!(solve(&m, &[(x, qi(1))], Sense::Max).unwrap().value, qi(3));
    }

    #[test]
    fn path3_example() {
        let u = Topology::path(3);
        let m = build_primal(&u);
        let r = solve(&m, &m.d_objective(&w(&[3, 1, 2])), Sense::Min).unwrap();
        assert_eq!(r.value, qi(4));
        assert_eq!(m.d_part(&r.point), w(&[0, 2, 1]));
        for a in &r.basis {
            match a {
                Active::Row(i) => assert!(m.rows[*i].is_tight(&r.point)),
                Active::Bound(v) => assert!(r.point[*v].is_zero()),
            }
        }
    }

    #[test]
    fn path2_zero_weight() {
        let u = Topology::path(2);
        let m = build_primal(&u);
        let r = solve(&m, &m.d_objective(&w(&[1, 0])), Sense::Min).unwrap();
        assert_eq!(r.value, qi(0));
        assert_eq!(m.d_part(&r.point), w(&[0, 1]));
    }

    #[test]
    fn separation_matches_explicit() {
        let u = Topology::path(4);
        let imp = build_z_eliminated(&u);
        let exp = build_z_eliminated_explicit(&u).unwrap();
        for f in [[1, 2, 3, 4], [5, 1, 1, 5], [0, 3, 0, 1], [2, 7, 1, 8]] {
            let obj = imp.d_objective(&w(&f));
            let a = solve_with_separation(&imp, &obj, Sense::Min).unwrap();
            let b = solve(&exp, &obj, Sense::Min).unwrap();
            assert_eq!(a.value, b.value);
            assert!(imp.is_feasible(&a.point));
        }
    }

    #[test]
    fn uniqueness_certificates() {
        let u = Topology::path(3);
        let m = build_primal(&u);
        let obj = m.d_objective(&w(&[3, 1, 2]));
        let r = solve(&m, &obj, Sense::Min).unwrap();
        assert!(certify_unique_optimum(&m, &obj, &r.point).unwrap());
        let u2 = Topology::path(2);
        let m2 = build_primal(&u2);
        let obj2 = m2.d_objective(&w(&[1, 1]));
        for t in crate::stt::enumerate_stts(&u2) {
            let p = m2.stt_point(&u2, &t);
            assert!(!certify_unique_optimum(&m2, &obj2, &p).unwrap());
        }
    }

    #[test]
    fn vertex_test_midpoint() {
        let u = Topology::path(3);
        let m = build_primal(&u);
        let ts = crate::stt::enumerate_stts(&u);
        let a = m.stt_point(&u, &ts[0]);
        let b = m.stt_point(&u, &ts[4]);
        assert!(is_vertex(&m, &a).unwrap());
        let mid: Vec<Rational> = a.iter().zip(&b).map(|(x, y)| (x + y) * q(1, 2)).collect();
        assert!(!is_vertex(&m, &mid).unwrap());
    }

    #[test]
    fn warm_start_matches_cold() {
        let u = crate::topology::catalog("U_5_1").unwrap();
        let m = build_primal(&u);
        let mut s = Simplex::new(&m).unwrap();
        for f in [[1, 2, 3, 4, 5], [5, 0, 1, 0, 2], [1, 1, 1, 1, 1], [9, 1, 0, 3, 2]] {
            let obj = m.d_objective(&w(&f));
            let warm = s.optimize(&obj, Sense::Min).unwrap();
            let cold = solve(&m, &obj, Sense::Min).unwrap();
            assert_eq!(warm.value, cold.value);
            assert!(m.is_feasible(&warm.point));
        }
    }
}
