//! LP formulations over a shared variable scheme.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::assignment::min_assignment;
use crate::error::{Error, Result};
use crate::rational::{qi, Rational};
use crate::stt::{InducedPoint, SearchTree};
use crate::topology::Topology;

/// Dense point aligned with a model's variable order.
pub type Point = Vec<Rational>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    X(usize, usize),
    /// `Z(k, i, j)` with `i < j` and `k` interior to the i..j path.
    Z(usize, usize, usize),
    D(usize),
    /// Dual pair variable, `i < j`.
    R(usize, usize),
    /// Dual triple `Q(i, k, j)`, `k` interior to the i..j path.
    Q(usize, usize, usize),
    RowMin(usize),
    ColMax(usize),
    Scalar,
    Freq(usize),
    /// Generic auxiliary variable.
    Aux(usize),
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Var::X(i, j) => write!(f, "X{}_{}", i + 1, j + 1),
            Var::Z(k, i, j) => write!(f, "Z{}_{}_{}", k + 1, i + 1, j + 1),
            Var::D(i) => write!(f, "D{}", i + 1),
            Var::R(i, j) => write!(f, "R{}_{}", i + 1, j + 1),
            Var::Q(i, k, j) => write!(f, "Q{}_{}_{}", i + 1, k + 1, j + 1),
            Var::RowMin(i) => write!(f, "m{}", i + 1),
            Var::ColMax(i) => write!(f, "M{}", i + 1),
            Var::Scalar => write!(f, "x"),
            Var::Freq(i) => write!(f, "f{}", i + 1),
            Var::Aux(i) => write!(f, "y{}", i + 1),
        }
    }
}

impl std::str::FromStr for Var {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("bad variable name {s:?}"));
        let ids = |rest: &str, k: usize| -> Result<Vec<usize>> {
            let v: Vec<usize> =
                rest.split('_').map(|p| p.parse::<usize>().map_err(|_| bad())).collect::<Result<_>>()?;
            if v.len() != k || v.contains(&0) {
                return Err(bad());
            }
            Ok(v.into_iter().map(|x| x - 1).collect())
        };
        if s == "x" {
            return Ok(Var::Scalar);
        }
        let (head, rest) = s.split_at(1);
        Ok(match head {
            "X" => {
                let v = ids(rest, 2)?;
                Var::X(v[0], v[1])
            }
            "Z" => {
                let v = ids(rest, 3)?;
                Var::Z(v[0], v[1].min(v[2]), v[1].max(v[2]))
            }
            "D" => Var::D(ids(rest, 1)?[0]),
            "R" => {
                let v = ids(rest, 2)?;
                Var::R(v[0].min(v[1]), v[0].max(v[1]))
            }
            "Q" => {
                let v = ids(rest, 3)?;
                Var::Q(v[0], v[1], v[2])
            }
            "m" => Var::RowMin(ids(rest, 1)?[0]),
            "M" => Var::ColMax(ids(rest, 1)?[0]),
            "f" => Var::Freq(ids(rest, 1)?[0]),
            "y" => Var::Aux(ids(rest, 1)?[0]),
            _ => return Err(bad()),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Rel {
    Le,
    Ge,
    Eq,
}

impl fmt::Display for Rel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rel::Le => "<=",
            Rel::Ge => ">=",
            Rel::Eq => "=",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Min,
    Max,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Row {
    /// Sorted by variable index, no zero coefficients.
    pub coeffs: Vec<(usize, Rational)>,
    pub rel: Rel,
    pub rhs: Rational,
    pub label: String,
}

impl Row {
    pub fn new(mut coeffs: Vec<(usize, Rational)>, rel: Rel, rhs: Rational, label: impl Into<String>) -> Self {
        coeffs.sort_by_key(|c| c.0);
        let mut merged: Vec<(usize, Rational)> = Vec::with_capacity(coeffs.len());
        for (v, c) in coeffs {
            match merged.last_mut() {
                Some(last) if last.0 == v => last.1 += c,
                _ => merged.push((v, c)),
            }
        }
        merged.retain(|c| !c.1.is_zero());
        Row { coeffs: merged, rel, rhs, label: label.into() }
    }

    pub fn lhs(&self, p: &[Rational]) -> Rational {
        let mut s = Rational::zero();
        for (v, c) in &self.coeffs {
            if !p[*v].is_zero() {
                s += c * &p[*v];
            }
        }
        s
    }

    /// Signed violation (positive when violated).
    pub fn violation(&self, p: &[Rational]) -> Rational {
        let l = self.lhs(p);
        match self.rel {
            Rel::Ge => &self.rhs - &l,
            Rel::Le => &l - &self.rhs,
            Rel::Eq => (&l - &self.rhs).abs(),
        }
    }

    pub fn satisfied(&self, p: &[Rational]) -> bool {
        !self.violation(p).is_positive()
    }

    pub fn is_tight(&self, p: &[Rational]) -> bool {
        self.lhs(p) == self.rhs
    }
}

/// Constraint families kept implicit and served by separation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    /// Ancestry rows with each LCA variable replaced by one of its two
    /// ancestry bounds, `2^d` rows per pair.
    ZEliminatedAncestry,
    /// `Σ_i X_{i,π(i)} ≥ 1` for every fixed-point-free permutation.
    FixedPointFree,
}

/// Refined constraint families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Refinement {
    PathMonotonicity,
    Transitivity,
    LcaSeparation,
    RefinedZ,
    RowMinColMax,
}

impl Refinement {
    pub const ALL: [Refinement; 5] = [
        Refinement::PathMonotonicity,
        Refinement::Transitivity,
        Refinement::LcaSeparation,
        Refinement::RefinedZ,
        Refinement::RowMinColMax,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Refinement::PathMonotonicity => "path-monotonicity",
            Refinement::Transitivity => "transitivity",
            Refinement::LcaSeparation => "lca-separation",
            Refinement::RefinedZ => "refined-z",
            Refinement::RowMinColMax => "rowmin-colmax",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Refinement::ALL
            .into_iter()
            .find(|r| r.name() == s.trim())
            .ok_or_else(|| Error::Parse(format!("unknown family {s:?}")))
    }
}

#[derive(Clone, Debug)]
pub struct LpModel {
    vars: Vec<Var>,
    index: HashMap<Var, usize>,
    pub rows: Vec<Row>,
    /// Per variable: constrained to be nonnegative.
    pub nonneg: Vec<bool>,
    pub objective: Option<(Sense, Vec<(usize, Rational)>)>,
    pub families: Vec<Family>,
    topology: Option<Topology>,
}

impl LpModel {
    pub fn new() -> Self {
        LpModel {
            vars: Vec::new(),
            index: HashMap::new(),
            rows: Vec::new(),
            nonneg: Vec::new(),
            objective: None,
            families: Vec::new(),
            topology: None,
        }
    }

    pub fn add_var(&mut self, v: Var, nonneg: bool) -> usize {
        if let Some(&i) = self.index.get(&v) {
            return i;
        }
        let i = self.vars.len();
        self.vars.push(v);
        self.index.insert(v, i);
        self.nonneg.push(nonneg);
        i
    }

    pub fn add_row(&mut self, row: Row) {
        self.rows.push(row);
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn var_index(&self, v: Var) -> Option<usize> {
        self.index.get(&v).copied()
    }

    pub fn idx(&self, v: Var) -> usize {
        self.index[&v]
    }

    pub fn topology(&self) -> Option<&Topology> {
        self.topology.as_ref()
    }

    /// Explicit rows plus one bound per nonnegative variable.
    pub fn constraint_count(&self) -> usize {
        self.rows.len() + self.nonneg.iter().filter(|&&b| b).count()
    }

    pub fn x(&self, i: usize, j: usize) -> Option<usize> {
        self.var_index(Var::X(i, j))
    }

    pub fn z(&self, k: usize, i: usize, j: usize) -> Option<usize> {
        self.var_index(Var::Z(k, i.min(j), i.max(j)))
    }

    pub fn d(&self, i: usize) -> Option<usize> {
        self.var_index(Var::D(i))
    }

    /// Objective over the `D` variables.
    pub fn d_objective(&self, w: &[Rational]) -> Vec<(usize, Rational)> {
        w.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(i, c)| (self.idx(Var::D(i)), c.clone())).collect()
    }

    /// Objective over the frequency variables of a dual-style model.
    pub fn set_objective(&mut self, sense: Sense, coeffs: Vec<(usize, Rational)>) {
        self.objective = Some((sense, coeffs));
    }

    pub fn check_dims(&self, p: &[Rational]) -> Result<()> {
        if p.len() != self.num_vars() {
            return Err(Error::Dimension { expected: self.num_vars(), got: p.len() });
        }
        Ok(())
    }

    /// Exact check of bounds, rows and implicit families; returns the labels
    /// of all violated constraints.
    pub fn check_feasible(&self, p: &[Rational]) -> Result<Vec<String>> {
        self.check_dims(p)?;
        let mut bad = Vec::new();
        for (i, v) in self.vars.iter().enumerate() {
            if self.nonneg[i] && p[i].is_negative() {
                bad.push(format!("nn:{v}"));
            }
        }
        for r in &self.rows {
            if !r.satisfied(p) {
                bad.push(r.label.clone());
            }
        }
        for fam in &self.families {
            match fam {
                Family::ZEliminatedAncestry => {
                    for r in self.z_elim_violations(p) {
                        bad.push(r.label);
                    }
                }
                Family::FixedPointFree => {
                    if let Some(r) = self.separate(*fam, p) {
                        bad.push(r.label);
                    }
                }
            }
        }
        Ok(bad)
    }

    pub fn is_feasible(&self, p: &[Rational]) -> bool {
        self.check_feasible(p).map(|v| v.is_empty()).unwrap_or(false)
    }

    pub fn objective_value(&self, obj: &[(usize, Rational)], p: &[Rational]) -> Rational {
        obj.iter().map(|(v, c)| c * &p[*v]).sum()
    }

    /// Most violated row of an implicit family at `p`, if any.
    pub fn separate(&self, fam: Family, p: &[Rational]) -> Option<Row> {
        match fam {
            Family::ZEliminatedAncestry => self
                .z_elim_violations(p)
                .into_iter()
                .enumerate()
                .max_by(|(ia, a), (ib, b)| a.violation(p).cmp(&b.violation(p)).then(ib.cmp(ia)))
                .map(|(_, r)| r),
            Family::FixedPointFree => self.fixed_point_free_cut(p),
        }
    }

    /// The tightest Z-eliminated row of every pair, when violated.
    fn z_elim_violations(&self, p: &[Rational]) -> Vec<Row> {
        let u = self.topology.as_ref().expect("topology attached");
        let mut out = Vec::new();
        for i in 0..u.n() {
            for j in i + 1..u.n() {
                let r = self.z_elim_tightest(u, i, j, p);
                if !r.satisfied(p) {
                    out.push(r);
                }
            }
        }
        out
    }

    /// Row for pair (i,j) choosing the smaller of X_ki, X_kj per interior k;
    /// ties pick the i side.
    pub fn z_elim_tightest(&self, u: &Topology, i: usize, j: usize, p: &[Rational]) -> Row {
        let mut choice = Vec::new();
        for &k in u.interior(i, j) {
            let a = &p[self.idx(Var::X(k, i))];
            let b = &p[self.idx(Var::X(k, j))];
            choice.push(if b < a { j } else { i });
        }
        self.z_elim_row(u, i, j, &choice)
    }

    /// The Z-eliminated row of pair (i,j) for one side choice per interior
    /// node (in path order).
    pub fn z_elim_row(&self, u: &Topology, i: usize, j: usize, choice: &[usize]) -> Row {
        let mut coeffs = vec![(self.idx(Var::X(i, j)), Rational::one()), (self.idx(Var::X(j, i)), Rational::one())];
        let mut tag = String::new();
        for (&k, &g) in u.interior(i, j).iter().zip(choice) {
            coeffs.push((self.idx(Var::X(k, g)), Rational::one()));
            tag.push(if g == i { 'a' } else { 'b' });
        }
        let label = if tag.is_empty() {
            format!("anc({},{})", i + 1, j + 1)
        } else {
            format!("anc({},{})[{}]", i + 1, j + 1, tag)
        };
        Row::new(coeffs, Rel::Ge, Rational::one(), label)
    }

    fn fixed_point_free_cut(&self, p: &[Rational]) -> Option<Row> {
        let n = self.topology.as_ref().expect("topology attached").n();
        if n < 2 {
            return None;
        }
        let cost: Vec<Vec<Rational>> = (0..n)
            .map(|i| {
                (0..n).map(|j| if i == j { Rational::zero() } else { p[self.idx(Var::X(i, j))].clone() }).collect()
            })
            .collect();
        let (c, perm) = min_assignment(&cost, |i, j| i == j)?;
        if c >= Rational::one() {
            return None;
        }
        let coeffs = perm.iter().enumerate().map(|(i, &j)| (self.idx(Var::X(i, j)), Rational::one())).collect();
        let label = format!("perm[{}]", perm.iter().map(|j| (j + 1).to_string()).collect::<Vec<_>>().join(","));
        Some(Row::new(coeffs, Rel::Ge, Rational::one(), label))
    }

    /// Replaces implicit Z-eliminated rows by explicit ones (pairs with at
    /// most `cap` interior nodes).
    pub fn expand_z_eliminated(&self, cap: usize) -> Result<LpModel> {
        let u = self.topology.as_ref().ok_or_else(|| Error::Invalid("no topology".into()))?;
        let mut m = self.clone();
        m.families.retain(|f| *f != Family::ZEliminatedAncestry);
        let mut rows = Vec::new();
        for i in 0..u.n() {
            for j in i + 1..u.n() {
                let inner = u.interior(i, j);
                let d = inner.len();
                if d > cap {
                    return Err(Error::TooLarge(format!(
                        "pair ({},{}) has {d} interior nodes, cap {cap}",
                        i + 1,
                        j + 1
                    )));
                }
                for mask in 0..(1usize << d) {
                    let choice: Vec<usize> = (0..d).map(|t| if mask >> (d - 1 - t) & 1 == 0 { i } else { j }).collect();
                    rows.push(self.z_elim_row(u, i, j, &choice));
                }
            }
        }
        // ancestry rows first, in the position the primal would have them
        rows.extend(m.rows);
        m.rows = rows;
        Ok(m)
    }

    /// Dense point from an STT's induced indicators; auxiliary variables
    /// take their row-min / column-max values.
    pub fn point_from_induced(&self, ip: &InducedPoint) -> Point {
        let z: HashMap<(usize, usize, usize), Rational> = ip.z.iter().cloned().collect();
        self.point_from_parts(&ip.x, &|k, i, j| z.get(&(k, i, j)).cloned().unwrap_or_default(), &ip.d)
    }

    pub fn point_from_parts(
        &self,
        x: &[Vec<Rational>],
        z: &dyn Fn(usize, usize, usize) -> Rational,
        d: &[Rational],
    ) -> Point {
        let n = x.len();
        self.vars
            .iter()
            .map(|v| match *v {
                Var::X(i, j) => x[i][j].clone(),
                Var::Z(k, i, j) => z(k, i, j),
                Var::D(i) => d[i].clone(),
                Var::RowMin(i) => (0..n).filter(|&j| j != i).map(|j| x[i][j].clone()).min().unwrap_or_default(),
                Var::ColMax(i) => (0..n).filter(|&j| j != i).map(|j| x[j][i].clone()).max().unwrap_or_default(),
                _ => Rational::zero(),
            })
            .collect()
    }

    pub fn stt_point(&self, u: &Topology, t: &SearchTree) -> Point {
        self.point_from_induced(&crate::stt::induced_point(u, t))
    }

    /// D-projection of a point.
    pub fn d_part(&self, p: &[Rational]) -> Vec<Rational> {
        let n = self.topology.as_ref().map(|u| u.n()).unwrap_or(0);
        (0..n).map(|i| p[self.idx(Var::D(i))].clone()).collect()
    }

    /// X matrix of a point (zero diagonal).
    pub fn x_part(&self, p: &[Rational]) -> Vec<Vec<Rational>> {
        let n = self.topology.as_ref().map(|u| u.n()).unwrap_or(0);
        (0..n)
            .map(|i| {
                (0..n).map(|j| if i == j { Rational::zero() } else { p[self.idx(Var::X(i, j))].clone() }).collect()
            })
            .collect()
    }

    /// Text dump, one row per line: `label: Σ coef*var REL rhs`.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        if let Some((sense, obj)) = &self.objective {
            s.push_str(match sense {
                Sense::Min => "minimize: ",
                Sense::Max => "maximize: ",
            });
            s.push_str(&self.render_lhs(obj));
            s.push('\n');
        }
        for (i, v) in self.vars.iter().enumerate() {
            if self.nonneg[i] {
                s.push_str(&format!("nn:{v}: 1*{v} >= 0\n"));
            }
        }
        for r in &self.rows {
            s.push_str(&format!("{}: {} {} {}\n", r.label, self.render_lhs(&r.coeffs), r.rel, r.rhs));
        }
        for f in &self.families {
            s.push_str(&format!("# implicit family: {f:?}\n"));
        }
        s
    }

    fn render_lhs(&self, coeffs: &[(usize, Rational)]) -> String {
        if coeffs.is_empty() {
            return "0".into();
        }
        coeffs
            .iter()
            .enumerate()
            .map(|(k, (v, c))| {
                let term = format!("{}*{}", c.abs(), self.vars[*v]);
                match (k, c.is_negative()) {
                    (0, false) => term,
                    (0, true) => format!("-{term}"),
                    (_, false) => format!("+ {term}"),
                    (_, true) => format!("- {term}"),
                }
            })
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// `var=value` lines; zero entries are included.
    pub fn format_point(&self, p: &[Rational]) -> String {
        self.vars.iter().zip(p).map(|(v, x)| format!("{v}={x}\n")).collect()
    }

    /// Parses `var=value` lines; unspecified variables are zero.
    pub fn parse_point(&self, text: &str) -> Result<Point> {
        let mut p = vec![Rational::zero(); self.num_vars()];
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            let (name, val) =
                line.split_once('=').ok_or_else(|| Error::Parse(format!("expected var=value, got {line:?}")))?;
            let v: Var = name.trim().parse()?;
            let i = self.var_index(v).ok_or_else(|| Error::Parse(format!("unknown variable {name:?}")))?;
            p[i] = val.parse()?;
        }
        Ok(p)
    }
}

impl Default for LpModel {
    fn default() -> Self {
        Self::new()
    }
}

fn one() -> Rational {
    Rational::one()
}

fn neg1() -> Rational {
    -Rational::one()
}

/// Interior nodes of (i,j) sorted by id, paired with the canonical Z key.
fn z_keys(u: &Topology) -> Vec<(usize, usize, usize)> {
    let mut keys = Vec::new();
    for i in 0..u.n() {
        for j in i + 1..u.n() {
            for &k in u.interior(i, j) {
                keys.push((k, i, j));
            }
        }
    }
    keys.sort_unstable();
    keys
}

fn add_x_vars(m: &mut LpModel, n: usize) {
    for i in 0..n {
        for j in 0..n {
            if i != j {
                m.add_var(Var::X(i, j), true);
            }
        }
    }
}

fn add_d_vars(m: &mut LpModel, n: usize) {
    for i in 0..n {
        m.add_var(Var::D(i), false);
    }
}

fn depth_rows(m: &mut LpModel, n: usize) {
    for i in 0..n {
        // Σ_j X_ji - D_i <= 0
        let mut c: Vec<(usize, Rational)> = (0..n).filter(|&j| j != i).map(|j| (m.idx(Var::X(j, i)), one())).collect();
        c.push((m.idx(Var::D(i)), neg1()));
        m.add_row(Row::new(c, Rel::Le, Rational::zero(), format!("dep({})", i + 1)));
    }
}

/// Primal model: X, Z, D with ancestry, loose-LCA and depth rows.
pub fn build_primal(u: &Topology) -> LpModel {
    let n = u.n();
    let mut m = LpModel::new();
    m.topology = Some(u.clone());
    add_x_vars(&mut m, n);
    let keys = z_keys(u);
    for &(k, i, j) in &keys {
        m.add_var(Var::Z(k, i, j), true);
    }
    add_d_vars(&mut m, n);
    for i in 0..n {
        for j in i + 1..n {
            let mut c = vec![(m.idx(Var::X(i, j)), one()), (m.idx(Var::X(j, i)), one())];
            for &k in u.interior(i, j) {
                c.push((m.idx(Var::Z(k, i, j)), one()));
            }
            m.add_row(Row::new(c, Rel::Ge, one(), format!("anc({},{})", i + 1, j + 1)));
        }
    }
    for &(k, i, j) in &keys {
        let z = m.idx(Var::Z(k, i, j));
        for (side, tag) in [(i, 'a'), (j, 'b')] {
            let x = m.idx(Var::X(k, side));
            m.add_row(Row::new(
                vec![(z, one()), (x, neg1())],
                Rel::Le,
                Rational::zero(),
                format!("lca{}({};{},{})", tag, k + 1, i + 1, j + 1),
            ));
        }
    }
    depth_rows(&mut m, n);
    m
}

/// Primal model plus the selected refined families.
pub fn build_refined(u: &Topology, families: &[Refinement]) -> LpModel {
    let mut m = build_primal(u);
    add_refinements(&mut m, u, families);
    m
}

/// Adds refined families to a model that has X (and, for the Z family, Z)
/// variables.
pub fn add_refinements(m: &mut LpModel, u: &Topology, families: &[Refinement]) {
    let n = u.n();
    let fams: BTreeSet<Refinement> = families.iter().copied().collect();
    for fam in fams {
        match fam {
            Refinement::PathMonotonicity => {
                for a in 0..n {
                    for v in 0..n {
                        if v == a {
                            continue;
                        }
                        let inner = u.interior(a, v);
                        if let Some(&w) = inner.last() {
                            // X_{a w} >= X_{a v} where w precedes v on the path from a
                            m.add_row(Row::new(
                                vec![(m.idx(Var::X(a, v)), one()), (m.idx(Var::X(a, w)), neg1())],
                                Rel::Le,
                                Rational::zero(),
                                format!("mono({};{},{})", a + 1, w + 1, v + 1),
                            ));
                        }
                    }
                }
            }
            Refinement::Transitivity => {
                for i in 0..n {
                    for j in 0..n {
                        for k in 0..n {
                            if i == j || j == k || i == k {
                                continue;
                            }
                            // X_ij + X_jk - X_ik <= 1
                            m.add_row(Row::new(
                                vec![
                                    (m.idx(Var::X(i, j)), one()),
                                    (m.idx(Var::X(j, k)), one()),
                                    (m.idx(Var::X(i, k)), neg1()),
                                ],
                                Rel::Le,
                                one(),
                                format!("trans({},{},{})", i + 1, j + 1, k + 1),
                            ));
                        }
                    }
                }
            }
            Refinement::LcaSeparation => {
                for i in 0..n {
                    for j in 0..n {
                        if i == j {
                            continue;
                        }
                        let mut ks: Vec<usize> = u.interior(i, j).to_vec();
                        ks.push(j);
                        for k in ks {
                            m.add_row(Row::new(
                                vec![(m.idx(Var::X(k, i)), one()), (m.idx(Var::X(i, j)), one())],
                                Rel::Le,
                                one(),
                                format!("sep({};{},{})", k + 1, i + 1, j + 1),
                            ));
                        }
                    }
                }
            }
            Refinement::RefinedZ => {
                for (k, i, j) in z_keys(u) {
                    let Some(z) = m.var_index(Var::Z(k, i, j)) else {
                        continue;
                    };
                    // X_ki + X_kj - Z_kij <= 1
                    m.add_row(Row::new(
                        vec![(m.idx(Var::X(k, i)), one()), (m.idx(Var::X(k, j)), one()), (z, neg1())],
                        Rel::Le,
                        one(),
                        format!("zref({};{},{})", k + 1, i + 1, j + 1),
                    ));
                }
            }
            Refinement::RowMinColMax => {
                if n < 2 {
                    continue;
                }
                for i in 0..n {
                    m.add_var(Var::RowMin(i), false);
                }
                for i in 0..n {
                    m.add_var(Var::ColMax(i), false);
                }
                for i in 0..n {
                    for j in 0..n {
                        if i == j {
                            continue;
                        }
                        m.add_row(Row::new(
                            vec![(m.idx(Var::X(j, i)), one()), (m.idx(Var::ColMax(i)), neg1())],
                            Rel::Le,
                            Rational::zero(),
                            format!("colmax({};{})", i + 1, j + 1),
                        ));
                        m.add_row(Row::new(
                            vec![(m.idx(Var::RowMin(i)), one()), (m.idx(Var::X(i, j)), neg1())],
                            Rel::Le,
                            Rational::zero(),
                            format!("rowmin({};{})", i + 1, j + 1),
                        ));
                    }
                }
                let colsum = (0..n).map(|i| (m.idx(Var::ColMax(i)), one())).collect();
                m.add_row(Row::new(colsum, Rel::Eq, qi(n as i64 - 1), "colmax-sum"));
                let rowsum = (0..n).map(|i| (m.idx(Var::RowMin(i)), one())).collect();
                m.add_row(Row::new(rowsum, Rel::Eq, one(), "rowmin-sum"));
            }
        }
    }
}

/// X and D only; ancestry rows are an implicit family served by separation.
pub fn build_z_eliminated(u: &Topology) -> LpModel {
    let n = u.n();
    let mut m = LpModel::new();
    m.topology = Some(u.clone());
    add_x_vars(&mut m, n);
    add_d_vars(&mut m, n);
    depth_rows(&mut m, n);
    m.families.push(Family::ZEliminatedAncestry);
    m
}

/// Default explicit-expansion cap for Z-eliminated rows.
pub const Z_ELIM_CAP: usize = 12;

/// Z-eliminated model with every row explicit.
pub fn build_z_eliminated_explicit(u: &Topology) -> Result<LpModel> {
    build_z_eliminated(u).expand_z_eliminated(Z_ELIM_CAP)
}

/// Attaches the fixed-point-free permutation family (served by separation).
pub fn with_fixed_point_free(mut m: LpModel) -> LpModel {
    if !m.families.contains(&Family::FixedPointFree) {
        m.families.push(Family::FixedPointFree);
    }
    m
}

/// Dual model: R over pairs, Q over colinear triples; maximize Σ R.
pub fn build_dual(u: &Topology, f: &[Rational]) -> Result<LpModel> {
    build_dual_with(u, f, false)
}

/// Dual model with capping rows as equalities when `capping_eq` is set.
pub fn build_dual_with(u: &Topology, f: &[Rational], capping_eq: bool) -> Result<LpModel> {
    let n = u.n();
    if f.len() != n {
        return Err(Error::Dimension { expected: n, got: f.len() });
    }
    if f.iter().any(|x| x.is_negative()) {
        return Err(Error::Invalid("negative weight".into()));
    }
    let mut m = LpModel::new();
    m.topology = Some(u.clone());
    for i in 0..n {
        for j in i + 1..n {
            m.add_var(Var::R(i, j), true);
        }
    }
    let mut triples = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                for &k in u.interior(i, j) {
                    triples.push((i, k, j));
                }
            }
        }
    }
    triples.sort_unstable();
    for &(i, k, j) in &triples {
        m.add_var(Var::Q(i, k, j), true);
    }
    for i in 0..n {
        for j in i + 1..n {
            let mut ks = u.interior(i, j).to_vec();
            ks.sort_unstable();
            for k in ks {
                m.add_row(Row::new(
                    vec![
                        (m.idx(Var::R(i, j)), one()),
                        (m.idx(Var::Q(i, k, j)), neg1()),
                        (m.idx(Var::Q(j, k, i)), neg1()),
                    ],
                    if capping_eq { Rel::Eq } else { Rel::Le },
                    Rational::zero(),
                    format!("cap({},{};{})", i + 1, j + 1, k + 1),
                ));
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let mut c = vec![(m.idx(Var::R(i.min(j), i.max(j))), one())];
            for a in 0..n {
                if a != i && a != j && u.interior(j, a).contains(&i) {
                    c.push((m.idx(Var::Q(j, i, a)), one()));
                }
            }
            m.add_row(Row::new(c, Rel::Le, f[j].clone(), format!("freq({},{})", i + 1, j + 1)));
        }
    }
    let obj = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).map(|(i, j)| (m.idx(Var::R(i, j)), one())).collect();
    m.set_objective(Sense::Max, obj);
    Ok(m)
}

/// Default perturbation for the best-case ratio LP.
pub fn default_epsilon() -> Rational {
    Rational::new(1, 1000)
}

/// Variables f (weights) and x; rows pin D' as the best search tree for f,
/// keep P strictly better by `epsilon`, and bound x by every rounding.
pub fn build_bc_ratio_lp(
    p_d: &[Rational],
    dprime: &[Rational],
    stt_depths: &[Vec<Rational>],
    roundings: &[Vec<Rational>],
    epsilon: &Rational,
) -> Result<LpModel> {
    let n = p_d.len();
    if dprime.len() != n || stt_depths.iter().chain(roundings).any(|v| v.len() != n) {
        return Err(Error::Invalid("depth vectors differ in length".into()));
    }
    if epsilon.is_negative() {
        return Err(Error::Invalid("epsilon must be nonnegative".into()));
    }
    if !stt_depths.iter().any(|d| d == dprime) {
        return Err(Error::Invalid("D' is not a search-tree depth vector".into()));
    }
    let mut m = LpModel::new();
    for i in 0..n {
        m.add_var(Var::Freq(i), true);
    }
    let x = m.add_var(Var::Scalar, false);
    let fi = |i: usize| i;
    m.add_row(Row::new((0..n).map(|i| (fi(i), one())).collect(), Rel::Eq, one(), "norm"));
    // (D' - P)·f >= eps
    m.add_row(Row::new((0..n).map(|i| (fi(i), &dprime[i] - &p_d[i])).collect(), Rel::Ge, epsilon.clone(), "gap"));
    for (k, d) in stt_depths.iter().enumerate() {
        if d == dprime {
            continue;
        }
        // (D^k - D')·f >= 0
        m.add_row(Row::new(
            (0..n).map(|i| (fi(i), &d[i] - &dprime[i])).collect(),
            Rel::Ge,
            Rational::zero(),
            format!("stt{}", k + 1),
        ));
    }
    for (k, s) in roundings.iter().enumerate() {
        // x - S^k·f <= 0
        let mut c: Vec<(usize, Rational)> = (0..n).map(|i| (fi(i), -s[i].clone())).collect();
        c.push((x, one()));
        m.add_row(Row::new(c, Rel::Le, Rational::zero(), format!("round{}", k + 1)));
    }
    let mut obj: Vec<(usize, Rational)> = (0..n).map(|i| (fi(i), -dprime[i].clone())).collect();
    obj.push((x, one()));
    m.set_objective(Sense::Max, obj);
    Ok(m)
}
