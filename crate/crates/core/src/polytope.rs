//! Double description: extreme rays of `{y : A y ≥ 0}` in exact integers, used
//! both for the facets of a dominance hull and for the vertices of an LP
//! polyhedron.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::linalg::{integer_row, rank, to_mod, ModEchelon};
use crate::lpmodel::{Family, LpModel, Point, Rel};
use crate::rational::{dot, lcm_denoms, Rational};

/// Largest explicit variable count accepted by [`enumerate_vertices`].
pub const VERTEX_VAR_CAP: usize = 40;

type Bits = Vec<u64>;

fn bit_set(b: &mut Bits, i: usize) {
    b[i / 64] |= 1 << (i % 64);
}

fn bit_get(b: &Bits, i: usize) -> bool {
    b[i / 64] >> (i % 64) & 1 == 1
}

fn overflow() -> Error {
    Error::TooLarge("ray coordinates exceed 64-bit range".into())
}

fn gcd_all(v: &[i128]) -> i128 {
    v.iter().fold(0i128, |g, &x| g.gcd(&x))
}

fn to_i64_primitive(v: &[i128]) -> Result<Vec<i64>> {
    let g = gcd_all(v).max(1);
    v.iter().map(|&x| i64::try_from(x / g).map_err(|_| overflow())).collect()
}

#[derive(Clone)]
struct Ray {
    y: Vec<i64>,
    zero: Bits,
}

/// Constraint rows `a·y ≥ 0` (or `= 0`) over integers.
#[derive(Clone, Debug, Default)]
pub struct ConeSpec {
    pub dim: usize,
    pub rows: Vec<Vec<i64>>,
    pub eq: Vec<bool>,
}

impl ConeSpec {
    pub fn new(dim: usize) -> Self {
        ConeSpec { dim, rows: Vec::new(), eq: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<i64>, eq: bool) {
        debug_assert_eq!(row.len(), self.dim);
        self.rows.push(row);
        self.eq.push(eq);
    }
}

fn eval(a: &[i64], y: &[i64]) -> i128 {
    a.iter().zip(y).map(|(&p, &q)| p as i128 * q as i128).sum()
}

/// Extreme rays of a pointed cone, each primitive. Rows are processed in the
/// given order after an initial basis chosen greedily from the front.
pub fn extreme_rays(cone: &ConeSpec) -> Result<Vec<Vec<i64>>> {
    let d = cone.dim;
    let m = cone.rows.len();
    let words = m.div_ceil(64).max(1);
    let modrows: Vec<Vec<u64>> = cone.rows.iter().map(|r| r.iter().map(|&x| to_mod(x as i128)).collect()).collect();

    // initial basis
    let mut ech = ModEchelon::new(d);
    let mut basis = Vec::new();
    for (i, r) in modrows.iter().enumerate() {
        if ech.push(r) {
            basis.push(i);
            if basis.len() == d {
                break;
            }
        }
    }
    if basis.len() < d {
        // modular rank may undercount; confirm exactly before rejecting
        let full: Vec<Vec<Rational>> =
            cone.rows.iter().map(|r| r.iter().map(|&x| Rational::from_int(x)).collect()).collect();
        if rank(&full) < d {
            return Err(Error::Invalid("cone is not pointed".into()));
        }
        basis = crate::linalg::independent_rows(&full);
        basis.truncate(d);
    }
    let bmat: Vec<Vec<Rational>> =
        basis.iter().map(|&i| cone.rows[i].iter().map(|&x| Rational::from_int(x)).collect()).collect();
    let inv = crate::linalg::inverse(&bmat).ok_or_else(|| Error::Invalid("singular initial basis".into()))?;
    let mut rays: Vec<Ray> = Vec::new();
    for k in 0..d {
        if cone.eq[basis[k]] {
            continue;
        }
        let col: Vec<Rational> = (0..d).map(|r| inv[r][k].clone()).collect();
        let ints = integer_row(&col);
        let mut y = Vec::with_capacity(d);
        for v in ints {
            y.push(v.to_i64().ok_or_else(overflow)?);
        }
        let g = y.iter().fold(0i64, |g, &x| g.gcd(&x)).max(1);
        for v in y.iter_mut() {
            *v /= g;
        }
        let mut zero = vec![0u64; words];
        for (t, &bi) in basis.iter().enumerate() {
            if t != k {
                bit_set(&mut zero, bi);
            }
        }
        rays.push(Ray { y, zero });
    }
    let in_basis: Vec<bool> = {
        let mut v = vec![false; m];
        for &b in &basis {
            v[b] = true;
        }
        v
    };
    let mut processed: Vec<usize> = basis.clone();
    for i in 0..m {
        if in_basis[i] {
            continue;
        }
        let a = &cone.rows[i];
        let vals: Vec<i128> = rays.iter().map(|r| eval(a, &r.y)).collect();
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        let mut next: Vec<Ray> = Vec::with_capacity(rays.len());
        for (k, r) in rays.iter().enumerate() {
            match vals[k].signum() {
                1 => pos.push(k),
                -1 => neg.push(k),
                _ => {
                    let mut r = r.clone();
                    bit_set(&mut r.zero, i);
                    next.push(r);
                }
            }
        }
        if neg.is_empty() && !cone.eq[i] {
            for r in rays.iter_mut() {
                if eval(a, &r.y) == 0 {
                    bit_set(&mut r.zero, i);
                }
            }
            processed.push(i);
            continue;
        }
        for &p in &pos {
            for &n in &neg {
                let (rp, rn) = (&rays[p], &rays[n]);
                let common: Bits = rp.zero.iter().zip(&rn.zero).map(|(x, y)| x & y).collect();
                let cnt: u32 = common.iter().map(|w| w.count_ones()).sum();
                if (cnt as usize) + 2 < d {
                    continue;
                }
                if !adjacent(&common, p, n, &rays, &modrows, &processed, d) {
                    continue;
                }
                let (vp, vn) = (vals[p], -vals[n]);
                let mut y = Vec::with_capacity(d);
                for t in 0..d {
                    let v = vp
                        .checked_mul(rn.y[t] as i128)
                        .and_then(|x| vn.checked_mul(rp.y[t] as i128).and_then(|z| x.checked_add(z)))
                        .ok_or_else(overflow)?;
                    y.push(v);
                }
                let y = to_i64_primitive(&y)?;
                let mut zero = common;
                bit_set(&mut zero, i);
                next.push(Ray { y, zero });
            }
        }
        if !cone.eq[i] {
            for &p in &pos {
                next.push(rays[p].clone());
            }
        }
        rays = next;
        processed.push(i);
    }
    let mut out: Vec<Vec<i64>> = rays.into_iter().map(|r| r.y).collect();
    out.sort();
    out.dedup();
    Ok(out)
}

fn adjacent(
    common: &Bits,
    p: usize,
    n: usize,
    rays: &[Ray],
    modrows: &[Vec<u64>],
    processed: &[usize],
    d: usize,
) -> bool {
    let mut e = ModEchelon::new(d);
    for &j in processed {
        if bit_get(common, j) {
            e.push(&modrows[j]);
            if e.rank() + 2 == d {
                return true;
            }
        }
    }
    // modular rank can undercount; the combinatorial test is exact
    !rays.iter().enumerate().any(|(k, r)| k != p && k != n && common.iter().zip(&r.zero).all(|(c, z)| c & !z == 0))
}

/// A facet `normal·x ≥ offset` of a dominance hull.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Facet {
    pub normal: Vec<i64>,
    pub offset: Rational,
    /// Indices of input points on the facet.
    pub spanning: Vec<usize>,
}

impl Facet {
    pub fn normal_q(&self) -> Vec<Rational> {
        self.normal.iter().map(|&x| Rational::from_int(x)).collect()
    }

    pub fn value(&self, p: &[Rational]) -> Rational {
        dot(&self.normal_q(), p)
    }

    pub fn is_axis(&self) -> bool {
        self.normal.iter().filter(|&&x| x != 0).count() == 1
    }
}

impl fmt::Display for Facet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.normal.iter().map(|x| x.to_string()).collect();
        write!(f, "{} ; {}", self.offset, parts.join(" "))
    }
}

/// Parses a line written by `Facet`'s `Display` (spanning set left empty).
pub fn parse_facet(line: &str) -> Result<Facet> {
    let (off, rest) = line.split_once(';').ok_or_else(|| Error::Parse(format!("facet line without ';': {line}")))?;
    let offset: Rational = off.trim().parse()?;
    let normal = rest
        .split_whitespace()
        .map(|t| t.parse::<i64>().map_err(|e| Error::Parse(format!("bad normal entry {t:?}: {e}"))))
        .collect::<Result<Vec<_>>>()?;
    Ok(Facet { normal, offset, spanning: Vec::new() })
}

/// True iff `p` lies strictly below the facet hyperplane.
pub fn point_below_facet(facet: &Facet, p: &[Rational]) -> bool {
    facet.value(p) < facet.offset
}

fn dominated_by(a: &[Rational], b: &[Rational]) -> bool {
    a != b && a.iter().zip(b).all(|(x, y)| x >= y)
}

/// Facets of `conv(points) + cone(e_1..e_n)`, sorted by normal.
pub fn dominance_hull_facets(points: &[Vec<Rational>]) -> Result<Vec<Facet>> {
    let n = points.first().map(|p| p.len()).ok_or_else(|| Error::Invalid("no points".into()))?;
    if n == 0 {
        return Err(Error::Invalid("zero-dimensional points".into()));
    }
    if let Some(bad) = points.iter().find(|p| p.len() != n) {
        return Err(Error::Dimension { expected: n, got: bad.len() });
    }
    let mut uniq: Vec<&Vec<Rational>> = points.iter().collect();
    uniq.sort();
    uniq.dedup();
    let kept: Vec<&Vec<Rational>> = uniq.iter().filter(|p| !uniq.iter().any(|q| dominated_by(p, q))).copied().collect();
    // polar cone in (y0, h): y0 + h·v ≥ 0 per point, h ≥ 0
    let mut cone = ConeSpec::new(n + 1);
    for i in 0..n {
        let mut r = vec![0i64; n + 1];
        r[i + 1] = 1;
        cone.push(r, false);
    }
    for p in &kept {
        let l = lcm_denoms(p.iter());
        let mut r = vec![l.to_i64().ok_or_else(overflow)?];
        for x in p.iter() {
            let v = (x.numer() * (&l / x.denom())).to_i64().ok_or_else(overflow)?;
            r.push(v);
        }
        cone.push(r, false);
    }
    let rays = extreme_rays(&cone)?;
    let mut facets = Vec::new();
    for y in rays {
        let h = &y[1..];
        let g = h.iter().fold(0i64, |g, &x| g.gcd(&x));
        if g == 0 {
            continue;
        }
        let normal: Vec<i64> = h.iter().map(|x| x / g).collect();
        let offset = Rational::new(-y[0], g);
        let nq: Vec<Rational> = normal.iter().map(|&x| Rational::from_int(x)).collect();
        let spanning = points.iter().enumerate().filter(|(_, p)| dot(&nq, p) == offset).map(|(i, _)| i).collect();
        facets.push(Facet { normal, offset, spanning });
    }
    facets.sort_by(|a, b| a.normal.cmp(&b.normal).then_with(|| a.offset.cmp(&b.offset)));
    Ok(facets)
}

/// Indices of input points that are vertices of the hull (tight facets of
/// full rank).
pub fn hull_vertices(points: &[Vec<Rational>], facets: &[Facet]) -> Vec<usize> {
    let n = points.first().map_or(0, |p| p.len());
    let mut out = Vec::new();
    for (i, p) in points.iter().enumerate() {
        let tight: Vec<Vec<Rational>> =
            facets.iter().filter(|f| f.value(p) == f.offset).map(|f| f.normal_q()).collect();
        if rank(&tight) == n && !points[..i].contains(p) {
            out.push(i);
        }
    }
    out
}

/// How free variables that occur in a single inequality are reconstructed.
struct Eliminated {
    var: usize,
    row: usize,
}

/// All vertices of the model's polyhedron, sorted lexicographically.
pub fn enumerate_vertices(model: &LpModel) -> Result<Vec<Point>> {
    let nv = model.num_vars();
    if nv > VERTEX_VAR_CAP {
        return Err(Error::TooLarge(format!(
            "{nv} variables exceed the vertex-enumeration cap of {VERTEX_VAR_CAP}; sample directions instead"
        )));
    }
    let mut rows = model.rows.clone();
    for fam in &model.families {
        match fam {
            Family::ZEliminatedAncestry => {
                let e = model.expand_z_eliminated(crate::lpmodel::Z_ELIM_CAP)?;
                rows = e.rows;
            }
            Family::FixedPointFree => {
                return Err(Error::Invalid("permutation family cannot be enumerated explicitly".into()));
            }
        }
    }
    // eliminate free variables that appear in exactly one inequality
    let mut occurs: Vec<Vec<usize>> = vec![Vec::new(); nv];
    for (ri, r) in rows.iter().enumerate() {
        for (v, _) in &r.coeffs {
            occurs[*v].push(ri);
        }
    }
    let mut elim = Vec::new();
    let mut dropped = vec![false; rows.len()];
    for v in 0..nv {
        if !model.nonneg[v] && occurs[v].len() == 1 {
            let ri = occurs[v][0];
            if rows[ri].rel != Rel::Eq && !dropped[ri] {
                dropped[ri] = true;
                elim.push(Eliminated { var: v, row: ri });
            }
        }
    }
    let gone: Vec<bool> = {
        let mut g = vec![false; nv];
        for e in &elim {
            g[e.var] = true;
        }
        g
    };
    let keep: Vec<usize> = (0..nv).filter(|&v| !gone[v]).collect();
    let mut col = vec![usize::MAX; nv];
    for (c, &v) in keep.iter().enumerate() {
        col[v] = c + 1;
    }
    let d = keep.len() + 1;
    let mut cone = ConeSpec::new(d);
    let mut t = vec![0i64; d];
    t[0] = 1;
    cone.push(t, false);
    for &v in &keep {
        if model.nonneg[v] {
            let mut r = vec![0i64; d];
            r[col[v]] = 1;
            cone.push(r, false);
        }
    }
    for (ri, r) in rows.iter().enumerate() {
        if dropped[ri] {
            continue;
        }
        let mut dense = vec![Rational::zero(); d];
        for (v, c) in &r.coeffs {
            dense[col[*v]] = c.clone();
        }
        dense[0] = -&r.rhs;
        if r.rel == Rel::Le {
            for x in dense.iter_mut() {
                *x = -&*x;
            }
        }
        let ints = integer_row(&dense);
        let mut row = Vec::with_capacity(d);
        for x in ints {
            row.push(x.to_i64().ok_or_else(overflow)?);
        }
        cone.push(row, r.rel == Rel::Eq);
    }
    let rays = extreme_rays(&cone)?;
    let mut out = Vec::new();
    for y in rays {
        if y[0] <= 0 {
            continue;
        }
        let tq = Rational::from_int(y[0]);
        let mut p = vec![Rational::zero(); nv];
        for &v in &keep {
            p[v] = Rational::from_int(y[col[v]]) / &tq;
        }
        for e in &elim {
            let r = &rows[e.row];
            let mut rest = r.rhs.clone();
            let mut c = Rational::zero();
            for (v, a) in &r.coeffs {
                if *v == e.var {
                    c = a.clone();
                } else {
                    rest -= a * &p[*v];
                }
            }
            p[e.var] = rest / c;
        }
        out.push(p);
    }
    out.sort();
    Ok(out)
}

/// Largest reduced denominator among the coordinates.
pub fn max_denominator(p: &[Rational]) -> BigInt {
    p.iter().map(|x| x.denom()).max().unwrap_or_else(|| BigInt::from(1))
}

/// Number of entries per denominator class `1..=k` (index `k-1`), with larger
/// denominators counted in a trailing bucket.
pub fn denominator_census(points: &[Point], classes: usize) -> Vec<usize> {
    let mut out = vec![0usize; classes + 1];
    for p in points {
        let d = max_denominator(p);
        match d.to_usize() {
            Some(k) if k >= 1 && k <= classes => out[k - 1] += 1,
            _ => out[classes] += 1,
        }
    }
    if out[classes] == 0 {
        out.pop();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};

    fn pts(v: &[&[i64]]) -> Vec<Vec<Rational>> {
        v.iter().map(|p| p.iter().map(|&x| qi(x)).collect()).collect()
    }

    #[test]
    fn square_cone() {
        // y1 ≥ 0, y2 ≥ 0, y1 - y2 ≥ 0 in 2D
        let mut c = ConeSpec::new(2);
        c.push(vec![1, 0], false);
        c.push(vec![0, 1], false);
        c.push(vec![1, -1], false);
        assert_eq!(extreme_rays(&c).unwrap(), vec![vec![1, 0], vec![1, 1]]);
    }

    #[test]
    fn path2_hull() {
        let f = dominance_hull_facets(&pts(&[&[0, 1], &[1, 0]])).unwrap();
        assert_eq!(f.len(), 3);
        assert!(f.iter().any(|x| x.normal == vec![1, 1] && x.offset == qi(1)));
    }

    #[test]
    fn fig2_points() {
        let p = pts(&[
            &[4, 0, 0],
            &[0, 4, 0],
            &[0, 0, 4],
            &[0, 1, 2],
            &[0, 2, 1],
            &[1, 0, 2],
            &[1, 2, 0],
            &[2, 0, 1],
            &[2, 1, 0],
        ]);
        let f = dominance_hull_facets(&p).unwrap();
        // hexagon, three slanted facets, three axis facets
        assert_eq!(f.len(), 7);
        assert_eq!(f.iter().filter(|x| x.is_axis()).count(), 3);
        let half = vec![q(1, 2), q(1, 2), q(1, 2)];
        assert_eq!(f.iter().filter(|x| point_below_facet(x, &half)).count(), 4);
        let mut all = p.clone();
        all.push(half);
        let g = dominance_hull_facets(&all).unwrap();
        assert_eq!(hull_vertices(&all, &g).len(), 10);
    }

    #[test]
    fn facet_text_round_trip() {
        let f = Facet { normal: vec![3, 0, 1], offset: q(7, 2), spanning: vec![] };
        assert_eq!(parse_facet(&f.to_string()).unwrap(), f);
    }
}
