//! Exact rank tests and small dense solves.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::rational::{lcm_denoms, Rational};

/// Scales a rational row by the lcm of its denominators.
pub fn integer_row(row: &[Rational]) -> Vec<BigInt> {
    let l = lcm_denoms(row);
    row.iter().map(|v| v.numer() * (&l / v.denom())).collect()
}

/// Divides an integer vector by the gcd of its entries.
pub fn primitive(v: &mut [BigInt]) {
    let g = v.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
    if !g.is_zero() && !g.is_one() {
        for x in v.iter_mut() {
            *x /= &g;
        }
    }
}

/// Fraction-free (Bareiss) rank of an integer matrix.
pub fn rank_bigint(rows: &[Vec<BigInt>]) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let cols = rows[0].len();
    let mut m: Vec<Vec<BigInt>> = rows.to_vec();
    let mut rank = 0;
    let mut prev = BigInt::one();
    for c in 0..cols {
        let Some(p) = (rank..m.len()).find(|&r| !m[r][c].is_zero()) else {
            continue;
        };
        m.swap(rank, p);
        for r in rank + 1..m.len() {
            if m[r][c].is_zero() {
                // keeps the Bareiss invariant: row scaled by pivot / prev
                for k in c + 1..cols {
                    let v = &m[r][k] * &m[rank][c];
                    m[r][k] = v / &prev;
                }
                continue;
            }
            for k in c + 1..cols {
                let v = &m[r][k] * &m[rank][c] - &m[r][c] * &m[rank][k];
                m[r][k] = v / &prev;
            }
            m[r][c] = BigInt::zero();
        }
        prev = m[rank][c].clone();
        rank += 1;
        if rank == m.len() {
            break;
        }
    }
    rank
}

/// Exact rank of a rational matrix.
pub fn rank(rows: &[Vec<Rational>]) -> usize {
    let ints: Vec<Vec<BigInt>> = rows.iter().map(|r| integer_row(r)).collect();
    rank_bigint(&ints)
}

const P: u64 = (1 << 61) - 1;

#[inline]
fn mulmod(a: u64, b: u64) -> u64 {
    let p = a as u128 * b as u128;
    let lo = (p as u64) & P;
    let hi = (p >> 61) as u64;
    let s = lo + hi;
    if s >= P {
        s - P
    } else {
        s
    }
}

#[inline]
fn addmod(a: u64, b: u64) -> u64 {
    let s = a + b;
    if s >= P {
        s - P
    } else {
        s
    }
}

fn powmod(mut a: u64, mut e: u64) -> u64 {
    let mut r = 1;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, a);
        }
        a = mulmod(a, a);
        e >>= 1;
    }
    r
}

fn invmod(a: u64) -> u64 {
    powmod(a, P - 2)
}

/// Reduces a signed 128-bit integer modulo the Mersenne prime 2^61 - 1.
#[inline]
pub fn to_mod(v: i128) -> u64 {
    let r = v.rem_euclid(P as i128);
    r as u64
}

pub fn bigint_to_mod(v: &BigInt) -> u64 {
    let p = BigInt::from(P);
    let r = v.mod_floor(&p);
    let (_, digits) = r.to_u64_digits();
    digits.first().copied().unwrap_or(0)
}

/// Incremental row echelon form over GF(2^61 - 1).
///
/// The rank over the prime field never exceeds the rank over the rationals,
/// so reaching a target rank here is an exact certificate.
#[derive(Clone, Debug)]
pub struct ModEchelon {
    cols: usize,
    rows: Vec<(usize, Vec<u64>)>,
}

impl ModEchelon {
    pub fn new(cols: usize) -> Self {
        ModEchelon { cols, rows: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Adds a row; returns true if it increased the rank.
    pub fn push(&mut self, row: &[u64]) -> bool {
        debug_assert_eq!(row.len(), self.cols);
        let mut v = row.to_vec();
        for (pc, br) in &self.rows {
            let f = v[*pc];
            if f != 0 {
                let nf = P - f;
                for k in *pc..self.cols {
                    if br[k] != 0 {
                        v[k] = addmod(v[k], mulmod(nf, br[k]));
                    }
                }
            }
        }
        let Some(pc) = v.iter().position(|&x| x != 0) else {
            return false;
        };
        let inv = invmod(v[pc]);
        for x in v.iter_mut().skip(pc) {
            *x = mulmod(*x, inv);
        }
        self.rows.push((pc, v));
        true
    }
}

/// Gauss-Jordan inverse of a square rational matrix.
pub fn inverse(m: &[Vec<Rational>]) -> Option<Vec<Vec<Rational>>> {
    let n = m.len();
    let mut a: Vec<Vec<Rational>> = m
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend((0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }));
            row
        })
        .collect();
    for c in 0..n {
        let p = (c..n).find(|&r| !a[r][c].is_zero())?;
        a.swap(c, p);
        let inv = a[c][c].recip();
        for v in a[c].iter_mut() {
            *v = &*v * &inv;
        }
        let pivot = a[c].clone();
        for (r, row) in a.iter_mut().enumerate() {
            if r == c || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (k, pv) in pivot.iter().enumerate() {
                if !pv.is_zero() {
                    row[k] = row[k].sub_mul(&f, pv);
                }
            }
        }
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Solves a square system `m x = b`, if nonsingular.
pub fn solve_square(m: &[Vec<Rational>], b: &[Rational]) -> Option<Vec<Rational>> {
    let inv = inverse(m)?;
    Some(inv.iter().map(|row| crate::rational::dot(row, b)).collect())
}

/// Greedy choice of linearly independent rows, in input order.
pub fn independent_rows(rows: &[Vec<Rational>]) -> Vec<usize> {
    let Some(first) = rows.first() else {
        return Vec::new();
    };
    let cols = first.len();
    let mut ech = ModEchelon::new(cols);
    let mut picked = Vec::new();
    let mut picked_rows: Vec<Vec<BigInt>> = Vec::new();
    for (i, r) in rows.iter().enumerate() {
        let ir = integer_row(r);
        let modrow: Vec<u64> = ir.iter().map(bigint_to_mod).collect();
        if ech.push(&modrow) {
            picked.push(i);
            picked_rows.push(ir);
        } else {
            // modular dependence may be spurious; confirm exactly
            picked_rows.push(ir);
            if rank_bigint(&picked_rows) == picked_rows.len() {
                picked.push(i);
                ech = ModEchelon::new(cols);
                for pr in &picked_rows {
                    let m: Vec<u64> = pr.iter().map(bigint_to_mod).collect();
                    ech.push(&m);
                }
            } else {
                picked_rows.pop();
            }
        }
        if picked.len() == cols {
            break;
        }
    }
    picked
}

/// Absolute values for display of integer vectors.
pub fn abs_all(v: &[BigInt]) -> Vec<BigInt> {
    v.iter().map(|x| x.abs()).collect()
}
