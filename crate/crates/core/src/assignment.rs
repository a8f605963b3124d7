//! Minimum-cost perfect assignment with exact rational costs (Hungarian
//! algorithm, shortest augmenting paths with potentials).

use crate::rational::Rational;

/// Returns `(cost, perm)` with `perm[i]` the column assigned to row `i`.
/// `forbidden(i, j)` entries are never used; `None` if no perfect assignment
/// avoids them.
pub fn min_assignment(
    cost: &[Vec<Rational>],
    forbidden: impl Fn(usize, usize) -> bool,
) -> Option<(Rational, Vec<usize>)> {
    let n = cost.len();
    if n == 0 {
        return Some((Rational::zero(), Vec::new()));
    }
    // Forbidden cells get a cost larger than any finite assignment.
    let mut big = Rational::one();
    for (i, row) in cost.iter().enumerate() {
        for (j, c) in row.iter().enumerate() {
            if !forbidden(i, j) {
                big += c.abs();
            }
        }
    }
    let c = |i: usize, j: usize| -> Rational {
        if forbidden(i, j) {
            big.clone()
        } else {
            cost[i][j].clone()
        }
    };
    // 1-based potentials as in the classic formulation
    let mut u = vec![Rational::zero(); n + 1];
    let mut v = vec![Rational::zero(); n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv: Vec<Option<Rational>> = vec![None; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta: Option<Rational> = None;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = c(i0 - 1, j - 1) - &u[i0] - &v[j];
                if minv[j].as_ref().is_none_or(|m| cur < *m) {
                    minv[j] = Some(cur);
                    way[j] = j0;
                }
                let mj = minv[j].as_ref().expect("set above");
                if delta.as_ref().is_none_or(|d| mj < d) {
                    delta = Some(mj.clone());
                    j1 = j;
                }
            }
            let delta = delta.expect("an unused column remains");
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += &delta;
                    v[j] -= &delta;
                } else if let Some(m) = minv[j].as_mut() {
                    *m -= &delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut perm = vec![0usize; n];
    for j in 1..=n {
        perm[p[j] - 1] = j - 1;
    }
    if perm.iter().enumerate().any(|(i, &j)| forbidden(i, j)) {
        return None;
    }
    let total = perm.iter().enumerate().map(|(i, &j)| cost[i][j].clone()).sum();
    Some((total, perm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::qi;

    fn brute(cost: &[Vec<Rational>], forbid_diag: bool) -> Option<Rational> {
        fn rec(
            i: usize,
            cost: &[Vec<Rational>],
            used: &mut Vec<bool>,
            fd: bool,
            acc: Rational,
            best: &mut Option<Rational>,
        ) {
            let n = cost.len();
            if i == n {
                if best.as_ref().is_none_or(|b| acc < *b) {
                    *best = Some(acc);
                }
                return;
            }
            for j in 0..n {
                if used[j] || (fd && i == j) {
                    continue;
                }
                used[j] = true;
                rec(i + 1, cost, used, fd, &acc + &cost[i][j], best);
                used[j] = false;
            }
        }
        let mut best = None;
        rec(0, cost, &mut vec![false; cost.len()], forbid_diag, Rational::zero(), &mut best);
        best
    }

    #[test]
    fn matches_brute_force() {
        let mut seed = 7u64;
        for n in 2..=6 {
            for _ in 0..20 {
                let cost: Vec<Vec<Rational>> = (0..n)
                    .map(|_| {
                        (0..n)
                            .map(|_| {
                                seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                                qi(((seed >> 33) % 9) as i64)
                            })
                            .collect()
                    })
                    .collect();
                let (c, perm) = min_assignment(&cost, |i, j| i == j).unwrap();
                assert!(perm.iter().enumerate().all(|(i, &j)| i != j));
                assert_eq!(Some(c), brute(&cost, true));
                let (c2, _) = min_assignment(&cost, |_, _| false).unwrap();
                assert_eq!(Some(c2), brute(&cost, false));
            }
        }
    }

    #[test]
    fn single_row_with_forbidden_diagonal_fails() {
        assert!(min_assignment(&[vec![qi(1)]], |i, j| i == j).is_none());
    }
}
