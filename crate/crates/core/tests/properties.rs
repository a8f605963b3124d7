mod common;

use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sttlp::analysis::*;
use sttlp::lpmodel::*;
use sttlp::normals::{scan, ScanOptions};
use sttlp::parallel::Parallelism;
use sttlp::rational::{qi, Rational};
use sttlp::rounding::{round_all, DEFAULT_ROUND_BUDGET};
use sttlp::simplex::{is_vertex, solve, Status};
use sttlp::stt::{best_stt, enumerate_stts, optimal_star_stt};
use sttlp::topology::{catalog_all, combine, Extension, Topology};

fn config(cases: u32, seed: u64) -> Config {
    Config { cases, rng_seed: RngSeed::Fixed(seed), failure_persistence: None, ..Config::default() }
}

fn small_topologies(max_n: usize) -> Vec<Topology> {
    catalog_all().into_iter().filter(|u| u.n() <= max_n).collect()
}

fn big(r: &Rational) -> BigRational {
    BigRational::new(r.numer(), r.denom())
}

fn rat() -> impl Strategy<Value = (i64, i64)> {
    (any::<i64>(), 1..i64::MAX).prop_map(|(a, b)| (a, b))
}

fn random_objective(m: &LpModel, rng: &mut ChaCha8Rng) -> Vec<(usize, Rational)> {
    (0..m.num_vars()).map(|i| (i, qi(rng.gen_range(0..10)))).collect()
}

fn all_subsets_ok(d: &[Rational]) -> bool {
    let n = d.len();
    (1u32..1 << n).all(|mask| {
        let s: Rational = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| d[i].clone()).sum();
        s >= qi(mask.count_ones() as i64 - 1)
    })
}

/// Integer feasible point: a tree's indicators plus extra ancestry ones.
fn inflated_tree_point(u: &Topology, m: &LpModel, rng: &mut ChaCha8Rng) -> Point {
    let trees = enumerate_stts(u);
    let t = &trees[rng.gen_range(0..trees.len())];
    let ip = sttlp::stt::induced_point(u, t);
    let n = u.n();
    let mut x = ip.x.clone();
    for _ in 0..rng.gen_range(0..=n) {
        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if a != b {
            x[a][b] = qi(1);
        }
    }
    let d: Vec<Rational> = (0..n).map(|j| (0..n).map(|i| x[i][j].clone()).sum()).collect();
    let z = |k, i, j| ip.z.iter().find(|e| e.0 == (k, i, j)).map(|e| e.1.clone()).unwrap_or_default();
    m.point_from_parts(&x, &z, &d)
}

proptest! {
    #![proptest_config(config(256, 11))]

    #[test]
    fn rational_ops_match_bigrational(a in rat(), b in rat(), c in rat()) {
        let (x, y, z) = (Rational::new(a.0, a.1), Rational::new(b.0, b.1), Rational::new(c.0, c.1));
        let (bx, by, bz) = (big(&x), big(&y), big(&z));
        prop_assert_eq!(big(&(&x + &y)), &bx + &by);
        prop_assert_eq!(big(&(&x - &y)), &bx - &by);
        prop_assert_eq!(big(&(&x * &y)), &bx * &by);
        if !y.is_zero() {
            prop_assert_eq!(big(&(&x / &y)), &bx / &by);
        }
        prop_assert_eq!(big(&x.sub_mul(&y, &z)), &bx - &by * &bz);
        prop_assert_eq!(x.cmp(&y), bx.cmp(&by));
        prop_assert_eq!(x.to_string().parse::<Rational>().unwrap(), x.clone());
        prop_assert_eq!(x.floor(), bx.floor().to_integer());
        prop_assert_eq!(Rational::from_bigint(BigInt::from(a.0)), Rational::from_int(a.0));
    }
}

proptest! {
    #![proptest_config(config(48, 12))]

    #[test]
    fn lp_optima_satisfy_depth_bounds(pick in 0usize..1000, seed in any::<u64>()) {
        let tops = small_topologies(6);
        let u = &tops[pick % tops.len()];
        let m = build_primal(u);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = solve(&m, &random_objective(&m, &mut rng), Sense::Min).unwrap();
        prop_assert_eq!(r.status, Status::Optimal);
        let d = m.d_part(&r.point);
        prop_assert!(all_subsets_ok(&d));
        prop_assert_eq!(depth_bounds_violation(&d), None);
        for k in 1..=3 {
            prop_assert!(small_depth_count_ok(&d, k));
        }
    }

    #[test]
    fn roundings_within_twice_the_depths(pick in 0usize..1000, seed in any::<u64>()) {
        let mut tops = small_topologies(6);
        tops.push(sttlp::topology::catalog("U_7_3").unwrap());
        let u = &tops[pick % tops.len()];
        let m = build_primal(u);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = solve(&m, &random_objective(&m, &mut rng), Sense::Min).unwrap().point;
        let d = m.d_part(&p);
        let all = round_all(&m, u, &p, DEFAULT_ROUND_BUDGET).unwrap();
        prop_assert!(!all.outcomes.is_empty());
        for o in &all.outcomes {
            for (t, x) in o.depths.iter().zip(&d) {
                prop_assert!(*t <= x * qi(2), "{:?} vs {:?}", o.depths, d);
            }
        }
    }

    #[test]
    fn integer_points_are_dominated_by_roundings(pick in 0usize..1000, seed in any::<u64>()) {
        let tops = small_topologies(6);
        let u = &tops[pick % tops.len()];
        let m = build_primal(u);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut points = vec![inflated_tree_point(u, &m, &mut rng)];
        if u.n() >= 3 {
            points.push(construct_nontree_vertex(u, NonTreeKind::CyclicAncestry, seed).unwrap());
        }
        for p in points {
            prop_assert!(m.is_feasible(&p));
            let d = m.d_part(&p);
            let all = round_all(&m, u, &p, DEFAULT_ROUND_BUDGET).unwrap();
            prop_assert!(!all.outcomes.is_empty());
            for o in &all.outcomes {
                prop_assert!(o.depths.iter().zip(&d).all(|(t, x)| t <= x), "{:?} vs {:?}", o.depths, d);
            }
        }
    }

    #[test]
    fn optimal_trees_keep_heavy_nodes_shallow(pick in 0usize..1000, seed in any::<u64>()) {
        let tops = small_topologies(7);
        let u = &tops[pick % tops.len()];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w: Vec<Rational> = (0..u.n()).map(|_| qi(rng.gen_range(1..50))).collect();
        let s: Rational = w.iter().sum();
        let best = best_stt(u, &w).unwrap();
        for (d, f) in best.tree.depths().iter().zip(&w) {
            prop_assert!((d + qi(1)) * f <= s);
        }
    }
}

#[test]
fn extension_feasible_and_projects_back() {
    let tops = small_topologies(6);
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for case in 0..20 {
        let u = &tops[rng.gen_range(0..tops.len())];
        let m = build_primal(u);
        let p = solve(&m, &random_objective(&m, &mut rng), Sense::Min).unwrap().point;
        let ext = if rng.gen_bool(0.5) {
            Extension::LeafAt(rng.gen_range(0..u.n()))
        } else {
            let (a, b) = u.edges()[rng.gen_range(0..u.edges().len())];
            Extension::Subdivide(a, b)
        };
        let (v, q) = extend_vertex(&p, u, ext).unwrap();
        let m2 = build_primal(&v);
        assert!(m2.check_feasible(&q).unwrap().is_empty(), "case {case}");
        assert_eq!(project(&m2, &m, &q), p, "case {case}");
    }
}

#[test]
fn products_of_vertices_are_vertices() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for case in 0..10 {
        let k = rng.gen_range(2..=3);
        let mut parts = Vec::new();
        let mut attach = Vec::new();
        for _ in 0..k {
            let n = rng.gen_range(1..=3);
            let t = if rng.gen_bool(0.5) { Topology::path(n) } else { Topology::star(n) };
            let m = build_primal(&t);
            let p = solve(&m, &random_objective(&m, &mut rng), Sense::Min).unwrap().point;
            attach.push(rng.gen_range(0..n));
            parts.push((t, p));
        }
        let tops: Vec<Topology> = parts.iter().map(|(t, _)| t.clone()).collect();
        let c = combine(&tops, &attach).unwrap();
        let p = product_vertex(&parts, &c).unwrap();
        let m = build_primal(&c.topology);
        assert!(is_vertex(&m, &p).unwrap(), "case {case}");
    }
}

#[test]
fn product_of_two_singletons_is_the_centered_path() {
    let one = Topology::path(1);
    let m1 = build_primal(&one);
    let p1 = solve(&m1, &m1.d_objective(&[qi(1)]), Sense::Min).unwrap().point;
    let c = combine(&[one.clone(), one.clone()], &[0, 0]).unwrap();
    let p = product_vertex(&[(one.clone(), p1.clone()), (one, p1)], &c).unwrap();
    let m = build_primal(&c.topology);
    let t = enumerate_stts(&c.topology).into_iter().find(|t| t.root() == c.center).unwrap();
    assert_eq!(p, m.stt_point(&c.topology, &t));
}

#[test]
fn fractional_parts_give_fractional_product_vertex() {
    let (u, _, half) = partially_integer_example();
    let one = Topology::path(1);
    let m1 = build_primal(&one);
    let p1 = solve(&m1, &m1.d_objective(&[qi(1)]), Sense::Min).unwrap().point;
    let c = combine(&[u.clone(), one.clone()], &[5, 0]).unwrap();
    let p = product_vertex(&[(u, half), (one, p1)], &c).unwrap();
    let mc = build_primal(&c.topology);
    assert!(mc.is_feasible(&p));
    assert!(is_vertex(&mc, &p).unwrap());
    assert_eq!(max_denominator_u64(&p), 2);
}

#[test]
fn stt_certificates_verify() {
    let tops = small_topologies(5);
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..20 {
        let u = &tops[rng.gen_range(0..tops.len())];
        let trees = enumerate_stts(u);
        let t = &trees[rng.gen_range(0..trees.len())];
        certify_stt_vertex(u, t).unwrap();
    }
}

#[test]
fn strong_duality_on_random_instances() {
    let tops = small_topologies(6);
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    for case in 0..50 {
        let u = &tops[rng.gen_range(0..tops.len())];
        let f: Vec<Rational> = (0..u.n()).map(|_| qi(rng.gen_range(0..20))).collect();
        let pm = build_primal(u);
        let p = solve(&pm, &pm.d_objective(&f), Sense::Min).unwrap();
        let dm = build_dual(u, &f).unwrap();
        let (sense, obj) = dm.objective.clone().unwrap();
        let d = solve(&dm, &obj, sense).unwrap();
        assert_eq!(p.value, d.value, "case {case} on {}", u.label());
    }
}

#[test]
fn weak_duality_audit_on_optimal_pairs() {
    let tops = small_topologies(6);
    let mut rng = ChaCha8Rng::seed_from_u64(25);
    for case in 0..20 {
        let u = &tops[rng.gen_range(0..tops.len())];
        let f: Vec<Rational> = (0..u.n()).map(|_| qi(rng.gen_range(0..20))).collect();
        let dm = build_dual(u, &f).unwrap();
        let (sense, obj) = dm.objective.clone().unwrap();
        let y = solve(&dm, &obj, sense).unwrap().point;
        let best = best_stt(u, &f).unwrap();
        let a = audit_weak_duality(u, &best.tree, &dm, &y, &f).unwrap();
        assert!(a.holds(), "case {case}");
        let dual_sum: Rational = a.steps.iter().map(|s| s.dual.clone()).sum();
        let primal_sum: Rational = a.steps.iter().map(|s| s.primal.clone()).sum();
        assert_eq!(dual_sum, a.dual_value);
        assert_eq!(primal_sum, a.primal_value);
        // both optimal here, so every step is tight
        assert!(a.equality_chain, "case {case}");
    }
    let u = Topology::path(3);
    let f = vec![qi(3), qi(1), qi(2)];
    let dm = build_dual(&u, &f).unwrap();
    let zero = vec![Rational::zero(); dm.num_vars()];
    let t = best_stt(&u, &f).unwrap().tree;
    let a = audit_weak_duality(&u, &t, &dm, &zero, &f).unwrap();
    assert!(a.holds());
    assert!(a.steps.iter().all(|s| s.slack == s.primal));
}

#[test]
fn star_formula_matches_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(26);
    for _ in 0..100 {
        let n = rng.gen_range(2..=7);
        let w: Vec<Rational> = (0..n).map(|_| qi(rng.gen_range(0..30))).collect();
        let (t, cost) = optimal_star_stt(&w[0], &w[1..]).unwrap();
        let u = Topology::star(n);
        let best = best_stt(&u, &w).unwrap();
        let s: Rational = w.iter().sum();
        assert_eq!(cost, &best.value + &s);
        assert_eq!(sttlp::stt::cost(&t, &w).unwrap(), cost);
    }
}

#[test]
fn scans_do_not_depend_on_parallelism() {
    for name in ["U_5_0", "U_6_3"] {
        let u = sttlp::topology::catalog(name).unwrap();
        let a = scan(&u, &ScanOptions::default()).unwrap();
        let b = scan(&u, &ScanOptions { parallelism: Parallelism::Sequential, ..ScanOptions::default() }).unwrap();
        assert_eq!(a.tsv_row(), b.tsv_row());
        assert_eq!(a.known, b.known);
    }
}

#[test]
fn path3_has_four_nontree_vertices() {
    let u = Topology::path(3);
    let m = build_primal(&u);
    let vs = sttlp::polytope::enumerate_vertices(&m).unwrap();
    let trees = enumerate_stts(&u).len();
    assert_eq!(vs.len(), 9);
    assert!(vs.len() > trees);
    assert_eq!(vs.len() - trees, 4);
}
