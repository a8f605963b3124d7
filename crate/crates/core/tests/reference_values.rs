mod common;

use std::collections::BTreeSet;

use common::{ints, path3_row, rats, CATALOG_STATS, PATH3_VERTICES};
use sttlp::analysis::*;
use sttlp::lpmodel::*;
use sttlp::normals::{scan, ScanOptions};
use sttlp::parallel::Parallelism;
use sttlp::polytope::{dominance_hull_facets, enumerate_vertices};
use sttlp::rational::{q, qi, Rational};
use sttlp::simplex::{is_vertex, lexmin_face, solve};
use sttlp::stt::{best_stt, count_stts, stt_depth_vectors};
use sttlp::topology::{catalog, catalog_entry, Extension, Topology};

#[test]
fn stt_counts_per_catalog_tree() {
    for &(n, i, stts, ..) in CATALOG_STATS {
        let u = catalog_entry(n, i).unwrap();
        assert_eq!(count_stts(&u), stts, "({n},{i})");
    }
}

#[test]
fn primary_direction_counts_up_to_six_nodes() {
    for &(n, i, _, dirs, ..) in CATALOG_STATS.iter().filter(|r| r.0 <= 6) {
        let u = catalog_entry(n, i).unwrap();
        let f = dominance_hull_facets(&stt_depth_vectors(&u)).unwrap();
        assert_eq!(f.len(), dirs, "({n},{i})");
    }
}

#[test]
fn no_false_facets_up_to_six_nodes() {
    for &(n, i, ..) in CATALOG_STATS.iter().filter(|r| r.0 <= 6) {
        let u = catalog_entry(n, i).unwrap();
        let r = scan(&u, &ScanOptions::default()).unwrap();
        assert_eq!(r.false_facet_count, 0, "({n},{i})");
        assert!(r.is_closed());
    }
}

#[test]
fn long_star_counterexample() {
    let u = catalog("U_7_3").unwrap();
    let w = ints(&[3, 2, 0, 2, 3, 3, 10]);
    let m = build_primal(&u);
    let d_vars: Vec<usize> = (0..7).map(|i| m.idx(Var::D(i))).collect();
    let r = lexmin_face(&m, &m.d_objective(&w), &d_vars).unwrap();
    assert_eq!(r.value, q(59, 2));
    assert_eq!(m.d_part(&r.point), rats("2,2,9/2,2,2,3/2,1/2"));
    assert_eq!(best_stt(&u, &w).unwrap().value, qi(30));
    // costs with root depth one
    let s: Rational = w.iter().sum();
    assert_eq!((qi(30) + &s) / (q(59, 2) + &s), q(106, 105));
}

#[test]
fn path3_vertex_list() {
    let u = Topology::path(3);
    let m = build_primal(&u);
    let got: BTreeSet<Point> = enumerate_vertices(&m).unwrap().into_iter().collect();
    let want: BTreeSet<Point> = PATH3_VERTICES.iter().map(|b| path3_row(*b)).collect();
    assert_eq!(got, want);
    let stts: BTreeSet<Point> = sttlp::stt::enumerate_stts(&u).iter().map(|t| m.stt_point(&u, t)).collect();
    assert_eq!(stts.len(), 5);
    assert!(stts.is_subset(&got));
}

#[test]
fn lca_abuse_vertices_vanish_without_z() {
    let u = Topology::path(3);
    let m = build_primal(&u);
    let ze = build_z_eliminated_explicit(&u).unwrap();
    assert_eq!(enumerate_vertices(&ze).unwrap().len(), 7);
    for bits in [PATH3_VERTICES[3], PATH3_VERTICES[4]] {
        let p = path3_row(bits);
        assert!(is_vertex(&m, &p).unwrap());
        assert!(!is_vertex(&ze, &project(&m, &ze, &p)).unwrap());
    }
    for bits in [PATH3_VERTICES[1], PATH3_VERTICES[8]] {
        let p = path3_row(bits);
        assert!(is_vertex(&ze, &project(&m, &ze, &p)).unwrap());
    }
}

#[test]
fn nontree_constructions_on_path3() {
    let u = Topology::path(3);
    let c = construct_nontree_vertex(&u, NonTreeKind::CyclicAncestry, 0).unwrap();
    let a = construct_nontree_vertex(&u, NonTreeKind::LcaAbuse, 0).unwrap();
    let known: BTreeSet<Point> = PATH3_VERTICES.iter().map(|b| path3_row(*b)).collect();
    assert!(known.contains(&c));
    assert!(known.contains(&a));
    assert_eq!(a, path3_row([0, 1, 1, 0, 1, 0, 0]));
}

#[test]
fn small_example_dual() {
    let u = Topology::path(3);
    let f = ints(&[3, 1, 2]);
    let dm = build_dual(&u, &f).unwrap();
    let (sense, obj) = dm.objective.clone().unwrap();
    assert_eq!(solve(&dm, &obj, sense).unwrap().value, qi(4));
    // R = (1, 2, 1) with the extreme Q splits
    for (q123, q321) in [(2, 0), (1, 1), (2, 1)] {
        let p = dm.parse_point(&format!("R1_2=1\nR1_3=2\nR2_3=1\nQ1_2_3={q123}\nQ3_2_1={q321}\n")).unwrap();
        assert!(dm.is_feasible(&p), "{q123} {q321}");
    }
    let p = dm.parse_point("R1_2=1\nR1_3=2\nR2_3=1\nQ1_2_3=3\nQ3_2_1=0\n").unwrap();
    assert!(!dm.is_feasible(&p));
    // f = (2,1,2): the split is forced
    let f2 = ints(&[2, 1, 2]);
    let d2 = build_dual(&u, &f2).unwrap();
    let ok = d2.parse_point("R1_2=1\nR1_3=2\nR2_3=1\nQ1_2_3=1\nQ3_2_1=1\n").unwrap();
    assert!(d2.is_feasible(&ok));
    for bad in ["Q1_2_3=2\nQ3_2_1=0", "Q1_2_3=0\nQ3_2_1=2"] {
        let p = d2.parse_point(&format!("R1_2=1\nR1_3=2\nR2_3=1\n{bad}\n")).unwrap();
        assert!(!d2.is_feasible(&p));
    }
}

#[test]
fn heavy_root_assignment_is_tight() {
    let u = Topology::path(4);
    let f = ints(&[10, 1, 2, 3]);
    let dm = build_dual(&u, &f).unwrap();
    let mut text = String::new();
    for i in 1..4 {
        text.push_str(&format!("R1_{}={}\n", i + 1, f[i]));
        for j in i + 1..4 {
            text.push_str(&format!("Q1_{}_{}={}\n", i + 1, j + 1, f[j]));
        }
    }
    let y = dm.parse_point(&text).unwrap();
    let best = best_stt(&u, &f).unwrap();
    assert_eq!(best.tree.root(), 0);
    let audit = audit_weak_duality(&u, &best.tree, &dm, &y, &f).unwrap();
    assert!(audit.holds());
    let root_step = audit.steps.iter().find(|s| s.node == 0).unwrap();
    assert!(root_step.slack.is_zero());
}

#[test]
fn partially_integer_vertex() {
    let (u, m, p) = partially_integer_example();
    assert!(m.check_feasible(&p).unwrap().is_empty());
    assert!(is_vertex(&m, &p).unwrap());
    assert!(detect_partially_integer(&m, &p));
    let d = m.d_part(&p);
    assert_eq!(d, ints(&[2, 2, 2, 1, 1, 3]));
    let stt = ints(&[2, 1, 2, 0, 1, 2]);
    assert!(stt_depth_vectors(&u).contains(&stt));
    assert!(stt.iter().zip(&d).all(|(a, b)| a <= b));
}

#[test]
fn extension_keeps_the_gap() {
    let u = catalog("U_7_3").unwrap();
    let w = ints(&[3, 2, 0, 2, 3, 3, 10]);
    let m = build_primal(&u);
    let d_vars: Vec<usize> = (0..7).map(|i| m.idx(Var::D(i))).collect();
    let p = lexmin_face(&m, &m.d_objective(&w), &d_vars).unwrap().point;
    let (v, p2) = extend_vertex(&p, &u, Extension::LeafAt(2)).unwrap();
    assert_eq!(sttlp::topology::identify(&v).as_deref(), Some("U_8_11"));
    let m2 = build_primal(&v);
    assert_eq!(project(&m2, &m, &p2), p);
    let mut h = w.clone();
    h.push(qi(0));
    assert_eq!(solve(&m2, &m2.d_objective(&h), Sense::Min).unwrap().value, q(59, 2));
    assert_eq!(best_stt(&v, &h).unwrap().value, qi(30));
}

#[test]
fn sampled_denominators_on_paths() {
    let xd = sample_directions(&Topology::path(6), ModelFlavor::Primal, DirectionFlavor::Xd, 200, 7, Parallelism::Auto)
        .unwrap();
    assert_eq!(xd.denominators, BTreeSet::from([1, 2]));
    let xzd =
        sample_directions(&Topology::path(8), ModelFlavor::Primal, DirectionFlavor::Xzd, 200, 7, Parallelism::Auto)
            .unwrap();
    assert!(xzd.denominators.iter().any(|&d| d >= 3));
}

#[test]
fn star_vertices_are_integer() {
    for n in 3..=5 {
        assert!(star_integrality_check(n).unwrap(), "star {n}");
    }
}

#[test]
fn long_star_model_sizes() {
    let m = build_primal(&catalog("U_7_3").unwrap());
    let count = |f: fn(&Var) -> bool| m.vars().iter().filter(|v| f(v)).count();
    assert_eq!(count(|v| matches!(v, Var::X(..))), 42);
    assert_eq!(count(|v| matches!(v, Var::Z(..))), 27);
    assert_eq!(count(|v| matches!(v, Var::D(_))), 7);
    // the fixture names only the half-valued Z entries
    let p = m.parse_point(common::LONG_STAR_VERTEX).unwrap();
    let halves = m.vars().iter().zip(&p).filter(|(v, x)| matches!(v, Var::Z(..)) && **x == q(1, 2)).count();
    assert_eq!(halves, 13);
}
