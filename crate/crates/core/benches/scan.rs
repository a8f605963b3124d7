use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use sttlp::analysis::{sample_directions, DirectionFlavor, ModelFlavor};
use sttlp::normals::{scan, ScanOptions};
use sttlp::parallel::Parallelism;
use sttlp::topology::{catalog, Topology};

const MODES: [(&str, Parallelism); 2] = [("parallel", Parallelism::Auto), ("sequential", Parallelism::Sequential)];

fn normals_scan(c: &mut Criterion) {
    let mut g = c.benchmark_group("normals_scan");
    g.sample_size(10);
    for name in ["U_6_3", "U_6_5"] {
        let u = catalog(name).unwrap();
        for (mode, par) in MODES {
            let opts = ScanOptions { parallelism: par, ..ScanOptions::default() };
            g.bench_with_input(BenchmarkId::new(mode, name), &u, |b, u| b.iter(|| scan(u, &opts).unwrap()));
        }
    }
    g.finish();
}

fn direction_sampling(c: &mut Criterion) {
    let mut g = c.benchmark_group("sample_directions");
    g.sample_size(10);
    let u = Topology::path(7);
    for (mode, par) in MODES {
        g.bench_function(BenchmarkId::new(mode, "path-7"), |b| {
            b.iter(|| sample_directions(&u, ModelFlavor::Primal, DirectionFlavor::Xd, 40, 3, par).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, normals_scan, direction_sampling);
criterion_main!(benches);
