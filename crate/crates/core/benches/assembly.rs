use std::collections::BTreeMap;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hotspots_core::fem_scalar::assemble_full;
use hotspots_core::fem_vector::assemble_vector_with;
use hotspots_core::geometry::{builtin_domain, Builtin};
use hotspots_core::mesh::generate_mesh;
use hotspots_core::par::Exec;

fn policies(c: &mut Criterion) {
    let cube = builtin_domain(&Builtin::from_name("cube", &BTreeMap::new()).unwrap()).unwrap();
    let mesh = generate_mesh(&cube, 1.0 / 16.0).unwrap();
    let (k, _) = assemble_full(&mesh, Exec::Sequential);
    let x: Vec<f64> = (0..k.nrows).map(|i| (i as f64).sin()).collect();
    let mut y = vec![0.0; k.nrows];

    let mut g = c.benchmark_group("cube_h16");
    g.sample_size(20);
    for (name, exec) in [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)] {
        g.bench_with_input(BenchmarkId::new("scalar_assembly", name), &exec, |b, &e| {
            b.iter(|| assemble_full(&mesh, e))
        });
        g.bench_with_input(BenchmarkId::new("vector_assembly", name), &exec, |b, &e| {
            b.iter(|| assemble_vector_with(&mesh, e).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("matvec", name), &exec, |b, &e| {
            b.iter(|| k.matvec_with(e, &x, &mut y))
        });
    }
    g.finish();
}

criterion_group!(benches, policies);
criterion_main!(benches);
