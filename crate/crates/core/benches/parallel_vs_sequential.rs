//! Element-parallel kernels on one thread versus the full pool.
//!
//! Without the `parallel` feature only the sequential fallback is measured.

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use femcert::certify::{certify_mesh, CertifyConfig, LoadNorms};
use femcert::constants::{constants_atlas, ConstantId};
use femcert::femcore::ScalarField;
use femcert::trimesh::generate_friedrichs_keller;

fn certify_once(n: usize) -> f64 {
    let mesh = generate_friedrichs_keller(n).unwrap();
    let f = ScalarField::sin_sin();
    let d = f.norms().unwrap();
    let norms = LoadNorms { l2: d.l2, h1_semi: Some(d.h1_semi) };
    let exact = ScalarField::sin_sin_solution();
    let run = certify_mesh(&mesh, &f, Some(&exact), norms, &CertifyConfig::default()).unwrap();
    run.report.apost_flux
}

fn atlas_once() -> usize {
    let alphas = [0.2, 0.4, 0.6, 0.8, 1.0];
    let entries = constants_atlas(&[ConstantId::C0, ConstantId::C12], &alphas, std::f64::consts::FRAC_PI_2, 16, 6);
    entries.iter().filter(|e| e.result.is_ok()).count()
}

type Workload = (&'static str, Box<dyn Fn() -> f64 + Send + Sync>);

fn workloads() -> Vec<Workload> {
    vec![
        ("certify_fk32", Box::new(|| certify_once(32))),
        ("certify_fk64", Box::new(|| certify_once(64))),
        ("atlas_c0_c12", Box::new(|| atlas_once() as f64)),
    ]
}

#[cfg(feature = "parallel")]
fn bench(c: &mut Criterion) {
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let full = rayon::ThreadPoolBuilder::new().build().unwrap();
    eprintln!("default pool: {} threads", full.current_num_threads());
    let mut group = c.benchmark_group("parallel_vs_sequential");
    group.sample_size(10);
    for (name, work) in workloads() {
        group.bench_function(BenchmarkId::new("single_thread", name), |b| b.iter(|| single.install(|| black_box(work()))));
        group.bench_function(BenchmarkId::new("default_pool", name), |b| b.iter(|| full.install(|| black_box(work()))));
    }
    group.finish();
}

#[cfg(not(feature = "parallel"))]
fn bench(c: &mut Criterion) {
    let mut group = c.benchmark_group("parallel_vs_sequential");
    group.sample_size(10);
    for (name, work) in workloads() {
        group.bench_function(BenchmarkId::new("sequential", name), |b| b.iter(|| black_box(work())));
    }
    group.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
