//! Parallel pool against a single worker on the data-parallel hot spots.
//! Build with `--no-default-features` to measure the plain sequential loops.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use cartan::families::TruncatedAlgebra;
use cartan::homsolver::SigmaParam;
use cartan::par;
use cartan::verify::{run_suite, SuiteParams};
use cartan::{Family, FamilyConfig};

fn workers() -> Vec<(&'static str, usize)> {
    let all = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1);
    vec![("single", 1), ("pool", all)]
}

fn jacobi_samples(c: &mut Criterion) {
    let cfg = FamilyConfig::new(Family::K, 5, 4).unwrap();
    let params = SuiteParams {
        samples: 100,
        ..SuiteParams::default()
    };
    let mut g = c.benchmark_group("jacobi K(5,4) x100");
    g.sample_size(10);
    for (name, n) in workers() {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| par::with_threads(n, || run_suite("jacobi", &cfg, &params).unwrap()))
        });
    }
    g.finish();
}

fn structure_constants(c: &mut Criterion) {
    let cfg = FamilyConfig::new(Family::HO, 4, 4).unwrap();
    let mut g = c.benchmark_group("structure constants HO(4,4) to degree 1");
    g.sample_size(10);
    for (name, n) in workers() {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                par::with_threads(n, || {
                    TruncatedAlgebra::components(&cfg, 1)
                        .unwrap()
                        .with_structure_constants()
                        .unwrap()
                })
            })
        });
    }
    g.finish();
}

fn constraint_solve(c: &mut Criterion) {
    let cfg = FamilyConfig::new(Family::H, 4, 2).unwrap();
    let param = SigmaParam::new(&cfg, -1..=0, 2).unwrap();
    let triples = param.all_triples();
    let mut g = c.benchmark_group("hom constraints H(4,2)");
    g.sample_size(10);
    for (name, n) in workers() {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| par::with_threads(n, || param.solve(&triples)))
        });
    }
    g.finish();
}

criterion_group!(
    benches,
    jacobi_samples,
    structure_constants,
    constraint_solve
);
criterion_main!(benches);
