use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use starved_core::compositions::enumerate;
use starved_core::example::tetra_poly;
use starved_core::polynomials::{pi_u, roots_of, DEFAULT_CLUSTER_TOL};
use starved_core::stratify::{brute_force_occurring_with, build_lattice, compute_u_with, run_algorithm, verify_lattice_properties};
use starved_core::subresultants::{count_distinct_roots, subdiscriminants, subdiscriminants_exact};
use starved_core::{Composition, Config, GridSpec, MonicPoly, OccurrenceTable, Sampler, StratumSolver};

fn spread(d: usize) -> Vec<f64> {
    (0..d).map(|i| -2.0 + 4.0 * (i as f64 + 0.3 * (i as f64).sin()) / d as f64).collect()
}

fn poly(x: &[f64], u: &[usize]) -> MonicPoly {
    pi_u(x, &Composition::new(u.to_vec()).unwrap()).unwrap()
}

fn roots(c: &mut Criterion) {
    let mut g = c.benchmark_group("roots_of");
    for (name, u) in [("simple_d8", vec![1; 8]), ("mixed_d8", vec![2, 1, 3, 1, 1]), ("simple_d12", vec![1; 12])] {
        let p = poly(&spread(u.len()), &u);
        g.bench_function(name, |b| b.iter(|| roots_of(black_box(&p), DEFAULT_CLUSTER_TOL)));
    }
    g.finish();
}

fn subdisc(c: &mut Criterion) {
    let mut g = c.benchmark_group("subdiscriminants");
    for d in [4, 8, 12] {
        let p = poly(&spread(d), &vec![1; d]);
        g.bench_with_input(BenchmarkId::new("float", d), &p, |b, p| b.iter(|| subdiscriminants(p)));
        g.bench_with_input(BenchmarkId::new("exact", d), &p, |b, p| b.iter(|| subdiscriminants_exact(p)));
        g.bench_with_input(BenchmarkId::new("count", d), &p, |b, p| b.iter(|| count_distinct_roots(p)));
    }
    g.finish();
}

fn strata(c: &mut Criterion) {
    let f = tetra_poly();
    let mut g = c.benchmark_group("quintic_s2");
    g.sample_size(10);
    g.bench_function("classify_all", |b| {
        b.iter(|| {
            let solver = StratumSolver::new(&f, 2, &Config::default()).unwrap();
            for u in enumerate(5, None, None).unwrap() {
                black_box(solver.classify(&u).unwrap());
            }
        })
    });
    g.bench_function("algorithm", |b| {
        b.iter(|| {
            let solver = StratumSolver::new(&f, 2, &Config::default()).unwrap();
            run_algorithm(&compute_u_with(&solver).unwrap(), 5, 2).unwrap()
        })
    });
    g.bench_function("brute_force", |b| {
        b.iter(|| {
            let solver = StratumSolver::new(&f, 2, &Config::default()).unwrap();
            brute_force_occurring_with(&solver).unwrap()
        })
    });
    g.bench_function("sample_interior_grid30", |b| {
        b.iter(|| {
            let solver = StratumSolver::new(&f, 2, &Config::default()).unwrap();
            Sampler::new(solver, GridSpec::new(30)).sample(&Composition::top(5).unwrap()).unwrap()
        })
    });
    g.finish();
}

fn lattice(c: &mut Criterion) {
    let mut g = c.benchmark_group("composition_lattice");
    g.sample_size(10);
    for d in [6, 8, 10] {
        let occ = OccurrenceTable::new(d, 1, enumerate(d, None, None).unwrap().into_iter().collect()).unwrap();
        g.bench_with_input(BenchmarkId::new("build_and_verify", d), &occ, |b, occ| {
            b.iter(|| verify_lattice_properties(&build_lattice(occ, None).unwrap()))
        });
    }
    g.finish();
}

criterion_group!(benches, roots, subdisc, strata, lattice);
criterion_main!(benches);
