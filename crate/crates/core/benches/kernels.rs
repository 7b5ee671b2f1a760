//! Parallel kernels against their sequential counterparts.
//!
//! With the default `parallel` feature each kernel runs on the global rayon
//! pool and on a one-thread pool. `cargo bench --no-default-features` runs the
//! plain sequential fallback under the `sequential` label.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use ainfty::ainfty::examples::{poset, z2_resolution};
use ainfty::ainfty::{check_relations, AInfty, Elem, TableCategory};
use ainfty::coefficients::{Ring, Scalar};
use ainfty::functors::gauged_contractible_ideal;
use ainfty::localization::verify_right_inverse;
use ainfty::nerve::ainfty_nerve;
use ainfty::twisted::with_cones;

fn units(c: &TableCategory) -> Vec<Elem> {
    (0..c.num_objects()).map(|x| c.unit(x).unwrap()).collect()
}

#[cfg(feature = "parallel")]
fn modes() -> Vec<(&'static str, Option<rayon::ThreadPool>)> {
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    vec![("rayon", None), ("rayon-1-thread", Some(one))]
}

#[cfg(feature = "parallel")]
fn run<R: Send>(pool: &Option<rayon::ThreadPool>, f: impl FnOnce() -> R + Send) -> R {
    match pool {
        Some(p) => p.install(f),
        None => f(),
    }
}

#[cfg(not(feature = "parallel"))]
fn modes() -> Vec<(&'static str, Option<()>)> {
    vec![("sequential", None)]
}

#[cfg(not(feature = "parallel"))]
fn run<R>(_: &Option<()>, f: impl FnOnce() -> R) -> R {
    f()
}

fn relations(c: &mut Criterion) {
    let base = gauged_contractible_ideal(Ring::Rationals);
    let mut us = units(&base);
    us.push(Elem::new(0, 0, vec![(0, Scalar::ONE), (2, Scalar::ONE)]));
    let tw = with_cones(base, &us).unwrap();
    let mut g = c.benchmark_group("check_relations_tw_l4_sampled");
    g.sample_size(10);
    for (label, pool) in modes() {
        g.bench_function(BenchmarkId::from_parameter(label), |b| b.iter(|| run(&pool, || black_box(check_relations(&tw, 4, Some(3000)).passed()))));
    }
    g.finish();
}

fn nerve(c: &mut Criterion) {
    let a = poset(Ring::PrimeField(3), 3);
    let nv = ainfty_nerve(&a, 3).unwrap();
    let mut g = c.benchmark_group("nerve_truncate_dim3");
    g.sample_size(10);
    for (label, pool) in modes() {
        g.bench_function(BenchmarkId::from_parameter(label), |b| b.iter(|| run(&pool, || black_box(nv.truncate(200_000).unwrap().counts()))));
    }
    g.finish();
}

fn right_inverse(c: &mut Criterion) {
    let a = z2_resolution(Ring::Integers);
    let us = units(&a);
    let mut g = c.benchmark_group("right_inverse_l3");
    g.sample_size(10);
    for (label, pool) in modes() {
        g.bench_function(BenchmarkId::from_parameter(label), |b| b.iter(|| run(&pool, || black_box(verify_right_inverse(&a, &us, 3, -2, 1).unwrap().pairs.len()))));
    }
    g.finish();
}

criterion_group!(benches, relations, nerve, right_inverse);
criterion_main!(benches);
