//! Microbenchmarks for the hot kernels: pair predicates, the filtered-ratio
//! scan, grid evaluation, GF(2) information-set enumeration and the n = 3
//! searches.

use criterion::{black_box, criterion_group, criterion_main, Criterion};
use sandglass_core::bounds::filtered_condition_check;
use sandglass_core::certify::{grid_certify, GridFunction, GridSpec};
use sandglass_core::f2code::F2Matrix;
use sandglass_core::search::{bnb_max_product, exhaustive_max_product, PairKind};
use sandglass_core::setfam::{PairOfFamilies, Side};

fn bench_predicates(c: &mut Criterion) {
    let t3 = PairOfFamilies::triangle_power(3).unwrap();
    c.bench_function("is_recovering/triangle_p3", |b| {
        b.iter(|| black_box(&t3).is_recovering())
    });
    c.bench_function("is_cancellative_both/triangle_p3", |b| {
        b.iter(|| black_box(&t3).is_cancellative(Side::Both))
    });
}

fn bench_filtered_check(c: &mut Criterion) {
    let t2 = PairOfFamilies::triangle_power(2).unwrap();
    c.bench_function("filtered_condition_check/triangle_p2", |b| {
        b.iter(|| filtered_condition_check(black_box(&t2), 2.222).unwrap())
    });
}

fn bench_grid(c: &mut Criterion) {
    let spec = GridSpec::new(
        GridFunction::GStar { theta: 2.222 },
        500,
        25.0,
        2.2499f64.log2(),
    )
    .unwrap();
    c.bench_function("grid_certify/g_star_k500", |b| {
        b.iter(|| grid_certify(black_box(&spec)).unwrap())
    });
}

fn bench_information_sets(c: &mut Criterion) {
    let m = F2Matrix::random(16, 5, 1).unwrap();
    c.bench_function("information_sets/16x11", |b| {
        b.iter(|| black_box(&m).enumerate_information_sets().unwrap())
    });
}

fn bench_search(c: &mut Criterion) {
    c.bench_function("exhaustive_max_product/n3_recovering", |b| {
        b.iter(|| exhaustive_max_product(3, PairKind::Recovering).unwrap())
    });
    c.bench_function("bnb_max_product/n3_cancellative", |b| {
        b.iter(|| bnb_max_product(3, PairKind::Cancellative, u64::MAX, None).unwrap())
    });
}

criterion_group!(
    benches,
    bench_predicates,
    bench_filtered_check,
    bench_grid,
    bench_information_sets,
    bench_search
);
criterion_main!(benches);
