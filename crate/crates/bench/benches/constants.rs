use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use radbound_bench::spec;
use radbound_core::bounds::HPairing;
use radbound_core::constants::{combined_constants, sobolev_best, trace_best};
use radbound_core::{evaluate, Operation};
use std::hint::black_box;

fn closed_forms(c: &mut Criterion) {
    c.bench_function("sobolev_best", |b| b.iter(|| sobolev_best(black_box(1.7), black_box(3))));
    c.bench_function("trace_best", |b| b.iter(|| trace_best(black_box(1.7), black_box(3))));
    c.bench_function("combined_constants", |b| {
        b.iter(|| combined_constants(black_box(1.7), 3.0, 3, black_box(0.8), 2.5))
    });
}

fn bound_operations(c: &mut Criterion) {
    let mut group = c.benchmark_group("evaluate");
    // The plane bounds pick their free parameters by a 1-D search, so they
    // dominate this group.
    let ops = [
        ("energy", Operation::Energy { pairing: HPairing::DualOfEll }),
        ("de_giorgi", Operation::DeGiorgi),
        ("moser", Operation::Moser { u_norm: 1.0 }),
        ("c_infinity", Operation::CInfinity),
    ];
    let s = spec("lin-fvec-bottom-top", &ops.clone().map(|(_, op)| op));
    for (name, op) in ops {
        group.bench_with_input(BenchmarkId::from_parameter(name), &op, |b, op| {
            b.iter(|| evaluate(black_box(&s), op).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, closed_forms, bound_operations);
criterion_main!(benches);
