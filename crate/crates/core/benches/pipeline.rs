//! Benchmarks for the swap/filter kernels and the Monte-Carlo driver.
//!
//! `fs_sf_montecarlo/batch` goes through the crate's index-sharded map,
//! which rides the rayon pool under the default `parallel` feature and plain
//! iteration under `--no-default-features`; `fs_sf_montecarlo/sequential`
//! always runs the same workload as a single-threaded loop, so one run shows
//! the parallel speedup and a `--no-default-features` run benchmarks the
//! sequential fallback on equal footing.

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use std::hint::black_box;

use swapcorr_core::bloch::{bell_effect_bloch, state_to_bloch, OperatorBasis};
use swapcorr_core::correlations::report_from_bloch;
use swapcorr_core::ensembles::{
    ginibre_density, random_x_state, rng_stream, EnsembleKind, EnsembleSpec,
};
use swapcorr_core::filtering::klm_normal_form;
use swapcorr_core::oracle::swap_density;
use swapcorr_core::pathways::{montecarlo_xform, run_fs, run_sf};
use swapcorr_core::swapping::swap_bloch;

fn bench_kernels(c: &mut Criterion) {
    let spec = EnsembleSpec::new(EnsembleKind::XForm, 2, 11);
    let x = random_x_state(&spec, 0);
    let r = x.bloch();
    let effect = bell_effect_bloch(2);

    c.bench_function("swap_bloch", |b| {
        b.iter(|| black_box(swap_bloch(black_box(&r), &effect, &r).unwrap()))
    });
    c.bench_function("klm_normal_form", |b| {
        b.iter(|| black_box(klm_normal_form(black_box(&r)).unwrap()))
    });
    c.bench_function("correlation_report", |b| {
        b.iter(|| black_box(report_from_bloch(black_box(&r)).unwrap()))
    });

    let mut rng = rng_stream(12, 0);
    let rho_ab = ginibre_density(4, &mut rng);
    let rho_cd = ginibre_density(4, &mut rng);
    let e_bc = swapcorr_core::bloch::bell_state_density(2);
    c.bench_function("oracle_swap_density", |b| {
        b.iter(|| black_box(swap_density(black_box(&rho_ab), &e_bc, &rho_cd).unwrap()))
    });
    let basis = OperatorBasis::pauli();
    c.bench_function("state_to_bloch", |b| {
        b.iter(|| black_box(state_to_bloch(black_box(&rho_ab), basis).unwrap()))
    });
}

fn bench_montecarlo(c: &mut Criterion) {
    const N: u64 = 2000;
    let mut group = c.benchmark_group("fs_sf_montecarlo");
    group.sample_size(10);

    group.bench_function("batch", |b| {
        b.iter_batched(
            || (),
            |_| black_box(montecarlo_xform(N, 77, 2)),
            BatchSize::PerIteration,
        )
    });

    group.bench_function("sequential", |b| {
        let spec = EnsembleSpec::new(EnsembleKind::XForm, 2, 77);
        let effect = bell_effect_bloch(2);
        b.iter(|| {
            let mut acc = 0.0_f64;
            for i in 0..N {
                let r = random_x_state(&spec, i).bloch();
                let fs = run_fs(&r, &r, &effect).unwrap();
                let sf = run_sf(&r, &r, &effect).unwrap();
                let a = report_from_bloch(&fs.r_ad).unwrap();
                let b = report_from_bloch(&sf).unwrap();
                acc += a.obesity - b.obesity;
            }
            black_box(acc)
        })
    });
    group.finish();
}

criterion_group!(benches, bench_kernels, bench_montecarlo);
criterion_main!(benches);
