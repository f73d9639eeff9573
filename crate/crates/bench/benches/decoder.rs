//! Benchmarks syndrome extraction and exact matching decode at distance 5.

use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;
use surfacenet_core::surface_code::{
    build_layout, decode_mwpm, extract_syndrome, inject_errors,
};

fn decoder_benches(c: &mut Criterion) {
    let layout = build_layout(5).expect("distance 5 is valid");
    let errors = inject_errors(&layout, 0.05, 7).expect("valid probability");
    let syndrome = extract_syndrome(&layout, &errors);

    c.bench_function("extract_syndrome/d5", |b| {
        b.iter(|| black_box(extract_syndrome(&layout, black_box(&errors))))
    });
    c.bench_function("decode_mwpm/d5-p0.05", |b| {
        b.iter(|| decode_mwpm(&layout, black_box(&syndrome)).expect("within matching cap"))
    });
    c.bench_function("inject_extract_decode/d5", |b| {
        let mut seed = 0u64;
        b.iter(|| {
            seed = seed.wrapping_add(1);
            let e = inject_errors(&layout, 0.03, seed).expect("valid probability");
            let s = extract_syndrome(&layout, &e);
            black_box(decode_mwpm(&layout, &s).expect("within matching cap"))
        })
    });
}

criterion_group!(benches, decoder_benches);
criterion_main!(benches);
