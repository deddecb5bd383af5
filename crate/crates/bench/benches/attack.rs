use cayley_affine::attack::{recover_exponents, second_preimage};
use cayley_affine::forge::end_to_end_break;
use cayley_affine::{bits, presets, product_map, HashParams};
use cayley_affine_bench::desk_target;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

fn recovery(c: &mut Criterion) {
    let p = presets::safe512();
    let mut group = c.benchmark_group("recover_exponents/safe512");
    for len in [10_000usize, 100_000, 1_000_000] {
        let b = len / 3;
        let r = &p.element(2u32).pow_u64((len - b) as u64) * &p.element(3u32).pow_u64(b as u64);
        group.bench_with_input(BenchmarkId::from_parameter(len), &r, |bench, r| {
            bench.iter(|| recover_exponents(black_box(r), len).unwrap())
        });
    }
    group.finish();
}

fn desk_attacks(c: &mut Criterion) {
    let p = presets::safe36();
    let (target, len) = desk_target(&p, 1);
    c.bench_function("second_preimage/safe36", |b| {
        b.iter(|| second_preimage(black_box(&target), len, 7).unwrap())
    });

    let g = product_map(&bits("10110"), &p).inverse().unwrap();
    let params = HashParams::with_defaults(p, 8, g).unwrap();
    c.bench_function("forge/safe36/L=4096", |b| {
        b.iter(|| end_to_end_break(black_box(&params), 4096, 1).unwrap())
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = recovery, desk_attacks
}
criterion_main!(benches);
