use criterion::{black_box, criterion_group, criterion_main, Criterion};
use gptd_bench::{built, one_circuit};
use gptd_core::distinguish::{is_jpd, symmetric_error};

fn jpd_and_error(c: &mut Criterion) {
    for n in [3, 4, 5] {
        let out = built(&one_circuit(n));
        let all = out.vertex_positions.clone();
        let pair = &all[..2];
        c.bench_function(&format!("is_jpd full set n={n}"), |b| {
            b.iter(|| is_jpd(black_box(&out.space), black_box(&all)).unwrap())
        });
        c.bench_function(&format!("is_jpd pair n={n}"), |b| {
            b.iter(|| is_jpd(black_box(&out.space), black_box(pair)).unwrap())
        });
        c.bench_function(&format!("symmetric_error full set n={n}"), |b| {
            b.iter(|| symmetric_error(black_box(&out.space), black_box(&all)).unwrap())
        });
    }
}

criterion_group!(benches, jpd_and_error);
criterion_main!(benches);
