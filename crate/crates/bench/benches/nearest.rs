use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use xsum_forge::LangCode;
use xsum_forge_bench::two_language_store;

fn nearest(c: &mut Criterion) {
    let mut group = c.benchmark_group("nearest");
    group.sample_size(10);
    let (en, ru) = (LangCode::new("en").unwrap(), LangCode::new("ru").unwrap());
    for n in [1000usize, 4000] {
        let store = two_language_store(n, 128, 1);
        let (qb, tb) = (store.block_index(&en).unwrap(), store.block_index(&ru).unwrap());
        group.bench_with_input(BenchmarkId::new("blocked", n), &n, |b, _| {
            b.iter(|| black_box(store.nearest_rows(qb, tb)))
        });
        let ids = store.ids_in(&en).to_vec();
        group.bench_with_input(BenchmarkId::new("scan", n), &n, |b, _| {
            b.iter(|| {
                for id in &ids {
                    black_box(store.nearest_in_language(id, &ru).unwrap());
                }
            })
        });
    }
    group.finish();
}

criterion_group!(benches, nearest);
criterion_main!(benches);
