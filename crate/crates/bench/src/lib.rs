//! Fixtures for benchmarks.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use xsum_forge::embedding_store::SummaryRecord;
use xsum_forge::sampler::SamplePools;
use xsum_forge::synthetic::random_unit;
use xsum_forge::{EmbeddingStore, EmbeddingVector, LangCode, PairCounts};

/// Two languages of `per_lang` random unit vectors each.
pub fn two_language_store(per_lang: usize, dim: usize, seed: u64) -> EmbeddingStore {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::with_capacity(2 * per_lang);
    for lang in ["en", "ru"] {
        let code = LangCode::new(lang).expect("valid code");
        for k in 0..per_lang {
            let id = format!("{lang}-{k:06}");
            records.push(SummaryRecord {
                embedding: EmbeddingVector::new(&id, random_unit(&mut rng, dim)).expect("unit vector"),
                doc_id: id,
                lang: code.clone(),
            });
        }
    }
    EmbeddingStore::from_records(dim, records).expect("valid store")
}

/// Pair counts over `langs` languages with random cell sizes, and matching pools.
pub fn sampler_fixture(langs: usize, seed: u64) -> (PairCounts, SamplePools) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let codes: Vec<LangCode> = (0..langs)
        .map(|i| LangCode::new(&format!("l{i}")).expect("valid code"))
        .collect();
    let mut map = BTreeMap::new();
    for a in &codes {
        for b in &codes {
            map.insert((a.clone(), b.clone()), rng.random_range(30..5000u64));
        }
    }
    let counts = PairCounts::from_map(&map);
    let mut pools = SamplePools::new();
    for (i, row) in counts.counts.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            pools.insert(i, j, (0..c).map(|k| format!("{i}-{j}-{k}")).collect());
        }
    }
    (counts, pools)
}
