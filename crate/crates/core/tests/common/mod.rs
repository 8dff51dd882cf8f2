#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use xsum_forge::corpus_io::Corpus;
use xsum_forge::dataset_builder::{apply_dedup, component_loads, DedupMap, Materialized};
use xsum_forge::pair_graph::finalize_pairs;
use xsum_forge::synthetic::SyntheticCorpus;
use xsum_forge::*;

/// Sequential f32 inner product in index order.
pub fn ref_dot(a: &[f32], b: &[f32]) -> f32 {
    let mut s = 0.0f32;
    for i in 0..a.len() {
        s += a[i] * b[i];
    }
    s
}

/// Brute-force mutual nearest neighbours at or above `tau`, as `(a_id, b_id)`
/// with `lang_a < lang_b`.
pub fn brute_force_pairs(store: &EmbeddingStore, tau: f32) -> BTreeSet<(String, String)> {
    let langs = store.languages();
    let mut out = BTreeSet::new();
    let best = |q: &str, lang: &LangCode| -> Option<(String, f32)> {
        let mut best: Option<(String, f32)> = None;
        let qv = store.vector(q).unwrap();
        for c in store.ids_in(lang) {
            let s = ref_dot(qv, store.vector(c).unwrap());
            let better = match &best {
                None => true,
                Some((bid, bs)) => s > *bs || (s == *bs && c < bid),
            };
            if better {
                best = Some((c.clone(), s));
            }
        }
        best
    };
    for (i, la) in langs.iter().enumerate() {
        for lb in &langs[i + 1..] {
            for a in store.ids_in(la) {
                if let Some((b, s)) = best(a, lb) {
                    if s >= tau && best(&b, la).map(|(x, _)| x) == Some(a.clone()) {
                        out.insert((a.clone(), b));
                    }
                }
            }
        }
    }
    out
}

pub struct Built {
    pub corpus: Corpus,
    pub store: EmbeddingStore,
    pub graph: ComponentGraph,
    pub pairs: Vec<ComponentPair>,
    pub manifest: SplitManifest,
    pub materialized: Materialized,
}

pub fn build_dataset(synth: &SyntheticCorpus, seed: u64) -> Built {
    let corpus = Corpus::from_documents(synth.documents.clone()).unwrap();
    let store = synth.store().unwrap();
    let align = AlignConfig::default();
    let direct = align_all(&store, &store.languages(), &align);
    let cap = CapConfig::default();
    let graph = cap_components(build_graph(&direct).unwrap(), &cap).unwrap();
    let induced = induced_pairs(&graph, &store, &cap).unwrap();
    let pairs = finalize_pairs(&graph, &induced).unwrap();
    let dedup = DedupMap::from_groups(&semantic_dedup_all(&store, 0.95));
    let outcome = apply_dedup(pairs, &dedup);
    let (manifest, _) = assign_splits(&component_loads(&outcome.pairs), &SplitRatios::default(), seed).unwrap();
    let materialized = materialize(&corpus, &outcome.pairs, &manifest, false, &dedup).unwrap();
    Built {
        corpus,
        store,
        graph,
        pairs: outcome.pairs,
        manifest,
        materialized,
    }
}

/// Per language pair: number of components and pair counts per split.
pub fn split_shares(built: &Built) -> BTreeMap<(LangCode, LangCode), (usize, [u64; 3])> {
    let mut comps: BTreeMap<(LangCode, LangCode), BTreeSet<usize>> = BTreeMap::new();
    let mut counts: BTreeMap<(LangCode, LangCode), [u64; 3]> = BTreeMap::new();
    for cp in &built.pairs {
        let key = (cp.pair.lang_a.clone(), cp.pair.lang_b.clone());
        comps.entry(key.clone()).or_default().insert(cp.component_id);
        let s = built.manifest.assignment[&cp.component_id];
        let idx = Split::ALL.iter().position(|x| *x == s).unwrap();
        counts.entry(key).or_default()[idx] += 1;
    }
    counts
        .into_iter()
        .map(|(k, c)| {
            let n = comps[&k].len();
            (k, (n, c))
        })
        .collect()
}
