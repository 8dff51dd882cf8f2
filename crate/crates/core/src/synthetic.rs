//! Deterministic synthetic corpora, embeddings and evaluation fixtures.
//!
//! Every cluster is a set of translation-equivalent documents: one shared
//! unit center, one member per participating language placed at a fixed
//! angle around it, and texts drawn from per-language vocabularies using the
//! same word indices. Languages are assigned scripts by position (Latin,
//! Cyrillic, Han, Greek, Devanagari, Arabic, repeating) so the n-gram
//! identifier can tell them apart.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::aligner::{MatchedPair, PairKind};
use crate::corpus_io::{Document, LangCode};
use crate::embedding_store::{dot, EmbeddingStore, EmbeddingVector, SummaryRecord, XembFile};
use crate::error::{Error, Result};
use crate::lase_metric::TextRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Script {
    Latin,
    Cyrillic,
    Han,
    Greek,
    Devanagari,
    Arabic,
}

impl Script {
    pub fn for_position(i: usize) -> Script {
        [
            Script::Latin,
            Script::Cyrillic,
            Script::Han,
            Script::Greek,
            Script::Devanagari,
            Script::Arabic,
        ][i % 6]
    }

    fn alphabet(self) -> Vec<char> {
        let range = |a: u32, b: u32| (a..=b).filter_map(char::from_u32).collect::<Vec<_>>();
        match self {
            Script::Latin => range('a' as u32, 'z' as u32),
            Script::Cyrillic => range(0x430, 0x44f),
            Script::Han => range(0x4e00, 0x4fff),
            Script::Greek => range(0x3b1, 0x3c9).into_iter().filter(|&c| c != 'ς').collect(),
            Script::Devanagari => range(0x915, 0x939),
            Script::Arabic => range(0x628, 0x64a).into_iter().filter(|c| c.is_alphabetic()).collect(),
        }
    }

    pub fn spaced(self) -> bool {
        self != Script::Han
    }
}

/// Per-language word list; word `k` in every language renders the same concept.
#[derive(Debug, Clone)]
pub struct Vocabulary {
    pub script: Script,
    words: Vec<String>,
}

impl Vocabulary {
    pub fn generate(script: Script, size: usize, rng: &mut impl Rng) -> Self {
        let alphabet = script.alphabet();
        let mut seen = BTreeSet::new();
        let mut words = Vec::with_capacity(size);
        while words.len() < size {
            let len = if script.spaced() {
                rng.random_range(3..=7)
            } else {
                rng.random_range(1..=2)
            };
            let w: String = (0..len)
                .map(|_| alphabet[rng.random_range(0..alphabet.len())])
                .collect();
            if seen.insert(w.clone()) {
                words.push(w);
            }
        }
        Vocabulary { script, words }
    }

    pub fn render(&self, indices: &[usize]) -> String {
        let sep = if self.script.spaced() { " " } else { "" };
        indices
            .iter()
            .map(|&k| self.words[k % self.words.len()].as_str())
            .collect::<Vec<_>>()
            .join(sep)
    }
}

pub fn random_unit(rng: &mut impl Rng, dim: usize) -> Vec<f32> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-6 {
            return v.iter().map(|x| (x / n) as f32).collect();
        }
    }
}

fn normalize(v: &[f64]) -> Vec<f32> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| (x / n) as f32).collect()
}

/// Random unit vector orthogonal to `c` (assumed unit).
fn orthogonal_unit(rng: &mut impl Rng, c: &[f32]) -> Vec<f64> {
    loop {
        let u = random_unit(rng, c.len());
        let proj = dot(&u, c) as f64;
        let w: Vec<f64> = u.iter().zip(c).map(|(&x, &y)| x as f64 - proj * y as f64).collect();
        let n = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-3 {
            return w.iter().map(|x| x / n).collect();
        }
    }
}

/// `normalize(c + scale * u)` with `u` a random direction orthogonal to `c`.
pub fn perturb(rng: &mut impl Rng, c: &[f32], scale: f64) -> Vec<f32> {
    let u = orthogonal_unit(rng, c);
    let v: Vec<f64> = c.iter().zip(&u).map(|(&x, &y)| x as f64 + scale * y).collect();
    normalize(&v)
}

/// Unit centers with pairwise |cos| below `max_cos`, by rejection sampling.
pub fn spread_centers(rng: &mut impl Rng, count: usize, dim: usize, max_cos: f32) -> Result<Vec<Vec<f32>>> {
    let mut centers: Vec<Vec<f32>> = Vec::with_capacity(count);
    let mut attempts = 0usize;
    while centers.len() < count {
        attempts += 1;
        if attempts > 1000 * (count + 1) {
            return Err(Error::Config(format!(
                "cannot place {count} centers in {dim} dimensions with cosine below {max_cos}"
            )));
        }
        let c = random_unit(rng, dim);
        if centers.iter().all(|o| dot(o, &c).abs() < max_cos) {
            centers.push(c);
        }
    }
    Ok(centers)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub languages: Vec<LangCode>,
    pub clusters: usize,
    pub dim: usize,
    /// Orthogonal offset of cluster members from their center.
    pub spread: f64,
    pub min_languages: usize,
    /// Three-language clusters whose outer members only meet through the center.
    pub triangles: usize,
    pub near_duplicates: usize,
    pub singletons: usize,
    pub max_center_cos: f32,
    pub vocabulary: usize,
    pub seed: u64,
}

impl SynthConfig {
    /// The bundled three-language setting.
    pub fn bundled(seed: u64) -> Self {
        SynthConfig {
            languages: ["en", "ru", "zh"]
                .iter()
                .map(|s| LangCode::new(s).expect("valid code"))
                .collect(),
            clusters: 150,
            dim: 64,
            spread: 0.25,
            min_languages: 2,
            triangles: 20,
            near_duplicates: 10,
            singletons: 30,
            max_center_cos: 0.4,
            vocabulary: 300,
            seed,
        }
    }
}

/// Ground truth recorded alongside the generated data.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PlantedTruth {
    /// Member pairs of ordinary clusters, oriented `(lower lang id, other id)`.
    pub cluster_pairs: BTreeSet<(String, String)>,
    /// Outer pairs of triangle clusters.
    pub triangle_pairs: BTreeSet<(String, String)>,
    /// `(original, duplicate)` ids.
    pub duplicates: Vec<(String, String)>,
    pub clusters: Vec<Vec<String>>,
}

#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub documents: Vec<Document>,
    pub embeddings: XembFile,
    pub truth: PlantedTruth,
    pub vocabularies: Vec<Vocabulary>,
}

impl SyntheticCorpus {
    pub fn store(&self) -> Result<EmbeddingStore> {
        let records = self
            .documents
            .iter()
            .zip(&self.embeddings.records)
            .map(|(d, (_, v))| {
                Ok(SummaryRecord {
                    doc_id: d.id.clone(),
                    lang: d.lang.clone(),
                    embedding: EmbeddingVector::new(&d.id, v.clone())?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        EmbeddingStore::from_records(self.embeddings.dim, records)
    }
}

fn oriented_key(x: (&str, &LangCode), y: (&str, &LangCode)) -> (String, String) {
    if x.1 <= y.1 {
        (x.0.to_string(), y.0.to_string())
    } else {
        (y.0.to_string(), x.0.to_string())
    }
}

pub fn generate_corpus(cfg: &SynthConfig) -> Result<SyntheticCorpus> {
    let nl = cfg.languages.len();
    if nl < 2 || cfg.min_languages < 2 || cfg.min_languages > nl {
        return Err(Error::Config(
            "synthetic corpus needs at least two languages per cluster".into(),
        ));
    }
    if cfg.triangles > 0 && nl < 3 {
        return Err(Error::Config("triangles need three languages".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let vocabularies: Vec<Vocabulary> = (0..nl)
        .map(|i| Vocabulary::generate(Script::for_position(i), cfg.vocabulary, &mut rng))
        .collect();
    let centers = spread_centers(
        &mut rng,
        cfg.clusters + cfg.triangles + cfg.singletons,
        cfg.dim,
        cfg.max_center_cos,
    )?;
    let mut docs = Vec::new();
    let mut vecs = Vec::new();
    let mut truth = PlantedTruth::default();
    let topic = |rng: &mut ChaCha8Rng| -> (Vec<usize>, Vec<usize>) {
        let article: Vec<usize> = (0..rng.random_range(20..40))
            .map(|_| rng.random_range(0..cfg.vocabulary))
            .collect();
        let summary = article[..rng.random_range(6..12)].to_vec();
        (article, summary)
    };
    let push =
        |docs: &mut Vec<Document>, vecs: &mut Vec<Vec<f32>>, id: String, li: usize, t: &(Vec<usize>, Vec<usize>), v| {
            docs.push(Document {
                id,
                lang: cfg.languages[li].clone(),
                text: vocabularies[li].render(&t.0),
                summary: vocabularies[li].render(&t.1),
            });
            vecs.push(v);
        };

    let mut order: Vec<usize> = (0..nl).collect();
    for (k, c) in centers[..cfg.clusters].iter().enumerate() {
        order.shuffle(&mut rng);
        let n = rng.random_range(cfg.min_languages..=nl);
        let mut members: Vec<usize> = order[..n].to_vec();
        members.sort_unstable();
        let t = topic(&mut rng);
        let mut ids = Vec::new();
        for &li in &members {
            let id = format!("{}-{k:04}", cfg.languages[li]);
            let v = perturb(&mut rng, c, cfg.spread);
            push(&mut docs, &mut vecs, id.clone(), li, &t, v);
            ids.push((id, li));
        }
        for (x, (xi, xl)) in ids.iter().enumerate() {
            for (yi, yl) in &ids[x + 1..] {
                truth
                    .cluster_pairs
                    .insert(oriented_key((xi, &cfg.languages[*xl]), (yi, &cfg.languages[*yl])));
            }
        }
        truth.clusters.push(ids.into_iter().map(|(id, _)| id).collect());
    }

    // cos(A, C) = cos(B, C) ≈ 0.92 and cos(A, B) ≈ 0.69
    let offset = 0.428;
    for (k, c) in centers[cfg.clusters..cfg.clusters + cfg.triangles].iter().enumerate() {
        order.shuffle(&mut rng);
        let (la, lb, lc) = (order[0], order[1], order[2]);
        let x = orthogonal_unit(&mut rng, c);
        let t = topic(&mut rng);
        let at = |sign: f64| -> Vec<f64> { c.iter().zip(&x).map(|(&a, &b)| a as f64 + sign * offset * b).collect() };
        let a = normalize(&at(1.0));
        let b = normalize(&at(-1.0));
        let ids: Vec<String> = [la, lb, lc]
            .iter()
            .map(|&li| format!("{}-t{k:03}", cfg.languages[li]))
            .collect();
        push(&mut docs, &mut vecs, ids[0].clone(), la, &t, a);
        push(&mut docs, &mut vecs, ids[1].clone(), lb, &t, b);
        push(&mut docs, &mut vecs, ids[2].clone(), lc, &t, c.clone());
        truth.triangle_pairs.insert(oriented_key(
            (&ids[0], &cfg.languages[la]),
            (&ids[1], &cfg.languages[lb]),
        ));
        truth.clusters.push(ids);
    }

    for (k, c) in centers[cfg.clusters + cfg.triangles..].iter().enumerate() {
        let li = rng.random_range(0..nl);
        let t = topic(&mut rng);
        push(
            &mut docs,
            &mut vecs,
            format!("{}-s{k:04}", cfg.languages[li]),
            li,
            &t,
            c.clone(),
        );
    }

    if cfg.clusters > 0 {
        let base = docs.len();
        for k in 0..cfg.near_duplicates {
            let src = rng.random_range(0..base);
            let li = cfg
                .languages
                .iter()
                .position(|l| *l == docs[src].lang)
                .expect("known language");
            let id = format!("{}-d{k:03}", docs[src].lang);
            let v = perturb(&mut rng, &vecs[src], 0.03);
            let mut d = docs[src].clone();
            d.id = id.clone();
            d.summary
                .push_str(if vocabularies[li].script.spaced() { " " } else { "" });
            d.summary.push_str(&vocabularies[li].render(&[k]));
            truth.duplicates.push((docs[src].id.clone(), id));
            docs.push(d);
            vecs.push(v);
        }
    }

    let mut joined: Vec<(Document, Vec<f32>)> = docs.into_iter().zip(vecs).collect();
    joined.sort_by(|a, b| a.0.id.cmp(&b.0.id));
    let (documents, vectors): (Vec<_>, Vec<_>) = joined.into_iter().unzip();
    let embeddings = XembFile {
        dim: cfg.dim,
        records: documents.iter().map(|d| d.id.clone()).zip(vectors).collect(),
    };
    Ok(SyntheticCorpus {
        documents,
        embeddings,
        truth,
        vocabularies,
    })
}

/// Predictions, references and their vectors for `evaluate`.
#[derive(Debug, Clone)]
pub struct EvalFixture {
    pub predictions: Vec<TextRecord>,
    pub references: Vec<TextRecord>,
    pub generated: XembFile,
    pub reference: XembFile,
}

/// Cross-lingual test items built from cluster members. Predictions cycle
/// through exact copies, shortened paraphrases, and source-language echoes.
pub fn evaluation_fixture(corpus: &SyntheticCorpus, count: usize, seed: u64) -> EvalFixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let by_id: std::collections::HashMap<&str, (usize, &Document)> = corpus
        .documents
        .iter()
        .enumerate()
        .map(|(i, d)| (d.id.as_str(), (i, d)))
        .collect();
    let groups: Vec<&Vec<String>> = corpus.truth.clusters.iter().filter(|c| c.len() >= 2).collect();
    let dim = corpus.embeddings.dim;
    let mut fx = EvalFixture {
        predictions: Vec::new(),
        references: Vec::new(),
        generated: XembFile {
            dim,
            records: Vec::new(),
        },
        reference: XembFile {
            dim,
            records: Vec::new(),
        },
    };
    if groups.is_empty() {
        return fx;
    }
    for k in 0..count {
        let g = groups[rng.random_range(0..groups.len())];
        let s = rng.random_range(0..g.len());
        let t = (s + rng.random_range(1..g.len())) % g.len();
        let (si, src) = by_id[g[s].as_str()];
        let (ti, tgt) = by_id[g[t].as_str()];
        let id = format!("e{k:05}");
        let ref_vec = corpus.embeddings.records[ti].1.clone();
        let (text, vec) = match k % 3 {
            0 => (tgt.summary.clone(), ref_vec.clone()),
            1 => {
                let unspaced = !tgt.summary.contains(' ');
                let kept = if unspaced {
                    tgt.summary
                        .chars()
                        .take((tgt.summary.chars().count() * 2 / 3).max(1))
                        .collect()
                } else {
                    let words: Vec<&str> = tgt.summary.split(' ').collect();
                    words[..(words.len() * 2 / 3).max(1)].join(" ")
                };
                (kept, perturb(&mut rng, &ref_vec, 0.3))
            }
            _ => (src.summary.clone(), corpus.embeddings.records[si].1.clone()),
        };
        fx.predictions.push(TextRecord {
            id: id.clone(),
            lang: tgt.lang.clone(),
            text,
            src_lang: Some(src.lang.clone()),
        });
        fx.references.push(TextRecord {
            id: id.clone(),
            lang: tgt.lang.clone(),
            text: tgt.summary.clone(),
            src_lang: None,
        });
        fx.generated.records.push((id.clone(), vec));
        fx.reference.records.push((id, ref_vec));
    }
    fx
}

/// A store with random cluster structure, for oracle comparisons. Spreads
/// vary per cluster so similarities straddle typical thresholds.
pub fn random_clustered_store(seed: u64, max_docs: usize, max_langs: usize, dim: usize) -> Result<EmbeddingStore> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nl = rng.random_range(2..=max_langs.max(2));
    let langs: Vec<LangCode> = (0..nl)
        .map(|i| LangCode::new(&format!("l{i}")).expect("valid code"))
        .collect();
    let n = rng.random_range(nl..=max_docs.max(nl));
    let mut records = Vec::with_capacity(n);
    let mut center = random_unit(&mut rng, dim);
    let mut spread = 0.5;
    for i in 0..n {
        if rng.random_bool(0.3) {
            center = random_unit(&mut rng, dim);
            spread = rng.random_range(0.1..1.2);
        }
        let v = perturb(&mut rng, &center, spread);
        let id = format!("d{i:04}");
        records.push(SummaryRecord {
            embedding: EmbeddingVector::new(&id, v)?,
            doc_id: id,
            lang: langs[rng.random_range(0..nl)].clone(),
        });
    }
    EmbeddingStore::from_records(dim, records)
}

/// Random undirected weighted graph on `n` vertices.
pub fn random_graph(rng: &mut impl Rng, n: usize, density: f64) -> Vec<(usize, usize, f64)> {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_bool(density) {
                edges.push((u, v, rng.random_range(0.05..1.0)));
            }
        }
    }
    edges
}

/// A connected direct-pair component of `n` vertices spread over `langs`
/// languages: a random spanning tree plus `extra` chords, weights in [0.75, 1).
pub fn connected_component_pairs(seed: u64, n: usize, langs: usize, extra: usize) -> Vec<MatchedPair> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let codes: Vec<LangCode> = (0..langs.max(2))
        .map(|i| LangCode::new(&format!("l{i}")).expect("valid code"))
        .collect();
    let lang_of = |v: usize| &codes[v % codes.len()];
    let id = |v: usize| format!("v{v:04}");
    let mut seen = BTreeSet::new();
    let mut pairs = Vec::new();
    let mut add = |u: usize, v: usize, rng: &mut ChaCha8Rng| {
        if u == v || lang_of(u) == lang_of(v) || !seen.insert((u.min(v), u.max(v))) {
            return;
        }
        let w = rng.random_range(0.75f32..1.0);
        pairs.push(MatchedPair::oriented(
            id(u),
            lang_of(u).clone(),
            id(v),
            lang_of(v).clone(),
            w,
            PairKind::Direct,
        ));
    };
    for v in 1..n {
        let mut u = rng.random_range(0..v);
        while lang_of(u) == lang_of(v) {
            u = (u + 1) % v;
        }
        add(u, v, &mut rng);
    }
    for _ in 0..extra {
        let (u, v) = (rng.random_range(0..n), rng.random_range(0..n));
        add(u, v, &mut rng);
    }
    pairs
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_is_deterministic_and_sorted() {
        let cfg = SynthConfig::bundled(3);
        let a = generate_corpus(&cfg).unwrap();
        let b = generate_corpus(&cfg).unwrap();
        assert_eq!(a.documents, b.documents);
        assert_eq!(a.embeddings, b.embeddings);
        assert!(a.documents.windows(2).all(|w| w[0].id < w[1].id));
        assert_eq!(a.documents.len(), a.embeddings.records.len());
        assert!(a.documents.iter().all(|d| !d.summary.is_empty()));
    }

    #[test]
    fn triangle_geometry() {
        let mut cfg = SynthConfig::bundled(5);
        cfg.clusters = 0;
        cfg.singletons = 0;
        cfg.near_duplicates = 0;
        cfg.triangles = 5;
        let c = generate_corpus(&cfg).unwrap();
        let store = c.store().unwrap();
        for (a, b) in &c.truth.triangle_pairs {
            let s = store.similarity_of(a, b).unwrap();
            assert!((0.65..0.73).contains(&s), "{s}");
        }
    }

    #[test]
    fn component_generator_is_connected() {
        let pairs = connected_component_pairs(1, 120, 6, 200);
        let g = crate::pair_graph::build_graph(&pairs).unwrap();
        assert_eq!(g.component_sizes(), vec![120]);
    }
}
