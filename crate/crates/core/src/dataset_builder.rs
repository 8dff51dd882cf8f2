//! Semantic deduplication, component-atomic split assignment, directional
//! sample materialization and pair-count statistics.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt::{self, Write as _};

use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::aligner::{MatchedPair, PairKind};
use crate::corpus_io::{Corpus, LangCode};
use crate::embedding_store::EmbeddingStore;
use crate::error::{Error, Result};
use crate::pair_graph::{ComponentId, ComponentPair, ComponentRecord, VertexRef};
use crate::union_find::DisjointSet;

pub const DEFAULT_DEDUP_THRESHOLD: f32 = 0.95;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DuplicateGroup {
    pub lang: LangCode,
    pub survivor: String,
    /// All members including the survivor, ascending.
    pub members: Vec<String>,
}

/// Groups summaries of one language whose similarity exceeds `threshold`,
/// closed transitively. Only groups with at least two members are returned.
pub fn semantic_dedup(store: &EmbeddingStore, lang: &LangCode, threshold: f32) -> Vec<DuplicateGroup> {
    let ids = store.ids_in(lang);
    let mut ds = DisjointSet::new(ids.len());
    for (i, j, _) in store.pairs_above(lang, threshold) {
        ds.union(i, j);
    }
    ds.groups()
        .into_iter()
        .filter(|g| g.len() > 1)
        .map(|g| {
            // rows are id-sorted, so the first member is the smallest id
            let members: Vec<String> = g.iter().map(|&r| ids[r].clone()).collect();
            DuplicateGroup {
                lang: lang.clone(),
                survivor: members[0].clone(),
                members,
            }
        })
        .collect()
}

/// Dedup over every language of the store, parallel per language.
pub fn semantic_dedup_all(store: &EmbeddingStore, threshold: f32) -> Vec<DuplicateGroup> {
    store
        .languages()
        .par_iter()
        .map(|l| semantic_dedup(store, l, threshold))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

/// Mapping from dropped duplicates to their survivors.
#[derive(Debug, Clone, Default)]
pub struct DedupMap {
    survivor: HashMap<String, String>,
}

impl DedupMap {
    pub fn from_groups(groups: &[DuplicateGroup]) -> Self {
        let mut survivor = HashMap::new();
        for g in groups {
            for m in &g.members {
                if *m != g.survivor {
                    survivor.insert(m.clone(), g.survivor.clone());
                }
            }
        }
        DedupMap { survivor }
    }

    pub fn is_dropped(&self, id: &str) -> bool {
        self.survivor.contains_key(id)
    }

    pub fn resolve<'a>(&'a self, id: &'a str) -> &'a str {
        self.survivor.get(id).map_or(id, String::as_str)
    }

    pub fn dropped_count(&self) -> usize {
        self.survivor.len()
    }
}

#[derive(Debug, Clone)]
pub struct DedupOutcome {
    pub pairs: Vec<ComponentPair>,
    /// Old component id to merged component id (smallest id of the merge).
    pub remap: BTreeMap<ComponentId, ComponentId>,
}

/// Re-points pairs at survivors, drops self-pairs and repeated pairs, and
/// merges components that now share a summary. On a repeat the direct pair,
/// then the higher similarity, wins.
pub fn apply_dedup(pairs: Vec<ComponentPair>, map: &DedupMap) -> DedupOutcome {
    let mut repointed: Vec<ComponentPair> = pairs
        .into_iter()
        .filter_map(|mut cp| {
            let a = map.resolve(&cp.pair.a_id).to_string();
            let b = map.resolve(&cp.pair.b_id).to_string();
            if a == b {
                return None;
            }
            cp.pair.a_id = a;
            cp.pair.b_id = b;
            Some(cp)
        })
        .collect();
    repointed.sort_by(|x, y| {
        (x.pair.a_id.as_str(), x.pair.b_id.as_str(), x.pair.kind)
            .cmp(&(y.pair.a_id.as_str(), y.pair.b_id.as_str(), y.pair.kind))
            .then_with(|| y.pair.similarity.total_cmp(&x.pair.similarity))
            .then_with(|| x.component_id.cmp(&y.component_id))
    });
    repointed.dedup_by(|later, first| later.pair.key() == first.pair.key());

    let comp_ids: BTreeSet<ComponentId> = repointed.iter().map(|p| p.component_id).collect();
    let dense: HashMap<ComponentId, usize> = comp_ids.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let comps: Vec<ComponentId> = comp_ids.into_iter().collect();
    let mut ds = DisjointSet::new(comps.len());
    let mut home: HashMap<&str, usize> = HashMap::new();
    for cp in &repointed {
        let c = dense[&cp.component_id];
        for id in [cp.pair.a_id.as_str(), cp.pair.b_id.as_str()] {
            match home.get(id) {
                Some(&other) => {
                    ds.union(other, c);
                }
                None => {
                    home.insert(id, c);
                }
            }
        }
    }
    let mut remap = BTreeMap::new();
    for group in ds.groups() {
        let target = comps[group[0]];
        for i in group {
            remap.insert(comps[i], target);
        }
    }
    for cp in &mut repointed {
        cp.component_id = remap[&cp.component_id];
    }
    repointed.sort_by(|x, y| {
        let (p, q) = (&x.pair, &y.pair);
        (&p.lang_a, &p.lang_b, &p.a_id, &p.b_id).cmp(&(&q.lang_a, &q.lang_b, &q.a_id, &q.b_id))
    });
    DedupOutcome {
        pairs: repointed,
        remap,
    }
}

/// Component manifest rebuilt from annotated pairs; removed-edge logs of the
/// previous manifest follow their (possibly merged) component.
pub fn rebuild_components(
    pairs: &[ComponentPair],
    previous: &[ComponentRecord],
    remap: &BTreeMap<ComponentId, ComponentId>,
) -> Vec<ComponentRecord> {
    let mut vertices: BTreeMap<ComponentId, BTreeMap<&str, &LangCode>> = BTreeMap::new();
    for cp in pairs {
        let v = vertices.entry(cp.component_id).or_default();
        v.insert(&cp.pair.a_id, &cp.pair.lang_a);
        v.insert(&cp.pair.b_id, &cp.pair.lang_b);
    }
    let mut records: BTreeMap<ComponentId, ComponentRecord> = vertices
        .into_iter()
        .map(|(c, vs)| {
            (
                c,
                ComponentRecord {
                    component_id: c,
                    vertices: vs
                        .into_iter()
                        .map(|(id, lang)| VertexRef {
                            id: id.to_string(),
                            lang: lang.clone(),
                        })
                        .collect(),
                    removed_edges: Vec::new(),
                },
            )
        })
        .collect();
    for old in previous {
        if let Some(rec) = remap.get(&old.component_id).and_then(|c| records.get_mut(c)) {
            rec.removed_edges.extend(old.removed_edges.iter().cloned());
        }
    }
    for rec in records.values_mut() {
        rec.removed_edges
            .sort_by(|x, y| (&x.a_id, &x.b_id).cmp(&(&y.a_id, &y.b_id)));
    }
    records.into_values().collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Dev,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Dev, Split::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Dev => "dev",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitRatios {
    pub train: f64,
    pub dev: f64,
    pub test: f64,
}

impl Default for SplitRatios {
    fn default() -> Self {
        SplitRatios {
            train: 0.8,
            dev: 0.1,
            test: 0.1,
        }
    }
}

impl SplitRatios {
    pub fn new(train: f64, dev: f64, test: f64) -> Result<Self> {
        let r = SplitRatios { train, dev, test };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        let parts = self.as_array();
        if parts.iter().any(|&p| !(0.0..=1.0).contains(&p)) || ((parts.iter().sum::<f64>()) - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "split ratios must be nonnegative and sum to 1, got {parts:?}"
            )));
        }
        Ok(())
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.train, self.dev, self.test]
    }
}

pub type LangPair = (LangCode, LangCode);

/// Per-language-pair pair counts of one component.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentLoad {
    pub component_id: ComponentId,
    pub counts: BTreeMap<LangPair, u64>,
}

impl ComponentLoad {
    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }
}

pub fn component_loads(pairs: &[ComponentPair]) -> Vec<ComponentLoad> {
    let mut by_comp: BTreeMap<ComponentId, BTreeMap<LangPair, u64>> = BTreeMap::new();
    for cp in pairs {
        *by_comp
            .entry(cp.component_id)
            .or_default()
            .entry((cp.pair.lang_a.clone(), cp.pair.lang_b.clone()))
            .or_default() += 1;
    }
    by_comp
        .into_iter()
        .map(|(component_id, counts)| ComponentLoad { component_id, counts })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitManifest {
    pub assignment: BTreeMap<ComponentId, Split>,
    pub seed: u64,
    pub ratios: SplitRatios,
}

/// One line of the split manifest JSONL.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitRecord {
    pub component_id: ComponentId,
    pub split: Split,
}

impl SplitManifest {
    pub fn records(&self) -> Vec<SplitRecord> {
        self.assignment
            .iter()
            .map(|(&component_id, &split)| SplitRecord { component_id, split })
            .collect()
    }

    pub fn from_records(records: &[SplitRecord], seed: u64, ratios: SplitRatios) -> Result<Self> {
        let mut assignment = BTreeMap::new();
        for r in records {
            if assignment.insert(r.component_id, r.split).is_some() {
                return Err(Error::Invalid(format!("component {} assigned twice", r.component_id)));
            }
        }
        Ok(SplitManifest {
            assignment,
            seed,
            ratios,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitWarning {
    pub lang_a: LangCode,
    pub lang_b: LangCode,
    pub components: usize,
    pub message: String,
}

/// Greedy component-atomic assignment. Components are visited by descending
/// size; each goes to the split with the largest deficit summed over its
/// language pairs, where a pair's deficit `ratio * total - assigned` is scaled
/// by the component's share of that pair. The seed only breaks exact ties.
pub fn assign_splits(
    loads: &[ComponentLoad],
    ratios: &SplitRatios,
    seed: u64,
) -> Result<(SplitManifest, Vec<SplitWarning>)> {
    ratios.validate()?;
    let r = ratios.as_array();
    let mut totals: BTreeMap<&LangPair, u64> = BTreeMap::new();
    let mut comp_count: BTreeMap<&LangPair, usize> = BTreeMap::new();
    for load in loads {
        for (lp, &n) in &load.counts {
            *totals.entry(lp).or_default() += n;
            *comp_count.entry(lp).or_default() += 1;
        }
    }
    let active_splits = r.iter().filter(|&&x| x > 0.0).count();
    let warnings: Vec<SplitWarning> = comp_count
        .iter()
        .filter(|(_, &n)| n < active_splits)
        .map(|(lp, &n)| SplitWarning {
            lang_a: lp.0.clone(),
            lang_b: lp.1.clone(),
            components: n,
            message: format!(
                "{n} component(s) for {}-{}: cannot populate all {active_splits} splits",
                lp.0, lp.1
            ),
        })
        .collect();
    for w in &warnings {
        warn!("{}", w.message);
    }

    let mut order: Vec<&ComponentLoad> = loads.iter().collect();
    order.sort_by(|x, y| y.total().cmp(&x.total()).then(x.component_id.cmp(&y.component_id)));

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assigned: HashMap<(&LangPair, usize), f64> = HashMap::new();
    let mut assignment = BTreeMap::new();
    for load in order {
        let mut scores = [0.0f64; 3];
        for (lp, &n) in &load.counts {
            let total = totals[lp] as f64;
            let weight = n as f64 / total;
            for s in 0..3 {
                let done = assigned.get(&(lp, s)).copied().unwrap_or(0.0);
                scores[s] += weight * (r[s] * total - done);
            }
        }
        let best = scores
            .iter()
            .enumerate()
            .filter(|&(s, _)| r[s] > 0.0)
            .map(|(_, &v)| v)
            .fold(f64::NEG_INFINITY, f64::max);
        let tol = 1e-9 * best.abs().max(1.0);
        let tied: Vec<usize> = (0..3).filter(|&s| r[s] > 0.0 && best - scores[s] <= tol).collect();
        let pick = if tied.len() == 1 {
            tied[0]
        } else {
            tied[rng.random_range(0..tied.len())]
        };
        for (lp, &n) in &load.counts {
            *assigned.entry((lp, pick)).or_default() += n as f64;
        }
        assignment.insert(load.component_id, Split::ALL[pick]);
    }
    Ok((
        SplitManifest {
            assignment,
            seed,
            ratios: *ratios,
        },
        warnings,
    ))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossSample {
    pub src_id: String,
    pub tgt_id: String,
    pub src_lang: LangCode,
    pub tgt_lang: LangCode,
    pub article_text: String,
    pub summary_text: String,
    pub component_id: ComponentId,
    pub split: Split,
}

impl CrossSample {
    pub fn sample_id(&self) -> String {
        format!("{}>{}", self.src_id, self.tgt_id)
    }
}

#[derive(Debug, Clone, Default)]
pub struct Materialized {
    /// Samples ordered by `(split, src_lang, tgt_lang, src_id, tgt_id)`.
    pub samples: Vec<CrossSample>,
    /// Pairs skipped because an endpoint was removed by deduplication.
    pub skipped: Vec<(String, String)>,
}

impl Materialized {
    /// Samples grouped by output file key `(split, src_lang, tgt_lang)`.
    pub fn by_file(&self) -> BTreeMap<(Split, &LangCode, &LangCode), Vec<&CrossSample>> {
        let mut out: BTreeMap<(Split, &LangCode, &LangCode), Vec<&CrossSample>> = BTreeMap::new();
        for s in &self.samples {
            out.entry((s.split, &s.src_lang, &s.tgt_lang)).or_default().push(s);
        }
        out
    }
}

/// Turns each matched pair into two directional samples (article of one side
/// with the summary of the other) and optionally one in-language sample per
/// summary, all in the split of their component.
pub fn materialize(
    corpus: &Corpus,
    pairs: &[ComponentPair],
    manifest: &SplitManifest,
    include_in_language: bool,
    dedup: &DedupMap,
) -> Result<Materialized> {
    let mut out = Materialized::default();
    let mut members: BTreeMap<&str, ComponentId> = BTreeMap::new();
    for cp in pairs {
        let p = &cp.pair;
        if dedup.is_dropped(&p.a_id) || dedup.is_dropped(&p.b_id) {
            warn!("skipping pair ({}, {}): endpoint removed as duplicate", p.a_id, p.b_id);
            out.skipped.push((p.a_id.clone(), p.b_id.clone()));
            continue;
        }
        let split = *manifest
            .assignment
            .get(&cp.component_id)
            .ok_or_else(|| Error::Invalid(format!("component {} has no split", cp.component_id)))?;
        let a = corpus.get(&p.a_id).ok_or_else(|| Error::UnknownId(p.a_id.clone()))?;
        let b = corpus.get(&p.b_id).ok_or_else(|| Error::UnknownId(p.b_id.clone()))?;
        for (src, tgt) in [(a, b), (b, a)] {
            out.samples.push(CrossSample {
                src_id: src.id.clone(),
                tgt_id: tgt.id.clone(),
                src_lang: src.lang.clone(),
                tgt_lang: tgt.lang.clone(),
                article_text: src.text.clone(),
                summary_text: tgt.summary.clone(),
                component_id: cp.component_id,
                split,
            });
        }
        for id in [&p.a_id, &p.b_id] {
            members.insert(id, cp.component_id);
        }
    }
    if include_in_language {
        for (id, comp) in members {
            let doc = corpus.get(id).ok_or_else(|| Error::UnknownId(id.to_string()))?;
            out.samples.push(CrossSample {
                src_id: doc.id.clone(),
                tgt_id: doc.id.clone(),
                src_lang: doc.lang.clone(),
                tgt_lang: doc.lang.clone(),
                article_text: doc.text.clone(),
                summary_text: doc.summary.clone(),
                component_id: comp,
                split: manifest.assignment[&comp],
            });
        }
    }
    out.samples.sort_by(|x, y| {
        (x.split, &x.src_lang, &x.tgt_lang, &x.src_id, &x.tgt_id).cmp(&(
            y.split,
            &y.src_lang,
            &y.tgt_lang,
            &y.src_id,
            &y.tgt_id,
        ))
    });
    Ok(out)
}

/// Summary ids whose samples fall in more than one split.
pub fn leakage_violations(samples: &[CrossSample]) -> Vec<String> {
    let mut seen: HashMap<&str, Split> = HashMap::new();
    let mut bad: BTreeSet<String> = BTreeSet::new();
    for s in samples {
        for id in [s.src_id.as_str(), s.tgt_id.as_str()] {
            match seen.get(id) {
                Some(&prev) if prev != s.split => {
                    bad.insert(id.to_string());
                }
                Some(_) => {}
                None => {
                    seen.insert(id, s.split);
                }
            }
        }
    }
    bad.into_iter().collect()
}

/// Sample counts per ordered (article language, summary language).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PairCountMatrix {
    pub counts: BTreeMap<LangPair, u64>,
}

impl PairCountMatrix {
    pub fn get(&self, src: &LangCode, tgt: &LangCode) -> u64 {
        self.counts.get(&(src.clone(), tgt.clone())).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn languages(&self) -> BTreeSet<&LangCode> {
        self.counts.keys().flat_map(|(a, b)| [a, b]).collect()
    }

    /// Tab-separated matrix: rows are article languages, columns summary
    /// languages, followed by a `total` line. `axes` adds languages that may
    /// have no samples.
    pub fn render_tsv(&self, axes: &[LangCode]) -> String {
        let mut langs: BTreeSet<&LangCode> = self.languages();
        langs.extend(axes.iter());
        let mut out = String::from("article\\summary");
        for l in &langs {
            let _ = write!(out, "\t{l}");
        }
        out.push('\n');
        for row in &langs {
            out.push_str(row.as_str());
            for col in &langs {
                let _ = write!(out, "\t{}", self.get(row, col));
            }
            out.push('\n');
        }
        let _ = writeln!(out, "total\t{}", self.total());
        out
    }
}

pub fn stats_matrix(samples: &[CrossSample]) -> PairCountMatrix {
    let mut m = PairCountMatrix::default();
    for s in samples {
        *m.counts.entry((s.src_lang.clone(), s.tgt_lang.clone())).or_default() += 1;
    }
    m
}

/// Convenience used by tests and the CLI: the matched pairs carried by a set
/// of component pairs.
pub fn plain_pairs(pairs: &[ComponentPair]) -> Vec<MatchedPair> {
    pairs.iter().map(|cp| cp.pair.clone()).collect()
}

/// Number of direct and induced pairs.
pub fn kind_counts(pairs: &[ComponentPair]) -> (usize, usize) {
    let direct = pairs.iter().filter(|p| p.pair.kind == PairKind::Direct).count();
    (direct, pairs.len() - direct)
}

/// Distinct summary ids across a sample set.
pub fn sample_ids(samples: &[CrossSample]) -> HashSet<&str> {
    samples
        .iter()
        .flat_map(|s| [s.src_id.as_str(), s.tgt_id.as_str()])
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus_io::Document;
    use crate::embedding_store::{EmbeddingVector, SummaryRecord};

    fn lang(s: &str) -> LangCode {
        LangCode::new(s).unwrap()
    }

    fn load(c: ComponentId, n: u64) -> ComponentLoad {
        ComponentLoad {
            component_id: c,
            counts: [((lang("aa"), lang("bb")), n)].into_iter().collect(),
        }
    }

    #[test]
    fn ten_equal_components_split_8_1_1() {
        let loads: Vec<_> = (0..10).map(|c| load(c, 3)).collect();
        for seed in 0..20 {
            let (m, warnings) = assign_splits(&loads, &SplitRatios::default(), seed).unwrap();
            assert!(warnings.is_empty());
            let count = |s| m.assignment.values().filter(|&&x| x == s).count();
            assert_eq!((count(Split::Train), count(Split::Dev), count(Split::Test)), (8, 1, 1));
        }
    }

    #[test]
    fn single_component_goes_to_train_with_warning() {
        let (m, warnings) = assign_splits(&[load(7, 4)], &SplitRatios::default(), 1).unwrap();
        assert_eq!(m.assignment[&7], Split::Train);
        assert_eq!(warnings.len(), 1);
        assert_eq!(warnings[0].components, 1);
    }

    #[test]
    fn ratios_must_sum_to_one() {
        assert!(SplitRatios::new(0.8, 0.1, 0.2).is_err());
        assert!(SplitRatios::new(0.8, 0.2, 0.0).is_ok());
    }

    fn store(recs: &[(&str, [f32; 2])]) -> EmbeddingStore {
        EmbeddingStore::from_records(
            2,
            recs.iter()
                .map(|(id, v)| SummaryRecord {
                    doc_id: id.to_string(),
                    lang: lang("aa"),
                    embedding: EmbeddingVector::new(id, v.to_vec()).unwrap(),
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn dedup_identical_and_distinct() {
        let s = store(&[("b", [1.0, 0.0]), ("a", [1.0, 0.0]), ("c", [0.0, 1.0])]);
        let groups = semantic_dedup(&s, &lang("aa"), DEFAULT_DEDUP_THRESHOLD);
        assert_eq!(groups.len(), 1);
        assert_eq!(groups[0].survivor, "a");
        assert_eq!(groups[0].members, vec!["a", "b"]);

        let distinct = store(&[("a", [1.0, 0.0]), ("c", [0.0, 1.0])]);
        assert!(semantic_dedup(&distinct, &lang("aa"), DEFAULT_DEDUP_THRESHOLD).is_empty());
    }

    #[test]
    fn dedup_chains_transitively() {
        // a·b ≈ 0.966, b·c ≈ 0.966, a·c = 0.866
        let r = |deg: f32| {
            let t = deg.to_radians();
            [t.cos(), t.sin()]
        };
        let s = store(&[("a", r(0.0)), ("b", r(15.0)), ("c", r(30.0)), ("z", r(90.0))]);
        let groups = semantic_dedup(&s, &lang("aa"), 0.95);
        assert_eq!(groups.len(), 1);
        assert_eq!(groups[0].members, vec!["a", "b", "c"]);
    }

    fn cpair(a: &str, b: &str, comp: ComponentId) -> ComponentPair {
        ComponentPair {
            pair: MatchedPair::oriented(a.into(), lang("aa"), b.into(), lang("bb"), 0.9, PairKind::Direct),
            component_id: comp,
        }
    }

    #[test]
    fn apply_dedup_repoints_and_merges() {
        let groups = vec![DuplicateGroup {
            lang: lang("aa"),
            survivor: "a1".into(),
            members: vec!["a1".into(), "a2".into()],
        }];
        let map = DedupMap::from_groups(&groups);
        let out = apply_dedup(
            vec![cpair("a1", "b1", 0), cpair("a2", "b2", 4), cpair("a2", "b1", 0)],
            &map,
        );
        let keys: Vec<_> = out.pairs.iter().map(|p| p.pair.key()).collect();
        assert_eq!(keys, vec![("a1", "b1"), ("a1", "b2")]);
        assert!(out.pairs.iter().all(|p| p.component_id == 0));
        assert_eq!(out.remap[&4], 0);
    }

    fn doc(id: &str, l: &str) -> Document {
        Document {
            id: id.into(),
            lang: lang(l),
            text: format!("article {id}"),
            summary: format!("summary {id}"),
        }
    }

    #[test]
    fn materialize_both_directions_and_in_language() {
        let corpus = Corpus::from_documents(vec![doc("a", "aa"), doc("b", "bb")]).unwrap();
        let pairs = vec![cpair("a", "b", 0)];
        let manifest = SplitManifest {
            assignment: [(0, Split::Dev)].into_iter().collect(),
            seed: 0,
            ratios: SplitRatios::default(),
        };
        let m = materialize(&corpus, &pairs, &manifest, false, &DedupMap::default()).unwrap();
        assert_eq!(m.samples.len(), 2);
        assert_eq!(m.samples[0].src_lang, lang("aa"));
        assert_eq!(m.samples[0].article_text, "article a");
        assert_eq!(m.samples[0].summary_text, "summary b");
        assert_eq!(m.samples[1].src_lang, lang("bb"));
        assert!(m.samples.iter().all(|s| s.split == Split::Dev));

        let with_own = materialize(&corpus, &pairs, &manifest, true, &DedupMap::default()).unwrap();
        assert_eq!(with_own.samples.len(), 4);

        let stats = stats_matrix(&m.samples);
        assert_eq!(stats.get(&lang("aa"), &lang("bb")), 1);
        assert_eq!(stats.get(&lang("bb"), &lang("aa")), 1);
        assert_eq!(stats.total(), 2);
    }

    #[test]
    fn materialize_skips_dropped_endpoints() {
        let corpus = Corpus::from_documents(vec![doc("a", "aa"), doc("b", "bb")]).unwrap();
        let map = DedupMap::from_groups(&[DuplicateGroup {
            lang: lang("aa"),
            survivor: "a0".into(),
            members: vec!["a0".into(), "a".into()],
        }]);
        let manifest = SplitManifest {
            assignment: [(0, Split::Train)].into_iter().collect(),
            seed: 0,
            ratios: SplitRatios::default(),
        };
        let m = materialize(&corpus, &[cpair("a", "b", 0)], &manifest, false, &map).unwrap();
        assert!(m.samples.is_empty());
        assert_eq!(m.skipped.len(), 1);
    }

    #[test]
    fn stats_rendering() {
        let empty = stats_matrix(&[]);
        assert_eq!(empty.total(), 0);
        assert_eq!(
            empty.render_tsv(&[lang("en")]),
            "article\\summary\ten\nen\t0\ntotal\t0\n"
        );

        let mut m = PairCountMatrix::default();
        m.counts.insert((lang("bn"), lang("ar")), 5);
        let tsv = m.render_tsv(&[]);
        let lines: Vec<&str> = tsv.lines().collect();
        assert_eq!(lines[0], "article\\summary\tar\tbn");
        // row = article language, column = summary language
        assert_eq!(lines[2], "bn\t5\t0");
        assert_eq!(lines[3], "total\t5");
    }
}
