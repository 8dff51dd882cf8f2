//! Unit-norm summary embeddings grouped by language, with exact nearest
//! neighbor search.
//!
//! Every similarity is a float32 dot product accumulated sequentially in index
//! order ([`dot`]). The blocked search in [`EmbeddingStore::all_nearest`] tiles
//! queries and candidates for cache reuse and scores four candidates at a time,
//! but each individual product still follows the canonical order, so it is
//! bit-identical to the per-query scan in
//! [`EmbeddingStore::nearest_in_language`].
//!
//! Rows inside a language block are sorted by doc id. Scanning candidates in
//! ascending row order and replacing the incumbent only on a strictly greater
//! score therefore resolves ties toward the lexicographically smallest id.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus_io::{Corpus, LangCode};
use crate::error::{Error, Result};

pub const XEMB_MAGIC: &[u8; 4] = b"XEMB";
pub const XEMB_VERSION: u32 = 1;
/// Accepted deviation of the L2 norm from 1 at ingest.
pub const NORM_TOLERANCE: f64 = 1e-3;

const QUERY_TILE: usize = 32;
const CANDIDATE_TILE: usize = 256;

/// Canonical similarity: float32 products summed left to right.
#[inline]
pub fn dot(a: &[f32], b: &[f32]) -> f32 {
    let mut acc = 0.0f32;
    for (x, y) in a.iter().zip(b) {
        acc += x * y;
    }
    acc
}

/// Four canonical dot products against one query. Each accumulator sees the
/// same sequence of additions as [`dot`].
#[inline]
fn dot4(q: &[f32], c0: &[f32], c1: &[f32], c2: &[f32], c3: &[f32]) -> [f32; 4] {
    let (mut s0, mut s1, mut s2, mut s3) = (0.0f32, 0.0f32, 0.0f32, 0.0f32);
    for i in 0..q.len() {
        let x = q[i];
        s0 += x * c0[i];
        s1 += x * c1[i];
        s2 += x * c2[i];
        s3 += x * c3[i];
    }
    [s0, s1, s2, s3]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingVector(Vec<f32>);

impl EmbeddingVector {
    /// Validates finiteness and the norm tolerance, then rescales to unit norm.
    pub fn new(id: &str, mut values: Vec<f32>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(id.to_string()));
        }
        let norm = values.iter().map(|&v| f64::from(v) * f64::from(v)).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::Norm {
                id: id.to_string(),
                norm,
            });
        }
        if norm != 1.0 {
            for v in &mut values {
                *v = (f64::from(*v) / norm) as f32;
            }
        }
        Ok(EmbeddingVector(values))
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

pub fn similarity(a: &EmbeddingVector, b: &EmbeddingVector) -> Result<f32> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok(dot(a.as_slice(), b.as_slice()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRecord {
    pub doc_id: String,
    pub lang: LangCode,
    pub embedding: EmbeddingVector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NearestNeighbor {
    pub query_id: String,
    pub neighbor_id: String,
    pub similarity: f32,
}

/// Neighbor maps in both directions between two languages.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AllNearest {
    pub a_to_b: BTreeMap<String, Option<NearestNeighbor>>,
    pub b_to_a: BTreeMap<String, Option<NearestNeighbor>>,
}

#[derive(Debug, Clone)]
struct LanguageBlock {
    lang: LangCode,
    ids: Vec<String>,
    data: Vec<f32>,
}

impl LanguageBlock {
    fn row(&self, i: usize, dim: usize) -> &[f32] {
        &self.data[i * dim..(i + 1) * dim]
    }
}

/// Immutable store of summary embeddings.
#[derive(Debug, Clone)]
pub struct EmbeddingStore {
    dim: usize,
    blocks: Vec<LanguageBlock>,
    index: HashMap<String, (usize, usize)>,
}

/// Row-level handle into one language block, used by the pipeline stages that
/// work on indices rather than ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RowRef {
    pub block: usize,
    pub row: usize,
}

impl EmbeddingStore {
    pub fn from_records(dim: usize, records: Vec<SummaryRecord>) -> Result<Self> {
        let mut by_lang: BTreeMap<LangCode, Vec<SummaryRecord>> = BTreeMap::new();
        for rec in records {
            if rec.embedding.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: rec.embedding.dim(),
                });
            }
            by_lang.entry(rec.lang.clone()).or_default().push(rec);
        }
        let mut blocks = Vec::with_capacity(by_lang.len());
        let mut index = HashMap::new();
        for (b, (lang, mut recs)) in by_lang.into_iter().enumerate() {
            recs.sort_by(|x, y| x.doc_id.cmp(&y.doc_id));
            let mut ids = Vec::with_capacity(recs.len());
            let mut data = Vec::with_capacity(recs.len() * dim);
            for (row, rec) in recs.into_iter().enumerate() {
                if index.insert(rec.doc_id.clone(), (b, row)).is_some() {
                    return Err(Error::DuplicateId(rec.doc_id));
                }
                data.extend_from_slice(rec.embedding.as_slice());
                ids.push(rec.doc_id);
            }
            blocks.push(LanguageBlock { lang, ids, data });
        }
        Ok(EmbeddingStore { dim, blocks, index })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn languages(&self) -> Vec<LangCode> {
        self.blocks.iter().map(|b| b.lang.clone()).collect()
    }

    fn block_of(&self, lang: &LangCode) -> Option<usize> {
        self.blocks.binary_search_by(|b| b.lang.cmp(lang)).ok()
    }

    /// Sorted ids of one language, empty when the language is absent.
    pub fn ids_in(&self, lang: &LangCode) -> &[String] {
        match self.block_of(lang) {
            Some(b) => &self.blocks[b].ids,
            None => &[],
        }
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    pub fn lang_of(&self, id: &str) -> Option<&LangCode> {
        self.index.get(id).map(|&(b, _)| &self.blocks[b].lang)
    }

    pub fn vector(&self, id: &str) -> Option<&[f32]> {
        self.index.get(id).map(|&(b, r)| self.blocks[b].row(r, self.dim))
    }

    pub fn row_ref(&self, id: &str) -> Option<RowRef> {
        self.index.get(id).map(|&(block, row)| RowRef { block, row })
    }

    pub fn id_at(&self, r: RowRef) -> &str {
        &self.blocks[r.block].ids[r.row]
    }

    pub fn lang_at(&self, r: RowRef) -> &LangCode {
        &self.blocks[r.block].lang
    }

    pub fn block_index(&self, lang: &LangCode) -> Option<usize> {
        self.block_of(lang)
    }

    pub fn block_len(&self, block: usize) -> usize {
        self.blocks[block].ids.len()
    }

    pub fn records(&self) -> impl Iterator<Item = (&str, &LangCode, &[f32])> + '_ {
        self.blocks.iter().flat_map(move |b| {
            b.ids
                .iter()
                .enumerate()
                .map(move |(r, id)| (id.as_str(), &b.lang, b.row(r, self.dim)))
        })
    }

    /// Similarity between two stored summaries.
    pub fn similarity_of(&self, a: &str, b: &str) -> Result<f32> {
        let va = self.vector(a).ok_or_else(|| Error::UnknownId(a.to_string()))?;
        let vb = self.vector(b).ok_or_else(|| Error::UnknownId(b.to_string()))?;
        Ok(dot(va, vb))
    }

    /// Per-query linear scan; the reference path for the blocked search.
    pub fn nearest_in_language(&self, query_id: &str, target_lang: &LangCode) -> Result<Option<NearestNeighbor>> {
        let &(qb, qr) = self
            .index
            .get(query_id)
            .ok_or_else(|| Error::UnknownId(query_id.to_string()))?;
        if &self.blocks[qb].lang == target_lang {
            return Err(Error::SameLanguage {
                query: query_id.to_string(),
                lang: target_lang.to_string(),
            });
        }
        let Some(tb) = self.block_of(target_lang) else {
            return Ok(None);
        };
        Ok(self
            .scan_nearest(self.blocks[qb].row(qr, self.dim), tb)
            .map(|(row, sim)| NearestNeighbor {
                query_id: query_id.to_string(),
                neighbor_id: self.blocks[tb].ids[row].clone(),
                similarity: sim,
            }))
    }

    fn scan_nearest(&self, query: &[f32], target_block: usize) -> Option<(usize, f32)> {
        let block = &self.blocks[target_block];
        let mut best: Option<(usize, f32)> = None;
        for row in 0..block.ids.len() {
            let sim = dot(query, block.row(row, self.dim));
            if best.is_none_or(|(_, b)| sim > b) {
                best = Some((row, sim));
            }
        }
        best
    }

    /// Nearest row of `target_block` for every row of `query_block`, computed
    /// with query/candidate tiling. Results are identical to repeated
    /// [`Self::nearest_in_language`] calls.
    pub fn nearest_rows(&self, query_block: usize, target_block: usize) -> Vec<Option<(usize, f32)>> {
        let dim = self.dim;
        let queries = &self.blocks[query_block];
        let targets = &self.blocks[target_block];
        let n_q = queries.ids.len();
        let n_t = targets.ids.len();
        if n_t == 0 {
            return vec![None; n_q];
        }
        let mut out: Vec<Option<(usize, f32)>> = vec![None; n_q];
        out.par_chunks_mut(QUERY_TILE).enumerate().for_each(|(tile, best)| {
            let q0 = tile * QUERY_TILE;
            for c0 in (0..n_t).step_by(CANDIDATE_TILE) {
                let c1 = (c0 + CANDIDATE_TILE).min(n_t);
                for (k, slot) in best.iter_mut().enumerate() {
                    let q = queries.row(q0 + k, dim);
                    let mut c = c0;
                    while c + 4 <= c1 {
                        let sims = dot4(
                            q,
                            targets.row(c, dim),
                            targets.row(c + 1, dim),
                            targets.row(c + 2, dim),
                            targets.row(c + 3, dim),
                        );
                        for (off, sim) in sims.into_iter().enumerate() {
                            if slot.is_none_or(|(_, b)| sim > b) {
                                *slot = Some((c + off, sim));
                            }
                        }
                        c += 4;
                    }
                    while c < c1 {
                        let sim = dot(q, targets.row(c, dim));
                        if slot.is_none_or(|(_, b)| sim > b) {
                            *slot = Some((c, sim));
                        }
                        c += 1;
                    }
                }
            }
        });
        out
    }

    /// Nearest neighbors in both directions between two languages.
    pub fn all_nearest(&self, lang_a: &LangCode, lang_b: &LangCode) -> AllNearest {
        let ba = self.block_of(lang_a);
        let bb = self.block_of(lang_b);
        let mut result = AllNearest::default();
        let fill = |from: Option<usize>, to: Option<usize>, map: &mut BTreeMap<String, Option<NearestNeighbor>>| {
            let Some(from) = from else { return };
            let hits = match to {
                Some(to) => self.nearest_rows(from, to),
                None => vec![None; self.blocks[from].ids.len()],
            };
            for (row, hit) in hits.into_iter().enumerate() {
                let qid = &self.blocks[from].ids[row];
                let nn = hit.map(|(n, sim)| NearestNeighbor {
                    query_id: qid.clone(),
                    neighbor_id: self.blocks[to.expect("hit implies target")].ids[n].clone(),
                    similarity: sim,
                });
                map.insert(qid.clone(), nn);
            }
        };
        fill(ba, bb, &mut result.a_to_b);
        fill(bb, ba, &mut result.b_to_a);
        result
    }

    /// All within-language row pairs `(i, j)`, `i < j`, whose similarity
    /// strictly exceeds `threshold`.
    pub fn pairs_above(&self, lang: &LangCode, threshold: f32) -> Vec<(usize, usize, f32)> {
        let Some(b) = self.block_of(lang) else {
            return Vec::new();
        };
        let block = &self.blocks[b];
        let n = block.ids.len();
        (0..n)
            .into_par_iter()
            .flat_map_iter(|i| {
                let qi = block.row(i, self.dim);
                (i + 1..n).filter_map(move |j| {
                    let sim = dot(qi, block.row(j, self.dim));
                    (sim > threshold).then_some((i, j, sim))
                })
            })
            .collect()
    }

    /// Writes the store as an XEMB file, records ordered by (lang, id).
    pub fn write_xemb<W: Write>(&self, out: W) -> Result<()> {
        write_xemb(
            out,
            self.dim,
            self.records().map(|(id, _, v)| (id, v)).collect::<Vec<_>>().into_iter(),
        )
    }
}

/// Raw XEMB contents: `(id, values)` in file order.
#[derive(Debug, Clone, PartialEq)]
pub struct XembFile {
    pub dim: usize,
    pub records: Vec<(String, Vec<f32>)>,
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)
        .map_err(|_| Error::Format("truncated header".into()))?;
    Ok(u32::from_le_bytes(buf))
}

pub fn read_xemb<R: Read>(mut r: R) -> Result<XembFile> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)
        .map_err(|_| Error::Format("truncated header".into()))?;
    if &magic != XEMB_MAGIC {
        return Err(Error::Format(format!("bad magic {magic:?}")));
    }
    let version = read_u32(&mut r)?;
    if version != XEMB_VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let dim = read_u32(&mut r)? as usize;
    let count = read_u32(&mut r)? as usize;
    if dim == 0 {
        return Err(Error::Format("dimension is zero".into()));
    }
    let mut records = Vec::with_capacity(count.min(1 << 20));
    let mut vec_bytes = vec![0u8; dim * 4];
    for i in 0..count {
        let mut len = [0u8; 2];
        r.read_exact(&mut len)
            .map_err(|_| Error::Format(format!("truncated record {i}")))?;
        let mut id = vec![0u8; u16::from_le_bytes(len) as usize];
        r.read_exact(&mut id)
            .map_err(|_| Error::Format(format!("truncated id in record {i}")))?;
        let id = String::from_utf8(id).map_err(|_| Error::Format(format!("record {i}: id is not UTF-8")))?;
        r.read_exact(&mut vec_bytes)
            .map_err(|_| Error::Format(format!("record {i} ({id:?}): fewer than {dim} floats")))?;
        let values = vec_bytes
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect();
        records.push((id, values));
    }
    let mut trailing = [0u8; 1];
    if r.read(&mut trailing).map_err(|e| Error::io("<xemb>", e))? != 0 {
        return Err(Error::Format(format!(
            "trailing bytes after {count} records (dimension mismatch?)"
        )));
    }
    Ok(XembFile { dim, records })
}

pub fn write_xemb<'a, W: Write>(
    out: W,
    dim: usize,
    records: impl ExactSizeIterator<Item = (&'a str, &'a [f32])>,
) -> Result<()> {
    let mut out = BufWriter::new(out);
    let io = |e| Error::io("<xemb>", e);
    out.write_all(XEMB_MAGIC).map_err(io)?;
    out.write_all(&XEMB_VERSION.to_le_bytes()).map_err(io)?;
    out.write_all(&(dim as u32).to_le_bytes()).map_err(io)?;
    out.write_all(&(records.len() as u32).to_le_bytes()).map_err(io)?;
    for (id, values) in records {
        if values.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: values.len(),
            });
        }
        let len = u16::try_from(id.len()).map_err(|_| Error::Format(format!("id {id:?} longer than 65535 bytes")))?;
        out.write_all(&len.to_le_bytes()).map_err(io)?;
        out.write_all(id.as_bytes()).map_err(io)?;
        for v in values {
            out.write_all(&v.to_le_bytes()).map_err(io)?;
        }
    }
    out.flush().map_err(io)
}

/// Builds a store from a corpus and raw vectors. Every corpus summary must
/// have exactly one vector and every vector id must exist in the corpus.
pub fn build_store(corpus: &Corpus, file: XembFile, expected_dim: Option<usize>) -> Result<EmbeddingStore> {
    if let Some(d) = expected_dim {
        if d != file.dim {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: file.dim,
            });
        }
    }
    let mut records = Vec::with_capacity(file.records.len());
    for (id, values) in file.records {
        let doc = corpus.get(&id).ok_or_else(|| Error::UnknownId(id.clone()))?;
        let embedding = EmbeddingVector::new(&id, values)?;
        records.push(SummaryRecord {
            doc_id: id,
            lang: doc.lang.clone(),
            embedding,
        });
    }
    let store = EmbeddingStore::from_records(file.dim, records)?;
    if let Some(missing) = corpus.documents().iter().find(|d| !store.contains(&d.id)) {
        return Err(Error::MissingEmbedding(missing.id.clone()));
    }
    Ok(store)
}

pub fn import_embeddings(corpus: &Corpus, vectors: &Path) -> Result<EmbeddingStore> {
    let file = File::open(vectors).map_err(|e| Error::io(vectors, e))?;
    build_store(corpus, read_xemb(BufReader::new(file))?, None)
}

/// Store built from an XEMB file alone; language comes from `lang_of`.
pub fn load_store_with(path: &Path, lang_of: impl Fn(&str) -> Option<LangCode>) -> Result<EmbeddingStore> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let raw = read_xemb(BufReader::new(file))?;
    let mut records = Vec::with_capacity(raw.records.len());
    for (id, values) in raw.records {
        let lang = lang_of(&id).ok_or_else(|| Error::UnknownId(id.clone()))?;
        let embedding = EmbeddingVector::new(&id, values)?;
        records.push(SummaryRecord {
            doc_id: id,
            lang,
            embedding,
        });
    }
    EmbeddingStore::from_records(raw.dim, records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus_io::Document;

    fn lang(s: &str) -> LangCode {
        LangCode::new(s).unwrap()
    }

    fn v(values: &[f32]) -> EmbeddingVector {
        EmbeddingVector::new("t", values.to_vec()).unwrap()
    }

    fn rec(id: &str, l: &str, values: &[f32]) -> SummaryRecord {
        SummaryRecord {
            doc_id: id.into(),
            lang: lang(l),
            embedding: v(values),
        }
    }

    #[test]
    fn similarity_examples() {
        let a = v(&[0.6, 0.8]);
        assert!((similarity(&a, &a).unwrap() - 1.0).abs() <= 1e-6);
        assert_eq!(similarity(&v(&[1.0, 0.0]), &v(&[0.0, 1.0])).unwrap(), 0.0);
        let s = similarity(&v(&[0.6, 0.8]), &v(&[0.8, 0.6])).unwrap();
        assert!((s - 0.96).abs() < 1e-6);
        assert!(matches!(
            similarity(&v(&[1.0, 0.0]), &v(&[1.0, 0.0, 0.0])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn norm_tolerance_rule() {
        let slightly_long = EmbeddingVector::new("x", vec![1.0005, 0.0]).unwrap();
        assert_eq!(slightly_long.as_slice(), &[1.0, 0.0]);
        assert!(matches!(
            EmbeddingVector::new("x", vec![0.9, 0.0]),
            Err(Error::Norm { .. })
        ));
        assert!(matches!(
            EmbeddingVector::new("x", vec![f32::NAN, 1.0]),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn nearest_examples() {
        let store = EmbeddingStore::from_records(
            2,
            vec![
                rec("a", "en", &[1.0, 0.0]),
                rec("b2", "fr", &[0.6, 0.8]),
                rec("b1", "fr", &[0.8, 0.6]),
                rec("z", "de", &[0.0, 1.0]),
            ],
        )
        .unwrap();
        let nn = store.nearest_in_language("a", &lang("fr")).unwrap().unwrap();
        assert_eq!(nn.neighbor_id, "b1");
        assert!((nn.similarity - 0.8).abs() < 1e-6);
        let single = store.nearest_in_language("a", &lang("de")).unwrap().unwrap();
        assert_eq!(single.neighbor_id, "z");
        assert!(store.nearest_in_language("a", &lang("ru")).unwrap().is_none());
        assert!(matches!(
            store.nearest_in_language("nope", &lang("fr")),
            Err(Error::UnknownId(_))
        ));
        assert!(matches!(
            store.nearest_in_language("a", &lang("en")),
            Err(Error::SameLanguage { .. })
        ));
    }

    #[test]
    fn ties_go_to_smaller_id() {
        let store = EmbeddingStore::from_records(
            2,
            vec![
                rec("q", "en", &[1.0, 0.0]),
                rec("y", "fr", &[0.6, 0.8]),
                rec("x", "fr", &[0.6, -0.8]),
            ],
        )
        .unwrap();
        let nn = store.nearest_in_language("q", &lang("fr")).unwrap().unwrap();
        assert_eq!(nn.neighbor_id, "x");
        let all = store.all_nearest(&lang("en"), &lang("fr"));
        assert_eq!(all.a_to_b["q"].as_ref().unwrap().neighbor_id, "x");
    }

    #[test]
    fn all_nearest_singletons_and_empty() {
        let store =
            EmbeddingStore::from_records(2, vec![rec("a", "en", &[1.0, 0.0]), rec("b", "fr", &[0.0, 1.0])]).unwrap();
        let all = store.all_nearest(&lang("en"), &lang("fr"));
        assert_eq!(all.a_to_b["a"].as_ref().unwrap().neighbor_id, "b");
        assert_eq!(all.b_to_a["b"].as_ref().unwrap().neighbor_id, "a");

        let empty_a = store.all_nearest(&lang("ru"), &lang("fr"));
        assert!(empty_a.a_to_b.is_empty());
        assert_eq!(empty_a.b_to_a.len(), 1);
        assert!(empty_a.b_to_a["b"].is_none());
    }

    #[test]
    fn import_checks_ids_and_coverage() {
        let docs = ["a", "b", "c"]
            .iter()
            .zip(["en", "fr", "de"])
            .map(|(id, l)| Document {
                id: id.to_string(),
                lang: lang(l),
                text: String::new(),
                summary: "s".into(),
            })
            .collect();
        let corpus = Corpus::from_documents(docs).unwrap();
        let file = |ids: &[&str]| XembFile {
            dim: 2,
            records: ids.iter().map(|id| (id.to_string(), vec![1.0, 0.0])).collect(),
        };
        let store = build_store(&corpus, file(&["a", "b", "c"]), None).unwrap();
        assert_eq!(store.len(), 3);
        assert!(matches!(
            build_store(&corpus, file(&["a", "b", "c", "d"]), None),
            Err(Error::UnknownId(id)) if id == "d"
        ));
        assert!(matches!(
            build_store(&corpus, file(&["a", "b"]), None),
            Err(Error::MissingEmbedding(id)) if id == "c"
        ));
        assert!(matches!(
            build_store(&corpus, file(&["a", "b", "c"]), Some(3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn xemb_layout_and_truncation() {
        let mut buf = Vec::new();
        let vals = [1.0f32, 0.0];
        write_xemb(&mut buf, 2, vec![("ab", &vals[..])].into_iter()).unwrap();
        assert_eq!(&buf[0..4], b"XEMB");
        assert_eq!(u32::from_le_bytes(buf[4..8].try_into().unwrap()), 1);
        assert_eq!(u32::from_le_bytes(buf[8..12].try_into().unwrap()), 2);
        assert_eq!(u32::from_le_bytes(buf[12..16].try_into().unwrap()), 1);
        assert_eq!(u16::from_le_bytes(buf[16..18].try_into().unwrap()), 2);
        assert_eq!(buf.len(), 16 + 2 + 2 + 8);
        let back = read_xemb(&buf[..]).unwrap();
        assert_eq!(back.records, vec![("ab".to_string(), vec![1.0, 0.0])]);
        assert!(matches!(read_xemb(&buf[..buf.len() - 1]), Err(Error::Format(_))));
        assert!(matches!(read_xemb(&b"XEMX"[..]), Err(Error::Format(_))));
    }
}
