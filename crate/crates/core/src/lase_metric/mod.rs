//! Language-agnostic summary evaluation.
//!
//! The score is the product of meaning similarity (embedding inner product),
//! language confidence (1 when the intended target language is the argmax of
//! the generated text's language-ID distribution, its probability otherwise)
//! and a brevity-style length penalty with a token offset `c`.

pub mod correlation;
pub mod rouge;
pub mod tokens;

use std::collections::{BTreeMap, HashMap, HashSet};

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus_io::LangCode;
use crate::embedding_store::{dot, EmbeddingVector, XembFile};
use crate::error::{Error, Result};

pub use correlation::{correlate, Correlation};
pub use rouge::{rouge, RougeScore, RougeVariant};
pub use tokens::{segment_tokens, tokenize};

pub const DEFAULT_LENGTH_OFFSET: u32 = 6;
pub const DEFAULT_MIN_SAMPLES: usize = 500;
const DIST_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaseScore {
    pub ms: f64,
    pub lc: f64,
    pub lp: f64,
    pub lase: f64,
}

/// Probability distribution over languages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BTreeMap<String, f64>", into = "BTreeMap<String, f64>")]
pub struct LangIdDistribution {
    probs: BTreeMap<LangCode, f64>,
}

impl LangIdDistribution {
    pub fn new(probs: BTreeMap<LangCode, f64>) -> Result<Self> {
        if probs.values().any(|&p| !(p.is_finite() && p >= 0.0)) {
            return Err(Error::Invalid(
                "language probabilities must be finite and nonnegative".into(),
            ));
        }
        let sum: f64 = probs.values().sum();
        if (sum - 1.0).abs() > DIST_TOLERANCE {
            return Err(Error::Invalid(format!("language probabilities sum to {sum}, not 1")));
        }
        Ok(LangIdDistribution { probs })
    }

    pub fn uniform(langs: &[LangCode]) -> Self {
        let p = 1.0 / langs.len().max(1) as f64;
        LangIdDistribution {
            probs: langs.iter().map(|l| (l.clone(), p)).collect(),
        }
    }

    pub fn prob(&self, lang: &LangCode) -> f64 {
        self.probs.get(lang).copied().unwrap_or(0.0)
    }

    pub fn probs(&self) -> &BTreeMap<LangCode, f64> {
        &self.probs
    }

    /// Most probable language; ties go to the lexicographically smallest code.
    pub fn argmax(&self) -> Option<&LangCode> {
        let mut best: Option<(&LangCode, f64)> = None;
        for (l, &p) in &self.probs {
            if best.is_none_or(|(_, b)| p > b) {
                best = Some((l, p));
            }
        }
        best.map(|(l, _)| l)
    }
}

impl TryFrom<BTreeMap<String, f64>> for LangIdDistribution {
    type Error = Error;

    fn try_from(raw: BTreeMap<String, f64>) -> Result<Self> {
        let mut probs = BTreeMap::new();
        for (k, v) in raw {
            *probs.entry(LangCode::new(&k)?).or_insert(0.0) += v;
        }
        LangIdDistribution::new(probs)
    }
}

impl From<LangIdDistribution> for BTreeMap<String, f64> {
    fn from(d: LangIdDistribution) -> Self {
        d.probs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaseConfig {
    pub length_offset: u32,
    pub target_lang: LangCode,
}

impl LaseConfig {
    pub fn new(target_lang: LangCode) -> Self {
        LaseConfig {
            length_offset: DEFAULT_LENGTH_OFFSET,
            target_lang,
        }
    }
}

pub fn meaning_similarity(gen_emb: &EmbeddingVector, ref_emb: &EmbeddingVector) -> Result<f64> {
    if gen_emb.dim() != ref_emb.dim() {
        return Err(Error::DimensionMismatch {
            expected: ref_emb.dim(),
            found: gen_emb.dim(),
        });
    }
    Ok(f64::from(dot(gen_emb.as_slice(), ref_emb.as_slice())))
}

pub fn language_confidence(dist: &LangIdDistribution, target: &LangCode) -> f64 {
    if dist.argmax() == Some(target) {
        1.0
    } else {
        dist.prob(target)
    }
}

pub fn length_penalty(len_gen: usize, len_ref: usize, c: u32) -> f64 {
    let budget = len_ref + c as usize;
    if len_gen <= budget {
        return 1.0;
    }
    if budget == 0 {
        warn!("length penalty with zero reference budget; using the limit 0");
        return 0.0;
    }
    (1.0 - len_gen as f64 / budget as f64).exp()
}

pub fn lase(
    gen_text: &str,
    ref_text: &str,
    gen_emb: &EmbeddingVector,
    ref_emb: &EmbeddingVector,
    dist: &LangIdDistribution,
    cfg: &LaseConfig,
) -> Result<LaseScore> {
    let ms = meaning_similarity(gen_emb, ref_emb)?;
    let lc = language_confidence(dist, &cfg.target_lang);
    let lp = length_penalty(
        segment_tokens(gen_text, Some(&cfg.target_lang)),
        segment_tokens(ref_text, None),
        cfg.length_offset,
    );
    Ok(LaseScore {
        ms,
        lc,
        lp,
        lase: ms * lc * lp,
    })
}

/// Prediction or reference line: `{"id", "lang", "text"}`. Predictions may
/// carry `src_lang`; `lang` of a prediction is the intended target language.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextRecord {
    pub id: String,
    pub lang: LangCode,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub src_lang: Option<LangCode>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TextRole {
    Generated,
    Reference,
}

pub trait LangIdProvider: Sync {
    fn distribution(&self, id: &str, text: &str) -> Result<LangIdDistribution>;
}

pub trait EmbeddingProvider: Sync {
    fn embedding(&self, role: TextRole, id: &str, text: &str) -> Result<EmbeddingVector>;
}

/// Externally produced distributions keyed by id (`{"id", "probs"}` lines).
#[derive(Debug, Clone, Default)]
pub struct LangIdTable {
    table: HashMap<String, LangIdDistribution>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LangIdRecord {
    pub id: String,
    pub probs: LangIdDistribution,
}

impl LangIdTable {
    pub fn from_records(records: Vec<LangIdRecord>) -> Result<Self> {
        let mut table = HashMap::with_capacity(records.len());
        for r in records {
            if table.insert(r.id.clone(), r.probs).is_some() {
                return Err(Error::DuplicateId(r.id));
            }
        }
        Ok(LangIdTable { table })
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }
}

impl LangIdProvider for LangIdTable {
    fn distribution(&self, id: &str, _text: &str) -> Result<LangIdDistribution> {
        self.table
            .get(id)
            .cloned()
            .ok_or_else(|| Error::UnknownId(id.to_string()))
    }
}

/// Precomputed vectors for generated and reference texts, keyed by id.
#[derive(Debug, Clone, Default)]
pub struct VectorTable {
    generated: HashMap<String, EmbeddingVector>,
    reference: HashMap<String, EmbeddingVector>,
}

fn validated(file: XembFile) -> Result<HashMap<String, EmbeddingVector>> {
    let mut out = HashMap::with_capacity(file.records.len());
    for (id, values) in file.records {
        let v = EmbeddingVector::new(&id, values)?;
        if out.insert(id.clone(), v).is_some() {
            return Err(Error::DuplicateId(id));
        }
    }
    Ok(out)
}

impl VectorTable {
    pub fn new(generated: XembFile, reference: XembFile) -> Result<Self> {
        if generated.dim != reference.dim {
            return Err(Error::DimensionMismatch {
                expected: reference.dim,
                found: generated.dim,
            });
        }
        Ok(VectorTable {
            generated: validated(generated)?,
            reference: validated(reference)?,
        })
    }
}

impl EmbeddingProvider for VectorTable {
    fn embedding(&self, role: TextRole, id: &str, _text: &str) -> Result<EmbeddingVector> {
        let table = match role {
            TextRole::Generated => &self.generated,
            TextRole::Reference => &self.reference,
        };
        table
            .get(id)
            .cloned()
            .ok_or_else(|| Error::MissingEmbedding(id.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub length_offset: u32,
    pub min_samples: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            length_offset: DEFAULT_LENGTH_OFFSET,
            min_samples: DEFAULT_MIN_SAMPLES,
        }
    }
}

/// One line of the score report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleScore {
    pub id: String,
    pub src_lang: LangCode,
    pub tgt_lang: LangCode,
    pub ms: f64,
    pub lc: f64,
    pub lp: f64,
    pub lase: f64,
    pub rouge1: RougeScore,
    pub rouge2: RougeScore,
    #[serde(rename = "rougeL")]
    pub rouge_l: RougeScore,
    pub len_gen: usize,
    pub len_ref: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairAggregate {
    pub src_lang: LangCode,
    pub tgt_lang: LangCode,
    pub n: usize,
    pub mean_lase: f64,
    pub mean_rouge2_f1: f64,
    pub low_confidence: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    /// Sorted by id.
    pub samples: Vec<SampleScore>,
    /// Sorted by `(src_lang, tgt_lang)`.
    pub aggregates: Vec<PairAggregate>,
}

/// Scores every prediction against the reference with the same id. The
/// source language of an aggregate is the prediction's `src_lang`, falling
/// back to the reference language.
pub fn evaluate_run(
    predictions: &[TextRecord],
    references: &[TextRecord],
    cfg: &EvalConfig,
    langid: &dyn LangIdProvider,
    embedder: &dyn EmbeddingProvider,
) -> Result<EvalReport> {
    if predictions.is_empty() {
        return Err(Error::Invalid("prediction set is empty".into()));
    }
    let mut refs: HashMap<&str, &TextRecord> = HashMap::with_capacity(references.len());
    for r in references {
        if refs.insert(r.id.as_str(), r).is_some() {
            return Err(Error::DuplicateId(r.id.clone()));
        }
    }
    let mut seen = HashSet::new();
    let mut missing = Vec::new();
    for p in predictions {
        if !seen.insert(p.id.as_str()) {
            return Err(Error::DuplicateId(p.id.clone()));
        }
        if !refs.contains_key(p.id.as_str()) {
            missing.push(p.id.clone());
        }
    }
    if !missing.is_empty() {
        missing.sort();
        return Err(Error::MissingReferences(missing));
    }

    let mut samples: Vec<SampleScore> = predictions
        .par_iter()
        .map(|p| -> Result<SampleScore> {
            let r = refs[p.id.as_str()];
            let dist = langid.distribution(&p.id, &p.text)?;
            let gen_emb = embedder.embedding(TextRole::Generated, &p.id, &p.text)?;
            let ref_emb = embedder.embedding(TextRole::Reference, &r.id, &r.text)?;
            let lcfg = LaseConfig {
                length_offset: cfg.length_offset,
                target_lang: p.lang.clone(),
            };
            let score = lase(&p.text, &r.text, &gen_emb, &ref_emb, &dist, &lcfg)?;
            Ok(SampleScore {
                id: p.id.clone(),
                src_lang: p.src_lang.clone().unwrap_or_else(|| r.lang.clone()),
                tgt_lang: p.lang.clone(),
                ms: score.ms,
                lc: score.lc,
                lp: score.lp,
                lase: score.lase,
                rouge1: rouge(&p.text, &r.text, RougeVariant::N(1)),
                rouge2: rouge(&p.text, &r.text, RougeVariant::N(2)),
                rouge_l: rouge(&p.text, &r.text, RougeVariant::L),
                len_gen: segment_tokens(&p.text, Some(&p.lang)),
                len_ref: segment_tokens(&r.text, Some(&r.lang)),
            })
        })
        .collect::<Result<_>>()?;
    samples.sort_by(|a, b| a.id.cmp(&b.id));

    let mut groups: BTreeMap<(&LangCode, &LangCode), Vec<&SampleScore>> = BTreeMap::new();
    for s in &samples {
        groups.entry((&s.src_lang, &s.tgt_lang)).or_default().push(s);
    }
    let aggregates = groups
        .into_iter()
        .map(|((src, tgt), group)| {
            let n = group.len();
            let mean = |f: fn(&SampleScore) -> f64| group.iter().map(|s| f(s)).sum::<f64>() / n as f64;
            PairAggregate {
                src_lang: src.clone(),
                tgt_lang: tgt.clone(),
                n,
                mean_lase: mean(|s| s.lase),
                mean_rouge2_f1: mean(|s| s.rouge2.f1),
                low_confidence: n < cfg.min_samples,
            }
        })
        .collect();
    Ok(EvalReport { samples, aggregates })
}
