//! Direct cross-lingual pairs: mutual nearest neighbors above a threshold.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus_io::LangCode;
use crate::embedding_store::EmbeddingStore;
use crate::error::{Error, Result};

/// Default similarity threshold for direct pairs.
pub const DEFAULT_TAU: f32 = 0.7437;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlignConfig {
    pub tau: f32,
}

impl Default for AlignConfig {
    fn default() -> Self {
        AlignConfig { tau: DEFAULT_TAU }
    }
}

impl AlignConfig {
    pub fn new(tau: f32) -> Result<Self> {
        let cfg = AlignConfig { tau };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(Error::Config(format!("tau must lie in (0, 1), got {}", self.tau)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairKind {
    Direct,
    Induced,
}

/// A cross-lingual pair, canonically oriented so that `lang_a < lang_b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchedPair {
    pub a_id: String,
    pub b_id: String,
    pub lang_a: LangCode,
    pub lang_b: LangCode,
    pub similarity: f32,
    pub kind: PairKind,
}

impl MatchedPair {
    /// Orients the endpoints so the smaller language comes first.
    pub fn oriented(
        x_id: String,
        x_lang: LangCode,
        y_id: String,
        y_lang: LangCode,
        similarity: f32,
        kind: PairKind,
    ) -> Self {
        if x_lang <= y_lang {
            MatchedPair {
                a_id: x_id,
                b_id: y_id,
                lang_a: x_lang,
                lang_b: y_lang,
                similarity,
                kind,
            }
        } else {
            MatchedPair {
                a_id: y_id,
                b_id: x_id,
                lang_a: y_lang,
                lang_b: x_lang,
                similarity,
                kind,
            }
        }
    }

    pub fn key(&self) -> (&str, &str) {
        (&self.a_id, &self.b_id)
    }
}

/// Direct pairs between two languages, sorted by `a_id`.
pub fn align_language_pair(
    store: &EmbeddingStore,
    lang_a: &LangCode,
    lang_b: &LangCode,
    cfg: &AlignConfig,
) -> Vec<MatchedPair> {
    if lang_a == lang_b {
        return Vec::new();
    }
    let (lang_a, lang_b) = if lang_a < lang_b {
        (lang_a, lang_b)
    } else {
        (lang_b, lang_a)
    };
    let (Some(ba), Some(bb)) = (store.block_index(lang_a), store.block_index(lang_b)) else {
        return Vec::new();
    };
    let a_to_b = store.nearest_rows(ba, bb);
    let b_to_a = store.nearest_rows(bb, ba);
    let ids_a = store.ids_in(lang_a);
    let ids_b = store.ids_in(lang_b);
    // a-rows are visited in ascending id order, so the output is sorted by a_id.
    a_to_b
        .iter()
        .enumerate()
        .filter_map(|(ra, hit)| {
            let (rb, sim) = (*hit)?;
            let (back, _) = b_to_a[rb]?;
            (back == ra && sim >= cfg.tau).then(|| MatchedPair {
                a_id: ids_a[ra].clone(),
                b_id: ids_b[rb].clone(),
                lang_a: lang_a.clone(),
                lang_b: lang_b.clone(),
                similarity: sim,
                kind: PairKind::Direct,
            })
        })
        .collect()
}

/// Union of [`align_language_pair`] over every unordered language pair, in
/// `(lang_a, lang_b, a_id)` order.
pub fn align_all(store: &EmbeddingStore, languages: &[LangCode], cfg: &AlignConfig) -> Vec<MatchedPair> {
    let mut langs = languages.to_vec();
    langs.sort();
    langs.dedup();
    let mut combos = Vec::new();
    for i in 0..langs.len() {
        for j in i + 1..langs.len() {
            combos.push((&langs[i], &langs[j]));
        }
    }
    combos
        .par_iter()
        .map(|(a, b)| align_language_pair(store, a, b, cfg))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}
