//! Character 1–3-gram language identifier.
//!
//! Text is lowercased and padded with one space on each side. Each language
//! keeps raw n-gram counts per order; log-probabilities use add-one smoothing
//! over the vocabulary of that order across all trained languages. A text is
//! scored by the mean log-probability of its n-grams and the scores are turned
//! into a distribution with a softmax.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::corpus_io::LangCode;
use crate::error::{Error, Result};
use crate::lase_metric::{LangIdDistribution, LangIdProvider};

pub const XLID_MAGIC: &[u8; 4] = b"XLID";
pub const XLID_VERSION: u32 = 1;
const MAX_ORDER: usize = 3;

fn ngrams(text: &str) -> Vec<String> {
    let chars: Vec<char> = std::iter::once(' ')
        .chain(
            text.to_lowercase()
                .split_whitespace()
                .flat_map(|w| w.chars().chain([' '])),
        )
        .collect();
    let mut out = Vec::new();
    for n in 1..=MAX_ORDER {
        if chars.len() < n {
            break;
        }
        for w in chars.windows(n) {
            if n == 1 && w[0] == ' ' {
                continue;
            }
            out.push(w.iter().collect());
        }
    }
    out
}

fn order_of(gram: &str) -> usize {
    gram.chars().count()
}

#[derive(Debug, Clone, PartialEq)]
struct LanguageTable {
    lang: LangCode,
    counts: BTreeMap<String, u32>,
    totals: [u64; MAX_ORDER],
}

#[derive(Debug, Clone, PartialEq)]
pub struct LangIdModel {
    tables: Vec<LanguageTable>,
    vocab: [u64; MAX_ORDER],
    log_probs: Vec<BTreeMap<String, f64>>,
    unseen: Vec<[f64; MAX_ORDER]>,
}

/// Output of [`LangIdModel::classify`]; `fallback` marks the uniform answer
/// given for text without any n-grams.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub distribution: LangIdDistribution,
    pub fallback: bool,
}

impl LangIdModel {
    pub fn train<'a>(corpus: impl IntoIterator<Item = (&'a LangCode, &'a str)>) -> Result<Self> {
        let mut by_lang: BTreeMap<LangCode, LanguageTable> = BTreeMap::new();
        for (lang, text) in corpus {
            let table = by_lang.entry(lang.clone()).or_insert_with(|| LanguageTable {
                lang: lang.clone(),
                counts: BTreeMap::new(),
                totals: [0; MAX_ORDER],
            });
            for g in ngrams(text) {
                table.totals[order_of(&g) - 1] += 1;
                *table.counts.entry(g).or_insert(0) += 1;
            }
        }
        if by_lang.is_empty() {
            return Err(Error::Invalid("no training text".into()));
        }
        if let Some(empty) = by_lang.values().find(|t| t.counts.is_empty()) {
            return Err(Error::EmptyLanguage(empty.lang.to_string()));
        }
        Ok(Self::from_tables(by_lang.into_values().collect()))
    }

    fn from_tables(tables: Vec<LanguageTable>) -> Self {
        let mut vocab_sets: [std::collections::BTreeSet<&str>; MAX_ORDER] = Default::default();
        for t in &tables {
            for g in t.counts.keys() {
                vocab_sets[order_of(g) - 1].insert(g);
            }
        }
        // one extra slot per order for unseen n-grams
        let vocab = [0, 1, 2].map(|i| vocab_sets[i].len() as u64 + 1);
        let mut log_probs = Vec::with_capacity(tables.len());
        let mut unseen = Vec::with_capacity(tables.len());
        for t in &tables {
            let denom = [0, 1, 2].map(|i| (t.totals[i] + vocab[i]) as f64);
            log_probs.push(
                t.counts
                    .iter()
                    .map(|(g, &c)| (g.clone(), ((f64::from(c) + 1.0) / denom[order_of(g) - 1]).ln()))
                    .collect(),
            );
            unseen.push(denom.map(|d| (1.0 / d).ln()));
        }
        LangIdModel {
            tables,
            vocab,
            log_probs,
            unseen,
        }
    }

    pub fn languages(&self) -> Vec<LangCode> {
        self.tables.iter().map(|t| t.lang.clone()).collect()
    }

    pub fn classify(&self, text: &str) -> Classification {
        let grams = ngrams(text);
        let langs = self.languages();
        if grams.is_empty() {
            return Classification {
                distribution: LangIdDistribution::uniform(&langs),
                fallback: true,
            };
        }
        let scores: Vec<f64> = (0..self.tables.len())
            .map(|k| {
                let sum: f64 = grams
                    .iter()
                    .map(|g| {
                        self.log_probs[k]
                            .get(g)
                            .copied()
                            .unwrap_or(self.unseen[k][order_of(g) - 1])
                    })
                    .sum();
                sum / grams.len() as f64
            })
            .collect();
        let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
        let z: f64 = exps.iter().sum();
        let probs = langs.into_iter().zip(exps.iter().map(|e| e / z)).collect();
        Classification {
            distribution: LangIdDistribution::new(probs).expect("softmax output is a distribution"),
            fallback: false,
        }
    }

    /// Serializes raw counts; log tables are rebuilt on load.
    pub fn write_to<W: Write>(&self, mut out: W) -> Result<()> {
        let io = |e| Error::io("<xlid>", e);
        let mut buf = Vec::new();
        buf.extend_from_slice(XLID_MAGIC);
        buf.extend_from_slice(&XLID_VERSION.to_le_bytes());
        buf.extend_from_slice(&(self.tables.len() as u32).to_le_bytes());
        for t in &self.tables {
            put_str(&mut buf, t.lang.as_str())?;
            for total in t.totals {
                buf.extend_from_slice(&total.to_le_bytes());
            }
            buf.extend_from_slice(&(t.counts.len() as u32).to_le_bytes());
            for (g, &c) in &t.counts {
                put_str(&mut buf, g)?;
                buf.extend_from_slice(&c.to_le_bytes());
            }
        }
        out.write_all(&buf).map_err(io)?;
        out.flush().map_err(io)
    }

    pub fn read_from<R: Read>(mut input: R) -> Result<Self> {
        let mut buf = Vec::new();
        input.read_to_end(&mut buf).map_err(|e| Error::io("<xlid>", e))?;
        let mut cur = Cursor { buf: &buf, pos: 0 };
        if cur.take(4)? != XLID_MAGIC {
            return Err(Error::Format("bad langid model magic".into()));
        }
        let version = cur.u32()?;
        if version != XLID_VERSION {
            return Err(Error::Format(format!("unsupported langid model version {version}")));
        }
        let n = cur.u32()? as usize;
        let mut tables = Vec::with_capacity(n);
        for _ in 0..n {
            let lang = LangCode::new(&cur.string()?)?;
            let mut totals = [0u64; MAX_ORDER];
            for t in &mut totals {
                *t = cur.u64()?;
            }
            let entries = cur.u32()? as usize;
            let mut counts = BTreeMap::new();
            for _ in 0..entries {
                let g = cur.string()?;
                let c = cur.u32()?;
                counts.insert(g, c);
            }
            if counts.is_empty() {
                return Err(Error::EmptyLanguage(lang.to_string()));
            }
            tables.push(LanguageTable { lang, counts, totals });
        }
        if cur.pos != buf.len() {
            return Err(Error::Format("trailing bytes in langid model".into()));
        }
        if tables.is_empty() {
            return Err(Error::Format("langid model has no languages".into()));
        }
        Ok(Self::from_tables(tables))
    }

    pub fn vocabulary_sizes(&self) -> [u64; MAX_ORDER] {
        self.vocab
    }
}

impl LangIdProvider for LangIdModel {
    fn distribution(&self, _id: &str, text: &str) -> Result<LangIdDistribution> {
        Ok(self.classify(text).distribution)
    }
}

fn put_str(buf: &mut Vec<u8>, s: &str) -> Result<()> {
    let len = u16::try_from(s.len()).map_err(|_| Error::Format(format!("string too long: {s:?}")))?;
    buf.extend_from_slice(&len.to_le_bytes());
    buf.extend_from_slice(s.as_bytes());
    Ok(())
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos + n;
        if end > self.buf.len() {
            return Err(Error::Format("truncated langid model".into()));
        }
        let out = &self.buf[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn string(&mut self) -> Result<String> {
        let len = u16::from_le_bytes(self.take(2)?.try_into().expect("2 bytes")) as usize;
        String::from_utf8(self.take(len)?.to_vec()).map_err(|_| Error::Format("non-UTF-8 string".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lang(s: &str) -> LangCode {
        LangCode::new(s).unwrap()
    }

    #[test]
    fn single_language_is_certain() {
        let en = lang("en");
        let model = LangIdModel::train([(&en, "hello world")]).unwrap();
        let c = model.classify("anything at all");
        assert_eq!(c.distribution.prob(&en), 1.0);
        assert!(!c.fallback);
    }

    #[test]
    fn empty_text_falls_back_to_uniform() {
        let (en, ru) = (lang("en"), lang("ru"));
        let model = LangIdModel::train([(&en, "hello"), (&ru, "привет")]).unwrap();
        let c = model.classify("   ");
        assert!(c.fallback);
        assert_eq!(c.distribution.prob(&en), 0.5);
    }

    #[test]
    fn training_sentence_is_argmax() {
        let (en, ru) = (lang("en"), lang("ru"));
        let model = LangIdModel::train([(&en, "the quick brown fox"), (&ru, "быстрая бурая лиса")]).unwrap();
        assert_eq!(model.classify("the quick brown fox").distribution.argmax(), Some(&en));
        assert_eq!(model.classify("быстрая бурая лиса").distribution.argmax(), Some(&ru));
    }

    #[test]
    fn empty_language_rejected() {
        let (en, fr) = (lang("en"), lang("fr"));
        assert!(matches!(
            LangIdModel::train([(&en, "hello"), (&fr, "  ")]),
            Err(Error::EmptyLanguage(l)) if l == "fr"
        ));
    }

    #[test]
    fn model_bytes_roundtrip_and_determinism() {
        let (en, ru) = (lang("en"), lang("ru"));
        let corpus = [(&en, "one two three"), (&ru, "один два три")];
        let a = LangIdModel::train(corpus).unwrap();
        let b = LangIdModel::train(corpus).unwrap();
        let (mut ba, mut bb) = (Vec::new(), Vec::new());
        a.write_to(&mut ba).unwrap();
        b.write_to(&mut bb).unwrap();
        assert_eq!(ba, bb);
        assert_eq!(&ba[..4], b"XLID");
        let back = LangIdModel::read_from(&ba[..]).unwrap();
        assert_eq!(back, a);
        assert!(LangIdModel::read_from(&ba[..ba.len() - 1]).is_err());
    }
}
