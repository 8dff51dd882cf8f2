//! Corpus ingestion and the JSONL artifact formats shared by every stage.
//!
//! Corpus lines are `{"id", "lang", "text", "summary"}` objects. Pair files
//! carry one matched pair per line with the similarity fixed at six decimals,
//! ordered by `(lang_a, lang_b, a_id, b_id)` so that rewriting a file that was
//! read back produces the same bytes.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

use crate::aligner::{MatchedPair, PairKind};
use crate::error::{Error, Result};

pub const CORPUS_FORMAT_VERSION: u32 = 1;

/// Normalized language tag: lowercase ASCII, digits and hyphens, 2 to 15 chars.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct LangCode(String);

impl LangCode {
    pub fn new(raw: &str) -> Result<Self> {
        let code: String = raw
            .trim()
            .chars()
            .map(|c| if c == '_' { '-' } else { c.to_ascii_lowercase() })
            .collect();
        let valid_chars = code
            .bytes()
            .all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'-');
        if !(2..=15).contains(&code.len()) || !valid_chars {
            return Err(Error::InvalidLangCode(raw.to_string()));
        }
        Ok(LangCode(code))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for LangCode {
    type Error = Error;

    fn try_from(value: String) -> Result<Self> {
        LangCode::new(&value)
    }
}

impl From<LangCode> for String {
    fn from(value: LangCode) -> Self {
        value.0
    }
}

impl fmt::Display for LangCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::str::FromStr for LangCode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        LangCode::new(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub lang: LangCode,
    pub text: String,
    pub summary: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub languages: Vec<LangCode>,
    pub counts: BTreeMap<LangCode, usize>,
    pub format_version: u32,
}

impl CorpusManifest {
    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }
}

#[derive(Deserialize)]
struct RawDocument {
    id: String,
    lang: String,
    #[serde(default)]
    text: String,
    summary: String,
}

/// Streaming corpus reader. Yields documents in file order and accumulates
/// the manifest; call [`CorpusReader::manifest`] once the stream is drained.
pub struct CorpusReader<R> {
    lines: std::io::Lines<R>,
    line_no: usize,
    seen: HashSet<String>,
    counts: BTreeMap<LangCode, usize>,
    failed: bool,
}

impl<R: BufRead> CorpusReader<R> {
    pub fn new(reader: R) -> Self {
        CorpusReader {
            lines: reader.lines(),
            line_no: 0,
            seen: HashSet::new(),
            counts: BTreeMap::new(),
            failed: false,
        }
    }

    pub fn manifest(&self) -> CorpusManifest {
        CorpusManifest {
            languages: self.counts.keys().cloned().collect(),
            counts: self.counts.clone(),
            format_version: CORPUS_FORMAT_VERSION,
        }
    }

    fn parse_line(&mut self, line: &str) -> Result<Document> {
        let raw: RawDocument = serde_json::from_str(line).map_err(|e| Error::Parse {
            line: self.line_no,
            message: e.to_string(),
        })?;
        let lang = LangCode::new(&raw.lang).map_err(|e| Error::Parse {
            line: self.line_no,
            message: e.to_string(),
        })?;
        if raw.summary.trim().is_empty() {
            return Err(Error::Parse {
                line: self.line_no,
                message: "empty summary".into(),
            });
        }
        if !self.seen.insert(raw.id.clone()) {
            return Err(Error::DuplicateId(raw.id));
        }
        *self.counts.entry(lang.clone()).or_default() += 1;
        Ok(Document {
            id: raw.id,
            lang,
            text: raw.text,
            summary: raw.summary,
        })
    }
}

impl<R: BufRead> Iterator for CorpusReader<R> {
    type Item = Result<Document>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        loop {
            let line = match self.lines.next()? {
                Ok(line) => line,
                Err(e) => {
                    self.failed = true;
                    return Some(Err(Error::Parse {
                        line: self.line_no + 1,
                        message: e.to_string(),
                    }));
                }
            };
            self.line_no += 1;
            if line.trim().is_empty() {
                continue;
            }
            let item = self.parse_line(&line);
            self.failed = item.is_err();
            return Some(item);
        }
    }
}

/// A fully loaded corpus with an id index.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    docs: Vec<Document>,
    index: HashMap<String, usize>,
    manifest: CorpusManifest,
}

impl Corpus {
    pub fn from_documents(docs: Vec<Document>) -> Result<Self> {
        let mut index = HashMap::with_capacity(docs.len());
        let mut counts = BTreeMap::new();
        for (i, doc) in docs.iter().enumerate() {
            if index.insert(doc.id.clone(), i).is_some() {
                return Err(Error::DuplicateId(doc.id.clone()));
            }
            *counts.entry(doc.lang.clone()).or_default() += 1;
        }
        let manifest = CorpusManifest {
            languages: counts.keys().cloned().collect(),
            counts,
            format_version: CORPUS_FORMAT_VERSION,
        };
        Ok(Corpus { docs, index, manifest })
    }

    pub fn documents(&self) -> &[Document] {
        &self.docs
    }

    pub fn manifest(&self) -> &CorpusManifest {
        &self.manifest
    }

    pub fn get(&self, id: &str) -> Option<&Document> {
        self.index.get(id).map(|&i| &self.docs[i])
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }
}

pub fn open_reader(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| Error::io(path, e))
}

pub fn read_corpus<R: BufRead>(reader: R) -> Result<Corpus> {
    let docs = CorpusReader::new(reader).collect::<Result<Vec<_>>>()?;
    Corpus::from_documents(docs)
}

/// Loads a corpus JSONL file.
pub fn load_corpus(path: &Path) -> Result<Corpus> {
    read_corpus(open_reader(path)?)
}

pub fn write_corpus<W: Write>(docs: &[Document], mut out: W) -> Result<()> {
    for doc in docs {
        let line = serde_json::to_string(doc).map_err(|e| Error::Invalid(e.to_string()))?;
        writeln!(out, "{line}").map_err(|e| Error::io("<corpus>", e))?;
    }
    out.flush().map_err(|e| Error::io("<corpus>", e))
}

/// Similarity rendered with six decimals, e.g. `0.801235`.
pub fn format_similarity(sim: f32) -> String {
    format!("{sim:.6}")
}

#[derive(Serialize)]
struct PairLineOut<'a> {
    a_id: &'a str,
    b_id: &'a str,
    lang_a: &'a LangCode,
    lang_b: &'a LangCode,
    similarity: Box<RawValue>,
    kind: PairKind,
}

#[derive(Deserialize)]
struct PairLineIn {
    a_id: String,
    b_id: String,
    lang_a: LangCode,
    lang_b: LangCode,
    similarity: f32,
    kind: PairKind,
}

pub fn sort_pairs(pairs: &mut [MatchedPair]) {
    pairs.sort_by(|x, y| (&x.lang_a, &x.lang_b, &x.a_id, &x.b_id).cmp(&(&y.lang_a, &y.lang_b, &y.a_id, &y.b_id)));
}

/// Serializes pairs in canonical order. Every id must satisfy `resolves`.
pub fn write_pairs_to<W: Write>(pairs: &[MatchedPair], resolves: impl Fn(&str) -> bool, mut out: W) -> Result<()> {
    let mut sorted: Vec<&MatchedPair> = pairs.iter().collect();
    sorted.sort_by(|x, y| (&x.lang_a, &x.lang_b, &x.a_id, &x.b_id).cmp(&(&y.lang_a, &y.lang_b, &y.a_id, &y.b_id)));
    for p in sorted {
        for id in [&p.a_id, &p.b_id] {
            if !resolves(id) {
                return Err(Error::UnknownId(id.clone()));
            }
        }
        let similarity =
            RawValue::from_string(format_similarity(p.similarity)).map_err(|e| Error::Invalid(e.to_string()))?;
        let line = serde_json::to_string(&PairLineOut {
            a_id: &p.a_id,
            b_id: &p.b_id,
            lang_a: &p.lang_a,
            lang_b: &p.lang_b,
            similarity,
            kind: p.kind,
        })
        .map_err(|e| Error::Invalid(e.to_string()))?;
        writeln!(out, "{line}").map_err(|e| Error::io("<pairs>", e))?;
    }
    out.flush().map_err(|e| Error::io("<pairs>", e))
}

pub fn write_pairs(pairs: &[MatchedPair], corpus: &Corpus, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_pairs_to(pairs, |id| corpus.contains(id), BufWriter::new(file))
}

pub fn read_pairs_from<R: BufRead>(reader: R) -> Result<Vec<MatchedPair>> {
    read_jsonl_from::<PairLineIn, _>(reader)?
        .into_iter()
        .map(|p| {
            Ok(MatchedPair {
                a_id: p.a_id,
                b_id: p.b_id,
                lang_a: p.lang_a,
                lang_b: p.lang_b,
                similarity: p.similarity,
                kind: p.kind,
            })
        })
        .collect()
}

pub fn read_pairs(path: &Path) -> Result<Vec<MatchedPair>> {
    read_pairs_from(open_reader(path)?)
}

/// Generic JSONL reader used by the smaller artifact formats.
pub fn read_jsonl_from<T: DeserializeOwned, R: BufRead>(reader: R) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: i + 1,
            message: e.to_string(),
        })?);
    }
    Ok(out)
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    read_jsonl_from(open_reader(path)?)
}

pub fn write_jsonl_to<T: Serialize, W: Write>(items: &[T], mut out: W) -> Result<()> {
    for item in items {
        let line = serde_json::to_string(item).map_err(|e| Error::Invalid(e.to_string()))?;
        writeln!(out, "{line}").map_err(|e| Error::io("<jsonl>", e))?;
    }
    out.flush().map_err(|e| Error::io("<jsonl>", e))
}

pub fn read_to_bytes(path: &Path) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut buf))
        .map_err(|e| Error::io(path, e))?;
    Ok(buf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn lang(s: &str) -> LangCode {
        LangCode::new(s).unwrap()
    }

    #[test]
    fn lang_code_normalization() {
        assert_eq!(lang("zh-CN").as_str(), "zh-cn");
        assert_eq!(lang("pt_BR").as_str(), "pt-br");
        assert_eq!(lang(lang("Sr").as_str()), lang("sr"));
        assert!(LangCode::new("e").is_err());
        assert!(LangCode::new("").is_err());
        assert!(LangCode::new("en us").is_err());
        assert!(LangCode::new("abcdefghijklmnop").is_err());
    }

    #[test]
    fn manifest_counts_two_languages() {
        let input = r#"{"id":"1","lang":"en","text":"t","summary":"s"}
{"id":"2","lang":"bn","text":"t","summary":"s"}
"#;
        let corpus = read_corpus(Cursor::new(input)).unwrap();
        let m = corpus.manifest();
        assert_eq!(m.counts[&lang("en")], 1);
        assert_eq!(m.counts[&lang("bn")], 1);
        assert_eq!(m.languages, vec![lang("bn"), lang("en")]);
    }

    #[test]
    fn empty_corpus() {
        let corpus = read_corpus(Cursor::new("")).unwrap();
        assert!(corpus.is_empty());
        assert!(corpus.manifest().languages.is_empty());
        assert_eq!(corpus.manifest().total(), 0);
    }

    #[test]
    fn missing_summary_reports_line() {
        let input = r#"{"id":"1","lang":"en","text":"t","summary":"s"}
{"id":"2","lang":"en","text":"t"}
"#;
        match read_corpus(Cursor::new(input)) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn duplicate_id_is_named() {
        let input = r#"{"id":"x","lang":"en","text":"","summary":"s"}
{"id":"x","lang":"fr","text":"","summary":"s"}
"#;
        match read_corpus(Cursor::new(input)) {
            Err(Error::DuplicateId(id)) => assert_eq!(id, "x"),
            other => panic!("expected duplicate id, got {other:?}"),
        }
    }

    #[test]
    fn streaming_reader_yields_file_order() {
        let input = r#"{"id":"b","lang":"EN","text":"","summary":"s"}

{"id":"a","lang":"en","text":"","summary":"s"}
"#;
        let mut reader = CorpusReader::new(Cursor::new(input));
        let ids: Vec<String> = reader.by_ref().map(|d| d.unwrap().id).collect();
        assert_eq!(ids, vec!["b", "a"]);
        assert_eq!(reader.manifest().counts[&lang("en")], 2);
    }

    fn pair(a: &str, b: &str, sim: f32) -> MatchedPair {
        MatchedPair {
            a_id: a.into(),
            b_id: b.into(),
            lang_a: lang("bn"),
            lang_b: lang("en"),
            similarity: sim,
            kind: PairKind::Direct,
        }
    }

    #[test]
    fn empty_pair_list_writes_nothing() {
        let mut buf = Vec::new();
        write_pairs_to(&[], |_| true, &mut buf).unwrap();
        assert!(buf.is_empty());
    }

    #[test]
    fn similarity_rounded_to_six_places() {
        let mut buf = Vec::new();
        write_pairs_to(&[pair("a", "b", 0.801_234_9)], |_| true, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "{\"a_id\":\"a\",\"b_id\":\"b\",\"lang_a\":\"bn\",\"lang_b\":\"en\",\"similarity\":0.801235,\"kind\":\"direct\"}\n"
        );
    }

    #[test]
    fn unresolvable_id_rejected() {
        let mut buf = Vec::new();
        let err = write_pairs_to(&[pair("a", "ghost", 0.9)], |id| id == "a", &mut buf);
        assert!(matches!(err, Err(Error::UnknownId(id)) if id == "ghost"));
    }
}
