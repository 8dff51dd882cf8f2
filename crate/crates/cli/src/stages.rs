use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use log::info;
use serde::{Deserialize, Serialize};

use xsum_forge::corpus_io::{
    read_corpus, read_jsonl_from, read_pairs_from, write_corpus, write_jsonl_to, write_pairs_to,
};
use xsum_forge::dataset_builder::{
    apply_dedup, component_loads, plain_pairs, rebuild_components, stats_matrix, DuplicateGroup, SplitRecord,
};
use xsum_forge::embedding_store::{build_store, read_xemb, write_xemb};
use xsum_forge::lase_metric::correlation::{correlate, Correlation};
use xsum_forge::lase_metric::{
    EvalConfig, LangIdProvider, LangIdRecord, LangIdTable, SampleScore, TextRecord, VectorTable,
};
use xsum_forge::pair_graph::{attach_components, finalize_pairs, ComponentRecord};
use xsum_forge::sampler::{PairCounts, SamplePools};
use xsum_forge::synthetic::{evaluation_fixture, generate_corpus, SynthConfig};
use xsum_forge::*;

use crate::config::PipelineConfig;
use crate::workdir::*;

fn jsonl<T: Serialize>(items: &[T]) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_jsonl_to(items, &mut buf)?;
    Ok(buf)
}

fn pairs_bytes(pairs: &[MatchedPair], store: &EmbeddingStore) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_pairs_to(pairs, |id| store.contains(id), &mut buf)?;
    Ok(buf)
}

fn load_corpus(run: &mut StageRun) -> Result<Corpus> {
    let bytes = run.read(CORPUS)?;
    Ok(read_corpus(&bytes[..])?)
}

fn load_store(run: &mut StageRun, corpus: &Corpus) -> Result<EmbeddingStore> {
    let bytes = run.read(STORE)?;
    Ok(build_store(corpus, read_xemb(&bytes[..])?, None)?)
}

fn load_component_pairs(
    run: &mut StageRun,
    pairs: &str,
    components: &str,
) -> Result<(Vec<ComponentPair>, Vec<ComponentRecord>)> {
    let p = read_pairs_from(&run.read(pairs)?[..])?;
    let c: Vec<ComponentRecord> = read_jsonl_from(&run.read(components)?[..])?;
    Ok((attach_components(p, &c)?, c))
}

pub fn embed_import(work: &Path, cfg: &PipelineConfig, corpus_path: &Path, vectors: &Path) -> Result<()> {
    let mut run = StageRun::new(work, "embed-import", cfg.render());
    let corpus = read_corpus(&run.read_external("corpus", corpus_path)?[..])?;
    let store = build_store(&corpus, read_xemb(&run.read_external("vectors", vectors)?[..])?, None)?;
    let mut corpus_bytes = Vec::new();
    write_corpus(corpus.documents(), &mut corpus_bytes)?;
    let mut store_bytes = Vec::new();
    store.write_xemb(&mut store_bytes)?;
    run.write(CORPUS, &corpus_bytes)?;
    run.write(STORE, &store_bytes)?;
    run.finish()?;
    let m = corpus.manifest();
    println!(
        "embed-import: {} summaries, {} languages, dimension {}",
        m.total(),
        m.languages.len(),
        store.dim()
    );
    Ok(())
}

pub fn align(work: &Path, cfg: &PipelineConfig) -> Result<()> {
    let mut run = StageRun::new(work, "align", cfg.render());
    let corpus = load_corpus(&mut run)?;
    let store = load_store(&mut run, &corpus)?;
    let pairs = align_all(&store, &store.languages(), &cfg.align()?);
    run.write(DIRECT_PAIRS, &pairs_bytes(&pairs, &store)?)?;
    run.finish()?;
    let min = pairs.iter().map(|p| p.similarity).fold(f32::INFINITY, f32::min);
    println!(
        "align: {} direct pairs (min similarity {})",
        pairs.len(),
        if pairs.is_empty() {
            "n/a".into()
        } else {
            format!("{min:.6}")
        }
    );
    Ok(())
}

pub fn induce(work: &Path, cfg: &PipelineConfig) -> Result<()> {
    let mut run = StageRun::new(work, "induce", cfg.render());
    let corpus = load_corpus(&mut run)?;
    let store = load_store(&mut run, &corpus)?;
    let direct = read_pairs_from(&run.read(DIRECT_PAIRS)?[..])?;
    let cap = cfg.cap();
    let graph = cap_components(build_graph(&direct)?, &cap)?;
    let induced = induced_pairs(&graph, &store, &cap)?;
    let finals = finalize_pairs(&graph, &induced)?;
    run.write(PAIRS, &pairs_bytes(&plain_pairs(&finals), &store)?)?;
    run.write(COMPONENTS, &jsonl(&graph.component_records())?)?;
    run.write(CUT_EDGES, &jsonl(graph.removed_edges())?)?;
    run.finish()?;
    println!(
        "induce: {} components, {} cut edges, {} direct + {} induced pairs",
        graph.component_sizes().len(),
        graph.removed_edges().len(),
        graph.edge_count(),
        induced.len()
    );
    Ok(())
}

pub fn dedup(work: &Path, cfg: &PipelineConfig) -> Result<()> {
    let mut run = StageRun::new(work, "dedup", cfg.render());
    let corpus = load_corpus(&mut run)?;
    let store = load_store(&mut run, &corpus)?;
    let (pairs, components) = load_component_pairs(&mut run, PAIRS, COMPONENTS)?;
    let groups = semantic_dedup_all(&store, cfg.dedup_threshold);
    let map = DedupMap::from_groups(&groups);
    let outcome = apply_dedup(pairs, &map);
    let records = rebuild_components(&outcome.pairs, &components, &outcome.remap);
    run.write(DEDUP_GROUPS, &jsonl(&groups)?)?;
    run.write(DEDUP_PAIRS, &pairs_bytes(&plain_pairs(&outcome.pairs), &store)?)?;
    run.write(DEDUP_COMPONENTS, &jsonl(&records)?)?;
    run.finish()?;
    println!(
        "dedup: {} groups, {} summaries dropped, {} pairs kept",
        groups.len(),
        map.dropped_count(),
        outcome.pairs.len()
    );
    Ok(())
}

pub fn split(work: &Path, cfg: &PipelineConfig) -> Result<()> {
    let mut run = StageRun::new(work, "split", cfg.render());
    let (pairs, _) = load_component_pairs(&mut run, DEDUP_PAIRS, DEDUP_COMPONENTS)?;
    let (manifest, warnings) = assign_splits(&component_loads(&pairs), &cfg.ratios, cfg.seed)?;
    for w in &warnings {
        log::warn!("{}", w.message);
    }
    run.write(SPLITS, &jsonl(&manifest.records())?)?;
    run.write(SPLIT_WARNINGS, &jsonl(&warnings)?)?;
    run.finish()?;
    let mut per: BTreeMap<Split, usize> = BTreeMap::new();
    for s in manifest.assignment.values() {
        *per.entry(*s).or_default() += 1;
    }
    println!(
        "split: {} components (train {}, dev {}, test {}), {} warnings",
        manifest.assignment.len(),
        per.get(&Split::Train).unwrap_or(&0),
        per.get(&Split::Dev).unwrap_or(&0),
        per.get(&Split::Test).unwrap_or(&0),
        warnings.len()
    );
    Ok(())
}

pub fn materialize_stage(work: &Path, cfg: &PipelineConfig, in_language: bool) -> Result<()> {
    let mut run = StageRun::new(work, "materialize", cfg.render());
    run.param("in_language", in_language);
    let corpus = load_corpus(&mut run)?;
    let (pairs, _) = load_component_pairs(&mut run, DEDUP_PAIRS, DEDUP_COMPONENTS)?;
    let records: Vec<SplitRecord> = read_jsonl_from(&run.read(SPLITS)?[..])?;
    let manifest = SplitManifest::from_records(&records, cfg.seed, cfg.ratios)?;
    let groups: Vec<DuplicateGroup> = read_jsonl_from(&run.read(DEDUP_GROUPS)?[..])?;
    let out = materialize(&corpus, &pairs, &manifest, in_language, &DedupMap::from_groups(&groups))?;
    let dir = run.path(SAMPLES);
    if dir.exists() {
        std::fs::remove_dir_all(&dir).with_context(|| format!("clearing {}", dir.display()))?;
    }
    std::fs::create_dir_all(&dir)?;
    for ((split, src, tgt), samples) in out.by_file() {
        let owned: Vec<&CrossSample> = samples;
        run.write(&format!("{SAMPLES}/{split}/{src}_{tgt}.jsonl"), &jsonl(&owned)?)?;
    }
    run.finish()?;
    println!(
        "materialize: {} samples, {} pairs skipped",
        out.samples.len(),
        out.skipped.len()
    );
    Ok(())
}

/// Sample files under `samples/`, optionally restricted to one split.
fn sample_files(run: &StageRun, split: Option<Split>) -> Result<Vec<String>> {
    let root = run.require(SAMPLES)?;
    let mut files = Vec::new();
    for s in Split::ALL {
        if split.is_some_and(|x| x != s) {
            continue;
        }
        let dir = root.join(s.as_str());
        if !dir.exists() {
            continue;
        }
        for entry in std::fs::read_dir(&dir)? {
            let name = entry?.file_name().to_string_lossy().into_owned();
            if name.ends_with(".jsonl") {
                files.push(format!("{SAMPLES}/{s}/{name}"));
            }
        }
    }
    files.sort();
    Ok(files)
}

fn read_samples(run: &mut StageRun, split: Option<Split>) -> Result<Vec<CrossSample>> {
    let mut out = Vec::new();
    for f in sample_files(run, split)? {
        out.extend(read_jsonl_from::<CrossSample, _>(&run.read(&f)?[..])?);
    }
    Ok(out)
}

pub fn stats(work: &Path, cfg: &PipelineConfig, split: Option<Split>) -> Result<()> {
    let mut run = StageRun::new(work, "stats", cfg.render());
    run.param("split", split.map(|s| s.as_str()).unwrap_or("all"));
    let samples = read_samples(&mut run, split)?;
    let axes = if run.path(CORPUS).exists() {
        load_corpus(&mut run)?.manifest().languages.clone()
    } else {
        Vec::new()
    };
    let matrix = stats_matrix(&samples);
    let tsv = matrix.render_tsv(&axes);
    run.write(STATS, tsv.as_bytes())?;
    run.finish()?;
    print!("{tsv}");
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct PlanFile {
    counts: PairCounts,
    min_pair_count: u64,
    plan: SamplingPlan,
}

pub fn plan(work: &Path, cfg: &PipelineConfig) -> Result<()> {
    let mut run = StageRun::new(work, "plan", cfg.render());
    let samples = read_samples(&mut run, Some(Split::Train))?;
    let mut map: BTreeMap<(LangCode, LangCode), u64> = BTreeMap::new();
    for s in &samples {
        *map.entry((s.src_lang.clone(), s.tgt_lang.clone())).or_default() += 1;
    }
    let counts = PairCounts::from_map(&map).with_floor(cfg.min_pair_count);
    let plan = compute_plan(&counts, cfg.alpha, cfg.beta)
        .with_context(|| format!("no training language pair has at least {} samples", cfg.min_pair_count))?;
    let file = PlanFile {
        counts,
        min_pair_count: cfg.min_pair_count,
        plan,
    };
    let mut bytes = serde_json::to_vec_pretty(&file)?;
    bytes.push(b'\n');
    run.write(PLAN, &bytes)?;
    run.finish()?;
    println!("plan: {} languages", file.plan.languages.len());
    Ok(())
}

pub fn sample(work: &Path, cfg: &PipelineConfig, steps: u64) -> Result<()> {
    let mut run = StageRun::new(work, "sample", cfg.render());
    run.param("steps", steps);
    let file: PlanFile = serde_json::from_slice(&run.read(PLAN)?).context("parsing plan.json")?;
    let samples = read_samples(&mut run, Some(Split::Train))?;
    let pools = SamplePools::from_samples(
        &file.plan.languages,
        samples.iter().map(|s| (&s.src_lang, &s.tgt_lang, s.sample_id())),
    );
    let mut records = Vec::with_capacity(steps as usize);
    for (step, batch) in training_feed(&file.plan, &pools, steps, cfg.m, cfg.mb, cfg.seed).enumerate() {
        records.push(batch?.to_record(step as u64, &file.plan, &pools));
    }
    run.write(BATCHES, &jsonl(&records)?)?;
    run.finish()?;
    println!("sample: {} batches of {} x {}", records.len(), cfg.m, cfg.mb);
    Ok(())
}

pub struct EvalInputs {
    pub predictions: PathBuf,
    pub references: PathBuf,
    pub gen_vectors: PathBuf,
    pub ref_vectors: PathBuf,
    pub langid_model: Option<PathBuf>,
    pub langid_jsonl: Option<PathBuf>,
}

pub fn evaluate(work: &Path, cfg: &PipelineConfig, inputs: &EvalInputs) -> Result<()> {
    let mut run = StageRun::new(work, "evaluate", cfg.render());
    let preds: Vec<TextRecord> = read_jsonl_from(&run.read_external("predictions", &inputs.predictions)?[..])?;
    let refs: Vec<TextRecord> = read_jsonl_from(&run.read_external("references", &inputs.references)?[..])?;
    let vectors = VectorTable::new(
        read_xemb(&run.read_external("gen_vectors", &inputs.gen_vectors)?[..])?,
        read_xemb(&run.read_external("ref_vectors", &inputs.ref_vectors)?[..])?,
    )?;
    let provider: Box<dyn LangIdProvider> = match (&inputs.langid_model, &inputs.langid_jsonl) {
        (Some(_), Some(_)) => bail!("give either --langid-model or --langid-jsonl, not both"),
        (Some(m), None) => Box::new(LangIdModel::read_from(&run.read_external("langid_model", m)?[..])?),
        (None, Some(j)) => Box::new(LangIdTable::from_records(read_jsonl_from::<LangIdRecord, _>(
            &run.read_external("langid_jsonl", j)?[..],
        )?)?),
        (None, None) => {
            let corpus = load_corpus(&mut run)?;
            Box::new(LangIdModel::train(
                corpus.documents().iter().map(|d| (&d.lang, d.text.as_str())),
            )?)
        }
    };
    let ecfg = EvalConfig {
        length_offset: cfg.lase_c,
        min_samples: cfg.min_samples,
    };
    let report = evaluate_run(&preds, &refs, &ecfg, provider.as_ref(), &vectors)?;
    run.write(SCORES, &jsonl(&report.samples)?)?;
    run.write(EVAL_SUMMARY, &jsonl(&report.aggregates)?)?;
    run.finish()?;
    for a in &report.aggregates {
        println!(
            "evaluate: {}->{} n={} LaSE={:.4} ROUGE-2={:.4}{}",
            a.src_lang,
            a.tgt_lang,
            a.n,
            a.mean_lase,
            a.mean_rouge2_f1,
            if a.low_confidence { " (low confidence)" } else { "" }
        );
    }
    Ok(())
}

#[derive(Serialize)]
struct PairCorrelation<'a> {
    src_lang: &'a LangCode,
    tgt_lang: &'a LangCode,
    n: usize,
    #[serde(flatten)]
    correlation: Option<Correlation>,
}

#[derive(Serialize)]
struct CorrelationReport<'a> {
    n: usize,
    #[serde(flatten)]
    overall: Correlation,
    pairs: Vec<PairCorrelation<'a>>,
}

/// Correlation between per-sample ROUGE-2 F1 and LaSE, overall and per pair.
pub fn correlate_stage(work: &Path, cfg: &PipelineConfig) -> Result<()> {
    let mut run = StageRun::new(work, "correlate", cfg.render());
    let scores: Vec<SampleScore> = read_jsonl_from(&run.read(SCORES)?[..])?;
    let xs: Vec<f64> = scores.iter().map(|s| s.rouge2.f1).collect();
    let ys: Vec<f64> = scores.iter().map(|s| s.lase).collect();
    let overall = correlate(&xs, &ys)?;
    type Columns = (Vec<f64>, Vec<f64>);
    let mut groups: BTreeMap<(&LangCode, &LangCode), Columns> = BTreeMap::new();
    for s in &scores {
        let g = groups.entry((&s.src_lang, &s.tgt_lang)).or_default();
        g.0.push(s.rouge2.f1);
        g.1.push(s.lase);
    }
    let pairs = groups
        .into_iter()
        .map(|((src, tgt), (x, y))| PairCorrelation {
            src_lang: src,
            tgt_lang: tgt,
            n: x.len(),
            correlation: correlate(&x, &y).ok(),
        })
        .collect();
    let report = CorrelationReport {
        n: scores.len(),
        overall,
        pairs,
    };
    let mut bytes = serde_json::to_vec_pretty(&report)?;
    bytes.push(b'\n');
    run.write(CORRELATION, &bytes)?;
    run.finish()?;
    println!(
        "correlate: n={} pearson={:?} spearman={:?}",
        report.n, report.overall.pearson, report.overall.spearman
    );
    Ok(())
}

pub fn synth(out: &Path, seed: u64, clusters: Option<usize>, eval_items: usize) -> Result<()> {
    let mut sc = SynthConfig::bundled(seed);
    if let Some(c) = clusters {
        sc.clusters = c;
    }
    let corpus = generate_corpus(&sc)?;
    let fx = evaluation_fixture(&corpus, eval_items, seed ^ 0x5eed);
    let xemb = |f: &XembFile| -> Result<Vec<u8>> {
        let mut buf = Vec::new();
        write_xemb(
            &mut buf,
            f.dim,
            f.records
                .iter()
                .map(|(id, v)| (id.as_str(), v.as_slice()))
                .collect::<Vec<_>>()
                .into_iter(),
        )?;
        Ok(buf)
    };
    let mut corpus_bytes = Vec::new();
    write_corpus(&corpus.documents, &mut corpus_bytes)?;
    write_atomic(&out.join("corpus.jsonl"), &corpus_bytes)?;
    write_atomic(&out.join("embeddings.xemb"), &xemb(&corpus.embeddings)?)?;
    write_atomic(&out.join("predictions.jsonl"), &jsonl(&fx.predictions)?)?;
    write_atomic(&out.join("references.jsonl"), &jsonl(&fx.references)?)?;
    write_atomic(&out.join("predictions.xemb"), &xemb(&fx.generated)?)?;
    write_atomic(&out.join("references.xemb"), &xemb(&fx.reference)?)?;
    info!("synthetic corpus seed {seed}");
    println!(
        "synth: {} documents, {} evaluation items in {}",
        corpus.documents.len(),
        fx.predictions.len(),
        out.display()
    );
    Ok(())
}

pub fn langid_train(corpus_path: &Path, out: &Path) -> Result<()> {
    let corpus =
        read_corpus(&std::fs::read(corpus_path).with_context(|| format!("reading {}", corpus_path.display()))?[..])?;
    let model = LangIdModel::train(corpus.documents().iter().map(|d| (&d.lang, d.text.as_str())))?;
    let mut bytes = Vec::new();
    model.write_to(&mut bytes)?;
    write_atomic(out, &bytes)?;
    println!("langid-train: {} languages", model.languages().len());
    Ok(())
}
