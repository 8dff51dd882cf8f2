use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use xsum_forge::embedding_store::write_xemb;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_xsum-forge"))
}

fn run(work: &Path, args: &[&str]) -> Output {
    bin()
        .arg("--work")
        .arg(work)
        .args(args)
        .env_remove("XSUM_FORGE_SEED")
        .output()
        .unwrap()
}

fn data(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn import_bundled(work: &Path) {
    let o = run(
        work,
        &[
            "embed-import",
            "--corpus",
            &data("corpus.jsonl"),
            "--vectors",
            &data("embeddings.xemb"),
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
}

/// Two documents whose summaries are orthogonal, so no pair survives alignment.
fn write_unpairable(dir: &Path) -> (PathBuf, PathBuf) {
    let corpus = dir.join("corpus.jsonl");
    std::fs::write(
        &corpus,
        concat!(
            r#"{"id":"a1","lang":"en","text":"one two three","summary":"one two"}"#,
            "\n",
            r#"{"id":"b1","lang":"fr","text":"un deux trois","summary":"un deux"}"#,
            "\n"
        ),
    )
    .unwrap();
    let vectors = dir.join("vectors.xemb");
    let recs: [(&str, &[f32]); 2] = [("a1", &[1.0, 0.0]), ("b1", &[0.0, 1.0])];
    write_xemb(std::fs::File::create(&vectors).unwrap(), 2, recs.into_iter()).unwrap();
    (corpus, vectors)
}

#[test]
fn stats_on_empty_pairs_is_a_zero_matrix() {
    let tmp = tempfile::tempdir().unwrap();
    let (corpus, vectors) = write_unpairable(tmp.path());
    let work = tmp.path().join("work");
    let o = run(
        &work,
        &[
            "embed-import",
            "--corpus",
            corpus.to_str().unwrap(),
            "--vectors",
            vectors.to_str().unwrap(),
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    for stage in ["align", "induce", "dedup", "split", "materialize"] {
        let o = run(&work, &[stage]);
        assert!(o.status.success(), "{stage}: {}", stderr(&o));
    }
    let o = run(&work, &["stats"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let tsv = std::fs::read_to_string(work.join("stats.tsv")).unwrap();
    assert_eq!(tsv, "article\\summary\ten\tfr\nen\t0\t0\nfr\t0\t0\ntotal\t0\n");
}

#[test]
fn missing_upstream_artifact_exits_2() {
    let empty = tempfile::tempdir().unwrap();
    let imported = tempfile::tempdir().unwrap();
    import_bundled(imported.path());
    let cases = [
        (empty.path(), "align", "corpus.jsonl"),
        (imported.path(), "induce", "pairs.direct.jsonl"),
        (imported.path(), "split", "pairs.dedup.jsonl"),
        (imported.path(), "sample", "plan.json"),
    ];
    for (work, stage, artifact) in cases {
        let o = run(work, &[stage]);
        assert_eq!(o.status.code(), Some(2), "{stage}");
        let err = stderr(&o);
        assert!(err.contains(stage) && err.contains(artifact), "{err}");
    }
}

#[test]
fn invalid_config_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(tmp.path(), &["--tau", "1.5", "align"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    let o = run(tmp.path(), &["--ratios", "0.5,0.1,0.1", "split"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    let o = run(tmp.path(), &["--tau", "high", "align"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    let o = run(tmp.path(), &["--seed", "-1", "align"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));

    let cfg = tmp.path().join("bad.conf");
    std::fs::write(&cfg, "tau = 0.8\nwindow = 3\n").unwrap();
    let o = run(tmp.path(), &["--config", cfg.to_str().unwrap(), "align"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("window"), "{}", stderr(&o));
}

#[test]
fn print_config_shows_defaults() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(tmp.path(), &["--print-config"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    for line in [
        "tau = 0.7437",
        "tau_prime_delta = 0.1",
        "max_component = 50",
        "dedup_threshold = 0.95",
        "ratios = 0.8,0.1,0.1",
        "alpha = 0.5",
        "beta = 0.75",
        "min_pair_count = 30",
        "m = 8",
        "mb = 32",
        "lase_c = 6",
        "seed = 0",
    ] {
        assert!(text.lines().any(|l| l == line), "{line} missing from\n{text}");
    }
}

#[test]
fn seed_precedence_is_flag_then_env_then_file() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("seed.conf");
    std::fs::write(&cfg, "seed = 3\n").unwrap();
    let seed_of = |args: &[&str], env: Option<&str>| {
        let mut c = bin();
        c.arg("--config")
            .arg(&cfg)
            .arg("--print-config")
            .args(args)
            .env_remove("XSUM_FORGE_SEED");
        if let Some(v) = env {
            c.env("XSUM_FORGE_SEED", v);
        }
        let out = String::from_utf8(c.output().unwrap().stdout).unwrap();
        out.lines()
            .find_map(|l| l.strip_prefix("seed = ").map(str::to_string))
            .unwrap()
    };
    assert_eq!(seed_of(&[], None), "3");
    assert_eq!(seed_of(&[], Some("11")), "11");
    assert_eq!(seed_of(&["--seed", "5"], Some("11")), "5");
}

#[test]
fn aligned_pairs_respect_default_threshold() {
    let tmp = tempfile::tempdir().unwrap();
    import_bundled(tmp.path());
    let o = run(tmp.path(), &["align"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(tmp.path().join("pairs.direct.jsonl")).unwrap();
    let sims: Vec<f64> = text
        .lines()
        .map(|l| {
            serde_json::from_str::<serde_json::Value>(l).unwrap()["similarity"]
                .as_f64()
                .unwrap()
        })
        .collect();
    assert!(!sims.is_empty());
    assert!(
        sims.iter().all(|&s| s >= 0.7437),
        "{:?}",
        sims.iter().cloned().fold(f64::INFINITY, f64::min)
    );
}

#[test]
fn rerunning_a_stage_is_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    import_bundled(tmp.path());
    for stage in ["align", "induce", "dedup", "split"] {
        assert!(run(tmp.path(), &[stage]).status.success());
    }
    let files = ["splits.jsonl", "manifests/split.json"];
    let before: Vec<Vec<u8>> = files
        .iter()
        .map(|f| std::fs::read(tmp.path().join(f)).unwrap())
        .collect();
    assert!(run(tmp.path(), &["split"]).status.success());
    let after: Vec<Vec<u8>> = files
        .iter()
        .map(|f| std::fs::read(tmp.path().join(f)).unwrap())
        .collect();
    assert_eq!(before, after);

    assert!(run(tmp.path(), &["--seed", "99", "split"]).status.success());
    let manifest = std::fs::read(tmp.path().join("manifests/split.json")).unwrap();
    assert_ne!(manifest, before[1]);
}

#[test]
fn langid_model_roundtrips_through_evaluate() {
    let tmp = tempfile::tempdir().unwrap();
    let model = tmp.path().join("langid.xlid");
    let o = bin()
        .args(["langid-train", "--corpus", &data("corpus.jsonl"), "--out"])
        .arg(&model)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    let work = tmp.path().join("work");
    import_bundled(&work);
    let o = run(
        &work,
        &[
            "evaluate",
            "--predictions",
            &data("predictions.jsonl"),
            "--references",
            &data("references.jsonl"),
            "--gen-vectors",
            &data("predictions.xemb"),
            "--ref-vectors",
            &data("references.xemb"),
            "--langid-model",
            model.to_str().unwrap(),
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let scores = std::fs::read_to_string(work.join("scores.jsonl")).unwrap();
    assert_eq!(scores.lines().count(), 120);
}
