mod config;
mod errors;
mod stages;
mod workdir;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use xsum_forge::Split;

use config::{parse_ratios, PipelineConfig};
use errors::InvalidConfig;

#[derive(Parser)]
#[command(name = "xsum-forge", version, about = "Cross-lingual summary dataset pipeline")]
struct Cli {
    /// Work directory holding stage artifacts.
    #[arg(long, global = true, default_value = "work")]
    work: PathBuf,
    /// Flat `key = value` config file; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Print the effective config and exit.
    #[arg(long, global = true)]
    print_config: bool,
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Args, Default)]
struct Overrides {
    /// Similarity threshold for direct pairs.
    #[arg(long, global = true)]
    tau: Option<f32>,
    /// Induced pairs score in [tau - delta, tau).
    #[arg(long, global = true)]
    tau_prime_delta: Option<f32>,
    /// Components above this size are split along minimum cuts.
    #[arg(long, global = true)]
    max_component: Option<usize>,
    /// Within-language similarity above which summaries are duplicates.
    #[arg(long, global = true)]
    dedup_threshold: Option<f32>,
    /// Train, dev and test shares, e.g. `0.8,0.1,0.1`.
    #[arg(long, global = true)]
    ratios: Option<String>,
    /// Smoothing exponent for pivot-language marginals.
    #[arg(long, global = true)]
    alpha: Option<f64>,
    /// Smoothing exponent for partner-language conditionals.
    #[arg(long, global = true)]
    beta: Option<f64>,
    /// Training pairs with fewer samples are left out of the plan.
    #[arg(long, global = true)]
    min_pair_count: Option<u64>,
    /// Mini-batches per batch.
    #[arg(long, global = true)]
    m: Option<usize>,
    /// Samples per mini-batch.
    #[arg(long, global = true)]
    mb: Option<usize>,
    /// Length allowance in tokens before the LaSE length penalty applies.
    #[arg(long, global = true)]
    lase_c: Option<u32>,
    /// Per-pair sample count below which aggregates are flagged low confidence.
    #[arg(long, global = true)]
    min_samples: Option<usize>,
    /// Seed for splits, sampling and synthetic data.
    #[arg(long, global = true, env = "XSUM_FORGE_SEED")]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a corpus and its summary vectors into the work directory.
    EmbedImport {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        vectors: PathBuf,
    },
    /// Mutual nearest neighbours above tau across all language pairs.
    Align,
    /// Components, size capping and induced pairs.
    Induce,
    /// Within-language near-duplicate removal.
    Dedup,
    /// Component-atomic train/dev/test assignment.
    Split,
    /// Write per-(split, src, tgt) sample files.
    Materialize {
        /// Also emit one in-language sample per matched summary.
        #[arg(long)]
        in_language: bool,
    },
    /// Sample counts per ordered language pair.
    Stats {
        #[arg(long)]
        split: Option<SplitArg>,
    },
    /// Smoothed language sampling plan from the training split.
    Plan,
    /// Deterministic batch stream.
    Sample {
        #[arg(long, default_value_t = 100)]
        steps: u64,
    },
    /// LaSE and ROUGE for predictions against references.
    Evaluate {
        #[arg(long)]
        predictions: PathBuf,
        #[arg(long)]
        references: PathBuf,
        #[arg(long)]
        gen_vectors: PathBuf,
        #[arg(long)]
        ref_vectors: PathBuf,
        /// Model written by `langid-train`.
        #[arg(long, conflicts_with = "langid_jsonl")]
        langid_model: Option<PathBuf>,
        /// Precomputed `{"id", "probs"}` lines.
        #[arg(long)]
        langid_jsonl: Option<PathBuf>,
    },
    /// Pearson and Spearman between ROUGE-2 F1 and LaSE.
    Correlate,
    /// Write a synthetic corpus, vectors and evaluation fixture.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        clusters: Option<usize>,
        #[arg(long, default_value_t = 120)]
        eval_items: usize,
    },
    /// Train the n-gram language identifier on corpus articles.
    LangidTrain {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

impl std::str::FromStr for SplitArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Split::ALL
            .into_iter()
            .find(|x| x.as_str() == s)
            .map(SplitArg)
            .ok_or_else(|| format!("unknown split {s:?}"))
    }
}

#[derive(Clone, Copy)]
struct SplitArg(Split);

fn effective_config(cli: &Cli) -> Result<PipelineConfig, InvalidConfig> {
    let mut cfg = PipelineConfig::default();
    if let Some(path) = &cli.config {
        cfg.apply_file(path)?;
    }
    let o = &cli.overrides;
    macro_rules! apply {
        ($($field:ident),*) => { $( if let Some(v) = o.$field { cfg.$field = v; } )* };
    }
    apply!(
        tau,
        tau_prime_delta,
        max_component,
        dedup_threshold,
        alpha,
        beta,
        min_pair_count,
        m,
        mb,
        lase_c,
        min_samples,
        seed
    );
    if let Some(r) = &o.ratios {
        cfg.ratios = parse_ratios(r)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<()> {
    let cfg = effective_config(&cli)?;
    if cli.print_config {
        print!("{}", cfg.render());
        return Ok(());
    }
    let Some(command) = cli.command else {
        return Err(InvalidConfig("no subcommand given (see --help)".into()).into());
    };
    let work = cli.work.as_path();
    match command {
        Command::EmbedImport { corpus, vectors } => stages::embed_import(work, &cfg, &corpus, &vectors),
        Command::Align => stages::align(work, &cfg),
        Command::Induce => stages::induce(work, &cfg),
        Command::Dedup => stages::dedup(work, &cfg),
        Command::Split => stages::split(work, &cfg),
        Command::Materialize { in_language } => stages::materialize_stage(work, &cfg, in_language),
        Command::Stats { split } => stages::stats(work, &cfg, split.map(|s| s.0)),
        Command::Plan => stages::plan(work, &cfg),
        Command::Sample { steps } => stages::sample(work, &cfg, steps),
        Command::Evaluate {
            predictions,
            references,
            gen_vectors,
            ref_vectors,
            langid_model,
            langid_jsonl,
        } => stages::evaluate(
            work,
            &cfg,
            &stages::EvalInputs {
                predictions,
                references,
                gen_vectors,
                ref_vectors,
                langid_model,
                langid_jsonl,
            },
        ),
        Command::Correlate => stages::correlate_stage(work, &cfg),
        Command::Synth {
            out,
            clusters,
            eval_items,
        } => stages::synth(&out, cfg.seed, clusters, eval_items),
        Command::LangidTrain { corpus, out } => stages::langid_train(&corpus, &out),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) if !err.use_stderr() => {
            let _ = err.print();
            return ExitCode::SUCCESS;
        }
        Err(err) => {
            let _ = err.print();
            return ExitCode::from(3);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(errors::exit_code(&err) as u8)
        }
    }
}
