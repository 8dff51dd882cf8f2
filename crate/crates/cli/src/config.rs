use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use xsum_forge::aligner::DEFAULT_TAU;
use xsum_forge::dataset_builder::{SplitRatios, DEFAULT_DEDUP_THRESHOLD};
use xsum_forge::lase_metric::{DEFAULT_LENGTH_OFFSET, DEFAULT_MIN_SAMPLES};
use xsum_forge::pair_graph::{CapConfig, DEFAULT_MAX_COMPONENT, DEFAULT_TAU_PRIME_DELTA};
use xsum_forge::sampler::{
    DEFAULT_ALPHA, DEFAULT_BETA, DEFAULT_MINI_BATCHES, DEFAULT_MINI_BATCH_SIZE, DEFAULT_MIN_PAIR_COUNT,
};
use xsum_forge::AlignConfig;

use crate::errors::InvalidConfig;

pub const DEFAULT_SEED: u64 = 0;

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub tau: f32,
    pub tau_prime_delta: f32,
    pub max_component: usize,
    pub dedup_threshold: f32,
    pub ratios: SplitRatios,
    pub alpha: f64,
    pub beta: f64,
    pub min_pair_count: u64,
    pub m: usize,
    pub mb: usize,
    pub lase_c: u32,
    pub min_samples: usize,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            tau: DEFAULT_TAU,
            tau_prime_delta: DEFAULT_TAU_PRIME_DELTA,
            max_component: DEFAULT_MAX_COMPONENT,
            dedup_threshold: DEFAULT_DEDUP_THRESHOLD,
            ratios: SplitRatios::default(),
            alpha: DEFAULT_ALPHA,
            beta: DEFAULT_BETA,
            min_pair_count: DEFAULT_MIN_PAIR_COUNT,
            m: DEFAULT_MINI_BATCHES,
            mb: DEFAULT_MINI_BATCH_SIZE,
            lase_c: DEFAULT_LENGTH_OFFSET,
            min_samples: DEFAULT_MIN_SAMPLES,
            seed: DEFAULT_SEED,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, InvalidConfig> {
    value
        .trim()
        .parse()
        .map_err(|_| InvalidConfig(format!("{key}: cannot parse {value:?}")))
}

pub fn parse_ratios(value: &str) -> Result<SplitRatios, InvalidConfig> {
    let parts: Vec<&str> = value.split([',', '/']).collect();
    if parts.len() != 3 {
        return Err(InvalidConfig(format!("ratios: expected three values, got {value:?}")));
    }
    let r: Vec<f64> = parts.iter().map(|p| parse("ratios", p)).collect::<Result<_, _>>()?;
    SplitRatios::new(r[0], r[1], r[2]).map_err(|e| InvalidConfig(e.to_string()))
}

impl PipelineConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), InvalidConfig> {
        match key.trim().replace('-', "_").as_str() {
            "tau" => self.tau = parse(key, value)?,
            "tau_prime_delta" => self.tau_prime_delta = parse(key, value)?,
            "max_component" => self.max_component = parse(key, value)?,
            "dedup_threshold" => self.dedup_threshold = parse(key, value)?,
            "ratios" => self.ratios = parse_ratios(value)?,
            "alpha" => self.alpha = parse(key, value)?,
            "beta" => self.beta = parse(key, value)?,
            "min_pair_count" => self.min_pair_count = parse(key, value)?,
            "m" => self.m = parse(key, value)?,
            "mb" => self.mb = parse(key, value)?,
            "lase_c" => self.lase_c = parse(key, value)?,
            "min_samples" => self.min_samples = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            other => return Err(InvalidConfig(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }

    /// Applies a flat `key = value` file; `#` starts a comment.
    pub fn apply_file(&mut self, path: &Path) -> Result<(), InvalidConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| InvalidConfig(format!("{}: {e}", path.display())))?;
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| InvalidConfig(format!("{}:{}: expected key = value", path.display(), n + 1)))?;
            self.set(k, v)
                .map_err(|e| InvalidConfig(format!("{}:{}: {}", path.display(), n + 1, e.0)))?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), InvalidConfig> {
        let bad = |msg: String| Err(InvalidConfig(msg));
        self.align().map_err(|e| InvalidConfig(e.to_string()))?;
        self.cap().validate().map_err(|e| InvalidConfig(e.to_string()))?;
        self.ratios.validate().map_err(|e| InvalidConfig(e.to_string()))?;
        if !(self.dedup_threshold > 0.0 && self.dedup_threshold <= 1.0) {
            return bad(format!(
                "dedup_threshold must be in (0, 1], got {}",
                self.dedup_threshold
            ));
        }
        if !(self.alpha.is_finite() && self.alpha >= 0.0 && self.beta.is_finite() && self.beta >= 0.0) {
            return bad(format!(
                "alpha and beta must be finite and nonnegative, got {} and {}",
                self.alpha, self.beta
            ));
        }
        if self.m == 0 || self.mb == 0 {
            return bad("m and mb must be positive".into());
        }
        Ok(())
    }

    pub fn align(&self) -> xsum_forge::Result<AlignConfig> {
        AlignConfig::new(self.tau)
    }

    pub fn cap(&self) -> CapConfig {
        CapConfig::from_tau(self.tau, self.tau_prime_delta, self.max_component)
    }

    /// Canonical text form, also the input of the config hash.
    pub fn render(&self) -> String {
        let mut s = String::new();
        let r = &self.ratios;
        let _ = writeln!(s, "tau = {}", self.tau);
        let _ = writeln!(s, "tau_prime_delta = {}", self.tau_prime_delta);
        let _ = writeln!(s, "max_component = {}", self.max_component);
        let _ = writeln!(s, "dedup_threshold = {}", self.dedup_threshold);
        let _ = writeln!(s, "ratios = {},{},{}", r.train, r.dev, r.test);
        let _ = writeln!(s, "alpha = {}", self.alpha);
        let _ = writeln!(s, "beta = {}", self.beta);
        let _ = writeln!(s, "min_pair_count = {}", self.min_pair_count);
        let _ = writeln!(s, "m = {}", self.m);
        let _ = writeln!(s, "mb = {}", self.mb);
        let _ = writeln!(s, "lase_c = {}", self.lase_c);
        let _ = writeln!(s, "min_samples = {}", self.min_samples);
        let _ = writeln!(s, "seed = {}", self.seed);
        s
    }
}
