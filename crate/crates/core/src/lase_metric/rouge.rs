//! ROUGE-N and ROUGE-L over [`tokenize`] output, lowercased, with no stemming
//! or stopword removal.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::tokens::tokenize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RougeVariant {
    N(usize),
    L,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RougeScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl RougeScore {
    fn from_counts(overlap: usize, gen_total: usize, ref_total: usize) -> Self {
        let precision = if gen_total == 0 {
            0.0
        } else {
            overlap as f64 / gen_total as f64
        };
        let recall = if ref_total == 0 {
            0.0
        } else {
            overlap as f64 / ref_total as f64
        };
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        RougeScore { precision, recall, f1 }
    }
}

fn lowered(text: &str) -> Vec<String> {
    tokenize(text).into_iter().map(str::to_lowercase).collect()
}

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut counts = HashMap::new();
    if n > 0 && tokens.len() >= n {
        for w in tokens.windows(n) {
            *counts.entry(w).or_insert(0) += 1;
        }
    }
    counts
}

fn lcs_len(a: &[String], b: &[String]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y { prev[j] + 1 } else { prev[j + 1].max(cur[j]) };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

pub fn rouge(gen_text: &str, ref_text: &str, variant: RougeVariant) -> RougeScore {
    let g = lowered(gen_text);
    let r = lowered(ref_text);
    match variant {
        RougeVariant::N(n) => {
            let gc = ngram_counts(&g, n);
            let rc = ngram_counts(&r, n);
            let overlap = gc.iter().map(|(k, &c)| c.min(rc.get(k).copied().unwrap_or(0))).sum();
            RougeScore::from_counts(overlap, gc.values().sum(), rc.values().sum())
        }
        RougeVariant::L => RougeScore::from_counts(lcs_len(&g, &r), g.len(), r.len()),
    }
}
