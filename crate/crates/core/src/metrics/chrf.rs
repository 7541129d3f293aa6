use std::collections::HashMap;
use std::ops::AddAssign;

use super::bleu::{clipped_matches, run_lengths};
use super::{MetricDetail, MetricError, MetricResult, Signature};
use crate::corpus::Orientation;
use crate::tokenize::{apply_casing, char_sequence, Casing};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChrfConfig {
    pub char_order: usize,
    pub beta: f64,
    pub remove_whitespace: bool,
    pub casing: Casing,
}

impl Default for ChrfConfig {
    fn default() -> Self {
        Self {
            char_order: 6,
            beta: 2.0,
            remove_whitespace: true,
            casing: Casing::Mixed,
        }
    }
}

impl ChrfConfig {
    fn validate(&self) -> Result<(), MetricError> {
        if self.char_order == 0 {
            return Err(MetricError::InvalidParameter(
                "chrF order must be >= 1".into(),
            ));
        }
        if !(self.beta.is_finite() && self.beta > 0.0) {
            return Err(MetricError::InvalidParameter(format!(
                "chrF beta must be positive, got {}",
                self.beta
            )));
        }
        Ok(())
    }

    pub fn signature(&self) -> Signature {
        Signature {
            metric: format!("chrF.order{}.beta{}", self.char_order, self.beta),
            casing: self.casing,
            num_refs: 1,
            smooth: "none",
            tokenizer: if self.remove_whitespace {
                "char-nows"
            } else {
                "char"
            },
        }
    }
}

/// Character n-gram counts per order (index 0 is unigrams).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChrfStats {
    pub matched: Vec<u64>,
    pub hyp: Vec<u64>,
    pub reference: Vec<u64>,
}

impl ChrfStats {
    pub fn zeros(char_order: usize) -> Self {
        Self {
            matched: vec![0; char_order],
            hyp: vec![0; char_order],
            reference: vec![0; char_order],
        }
    }

    /// Mean precision and recall over orders; an order with an empty
    /// denominator contributes 0.
    pub fn precision_recall(&self) -> (f64, f64) {
        let ratio = |num: u64, den: u64| {
            if den == 0 {
                0.0
            } else {
                num as f64 / den as f64
            }
        };
        let order = self.matched.len() as f64;
        let mut p = 0.0;
        let mut r = 0.0;
        for n in 0..self.matched.len() {
            p += ratio(self.matched[n], self.hyp[n]);
            r += ratio(self.matched[n], self.reference[n]);
        }
        (p / order, r / order)
    }
}

impl AddAssign<&ChrfStats> for ChrfStats {
    fn add_assign(&mut self, rhs: &ChrfStats) {
        for n in 0..self.matched.len() {
            self.matched[n] += rhs.matched[n];
            self.hyp[n] += rhs.hyp[n];
            self.reference[n] += rhs.reference[n];
        }
    }
}

fn char_ngrams(chars: &[char], n: usize) -> HashMap<&[char], u64> {
    let mut counts = HashMap::new();
    for gram in chars.windows(n) {
        *counts.entry(gram).or_insert(0) += 1;
    }
    counts
}

/// Code points fit in 21 bits, so up to six of them pack into a `u128`.
const PACKED_MAX_ORDER: usize = 6;

fn packed_char_ngrams(chars: &[char], n: usize) -> Vec<u128> {
    let mut keys: Vec<u128> = chars
        .windows(n)
        .map(|w| {
            w.iter()
                .fold(0u128, |k, &c| (k << 21) | u128::from(u32::from(c)))
        })
        .collect();
    keys.sort_unstable();
    keys
}

pub fn chrf_segment_stats(hyp: &str, reference: &str, config: &ChrfConfig) -> ChrfStats {
    let hyp = char_sequence(&apply_casing(hyp, config.casing), config.remove_whitespace);
    let reference = char_sequence(
        &apply_casing(reference, config.casing),
        config.remove_whitespace,
    );
    let mut stats = ChrfStats::zeros(config.char_order);
    for n in 1..=config.char_order {
        stats.hyp[n - 1] = (hyp.len() + 1).saturating_sub(n) as u64;
        stats.reference[n - 1] = (reference.len() + 1).saturating_sub(n) as u64;
        if n <= PACKED_MAX_ORDER {
            let h = run_lengths(&packed_char_ngrams(&hyp, n));
            let r = run_lengths(&packed_char_ngrams(&reference, n));
            stats.matched[n - 1] = clipped_matches(&h, &r);
            continue;
        }
        let h = char_ngrams(&hyp, n);
        let r = char_ngrams(&reference, n);
        stats.matched[n - 1] = h
            .iter()
            .map(|(gram, &c)| c.min(r.get(gram).copied().unwrap_or(0)))
            .sum();
    }
    stats
}

fn f_score(precision: f64, recall: f64, beta: f64) -> f64 {
    if precision + recall == 0.0 {
        return 0.0;
    }
    let beta2 = beta * beta;
    100.0 * (1.0 + beta2) * precision * recall / (beta2 * precision + recall)
}

/// Corpus chrF from counts accumulated over all segments.
pub fn chrf_corpus(
    hyps: &[String],
    refs: &[String],
    config: &ChrfConfig,
) -> Result<MetricResult, MetricError> {
    config.validate()?;
    if hyps.len() != refs.len() {
        return Err(MetricError::LengthMismatch {
            hyps: hyps.len(),
            refs: refs.len(),
        });
    }
    if hyps.is_empty() {
        return Err(MetricError::NoSegments);
    }
    let mut stats = ChrfStats::zeros(config.char_order);
    for (h, r) in hyps.iter().zip(refs) {
        stats += &chrf_segment_stats(h, r, config);
    }
    let (precision, recall) = stats.precision_recall();
    Ok(MetricResult {
        metric_name: "chrF".into(),
        score: f_score(precision, recall, config.beta),
        orientation: Orientation::HigherBetter,
        signature: config.signature().to_string(),
        system: None,
        reference: None,
        detail: Some(MetricDetail::Chrf { precision, recall }),
    })
}
