use std::collections::HashMap;
use std::ops::{Add, AddAssign};

use serde::Serialize;

use super::{MetricDetail, MetricError, MetricResult, Signature};
use crate::corpus::Orientation;
use crate::tokenize::Casing;

/// Highest n-gram order used by BLEU.
pub const BLEU_ORDER: usize = 4;

/// Multiset of n-grams of orders `1..=max_order`, keyed by token slices.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NgramCounts<'a> {
    counts: HashMap<&'a [String], u32>,
}

impl<'a> NgramCounts<'a> {
    pub fn get(&self, ngram: &[String]) -> u32 {
        self.counts.get(ngram).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&'a [String], u32)> + '_ {
        self.counts.iter().map(|(&k, &v)| (k, v))
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }
}

pub fn ngram_counts(tokens: &[String], max_order: usize) -> NgramCounts<'_> {
    assert!(max_order >= 1, "max_order must be at least 1");
    let mut counts = HashMap::new();
    for n in 1..=max_order.min(tokens.len()) {
        for gram in tokens.windows(n) {
            *counts.entry(gram).or_insert(0) += 1;
        }
    }
    NgramCounts { counts }
}

/// Sufficient statistics for corpus BLEU. Additive across segments.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct BleuStats {
    pub correct: [u64; BLEU_ORDER],
    pub total: [u64; BLEU_ORDER],
    pub hyp_len: u64,
    pub ref_len: u64,
}

impl AddAssign for BleuStats {
    fn add_assign(&mut self, rhs: Self) {
        for n in 0..BLEU_ORDER {
            self.correct[n] += rhs.correct[n];
            self.total[n] += rhs.total[n];
        }
        self.hyp_len += rhs.hyp_len;
        self.ref_len += rhs.ref_len;
    }
}

impl Add for BleuStats {
    type Output = Self;

    fn add(mut self, rhs: Self) -> Self {
        self += rhs;
        self
    }
}

impl std::iter::Sum for BleuStats {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::default(), Add::add)
    }
}

/// Clipped n-gram matches of one hypothesis against one or more references.
///
/// Each hypothesis n-gram is clipped at its maximum count over the
/// references. The reference length is the one closest to the hypothesis
/// length, the shorter one on ties.
pub fn bleu_segment_stats(hyp: &[String], refs: &[&[String]]) -> Result<BleuStats, MetricError> {
    if refs.is_empty() {
        return Err(MetricError::EmptyReferences);
    }
    let hyp_len = hyp.len();
    let mut ref_len = refs[0].len();
    for r in refs {
        let diff = r.len().abs_diff(hyp_len);
        let best = ref_len.abs_diff(hyp_len);
        if diff < best || (diff == best && r.len() < ref_len) {
            ref_len = r.len();
        }
    }
    let mut stats = BleuStats {
        hyp_len: hyp_len as u64,
        ref_len: ref_len as u64,
        ..BleuStats::default()
    };
    if hyp_len == 0 {
        return Ok(stats);
    }
    let mut vocab: HashMap<&str, u32> = HashMap::new();
    let mut seqs: Vec<Vec<u32>> = Vec::with_capacity(refs.len() + 1);
    for tokens in std::iter::once(hyp).chain(refs.iter().copied()) {
        let mut ids = Vec::with_capacity(tokens.len());
        for t in tokens {
            let next = vocab.len() as u32;
            ids.push(*vocab.entry(t.as_str()).or_insert(next));
        }
        seqs.push(ids);
    }
    let ref_ids = seqs.split_off(1);
    let hyp_ids = seqs.pop().expect("hypothesis ids");
    for n in 1..=BLEU_ORDER.min(hyp_len) {
        let h = run_lengths(&packed_ngrams(&hyp_ids, n));
        let mut r: Vec<(u128, u32)> = ref_ids
            .iter()
            .flat_map(|ids| run_lengths(&packed_ngrams(ids, n)))
            .collect();
        r.sort_unstable();
        // Sorted by key then count, so the last entry per key holds the maximum.
        let mut max_ref: Vec<(u128, u32)> = Vec::with_capacity(r.len());
        for (k, c) in r {
            match max_ref.last_mut() {
                Some(last) if last.0 == k => last.1 = c,
                _ => max_ref.push((k, c)),
            }
        }
        stats.correct[n - 1] = clipped_matches(&h, &max_ref);
    }
    for n in 0..BLEU_ORDER {
        stats.total[n] = (hyp_len + 1).saturating_sub(n + 1) as u64;
    }
    Ok(stats)
}

/// N-grams of token ids packed into one integer each, sorted.
fn packed_ngrams(ids: &[u32], n: usize) -> Vec<u128> {
    let mut keys: Vec<u128> = ids
        .windows(n)
        .map(|w| w.iter().fold(0u128, |k, &t| (k << 32) | u128::from(t)))
        .collect();
    keys.sort_unstable();
    keys
}

pub(crate) fn run_lengths(sorted: &[u128]) -> Vec<(u128, u32)> {
    let mut out: Vec<(u128, u32)> = Vec::new();
    for &k in sorted {
        match out.last_mut() {
            Some(last) if last.0 == k => last.1 += 1,
            _ => out.push((k, 1)),
        }
    }
    out
}

/// Sum over keys of `min(hyp count, ref count)`; both inputs sorted by key.
pub(crate) fn clipped_matches(hyp: &[(u128, u32)], reference: &[(u128, u32)]) -> u64 {
    let (mut i, mut j, mut total) = (0, 0, 0u64);
    while i < hyp.len() && j < reference.len() {
        match hyp[i].0.cmp(&reference[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                total += u64::from(hyp[i].1.min(reference[j].1));
                i += 1;
                j += 1;
            }
        }
    }
    total
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BleuConfig {
    pub casing: Casing,
}

impl BleuConfig {
    pub fn signature(&self, num_refs: usize) -> Signature {
        Signature {
            metric: "BLEU".into(),
            casing: self.casing,
            num_refs,
            smooth: "exp",
            tokenizer: "intl",
        }
    }
}

/// Corpus BLEU with exp smoothing: each successive order without any match
/// doubles a running factor `s` and uses precision `1 / (s * total)`.
pub fn bleu_corpus(
    stats: &BleuStats,
    config: &BleuConfig,
    num_refs: usize,
) -> Result<MetricResult, MetricError> {
    if stats.hyp_len == 0 {
        return Err(MetricError::ZeroLengthCorpus);
    }
    if let Some(n) = stats.total.iter().position(|&t| t == 0) {
        return Err(MetricError::DegenerateCorpus { order: n + 1 });
    }
    let mut precisions = [0.0; BLEU_ORDER];
    let mut smooth = 1.0;
    for (p, (&correct, &total)) in precisions
        .iter_mut()
        .zip(stats.correct.iter().zip(&stats.total))
    {
        *p = if correct == 0 {
            smooth *= 2.0;
            1.0 / (smooth * total as f64)
        } else {
            correct as f64 / total as f64
        };
    }
    let brevity_penalty = if stats.hyp_len > stats.ref_len {
        1.0
    } else {
        (1.0 - stats.ref_len as f64 / stats.hyp_len as f64).exp()
    };
    let log_mean = precisions.iter().map(|p| p.ln()).sum::<f64>() / BLEU_ORDER as f64;
    let score = 100.0 * brevity_penalty * log_mean.exp();
    Ok(MetricResult {
        metric_name: "BLEU".into(),
        score,
        orientation: Orientation::HigherBetter,
        signature: config.signature(num_refs).to_string(),
        system: None,
        reference: None,
        detail: Some(MetricDetail::Bleu {
            precisions,
            brevity_penalty,
            hyp_len: stats.hyp_len,
            ref_len: stats.ref_len,
        }),
    })
}
