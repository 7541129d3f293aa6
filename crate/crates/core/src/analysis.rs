//! Diagnostics for comparing reference sets: which n-grams of an output
//! match a reference, and how far alignment links stray from the diagonal.

use std::collections::HashMap;

use serde::Serialize;
use thiserror::Error;

use crate::corpus::AlignmentSet;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("n-gram order must be at least 1")]
    ZeroOrder,
    #[error("{hyps} hypotheses but {refs} references")]
    LengthMismatch { hyps: usize, refs: usize },
    #[error("alignment set {0} has no links")]
    NoLinks(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NgramMatchRow {
    pub ngram: Vec<String>,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NgramMatchReport {
    pub order: usize,
    pub rows: Vec<NgramMatchRow>,
    /// Set when no hypothesis or reference segment has `order` tokens.
    pub order_exceeds_segments: bool,
}

impl NgramMatchReport {
    /// `rank<TAB>ngram<TAB>count`, ranks starting at 1.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("rank\tngram\tcount\n");
        for (i, row) in self.rows.iter().enumerate() {
            out.push_str(&format!(
                "{}\t{}\t{}\n",
                i + 1,
                row.ngram.join(" "),
                row.count
            ));
        }
        out
    }

    pub fn total(&self) -> u64 {
        self.rows.iter().map(|r| r.count).sum()
    }
}

fn order_counts(tokens: &[String], n: usize) -> HashMap<&[String], u64> {
    let mut counts = HashMap::new();
    for gram in tokens.windows(n) {
        *counts.entry(gram).or_insert(0) += 1;
    }
    counts
}

/// Clipped matches of order-`n` n-grams summed over segments, best `top_m`
/// first. Ties in count are ordered by the token sequence.
pub fn matched_ngram_report<H, R>(
    hyps: &[H],
    refs: &[R],
    n: usize,
    top_m: usize,
) -> Result<NgramMatchReport, AnalysisError>
where
    H: AsRef<[String]>,
    R: AsRef<[String]>,
{
    if n == 0 {
        return Err(AnalysisError::ZeroOrder);
    }
    if hyps.len() != refs.len() {
        return Err(AnalysisError::LengthMismatch {
            hyps: hyps.len(),
            refs: refs.len(),
        });
    }
    let mut totals: HashMap<&[String], u64> = HashMap::new();
    for (h, r) in hyps.iter().zip(refs) {
        let reference = order_counts(r.as_ref(), n);
        for (gram, c) in order_counts(h.as_ref(), n) {
            let matched = c.min(reference.get(gram).copied().unwrap_or(0));
            if matched > 0 {
                *totals.entry(gram).or_insert(0) += matched;
            }
        }
    }
    let mut rows: Vec<NgramMatchRow> = totals
        .into_iter()
        .map(|(gram, count)| NgramMatchRow {
            ngram: gram.to_vec(),
            count,
        })
        .collect();
    rows.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.ngram.cmp(&b.ngram)));
    rows.truncate(top_m);
    let order_exceeds_segments = hyps
        .iter()
        .map(|h| h.as_ref().len())
        .chain(refs.iter().map(|r| r.as_ref().len()))
        .all(|len| len < n);
    Ok(NgramMatchReport {
        order: n,
        rows,
        order_exceeds_segments,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonotonicityScore {
    pub mean_abs_distance: f64,
    pub link_count: u64,
}

/// Mean of `|i - j|` over every link of every segment.
pub fn monotonicity(alignments: &AlignmentSet) -> Result<MonotonicityScore, AnalysisError> {
    let mut total = 0u64;
    let mut links = 0u64;
    for (i, j) in alignments.links.iter().flatten() {
        total += i.abs_diff(*j) as u64;
        links += 1;
    }
    if links == 0 {
        return Err(AnalysisError::NoLinks(alignments.name.clone()));
    }
    Ok(MonotonicityScore {
        mean_abs_distance: total as f64 / links as f64,
        link_count: links,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{bleu_segment_stats, BLEU_ORDER};
    use proptest::prelude::*;

    fn t(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    #[test]
    fn single_segment_identity() {
        let seg = vec![t("a b c d")];
        let r = matched_ngram_report(&seg, &seg, 4, 10).unwrap();
        assert_eq!(
            r.rows,
            vec![NgramMatchRow {
                ngram: t("a b c d"),
                count: 1
            }]
        );
        assert!(!r.order_exceeds_segments);
    }

    #[test]
    fn clipped_and_summed() {
        let hyps = vec![t(", sagte er . , sagte er ."), t(", sagte er .")];
        let refs = vec![t(", sagte er . x"), t("er sagte , sagte er .")];
        let r = matched_ngram_report(&hyps, &refs, 4, 10).unwrap();
        assert_eq!(r.rows[0].ngram, t(", sagte er ."));
        assert_eq!(r.rows[0].count, 2);
        assert_eq!(r.rows.len(), 1);
    }

    #[test]
    fn ties_sorted_lexicographically_and_truncated() {
        let seg = vec![t("c b a")];
        let r = matched_ngram_report(&seg, &seg, 1, 2).unwrap();
        let grams: Vec<_> = r.rows.iter().map(|r| r.ngram.join(" ")).collect();
        assert_eq!(grams, vec!["a", "b"]);
        assert_eq!(r.to_tsv(), "rank\tngram\tcount\n1\ta\t1\n2\tb\t1\n");
    }

    #[test]
    fn order_longer_than_every_segment() {
        let seg = vec![t("a b"), t("c")];
        let r = matched_ngram_report(&seg, &seg, 3, 5).unwrap();
        assert!(r.rows.is_empty());
        assert!(r.order_exceeds_segments);
    }

    #[test]
    fn report_errors() {
        let seg = vec![t("a")];
        assert_eq!(
            matched_ngram_report(&seg, &seg, 0, 1),
            Err(AnalysisError::ZeroOrder)
        );
        assert_eq!(
            matched_ngram_report(&seg, &[] as &[Vec<String>], 1, 1),
            Err(AnalysisError::LengthMismatch { hyps: 1, refs: 0 })
        );
    }

    #[test]
    fn monotonicity_examples() {
        let identity = AlignmentSet::new("id", vec![vec![(0, 0), (1, 1), (2, 2)]]);
        assert_eq!(monotonicity(&identity).unwrap().mean_abs_distance, 0.0);
        let crossing = AlignmentSet::new("x", vec![vec![(0, 2), (2, 0)]]);
        let m = monotonicity(&crossing).unwrap();
        assert_eq!((m.mean_abs_distance, m.link_count), (2.0, 2));
        let empty = AlignmentSet::new("e", vec![vec![], vec![]]);
        assert_eq!(
            monotonicity(&empty),
            Err(AnalysisError::NoLinks("e".into()))
        );
    }

    fn sentence() -> impl Strategy<Value = Vec<String>> {
        proptest::collection::vec(prop_oneof![Just("a"), Just("b"), Just("c")], 0..8)
            .prop_map(|v| v.into_iter().map(String::from).collect())
    }

    fn corpus() -> impl Strategy<Value = (Vec<Vec<String>>, Vec<Vec<String>>)> {
        (1usize..5).prop_flat_map(|n| {
            (
                proptest::collection::vec(sentence(), n),
                proptest::collection::vec(sentence(), n),
            )
        })
    }

    proptest! {
        #[test]
        fn rows_sum_to_bleu_matches((hyps, refs) in corpus(), n in 1..=BLEU_ORDER) {
            let report = matched_ngram_report(&hyps, &refs, n, usize::MAX).unwrap();
            let correct: u64 = hyps
                .iter()
                .zip(&refs)
                .map(|(h, r)| bleu_segment_stats(h, &[r.as_slice()]).unwrap().correct[n - 1])
                .sum();
            prop_assert_eq!(report.total(), correct);
            prop_assert!(report.rows.iter().all(|r| r.count >= 1));
        }

        #[test]
        fn identity_reproduces_own_counts(segs in proptest::collection::vec(sentence(), 1..4), n in 1usize..4) {
            let report = matched_ngram_report(&segs, &segs, n, usize::MAX).unwrap();
            let mut expected: HashMap<Vec<String>, u64> = HashMap::new();
            for s in &segs {
                for g in s.windows(n) {
                    *expected.entry(g.to_vec()).or_insert(0) += 1;
                }
            }
            let got: HashMap<Vec<String>, u64> =
                report.rows.into_iter().map(|r| (r.ngram, r.count)).collect();
            prop_assert_eq!(got, expected);
        }

        #[test]
        fn monotonicity_ignores_order(
            mut segs in proptest::collection::vec(
                proptest::collection::vec((0usize..20, 0usize..20), 1..6), 1..5),
        ) {
            let a = monotonicity(&AlignmentSet::new("a", segs.clone())).unwrap();
            segs.reverse();
            for s in &mut segs {
                s.reverse();
            }
            let b = monotonicity(&AlignmentSet::new("b", segs)).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
