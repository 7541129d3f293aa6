//! Corpus-level metrics: BLEU (single and multi-reference, exp smoothing),
//! chrF and TER.
//!
//! Every metric works in two stages: additive integer statistics per segment,
//! then one corpus aggregation. Division happens only in the aggregation, so
//! stats can be reduced in any order with identical results.

mod bleu;
mod chrf;
mod ter;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{MultiReference, Orientation, ReferenceSet, SystemOutput};
use crate::tokenize::{apply_casing, tokenize_intl, unicode_version, Casing, TokenSeq};

pub use bleu::{
    bleu_corpus, bleu_segment_stats, ngram_counts, BleuConfig, BleuStats, NgramCounts, BLEU_ORDER,
};
pub use chrf::{chrf_corpus, chrf_segment_stats, ChrfConfig, ChrfStats};
pub use ter::{
    ter_complement, ter_corpus, ter_segment, TerConfig, TerSegment, DEFAULT_MAX_SHIFT_LEN,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error("reference list is empty")]
    EmptyReferences,
    #[error("reference for segment {segment} is empty")]
    EmptyReference { segment: usize },
    #[error("corpus has no hypothesis tokens")]
    ZeroLengthCorpus,
    #[error("degenerate corpus: no hypothesis {order}-grams")]
    DegenerateCorpus { order: usize },
    #[error("{hyps} hypotheses but {refs} references")]
    LengthMismatch { hyps: usize, refs: usize },
    #[error("no segments to score")]
    NoSegments,
    #[error("{0} does not support multiple references")]
    MultiReferenceUnsupported(MetricKind),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    Bleu,
    Chrf,
    Ter,
}

impl MetricKind {
    pub const ALL: [MetricKind; 3] = [MetricKind::Bleu, MetricKind::Chrf, MetricKind::Ter];
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MetricKind::Bleu => "bleu",
            MetricKind::Chrf => "chrf",
            MetricKind::Ter => "ter",
        })
    }
}

impl std::str::FromStr for MetricKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "bleu" => Ok(MetricKind::Bleu),
            "chrf" => Ok(MetricKind::Chrf),
            "ter" => Ok(MetricKind::Ter),
            other => Err(format!(
                "unknown metric {other:?} (expected bleu, chrf or ter)"
            )),
        }
    }
}

/// Reproducibility signature:
/// `<METRIC>+case.<mode>+numrefs.<k>+smooth.<scheme>+tok.<scheme>+unicode.<version>+impl.<version>`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Signature {
    pub metric: String,
    pub casing: Casing,
    pub num_refs: usize,
    pub smooth: &'static str,
    pub tokenizer: &'static str,
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}+case.{}+numrefs.{}+smooth.{}+tok.{}+unicode.{}+impl.{}",
            self.metric,
            self.casing,
            self.num_refs,
            self.smooth,
            self.tokenizer,
            unicode_version(),
            crate::IMPL_VERSION
        )
    }
}

/// Intermediate quantities behind a corpus score.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MetricDetail {
    Bleu {
        /// Smoothed n-gram precisions in [0, 1].
        precisions: [f64; BLEU_ORDER],
        brevity_penalty: f64,
        hyp_len: u64,
        ref_len: u64,
    },
    Chrf {
        precision: f64,
        recall: f64,
    },
    Ter {
        edits: u64,
        ref_len: u64,
        shifts: u64,
    },
}

/// A system-level score.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricResult {
    pub metric_name: String,
    pub score: f64,
    pub orientation: Orientation,
    pub signature: String,
    pub system: Option<String>,
    pub reference: Option<String>,
    pub detail: Option<MetricDetail>,
}

impl MetricResult {
    pub fn for_system(mut self, system: impl Into<String>, reference: impl Into<String>) -> Self {
        self.system = Some(system.into());
        self.reference = Some(reference.into());
        self
    }
}

/// Reference side of a scoring call.
#[derive(Debug, Clone, Copy)]
pub enum References<'a> {
    Single(&'a ReferenceSet),
    Multi(&'a MultiReference),
}

impl<'a> References<'a> {
    pub fn name(&self) -> String {
        match self {
            References::Single(r) => r.name.clone(),
            References::Multi(m) => m.name(),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            References::Single(r) => r.len(),
            References::Multi(m) => m.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn num_refs(&self) -> usize {
        match self {
            References::Single(_) => 1,
            References::Multi(m) => m.member_names.len(),
        }
    }

    fn segment(&self, i: usize) -> Vec<&'a str> {
        match self {
            References::Single(r) => vec![r.translations[i].as_str()],
            References::Multi(m) => m.per_segment[i].iter().map(String::as_str).collect(),
        }
    }
}

impl<'a> From<&'a ReferenceSet> for References<'a> {
    fn from(r: &'a ReferenceSet) -> Self {
        References::Single(r)
    }
}

impl<'a> From<&'a MultiReference> for References<'a> {
    fn from(m: &'a MultiReference) -> Self {
        References::Multi(m)
    }
}

/// Parameters shared by [`score_system`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricParams {
    pub casing: Casing,
    pub chrf_order: usize,
    pub chrf_beta: f64,
    pub chrf_remove_whitespace: bool,
    pub ter_max_shift_len: usize,
}

impl Default for MetricParams {
    fn default() -> Self {
        Self {
            casing: Casing::Mixed,
            chrf_order: 6,
            chrf_beta: 2.0,
            chrf_remove_whitespace: true,
            ter_max_shift_len: DEFAULT_MAX_SHIFT_LEN,
        }
    }
}

fn tokenize_cased(text: &str, casing: Casing) -> TokenSeq {
    tokenize_intl(&apply_casing(text, casing))
}

/// Scores one system against a reference set or bundle: casing, then
/// tokenization, then segment stats, then corpus aggregation.
pub fn score_system(
    output: &SystemOutput,
    refs: References<'_>,
    metric: MetricKind,
    params: &MetricParams,
) -> Result<MetricResult, MetricError> {
    let n = output.hypotheses.len();
    if refs.len() != n {
        return Err(MetricError::LengthMismatch {
            hyps: n,
            refs: refs.len(),
        });
    }
    if n == 0 {
        return Err(MetricError::NoSegments);
    }
    let result = match metric {
        MetricKind::Bleu => {
            let config = BleuConfig {
                casing: params.casing,
            };
            let mut stats = BleuStats::default();
            for (i, hyp) in output.hypotheses.iter().enumerate() {
                let hyp = tokenize_cased(hyp, params.casing);
                let seg_refs: Vec<TokenSeq> = refs
                    .segment(i)
                    .into_iter()
                    .map(|r| tokenize_cased(r, params.casing))
                    .collect();
                let seg_refs: Vec<&[String]> = seg_refs.iter().map(|r| r.tokens()).collect();
                stats += bleu_segment_stats(&hyp, &seg_refs)?;
            }
            bleu_corpus(&stats, &config, refs.num_refs())?
        }
        MetricKind::Chrf => {
            let References::Single(reference) = refs else {
                return Err(MetricError::MultiReferenceUnsupported(metric));
            };
            let config = ChrfConfig {
                char_order: params.chrf_order,
                beta: params.chrf_beta,
                remove_whitespace: params.chrf_remove_whitespace,
                casing: params.casing,
            };
            chrf_corpus(&output.hypotheses, &reference.translations, &config)?
        }
        MetricKind::Ter => {
            let References::Single(reference) = refs else {
                return Err(MetricError::MultiReferenceUnsupported(metric));
            };
            let config = TerConfig {
                casing: params.casing,
                max_shift_len: params.ter_max_shift_len,
            };
            let segments = output
                .hypotheses
                .iter()
                .zip(&reference.translations)
                .enumerate()
                .map(|(i, (hyp, r))| {
                    let hyp = tokenize_cased(hyp, params.casing);
                    let r = tokenize_cased(r, params.casing);
                    ter_segment(&hyp, &r, config.max_shift_len).map_err(|e| match e {
                        MetricError::EmptyReferences => MetricError::EmptyReference { segment: i },
                        other => other,
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            ter_corpus(&segments, &config)?
        }
    };
    Ok(result.for_system(output.system_name.clone(), refs.name()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::ReferenceKind;

    fn system(lines: &[&str]) -> SystemOutput {
        SystemOutput::new("sys", lines.iter().map(|s| s.to_string()).collect())
    }

    fn reference(name: &str, lines: &[&str]) -> ReferenceSet {
        ReferenceSet::new(
            name,
            ReferenceKind::Standard,
            lines.iter().map(|s| s.to_string()).collect(),
        )
    }

    const LINES: &[&str] = &[
        "Die Glocken von St. Martin verstummen, da Kirchen in Harlem Probleme haben.",
        "„Das ist gut“, sagte er.",
        "Erdbeben der Stärke 7,5 erschüttert die Insel.",
    ];

    #[test]
    fn own_output_as_reference_is_perfect() {
        let out = system(LINES);
        let r = reference("self", LINES);
        let params = MetricParams::default();
        let bleu = score_system(&out, (&r).into(), MetricKind::Bleu, &params).unwrap();
        assert_eq!(bleu.score, 100.0);
        let chrf = score_system(&out, (&r).into(), MetricKind::Chrf, &params).unwrap();
        assert_eq!(chrf.score, 100.0);
        let ter = score_system(&out, (&r).into(), MetricKind::Ter, &params).unwrap();
        assert_eq!(ter.score, 0.0);
        assert_eq!(bleu.system.as_deref(), Some("sys"));
        assert_eq!(bleu.reference.as_deref(), Some("self"));
    }

    #[test]
    fn deterministic_scores_and_signatures() {
        let out = system(&["a b c d e", "das ist ein Test ."]);
        let r = reference("R", &["a b x d e", "das ist kein Test !"]);
        let params = MetricParams::default();
        for metric in MetricKind::ALL {
            let a = score_system(&out, (&r).into(), metric, &params).unwrap();
            let b = score_system(&out, (&r).into(), metric, &params).unwrap();
            assert_eq!(a.score.to_bits(), b.score.to_bits());
            assert_eq!(a.signature, b.signature);
        }
    }

    #[test]
    fn signature_layout() {
        let out = system(&["a b c d"]);
        let r = reference("R", &["a b c d"]);
        let res = score_system(
            &out,
            (&r).into(),
            MetricKind::Bleu,
            &MetricParams::default(),
        )
        .unwrap();
        let expected = format!(
            "BLEU+case.mixed+numrefs.1+smooth.exp+tok.intl+unicode.{}+impl.{}",
            unicode_version(),
            crate::IMPL_VERSION
        );
        assert_eq!(res.signature, expected);
        let lc = MetricParams {
            casing: Casing::Lower,
            ..MetricParams::default()
        };
        let res = score_system(&out, (&r).into(), MetricKind::Ter, &lc).unwrap();
        assert!(res.signature.starts_with("TER.shift10+case.lc+numrefs.1+"));
    }

    #[test]
    fn length_mismatch() {
        let out = system(&["a", "b"]);
        let r = reference("R", &["a"]);
        assert_eq!(
            score_system(
                &out,
                (&r).into(),
                MetricKind::Bleu,
                &MetricParams::default()
            ),
            Err(MetricError::LengthMismatch { hyps: 2, refs: 1 })
        );
    }

    #[test]
    fn multi_reference_only_for_bleu() {
        let out = system(&["a b c d"]);
        let multi = MultiReference {
            member_names: vec!["A".into(), "B".into()],
            per_segment: vec![vec!["a b c d".into(), "a b c e".into()]],
        };
        let params = MetricParams::default();
        let bleu = score_system(&out, (&multi).into(), MetricKind::Bleu, &params).unwrap();
        assert_eq!(bleu.score, 100.0);
        assert!(bleu.signature.contains("numrefs.2"));
        assert_eq!(bleu.reference.as_deref(), Some("A+B"));
        assert_eq!(
            score_system(&out, (&multi).into(), MetricKind::Ter, &params),
            Err(MetricError::MultiReferenceUnsupported(MetricKind::Ter))
        );
    }

    #[test]
    fn ter_empty_reference_names_segment() {
        let out = system(&["a", "b"]);
        let r = reference("R", &["a", ""]);
        assert_eq!(
            score_system(&out, (&r).into(), MetricKind::Ter, &MetricParams::default()),
            Err(MetricError::EmptyReference { segment: 1 })
        );
    }
}
