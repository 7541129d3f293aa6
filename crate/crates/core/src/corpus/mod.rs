//! Evaluation artifacts: test sets, system outputs, reference sets, ratings,
//! human and external system scores, and word alignments.
//!
//! Every text artifact is line-aligned with the test set. Line position is the
//! only segment correspondence; no sentence ids are read from text files, and
//! text is never Unicode-normalized on load.

mod filter;
mod load;
mod validate;

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use filter::{filter_by_origin, FilteredWorkspace};
pub use load::{
    lines_to_string, load_alignments, load_external_scores, load_human_scores, load_lines,
    load_origin_tags, load_ratings,
};
pub use validate::{validate_workspace, Issue, IssueKind, Severity, ValidationReport};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}:{line}: invalid UTF-8", path.display())]
    Encoding { path: PathBuf, line: usize },
    #[error("{}: file is empty", path.display())]
    EmptyFile { path: PathBuf },
    #[error("{}:{line}: malformed row: {reason}", path.display())]
    Malformed {
        path: PathBuf,
        line: usize,
        reason: String,
    },
    #[error("{}:{line}: rating {value} outside [0, 100]", path.display())]
    OutOfRange {
        path: PathBuf,
        line: usize,
        value: f64,
    },
    #[error("{}:{line}: duplicate key {key}", path.display())]
    Duplicate {
        path: PathBuf,
        line: usize,
        key: String,
    },
    #[error("{}:{line}: negative alignment index in {pair:?}", path.display())]
    NegativeIndex {
        path: PathBuf,
        line: usize,
        pair: String,
    },
    #[error("duplicate {what} name {name:?}")]
    DuplicateName { what: &'static str, name: String },
    #[error("{what} has {got} lines, expected {expected}")]
    LengthMismatch {
        what: String,
        expected: usize,
        got: usize,
    },
    #[error("origin tag for segment {segment} is outside the test set")]
    OriginIndexOutOfRange { segment: usize },
    #[error("origin language {language:?} is not part of language pair {pair}")]
    ForeignOrigin {
        language: String,
        pair: LanguagePair,
    },
    #[error("segment {segment} has no origin language tag")]
    MissingOriginTags { segment: usize },
    #[error("no test set loaded; origin filtering needs origin-tagged segments")]
    NoTestSet,
    #[error("origin {origin:?} is not one of the languages of {pair}")]
    NoSuchOrigin { origin: String, pair: LanguagePair },
    #[error("no segment originates in {origin:?}")]
    EmptyFilter { origin: String },
    #[error("test set must contain at least one segment")]
    EmptyTestSet,
    #[error("invalid language pair {0:?}, expected <src>-<tgt>")]
    LanguagePair(String),
}

/// Source and target language codes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LanguagePair {
    pub source: String,
    pub target: String,
}

impl LanguagePair {
    pub fn new(source: impl Into<String>, target: impl Into<String>) -> Self {
        Self {
            source: source.into(),
            target: target.into(),
        }
    }

    pub fn contains(&self, language: &str) -> bool {
        self.source == language || self.target == language
    }
}

impl fmt::Display for LanguagePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.source, self.target)
    }
}

impl std::str::FromStr for LanguagePair {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.split_once('-') {
            Some((src, tgt)) if !src.is_empty() && !tgt.is_empty() && !tgt.contains('-') => {
                Ok(Self::new(src, tgt))
            }
            _ => Err(CorpusError::LanguagePair(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub index: usize,
    pub source_text: String,
    /// Language the sentence was originally written in, when known.
    pub origin_language: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TestSet {
    name: String,
    language_pair: LanguagePair,
    segments: Vec<Segment>,
    path: Option<PathBuf>,
}

impl TestSet {
    pub fn new(
        name: impl Into<String>,
        language_pair: LanguagePair,
        sources: Vec<String>,
    ) -> Result<Self, CorpusError> {
        if sources.is_empty() {
            return Err(CorpusError::EmptyTestSet);
        }
        let segments = sources
            .into_iter()
            .enumerate()
            .map(|(index, source_text)| Segment {
                index,
                source_text,
                origin_language: None,
            })
            .collect();
        Ok(Self {
            name: name.into(),
            language_pair,
            segments,
            path: None,
        })
    }

    pub fn with_path(mut self, path: impl Into<PathBuf>) -> Self {
        self.path = Some(path.into());
        self
    }

    /// Attaches origin-language tags. Every tag must name one of the pair's
    /// languages and point at an existing segment. Untagged segments keep
    /// `None`.
    pub fn with_origin_tags(mut self, tags: &BTreeMap<usize, String>) -> Result<Self, CorpusError> {
        for (&segment, language) in tags {
            if !self.language_pair.contains(language) {
                return Err(CorpusError::ForeignOrigin {
                    language: language.clone(),
                    pair: self.language_pair.clone(),
                });
            }
            let seg = self
                .segments
                .get_mut(segment)
                .ok_or(CorpusError::OriginIndexOutOfRange { segment })?;
            seg.origin_language = Some(language.clone());
        }
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn language_pair(&self) -> &LanguagePair {
        &self.language_pair
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub(crate) fn restrict(&self, keep: &[usize]) -> Self {
        let segments = keep
            .iter()
            .enumerate()
            .map(|(new, &old)| Segment {
                index: new,
                ..self.segments[old].clone()
            })
            .collect();
        Self {
            name: self.name.clone(),
            language_pair: self.language_pair.clone(),
            segments,
            path: self.path.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystemOutput {
    pub system_name: String,
    pub hypotheses: Vec<String>,
    pub path: Option<PathBuf>,
}

impl SystemOutput {
    pub fn new(system_name: impl Into<String>, hypotheses: Vec<String>) -> Self {
        Self {
            system_name: system_name.into(),
            hypotheses,
            path: None,
        }
    }

    pub fn load(system_name: impl Into<String>, path: &Path) -> Result<Self, CorpusError> {
        Ok(Self {
            system_name: system_name.into(),
            hypotheses: load_lines(path)?,
            path: Some(path.to_path_buf()),
        })
    }
}

/// Provenance of a reference set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReferenceKind {
    Standard,
    Paraphrase,
    Composed,
}

impl fmt::Display for ReferenceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReferenceKind::Standard => "standard",
            ReferenceKind::Paraphrase => "paraphrase",
            ReferenceKind::Composed => "composed",
        })
    }
}

impl std::str::FromStr for ReferenceKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "standard" => Ok(ReferenceKind::Standard),
            "paraphrase" => Ok(ReferenceKind::Paraphrase),
            "composed" => Ok(ReferenceKind::Composed),
            other => Err(format!(
                "unknown reference kind {other:?} (expected standard, paraphrase or composed)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReferenceSet {
    pub name: String,
    pub kind: ReferenceKind,
    pub translations: Vec<String>,
    pub path: Option<PathBuf>,
}

impl ReferenceSet {
    pub fn new(name: impl Into<String>, kind: ReferenceKind, translations: Vec<String>) -> Self {
        Self {
            name: name.into(),
            kind,
            translations,
            path: None,
        }
    }

    pub fn load(
        name: impl Into<String>,
        kind: ReferenceKind,
        path: &Path,
    ) -> Result<Self, CorpusError> {
        Ok(Self {
            name: name.into(),
            kind,
            translations: load_lines(path)?,
            path: Some(path.to_path_buf()),
        })
    }

    pub fn len(&self) -> usize {
        self.translations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.translations.is_empty()
    }
}

/// Several reference sets bundled per segment. Member order is significant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiReference {
    pub member_names: Vec<String>,
    pub per_segment: Vec<Vec<String>>,
}

impl MultiReference {
    /// `+`-joined member names, e.g. `AR+WMT`.
    pub fn name(&self) -> String {
        self.member_names.join("+")
    }

    pub fn len(&self) -> usize {
        self.per_segment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.per_segment.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RatingKey {
    pub segment: usize,
    pub reference: String,
    pub rater: String,
}

/// Per-segment, per-reference-set adequacy ratings on a 0-100 scale.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AdequacyRatings {
    entries: BTreeMap<RatingKey, f64>,
    path: Option<PathBuf>,
}

impl AdequacyRatings {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts one rating, rejecting out-of-range values and repeated keys.
    pub fn insert(
        &mut self,
        segment: usize,
        reference: impl Into<String>,
        rater: impl Into<String>,
        rating: f64,
    ) -> Result<(), RatingInsertError> {
        if !(0.0..=100.0).contains(&rating) {
            return Err(RatingInsertError::OutOfRange(rating));
        }
        let key = RatingKey {
            segment,
            reference: reference.into(),
            rater: rater.into(),
        };
        if self.entries.contains_key(&key) {
            return Err(RatingInsertError::Duplicate(key));
        }
        self.entries.insert(key, rating);
        Ok(())
    }

    pub fn get(&self, segment: usize, reference: &str, rater: &str) -> Option<f64> {
        self.entries
            .get(&RatingKey {
                segment,
                reference: reference.to_string(),
                rater: rater.to_string(),
            })
            .copied()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&RatingKey, f64)> {
        self.entries.iter().map(|(k, &v)| (k, v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    /// Serializes to the four-column ratings TSV.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (key, rating) in &self.entries {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\n",
                key.segment, key.reference, key.rater, rating
            ));
        }
        out
    }

    pub(crate) fn restrict(&self, old_to_new: &BTreeMap<usize, usize>) -> Self {
        let entries = self
            .entries
            .iter()
            .filter_map(|(key, &rating)| {
                old_to_new.get(&key.segment).map(|&segment| {
                    (
                        RatingKey {
                            segment,
                            ..key.clone()
                        },
                        rating,
                    )
                })
            })
            .collect();
        Self {
            entries,
            path: self.path.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RatingInsertError {
    #[error("rating {0} outside [0, 100]")]
    OutOfRange(f64),
    #[error("duplicate rating key {0:?}")]
    Duplicate(RatingKey),
}

/// Direction in which a score improves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    HigherBetter,
    LowerBetter,
}

impl Orientation {
    /// Maps a score onto the higher-is-better axis.
    pub fn adjust(self, score: f64) -> f64 {
        match self {
            Orientation::HigherBetter => score,
            Orientation::LowerBetter => -score,
        }
    }
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Orientation::HigherBetter => "higher_better",
            Orientation::LowerBetter => "lower_better",
        })
    }
}

impl std::str::FromStr for Orientation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "higher_better" => Ok(Orientation::HigherBetter),
            "lower_better" => Ok(Orientation::LowerBetter),
            other => Err(format!(
                "unknown orientation {other:?} (expected higher_better or lower_better)"
            )),
        }
    }
}

/// Human system-level scores.
///
/// `normalized` records whether the scores are standardized or raw averages;
/// correlation treats both as opaque monotone scores.
#[derive(Debug, Clone, PartialEq)]
pub struct HumanSystemScores {
    pub scores: BTreeMap<String, f64>,
    pub normalized: bool,
    pub path: Option<PathBuf>,
}

impl HumanSystemScores {
    pub fn new(scores: BTreeMap<String, f64>, normalized: bool) -> Self {
        Self {
            scores,
            normalized,
            path: None,
        }
    }

    pub fn to_tsv(&self) -> String {
        self.scores
            .iter()
            .map(|(system, score)| format!("{system}\t{score}\n"))
            .collect()
    }
}

/// System-level scores computed by an external tool (METEOR, BERTScore, ...).
#[derive(Debug, Clone, PartialEq)]
pub struct ExternalMetricScores {
    pub metric_name: String,
    pub orientation: Orientation,
    pub scores: BTreeMap<String, f64>,
    pub path: Option<PathBuf>,
}

impl ExternalMetricScores {
    /// Splits a `metric@refset` name. Names without `@` have no reference label.
    pub fn metric_and_reference(&self) -> (&str, Option<&str>) {
        match self.metric_name.split_once('@') {
            Some((metric, reference)) => (metric, Some(reference)),
            None => (&self.metric_name, None),
        }
    }
}

/// Word alignments, one link list per segment, in Pharaoh `i-j` form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlignmentSet {
    pub name: String,
    pub links: Vec<Vec<(usize, usize)>>,
    pub path: Option<PathBuf>,
}

impl AlignmentSet {
    pub fn new(name: impl Into<String>, links: Vec<Vec<(usize, usize)>>) -> Self {
        Self {
            name: name.into(),
            links,
            path: None,
        }
    }

    pub fn len(&self) -> usize {
        self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }

    pub fn to_pharaoh(&self) -> String {
        let mut out = String::new();
        for segment in &self.links {
            let line: Vec<String> = segment.iter().map(|(i, j)| format!("{i}-{j}")).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }
}

/// Everything loaded for one evaluation run. Immutable once built; the
/// builder methods only enforce name uniqueness, line counts are checked by
/// [`validate_workspace`].
#[derive(Debug, Clone, Default)]
pub struct Workspace {
    test_set: Option<TestSet>,
    systems: Vec<SystemOutput>,
    references: Vec<ReferenceSet>,
    ratings: Option<AdequacyRatings>,
    human: Option<HumanSystemScores>,
    external: Vec<ExternalMetricScores>,
    alignments: Vec<AlignmentSet>,
}

impl Workspace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_test_set(mut self, test_set: TestSet) -> Self {
        self.test_set = Some(test_set);
        self
    }

    pub fn add_system(&mut self, system: SystemOutput) -> Result<(), CorpusError> {
        if self.system(&system.system_name).is_some() {
            return Err(CorpusError::DuplicateName {
                what: "system",
                name: system.system_name,
            });
        }
        self.systems.push(system);
        Ok(())
    }

    pub fn add_reference(&mut self, reference: ReferenceSet) -> Result<(), CorpusError> {
        if self.reference(&reference.name).is_some() {
            return Err(CorpusError::DuplicateName {
                what: "reference set",
                name: reference.name,
            });
        }
        self.references.push(reference);
        Ok(())
    }

    pub fn set_ratings(&mut self, ratings: AdequacyRatings) {
        self.ratings = Some(ratings);
    }

    pub fn set_human_scores(&mut self, human: HumanSystemScores) {
        self.human = Some(human);
    }

    pub fn add_external_scores(&mut self, scores: ExternalMetricScores) -> Result<(), CorpusError> {
        if self
            .external
            .iter()
            .any(|e| e.metric_name == scores.metric_name)
        {
            return Err(CorpusError::DuplicateName {
                what: "external metric",
                name: scores.metric_name,
            });
        }
        self.external.push(scores);
        Ok(())
    }

    pub fn add_alignments(&mut self, alignments: AlignmentSet) -> Result<(), CorpusError> {
        if self.alignments.iter().any(|a| a.name == alignments.name) {
            return Err(CorpusError::DuplicateName {
                what: "alignment set",
                name: alignments.name,
            });
        }
        self.alignments.push(alignments);
        Ok(())
    }

    pub fn test_set(&self) -> Option<&TestSet> {
        self.test_set.as_ref()
    }

    pub fn systems(&self) -> &[SystemOutput] {
        &self.systems
    }

    pub fn system(&self, name: &str) -> Option<&SystemOutput> {
        self.systems.iter().find(|s| s.system_name == name)
    }

    pub fn references(&self) -> &[ReferenceSet] {
        &self.references
    }

    pub fn reference(&self, name: &str) -> Option<&ReferenceSet> {
        self.references.iter().find(|r| r.name == name)
    }

    pub fn ratings(&self) -> Option<&AdequacyRatings> {
        self.ratings.as_ref()
    }

    pub fn human_scores(&self) -> Option<&HumanSystemScores> {
        self.human.as_ref()
    }

    pub fn external_scores(&self) -> &[ExternalMetricScores] {
        &self.external
    }

    pub fn alignments(&self) -> &[AlignmentSet] {
        &self.alignments
    }

    /// Number of segments every line-aligned artifact must have: the test
    /// set's size, or the first loaded artifact's when no test set is present.
    pub fn segment_count(&self) -> Option<usize> {
        self.test_set
            .as_ref()
            .map(TestSet::len)
            .or_else(|| self.references.first().map(ReferenceSet::len))
            .or_else(|| self.systems.first().map(|s| s.hypotheses.len()))
            .or_else(|| self.alignments.first().map(AlignmentSet::len))
    }
}
