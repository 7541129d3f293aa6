use std::collections::BTreeSet;
use std::fmt;
use std::path::PathBuf;

use serde::Serialize;

use super::Workspace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IssueKind {
    LengthMismatch { expected: usize, got: usize },
    IncompleteRatings { missing: usize },
    RatingIndexOutOfRange { segment: usize },
    UnknownRatedSet { name: String },
    UnknownSystem { name: String },
    MissingOriginTags { untagged: usize },
    EmptyWorkspace,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Issue {
    pub severity: Severity,
    /// Which artifact the issue belongs to (e.g. `system FB`, `reference WMT`).
    pub artifact: String,
    pub file: Option<PathBuf>,
    /// 1-based line number in `file`, when the issue points at one.
    pub line: Option<usize>,
    #[serde(flatten)]
    pub kind: IssueKind,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        write!(f, "{sev}: {}", self.artifact)?;
        if let Some(file) = &self.file {
            write!(f, " ({}", file.display())?;
            if let Some(line) = self.line {
                write!(f, ":{line}")?;
            }
            f.write_str(")")?;
        }
        write!(f, ": {}", self.kind)
    }
}

impl fmt::Display for IssueKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IssueKind::LengthMismatch { expected, got } => {
                write!(f, "LengthMismatch(expected {expected}, got {got})")
            }
            IssueKind::IncompleteRatings { missing } => {
                write!(
                    f,
                    "IncompleteRatings({missing} (segment, set) pairs unrated)"
                )
            }
            IssueKind::RatingIndexOutOfRange { segment } => {
                write!(f, "rating for segment {segment} beyond the test set")
            }
            IssueKind::UnknownRatedSet { name } => {
                write!(f, "ratings refer to unknown reference set {name:?}")
            }
            IssueKind::UnknownSystem { name } => write!(f, "unknown system {name:?}"),
            IssueKind::MissingOriginTags { untagged } => {
                write!(f, "{untagged} segments without origin tag")
            }
            IssueKind::EmptyWorkspace => f.write_str("nothing loaded"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub segment_count: Option<usize>,
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    /// True when no error-severity issue was found. Warnings do not fail.
    pub fn is_ok(&self) -> bool {
        self.issues.iter().all(|i| i.severity < Severity::Error)
    }

    pub fn errors(&self) -> impl Iterator<Item = &Issue> {
        self.issues.iter().filter(|i| i.severity == Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Issue> {
        self.issues
            .iter()
            .filter(|i| i.severity == Severity::Warning)
    }
}

/// Checks line-count agreement of every line-aligned artifact, coverage of the
/// ratings, and that system-level score files only name loaded systems.
///
/// Never fails; every finding lands in the report.
pub fn validate_workspace(ws: &Workspace) -> ValidationReport {
    let mut report = ValidationReport {
        segment_count: ws.segment_count(),
        issues: Vec::new(),
    };
    let Some(expected) = report.segment_count else {
        report.issues.push(Issue {
            severity: Severity::Error,
            artifact: "workspace".into(),
            file: None,
            line: None,
            kind: IssueKind::EmptyWorkspace,
        });
        return report;
    };

    let mut check_len = |artifact: String, file: Option<PathBuf>, got: usize| {
        if got != expected {
            report.issues.push(Issue {
                severity: Severity::Error,
                artifact,
                file,
                // First line where the two files disagree.
                line: Some(expected.min(got) + 1),
                kind: IssueKind::LengthMismatch { expected, got },
            });
        }
    };
    for system in ws.systems() {
        check_len(
            format!("system {}", system.system_name),
            system.path.clone(),
            system.hypotheses.len(),
        );
    }
    for reference in ws.references() {
        check_len(
            format!("reference {}", reference.name),
            reference.path.clone(),
            reference.translations.len(),
        );
    }
    for alignment in ws.alignments() {
        check_len(
            format!("alignments {}", alignment.name),
            alignment.path.clone(),
            alignment.links.len(),
        );
    }

    if let Some(test_set) = ws.test_set() {
        let untagged = test_set
            .segments()
            .iter()
            .filter(|s| s.origin_language.is_none())
            .count();
        if untagged > 0 && untagged < test_set.len() {
            report.issues.push(Issue {
                severity: Severity::Warning,
                artifact: format!("test set {}", test_set.name()),
                file: test_set.path().map(Into::into),
                line: None,
                kind: IssueKind::MissingOriginTags { untagged },
            });
        }
    }

    if let Some(ratings) = ws.ratings() {
        let file = ratings.path().map(Into::into);
        let known: BTreeSet<&str> = ws.references().iter().map(|r| r.name.as_str()).collect();
        let mut rated: BTreeSet<(usize, &str)> = BTreeSet::new();
        let mut unknown: BTreeSet<&str> = BTreeSet::new();
        let mut out_of_range: BTreeSet<usize> = BTreeSet::new();
        for (key, _) in ratings.entries() {
            if key.segment >= expected {
                out_of_range.insert(key.segment);
            } else if !known.contains(key.reference.as_str()) {
                unknown.insert(&key.reference);
            } else {
                rated.insert((key.segment, &key.reference));
            }
        }
        for segment in out_of_range {
            report.issues.push(Issue {
                severity: Severity::Error,
                artifact: "ratings".into(),
                file: file.clone(),
                line: None,
                kind: IssueKind::RatingIndexOutOfRange { segment },
            });
        }
        for name in unknown {
            report.issues.push(Issue {
                severity: Severity::Warning,
                artifact: "ratings".into(),
                file: file.clone(),
                line: None,
                kind: IssueKind::UnknownRatedSet {
                    name: name.to_string(),
                },
            });
        }
        // Coverage is judged per reference set that has at least one rating.
        let rated_sets: BTreeSet<&str> = rated.iter().map(|&(_, name)| name).collect();
        let missing = rated_sets.len() * expected - rated.len();
        if missing > 0 {
            report.issues.push(Issue {
                severity: Severity::Warning,
                artifact: "ratings".into(),
                file,
                line: None,
                kind: IssueKind::IncompleteRatings { missing },
            });
        }
    }

    let systems: BTreeSet<&str> = ws
        .systems()
        .iter()
        .map(|s| s.system_name.as_str())
        .collect();
    if let Some(human) = ws.human_scores() {
        for name in human.scores.keys() {
            if !systems.contains(name.as_str()) {
                report.issues.push(Issue {
                    severity: Severity::Error,
                    artifact: "human scores".into(),
                    file: human.path.clone(),
                    line: None,
                    kind: IssueKind::UnknownSystem { name: name.clone() },
                });
            }
        }
    }
    for ext in ws.external_scores() {
        for name in ext.scores.keys() {
            if !systems.contains(name.as_str()) {
                report.issues.push(Issue {
                    severity: Severity::Error,
                    artifact: format!("external metric {}", ext.metric_name),
                    file: ext.path.clone(),
                    line: None,
                    kind: IssueKind::UnknownSystem { name: name.clone() },
                });
            }
        }
    }
    report
}
