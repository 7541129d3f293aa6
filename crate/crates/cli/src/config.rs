use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use refeval::metrics::MetricParams;
use refeval::tokenize::Casing;
use refeval::MetricKind;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Tsv,
    Json,
    Csv,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Tsv => "tsv",
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

/// Resolved settings for one run. Loaded from an optional TOML file, then
/// overridden by flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub source: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub langpair: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub origin_tags: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub origin: Option<String>,
    /// Glob patterns; every match is one system, named by its file name.
    pub systems: Vec<String>,
    /// `name[:kind]=path`.
    pub refs: Vec<String>,
    /// `name+name[+...]`.
    pub multi_refs: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratings: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub human: Option<PathBuf>,
    pub human_normalized: bool,
    pub external_scores: Vec<PathBuf>,
    /// `name=path`.
    pub alignments: Vec<String>,
    pub metrics: Vec<String>,
    pub params: MetricParams,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub topk: Option<usize>,
    pub members: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub system: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference: Option<String>,
    pub order: usize,
    pub top: usize,
    /// Output directory; not part of the canonical form.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: None,
            source: None,
            langpair: None,
            origin_tags: None,
            origin: None,
            systems: Vec::new(),
            refs: Vec::new(),
            multi_refs: Vec::new(),
            ratings: None,
            human: None,
            human_normalized: false,
            external_scores: Vec::new(),
            alignments: Vec::new(),
            metrics: vec!["bleu".into()],
            params: MetricParams::default(),
            topk: None,
            members: Vec::new(),
            name: None,
            system: None,
            reference: None,
            order: 4,
            top: 20,
            out: None,
            format: Format::Tsv,
        }
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// One-line JSON with the output directory removed.
    pub fn canonical_json(&self) -> String {
        let mut c = self.clone();
        c.out = None;
        serde_json::to_string(&c).expect("config serializes")
    }

    pub fn canonical_value(&self) -> serde_json::Value {
        serde_json::from_str(&self.canonical_json()).expect("round trip")
    }

    pub fn metric_kinds(&self) -> Result<Vec<MetricKind>> {
        let mut kinds = Vec::new();
        for m in &self.metrics {
            for part in m.split(',').map(str::trim).filter(|p| !p.is_empty()) {
                let kind: MetricKind = part.parse().map_err(anyhow::Error::msg)?;
                if !kinds.contains(&kind) {
                    kinds.push(kind);
                }
            }
        }
        if kinds.is_empty() {
            bail!("no metrics selected");
        }
        kinds.sort();
        Ok(kinds)
    }
}

/// Flags shared by every subcommand. Anything given here overrides the
/// config file.
#[derive(Debug, Default, Args)]
pub struct CommonArgs {
    /// TOML file with default settings.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Source side of the test set, one segment per line.
    #[arg(long)]
    pub source: Option<PathBuf>,
    /// Language pair of the test set, e.g. en-de.
    #[arg(long)]
    pub langpair: Option<String>,
    /// Per-segment origin language tags (`index<TAB>lang`).
    #[arg(long)]
    pub origin_tags: Option<PathBuf>,
    /// Keep only segments originally written in this language.
    #[arg(long)]
    pub origin: Option<String>,
    /// System output files or glob patterns.
    #[arg(long, num_args = 1..)]
    pub systems: Vec<String>,
    /// Reference set as `name[:kind]=path` (repeatable).
    #[arg(long)]
    pub refs: Vec<String>,
    /// Multi-reference bundle as `name+name` (repeatable).
    #[arg(long)]
    pub multi_ref: Vec<String>,
    /// Adequacy ratings TSV.
    #[arg(long)]
    pub ratings: Option<PathBuf>,
    /// System-level human scores TSV.
    #[arg(long)]
    pub human: Option<PathBuf>,
    /// Mark the human scores as standardized.
    #[arg(long)]
    pub human_normalized: bool,
    /// Externally computed metric scores TSV (repeatable).
    #[arg(long)]
    pub external_scores: Vec<PathBuf>,
    /// Word alignments as `name=path` in Pharaoh format (repeatable).
    #[arg(long)]
    pub alignments: Vec<String>,
    /// Output directory. Results go to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output format (default tsv).
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Default, Args)]
pub struct MetricArgs {
    /// Comma-separated subset of bleu,chrf,ter.
    #[arg(long)]
    pub metrics: Option<String>,
    /// Lowercase hypotheses and references before scoring.
    #[arg(long)]
    pub lowercase: bool,
    /// Highest character n-gram order for chrF (default 6).
    #[arg(long)]
    pub chrf_order: Option<usize>,
    /// Recall weight for chrF (default 2).
    #[arg(long)]
    pub chrf_beta: Option<f64>,
    /// Keep whitespace when extracting character n-grams.
    #[arg(long)]
    pub chrf_keep_whitespace: bool,
    /// Longest block TER may shift (default 10).
    #[arg(long)]
    pub ter_max_shift: Option<usize>,
}

fn replace_if<T>(slot: &mut Vec<T>, given: Vec<T>) {
    if !given.is_empty() {
        *slot = given;
    }
}

pub fn resolve(command: &str, common: CommonArgs, metric: Option<MetricArgs>) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    cfg.command = Some(command.to_string());
    cfg.source = common.source.or(cfg.source);
    cfg.langpair = common.langpair.or(cfg.langpair);
    cfg.origin_tags = common.origin_tags.or(cfg.origin_tags);
    cfg.origin = common.origin.or(cfg.origin);
    replace_if(&mut cfg.systems, common.systems);
    replace_if(&mut cfg.refs, common.refs);
    replace_if(&mut cfg.multi_refs, common.multi_ref);
    cfg.ratings = common.ratings.or(cfg.ratings);
    cfg.human = common.human.or(cfg.human);
    cfg.human_normalized |= common.human_normalized;
    replace_if(&mut cfg.external_scores, common.external_scores);
    replace_if(&mut cfg.alignments, common.alignments);
    cfg.out = common.out.or(cfg.out);
    if let Some(f) = common.format {
        cfg.format = f;
    }
    if let Some(m) = metric {
        if let Some(list) = m.metrics {
            cfg.metrics = vec![list];
        }
        if m.lowercase {
            cfg.params.casing = Casing::Lower;
        }
        if let Some(o) = m.chrf_order {
            cfg.params.chrf_order = o;
        }
        if let Some(b) = m.chrf_beta {
            cfg.params.chrf_beta = b;
        }
        if m.chrf_keep_whitespace {
            cfg.params.chrf_remove_whitespace = false;
        }
        if let Some(s) = m.ter_max_shift {
            cfg.params.ter_max_shift_len = s;
        }
    }
    // Normalize the metric list so equivalent spellings give one canonical form.
    let kinds = cfg.metric_kinds()?;
    cfg.metrics = kinds.iter().map(|k| k.to_string()).collect();
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(
            &path,
            "refs = [\"WMT=a.txt\"]\nmetrics = [\"chrf\"]\norder = 3\n[params]\nchrf_beta = 1.0\n",
        )
        .unwrap();
        let common = CommonArgs {
            config: Some(path),
            refs: vec!["P=b.txt".into()],
            ..CommonArgs::default()
        };
        let metric = MetricArgs {
            metrics: Some("ter,bleu".into()),
            ..MetricArgs::default()
        };
        let cfg = resolve("score", common, Some(metric)).unwrap();
        assert_eq!(cfg.refs, vec!["P=b.txt"]);
        assert_eq!(cfg.metrics, vec!["bleu", "ter"]);
        assert_eq!(cfg.order, 3);
        assert_eq!(cfg.params.chrf_beta, 1.0);
        assert_eq!(cfg.params.chrf_order, 6);
    }

    #[test]
    fn canonical_form_drops_output_dir() {
        let a = RunConfig {
            out: Some("x".into()),
            ..RunConfig::default()
        };
        let b = RunConfig {
            out: Some("y".into()),
            ..RunConfig::default()
        };
        assert_eq!(a.canonical_json(), b.canonical_json());
        assert!(!a.canonical_json().contains('\n'));
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(toml::from_str::<RunConfig>("sytems = []").is_err());
    }
}
