use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use refeval::corpus::{
    filter_by_origin, load_alignments, load_external_scores, load_human_scores, load_lines,
    load_origin_tags, load_ratings, validate_workspace, ValidationReport,
};
use refeval::{
    LanguagePair, MultiReference, ReferenceKind, ReferenceSet, SystemOutput, TestSet, Workspace,
};

use crate::config::RunConfig;

/// `name[:kind]=path`.
pub fn parse_ref_spec(spec: &str) -> Result<(String, ReferenceKind, PathBuf)> {
    let (lhs, path) = spec
        .split_once('=')
        .ok_or_else(|| anyhow!("reference {spec:?} is not of the form name[:kind]=path"))?;
    let (name, kind) = match lhs.split_once(':') {
        Some((name, kind)) => (name, kind.parse().map_err(anyhow::Error::msg)?),
        None => (lhs, ReferenceKind::Standard),
    };
    if name.is_empty() || path.is_empty() {
        bail!("reference {spec:?} is not of the form name[:kind]=path");
    }
    Ok((name.to_string(), kind, PathBuf::from(path)))
}

fn parse_named_path(spec: &str, what: &str) -> Result<(String, PathBuf)> {
    match spec.split_once('=') {
        Some((name, path)) if !name.is_empty() && !path.is_empty() => {
            Ok((name.to_string(), PathBuf::from(path)))
        }
        _ => bail!("{what} {spec:?} is not of the form name=path"),
    }
}

/// System name for an output file: its file name, minus a `.txt` suffix.
pub fn system_name(path: &Path) -> String {
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    name.strip_suffix(".txt").map(String::from).unwrap_or(name)
}

pub fn expand_systems(patterns: &[String]) -> Result<Vec<PathBuf>> {
    let mut paths = BTreeSet::new();
    for pattern in patterns {
        let mut matched = false;
        for entry in glob::glob(pattern).with_context(|| format!("bad glob {pattern:?}"))? {
            let path = entry?;
            if path.is_file() {
                paths.insert(path);
                matched = true;
            }
        }
        if !matched {
            bail!("--systems {pattern:?} matched no files");
        }
    }
    Ok(paths.into_iter().collect())
}

/// Loads every artifact named in the config.
pub fn load_workspace(cfg: &RunConfig) -> Result<Workspace> {
    let mut ws = Workspace::new();
    if let Some(source) = &cfg.source {
        let pair: LanguagePair = cfg
            .langpair
            .as_deref()
            .ok_or_else(|| anyhow!("--source needs --langpair"))?
            .parse()?;
        let name = source
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "test".into());
        let mut test_set = TestSet::new(name, pair, load_lines(source)?)?.with_path(source);
        if let Some(tags) = &cfg.origin_tags {
            test_set = test_set.with_origin_tags(&load_origin_tags(tags)?)?;
        }
        ws = ws.with_test_set(test_set);
    } else if cfg.origin_tags.is_some() {
        bail!("--origin-tags needs --source");
    }
    for path in expand_systems(&cfg.systems)? {
        ws.add_system(SystemOutput::load(system_name(&path), &path)?)?;
    }
    for spec in &cfg.refs {
        let (name, kind, path) = parse_ref_spec(spec)?;
        ws.add_reference(ReferenceSet::load(name, kind, &path)?)?;
    }
    if let Some(path) = &cfg.ratings {
        ws.set_ratings(load_ratings(path)?);
    }
    if let Some(path) = &cfg.human {
        ws.set_human_scores(load_human_scores(path, cfg.human_normalized)?);
    }
    for path in &cfg.external_scores {
        for scores in load_external_scores(path)? {
            ws.add_external_scores(scores)?;
        }
    }
    for spec in &cfg.alignments {
        let (name, path) = parse_named_path(spec, "alignment")?;
        ws.add_alignments(load_alignments(name, &path)?)?;
    }
    Ok(ws)
}

/// Validation issues reported as `severity: artifact (file:line): kind`.
pub fn report_text(report: &ValidationReport) -> String {
    let mut out = String::new();
    for issue in &report.issues {
        out.push_str(&issue.to_string());
        out.push('\n');
    }
    out
}

/// Loads, validates and optionally filters by origin. Warnings go to stderr;
/// any error aborts before results are computed.
pub fn prepare(cfg: &RunConfig) -> Result<Workspace> {
    let ws = load_workspace(cfg)?;
    let report = validate_workspace(&ws);
    for issue in report.warnings() {
        eprintln!("{issue}");
    }
    if !report.is_ok() {
        let errors: Vec<String> = report.errors().map(|i| i.to_string()).collect();
        bail!("validation failed:\n{}", errors.join("\n"));
    }
    match &cfg.origin {
        Some(origin) => {
            let filtered = filter_by_origin(&ws, origin)?;
            eprintln!(
                "kept {} of {} segments with origin {origin}",
                filtered.old_to_new.len(),
                report.segment_count.unwrap_or(0)
            );
            Ok(filtered.workspace)
        }
        None => Ok(ws),
    }
}

pub fn reference<'a>(ws: &'a Workspace, name: &str) -> Result<&'a ReferenceSet> {
    ws.reference(name)
        .ok_or_else(|| anyhow!("unknown reference set {name:?}"))
}

/// Resolves every `--multi-ref a+b` spec against the loaded references.
pub fn multi_references(ws: &Workspace, specs: &[String]) -> Result<Vec<MultiReference>> {
    specs
        .iter()
        .map(|spec| {
            let members = spec
                .split('+')
                .map(|name| reference(ws, name))
                .collect::<Result<Vec<_>>>()?;
            Ok(refeval::refsets::assemble_multi(&members)?)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ref_specs() {
        let (n, k, p) = parse_ref_spec("WMT.p:paraphrase=refs/p.txt").unwrap();
        assert_eq!(
            (n.as_str(), k, p),
            (
                "WMT.p",
                ReferenceKind::Paraphrase,
                PathBuf::from("refs/p.txt")
            )
        );
        let (n, k, _) = parse_ref_spec("WMT=a=b.txt").unwrap();
        assert_eq!((n.as_str(), k), ("WMT", ReferenceKind::Standard));
        assert!(parse_ref_spec("WMT").is_err());
        assert!(parse_ref_spec("WMT:odd=x").is_err());
        assert!(parse_ref_spec("=x").is_err());
    }

    #[test]
    fn system_names() {
        assert_eq!(system_name(Path::new("out/FB.txt")), "FB");
        assert_eq!(
            system_name(Path::new("newstest2019.FB.6862.en-de")),
            "newstest2019.FB.6862.en-de"
        );
    }
}
