use std::collections::BTreeMap;

use anyhow::{anyhow, bail, Result};
use rayon::prelude::*;
use refeval::analysis::{matched_ngram_report, monotonicity};
use refeval::corpus::{lines_to_string, validate_workspace};
use refeval::correlate::{correlate_systems, systems_ranking_agreement, topk_curve, SystemScores};
use refeval::metrics::{score_system, ter_complement, References};
use refeval::refsets::{average_segment_ratings, compose_hq, set_mean_rating};
use refeval::tokenize::{apply_casing, tokenize_intl, TokenSeq};
use refeval::{MetricKind, MetricResult, ReferenceSet, Workspace};
use serde_json::json;

use crate::config::{Format, RunConfig};
use crate::output::{emit, file_safe, Artifact, Cell, Table};
use crate::workspace::{multi_references, prepare, reference, report_text};

/// Scores every (system, reference set, metric) triple. chrF and TER are
/// only computed against single references. Results are sorted by system,
/// reference set, then metric.
pub fn score_all(ws: &Workspace, cfg: &RunConfig) -> Result<Vec<MetricResult>> {
    let kinds = cfg.metric_kinds()?;
    let multis = multi_references(ws, &cfg.multi_refs)?;
    let mut refsets: Vec<References> = ws.references().iter().map(References::Single).collect();
    refsets.extend(multis.iter().map(References::Multi));
    if ws.systems().is_empty() {
        bail!("no systems to score");
    }
    if refsets.is_empty() {
        bail!("no reference sets given");
    }
    let skipped: Vec<_> = kinds.iter().filter(|k| **k != MetricKind::Bleu).collect();
    if !multis.is_empty() && !skipped.is_empty() {
        eprintln!("note: multi-reference bundles are scored with BLEU only");
    }
    let mut triples = Vec::new();
    for sys in ws.systems() {
        for refs in &refsets {
            for &kind in &kinds {
                if matches!(refs, References::Multi(_)) && kind != MetricKind::Bleu {
                    continue;
                }
                triples.push((sys, *refs, kind));
            }
        }
    }
    let mut results = triples
        .into_par_iter()
        .map(|(sys, refs, kind)| {
            score_system(sys, refs, kind, &cfg.params).map_err(|e| {
                anyhow!(
                    "scoring {} against {} with {kind}: {e}",
                    sys.system_name,
                    refs.name()
                )
            })
        })
        .collect::<Result<Vec<_>>>()?;
    results.sort_by(|a, b| {
        (&a.system, &a.reference, a.metric_name.to_lowercase()).cmp(&(
            &b.system,
            &b.reference,
            b.metric_name.to_lowercase(),
        ))
    });
    Ok(results)
}

/// Scores as shown in tables: TER in percent like the other metrics.
fn display_score(r: &MetricResult) -> f64 {
    match r.metric_name.as_str() {
        "TER" | "1-TER" => 100.0 * r.score,
        _ => r.score,
    }
}

pub fn score(cfg: &RunConfig) -> Result<()> {
    let ws = prepare(cfg)?;
    // TER is listed both as is and as 1-TER, so every metric can also be
    // read as higher-is-better.
    let mut results = Vec::new();
    for r in score_all(&ws, cfg)? {
        let complement = (r.metric_name == "TER").then(|| ter_complement(&r));
        results.push(r);
        results.extend(complement);
    }
    let mut table = Table::new(vec!["system", "refset", "metric", "score", "signature"]);
    for r in &results {
        table.push(vec![
            r.system.clone().unwrap_or_default().into(),
            r.reference.clone().unwrap_or_default().into(),
            r.metric_name.clone().into(),
            Cell::Num(display_score(r), 1),
            r.signature.clone().into(),
        ]);
    }
    let contents = match cfg.format {
        Format::Json => table.render_json_with(cfg, "details", json!(results)),
        f => table.render(cfg, f),
    };
    emit(
        cfg,
        &[Artifact::new(
            format!("scores.{}", cfg.format.extension()),
            contents,
        )],
    )
}

pub fn correlate(cfg: &RunConfig) -> Result<()> {
    let ws = prepare(cfg)?;
    let human = ws
        .human_scores()
        .ok_or_else(|| anyhow!("correlate needs human scores (--human)"))?;
    let mut groups: BTreeMap<(String, String), Vec<MetricResult>> = BTreeMap::new();
    if !ws.systems().is_empty() && !ws.references().is_empty() {
        for r in score_all(&ws, cfg)? {
            let key = (
                r.metric_name.clone(),
                r.reference.clone().unwrap_or_default(),
            );
            groups.entry(key).or_default().push(r);
        }
    }
    let mut series: BTreeMap<(String, String), SystemScores> = BTreeMap::new();
    for (key, results) in groups {
        series.insert(key, SystemScores::from_results(&results)?);
    }
    for ext in ws.external_scores() {
        let s = SystemScores::from_external(ext);
        let key = (
            s.metric.clone(),
            s.reference.clone().unwrap_or_else(|| "-".into()),
        );
        if series.insert(key.clone(), s).is_some() {
            bail!("metric {} on {} given twice", key.0, key.1);
        }
    }
    if series.is_empty() {
        bail!("nothing to correlate: give systems and references, or external scores");
    }

    let mut table = Table::new(vec!["metric", "refset", "rho", "tau", "n"]);
    let mut agreement = Table::new(vec!["metric", "refset", "agrees"]);
    let mut artifacts = Vec::new();
    for ((metric, refset), s) in &series {
        let c = correlate_systems(s, human).map_err(|e| anyhow!("{metric} on {refset}: {e}"))?;
        table.push(vec![
            metric.as_str().into(),
            refset.as_str().into(),
            Cell::Num(c.rho, 4),
            Cell::Num(c.tau, 4),
            Cell::Int(c.n_systems as u64),
        ]);
        agreement.push(vec![
            metric.as_str().into(),
            refset.as_str().into(),
            Cell::Bool(systems_ranking_agreement(s, human)?),
        ]);
        if let Some(k_min) = cfg.topk {
            let curve =
                topk_curve(s, human, k_min).map_err(|e| anyhow!("{metric} on {refset}: {e}"))?;
            if curve.human_ties_broken_by_name {
                eprintln!("note: equal human scores ordered by system name for the top-k curve");
            }
            let mut csv = format!("# config: {}\n", cfg.canonical_json());
            csv.push_str(&curve.to_csv());
            artifacts.push(Artifact::new(
                format!("topk_{}_{}.csv", file_safe(metric), file_safe(refset)),
                csv,
            ));
        }
    }
    let ext = cfg.format.extension();
    artifacts.insert(
        0,
        Artifact::new(format!("correlations.{ext}"), table.render(cfg, cfg.format)),
    );
    artifacts.insert(
        1,
        Artifact::new(
            format!("agreement.{ext}"),
            agreement.render(cfg, cfg.format),
        ),
    );
    emit(cfg, &artifacts)
}

fn member_names(cfg: &RunConfig) -> Vec<String> {
    cfg.members
        .iter()
        .flat_map(|m| m.split(','))
        .map(str::trim)
        .filter(|m| !m.is_empty())
        .map(String::from)
        .collect()
}

pub fn compose(cfg: &RunConfig) -> Result<()> {
    let ws = prepare(cfg)?;
    let ratings = ws
        .ratings()
        .ok_or_else(|| anyhow!("compose-hq needs adequacy ratings (--ratings)"))?;
    let names = member_names(cfg);
    let members: Vec<&ReferenceSet> = if names.is_empty() {
        ws.references().iter().collect()
    } else {
        names
            .iter()
            .map(|n| reference(&ws, n))
            .collect::<Result<_>>()?
    };
    let (mut composed, trace) = compose_hq(&members, ratings)?;
    if let Some(name) = &cfg.name {
        composed.name = name.clone();
    }
    let stem = file_safe(&composed.name);

    let mut choices = Table::new(vec!["segment", "chosen", "rating", "runner_up", "tie"]);
    for c in &trace.choices {
        choices.push(vec![
            Cell::Int(c.segment as u64),
            c.chosen.as_str().into(),
            Cell::Num(c.rating, 2),
            c.runner_up
                .map_or(Cell::Text("-".into()), |r| Cell::Num(r, 2)),
            Cell::Bool(c.tie),
        ]);
    }
    let averaged = average_segment_ratings(ratings);
    let mut summary = Table::new(vec!["refset", "mean_rating", "chosen_segments"]);
    for m in &members {
        let chosen = trace.choices.iter().filter(|c| c.chosen == m.name).count();
        summary.push(vec![
            m.name.as_str().into(),
            Cell::Num(set_mean_rating(&averaged, &m.name)?, 2),
            Cell::Int(chosen as u64),
        ]);
    }
    summary.push(vec![
        composed.name.as_str().into(),
        Cell::Num(trace.mean_rating(), 2),
        Cell::Int(trace.choices.len() as u64),
    ]);
    let ext = cfg.format.extension();
    emit(
        cfg,
        &[
            Artifact::new(
                format!("{stem}.txt"),
                lines_to_string(&composed.translations),
            ),
            Artifact::new(
                format!("{stem}.trace.{ext}"),
                choices.render(cfg, cfg.format),
            ),
            Artifact::new(
                format!("{stem}.summary.{ext}"),
                summary.render(cfg, cfg.format),
            ),
        ],
    )
}

fn tokenized(lines: &[String], cfg: &RunConfig) -> Vec<TokenSeq> {
    lines
        .par_iter()
        .map(|l| tokenize_intl(&apply_casing(l, cfg.params.casing)))
        .collect()
}

pub fn ngram_report(cfg: &RunConfig) -> Result<()> {
    let ws = prepare(cfg)?;
    let system_name = cfg
        .system
        .as_deref()
        .ok_or_else(|| anyhow!("ngram-report needs --system"))?;
    let reference_name = cfg
        .reference
        .as_deref()
        .ok_or_else(|| anyhow!("ngram-report needs --reference"))?;
    let system = ws
        .system(system_name)
        .ok_or_else(|| anyhow!("unknown system {system_name:?}"))?;
    let refs = reference(&ws, reference_name)?;
    let hyps = tokenized(&system.hypotheses, cfg);
    let refs_tok = tokenized(&refs.translations, cfg);
    let report = matched_ngram_report(&hyps, &refs_tok, cfg.order, cfg.top)?;
    if report.order_exceeds_segments {
        eprintln!(
            "warning: no segment has {} tokens; the report is empty",
            cfg.order
        );
    }
    let mut table = Table::new(vec!["rank", "ngram", "count"]);
    for (i, row) in report.rows.iter().enumerate() {
        table.push(vec![
            Cell::Int(i as u64 + 1),
            row.ngram.join(" ").into(),
            Cell::Int(row.count),
        ]);
    }
    let name = format!(
        "ngrams_{}_{}_n{}.{}",
        file_safe(system_name),
        file_safe(reference_name),
        cfg.order,
        cfg.format.extension()
    );
    emit(cfg, &[Artifact::new(name, table.render(cfg, cfg.format))])
}

pub fn monotonicity_cmd(cfg: &RunConfig) -> Result<()> {
    let ws = prepare(cfg)?;
    if ws.alignments().is_empty() {
        bail!("monotonicity needs at least one --alignments name=path");
    }
    let mut table = Table::new(vec!["alignment", "mean_abs_distance", "links"]);
    for a in ws.alignments() {
        let m = monotonicity(a)?;
        table.push(vec![
            a.name.as_str().into(),
            Cell::Num(m.mean_abs_distance, 2),
            Cell::Int(m.link_count),
        ]);
    }
    emit(
        cfg,
        &[Artifact::new(
            format!("monotonicity.{}", cfg.format.extension()),
            table.render(cfg, cfg.format),
        )],
    )
}

/// Prints the validation report. Returns whether the workspace is usable.
pub fn validate(cfg: &RunConfig) -> Result<bool> {
    let ws = crate::workspace::load_workspace(cfg)?;
    let report = validate_workspace(&ws);
    if cfg.out.is_some() {
        let mut table = Table::new(vec!["severity", "artifact", "file", "line", "issue"]);
        for i in &report.issues {
            table.push(vec![
                format!("{:?}", i.severity).to_lowercase().into(),
                i.artifact.as_str().into(),
                i.file
                    .as_ref()
                    .map(|f| f.display().to_string())
                    .unwrap_or_default()
                    .into(),
                i.line
                    .map_or(Cell::Text(String::new()), |l| Cell::Int(l as u64)),
                i.kind.to_string().into(),
            ]);
        }
        emit(
            cfg,
            &[Artifact::new(
                format!("validation.{}", cfg.format.extension()),
                table.render(cfg, cfg.format),
            )],
        )?;
    }
    print!("{}", report_text(&report));
    let errors = report.errors().count();
    let warnings = report.warnings().count();
    match report.segment_count {
        Some(n) => println!("{n} segments, {errors} errors, {warnings} warnings"),
        None => println!("{errors} errors, {warnings} warnings"),
    }
    Ok(report.is_ok())
}
