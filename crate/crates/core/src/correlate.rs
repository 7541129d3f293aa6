//! System-level rank correlation between metric and human scores.
//!
//! Kendall's tau uses the tie-corrected tau-b form and Spearman's rho the
//! Pearson correlation of fractional ranks, the same conventions as
//! `scipy.stats`. Lower-is-better metrics are negated before correlating.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::corpus::{ExternalMetricScores, HumanSystemScores, Orientation};
use crate::metrics::MetricResult;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CorrelationError {
    #[error("vectors have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least 2 values, got {0}")]
    TooShort(usize),
    #[error("{0} vector is constant; correlation is undefined")]
    Constant(&'static str),
    #[error("non-finite value in {0} vector")]
    NonFinite(&'static str),
    #[error("only {0} systems have both metric and human scores")]
    TooFewSystems(usize),
    #[error("top-k minimum must be at least 3, got {0}")]
    KMinTooSmall(usize),
    #[error("top-k minimum {k_min} exceeds the {n} available systems")]
    KMinExceedsN { k_min: usize, n: usize },
    #[error("metric results mix {0} and {1}")]
    MixedMetrics(String, String),
    #[error("metric result without a system name")]
    UnnamedSystem,
    #[error("system {0} scored twice")]
    DuplicateSystem(String),
}

fn check(x: &[f64], y: &[f64]) -> Result<(), CorrelationError> {
    if x.len() != y.len() {
        return Err(CorrelationError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(CorrelationError::TooShort(x.len()));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(CorrelationError::NonFinite("x"));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(CorrelationError::NonFinite("y"));
    }
    if x.iter().all(|&v| v == x[0]) {
        return Err(CorrelationError::Constant("x"));
    }
    if y.iter().all(|&v| v == y[0]) {
        return Err(CorrelationError::Constant("y"));
    }
    Ok(())
}

/// Kendall's tau-b by enumerating all pairs:
/// `(P - Q) / sqrt((P + Q + Tx) * (P + Q + Ty))`, where pairs tied in both
/// vectors count in none of the terms.
pub fn kendall_tau_b(x: &[f64], y: &[f64]) -> Result<f64, CorrelationError> {
    check(x, y)?;
    let (mut concordant, mut discordant, mut tied_x, mut tied_y) = (0u64, 0u64, 0u64, 0u64);
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            let dx = x[i].partial_cmp(&x[j]).unwrap_or(Ordering::Equal);
            let dy = y[i].partial_cmp(&y[j]).unwrap_or(Ordering::Equal);
            match (dx, dy) {
                (Ordering::Equal, Ordering::Equal) => {}
                (Ordering::Equal, _) => tied_x += 1,
                (_, Ordering::Equal) => tied_y += 1,
                (a, b) if a == b => concordant += 1,
                _ => discordant += 1,
            }
        }
    }
    let num = concordant as f64 - discordant as f64;
    let den = ((concordant + discordant + tied_x) as f64
        * (concordant + discordant + tied_y) as f64)
        .sqrt();
    Ok((num / den).clamp(-1.0, 1.0))
}

/// 1-based ranks; tied values share the mean of their positions.
pub fn fractional_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap_or(Ordering::Equal));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = rank;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0)
}

pub fn spearman_rho(x: &[f64], y: &[f64]) -> Result<f64, CorrelationError> {
    check(x, y)?;
    Ok(pearson(&fractional_ranks(x), &fractional_ranks(y)))
}

/// System-level scores of one metric against one reference.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemScores {
    pub metric: String,
    pub reference: Option<String>,
    pub orientation: Orientation,
    pub scores: BTreeMap<String, f64>,
}

impl SystemScores {
    /// Collects per-system results of a single metric.
    pub fn from_results(results: &[MetricResult]) -> Result<Self, CorrelationError> {
        let first = results.first().ok_or(CorrelationError::TooFewSystems(0))?;
        let mut scores = BTreeMap::new();
        for r in results {
            if r.metric_name != first.metric_name || r.reference != first.reference {
                return Err(CorrelationError::MixedMetrics(
                    format!("{}@{:?}", first.metric_name, first.reference),
                    format!("{}@{:?}", r.metric_name, r.reference),
                ));
            }
            let system = r.system.clone().ok_or(CorrelationError::UnnamedSystem)?;
            if scores.insert(system.clone(), r.score).is_some() {
                return Err(CorrelationError::DuplicateSystem(system));
            }
        }
        Ok(Self {
            metric: first.metric_name.clone(),
            reference: first.reference.clone(),
            orientation: first.orientation,
            scores,
        })
    }

    pub fn from_external(ext: &ExternalMetricScores) -> Self {
        let (metric, reference) = ext.metric_and_reference();
        Self {
            metric: metric.to_string(),
            reference: reference.map(String::from),
            orientation: ext.orientation,
            scores: ext.scores.clone(),
        }
    }

    /// (system, orientation-adjusted metric, human) for systems in both maps.
    fn paired(&self, human: &HumanSystemScores) -> Vec<(String, f64, f64)> {
        self.scores
            .iter()
            .filter_map(|(name, &m)| {
                human
                    .scores
                    .get(name)
                    .map(|&h| (name.clone(), self.orientation.adjust(m), h))
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorrelationResult {
    pub rho: f64,
    pub tau: f64,
    pub n_systems: usize,
}

impl CorrelationResult {
    /// `metric<TAB>refset<TAB>rho<TAB>tau<TAB>n` with four decimals.
    pub fn tsv_row(&self, metric: &str, reference: &str) -> String {
        format!(
            "{metric}\t{reference}\t{:.4}\t{:.4}\t{}\n",
            self.rho, self.tau, self.n_systems
        )
    }
}

/// Correlates metric and human scores over the systems present in both.
pub fn correlate_systems(
    metric: &SystemScores,
    human: &HumanSystemScores,
) -> Result<CorrelationResult, CorrelationError> {
    let pairs = metric.paired(human);
    if pairs.len() < 2 {
        return Err(CorrelationError::TooFewSystems(pairs.len()));
    }
    let m: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let h: Vec<f64> = pairs.iter().map(|p| p.2).collect();
    Ok(CorrelationResult {
        rho: spearman_rho(&m, &h)?,
        tau: kendall_tau_b(&m, &h)?,
        n_systems: pairs.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TopKCurve {
    /// `(k, tau)` with k descending.
    pub points: Vec<(usize, f64)>,
    /// Systems by human score, best first.
    pub ranking: Vec<String>,
    /// Whether equal human scores had to be ordered by system name.
    pub human_ties_broken_by_name: bool,
}

impl TopKCurve {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,tau\n");
        for (k, tau) in &self.points {
            out.push_str(&format!("{k},{tau:.4}\n"));
        }
        out
    }
}

/// Kendall's tau over the best `k` systems by human score, for every k from
/// the number of systems down to `k_min`. Equal human scores are ordered by
/// system name.
pub fn topk_curve(
    metric: &SystemScores,
    human: &HumanSystemScores,
    k_min: usize,
) -> Result<TopKCurve, CorrelationError> {
    if k_min < 3 {
        return Err(CorrelationError::KMinTooSmall(k_min));
    }
    let mut pairs = metric.paired(human);
    let n = pairs.len();
    if k_min > n {
        return Err(CorrelationError::KMinExceedsN { k_min, n });
    }
    pairs.sort_by(|a, b| {
        b.2.partial_cmp(&a.2)
            .unwrap_or(Ordering::Equal)
            .then_with(|| a.0.cmp(&b.0))
    });
    let ties = pairs.windows(2).any(|w| w[0].2 == w[1].2);
    let mut points = Vec::with_capacity(n - k_min + 1);
    for k in (k_min..=n).rev() {
        let m: Vec<f64> = pairs[..k].iter().map(|p| p.1).collect();
        let h: Vec<f64> = pairs[..k].iter().map(|p| p.2).collect();
        points.push((k, kendall_tau_b(&m, &h)?));
    }
    Ok(TopKCurve {
        points,
        ranking: pairs.into_iter().map(|p| p.0).collect(),
        human_ties_broken_by_name: ties,
    })
}

/// True iff both vectors induce the same strict ordering. Any tie on either
/// side makes the orderings disagree.
pub fn ranking_agreement(metric: &[f64], human: &[f64]) -> Result<bool, CorrelationError> {
    if metric.len() != human.len() {
        return Err(CorrelationError::LengthMismatch(metric.len(), human.len()));
    }
    if metric.len() < 2 {
        return Err(CorrelationError::TooShort(metric.len()));
    }
    for i in 0..metric.len() {
        for j in i + 1..metric.len() {
            let dm = metric[i].partial_cmp(&metric[j]);
            let dh = human[i].partial_cmp(&human[j]);
            match (dm, dh) {
                (Some(a), Some(b)) if a == b && a != Ordering::Equal => {}
                _ => return Ok(false),
            }
        }
    }
    Ok(true)
}

/// [`ranking_agreement`] over the systems shared with the human scores,
/// after orientation adjustment.
pub fn systems_ranking_agreement(
    metric: &SystemScores,
    human: &HumanSystemScores,
) -> Result<bool, CorrelationError> {
    let pairs = metric.paired(human);
    if pairs.len() < 2 {
        return Err(CorrelationError::TooFewSystems(pairs.len()));
    }
    let m: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let h: Vec<f64> = pairs.iter().map(|p| p.2).collect();
    ranking_agreement(&m, &h)
}
