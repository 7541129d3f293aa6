//! Derived reference sets: best-rated composition and multi-reference bundles.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::corpus::{AdequacyRatings, MultiReference, ReferenceKind, ReferenceSet};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RefsetError {
    #[error("at least {min} member reference sets required, got {got}")]
    TooFewMembers { min: usize, got: usize },
    #[error("member {name} has {got} segments, expected {expected}")]
    LengthMismatch {
        name: String,
        expected: usize,
        got: usize,
    },
    #[error("no rating for segment {segment} of {reference}")]
    MissingRating { segment: usize, reference: String },
    #[error("no ratings for reference set {0}")]
    UnratedSet(String),
}

/// Mean rating per `(segment, reference set)` over all raters.
pub fn average_segment_ratings(ratings: &AdequacyRatings) -> BTreeMap<(usize, String), f64> {
    let mut sums: BTreeMap<(usize, String), (f64, usize)> = BTreeMap::new();
    for (key, rating) in ratings.entries() {
        let slot = sums
            .entry((key.segment, key.reference.clone()))
            .or_insert((0.0, 0));
        slot.0 += rating;
        slot.1 += 1;
    }
    sums.into_iter()
        .map(|(k, (sum, count))| (k, sum / count as f64))
        .collect()
}

/// Mean of the per-segment averages of one reference set.
pub fn set_mean_rating(
    averaged: &BTreeMap<(usize, String), f64>,
    reference: &str,
) -> Result<f64, RefsetError> {
    let values: Vec<f64> = averaged
        .iter()
        .filter(|((_, name), _)| name == reference)
        .map(|(_, &v)| v)
        .collect();
    if values.is_empty() {
        return Err(RefsetError::UnratedSet(reference.to_string()));
    }
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompositionChoice {
    pub segment: usize,
    pub chosen: String,
    pub rating: f64,
    /// Best rating among the other members; `None` with a single member.
    pub runner_up: Option<f64>,
    /// Another member reached the same rating and lost on member order.
    pub tie: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CompositionTrace {
    pub choices: Vec<CompositionChoice>,
}

impl CompositionTrace {
    /// Mean human rating of the composed set.
    pub fn mean_rating(&self) -> f64 {
        if self.choices.is_empty() {
            return 0.0;
        }
        self.choices.iter().map(|c| c.rating).sum::<f64>() / self.choices.len() as f64
    }

    /// `segment<TAB>chosen_set<TAB>rating<TAB>tie` rows.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for c in &self.choices {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\n",
                c.segment, c.chosen, c.rating, c.tie
            ));
        }
        out
    }
}

/// `HQ(<m1>,<m2>,...)`.
pub fn hq_name(members: &[&ReferenceSet]) -> String {
    let names: Vec<&str> = members.iter().map(|m| m.name.as_str()).collect();
    format!("HQ({})", names.join(","))
}

fn check_lengths(members: &[&ReferenceSet]) -> Result<usize, RefsetError> {
    let expected = members[0].len();
    for m in members {
        if m.len() != expected {
            return Err(RefsetError::LengthMismatch {
                name: m.name.clone(),
                expected,
                got: m.len(),
            });
        }
    }
    Ok(expected)
}

/// Picks, per segment, the member with the highest averaged rating. Earlier
/// members win ties.
pub fn compose_hq(
    members: &[&ReferenceSet],
    ratings: &AdequacyRatings,
) -> Result<(ReferenceSet, CompositionTrace), RefsetError> {
    if members.is_empty() {
        return Err(RefsetError::TooFewMembers { min: 1, got: 0 });
    }
    let n = check_lengths(members)?;
    let averaged = average_segment_ratings(ratings);
    let mut translations = Vec::with_capacity(n);
    let mut trace = CompositionTrace::default();
    for segment in 0..n {
        let mut scored = Vec::with_capacity(members.len());
        for m in members {
            let rating = averaged
                .get(&(segment, m.name.clone()))
                .copied()
                .ok_or_else(|| RefsetError::MissingRating {
                    segment,
                    reference: m.name.clone(),
                })?;
            scored.push(rating);
        }
        let mut best = 0;
        for (i, &rating) in scored.iter().enumerate().skip(1) {
            if rating > scored[best] {
                best = i;
            }
        }
        let others = scored
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != best)
            .map(|(_, &r)| r);
        let runner_up = others.clone().reduce(f64::max);
        let tie = others.clone().any(|r| r == scored[best]);
        translations.push(members[best].translations[segment].clone());
        trace.choices.push(CompositionChoice {
            segment,
            chosen: members[best].name.clone(),
            rating: scored[best],
            runner_up,
            tie,
        });
    }
    Ok((
        ReferenceSet::new(hq_name(members), ReferenceKind::Composed, translations),
        trace,
    ))
}

/// Bundles two or more reference sets per segment, in member order.
pub fn assemble_multi(members: &[&ReferenceSet]) -> Result<MultiReference, RefsetError> {
    if members.len() < 2 {
        return Err(RefsetError::TooFewMembers {
            min: 2,
            got: members.len(),
        });
    }
    let n = check_lengths(members)?;
    let per_segment = (0..n)
        .map(|i| members.iter().map(|m| m.translations[i].clone()).collect())
        .collect();
    Ok(MultiReference {
        member_names: members.iter().map(|m| m.name.clone()).collect(),
        per_segment,
    })
}
