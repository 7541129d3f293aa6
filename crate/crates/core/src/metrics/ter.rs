//! Translation edit rate with greedy block shifts.
//!
//! Each iteration looks at every block of the hypothesis (up to
//! `max_shift_len` tokens) that occurs verbatim in the reference and contains
//! at least one token not matched in the current alignment, tries every
//! destination, and applies the move that lowers the word-level Levenshtein
//! distance the most. Ties go to the longer block, then the leftmost origin,
//! then the leftmost destination. Every applied shift costs one edit.

use std::collections::HashMap;

use serde::Serialize;

use super::{MetricDetail, MetricError, MetricResult, Signature};
use crate::corpus::Orientation;
use crate::tokenize::Casing;

pub const DEFAULT_MAX_SHIFT_LEN: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TerConfig {
    pub casing: Casing,
    pub max_shift_len: usize,
}

impl Default for TerConfig {
    fn default() -> Self {
        Self {
            casing: Casing::Mixed,
            max_shift_len: DEFAULT_MAX_SHIFT_LEN,
        }
    }
}

impl TerConfig {
    pub fn signature(&self) -> Signature {
        Signature {
            metric: format!("TER.shift{}", self.max_shift_len),
            casing: self.casing,
            num_refs: 1,
            smooth: "none",
            tokenizer: "intl",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct TerSegment {
    /// Shifts plus the final Levenshtein distance.
    pub edits: u64,
    pub ref_len: u64,
    pub shifts: u64,
}

/// Edit count of one hypothesis against a non-empty reference.
pub fn ter_segment(
    hyp: &[String],
    reference: &[String],
    max_shift_len: usize,
) -> Result<TerSegment, MetricError> {
    if reference.is_empty() {
        return Err(MetricError::EmptyReferences);
    }
    // Integer ids make comparisons cheap in the inner loops.
    let mut vocab: HashMap<&str, u32> = HashMap::new();
    let mut ids = Vec::with_capacity(reference.len() + hyp.len());
    for t in reference.iter().chain(hyp) {
        let next = vocab.len() as u32;
        ids.push(*vocab.entry(t.as_str()).or_insert(next));
    }
    let mut h = ids.split_off(reference.len());
    let r = ids;

    let mut shifts = 0u64;
    let mut scratch = Scratch::default();
    loop {
        let (dist, aligned) = align(&h, &r);
        if dist == 0 {
            return Ok(TerSegment {
                edits: shifts,
                ref_len: r.len() as u64,
                shifts,
            });
        }
        match best_shift(&h, &r, &aligned, dist, max_shift_len, &mut scratch) {
            Some(shift) => {
                h = shift.apply(&h);
                shifts += 1;
            }
            None => {
                return Ok(TerSegment {
                    edits: shifts + u64::from(dist),
                    ref_len: r.len() as u64,
                    shifts,
                })
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Shift {
    start: usize,
    len: usize,
    /// Insertion point in the hypothesis with the block removed.
    dest: usize,
    new_dist: u32,
}

impl Shift {
    fn apply(&self, h: &[u32]) -> Vec<u32> {
        let block = &h[self.start..self.start + self.len];
        let mut rest: Vec<u32> = h[..self.start].to_vec();
        rest.extend_from_slice(&h[self.start + self.len..]);
        let mut out = rest[..self.dest].to_vec();
        out.extend_from_slice(block);
        out.extend_from_slice(&rest[self.dest..]);
        out
    }

    /// Larger reduction, then longer block, then leftmost start, then
    /// leftmost destination.
    fn beats(&self, other: &Shift) -> bool {
        use std::cmp::Reverse;
        (self.new_dist, Reverse(self.len), self.start, self.dest)
            < (other.new_dist, Reverse(other.len), other.start, other.dest)
    }
}

/// Levenshtein distance plus, for each hypothesis token, whether it is an
/// exact match on the canonical alignment path. The path is traced back from
/// the end preferring diagonal steps, then hypothesis deletions, then
/// reference insertions.
fn align(h: &[u32], r: &[u32]) -> (u32, Vec<bool>) {
    let cols = r.len() + 1;
    let mut d = vec![0u32; (h.len() + 1) * cols];
    for (j, cell) in d.iter_mut().enumerate().take(cols) {
        *cell = j as u32;
    }
    for i in 1..=h.len() {
        d[i * cols] = i as u32;
        for j in 1..cols {
            let sub = d[(i - 1) * cols + j - 1] + u32::from(h[i - 1] != r[j - 1]);
            let del = d[(i - 1) * cols + j] + 1;
            let ins = d[i * cols + j - 1] + 1;
            d[i * cols + j] = sub.min(del).min(ins);
        }
    }
    let mut aligned = vec![false; h.len()];
    let (mut i, mut j) = (h.len(), r.len());
    while i > 0 || j > 0 {
        let here = d[i * cols + j];
        if i > 0 && j > 0 {
            let cost = u32::from(h[i - 1] != r[j - 1]);
            if here == d[(i - 1) * cols + j - 1] + cost {
                aligned[i - 1] = cost == 0;
                i -= 1;
                j -= 1;
                continue;
            }
        }
        if i > 0 && here == d[(i - 1) * cols + j] + 1 {
            i -= 1;
        } else {
            j -= 1;
        }
    }
    (d[h.len() * cols + r.len()], aligned)
}

#[derive(Default)]
struct Scratch {
    /// Forward rows of the hypothesis: `lev(h[..p], r[..j])`.
    fh: Vec<u32>,
    /// Backward rows of the hypothesis: `lev(h[p..], r[j..])`.
    bh: Vec<u32>,
    /// Forward rows of `h[..dest]` extended by the current block, for every
    /// `dest < start`.
    ext: Vec<u32>,
    /// Backward rows of the hypothesis without the block, for `p < start`.
    back: Vec<u32>,
    /// Forward rows of the hypothesis without the block, for `p >= start`.
    fwd: Vec<u32>,
    row: Vec<u32>,
    next: Vec<u32>,
}

fn step_forward(prev: &[u32], t: u32, r: &[u32], out: &mut [u32]) {
    out[0] = prev[0] + 1;
    for j in 1..out.len() {
        out[j] = (prev[j] + 1)
            .min(out[j - 1] + 1)
            .min(prev[j - 1] + u32::from(t != r[j - 1]));
    }
}

fn step_backward(next: &[u32], t: u32, r: &[u32], out: &mut [u32]) {
    let m = r.len();
    out[m] = next[m] + 1;
    for j in (0..m).rev() {
        out[j] = (next[j] + 1)
            .min(out[j + 1] + 1)
            .min(next[j + 1] + u32::from(t != r[j]));
    }
}

fn joined_min(forward: &[u32], backward: &[u32]) -> u32 {
    forward
        .iter()
        .zip(backward)
        .map(|(a, b)| a + b)
        .min()
        .unwrap_or(u32::MAX)
}

/// Finds the best distance-reducing shift, if any.
///
/// Moving block `h[start..start+len]` to `dest` in the remainder `rest`
/// gives distance `min_j F[j] + B[j]`, where `F` is the forward row of
/// `rest[..dest]` extended by the block and `B` the backward row of
/// `rest[dest..]`. Rows of `rest` on the near side of the block are rows of
/// the hypothesis itself, and the rows that involve the block are built
/// incrementally, so each block and destination costs O(1) new rows.
fn best_shift(
    h: &[u32],
    r: &[u32],
    aligned: &[bool],
    dist: u32,
    max_shift_len: usize,
    s: &mut Scratch,
) -> Option<Shift> {
    let n = h.len();
    let m = r.len();
    let cols = m + 1;
    s.fh.clear();
    s.fh.resize((n + 1) * cols, 0);
    s.bh.clear();
    s.bh.resize((n + 1) * cols, 0);
    for j in 0..cols {
        s.fh[j] = j as u32;
        s.bh[n * cols + j] = (m - j) as u32;
    }
    for p in 1..=n {
        let (prev, cur) = s.fh.split_at_mut(p * cols);
        step_forward(&prev[(p - 1) * cols..], h[p - 1], r, &mut cur[..cols]);
    }
    for p in (0..n).rev() {
        let (cur, next) = s.bh.split_at_mut((p + 1) * cols);
        step_backward(&next[..cols], h[p], r, &mut cur[p * cols..]);
    }
    s.row.resize(cols, 0);
    s.next.resize(cols, 0);

    // reach[p]: length of the longest h[p..] prefix that occurs in the
    // reference, capped at the shift limit. Substrings of an occurring
    // block occur too, so h[p..q] occurs iff q - p <= reach[p].
    let mut common = vec![0usize; m + 1];
    let mut reach = vec![0usize; n];
    for p in (0..n).rev() {
        let mut best_len = 0;
        for j in 0..m {
            common[j] = if h[p] == r[j] { common[j + 1] + 1 } else { 0 };
            best_len = best_len.max(common[j]);
        }
        reach[p] = best_len.min(max_shift_len);
    }

    let mut best: Option<Shift> = None;
    let consider = |cand: Shift, best: &mut Option<Shift>| {
        if cand.new_dist < dist && best.is_none_or(|b| cand.beats(&b)) {
            *best = Some(cand);
        }
    };
    for start in 0..n {
        let max_len = reach[start];
        if aligned[start..start + max_len].iter().all(|&x| x) {
            continue;
        }
        s.ext.clear();
        s.ext.extend_from_slice(&s.fh[..start * cols]);
        for len in 1..=max_len {
            let t = h[start + len - 1];
            for dest in 0..start {
                s.row
                    .copy_from_slice(&s.ext[dest * cols..(dest + 1) * cols]);
                step_forward(&s.row, t, r, &mut s.ext[dest * cols..(dest + 1) * cols]);
            }
            if aligned[start..start + len].iter().all(|&a| a) {
                continue;
            }

            // rest[p..] for p < start is h[p..start] followed by h[start+len..].
            s.back.clear();
            s.back.resize((start + 1) * cols, 0);
            s.back[start * cols..]
                .copy_from_slice(&s.bh[(start + len) * cols..(start + len + 1) * cols]);
            for p in (0..start).rev() {
                let (cur, next) = s.back.split_at_mut((p + 1) * cols);
                step_backward(&next[..cols], h[p], r, &mut cur[p * cols..]);
            }
            for dest in 0..start {
                let new_dist = joined_min(
                    &s.ext[dest * cols..(dest + 1) * cols],
                    &s.back[dest * cols..(dest + 1) * cols],
                );
                consider(
                    Shift {
                        start,
                        len,
                        dest,
                        new_dist,
                    },
                    &mut best,
                );
            }
        }
    }

    // Destinations right of the block, grouped by the block end `a`. The
    // result is h[..start] + h[a..e] + h[start..a] + h[e..] for some e > a.
    // For fixed `a` and `e`, the backward row of h[start..a] + h[e..] grows
    // by one token per step of `start` to the left.
    for a in 1..n {
        let lo = a.saturating_sub(max_shift_len);
        let mut min_start = a;
        while min_start > lo && reach[min_start - 1] >= a - (min_start - 1) {
            min_start -= 1;
        }
        // Blocks ending at `a` need a misaligned token, so they start at or
        // before the last one.
        let Some(last) = (min_start..a).rev().find(|&p| !aligned[p]) else {
            continue;
        };
        let span = n - a;
        let width = (span + 1) * cols;
        // fwd[(start - min_start) * width + (e - a) * cols ..] is the
        // forward row of h[..start] + h[a..e].
        s.fwd.clear();
        s.fwd.resize((last + 1 - min_start) * width, 0);
        for start in min_start..=last {
            let base = (start - min_start) * width;
            s.fwd[base..base + cols].copy_from_slice(&s.fh[start * cols..(start + 1) * cols]);
            for q in 1..=span {
                let (prev, cur) = s.fwd.split_at_mut(base + q * cols);
                step_forward(
                    &prev[base + (q - 1) * cols..],
                    h[a + q - 1],
                    r,
                    &mut cur[..cols],
                );
            }
        }
        for e in a + 1..=n {
            s.row.copy_from_slice(&s.bh[e * cols..(e + 1) * cols]);
            for start in (min_start..a).rev() {
                step_backward(&s.row, h[start], r, &mut s.next);
                std::mem::swap(&mut s.row, &mut s.next);
                if start > last {
                    continue;
                }
                let f = (start - min_start) * width + (e - a) * cols;
                let len = a - start;
                let new_dist = joined_min(&s.fwd[f..f + cols], &s.row);
                consider(
                    Shift {
                        start,
                        len,
                        dest: e - len,
                        new_dist,
                    },
                    &mut best,
                );
            }
        }
    }
    best
}

/// Corpus TER: total edits over total reference length. Lower is better.
pub fn ter_corpus(
    segments: &[TerSegment],
    config: &TerConfig,
) -> Result<MetricResult, MetricError> {
    if segments.is_empty() {
        return Err(MetricError::NoSegments);
    }
    let edits: u64 = segments.iter().map(|s| s.edits).sum();
    let ref_len: u64 = segments.iter().map(|s| s.ref_len).sum();
    let shifts: u64 = segments.iter().map(|s| s.shifts).sum();
    if ref_len == 0 {
        return Err(MetricError::EmptyReferences);
    }
    Ok(MetricResult {
        metric_name: "TER".into(),
        score: edits as f64 / ref_len as f64,
        orientation: Orientation::LowerBetter,
        signature: config.signature().to_string(),
        system: None,
        reference: None,
        detail: Some(MetricDetail::Ter {
            edits,
            ref_len,
            shifts,
        }),
    })
}

/// Re-expresses a TER result as `1 - TER` (higher is better).
pub fn ter_complement(result: &MetricResult) -> MetricResult {
    MetricResult {
        metric_name: "1-TER".into(),
        score: 1.0 - result.score,
        orientation: Orientation::HigherBetter,
        ..result.clone()
    }
}
