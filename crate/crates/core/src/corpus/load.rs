use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::path::Path;

use super::{
    AdequacyRatings, AlignmentSet, CorpusError, ExternalMetricScores, HumanSystemScores,
    Orientation, RatingInsertError,
};

/// Reads a line-aligned UTF-8 file.
///
/// LF and CRLF endings are accepted; the terminator is stripped and nothing
/// else is trimmed. A final line without a newline counts as a line.
pub fn load_lines(path: &Path) -> Result<Vec<String>, CorpusError> {
    let bytes = std::fs::read(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    if bytes.is_empty() {
        return Err(CorpusError::EmptyFile {
            path: path.to_path_buf(),
        });
    }
    let body = bytes.strip_suffix(b"\n").unwrap_or(&bytes);
    body.split(|&b| b == b'\n')
        .enumerate()
        .map(|(i, raw)| {
            let raw = raw.strip_suffix(b"\r").unwrap_or(raw);
            String::from_utf8(raw.to_vec()).map_err(|_| CorpusError::Encoding {
                path: path.to_path_buf(),
                line: i + 1,
            })
        })
        .collect()
}

/// Inverse of [`load_lines`]: one line per entry, LF-terminated.
pub fn lines_to_string(lines: &[String]) -> String {
    let mut out = String::with_capacity(lines.iter().map(|l| l.len() + 1).sum());
    for line in lines {
        out.push_str(line);
        out.push('\n');
    }
    out
}

fn columns<'a>(
    path: &Path,
    line_no: usize,
    line: &'a str,
    expected: usize,
    layout: &str,
) -> Result<Vec<&'a str>, CorpusError> {
    let cols: Vec<&str> = line.split('\t').collect();
    if cols.len() != expected {
        return Err(CorpusError::Malformed {
            path: path.to_path_buf(),
            line: line_no,
            reason: format!(
                "expected {expected} tab-separated columns ({layout}), found {}",
                cols.len()
            ),
        });
    }
    Ok(cols)
}

fn parse_index(path: &Path, line: usize, field: &str) -> Result<usize, CorpusError> {
    field.parse().map_err(|_| CorpusError::Malformed {
        path: path.to_path_buf(),
        line,
        reason: format!("invalid segment index {field:?}"),
    })
}

fn parse_score(path: &Path, line: usize, field: &str) -> Result<f64, CorpusError> {
    match field.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(CorpusError::Malformed {
            path: path.to_path_buf(),
            line,
            reason: format!("invalid number {field:?}"),
        }),
    }
}

fn non_empty(path: &Path, line: usize, field: &str, what: &str) -> Result<(), CorpusError> {
    if field.is_empty() {
        return Err(CorpusError::Malformed {
            path: path.to_path_buf(),
            line,
            reason: format!("empty {what}"),
        });
    }
    Ok(())
}

/// Loads `segment_index<TAB>refset_name<TAB>rater_id<TAB>rating` rows.
pub fn load_ratings(path: &Path) -> Result<AdequacyRatings, CorpusError> {
    let mut ratings = AdequacyRatings::new();
    for (i, line) in load_lines(path)?.iter().enumerate() {
        let line_no = i + 1;
        let cols = columns(path, line_no, line, 4, "segment, refset, rater, rating")?;
        let segment = parse_index(path, line_no, cols[0])?;
        non_empty(path, line_no, cols[1], "reference set name")?;
        non_empty(path, line_no, cols[2], "rater id")?;
        let value: f64 = cols[3].parse().map_err(|_| CorpusError::Malformed {
            path: path.to_path_buf(),
            line: line_no,
            reason: format!("invalid rating {:?}", cols[3]),
        })?;
        ratings
            .insert(segment, cols[1], cols[2], value)
            .map_err(|e| match e {
                RatingInsertError::OutOfRange(value) => CorpusError::OutOfRange {
                    path: path.to_path_buf(),
                    line: line_no,
                    value,
                },
                RatingInsertError::Duplicate(key) => CorpusError::Duplicate {
                    path: path.to_path_buf(),
                    line: line_no,
                    key: format!("({}, {}, {})", key.segment, key.reference, key.rater),
                },
            })?;
    }
    ratings.path = Some(path.to_path_buf());
    Ok(ratings)
}

/// Loads `system_name<TAB>score` rows.
pub fn load_human_scores(path: &Path, normalized: bool) -> Result<HumanSystemScores, CorpusError> {
    let mut scores = BTreeMap::new();
    for (i, line) in load_lines(path)?.iter().enumerate() {
        let line_no = i + 1;
        let cols = columns(path, line_no, line, 2, "system, score")?;
        non_empty(path, line_no, cols[0], "system name")?;
        let score = parse_score(path, line_no, cols[1])?;
        if scores.insert(cols[0].to_string(), score).is_some() {
            return Err(CorpusError::Duplicate {
                path: path.to_path_buf(),
                line: line_no,
                key: cols[0].to_string(),
            });
        }
    }
    Ok(HumanSystemScores {
        scores,
        normalized,
        path: Some(path.to_path_buf()),
    })
}

/// Loads `metric<TAB>orientation<TAB>system<TAB>score` rows, grouped by metric
/// in order of first appearance.
pub fn load_external_scores(path: &Path) -> Result<Vec<ExternalMetricScores>, CorpusError> {
    let mut metrics: Vec<ExternalMetricScores> = Vec::new();
    for (i, line) in load_lines(path)?.iter().enumerate() {
        let line_no = i + 1;
        let cols = columns(path, line_no, line, 4, "metric, orientation, system, score")?;
        non_empty(path, line_no, cols[0], "metric name")?;
        non_empty(path, line_no, cols[2], "system name")?;
        let orientation: Orientation =
            cols[1].parse().map_err(|reason| CorpusError::Malformed {
                path: path.to_path_buf(),
                line: line_no,
                reason,
            })?;
        let score = parse_score(path, line_no, cols[3])?;
        let idx = match metrics.iter().position(|m| m.metric_name == cols[0]) {
            Some(idx) => idx,
            None => {
                metrics.push(ExternalMetricScores {
                    metric_name: cols[0].to_string(),
                    orientation,
                    scores: BTreeMap::new(),
                    path: Some(path.to_path_buf()),
                });
                metrics.len() - 1
            }
        };
        let metric = &mut metrics[idx];
        if metric.orientation != orientation {
            return Err(CorpusError::Malformed {
                path: path.to_path_buf(),
                line: line_no,
                reason: format!(
                    "metric {} declared {} earlier, {} here",
                    metric.metric_name, metric.orientation, orientation
                ),
            });
        }
        match metric.scores.entry(cols[2].to_string()) {
            Entry::Occupied(_) => {
                return Err(CorpusError::Duplicate {
                    path: path.to_path_buf(),
                    line: line_no,
                    key: format!("({}, {})", cols[0], cols[2]),
                })
            }
            Entry::Vacant(v) => {
                v.insert(score);
            }
        }
    }
    Ok(metrics)
}

/// Loads the `segment_index<TAB>language_code` origin sidecar.
pub fn load_origin_tags(path: &Path) -> Result<BTreeMap<usize, String>, CorpusError> {
    let mut tags = BTreeMap::new();
    for (i, line) in load_lines(path)?.iter().enumerate() {
        let line_no = i + 1;
        let cols = columns(path, line_no, line, 2, "segment, language")?;
        let segment = parse_index(path, line_no, cols[0])?;
        non_empty(path, line_no, cols[1], "language code")?;
        if tags.insert(segment, cols[1].to_string()).is_some() {
            return Err(CorpusError::Duplicate {
                path: path.to_path_buf(),
                line: line_no,
                key: segment.to_string(),
            });
        }
    }
    Ok(tags)
}

/// Loads a Pharaoh alignment file (`i-j` pairs, 0-based, one segment per line).
pub fn load_alignments(name: impl Into<String>, path: &Path) -> Result<AlignmentSet, CorpusError> {
    let mut links = Vec::new();
    for (i, line) in load_lines(path)?.iter().enumerate() {
        let line_no = i + 1;
        let segment = line
            .split_whitespace()
            .map(|pair| parse_link(path, line_no, pair))
            .collect::<Result<Vec<_>, _>>()?;
        links.push(segment);
    }
    Ok(AlignmentSet {
        name: name.into(),
        links,
        path: Some(path.to_path_buf()),
    })
}

fn parse_link(path: &Path, line: usize, pair: &str) -> Result<(usize, usize), CorpusError> {
    let malformed = || CorpusError::Malformed {
        path: path.to_path_buf(),
        line,
        reason: format!("invalid alignment link {pair:?}"),
    };
    let negative = || CorpusError::NegativeIndex {
        path: path.to_path_buf(),
        line,
        pair: pair.to_string(),
    };
    if pair.starts_with('-') {
        return Err(negative());
    }
    let (src, tgt) = pair.split_once('-').ok_or_else(malformed)?;
    if tgt.starts_with('-') {
        return Err(negative());
    }
    let digits = |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit());
    if !digits(src) || !digits(tgt) {
        return Err(malformed());
    }
    Ok((
        src.parse().map_err(|_| malformed())?,
        tgt.parse().map_err(|_| malformed())?,
    ))
}
