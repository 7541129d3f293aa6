use std::collections::BTreeMap;
use std::fs;

use proptest::prelude::*;
use refeval::corpus::{
    lines_to_string, load_alignments, load_human_scores, load_lines, load_ratings,
};
use refeval::{AdequacyRatings, AlignmentSet, HumanSystemScores};

fn write(dir: &tempfile::TempDir, name: &str, body: &str) -> std::path::PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, body).unwrap();
    path
}

fn line() -> impl Strategy<Value = String> {
    "[^\r\n]{0,20}"
}

fn name() -> impl Strategy<Value = String> {
    "[A-Za-z][A-Za-z0-9_.-]{0,8}"
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lines(lines in proptest::collection::vec(line(), 1..10)) {
        let dir = tempfile::tempdir().unwrap();
        let path = write(&dir, "lines.txt", &lines_to_string(&lines));
        prop_assert_eq!(load_lines(&path).unwrap(), lines);
    }

    #[test]
    fn ratings(rows in proptest::collection::vec((0usize..50, name(), name(), 0.0f64..=100.0), 1..20)) {
        let mut ratings = AdequacyRatings::new();
        for (segment, reference, rater, value) in rows {
            let _ = ratings.insert(segment, &reference, &rater, value);
        }
        let dir = tempfile::tempdir().unwrap();
        let path = write(&dir, "ratings.tsv", &ratings.to_tsv());
        let loaded = load_ratings(&path).unwrap();
        let a: Vec<_> = ratings.entries().map(|(k, v)| (k.clone(), v)).collect();
        let b: Vec<_> = loaded.entries().map(|(k, v)| (k.clone(), v)).collect();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn human_scores(scores in proptest::collection::btree_map(name(), -5.0f64..100.0, 1..10)) {
        let human = HumanSystemScores::new(scores.clone(), true);
        let dir = tempfile::tempdir().unwrap();
        let path = write(&dir, "human.tsv", &human.to_tsv());
        let loaded = load_human_scores(&path, true).unwrap();
        prop_assert_eq!(loaded.scores, scores);
    }

    #[test]
    fn alignments(links in proptest::collection::vec(
        proptest::collection::vec((0usize..40, 0usize..40), 0..8), 1..6)) {
        let set = AlignmentSet::new("a", links.clone());
        let dir = tempfile::tempdir().unwrap();
        let path = write(&dir, "a.align", &set.to_pharaoh());
        prop_assert_eq!(load_alignments("a", &path).unwrap().links, links);
    }
}

#[test]
fn empty_score_map_is_still_valid_tsv() {
    let human = HumanSystemScores::new(BTreeMap::new(), false);
    assert_eq!(human.to_tsv(), "");
}
