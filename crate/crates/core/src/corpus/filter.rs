use std::collections::BTreeMap;

use super::{AlignmentSet, CorpusError, ReferenceSet, SystemOutput, Workspace};

/// A workspace restricted to one origin language.
#[derive(Debug, Clone)]
pub struct FilteredWorkspace {
    pub workspace: Workspace,
    /// Original segment index -> index in the filtered workspace.
    pub old_to_new: BTreeMap<usize, usize>,
}

impl FilteredWorkspace {
    /// Original indices of the kept segments, in new-index order.
    pub fn kept(&self) -> Vec<usize> {
        self.old_to_new.keys().copied().collect()
    }
}

/// Keeps only segments originally written in `origin`, restricting every
/// line-aligned attachment by the same index subset and renumbering from 0.
///
/// System-level score files are carried over unchanged.
pub fn filter_by_origin(ws: &Workspace, origin: &str) -> Result<FilteredWorkspace, CorpusError> {
    let test_set = ws.test_set().ok_or(CorpusError::NoTestSet)?;
    if !test_set.language_pair().contains(origin) {
        return Err(CorpusError::NoSuchOrigin {
            origin: origin.to_string(),
            pair: test_set.language_pair().clone(),
        });
    }
    let mut keep = Vec::new();
    for seg in test_set.segments() {
        match &seg.origin_language {
            None => return Err(CorpusError::MissingOriginTags { segment: seg.index }),
            Some(lang) if lang == origin => keep.push(seg.index),
            Some(_) => {}
        }
    }
    if keep.is_empty() {
        return Err(CorpusError::EmptyFilter {
            origin: origin.to_string(),
        });
    }
    let n = test_set.len();
    let check = |what: String, got: usize| {
        if got == n {
            Ok(())
        } else {
            Err(CorpusError::LengthMismatch {
                what,
                expected: n,
                got,
            })
        }
    };
    let pick =
        |lines: &[String]| -> Vec<String> { keep.iter().map(|&i| lines[i].clone()).collect() };

    let mut out = Workspace::new().with_test_set(test_set.restrict(&keep));
    for system in ws.systems() {
        check(
            format!("system {}", system.system_name),
            system.hypotheses.len(),
        )?;
        out.add_system(SystemOutput {
            system_name: system.system_name.clone(),
            hypotheses: pick(&system.hypotheses),
            path: system.path.clone(),
        })?;
    }
    for reference in ws.references() {
        check(format!("reference {}", reference.name), reference.len())?;
        out.add_reference(ReferenceSet {
            translations: pick(&reference.translations),
            ..reference.clone()
        })?;
    }
    for alignment in ws.alignments() {
        check(format!("alignments {}", alignment.name), alignment.len())?;
        out.add_alignments(AlignmentSet {
            links: keep.iter().map(|&i| alignment.links[i].clone()).collect(),
            ..alignment.clone()
        })?;
    }
    let old_to_new: BTreeMap<usize, usize> = keep
        .iter()
        .enumerate()
        .map(|(new, &old)| (old, new))
        .collect();
    if let Some(ratings) = ws.ratings() {
        out.set_ratings(ratings.restrict(&old_to_new));
    }
    if let Some(human) = ws.human_scores() {
        out.set_human_scores(human.clone());
    }
    for ext in ws.external_scores() {
        out.add_external_scores(ext.clone())?;
    }
    Ok(FilteredWorkspace {
        workspace: out,
        old_to_new,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{AdequacyRatings, LanguagePair, ReferenceKind, TestSet};

    fn tagged(tags: &[&str]) -> Workspace {
        let n = tags.len();
        let sources = (0..n).map(|i| format!("src {i}")).collect();
        let map = tags
            .iter()
            .enumerate()
            .map(|(i, t)| (i, t.to_string()))
            .collect();
        let ts = TestSet::new("t", LanguagePair::new("en", "de"), sources)
            .unwrap()
            .with_origin_tags(&map)
            .unwrap();
        let mut ws = Workspace::new().with_test_set(ts);
        ws.add_system(SystemOutput::new(
            "FB",
            (0..n).map(|i| format!("hyp {i}")).collect(),
        ))
        .unwrap();
        ws.add_reference(ReferenceSet::new(
            "WMT",
            ReferenceKind::Standard,
            (0..n).map(|i| format!("ref {i}")).collect(),
        ))
        .unwrap();
        ws.add_alignments(AlignmentSet::new(
            "WMT",
            (0..n).map(|i| vec![(i, i)]).collect(),
        ))
        .unwrap();
        let mut ratings = AdequacyRatings::new();
        for i in 0..n {
            ratings.insert(i, "WMT", "r1", 50.0 + i as f64).unwrap();
        }
        ws.set_ratings(ratings);
        ws
    }

    #[test]
    fn keeps_matching_segments_and_renumbers() {
        let ws = tagged(&["en", "de", "en", "de"]);
        let f = filter_by_origin(&ws, "en").unwrap();
        assert_eq!(f.kept(), vec![0, 2]);
        assert_eq!(f.old_to_new[&2], 1);
        let out = &f.workspace;
        let ts = out.test_set().unwrap();
        assert_eq!(ts.len(), 2);
        assert_eq!(ts.segments()[1].index, 1);
        assert_eq!(ts.segments()[1].source_text, "src 2");
        assert_eq!(out.systems()[0].hypotheses, vec!["hyp 0", "hyp 2"]);
        assert_eq!(out.references()[0].translations, vec!["ref 0", "ref 2"]);
        assert_eq!(out.alignments()[0].links, vec![vec![(0, 0)], vec![(2, 2)]]);
        let r = out.ratings().unwrap();
        assert_eq!(r.get(1, "WMT", "r1"), Some(52.0));
        assert_eq!(r.len(), 2);
    }

    #[test]
    fn foreign_origin_rejected() {
        let ws = tagged(&["en", "de"]);
        assert!(matches!(
            filter_by_origin(&ws, "fr"),
            Err(CorpusError::NoSuchOrigin { .. })
        ));
    }

    #[test]
    fn all_matching_is_identity() {
        let ws = tagged(&["en", "en", "en"]);
        let f = filter_by_origin(&ws, "en").unwrap();
        assert_eq!(f.workspace.systems(), ws.systems());
        assert_eq!(f.workspace.references(), ws.references());
        assert_eq!(f.workspace.test_set(), ws.test_set());
    }

    #[test]
    fn idempotent() {
        let ws = tagged(&["de", "en", "en", "de", "en"]);
        let once = filter_by_origin(&ws, "en").unwrap().workspace;
        let twice = filter_by_origin(&once, "en").unwrap().workspace;
        assert_eq!(once.test_set(), twice.test_set());
        assert_eq!(once.systems(), twice.systems());
        assert_eq!(once.references(), twice.references());
        assert_eq!(once.alignments(), twice.alignments());
        assert_eq!(once.ratings(), twice.ratings());
    }

    #[test]
    fn errors() {
        let ws = tagged(&["de", "de"]);
        assert!(matches!(
            filter_by_origin(&ws, "en"),
            Err(CorpusError::EmptyFilter { .. })
        ));
        let ts = TestSet::new("t", LanguagePair::new("en", "de"), vec!["a".into()]).unwrap();
        let ws = Workspace::new().with_test_set(ts);
        assert!(matches!(
            filter_by_origin(&ws, "en"),
            Err(CorpusError::MissingOriginTags { segment: 0 })
        ));
        assert!(matches!(
            filter_by_origin(&Workspace::new(), "en"),
            Err(CorpusError::NoTestSet)
        ));
    }
}
