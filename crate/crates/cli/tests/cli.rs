use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn fixture(name: &str) -> String {
    fixtures().join(name).display().to_string()
}

fn refeval(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_refeval"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}\nstderr:\n{}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Data lines of a TSV/CSV output: no config line, no header.
fn rows(text: &str) -> Vec<Vec<String>> {
    let sep = if text.lines().nth(1).is_some_and(|h| h.contains('\t')) {
        '\t'
    } else {
        ','
    };
    text.lines()
        .filter(|l| !l.starts_with("# config: "))
        .skip(1)
        .map(|l| l.split(sep).map(String::from).collect())
        .collect()
}

struct Args {
    systems: String,
    wmt: String,
    wmt_p: String,
}

fn args() -> Args {
    Args {
        systems: format!("{}/systems/*.txt", fixtures().display()),
        wmt: format!("WMT={}", fixture("wmt.de")),
        wmt_p: format!("WMT.p:paraphrase={}", fixture("wmt_p.de")),
    }
}

#[test]
fn score_covers_every_triple() {
    let a = args();
    let out = stdout(&refeval(&[
        "score",
        "--systems",
        &a.systems,
        "--refs",
        &a.wmt,
        "--refs",
        &a.wmt_p,
        "--metrics",
        "bleu,chrf,ter",
    ]));
    let rows = rows(&out);
    // 4 systems x 2 reference sets x (BLEU, chrF, TER, 1-TER).
    assert_eq!(rows.len(), 4 * 2 * 4);
    let systems: Vec<&str> = rows.iter().step_by(8).map(|r| r[0].as_str()).collect();
    assert_eq!(systems, ["alpha", "beta", "delta", "gamma"]);
    for r in &rows {
        assert_eq!(r.len(), 5);
        let score: f64 = r[3].parse().unwrap();
        assert!((0.0..=100.0).contains(&score), "{r:?}");
        assert_eq!(
            r[3].split('.').nth(1).map(str::len),
            Some(1),
            "one decimal: {r:?}"
        );
    }
    for pair in rows.windows(2).filter(|w| w[0][2] == "TER") {
        assert_eq!(pair[1][2], "1-TER");
        let ter: f64 = pair[0][3].parse().unwrap();
        let comp: f64 = pair[1][3].parse().unwrap();
        assert!((ter + comp - 100.0).abs() < 0.11);
    }
}

#[test]
fn multi_reference_bundle_gets_bleu_only() {
    let a = args();
    let out = refeval(&[
        "score",
        "--systems",
        &a.systems,
        "--refs",
        &a.wmt,
        "--refs",
        &a.wmt_p,
        "--multi-ref",
        "WMT+WMT.p",
        "--metrics",
        "bleu,ter",
    ]);
    let rows = rows(&stdout(&out));
    let bundle: Vec<_> = rows.iter().filter(|r| r[1] == "WMT+WMT.p").collect();
    assert_eq!(bundle.len(), 4);
    assert!(bundle
        .iter()
        .all(|r| r[2] == "BLEU" && r[4].contains("numrefs.2")));
    for sys in ["alpha", "beta", "gamma", "delta"] {
        let bleu = |refset: &str| -> f64 {
            rows.iter()
                .find(|r| r[0] == sys && r[1] == refset && r[2] == "BLEU")
                .unwrap()[3]
                .parse()
                .unwrap()
        };
        assert!(bleu("WMT+WMT.p") >= bleu("WMT").max(bleu("WMT.p")));
    }
}

#[test]
fn outputs_are_written_atomically_to_out_dir() {
    let a = args();
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().display().to_string();
    let out = refeval(&[
        "score",
        "--systems",
        &a.systems,
        "--refs",
        &a.wmt,
        "--format",
        "json",
        "--out",
        &out_dir,
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let names: Vec<String> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    assert_eq!(names, ["scores.json"]);
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("scores.json")).unwrap())
            .unwrap();
    assert_eq!(doc["rows"].as_array().unwrap().len(), 4);
    assert_eq!(doc["config"]["command"], "score");
    assert!(doc["config"].get("out").is_none());
    assert_eq!(doc["details"][0]["detail"]["kind"], "bleu");
}

#[test]
fn config_file_is_overridden_by_flags() {
    let a = args();
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.toml");
    std::fs::write(
        &config,
        format!(
            "systems = [{:?}]\nrefs = [{:?}]\nmetrics = [\"chrf\"]\nformat = \"csv\"\n",
            a.systems, a.wmt
        ),
    )
    .unwrap();
    let config = config.display().to_string();
    let from_file = stdout(&refeval(&["score", "--config", &config]));
    assert!(rows(&from_file)
        .iter()
        .all(|r| r[2] == "chrF" && r[1] == "WMT"));
    assert!(from_file
        .lines()
        .nth(1)
        .unwrap()
        .starts_with("system,refset"));

    let overridden = stdout(&refeval(&[
        "score",
        "--config",
        &config,
        "--metrics",
        "bleu",
        "--refs",
        &a.wmt_p,
    ]));
    let rows = rows(&overridden);
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r[2] == "BLEU" && r[1] == "WMT.p"));
    assert!(overridden.starts_with("# config: {"));
    assert!(overridden
        .lines()
        .next()
        .unwrap()
        .contains("\"metrics\":[\"bleu\"]"));
}

#[test]
fn unknown_config_key_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.toml");
    std::fs::write(&config, "sytems = []\n").unwrap();
    let out = refeval(&["score", "--config", &config.display().to_string()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown field"));
}

#[test]
fn exit_codes() {
    let a = args();
    assert_eq!(
        refeval(&["validate", "--systems", &a.systems, "--refs", &a.wmt])
            .status
            .code(),
        Some(0)
    );

    let dir = tempfile::tempdir().unwrap();
    let short = dir.path().join("short.de");
    std::fs::write(&short, "nur eine Zeile\n").unwrap();
    let bad_ref = format!("SHORT={}", short.display());
    let source = fixture("source.en");
    let out = refeval(&[
        "validate",
        "--source",
        &source,
        "--langpair",
        "en-de",
        "--systems",
        &a.systems,
        "--refs",
        &bad_ref,
    ]);
    assert_eq!(out.status.code(), Some(1));
    let report = String::from_utf8_lossy(&out.stdout);
    assert!(report.contains("reference SHORT"));
    assert!(
        report.contains("LengthMismatch(expected 12, got 1)"),
        "{report}"
    );

    // Scoring refuses to start on a broken workspace and writes nothing.
    let out_dir = dir.path().join("out");
    let out = refeval(&[
        "score",
        "--systems",
        &a.systems,
        "--refs",
        &bad_ref,
        "--out",
        &out_dir.display().to_string(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("validation failed"));
    assert!(!out_dir.exists());

    assert_eq!(
        refeval(&[
            "score",
            "--systems",
            &a.systems,
            "--refs",
            &a.wmt,
            "--metrics",
            "bleurt"
        ])
        .status
        .code(),
        Some(1)
    );
    assert_eq!(refeval(&["score", "--no-such-flag"]).status.code(), Some(2));
    assert_eq!(
        refeval(&["score", "--systems", "/nonexistent/*.txt", "--refs", &a.wmt])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn correlate_writes_tables_and_topk_curves() {
    let a = args();
    let dir = tempfile::tempdir().unwrap();
    let out = refeval(&[
        "correlate",
        "--systems",
        &a.systems,
        "--refs",
        &a.wmt,
        "--refs",
        &a.wmt_p,
        "--human",
        &fixture("human.tsv"),
        "--external-scores",
        &fixture("external.tsv"),
        "--metrics",
        "bleu,ter",
        "--topk",
        "3",
        "--out",
        &dir.path().display().to_string(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let read = |name: &str| std::fs::read_to_string(dir.path().join(name)).unwrap();

    let corr = rows(&read("correlations.tsv"));
    let keys: Vec<(String, String)> = corr.iter().map(|r| (r[0].clone(), r[1].clone())).collect();
    let expected: Vec<(String, String)> = [
        ("BLEU", "WMT"),
        ("BLEU", "WMT.p"),
        ("METEOR", "WMT"),
        ("TER", "WMT"),
        ("TER", "WMT.p"),
    ]
    .iter()
    .map(|(m, r)| (m.to_string(), r.to_string()))
    .collect();
    assert_eq!(keys, expected);
    for r in &corr {
        assert_eq!(r[4], "4");
        for v in &r[2..4] {
            assert_eq!(
                v.split('.').nth(1).map(str::len),
                Some(4),
                "four decimals: {r:?}"
            );
        }
    }
    // The fixture systems are built so that BLEU against WMT ranks them like
    // the human scores, and TER is negated before correlating.
    assert_eq!(corr[0][3], "1.0000");
    assert_eq!(corr[3][3], "1.0000");

    let agreement = rows(&read("agreement.tsv"));
    assert_eq!(agreement.len(), corr.len());
    assert_eq!(agreement[0][2], "true");

    // Scaled-down top-k example: 4 systems and k_min = 3 give one point per
    // k in 3..=4, largest k first.
    let curve = read("topk_BLEU_WMT.csv");
    assert!(curve.starts_with("# config: {"));
    let points = rows(&curve);
    let ks: Vec<&str> = points.iter().map(|p| p[0].as_str()).collect();
    assert_eq!(ks, ["4", "3"]);
    for name in [
        "topk_BLEU_WMT.p.csv",
        "topk_METEOR_WMT.csv",
        "topk_TER_WMT.csv",
        "topk_TER_WMT.p.csv",
    ] {
        assert_eq!(rows(&read(name)).len(), 2, "{name}");
    }
}

#[test]
fn correlate_without_human_scores_fails() {
    let a = args();
    let out = refeval(&["correlate", "--systems", &a.systems, "--refs", &a.wmt]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--human"));
}

#[test]
fn topk_minimum_is_checked() {
    let a = args();
    let out = refeval(&[
        "correlate",
        "--systems",
        &a.systems,
        "--refs",
        &a.wmt,
        "--human",
        &fixture("human.tsv"),
        "--topk",
        "9",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn compose_hq_writes_reference_trace_and_summary() {
    let a = args();
    let dir = tempfile::tempdir().unwrap();
    let out = refeval(&[
        "compose-hq",
        "--refs",
        &a.wmt,
        "--refs",
        &a.wmt_p,
        "--ratings",
        &fixture("ratings.tsv"),
        "--out",
        &dir.path().display().to_string(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let read = |name: &str| std::fs::read_to_string(dir.path().join(name)).unwrap();

    let composed: Vec<String> = read("HQ_WMT_WMT.p_.txt")
        .lines()
        .map(String::from)
        .collect();
    let wmt: Vec<String> = read_lines(&fixture("wmt.de"));
    let wmt_p: Vec<String> = read_lines(&fixture("wmt_p.de"));
    assert_eq!(composed.len(), 12);

    let trace = rows(&read("HQ_WMT_WMT.p_.trace.tsv"));
    assert_eq!(trace.len(), 12);
    for (i, row) in trace.iter().enumerate() {
        assert_eq!(row[0], i.to_string());
        let expected = if row[1] == "WMT" { &wmt[i] } else { &wmt_p[i] };
        assert_eq!(&composed[i], expected);
        let chosen: f64 = row[2].parse().unwrap();
        let runner_up: f64 = row[3].parse().unwrap();
        assert!(chosen >= runner_up);
    }

    let summary = rows(&read("HQ_WMT_WMT.p_.summary.tsv"));
    let names: Vec<&str> = summary.iter().map(|r| r[0].as_str()).collect();
    assert_eq!(names, ["WMT", "WMT.p", "HQ(WMT,WMT.p)"]);
    let mean = |i: usize| -> f64 { summary[i][1].parse().unwrap() };
    assert!(mean(2) >= mean(0).max(mean(1)));
    let chosen: u64 = summary[..2]
        .iter()
        .map(|r| r[2].parse::<u64>().unwrap())
        .sum();
    assert_eq!(chosen, 12);
}

fn read_lines(path: &str) -> Vec<String> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(String::from)
        .collect()
}

#[test]
fn ngram_report_lists_matches() {
    let a = args();
    let out = stdout(&refeval(&[
        "ngram-report",
        "--systems",
        &a.systems,
        "--refs",
        &a.wmt,
        "--system",
        "alpha",
        "--reference",
        "WMT",
        "--order",
        "2",
        "--top",
        "5",
    ]));
    let rows = rows(&out);
    assert!(!rows.is_empty() && rows.len() <= 5);
    let counts: Vec<u64> = rows.iter().map(|r| r[2].parse().unwrap()).collect();
    assert!(counts.windows(2).all(|w| w[0] >= w[1]));
    assert!(rows.iter().all(|r| r[1].split(' ').count() == 2));
}

#[test]
fn monotonicity_of_fixture_alignments() {
    let wmt = format!("WMT={}", fixture("wmt.align"));
    let wmt_p = format!("WMT.p={}", fixture("wmt_p.align"));
    let out = stdout(&refeval(&[
        "monotonicity",
        "--alignments",
        &wmt,
        "--alignments",
        &wmt_p,
    ]));
    let rows = rows(&out);
    assert_eq!(rows[0][..2], ["WMT".to_string(), "0.00".to_string()]);
    assert_eq!(rows[1][0], "WMT.p");
    let p: f64 = rows[1][1].parse().unwrap();
    assert!(p > 0.0);
}

#[test]
fn origin_filter_keeps_matching_segments() {
    let a = args();
    let out = refeval(&[
        "score",
        "--source",
        &fixture("source.en"),
        "--langpair",
        "en-de",
        "--origin-tags",
        &fixture("origin.tsv"),
        "--origin",
        "en",
        "--systems",
        &a.systems,
        "--refs",
        &a.wmt,
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(String::from_utf8_lossy(&out.stderr).contains("kept 6 of 12"));
    assert_eq!(rows(&String::from_utf8(out.stdout).unwrap()).len(), 4);
}
