use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use serde_json::{json, Map, Value};

use crate::config::{Format, RunConfig};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Text(String),
    /// Shown with a fixed number of decimals; JSON keeps full precision.
    Num(f64, usize),
    Int(u64),
    Bool(bool),
}

impl Cell {
    fn text(&self) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            Cell::Num(v, d) => fixed(*v, *d),
            Cell::Int(v) => v.to_string(),
            Cell::Bool(b) => b.to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Text(s) => json!(s),
            Cell::Num(v, _) => json!(v),
            Cell::Int(v) => json!(v),
            Cell::Bool(b) => json!(b),
        }
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

/// `{:.d}` without a negative zero.
pub fn fixed(v: f64, decimals: usize) -> String {
    let s = format!("{v:.decimals$}");
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_string()
    } else {
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Self {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn delimited(&self, cfg: &RunConfig, sep: char) -> String {
        let field = |s: String| -> String {
            if sep == ',' && (s.contains(',') || s.contains('"')) {
                format!("\"{}\"", s.replace('"', "\"\""))
            } else {
                s
            }
        };
        let mut out = format!("# config: {}\n", cfg.canonical_json());
        let header: Vec<String> = self.columns.iter().map(|c| c.to_string()).collect();
        out.push_str(&header.join(&sep.to_string()));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|c| field(c.text())).collect();
            out.push_str(&cells.join(&sep.to_string()));
            out.push('\n');
        }
        out
    }

    fn json(&self, cfg: &RunConfig, extra: Option<(&str, Value)>) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let mut obj = Map::new();
                for (col, cell) in self.columns.iter().zip(row) {
                    obj.insert(col.to_string(), cell.json());
                }
                Value::Object(obj)
            })
            .collect();
        let mut doc = Map::new();
        doc.insert("config".into(), cfg.canonical_value());
        doc.insert("rows".into(), Value::Array(rows));
        if let Some((key, value)) = extra {
            doc.insert(key.into(), value);
        }
        let mut s = serde_json::to_string_pretty(&Value::Object(doc)).expect("json");
        s.push('\n');
        s
    }

    pub fn render(&self, cfg: &RunConfig, format: Format) -> String {
        match format {
            Format::Tsv => self.delimited(cfg, '\t'),
            Format::Csv => self.delimited(cfg, ','),
            Format::Json => self.json(cfg, None),
        }
    }

    pub fn render_json_with(&self, cfg: &RunConfig, key: &str, value: Value) -> String {
        self.json(cfg, Some((key, value)))
    }
}

/// A named output file.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub file_name: String,
    pub contents: String,
}

impl Artifact {
    pub fn new(file_name: impl Into<String>, contents: String) -> Self {
        Self {
            file_name: file_name.into(),
            contents,
        }
    }
}

/// Replaces characters that are awkward in file names.
pub fn file_safe(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || matches!(c, '.' | '-' | '_') {
                c
            } else {
                '_'
            }
        })
        .collect()
}

/// Writes every artifact into `dir` through a temporary file and a rename,
/// so a failed run leaves no partial files behind.
pub fn write_all(dir: &Path, artifacts: &[Artifact]) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut staged = Vec::with_capacity(artifacts.len());
    for a in artifacts {
        let mut tmp = tempfile::NamedTempFile::new_in(dir)
            .with_context(|| format!("creating temporary file in {}", dir.display()))?;
        tmp.write_all(a.contents.as_bytes())?;
        tmp.flush()?;
        staged.push((tmp, dir.join(&a.file_name)));
    }
    for (tmp, path) in staged {
        tmp.persist(&path)
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

/// Writes to `--out` when given, otherwise prints to stdout.
pub fn emit(cfg: &RunConfig, artifacts: &[Artifact]) -> Result<()> {
    match &cfg.out {
        Some(dir) => {
            write_all(dir, artifacts)?;
            for a in artifacts {
                eprintln!("wrote {}", dir.join(&a.file_name).display());
            }
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            for a in artifacts {
                if artifacts.len() > 1 {
                    writeln!(lock, "==> {} <==", a.file_name)?;
                }
                lock.write_all(a.contents.as_bytes())?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_formatting() {
        assert_eq!(fixed(15.9743, 1), "16.0");
        assert_eq!(fixed(-0.00001, 4), "0.0000");
        assert_eq!(fixed(-0.25, 4), "-0.2500");
        assert_eq!(fixed(0.72, 4), "0.7200");
    }

    #[test]
    fn tsv_and_csv() {
        let cfg = RunConfig::default();
        let mut t = Table::new(vec!["system", "score"]);
        t.push(vec!["a,b".into(), Cell::Num(1.25, 1)]);
        let tsv = t.render(&cfg, Format::Tsv);
        let lines: Vec<&str> = tsv.lines().collect();
        assert!(lines[0].starts_with("# config: {"));
        assert_eq!(&lines[1..], &["system\tscore", "a,b\t1.2"]);
        let csv = t.render(&cfg, Format::Csv);
        assert!(csv.ends_with("system,score\n\"a,b\",1.2\n"));
        let json: Value = serde_json::from_str(&t.render(&cfg, Format::Json)).unwrap();
        assert_eq!(json["rows"][0]["score"], json!(1.25));
        assert!(json["config"].is_object());
    }

    #[test]
    fn atomic_writes_leave_no_temporaries() {
        let dir = tempfile::tempdir().unwrap();
        write_all(dir.path(), &[Artifact::new("a.tsv", "x\n".into())]).unwrap();
        let names: Vec<_> = std::fs::read_dir(dir.path())
            .unwrap()
            .map(|e| e.unwrap().file_name().into_string().unwrap())
            .collect();
        assert_eq!(names, vec!["a.tsv"]);
    }

    #[test]
    fn safe_names() {
        assert_eq!(file_safe("HQ(WMT,WMT.p)"), "HQ_WMT_WMT.p_");
    }
}
