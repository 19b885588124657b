use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::Failure;

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

/// Which CSV columns the plot script draws.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PlotSpec {
    pub title: String,
    pub x: String,
    pub ys: Vec<String>,
    pub log_y: bool,
}

/// Everything one experiment produces.
#[derive(Debug)]
pub struct Report {
    pub experiment: String,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub checks: Vec<Check>,
    pub summary: Map<String, Value>,
    pub plot: PlotSpec,
}

/// Floats print in shortest round-trip form, so equal values give equal bytes.
pub fn num(v: f64) -> String {
    format!("{v}")
}

impl Report {
    pub fn new(experiment: &str, columns: Vec<&'static str>, plot: PlotSpec) -> Self {
        Self { experiment: experiment.into(), columns, rows: Vec::new(), checks: Vec::new(), summary: Map::new(), plot }
    }

    pub fn row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }

    pub fn check(&mut self, name: &str, pass: bool, detail: String) {
        self.checks.push(Check { name: name.into(), pass, detail });
    }

    pub fn put(&mut self, key: &str, v: impl Into<Value>) {
        self.summary.insert(key.into(), v.into());
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// Writes `<out>.csv`, `<out>.json` and `<out>.plot.py`; returns the
    /// summary that went into the JSON file.
    pub fn write(&self, out: &Path) -> Result<Value, Failure> {
        if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|e| unwritable(dir, e))?;
        }
        let csv_path = with_suffix(out, "csv");
        let json_path = with_suffix(out, "json");
        let mut w = csv::Writer::from_path(&csv_path).map_err(|e| unwritable(&csv_path, e))?;
        w.write_record(&self.columns).map_err(|e| unwritable(&csv_path, e))?;
        for r in &self.rows {
            w.write_record(r).map_err(|e| unwritable(&csv_path, e))?;
        }
        w.flush().map_err(|e| unwritable(&csv_path, e))?;

        let summary = json!({
            "experiment": self.experiment,
            "status": if self.passed() { "pass" } else { "fail" },
            "csv": file_name(&csv_path),
            "columns": self.columns,
            "rows": self.rows.len(),
            "checks": self.checks,
            "summary": self.summary,
            "plot": self.plot,
        });
        let text = serde_json::to_string_pretty(&summary).expect("summary serializes");
        fs::write(&json_path, text + "\n").map_err(|e| unwritable(&json_path, e))?;
        crate::plot::emit(&json_path)?;
        Ok(summary)
    }
}

pub fn with_suffix(out: &Path, ext: &str) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

pub fn file_name(p: &Path) -> String {
    p.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default()
}

fn unwritable(p: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::validation(format!("cannot write {}: {e}", p.display()), Some("output".into()))
}
