//! JSONL, CSV and SVG writers, and the sweep summary.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use plotters::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::{Command, ExperimentConfig, SCHEMA};
use crate::error::{CliError, Result};
use crate::records::{Header, NodalRow, Record};

type Series = (&'static str, fn(&NodalRow) -> f64);
use crate::run::{generate, JobOutput};

/// The JSONL text: a header line, then one row per line.
pub fn jsonl(command: Command, cfg: &ExperimentConfig, rows: &[Record], created_unix: u64) -> String {
    let header = Header {
        schema: SCHEMA.into(),
        command: command.name().into(),
        created_unix,
        config: cfg.clone(),
    };
    let mut s = serde_json::to_string(&header).expect("header serializes");
    s.push('\n');
    for r in rows {
        s.push_str(&serde_json::to_string(r).expect("rows serialize"));
        s.push('\n');
    }
    s
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// CSV mirror of `rows`; columns are the union of the row keys, sorted.
pub fn csv_text(rows: &[Record]) -> Result<String> {
    let objects: Vec<_> = rows.iter().map(Record::to_object).collect();
    let columns: BTreeSet<&String> = objects.iter().flat_map(|o| o.keys()).collect();
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Invariant(format!("csv: {e}"));
    if !columns.is_empty() {
        w.write_record(columns.iter().map(|c| c.as_str())).map_err(io)?;
    }
    for o in &objects {
        w.write_record(columns.iter().map(|c| o.get(*c).map(cell).unwrap_or_default()))
            .map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Invariant(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Percentiles {
    pub min: f64,
    pub p05: f64,
    pub p50: f64,
    pub p95: f64,
    pub max: f64,
}

/// Nearest-rank percentiles; `None` for an empty sample.
pub fn percentiles(values: &[f64]) -> Option<Percentiles> {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let rank = |p: f64| v[(((p * v.len() as f64).ceil() as usize).max(1) - 1).min(v.len() - 1)];
    Some(Percentiles {
        min: v[0],
        p05: rank(0.05),
        p50: rank(0.5),
        p95: rank(0.95),
        max: v[v.len() - 1],
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub schema: String,
    pub rows: BTreeMap<String, usize>,
    pub nodal_runs: usize,
    pub degenerate: usize,
    pub ratios: BTreeMap<String, Percentiles>,
}

pub fn summarize(rows: &[Record]) -> Summary {
    let mut counts = BTreeMap::new();
    for r in rows {
        *counts.entry(r.command().to_string()).or_insert(0) += 1;
    }
    let nodal: Vec<_> = rows
        .iter()
        .filter_map(|r| match r {
            Record::Nodal(x) => Some(x),
            _ => None,
        })
        .collect();
    let live: Vec<_> = nodal.iter().filter(|r| !r.degenerate).collect();
    let mut ratios = BTreeMap::new();
    let series: [Series; 4] = [
        ("ratio_thm11", |r| r.ratio_thm11),
        ("ratio_thm12", |r| r.ratio_thm12),
        ("n_over_lambda", |r| r.n_over_lambda),
        ("l4_ratio", |r| r.l4_ratio),
    ];
    for (name, f) in series {
        let v: Vec<f64> = live.iter().map(|r| f(r)).collect();
        if let Some(p) = percentiles(&v) {
            ratios.insert(name.to_string(), p);
        }
    }
    Summary {
        schema: SCHEMA.into(),
        rows: counts,
        nodal_runs: nodal.len(),
        degenerate: nodal.len() - live.len(),
        ratios,
    }
}

/// Scatter plot of `(λ, ratio)` points.
pub fn scatter_svg(path: &Path, title: &str, points: &[(f64, f64)]) -> Result<()> {
    let err = |e: String| CliError::io(path, std::io::Error::other(e));
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in points {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if points.is_empty() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    let pad = |a: f64, b: f64| {
        let d = if b > a { 0.05 * (b - a) } else { 0.5 * a.abs().max(1.0) };
        (a - d, b + d)
    };
    let ((x0, x1), (y0, y1)) = (pad(x0, x1), pad(y0, y1));
    let root = SVGBackend::new(path, (640, 480)).into_drawing_area();
    root.fill(&WHITE).map_err(|e| err(e.to_string()))?;
    let mut chart = ChartBuilder::on(&root)
        .caption(title, ("sans-serif", 20))
        .margin(12)
        .x_label_area_size(40)
        .y_label_area_size(70)
        .build_cartesian_2d(x0..x1, y0..y1)
        .map_err(|e| err(e.to_string()))?;
    chart
        .configure_mesh()
        .x_desc("lambda")
        .y_desc(title)
        .draw()
        .map_err(|e| err(e.to_string()))?;
    chart
        .draw_series(points.iter().map(|&(x, y)| Circle::new((x, y), 3, BLUE.filled())))
        .map_err(|e| err(e.to_string()))?;
    root.present().map_err(|e| err(e.to_string()))?;
    Ok(())
}

fn write(path: &Path, text: &str) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| CliError::io(path, e))
}

/// Paths written by one invocation.
#[derive(Debug, Clone, Default)]
pub struct Written {
    pub jsonl: PathBuf,
    pub csv: Vec<PathBuf>,
    pub summary: Option<PathBuf>,
    pub plots: Vec<PathBuf>,
    pub exports: Vec<PathBuf>,
    pub rows: usize,
}

/// Runs `command` and writes its files under `out`.
pub fn execute(command: Command, cfg: &ExperimentConfig, out: &Path) -> Result<Written> {
    let JobOutput { rows, exports } = generate(command, cfg)?;
    fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let created = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    let name = command.name();
    let mut written = Written {
        jsonl: out.join(format!("{name}.jsonl")),
        rows: rows.len(),
        ..Default::default()
    };
    write(&written.jsonl, &jsonl(command, cfg, &rows, created))?;

    let mut by_command: BTreeMap<&str, Vec<Record>> = BTreeMap::new();
    for r in &rows {
        by_command.entry(r.command()).or_default().push(r.clone());
    }
    if by_command.is_empty() {
        by_command.insert(name, Vec::new());
    }
    for (c, rs) in &by_command {
        let path = if command == Command::Sweep { out.join(format!("sweep_{c}.csv")) } else { out.join(format!("{c}.csv")) };
        write(&path, &csv_text(rs)?)?;
        written.csv.push(path);
    }

    if command == Command::Sweep {
        let path = out.join("sweep_summary.json");
        write(&path, &serde_json::to_string_pretty(&summarize(&rows)).expect("summary serializes"))?;
        written.summary = Some(path);
    }
    if cfg.plot && matches!(command, Command::Sweep | Command::Nodal) {
        let nodal: Vec<_> = rows
            .iter()
            .filter_map(|r| match r {
                Record::Nodal(x) if !x.degenerate => Some(x),
                _ => None,
            })
            .collect();
        let series: [Series; 3] = [
            ("ratio_thm11", |r| r.ratio_thm11),
            ("ratio_thm12", |r| r.ratio_thm12),
            ("n_over_lambda", |r| r.n_over_lambda),
        ];
        for (s, f) in series {
            let path = out.join(format!("{name}_{s}.svg"));
            let pts: Vec<(f64, f64)> = nodal.iter().map(|r| (r.lambda, f(r))).collect();
            scatter_svg(&path, s, &pts)?;
            written.plots.push(path);
        }
    }
    if !exports.is_empty() {
        let dir = out.join("eigenfunctions");
        fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
        for (stem, file) in &exports {
            let path = dir.join(format!("{stem}.json"));
            write(&path, &serde_json::to_string_pretty(file).expect("export serializes"))?;
            written.exports.push(path);
        }
    }
    Ok(written)
}

/// The JSONL text without its header line.
pub fn strip_header(text: &str) -> &str {
    text.split_once('\n').map_or("", |(_, rest)| rest)
}
