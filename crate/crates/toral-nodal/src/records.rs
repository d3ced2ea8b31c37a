//! Flat output rows. Every row carries its command and run index and is
//! checked against these types on read; unknown fields are rejected.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::config::{ExperimentConfig, SCHEMA};
use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeRow {
    pub run: usize,
    pub n: u64,
    pub lambda: f64,
    pub count: usize,
    pub b_lambda: usize,
    pub jarnik_max: usize,
    pub jarnik_ok: bool,
    pub arclog_m: Option<usize>,
    pub arclog_bound: Option<f64>,
    pub arclog_ok: Option<bool>,
    pub cc_subsets: Option<u64>,
    pub cc_violations: Option<u64>,
    pub cc_min_margin: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodalRow {
    pub run: usize,
    pub n: u64,
    pub seed_index: u64,
    pub seed: u64,
    pub lambda: f64,
    pub e_count: usize,
    pub b: usize,
    pub sign_changes: usize,
    pub stable: bool,
    pub l1: f64,
    pub l2norm: f64,
    pub ratio_thm11: f64,
    pub ratio_thm12: f64,
    pub n_over_lambda: f64,
    pub degenerate: bool,
    /// Restriction `L^2` norm on the curve.
    pub restricted_l2: f64,
    pub l4_4: f64,
    /// `l4_4 / B_λ`.
    pub l4_ratio: f64,
    pub holder_ok: bool,
    pub fourier_l2_sq: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchurRow {
    pub run: usize,
    pub n: u64,
    pub lambda: f64,
    pub epsilon: f64,
    pub b_lambda: usize,
    pub k: u32,
    pub l: u32,
    pub columns: usize,
    pub rows: usize,
    pub entries: usize,
    pub norm1to1: f64,
    pub norm_adj1to1: f64,
    pub bound_sq: f64,
    pub bound2to2: f64,
    pub ratio_column: f64,
    pub ratio_row: f64,
    /// Bilinear form with unit weights, shared by all rows of one `n`.
    pub bilinear_blocked: f64,
    pub bilinear_flat: f64,
    pub bilinear_ratio: f64,
    pub g0_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ExceptionRow {
    Geodesic {
        run: usize,
        p: i64,
        q: i64,
        c: f64,
        n: i64,
        eigenvalue: u64,
        max_on_geodesic: f64,
        laplacian_residual: f64,
    },
    Convergent {
        run: usize,
        beta: f64,
        k: usize,
        p: i64,
        q: i64,
        a: i64,
        error: f64,
        bound: f64,
    },
    Witness {
        run: usize,
        beta: f64,
        k: usize,
        p: i64,
        q: i64,
        eigenvalue: u64,
        lambda: f64,
        min_on_segment: f64,
        sampled_min: f64,
        lower_bound: f64,
        sign_changes: usize,
    },
    Legendre {
        run: usize,
        theta0: f64,
        branch: String,
        x0: f64,
        degree: Option<u32>,
        hits: usize,
        checked: usize,
        min_abs: Option<f64>,
    },
}

impl ExceptionRow {
    pub fn set_run(&mut self, r: usize) {
        match self {
            ExceptionRow::Geodesic { run, .. }
            | ExceptionRow::Convergent { run, .. }
            | ExceptionRow::Witness { run, .. }
            | ExceptionRow::Legendre { run, .. } => *run = r,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum Record {
    Lattice(LatticeRow),
    Nodal(NodalRow),
    Schur(SchurRow),
    Exceptions(ExceptionRow),
}

impl Record {
    pub fn command(&self) -> &'static str {
        match self {
            Record::Lattice(_) => "lattice",
            Record::Nodal(_) => "nodal",
            Record::Schur(_) => "schur",
            Record::Exceptions(_) => "exceptions",
        }
    }

    pub fn set_run(&mut self, r: usize) {
        match self {
            Record::Lattice(x) => x.run = r,
            Record::Nodal(x) => x.run = r,
            Record::Schur(x) => x.run = r,
            Record::Exceptions(x) => x.set_run(r),
        }
    }

    /// The row as a flat JSON object.
    pub fn to_object(&self) -> Map<String, Value> {
        match serde_json::to_value(self) {
            Ok(Value::Object(m)) => m,
            _ => unreachable!("records serialize to objects"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Header {
    pub schema: String,
    pub command: String,
    pub created_unix: u64,
    pub config: ExperimentConfig,
}

/// Parses a JSONL file: the header line, then one record per line.
pub fn parse_jsonl(text: &str) -> Result<(Header, Vec<Record>)> {
    let mut lines = text.lines();
    let first = lines.next().ok_or_else(|| CliError::Config("empty JSONL".into()))?;
    let header: Header = serde_json::from_str(first).map_err(|e| CliError::Config(format!("header: {e}")))?;
    if header.schema != SCHEMA {
        return Err(CliError::Config(format!("schema {:?}", header.schema)));
    }
    let rows = lines
        .enumerate()
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| CliError::Config(format!("row {}: {e}", i + 1))))
        .collect::<Result<_>>()?;
    Ok((header, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nested_tags_round_trip() {
        let r = Record::Exceptions(ExceptionRow::Convergent {
            run: 3,
            beta: 2f64.sqrt(),
            k: 4,
            p: 17,
            q: 12,
            a: 2,
            error: 0.00245,
            bound: 1.0 / 144.0,
        });
        let text = serde_json::to_string(&r).unwrap();
        assert!(text.contains(r#""command":"exceptions""#) && text.contains(r#""kind":"convergent""#));
        assert_eq!(serde_json::from_str::<Record>(&text).unwrap(), r);
        let extra = text.replacen('{', r#"{"bogus":1,"#, 1);
        assert!(serde_json::from_str::<Record>(&extra).is_err());
    }
}
