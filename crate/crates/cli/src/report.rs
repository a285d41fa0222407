//! Machine-readable reports and human-readable number formatting.

use std::path::Path;

use posmap::{CVector, ComplexMatrix, Tolerance, C64};
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ToleranceJson {
    pub rank_tol: f64,
    pub entry_tol: f64,
}

impl From<&Tolerance> for ToleranceJson {
    fn from(t: &Tolerance) -> Self {
        ToleranceJson {
            rank_tol: t.rank_tol,
            entry_tol: t.entry_tol,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: String,
    pub inputs_digest: String,
    pub results: Value,
    pub seed: u64,
    pub tolerances: ToleranceJson,
    pub timing_ms: Option<f64>,
}

impl Report {
    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(self).expect("reports serialize");
        text.push('\n');
        std::fs::write(path, text)
            .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))
    }
}

/// SHA-256 over the command, its extra arguments and the raw input.
pub fn digest(command: &str, extra: &str, input: &str) -> String {
    let mut h = Sha256::new();
    for part in [command, extra, input] {
        h.update(part.as_bytes());
        h.update([0u8]);
    }
    hex::encode(h.finalize())
}

/// Shortest rendering of `x` at ten decimals: `-0.09999999999999998` prints
/// as `-0.1`.
pub fn fmt_num(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let s = format!("{x:.10}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

pub fn fmt_complex(z: C64) -> String {
    let re = fmt_num(z.re);
    let im = fmt_num(z.im);
    match (re.as_str(), im.as_str()) {
        (_, "0") => re,
        ("0", _) => format!("{im}i"),
        _ if im.starts_with('-') => format!("{re}{im}i"),
        _ => format!("{re}+{im}i"),
    }
}

pub fn fmt_matrix(m: &ComplexMatrix) -> String {
    let cells: Vec<Vec<String>> = (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| fmt_complex(m.get(i, j))).collect())
        .collect();
    let width = cells.iter().flatten().map(String::len).max().unwrap_or(1);
    cells
        .iter()
        .map(|row| {
            row.iter()
                .map(|c| format!("{c:>width$}"))
                .collect::<Vec<_>>()
                .join("  ")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

pub fn complex_json(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

pub fn vector_json(v: &CVector) -> Vec<[f64; 2]> {
    v.iter().map(|z| complex_json(*z)).collect()
}
