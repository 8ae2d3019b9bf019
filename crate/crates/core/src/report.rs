//! Line-oriented `kind key=value key=value ...` records.
//!
//! Values never contain whitespace or `=`; floats use Rust's shortest
//! round-trip exponent form, so a rendered report is a deterministic function
//! of its inputs and parses back to identical values.

use std::fmt;

use crate::canonicalize::{CanonicalResult, DegeneracyReport, DegeneracyThresholds};
use crate::geometry::Mat3;

#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    kind: String,
    fields: Vec<(String, String)>,
}

/// Replaces characters that would break the record grammar.
pub fn sanitize(value: &str) -> String {
    let cleaned: String = value
        .chars()
        .map(|c| if c.is_whitespace() || c == '=' { '_' } else { c })
        .collect();
    if cleaned.is_empty() {
        "_".into()
    } else {
        cleaned
    }
}

pub fn fmt_float(v: f64) -> String {
    format!("{v:e}")
}

impl Record {
    pub fn new(kind: &str) -> Self {
        Self {
            kind: sanitize(kind),
            fields: Vec::new(),
        }
    }

    pub fn text(mut self, key: &str, value: impl fmt::Display) -> Self {
        self.fields.push((sanitize(key), sanitize(&value.to_string())));
        self
    }

    pub fn float(mut self, key: &str, value: f64) -> Self {
        self.fields.push((sanitize(key), fmt_float(value)));
        self
    }

    pub fn floats(mut self, key: &str, values: &[f64]) -> Self {
        let joined = values.iter().map(|v| fmt_float(*v)).collect::<Vec<_>>().join(",");
        self.fields.push((sanitize(key), joined));
        self
    }

    pub fn kind(&self) -> &str {
        &self.kind
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.fields
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn get_f64(&self, key: &str) -> Option<f64> {
        self.get(key)?.parse().ok()
    }

    /// Parses one rendered line. Blank lines and `#` comments yield `None`.
    pub fn parse(line: &str) -> Option<Record> {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            return None;
        }
        let mut toks = line.split_whitespace();
        let kind = toks.next()?.to_string();
        let fields = toks
            .map(|t| match t.split_once('=') {
                Some((k, v)) => (k.to_string(), v.to_string()),
                None => (t.to_string(), String::new()),
            })
            .collect();
        Some(Record { kind, fields })
    }
}

impl fmt::Display for Record {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.kind)?;
        for (k, v) in &self.fields {
            write!(f, " {k}={v}")?;
        }
        Ok(())
    }
}

pub fn render(header: &str, records: &[Record]) -> String {
    let mut out = format!("# {header}\n");
    for r in records {
        out.push_str(&r.to_string());
        out.push('\n');
    }
    out
}

pub fn thresholds_record(t: &DegeneracyThresholds) -> Record {
    Record::new("thresholds")
        .float("gap_rel_min", t.gap_rel_min)
        .float("phi_rel_min", t.phi_rel_min)
        .float("warn_factor", t.warn_factor)
        .float("eps_abs", t.eps_abs)
}

pub fn degeneracy_record(r: &DegeneracyReport) -> Record {
    Record::new("degeneracy")
        .text("verdict", r.verdict)
        .text("spectrum_simple", r.spectrum_simple)
        .float("gap_ratio_12", r.gap_ratio_12)
        .float("gap_ratio_23", r.gap_ratio_23)
        .text("phi_nondegenerate", r.phi_nondegenerate)
        .float("phi_margin_1", r.phi_margin_1)
        .float("phi_margin_2", r.phi_margin_2)
}

fn basis_rows(m: &Mat3) -> Vec<f64> {
    m.0.iter().flatten().copied().collect()
}

/// Records describing one canonicalization.
pub fn canonical_records(result: &CanonicalResult) -> Vec<Record> {
    vec![
        Record::new("result")
            .text("verdict", result.report.verdict)
            .text("points", result.canonical.len()),
        Record::new("basis").floats("row_major", &basis_rows(&result.basis)),
        Record::new("signs")
            .text("sigma1", result.signs[0])
            .text("sigma2", result.signs[1])
            .text("sigma3", result.signs[2]),
        Record::new("phi")
            .float("phi1", result.phi_values[0])
            .float("phi2", result.phi_values[1]),
        Record::new("eigen")
            .floats("lambda", &result.eigen.eigenvalues)
            .floats("gaps", &result.gaps),
        Record::new("centroid").floats("mu", &result.centroid),
        degeneracy_record(&result.report),
    ]
}
