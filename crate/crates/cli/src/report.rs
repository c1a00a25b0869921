//! Report assembly: canonical JSON plus a human-oriented table.

use std::fmt::Write;

use bratteli::matrix::{rat_string, real_string};
use bratteli::verdict::{Evidence, Verdict};
use num_rational::BigRational;
use serde_json::{json, Value};

/// Levels printed in table mode.
pub const TABLE_LEVELS: usize = 20;

pub struct Report {
    pub json: Value,
    pub table: String,
}

impl Report {
    /// Pretty JSON with sorted keys and a trailing newline.
    pub fn json_text(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.json).expect("serializable");
        s.push('\n');
        s
    }
}

pub fn real(x: f64) -> Value {
    Value::String(real_string(x))
}

pub fn reals(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| real(x)).collect())
}

pub fn rational(r: &BigRational) -> Value {
    Value::String(rat_string(r))
}

pub fn verdict_json(v: &Verdict) -> Value {
    let mut out = json!({
        "label": v.label(),
        "trail": v.trail.iter().map(|t| json!({"rule": t.rule, "detail": t.detail})).collect::<Vec<_>>(),
    });
    if let Evidence::Numerical { value, depth } = v.evidence {
        out["value"] = real(value);
        out["depth"] = json!(depth);
    }
    out
}

/// One summary line followed by the rule trail.
pub fn verdict_table(v: &Verdict) -> String {
    let mut s = format!("verdict: {v}\n");
    for t in &v.trail {
        let _ = writeln!(s, "  {}: {}", t.rule, t.detail);
    }
    s
}

/// Fixed-width table; the first row is the header.
pub fn table(rows: &[Vec<String>]) -> String {
    let Some(first) = rows.first() else {
        return String::new();
    };
    let widths: Vec<usize> = (0..first.len())
        .map(|c| {
            rows.iter()
                .map(|r| r.get(c).map_or(0, |x| x.len()))
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut s = String::new();
    for row in rows {
        let cells: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(x, w)| format!("{x:<w$}"))
            .collect();
        let _ = writeln!(s, "{}", cells.join("  ").trim_end());
    }
    s
}

/// Short decimal for tables.
pub fn short(x: f64) -> String {
    if x.is_infinite() {
        "inf".into()
    } else {
        format!("{x:.6e}")
    }
}
