//! Fixed-format CSV output.

use std::fmt::Write as _;

/// Formats `x` with 10 significant digits; plain decimals for moderate
/// magnitudes, scientific notation otherwise.
pub fn format_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.9e}");
    let exp: i32 = sci.rsplit('e').next().and_then(|e| e.parse().ok()).unwrap_or(0);
    if (-5..10).contains(&exp) {
        format!("{:.*}", (9 - exp).max(0) as usize, x)
    } else {
        sci
    }
}

/// Column-labelled table of numbers, one row per grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl CurveTable {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format_sig(*v)).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }
}
