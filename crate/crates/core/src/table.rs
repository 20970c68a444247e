//! Column-ordered tables and their CSV serialization.
//!
//! Output format: UTF-8, comma separators, `\n` line endings, one header row,
//! decimal point `.`, no thousands separators. Floats are written with 17
//! significant digits so a re-parse recovers the value bit-exactly. Non-finite
//! values are rejected rather than written.

use std::fmt::Write as FmtWrite;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

/// Format a float with 17 significant digits (round-trip exact for f64).
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    headers: Vec<String>,
    rows: Vec<Vec<Cell>>,
    comment: Option<String>,
}

impl Table {
    pub fn new<I, S>(headers: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Table {
            headers: headers.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
            comment: None,
        }
    }

    /// Attach a `# ...` comment line emitted before the header.
    pub fn with_comment(mut self, comment: String) -> Self {
        self.comment = Some(comment);
        self
    }

    pub fn headers(&self) -> &[String] {
        &self.headers
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn push_row(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.headers.len(), "row width mismatch");
        self.rows.push(row);
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut out = String::new();
        if let Some(comment) = &self.comment {
            out.push_str("# ");
            out.push_str(comment);
            out.push('\n');
        }
        out.push_str(&self.headers.join(","));
        out.push('\n');
        for (i, row) in self.rows.iter().enumerate() {
            for (col, cell) in row.iter().enumerate() {
                if col > 0 {
                    out.push(',');
                }
                match cell {
                    Cell::Int(v) => {
                        write!(out, "{v}").expect("write to string");
                    }
                    Cell::Float(v) => {
                        if !v.is_finite() {
                            return Err(Error::Validation(format!(
                                "non-finite value {v} in column `{}`, row {i}",
                                self.headers[col]
                            )));
                        }
                        out.push_str(&format_float(*v));
                    }
                    Cell::Text(s) => {
                        out.push_str(s);
                    }
                }
            }
            out.push('\n');
        }
        Ok(out)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let body = self.to_csv_string()?;
        std::fs::write(path, body).map_err(|e| {
            Error::Io(std::io::Error::new(
                e.kind(),
                format!("{}: {e}", path.display()),
            ))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_table_is_header_only() {
        let t = Table::new(["a", "b"]);
        assert_eq!(t.to_csv_string().unwrap(), "a,b\n");
    }

    #[test]
    fn floats_round_trip_bit_exactly() {
        let values = [
            1.0 / 3.0,
            std::f64::consts::PI,
            -0.0356927301,
            1e-300,
            6.02214076e23,
        ];
        let mut t = Table::new(["x"]);
        for v in values {
            t.push_row(vec![Cell::Float(v)]);
        }
        let csv = t.to_csv_string().unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("x"));
        for (line, v) in lines.zip(values) {
            let parsed: f64 = line.parse().unwrap();
            assert_eq!(parsed.to_bits(), v.to_bits(), "round trip failed for {v}");
        }
    }

    #[test]
    fn column_order_and_types() {
        let mut t = Table::new(["run", "status", "m"]);
        t.push_row(vec![
            Cell::Int(3),
            Cell::Text("Registered".into()),
            Cell::Float(0.5),
        ]);
        let csv = t.to_csv_string().unwrap();
        assert_eq!(csv.lines().next().unwrap(), "run,status,m");
        assert!(csv.lines().nth(1).unwrap().starts_with("3,Registered,5.0"));
    }

    #[test]
    fn rejects_non_finite() {
        let mut t = Table::new(["x"]);
        t.push_row(vec![Cell::Float(f64::NAN)]);
        assert!(t.to_csv_string().is_err());
        let mut t = Table::new(["x"]);
        t.push_row(vec![Cell::Float(f64::INFINITY)]);
        assert!(t.to_csv_string().is_err());
    }

    #[test]
    fn comment_line_precedes_header() {
        let t = Table::new(["m", "F_per_spin"]).with_comment("T=2e-1 g=5e-2 s=+1".into());
        let csv = t.to_csv_string().unwrap();
        assert!(csv.starts_with("# T=2e-1 g=5e-2 s=+1\nm,F_per_spin\n"));
    }
}
