use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::Result;

use super::config::OutputFormat;

/// Rows of optional numbers plus a trailing text flag column.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
    pub flags: Vec<String>,
}

impl Table {
    /// The last column name is the flag column.
    pub fn new(columns: Vec<String>) -> Self {
        Table {
            columns,
            rows: Vec::new(),
            flags: Vec::new(),
        }
    }

    pub fn push(&mut self, values: Vec<Option<f64>>, flag: &str) {
        self.rows.push(values);
        self.flags.push(flag.to_string());
    }

    /// Full-precision, locale-independent CSV with LF line endings. Missing
    /// values are empty fields.
    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for (row, flag) in self.rows.iter().zip(&self.flags) {
            for v in row {
                if let Some(x) = v {
                    s.push_str(&format_number(*x));
                }
                s.push(',');
            }
            s.push_str(flag);
            s.push('\n');
        }
        s
    }

    pub fn to_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Record<'a> {
            columns: &'a [String],
            rows: Vec<Vec<serde_json::Value>>,
        }
        let rows = self
            .rows
            .iter()
            .zip(&self.flags)
            .map(|(row, flag)| {
                let mut out: Vec<serde_json::Value> = row
                    .iter()
                    .map(|v| v.map_or(serde_json::Value::Null, serde_json::Value::from))
                    .collect();
                out.push(serde_json::Value::from(flag.as_str()));
                out
            })
            .collect();
        let mut text = serde_json::to_string_pretty(&Record {
            columns: &self.columns,
            rows,
        })?;
        text.push('\n');
        Ok(text)
    }

    pub fn render(&self, format: OutputFormat) -> Result<String> {
        match format {
            OutputFormat::Csv => Ok(self.to_csv()),
            OutputFormat::Json => self.to_json(),
        }
    }
}

/// 17 significant digits; negative zero prints as zero.
pub fn format_number(x: f64) -> String {
    if x == 0.0 {
        "0.0000000000000000e0".to_string()
    } else if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

pub fn extension(format: OutputFormat) -> &'static str {
    match format {
        OutputFormat::Csv => "csv",
        OutputFormat::Json => "json",
    }
}

/// Writes through a sibling temporary file and a rename.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    let mut tmp_name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    tmp_name.push(".partial");
    let tmp: PathBuf = path.with_file_name(tmp_name);
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_uses_full_precision_and_lf() {
        let mut t = Table::new(vec!["tau".into(), "P".into(), "flag".into()]);
        t.push(vec![Some(0.1), None], "ill_conditioned");
        t.push(vec![Some(1.0), Some(1.0 / 3.0)], "ok");
        let csv = t.to_csv();
        assert!(!csv.contains('\r'));
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "tau,P,flag");
        assert_eq!(lines[1], "1.0000000000000001e-1,,ill_conditioned");
        let third: f64 = lines[2].split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(third, 1.0 / 3.0);
    }

    #[test]
    fn json_marks_missing_values_null() {
        let mut t = Table::new(vec!["tau".into(), "M".into(), "flag".into()]);
        t.push(vec![Some(2.0), None], "ill_conditioned");
        let v: serde_json::Value = serde_json::from_str(&t.to_json().unwrap()).unwrap();
        assert!(v["rows"][0][1].is_null());
        assert_eq!(v["rows"][0][2], "ill_conditioned");
    }
}
