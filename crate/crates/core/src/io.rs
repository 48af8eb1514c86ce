//! CSV and JSON output, written atomically.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::Result;

/// Writes `bytes` to a sibling temp file and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    let name = path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = path.with_file_name(format!(".{name}.tmp{}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Formats a number for CSV output; `None` becomes an empty field.
pub fn fmt_num(x: Option<f64>) -> String {
    match x {
        Some(v) => format!("{v:.15e}"),
        None => String::new(),
    }
}

/// Renders a CSV document with a header row.
pub fn csv_string(header: &[&str], rows: impl IntoIterator<Item = Vec<Option<f64>>>) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for row in rows {
        let fields: Vec<String> = row.into_iter().map(fmt_num).collect();
        s.push_str(&fields.join(","));
        s.push('\n');
    }
    s
}

pub fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<Option<f64>>>) -> Result<()> {
    write_atomic(path, csv_string(header, rows).as_bytes())
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    write_atomic(path, s.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let s = csv_string(&["a", "b"], vec![vec![Some(1.0), None], vec![Some(-0.5), Some(2.0)]]);
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "a,b");
        assert_eq!(lines[1], "1.000000000000000e0,");
        assert_eq!(lines[2], "-5.000000000000000e-1,2.000000000000000e0");
    }

    #[test]
    fn fifteen_digits_round_trip() {
        let x = std::f64::consts::PI / 7.0;
        let back: f64 = fmt_num(Some(x)).parse().unwrap();
        assert!((back - x).abs() <= 1e-15 * x);
    }
}
