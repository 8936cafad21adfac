//! Gauge files and CSV tables.
//!
//! A gauge record is a CSV file with header `t,p` plus a sidecar `<stem>.json` holding
//! `{rho_ref, h0, g, pressure_kind}`. Lines starting with `#` are comments.

use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::reconstruct::{GaugeMeta, GaugeRecord};

pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    Error::Format(format!("{}: {e}", path.display()))
}

/// Reads two named numeric columns from a CSV file.
pub fn read_columns(path: &Path, names: [&str; 2]) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let headers = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    let index = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Format(format!("{}: missing column {name:?}", path.display())))
    };
    let (ia, ib) = (index(names[0])?, index(names[1])?);
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for (line, row) in reader.records().enumerate() {
        let row = row.map_err(|e| csv_error(path, e))?;
        let parse = |i: usize| -> Result<f64> {
            let field = row.get(i).unwrap_or("");
            field
                .parse()
                .map_err(|_| Error::Format(format!("{}: row {}: {field:?} is not a number", path.display(), line + 1)))
        };
        a.push(parse(ia)?);
        b.push(parse(ib)?);
    }
    Ok((a, b))
}

pub fn read_gauge(csv_path: &Path) -> Result<GaugeRecord> {
    let side = sidecar_path(csv_path);
    let text = std::fs::read_to_string(&side).map_err(|e| Error::Io(format!("{}: {e}", side.display())))?;
    let meta: GaugeMeta = serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", side.display())))?;
    let (t, p) = read_columns(csv_path, ["t", "p"])?;
    GaugeRecord::new(t, p, meta)
}

/// Writes `header` and `rows` as CSV, preceded by `# key: value` comment lines.
pub fn write_table<W: Write>(out: W, comments: &[(String, String)], header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut out = std::io::BufWriter::new(out);
    for (k, v) in comments {
        writeln!(out, "# {k}: {v}")?;
    }
    let mut writer = csv::Writer::from_writer(out);
    let fail = |e: csv::Error| Error::Io(e.to_string());
    writer.write_record(header).map_err(fail)?;
    for row in rows {
        writer.write_record(row.iter().map(|v| v.to_string())).map_err(fail)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn write_gauge(record: &GaugeRecord, csv_path: &Path) -> Result<()> {
    let rows: Vec<Vec<f64>> = record.t.iter().zip(&record.p).map(|(&t, &p)| vec![t, p]).collect();
    let file = std::fs::File::create(csv_path)?;
    write_table(file, &[], &["t", "p"], &rows)?;
    let meta = serde_json::to_string_pretty(&record.meta).expect("metadata serializes");
    std::fs::write(sidecar_path(csv_path), meta + "\n")?;
    Ok(())
}
