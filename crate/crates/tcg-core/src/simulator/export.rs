//! CSV series and atomic file output.

use std::io::Write;
use std::path::Path;

use super::coarse::{same_grid, Series};
use crate::error::{Result, TcgError};

/// Fixed-precision float rendering shared by every artifact.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.12e}")
}

/// `t,<label>...` with one row per grid point; labels are quoted when needed.
pub fn series_csv(columns: &[(String, Series)]) -> Result<String> {
    let Some((_, first)) = columns.first() else {
        return Err(TcgError::validation("columns", "nothing to write"));
    };
    if let Some((label, _)) = columns.iter().find(|(_, s)| !same_grid(first, s)) {
        return Err(TcgError::validation("columns", format!("column `{label}` is on a different grid")));
    }
    let csv_err = |e: csv::Error| TcgError::Io(e.to_string());
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(std::iter::once("t").chain(columns.iter().map(|(l, _)| l.as_str()))).map_err(csv_err)?;
    for i in 0..first.values.len() {
        let row = std::iter::once(fmt_float(first.time(i))).chain(columns.iter().map(|(_, s)| fmt_float(s.values[i])));
        w.write_record(row.collect::<Vec<_>>()).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| TcgError::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Inverse of [`series_csv`]; the time column must be uniform.
pub fn parse_series_csv(text: &str) -> Result<Vec<(String, Series)>> {
    let bad = |msg: String| TcgError::validation("csv", msg);
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let header: Vec<String> = r.headers().map_err(|e| bad(e.to_string()))?.iter().map(str::to_string).collect();
    if header.first().map(String::as_str) != Some("t") || header.len() < 2 {
        return Err(bad("header must be `t,<label>...`".into()));
    }
    let mut times = Vec::new();
    let mut cols: Vec<Vec<f64>> = vec![Vec::new(); header.len() - 1];
    for (row, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad(format!("row {}: `{s}` is not a number", row + 2)));
        times.push(num(&rec[0])?);
        for (c, v) in cols.iter_mut().zip(rec.iter().skip(1)) {
            c.push(num(v)?);
        }
    }
    let t0 = *times.first().ok_or_else(|| bad("no data rows".into()))?;
    let dt = if times.len() > 1 { times[1] - times[0] } else { 1.0 };
    if times.len() > 1 && dt.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
        return Err(bad("time column must increase".into()));
    }
    for (i, &t) in times.iter().enumerate() {
        if (t - (t0 + i as f64 * dt)).abs() > 1e-6 * dt {
            return Err(bad(format!("time column is not uniform at row {}", i + 2)));
        }
    }
    Ok(header[1..]
        .iter()
        .zip(cols)
        .map(|(l, values)| (l.to_string(), Series { t0, dt, values }))
        .collect())
}

/// Writes through a temporary sibling file and renames it into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let io = |e: std::io::Error| TcgError::Io(format!("{}: {e}", path.display()));
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    #[test]
    fn csv_round_trip() {
        let s = Series {
            t0: -1e-9,
            dt: 2.5e-11,
            values: vec![0.25, -1.0 / 3.0, 1e-300],
        };
        let text = series_csv(&[("t(e,e)".into(), s.clone())]).unwrap();
        let back = parse_series_csv(&text).unwrap();
        assert_eq!(back.len(), 1);
        assert_eq!(back[0].0, "t(e,e)");
        assert!(same_grid(&back[0].1, &s));
        for (a, b) in back[0].1.values.iter().zip(&s.values) {
            assert!((a - b).abs() <= 1e-12 * b.abs());
        }
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = std::env::temp_dir().join(format!("tcg-export-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let p = dir.join("out.txt");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "two");
        assert_eq!(fs::read_dir(&dir).unwrap().count(), 1);
        fs::remove_dir_all(&dir).unwrap();
    }
}
