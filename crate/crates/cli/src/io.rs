//! Bit-exact CSV and manifest emission.
//!
//! All floating-point values are printed with 17 significant digits
//! (`{:.16e}`), which round-trips `f64` exactly, and files always use LF
//! line endings, so identical runs produce byte-identical files.

use fastslow::fields::FieldTriple;
use fastslow::grid::Grid1D;
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_atomic(path: &Path, content: &str) -> io::Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, content.as_bytes())
}

/// Fields CSV: header `x,u,v,w,t`, one row per cell, ordered by ascending x.
pub fn write_fields_csv(
    path: &Path,
    grid: &Grid1D,
    triple: &FieldTriple,
) -> io::Result<PathBuf> {
    let mut out = String::with_capacity(64 * (triple.len() + 1));
    out.push_str("x,u,v,w,t\n");
    let t = fmt_f64(triple.t);
    for j in 0..triple.len() {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            fmt_f64(grid.center(j)),
            fmt_f64(triple.u[j]),
            fmt_f64(triple.v[j]),
            fmt_f64(triple.w[j]),
            t
        );
    }
    write_atomic(path, &out)?;
    Ok(path.to_path_buf())
}

/// Report CSV: header `metric,component,value`.
pub fn write_report_csv(
    path: &Path,
    rows: &[(String, String, f64)],
) -> io::Result<PathBuf> {
    let mut out = String::new();
    out.push_str("metric,component,value\n");
    for (metric, component, value) in rows {
        let _ = writeln!(out, "{metric},{component},{}", fmt_f64(*value));
    }
    write_atomic(path, &out)?;
    Ok(path.to_path_buf())
}

/// Manifest: comment lines with run metadata followed by the canonical
/// config echo; the whole file re-parses as a config.
pub fn write_manifest(
    path: &Path,
    config_echo: &str,
    notes: &[(String, String)],
) -> io::Result<PathBuf> {
    let mut out = String::new();
    out.push_str("# fastslow run manifest\n");
    for (key, value) in notes {
        let _ = writeln!(out, "# {key} = {value}");
    }
    out.push('\n');
    out.push_str(config_echo);
    write_atomic(path, &out)?;
    Ok(path.to_path_buf())
}

/// Read back a fields CSV written by [`write_fields_csv`].
pub fn read_fields_csv(path: &Path) -> io::Result<(Vec<f64>, FieldTriple)> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default();
    if header != "x,u,v,w,t" {
        return Err(io::Error::new(
            io::ErrorKind::InvalidData,
            format!("unexpected header `{header}`"),
        ));
    }
    let mut xs = Vec::new();
    let mut triple = FieldTriple {
        u: Vec::new(),
        v: Vec::new(),
        w: Vec::new(),
        t: 0.0,
    };
    for (idx, line) in lines.enumerate() {
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 5 {
            return Err(io::Error::new(
                io::ErrorKind::InvalidData,
                format!("row {} has {} columns", idx + 2, cols.len()),
            ));
        }
        let parse = |s: &str| -> io::Result<f64> {
            s.parse::<f64>()
                .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e.to_string()))
        };
        xs.push(parse(cols[0])?);
        triple.u.push(parse(cols[1])?);
        triple.v.push(parse(cols[2])?);
        triple.w.push(parse(cols[3])?);
        triple.t = parse(cols[4])?;
    }
    Ok((xs, triple))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fields_csv_shape_and_roundtrip() {
        let dir = std::env::temp_dir().join("fastslow_io_test");
        let _ = fs::remove_dir_all(&dir);
        let grid = Grid1D::new(0.0, 4.0, 4).unwrap();
        let triple = FieldTriple {
            u: vec![1.0, 0.1, -0.25, 1e-17],
            v: vec![0.5, 0.05, -0.125, 5e-18],
            w: vec![0.0, 0.3, std::f64::consts::PI, -7.0],
            t: 0.125,
        };
        let path = dir.join("fields.csv");
        write_fields_csv(&path, &grid, &triple).unwrap();

        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 5); // header + 4 rows
        assert!(!text.contains('\r'));

        // values re-parse to the exact bits that were written
        let (xs, back) = read_fields_csv(&path).unwrap();
        assert_eq!(xs, (0..4).map(|j| grid.center(j)).collect::<Vec<_>>());
        assert_eq!(back, triple);

        // byte-identical on rewrite
        write_fields_csv(&path, &grid, &triple).unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), text);
        let _ = fs::remove_dir_all(&dir);
    }

    #[test]
    fn report_csv_format() {
        let dir = std::env::temp_dir().join("fastslow_io_report_test");
        let _ = fs::remove_dir_all(&dir);
        let path = dir.join("report.csv");
        write_report_csv(
            &path,
            &[("sup_err".into(), "u".into(), 0.5), ("slope".into(), "u".into(), 1.0)],
        )
        .unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "metric,component,value");
        assert!(lines[1].starts_with("sup_err,u,"));
        let _ = fs::remove_dir_all(&dir);
    }
}
