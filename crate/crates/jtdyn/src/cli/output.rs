//! File emission for runs: observable series as CSV (17 significant digits,
//! lossless for f64), dense heatmaps as coordinate-labelled CSV plus 8-bit
//! PGM previews, marginals, conservation reports, and a metadata file whose
//! body is the resolved configuration in the config syntax.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::analysis::{ConservationReport, ObservableSeries};
use crate::error::{Error, Result};

use super::config::{serialize_config, RunConfig};

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

/// Write a series as CSV: header `t,<channels...>`, one row per sample.
pub fn write_series_csv(path: &Path, series: &ObservableSeries) -> Result<()> {
    let mut out = String::new();
    out.push('t');
    for (name, _) in &series.channels {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for i in 0..series.len() {
        out.push_str(&fmt(series.t[i]));
        for (_, col) in &series.channels {
            out.push(',');
            out.push_str(&fmt(col[i]));
        }
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

/// Read back a series CSV written by write_series_csv.
pub fn read_series_csv(path: &Path) -> Result<ObservableSeries> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::CsvFormat { line: 1, msg: "empty file".into() })?;
    let mut names = header.split(',');
    if names.next() != Some("t") {
        return Err(Error::CsvFormat { line: 1, msg: "first column must be t".into() });
    }
    let names: Vec<String> = names.map(|s| s.to_string()).collect();
    let mut t = Vec::new();
    let mut cols: Vec<Vec<f64>> = vec![Vec::new(); names.len()];
    for (i, line) in lines {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split(',');
        let tv = parts
            .next()
            .ok_or_else(|| Error::CsvFormat { line: line_no, msg: "missing t".into() })?;
        t.push(parse_field(tv, line_no)?);
        for (c, col) in cols.iter_mut().enumerate() {
            let field = parts.next().ok_or_else(|| Error::CsvFormat {
                line: line_no,
                msg: format!("row has fewer fields than the {} columns in the header", names.len() + 1),
            })?;
            let _ = c;
            col.push(parse_field(field, line_no)?);
        }
        if parts.next().is_some() {
            return Err(Error::CsvFormat { line: line_no, msg: "row has extra fields".into() });
        }
    }
    ObservableSeries::new(t, names.into_iter().zip(cols).collect())
}

fn parse_field(s: &str, line: usize) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::CsvFormat { line, msg: format!("not a number: '{s}'") })
}

/// Dense scalar field on a rectangular lattice, values row-major with x
/// fastest (one row per y coordinate).
#[derive(Debug, Clone, PartialEq)]
pub struct Heatmap {
    pub x_coords: Vec<f64>,
    pub y_coords: Vec<f64>,
    pub values: Vec<f64>,
}

impl Heatmap {
    pub fn new(x_coords: Vec<f64>, y_coords: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if x_coords.len() * y_coords.len() != values.len() {
            return Err(Error::InvalidInput(format!(
                "heatmap needs {}×{} values, got {}",
                x_coords.len(),
                y_coords.len(),
                values.len()
            )));
        }
        Ok(Heatmap { x_coords, y_coords, values })
    }
}

/// Write `<base>.csv` (corner cell empty, x coordinates across the first
/// row, y coordinate leading each data row) and `<base>.pgm` (binary P5,
/// linear scale to the maximum; an all-zero or non-finite field renders
/// black and warns). Returns the two paths.
pub fn emit_heatmap(hm: &Heatmap, base: &Path, warnings: &mut Vec<String>) -> Result<[PathBuf; 2]> {
    let csv_path = base.with_extension("csv");
    let (nx, ny) = (hm.x_coords.len(), hm.y_coords.len());
    let mut out = String::new();
    for x in &hm.x_coords {
        out.push(',');
        out.push_str(&fmt(*x));
    }
    out.push('\n');
    for iy in 0..ny {
        out.push_str(&fmt(hm.y_coords[iy]));
        for ix in 0..nx {
            out.push(',');
            out.push_str(&fmt(hm.values[iy * nx + ix]));
        }
        out.push('\n');
    }
    fs::write(&csv_path, out)?;

    let pgm_path = base.with_extension("pgm");
    let max = hm.values.iter().copied().filter(|v| v.is_finite()).fold(0.0f64, f64::max);
    if !(max > 0.0) {
        warnings.push(format!(
            "heatmap {} has no positive finite values; preview rendered black",
            base.display()
        ));
    }
    let mut pgm = Vec::with_capacity(nx * ny + 32);
    pgm.extend_from_slice(format!("P5\n{nx} {ny}\n255\n").as_bytes());
    for v in &hm.values {
        let level = if max > 0.0 && v.is_finite() {
            ((v / max * 255.0).round()).clamp(0.0, 255.0) as u8
        } else {
            0
        };
        pgm.push(level);
    }
    let mut f = fs::File::create(&pgm_path)?;
    f.write_all(&pgm)?;
    Ok([csv_path, pgm_path])
}

/// Read back a heatmap CSV written by emit_heatmap.
pub fn read_heatmap_csv(path: &Path) -> Result<Heatmap> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::CsvFormat { line: 1, msg: "empty file".into() })?;
    let mut head = header.split(',');
    if head.next() != Some("") {
        return Err(Error::CsvFormat { line: 1, msg: "corner cell must be empty".into() });
    }
    let mut x_coords = Vec::new();
    for field in head {
        x_coords.push(parse_field(field, 1)?);
    }
    let mut y_coords = Vec::new();
    let mut values = Vec::new();
    for (i, line) in lines {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split(',');
        let y = parts
            .next()
            .ok_or_else(|| Error::CsvFormat { line: line_no, msg: "missing y coordinate".into() })?;
        y_coords.push(parse_field(y, line_no)?);
        let mut count = 0;
        for field in parts {
            values.push(parse_field(field, line_no)?);
            count += 1;
        }
        if count != x_coords.len() {
            return Err(Error::CsvFormat {
                line: line_no,
                msg: format!("row has {count} values, header has {}", x_coords.len()),
            });
        }
    }
    Heatmap::new(x_coords, y_coords, values)
}

/// Two-column CSV of a 1D marginal distribution.
pub fn write_marginal_csv(path: &Path, coord_name: &str, coords: &[f64], masses: &[f64]) -> Result<()> {
    let mut out = format!("{coord_name},mass\n");
    for (c, m) in coords.iter().zip(masses) {
        out.push_str(&fmt(*c));
        out.push(',');
        out.push_str(&fmt(*m));
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

/// Human-readable conservation report.
pub fn write_conservation(path: &Path, report: &ConservationReport) -> Result<()> {
    fs::write(path, format!("{report}\n"))?;
    Ok(())
}

/// Metadata file: comment lines for version, status, and any warnings,
/// followed by the resolved configuration (the body itself parses as a
/// config).
pub fn write_metadata(path: &Path, cfg: &RunConfig, status: &str, warnings: &[String]) -> Result<()> {
    let mut out = String::new();
    out.push_str(&format!("# version: {}\n", env!("CARGO_PKG_VERSION")));
    out.push_str(&format!("# status: {status}\n"));
    for w in warnings {
        out.push_str(&format!("# warning: {w}\n"));
    }
    out.push_str(&serialize_config(cfg));
    fs::write(path, out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::config::parse_config;

    fn temp_dir(tag: &str) -> PathBuf {
        let dir = std::env::temp_dir().join(format!("jtdyn_{tag}_{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        dir
    }

    #[test]
    fn series_csv_round_trips_bit_exact() {
        let dir = temp_dir("series");
        let path = dir.join("series.csv");
        let series = ObservableSeries::new(
            vec![0.0, 0.1, 0.2],
            vec![
                ("x".to_string(), vec![10.0, 9.999800003, -0.123456789012345678]),
                ("y".to_string(), vec![1e-300, 2.2250738585072014e-308, 1.7976931348623157e308]),
            ],
        )
        .unwrap();
        write_series_csv(&path, &series).unwrap();
        let back = read_series_csv(&path).unwrap();
        assert_eq!(series, back);
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("t,x,y\n"));
        fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn series_csv_rejects_malformed_rows() {
        let dir = temp_dir("badcsv");
        let path = dir.join("bad.csv");
        fs::write(&path, "t,x\n0.0,1.0\n0.1\n").unwrap();
        match read_series_csv(&path) {
            Err(Error::CsvFormat { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        fs::write(&path, "x,t\n").unwrap();
        assert!(matches!(read_series_csv(&path), Err(Error::CsvFormat { line: 1, .. })));
        fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn heatmap_emission_and_preview_bytes() {
        let dir = temp_dir("heatmap");
        let hm = Heatmap::new(
            vec![0.0, 1.0],
            vec![10.0, 11.0],
            vec![0.0, 2.0, 2.0, 1.0],
        )
        .unwrap();
        let mut warnings = Vec::new();
        let [csv, pgm] = emit_heatmap(&hm, &dir.join("field"), &mut warnings).unwrap();
        assert!(warnings.is_empty());
        let back = read_heatmap_csv(&csv).unwrap();
        assert_eq!(hm, back);
        let bytes = fs::read(&pgm).unwrap();
        let body = &bytes[bytes.len() - 4..];
        assert_eq!(body, &[0, 255, 255, 128]);
        assert!(bytes.starts_with(b"P5\n2 2\n255\n"));
        fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn zero_heatmap_warns_and_renders_black() {
        let dir = temp_dir("zero");
        let hm = Heatmap::new(vec![0.0, 1.0], vec![0.0, 1.0], vec![0.0; 4]).unwrap();
        let mut warnings = Vec::new();
        let [_, pgm] = emit_heatmap(&hm, &dir.join("blank"), &mut warnings).unwrap();
        assert_eq!(warnings.len(), 1);
        let bytes = fs::read(&pgm).unwrap();
        assert_eq!(&bytes[bytes.len() - 4..], &[0, 0, 0, 0]);
        fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn heatmap_shape_must_match() {
        assert!(Heatmap::new(vec![0.0], vec![0.0, 1.0], vec![0.0]).is_err());
    }

    #[test]
    fn metadata_body_parses_back_to_the_config() {
        let dir = temp_dir("meta");
        let path = dir.join("metadata.txt");
        let mut cfg = RunConfig::default();
        cfg.seed = 42;
        write_metadata(&path, &cfg, "ok", &["something odd".to_string()]).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.contains("# status: ok"));
        assert!(text.contains("# warning: something odd"));
        let parsed = parse_config(&text).unwrap();
        assert_eq!(parsed, cfg);
        fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn marginal_csv_layout() {
        let dir = temp_dir("marginal");
        let path = dir.join("marginal_qy.csv");
        write_marginal_csv(&path, "y", &[-1.0, 0.0, 1.0], &[0.25, 0.5, 0.25]).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("y,mass\n"));
        assert_eq!(text.lines().count(), 4);
        fs::remove_dir_all(&dir).ok();
    }
}
