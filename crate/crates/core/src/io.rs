//! File formats: streamline samples in and plot-ready CSV out.
//!
//! CSV is the canonical interchange format; JSON is accepted for streamline
//! input only. All floating-point output is printed with 17 significant
//! digits so values round-trip exactly.
//!
//! Input formats for sampled streamlines:
//!
//! - native CSV, columns `line_id,k,x,y[,z],vx,vy[,vz]`;
//! - curve-export CSV as written by the `curves` command, columns
//!   `s,x,y[,z],dx,dy[,dz]` (one streamline; the derivative columns are
//!   rescaled by the knot spacing so each consecutive couple is
//!   parametrized over its own unit interval);
//! - JSON: an array of `{"points": [[...]], "velocities": [[...]]}`.

use std::io::Write;
use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

use crate::batch::SpeedupReport;
use crate::geometry::{GeometryError, PolylineSample, StreamlineCurve};
use crate::hermite::HermiteSpline;
use crate::ode::OdeSolution;

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("line {line}: {message}")]
    Malformed { line: u64, message: String },
    #[error("unrecognized header '{0}' (expected line_id,k,x,y[,z],vx,vy[,vz] or s,x,y[,z],dx,dy[,dz])")]
    BadHeader(String),
    #[error("streamline {line_id}: {source}")]
    InvalidStreamline {
        line_id: u64,
        source: GeometryError,
    },
    #[error("no streamlines found in input")]
    Empty,
}

/// 17 significant digits; guarantees exact f64 round-trips.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_field(field: &str, line: u64) -> Result<f64, IoError> {
    field
        .trim()
        .parse::<f64>()
        .map_err(|e| IoError::Malformed {
            line,
            message: format!("bad number '{field}': {e}"),
        })
}

fn record_line(record: &csv::StringRecord) -> u64 {
    record.position().map(|p| p.line()).unwrap_or(0)
}

#[derive(Debug, Deserialize)]
struct StreamlineJson {
    points: Vec<Vec<f64>>,
    velocities: Vec<Vec<f64>>,
}

/// Read sampled streamlines from CSV or JSON (dispatched on the `.json`
/// extension).
pub fn read_streamlines(path: &Path) -> Result<Vec<PolylineSample>, IoError> {
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
        read_streamlines_json(path)
    } else {
        read_streamlines_csv(path)
    }
}

fn read_streamlines_json(path: &Path) -> Result<Vec<PolylineSample>, IoError> {
    let text = std::fs::read_to_string(path)?;
    let raw: Vec<StreamlineJson> = serde_json::from_str(&text)?;
    if raw.is_empty() {
        return Err(IoError::Empty);
    }
    raw.into_iter()
        .enumerate()
        .map(|(i, line)| {
            PolylineSample::new(line.points, line.velocities).map_err(|source| {
                IoError::InvalidStreamline {
                    line_id: i as u64,
                    source,
                }
            })
        })
        .collect()
}

enum CsvLayout {
    /// line_id,k + dim coordinates + dim velocities
    Native { dim: usize },
    /// s + dim coordinates + dim derivatives (single curve export)
    CurveExport { dim: usize },
}

fn detect_layout(header: &csv::StringRecord) -> Result<CsvLayout, IoError> {
    let cols: Vec<String> = header.iter().map(|c| c.trim().to_ascii_lowercase()).collect();
    let native2 = ["line_id", "k", "x", "y", "vx", "vy"];
    let native3 = ["line_id", "k", "x", "y", "z", "vx", "vy", "vz"];
    let curve2 = ["s", "x", "y", "dx", "dy"];
    let curve3 = ["s", "x", "y", "z", "dx", "dy", "dz"];
    if cols == native2 {
        Ok(CsvLayout::Native { dim: 2 })
    } else if cols == native3 {
        Ok(CsvLayout::Native { dim: 3 })
    } else if cols == curve2 {
        Ok(CsvLayout::CurveExport { dim: 2 })
    } else if cols == curve3 {
        Ok(CsvLayout::CurveExport { dim: 3 })
    } else {
        Err(IoError::BadHeader(cols.join(",")))
    }
}

fn read_streamlines_csv(path: &Path) -> Result<Vec<PolylineSample>, IoError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    let layout = detect_layout(reader.headers()?)?;
    match layout {
        CsvLayout::Native { dim } => read_native_rows(&mut reader, dim),
        CsvLayout::CurveExport { dim } => read_curve_export_rows(&mut reader, dim),
    }
}

fn read_native_rows(
    reader: &mut csv::Reader<std::fs::File>,
    dim: usize,
) -> Result<Vec<PolylineSample>, IoError> {
    use std::collections::BTreeMap;
    let mut lines: BTreeMap<u64, Vec<(u64, Vec<f64>, Vec<f64>)>> = BTreeMap::new();
    for record in reader.records() {
        let record = record?;
        let line = record_line(&record);
        if record.len() != 2 + 2 * dim {
            return Err(IoError::Malformed {
                line,
                message: format!("expected {} fields, got {}", 2 + 2 * dim, record.len()),
            });
        }
        let line_id = record[0].parse::<u64>().map_err(|e| IoError::Malformed {
            line,
            message: format!("bad line_id '{}': {e}", &record[0]),
        })?;
        let k = record[1].parse::<u64>().map_err(|e| IoError::Malformed {
            line,
            message: format!("bad sample index '{}': {e}", &record[1]),
        })?;
        let mut point = Vec::with_capacity(dim);
        let mut velocity = Vec::with_capacity(dim);
        for c in 0..dim {
            point.push(parse_field(&record[2 + c], line)?);
            velocity.push(parse_field(&record[2 + dim + c], line)?);
        }
        lines.entry(line_id).or_default().push((k, point, velocity));
    }
    if lines.is_empty() {
        return Err(IoError::Empty);
    }
    lines
        .into_iter()
        .map(|(line_id, mut rows)| {
            rows.sort_by_key(|(k, _, _)| *k);
            if rows.windows(2).any(|w| w[0].0 == w[1].0) {
                return Err(IoError::Malformed {
                    line: 0,
                    message: format!("streamline {line_id} has duplicate sample indices"),
                });
            }
            let points = rows.iter().map(|(_, p, _)| p.clone()).collect();
            let velocities = rows.into_iter().map(|(_, _, v)| v).collect();
            PolylineSample::new(points, velocities)
                .map_err(|source| IoError::InvalidStreamline { line_id, source })
        })
        .collect()
}

fn read_curve_export_rows(
    reader: &mut csv::Reader<std::fs::File>,
    dim: usize,
) -> Result<Vec<PolylineSample>, IoError> {
    let mut params = Vec::new();
    let mut points = Vec::new();
    let mut derivs = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record_line(&record);
        if record.len() != 1 + 2 * dim {
            return Err(IoError::Malformed {
                line,
                message: format!("expected {} fields, got {}", 1 + 2 * dim, record.len()),
            });
        }
        params.push(parse_field(&record[0], line)?);
        let mut point = Vec::with_capacity(dim);
        let mut deriv = Vec::with_capacity(dim);
        for c in 0..dim {
            point.push(parse_field(&record[1 + c], line)?);
            deriv.push(parse_field(&record[1 + dim + c], line)?);
        }
        points.push(point);
        derivs.push(deriv);
    }
    if points.len() < 2 {
        return Err(IoError::Empty);
    }
    // rescale the curve derivatives to the per-couple unit parametrization
    let spacing = (params[params.len() - 1] - params[0]) / (params.len() - 1) as f64;
    let velocities = derivs
        .into_iter()
        .map(|d| d.into_iter().map(|x| x * spacing).collect())
        .collect();
    let sample = PolylineSample::new(points, velocities)
        .map_err(|source| IoError::InvalidStreamline { line_id: 0, source })?;
    Ok(vec![sample])
}

/// Pressure samples as CSV with columns `s,q`.
pub fn read_pressure_samples(path: &Path) -> Result<(Vec<f64>, Vec<f64>), IoError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    let mut s_values = Vec::new();
    let mut q_values = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record_line(&record);
        if record.len() != 2 {
            return Err(IoError::Malformed {
                line,
                message: format!("expected 2 fields (s,q), got {}", record.len()),
            });
        }
        s_values.push(parse_field(&record[0], line)?);
        q_values.push(parse_field(&record[1], line)?);
    }
    Ok((s_values, q_values))
}

fn axis_names(dim: usize) -> &'static [&'static str] {
    if dim == 2 {
        &["x", "y"]
    } else {
        &["x", "y", "z"]
    }
}

/// Sampled curve as CSV: `s,x,y[,z],dx,dy[,dz]` at `n` uniform parameters.
pub fn write_curve_csv(out: &mut impl Write, curve: &StreamlineCurve, n: usize) -> Result<(), IoError> {
    let axes = axis_names(curve.dim());
    let coords = axes.join(",");
    let derivs: Vec<String> = axes.iter().map(|a| format!("d{a}")).collect();
    writeln!(out, "s,{},{}", coords, derivs.join(","))?;
    for (s, point, deriv) in curve.sample_uniform(n) {
        let mut fields = vec![fmt_float(s)];
        fields.extend(point.iter().map(|v| fmt_float(*v)));
        fields.extend(deriv.iter().map(|v| fmt_float(*v)));
        writeln!(out, "{}", fields.join(","))?;
    }
    Ok(())
}

/// Cubic coefficients as CSV: one row per (streamline, segment, component)
/// with the quadruple `a3,a2,a1,a0`.
pub fn write_spline_coeffs_csv(
    out: &mut impl Write,
    splines: &[HermiteSpline],
) -> Result<(), IoError> {
    writeln!(out, "line_id,segment,component,a3,a2,a1,a0")?;
    for (line_id, spline) in splines.iter().enumerate() {
        for (segment, cubic) in spline.segments().iter().enumerate() {
            for (component, quad) in cubic.coeffs().iter().enumerate() {
                writeln!(
                    out,
                    "{line_id},{segment},{component},{},{},{},{}",
                    fmt_float(quad[0]),
                    fmt_float(quad[1]),
                    fmt_float(quad[2]),
                    fmt_float(quad[3]),
                )?;
            }
        }
    }
    Ok(())
}

/// Splines sampled at `resolution` uniform global parameters:
/// `line_id,s,x,y[,z],dx,dy[,dz]`.
pub fn write_spline_samples_csv(
    out: &mut impl Write,
    splines: &[HermiteSpline],
    resolution: usize,
) -> Result<(), IoError> {
    let dim = splines.first().map(|sp| sp.dim()).unwrap_or(2);
    let axes = axis_names(dim);
    let derivs: Vec<String> = axes.iter().map(|a| format!("d{a}")).collect();
    writeln!(out, "line_id,s,{},{}", axes.join(","), derivs.join(","))?;
    let n = resolution.max(2);
    for (line_id, spline) in splines.iter().enumerate() {
        for i in 0..n {
            let s = i as f64 / (n - 1) as f64;
            let point = spline.eval(s).expect("s within [0,1]");
            let deriv = spline.derivative(s).expect("s within [0,1]");
            let mut fields = vec![line_id.to_string(), fmt_float(s)];
            fields.extend(point.iter().map(|v| fmt_float(*v)));
            fields.extend(deriv.iter().map(|v| fmt_float(*v)));
            writeln!(out, "{}", fields.join(","))?;
        }
    }
    Ok(())
}

/// Solution trajectories as CSV blocks: `line_id,s,u,udot,segment_index`.
pub fn write_solutions_csv(
    out: &mut impl Write,
    solutions: &[(usize, &OdeSolution)],
) -> Result<(), IoError> {
    writeln!(out, "line_id,s,u,udot,segment_index")?;
    for (line_id, solution) in solutions {
        for sample in solution.samples() {
            writeln!(
                out,
                "{line_id},{},{},{},{}",
                fmt_float(sample.s),
                fmt_float(sample.u),
                fmt_float(sample.udot),
                sample.segment,
            )?;
        }
    }
    Ok(())
}

/// Speedup rows as CSV: `strategy,workers,M,elapsed_ms,speedup`. With
/// `include_timings = false` the timing fields are excluded so the output
/// bytes are reproducible.
pub fn write_speedup_csv(
    out: &mut impl Write,
    reports: &[SpeedupReport],
    include_timings: bool,
) -> Result<(), IoError> {
    if include_timings {
        writeln!(out, "strategy,workers,M,elapsed_ms,speedup")?;
    } else {
        writeln!(out, "strategy,workers,M")?;
    }
    for report in reports {
        for row in &report.rows {
            if include_timings {
                writeln!(
                    out,
                    "{},{},{},{},{}",
                    row.strategy.label(),
                    row.workers,
                    report.m,
                    fmt_float(row.elapsed.as_secs_f64() * 1e3),
                    fmt_float(row.speedup),
                )?;
            } else {
                writeln!(out, "{},{},{}", row.strategy.label(), row.workers, report.m)?;
            }
        }
    }
    Ok(())
}

/// Human-readable speedup table shaped like the reference tables: one row
/// per M, one speedup column per non-serial strategy.
pub fn format_speedup_table(reports: &[SpeedupReport]) -> String {
    let mut text = String::new();
    let strategies: Vec<String> = reports
        .first()
        .map(|r| {
            r.rows
                .iter()
                .filter(|row| row.strategy.label() != "serial")
                .map(|row| row.strategy.label())
                .collect()
        })
        .unwrap_or_default();
    text.push_str(&format!("{:>8}", "M"));
    for label in &strategies {
        text.push_str(&format!("  {label:>18}"));
    }
    text.push('\n');
    for report in reports {
        text.push_str(&format!("{:>8}", report.m));
        for label in &strategies {
            let value = report
                .rows
                .iter()
                .find(|row| &row.strategy.label() == label)
                .map(|row| {
                    let mark = if row.unreliable { "~" } else { "" };
                    format!("{mark}{:.2}", row.speedup)
                })
                .unwrap_or_else(|| "-".into());
            text.push_str(&format!("  {value:>18}"));
        }
        text.push('\n');
    }
    text
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::make_tooth;

    fn write_temp(name: &str, contents: &str) -> std::path::PathBuf {
        let path = std::env::temp_dir().join(format!("streamflow-io-{}-{name}", std::process::id()));
        std::fs::write(&path, contents).unwrap();
        path
    }

    #[test]
    fn float_round_trip() {
        for v in [1.0, -0.1, std::f64::consts::PI, 1.5e-300, 3.0_f64.sqrt()] {
            let parsed: f64 = fmt_float(v).parse().unwrap();
            assert_eq!(parsed.to_bits(), v.to_bits());
        }
    }

    #[test]
    fn native_csv_round_trip() {
        let path = write_temp(
            "native.csv",
            "line_id,k,x,y,vx,vy\n\
             0,0,0.0,0.0,1.0,0.0\n\
             0,1,1.0,0.0,1.0,0.0\n\
             1,0,0.0,1.0,0.5,0.5\n\
             1,1,1.0,2.0,0.5,0.5\n",
        );
        let lines = read_streamlines(&path).unwrap();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0].len(), 2);
        assert_eq!(lines[1].points()[1], vec![1.0, 2.0]);
        std::fs::remove_file(path).ok();
    }

    #[test]
    fn malformed_row_reports_line() {
        let path = write_temp(
            "bad.csv",
            "line_id,k,x,y,vx,vy\n0,0,0.0,0.0,1.0,0.0\n0,1,oops,0.0,1.0,0.0\n",
        );
        match read_streamlines(&path).unwrap_err() {
            IoError::Malformed { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected error {other}"),
        }
        std::fs::remove_file(path).ok();
    }

    #[test]
    fn duplicate_points_rejected_with_id() {
        let path = write_temp(
            "dup.csv",
            "line_id,k,x,y,vx,vy\n7,0,0.0,0.0,1.0,0.0\n7,1,0.0,0.0,1.0,0.0\n",
        );
        match read_streamlines(&path).unwrap_err() {
            IoError::InvalidStreamline { line_id: 7, source } => {
                assert!(matches!(source, GeometryError::DuplicatePoint { index: 0 }));
            }
            other => panic!("unexpected error {other}"),
        }
        std::fs::remove_file(path).ok();
    }

    #[test]
    fn curve_export_reads_back() {
        let tooth = make_tooth(1.0).unwrap();
        let mut buffer = Vec::new();
        write_curve_csv(&mut buffer, &tooth, 20).unwrap();
        let path = write_temp("curve.csv", std::str::from_utf8(&buffer).unwrap());
        let lines = read_streamlines(&path).unwrap();
        assert_eq!(lines.len(), 1);
        assert_eq!(lines[0].len(), 20);
        // knot positions survive the round trip exactly
        let last = lines[0].points().last().unwrap();
        assert_eq!(last[0], tooth.eval(1.5 * std::f64::consts::PI)[0]);
        std::fs::remove_file(path).ok();
    }

    #[test]
    fn json_input() {
        let path = write_temp(
            "lines.json",
            r#"[{"points": [[0.0,0.0],[1.0,0.5]], "velocities": [[1.0,0.0],[1.0,1.0]]}]"#,
        );
        let lines = read_streamlines(&path).unwrap();
        assert_eq!(lines.len(), 1);
        assert_eq!(lines[0].velocities()[1], vec![1.0, 1.0]);
        std::fs::remove_file(path).ok();
    }

    #[test]
    fn unknown_header_rejected() {
        let path = write_temp("hdr.csv", "a,b,c\n1,2,3\n");
        assert!(matches!(
            read_streamlines(&path).unwrap_err(),
            IoError::BadHeader(_)
        ));
        std::fs::remove_file(path).ok();
    }
}
