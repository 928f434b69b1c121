//! CSV, JSON and SVG output.
//!
//! Floating-point values in CSV files are written with 17 significant digits
//! (`{:.16e}`), which round-trips every `f64` exactly.

use std::io::{BufRead, Write};

use serde::Serialize;

use crate::attractor::SweepRow;
use crate::error::{QsoError, Result};
use crate::simplex::SimplexPoint;

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn coord_header(m: usize) -> String {
    (1..=m).map(|i| format!("x{i}")).collect::<Vec<_>>().join(",")
}

fn coord_fields(p: &SimplexPoint) -> String {
    p.coords().iter().map(|&c| num(c)).collect::<Vec<_>>().join(",")
}

/// Trajectory or Cesàro rows with header `n,x1,x2,x3`.
pub fn write_trajectory_csv<W: Write>(mut w: W, points: &[SimplexPoint]) -> Result<()> {
    let m = points.first().map_or(3, SimplexPoint::dim);
    writeln!(w, "n,{}", coord_header(m))?;
    for (n, p) in points.iter().enumerate() {
        writeln!(w, "{n},{}", coord_fields(p))?;
    }
    Ok(())
}

/// Attractor samples with header `x1,x2,x3`.
pub fn write_cloud_csv<W: Write>(mut w: W, points: &[SimplexPoint]) -> Result<()> {
    let m = points.first().map_or(3, SimplexPoint::dim);
    writeln!(w, "{}", coord_header(m))?;
    for p in points {
        writeln!(w, "{}", coord_fields(p))?;
    }
    Ok(())
}

pub fn write_sweep_csv<W: Write>(mut w: W, rows: &[SweepRow]) -> Result<()> {
    writeln!(w, "alpha,components,lyapunov,min_coord,diameter,verdict")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            num(r.alpha),
            r.components,
            num(r.lyapunov),
            num(r.min_coord),
            num(r.diameter),
            r.verdict
        )?;
    }
    Ok(())
}

/// Reads the coordinates back from a trajectory or cloud CSV. Columns named
/// `x1`, `x2`, `x3` are used; anything else is ignored.
pub fn read_points_csv<R: BufRead>(r: R) -> Result<Vec<SimplexPoint>> {
    let mut lines = r.lines();
    let header = lines.next().ok_or_else(|| QsoError::Invalid("empty CSV".into()))??;
    let cols: Vec<usize> =
        header.split(',').enumerate().filter(|(_, h)| matches!(h.trim(), "x1" | "x2" | "x3")).map(|(i, _)| i).collect();
    if !(2..=3).contains(&cols.len()) {
        return Err(QsoError::Invalid(format!("CSV header `{header}` has no coordinate columns")));
    }
    let mut out = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let mut coords = [0.0; 3];
        for (k, &c) in cols.iter().enumerate() {
            let f = fields.get(c).ok_or_else(|| QsoError::Invalid(format!("line {}: missing column", lineno + 2)))?;
            coords[k] = f.trim().parse().map_err(|e| QsoError::Invalid(format!("line {}: {e}", lineno + 2)))?;
        }
        let p = SimplexPoint::new(&coords[..cols.len()])
            .map_err(|e| QsoError::Invalid(format!("line {}: {e}", lineno + 2)))?;
        // keep the values exactly as written
        out.push(SimplexPoint::from_array_unchecked(coords, p.dim()));
    }
    Ok(out)
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// Scatter plot of points of S² in an equilateral triangle with `e_1` at the
/// lower left, `e_2` at the lower right and `e_3` at the top.
pub fn render_svg(points: &[SimplexPoint], width: u32) -> String {
    let w = width.max(50) as f64;
    let margin = 0.05 * w;
    let side = w - 2.0 * margin;
    let height = side * 3f64.sqrt() / 2.0 + 2.0 * margin;
    let to_svg = |u: f64, v: f64| (margin + u * side, height - margin - v * side);
    let mut s = String::new();
    s.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.0}\" height=\"{height:.0}\" viewBox=\"0 0 {w:.3} {height:.3}\">\n"
    ));
    let corners = [(0.0, 0.0), (1.0, 0.0), (0.5, 3f64.sqrt() / 2.0)];
    let pts: Vec<String> = corners
        .iter()
        .map(|&(u, v)| {
            let (x, y) = to_svg(u, v);
            format!("{x:.3},{y:.3}")
        })
        .collect();
    s.push_str(&format!(
        "<polygon class=\"simplex\" points=\"{}\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n",
        pts.join(" ")
    ));
    let r = (side / 800.0).max(0.5);
    s.push_str("<g class=\"samples\" fill=\"black\">\n");
    for p in points {
        let (u, v) = p.planar();
        let (x, y) = to_svg(u, v);
        s.push_str(&format!("<circle cx=\"{x:.3}\" cy=\"{y:.3}\" r=\"{r:.3}\"/>\n"));
    }
    s.push_str("</g>\n</svg>\n");
    s
}
