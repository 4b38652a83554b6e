//! Deterministic CSV and JSON writers.

use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::Result;
use crate::fixedpoint::{FixedPoint, IntervalScan};
use crate::geometry::Grid;

/// 17 significant digits in scientific notation.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn write_rows(path: &Path, header: &[&str], rows: Vec<Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// `pk_curve_k.csv`: successful samples and failed solves, ordered by α.
pub fn write_pk_curve(path: &Path, scan: &IntervalScan) -> Result<()> {
    let mut rows: Vec<(f64, Vec<String>)> = scan
        .samples
        .iter()
        .map(|s| {
            (
                s.alpha,
                vec![
                    num(s.alpha),
                    num(s.pk),
                    num(s.c_alpha),
                    num(s.residual),
                    num(s.pk_floor),
                    num(s.pk_upper_bound),
                    "ok".to_string(),
                ],
            )
        })
        .collect();
    for (alpha, msg) in &scan.failures {
        let nan = num(f64::NAN);
        rows.push((
            *alpha,
            vec![
                num(*alpha),
                nan.clone(),
                nan.clone(),
                nan.clone(),
                nan.clone(),
                nan,
                format!("failed: {msg}"),
            ],
        ));
    }
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    write_rows(
        path,
        &[
            "alpha",
            "pk",
            "c_alpha",
            "residual",
            "pk_floor",
            "pk_upper_bound",
            "status",
        ],
        rows.into_iter().map(|(_, r)| r).collect(),
    )
}

pub fn write_bundle(path: &Path, points: &[FixedPoint]) -> Result<()> {
    let rows = points
        .iter()
        .map(|p| {
            vec![
                p.k.to_string(),
                num(p.alpha_star),
                num(p.lp_norm),
                num(p.nonlocal_residual),
            ]
        })
        .collect();
    write_rows(path, &["k", "alpha_star", "lp_norm", "residual"], rows)
}

fn coordinate_header(grid: &Grid) -> Vec<&'static str> {
    if grid.dim() == 1 {
        vec!["x"]
    } else {
        vec!["x", "y"]
    }
}

/// Node coordinates followed by one column per field.
pub fn write_profile(path: &Path, grid: &Grid, names: &[&str], fields: &[&[f64]]) -> Result<()> {
    let mut header = coordinate_header(grid);
    header.extend_from_slice(names);
    let rows = (0..grid.len())
        .map(|i| {
            grid.node(i)
                .into_iter()
                .chain(fields.iter().map(|f| f[i]))
                .map(num)
                .collect()
        })
        .collect();
    write_rows(path, &header, rows)
}
