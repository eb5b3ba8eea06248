//! Optional SVG figures. The CSV files are the data of record; these are
//! quick-look renderings of the same numbers.

use std::path::Path;

use plotters::prelude::*;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mark {
    Line,
    Points,
}

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub mark: Mark,
}

impl Series {
    pub fn line(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Self {
            label: label.into(),
            points,
            mark: Mark::Line,
        }
    }

    pub fn points(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Self {
            label: label.into(),
            points,
            mark: Mark::Points,
        }
    }
}

pub struct Axes<'a> {
    pub title: &'a str,
    pub x_label: &'a str,
    pub y_label: &'a str,
    /// Plot log10 of both coordinates.
    pub log: bool,
}

fn fail(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Output(format!("{}: {e}", path.display()))
}

fn bounds(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        });
    if !lo.is_finite() {
        return None;
    }
    let pad = if hi > lo {
        0.04 * (hi - lo)
    } else {
        0.5 * lo.abs().max(1.0)
    };
    Some((lo - pad, hi + pad))
}

const PALETTE: [RGBColor; 8] = [
    RGBColor(31, 119, 180),
    RGBColor(255, 127, 14),
    RGBColor(44, 160, 44),
    RGBColor(214, 39, 40),
    RGBColor(148, 103, 189),
    RGBColor(140, 86, 75),
    RGBColor(227, 119, 194),
    RGBColor(127, 127, 127),
];

pub fn xy(path: &Path, axes: &Axes, series: &[Series]) -> Result<(), CliError> {
    let map = |(x, y): (f64, f64)| {
        if axes.log {
            (x.log10(), y.log10())
        } else {
            (x, y)
        }
    };
    let data: Vec<Vec<(f64, f64)>> = series
        .iter()
        .map(|s| {
            s.points
                .iter()
                .map(|&p| map(p))
                .filter(|(x, y)| x.is_finite() && y.is_finite())
                .collect()
        })
        .collect();
    let all = || data.iter().flatten();
    let (Some(xr), Some(yr)) = (bounds(all().map(|p| p.0)), bounds(all().map(|p| p.1))) else {
        return Ok(());
    };
    let (x_label, y_label) = if axes.log {
        (
            format!("log10 {}", axes.x_label),
            format!("log10 {}", axes.y_label),
        )
    } else {
        (axes.x_label.to_string(), axes.y_label.to_string())
    };

    let root = SVGBackend::new(path, (800, 560)).into_drawing_area();
    root.fill(&WHITE).map_err(|e| fail(path, e))?;
    let mut chart = ChartBuilder::on(&root)
        .caption(axes.title, ("sans-serif", 22))
        .margin(16)
        .x_label_area_size(44)
        .y_label_area_size(64)
        .build_cartesian_2d(xr.0..xr.1, yr.0..yr.1)
        .map_err(|e| fail(path, e))?;
    chart
        .configure_mesh()
        .x_desc(x_label)
        .y_desc(y_label)
        .draw()
        .map_err(|e| fail(path, e))?;
    for (i, (s, pts)) in series.iter().zip(&data).enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let anno = match s.mark {
            Mark::Line => chart
                .draw_series(LineSeries::new(pts.iter().copied(), color.stroke_width(2)))
                .map_err(|e| fail(path, e))?,
            Mark::Points => chart
                .draw_series(pts.iter().map(|&p| Circle::new(p, 4, color.filled())))
                .map_err(|e| fail(path, e))?,
        };
        if !s.label.is_empty() {
            anno.label(s.label.clone()).legend(move |(x, y)| {
                PathElement::new(vec![(x, y), (x + 18, y)], color.stroke_width(2))
            });
        }
    }
    if series.iter().any(|s| !s.label.is_empty()) {
        chart
            .configure_series_labels()
            .background_style(WHITE.mix(0.85))
            .border_style(BLACK)
            .draw()
            .map_err(|e| fail(path, e))?;
    }
    root.present().map_err(|e| fail(path, e))
}

fn heat_color(v: f64) -> RGBColor {
    // Dark blue through yellow.
    let v = v.clamp(0.0, 1.0);
    let r = (255.0 * v.powf(0.8)) as u8;
    let g = (230.0 * v.powf(1.3)) as u8;
    let b = (120.0 * (1.0 - v) + 40.0) as u8;
    RGBColor(r, g, b)
}

const MAX_CELLS: usize = 240;

/// `z[i][j]` is drawn at (`xs[j]`, `ys[i]`), scaled by the maximum of `z`.
/// Both directions are thinned to at most `MAX_CELLS` cells.
pub fn heatmap(
    path: &Path,
    axes: &Axes,
    xs: &[f64],
    ys: &[f64],
    z: &[Vec<f64>],
) -> Result<(), CliError> {
    let sx = xs.len().div_ceil(MAX_CELLS).max(1);
    let sy = ys.len().div_ceil(MAX_CELLS).max(1);
    let xs: Vec<f64> = xs.iter().step_by(sx).copied().collect();
    let rows: Vec<usize> = (0..ys.len().min(z.len())).step_by(sy).collect();
    let ys: Vec<f64> = rows.iter().map(|&i| ys[i]).collect();
    let z: Vec<Vec<f64>> = rows
        .iter()
        .map(|&i| z[i].iter().step_by(sx).copied().collect())
        .collect();
    if xs.len() < 2 || ys.is_empty() {
        return Ok(());
    }
    let dy = if ys.len() > 1 {
        (ys[ys.len() - 1] - ys[0]) / (ys.len() - 1) as f64
    } else {
        1.0
    };
    let dx = (xs[xs.len() - 1] - xs[0]) / (xs.len() - 1) as f64;
    let z_max = z.iter().flatten().copied().fold(0.0, f64::max);
    let scale = if z_max > 0.0 { 1.0 / z_max } else { 1.0 };

    let root = SVGBackend::new(path, (800, 560)).into_drawing_area();
    root.fill(&WHITE).map_err(|e| fail(path, e))?;
    let y_lo = ys[0] - 0.5 * dy;
    let y_hi = ys[ys.len() - 1] + 0.5 * dy;
    let mut chart = ChartBuilder::on(&root)
        .caption(axes.title, ("sans-serif", 22))
        .margin(16)
        .x_label_area_size(44)
        .y_label_area_size(64)
        .build_cartesian_2d(
            xs[0] - 0.5 * dx..xs[xs.len() - 1] + 0.5 * dx,
            y_lo.min(y_hi)..y_hi.max(y_lo),
        )
        .map_err(|e| fail(path, e))?;
    chart
        .configure_mesh()
        .disable_mesh()
        .x_desc(axes.x_label)
        .y_desc(axes.y_label)
        .draw()
        .map_err(|e| fail(path, e))?;
    let mut cells = Vec::with_capacity(xs.len() * ys.len());
    for (&y, row) in ys.iter().zip(&z) {
        for (&x, &v) in xs.iter().zip(row) {
            cells.push(Rectangle::new(
                [(x - 0.5 * dx, y - 0.5 * dy), (x + 0.5 * dx, y + 0.5 * dy)],
                heat_color(v * scale).filled(),
            ));
        }
    }
    chart.draw_series(cells).map_err(|e| fail(path, e))?;
    root.present().map_err(|e| fail(path, e))
}
