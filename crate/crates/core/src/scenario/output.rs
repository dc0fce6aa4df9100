//! Recorded time series, CSV files and SVG plots.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use plotters::prelude::*;

use crate::error::{Error, Result};
use crate::threephase::ThreePhase;

/// Column order of every emitted CSV.
pub const CSV_COLUMNS: [&str; 23] = [
    "t",
    "i_a",
    "i_b",
    "i_c",
    "v_a",
    "v_b",
    "v_c",
    "e_a",
    "e_b",
    "e_c",
    "theta1_hat",
    "theta2_hat",
    "theta3_hat",
    "R_hat",
    "L_hat",
    "E_hat",
    "R_true",
    "L_true",
    "E_true",
    "residual_norm",
    "i_obs_err",
    "lambda_min_cum",
    "omega_pll",
];

/// One output row.
///
/// Signals, `theta_hat`, residuals and `lambda_min_cum` are per-unit; the
/// recovered and true `(R, L, E)` are in ohm, henry and volt.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub i: ThreePhase,
    pub v: ThreePhase,
    pub e: ThreePhase,
    pub theta_hat: [f64; 3],
    /// `None` while the estimate is not physical.
    pub estimate: Option<[f64; 3]>,
    pub truth: [f64; 3],
    pub residual_norm: f64,
    pub i_obs_err: Option<f64>,
    pub lambda_min_cum: f64,
    pub omega_pll: Option<f64>,
}

fn cell(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn record(s: &Sample) -> Vec<String> {
    let est = |k: usize| s.estimate.map(|e| e[k]);
    let mut row = vec![s.t.to_string()];
    for p in [s.i, s.v, s.e] {
        row.extend([p.a, p.b, p.c].map(|x| x.to_string()));
    }
    row.extend(s.theta_hat.map(|x| x.to_string()));
    row.extend((0..3).map(|k| cell(est(k))));
    row.extend(s.truth.map(|x| x.to_string()));
    row.push(s.residual_norm.to_string());
    row.push(cell(s.i_obs_err));
    row.push(s.lambda_min_cum.to_string());
    row.push(cell(s.omega_pll));
    row
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    }
}

/// Write the series with a header row; `Display` of `f64` round-trips exactly.
pub fn emit_csv(ts: &[Sample], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(CSV_COLUMNS).map_err(csv_err(path))?;
    for s in ts {
        w.write_record(record(s)).map_err(csv_err(path))?;
    }
    w.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Parse a file written by [`emit_csv`].
pub fn read_csv(path: &Path) -> Result<Vec<Sample>> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let header = r.headers().map_err(csv_err(path))?.clone();
    if header.iter().ne(CSV_COLUMNS) {
        return Err(Error::InvalidScenario(format!(
            "{}: unexpected CSV header",
            path.display()
        )));
    }
    let bad = |row: usize, col: usize| {
        Error::InvalidScenario(format!("{}: row {row}, column {}", path.display(), CSV_COLUMNS[col]))
    };
    let mut out = Vec::new();
    for (n, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_err(path))?;
        let opt = |k: usize| -> Result<Option<f64>> {
            let s = rec.get(k).ok_or_else(|| bad(n, k))?;
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse().map(Some).map_err(|_| bad(n, k))
            }
        };
        let req = |k: usize| opt(k)?.ok_or_else(|| bad(n, k));
        let tp = |k: usize| -> Result<ThreePhase> { Ok(ThreePhase::new(req(k)?, req(k + 1)?, req(k + 2)?)) };
        let estimate = match (opt(13)?, opt(14)?, opt(15)?) {
            (Some(r), Some(l), Some(e)) => Some([r, l, e]),
            _ => None,
        };
        out.push(Sample {
            t: req(0)?,
            i: tp(1)?,
            v: tp(4)?,
            e: tp(7)?,
            theta_hat: [req(10)?, req(11)?, req(12)?],
            estimate,
            truth: [req(16)?, req(17)?, req(18)?],
            residual_norm: req(19)?,
            i_obs_err: opt(20)?,
            lambda_min_cum: req(21)?,
            omega_pll: opt(22)?,
        });
    }
    Ok(out)
}

/// What a figure shows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    /// `R`, `L`, `E` estimates against truth, plus the `lambda_min` trace.
    Estimates,
    /// The `lambda_min` trace only.
    LambdaMin,
}

const PALETTE: [RGBColor; 5] = [
    RGBColor(31, 119, 180),
    RGBColor(214, 39, 40),
    RGBColor(44, 160, 44),
    RGBColor(148, 103, 189),
    RGBColor(255, 127, 14),
];

fn plot_err(path: &Path) -> impl Fn(String) -> Error + '_ {
    move |msg| Error::Plot {
        path: path.to_path_buf(),
        msg,
    }
}

fn range_of(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|x| x.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    let pad = ((hi - lo) * 0.05).max(hi.abs().max(lo.abs()) * 1e-3).max(1e-12);
    (lo - pad, hi + pad)
}

type Area<'a> = DrawingArea<SVGBackend<'a>, plotters::coord::Shift>;

fn panel(
    area: &Area<'_>,
    caption: &str,
    runs: &[(String, Vec<Sample>)],
    value: impl Fn(&Sample) -> Option<f64>,
    truth: Option<&dyn Fn(&Sample) -> f64>,
) -> std::result::Result<(), String> {
    let t_max = runs
        .iter()
        .filter_map(|(_, s)| s.last().map(|x| x.t))
        .fold(0.0f64, f64::max)
        .max(1e-9);
    let all = runs.iter().flat_map(|(_, s)| s.iter());
    let (lo, hi) = match truth {
        Some(tr) => range_of(all.flat_map(|s| [value(s).unwrap_or(f64::NAN), tr(s)])),
        None => range_of(all.filter_map(&value)),
    };
    // clamp runaway transients so the truth stays readable
    let (lo, hi) = match truth {
        Some(tr) => {
            let (tl, th) = range_of(runs.iter().flat_map(|(_, s)| s.iter()).map(tr));
            let span = (th - tl).max(th.abs() * 0.5);
            (lo.max(tl - 2.0 * span), hi.min(th + 2.0 * span))
        }
        None => (lo, hi),
    };
    let mut chart = ChartBuilder::on(area)
        .caption(caption, ("sans-serif", 16))
        .margin(8)
        .x_label_area_size(28)
        .y_label_area_size(70)
        .build_cartesian_2d(0.0..t_max, lo..hi)
        .map_err(|e| e.to_string())?;
    chart
        .configure_mesh()
        .x_desc("t [s]")
        .light_line_style(WHITE)
        .draw()
        .map_err(|e| e.to_string())?;
    for (k, (label, series)) in runs.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let points: Vec<(f64, f64)> = series
            .iter()
            .filter_map(|s| value(s).map(|y| (s.t, y.clamp(lo, hi))))
            .collect();
        chart
            .draw_series(LineSeries::new(points, color.stroke_width(1)))
            .map_err(|e| e.to_string())?
            .label(label.as_str())
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 16, y)], color));
    }
    if let Some(tr) = truth {
        // black when every run shares one truth, otherwise in the run's colour
        let first: Vec<f64> = runs
            .first()
            .map(|(_, s)| s.iter().map(tr).collect())
            .unwrap_or_default();
        let shared = runs.iter().all(|(_, s)| s.iter().map(tr).eq(first.iter().copied()));
        for (k, (_, series)) in runs.iter().enumerate().take(if shared { 1 } else { runs.len() }) {
            let color = if shared { BLACK } else { PALETTE[k % PALETTE.len()] };
            let points: Vec<(f64, f64)> = series.iter().map(|s| (s.t, tr(s))).collect();
            chart
                .draw_series(DashedLineSeries::new(points, 2, 4, color.stroke_width(1)))
                .map_err(|e| e.to_string())?;
        }
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()
        .map_err(|e| e.to_string())?;
    Ok(())
}

/// One SVG with one curve per run; truth is drawn dotted.
pub fn emit_plot(runs: &[(String, Vec<Sample>)], kind: PlotKind, title: &str, path: &Path) -> Result<()> {
    let err = plot_err(path);
    let height = match kind {
        PlotKind::Estimates => 1000,
        PlotKind::LambdaMin => 360,
    };
    {
        let root = SVGBackend::new(path, (900, height)).into_drawing_area();
        root.fill(&WHITE).map_err(|e| err(e.to_string()))?;
        let root = root.titled(title, ("sans-serif", 20)).map_err(|e| err(e.to_string()))?;
        match kind {
            PlotKind::Estimates => {
                let areas = root.split_evenly((4, 1));
                let scale = [(1.0, "R [ohm]"), (1e3, "L [mH]"), (1e-3, "E [kV]")];
                for (k, (factor, caption)) in scale.into_iter().enumerate() {
                    let truth = move |s: &Sample| s.truth[k] * factor;
                    panel(
                        &areas[k],
                        caption,
                        runs,
                        |s| s.estimate.map(|e| e[k] * factor),
                        Some(&truth),
                    )
                    .map_err(&err)?;
                }
                panel(
                    &areas[3],
                    "lambda_min of the reduced Gram [pu]",
                    runs,
                    |s| Some(s.lambda_min_cum),
                    None,
                )
                .map_err(&err)?;
            }
            PlotKind::LambdaMin => {
                panel(
                    &root,
                    "lambda_min of the reduced Gram [pu]",
                    runs,
                    |s| Some(s.lambda_min_cum),
                    None,
                )
                .map_err(&err)?;
            }
        }
        root.present().map_err(|e| err(e.to_string()))?;
    }
    Ok(())
}

/// Plain-text run report.
pub fn write_text(path: &Path, text: &str) -> Result<()> {
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut f = BufWriter::new(File::create(path).map_err(io)?);
    f.write_all(text.as_bytes()).map_err(io)?;
    f.flush().map_err(io)
}
