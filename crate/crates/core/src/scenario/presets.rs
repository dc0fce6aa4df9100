//! Canonical scenarios, figure presets, and the file-writing drivers behind the CLI.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::config::{EstimatorKind, EventSection, ScenarioFile, SimConfig};
use super::output::{emit_csv, emit_plot, write_text, PlotKind};
use super::run::{run, RunResult};
use super::summary::{RunSummary, PARAM_NAMES};
use crate::error::{Error, Result};

/// Gradient-descent gains used as the detuned reference: `alpha = gamma_P = 0`
/// with a learning gain ten times the composite default.
pub const DETUNED_GD_GAMMA_I: f64 = 1e4;

/// SCR 3 -> 1.5 at 1 s, 2 s long.
pub fn scenario_a() -> ScenarioFile {
    let mut f = ScenarioFile {
        name: Some("scenario-a".into()),
        ..Default::default()
    };
    f.sim.duration_s = 2.0;
    f.push_event(EventSection {
        time_s: 1.0,
        set_scr: Some(1.5),
        ..Default::default()
    });
    f
}

/// E x 0.9 at 2 s, 3 s long.
pub fn scenario_b() -> ScenarioFile {
    let mut f = ScenarioFile {
        name: Some("scenario-b".into()),
        ..Default::default()
    };
    f.sim.duration_s = 3.0;
    f.push_event(EventSection {
        time_s: 2.0,
        scale_e: Some(0.9),
        ..Default::default()
    });
    f
}

/// Reduced-LRE scenario: SCR 3 -> 1.5 and X/R 5 -> `xr_after` at 1 s, E x 0.9 at 2 s.
pub fn scenario_reduced(xr_after: f64) -> ScenarioFile {
    let mut f = ScenarioFile {
        name: Some(format!("reduced-xr{xr_after}")),
        ..Default::default()
    };
    f.sim.duration_s = 3.0;
    f.estimator.kind = EstimatorKind::Reduced;
    f.estimator.assumed_xr = 5.0;
    f.push_event(EventSection {
        time_s: 1.0,
        set_scr: Some(1.5),
        ..Default::default()
    });
    f.push_event(EventSection {
        time_s: 1.0,
        set_xr_ratio: Some(xr_after),
        ..Default::default()
    });
    f.push_event(EventSection {
        time_s: 2.0,
        scale_e: Some(0.9),
        ..Default::default()
    });
    f
}

/// Same file with composite gains replaced; `alpha = gamma_P = 0` is gradient descent.
pub fn with_gains(mut f: ScenarioFile, alpha: f64, gamma_p: f64, gamma_i: f64) -> ScenarioFile {
    f.estimator.kind = EstimatorKind::Composite;
    f.estimator.alpha_per_s = alpha;
    f.estimator.gamma_p = gamma_p;
    f.estimator.gamma_i = gamma_i;
    f
}

pub fn detuned_gd(f: ScenarioFile) -> ScenarioFile {
    with_gains(f, 0.0, 0.0, DETUNED_GD_GAMMA_I)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    Fig2a,
    Fig2b,
    Fig3,
    Fig4,
}

impl Figure {
    pub const ALL: [Figure; 4] = [Figure::Fig2a, Figure::Fig2b, Figure::Fig3, Figure::Fig4];

    pub fn name(self) -> &'static str {
        match self {
            Figure::Fig2a => "fig2a",
            Figure::Fig2b => "fig2b",
            Figure::Fig3 => "fig3",
            Figure::Fig4 => "fig4",
        }
    }
}

impl FromStr for Figure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Figure::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::InvalidScenario(format!("unknown figure preset '{s}'")))
    }
}

#[derive(Debug, Clone)]
pub struct Preset {
    pub figure: Figure,
    pub title: String,
    pub plot: PlotKind,
    /// Label and scenario of every curve.
    pub runs: Vec<(String, ScenarioFile)>,
}

/// Alternative composite pair drawn next to the defaults.
pub const ALT_ALPHA: f64 = 300.0;
pub const ALT_GAMMA_P: f64 = 3e4;

fn composite_set(base: fn() -> ScenarioFile) -> Vec<(String, ScenarioFile)> {
    let d = ScenarioFile::default().estimator;
    vec![
        ("gd".into(), detuned_gd(base())),
        (
            format!("alpha={ALT_ALPHA} gamma_p={ALT_GAMMA_P}"),
            with_gains(base(), ALT_ALPHA, ALT_GAMMA_P, d.gamma_i),
        ),
        (
            format!("alpha={} gamma_p={}", d.alpha_per_s, d.gamma_p),
            with_gains(base(), d.alpha_per_s, d.gamma_p, d.gamma_i),
        ),
    ]
}

pub fn preset(figure: Figure) -> Preset {
    match figure {
        Figure::Fig2a => Preset {
            figure,
            title: "Composite identifier, SCR 3 -> 1.5 at 1 s".into(),
            plot: PlotKind::Estimates,
            runs: composite_set(scenario_a),
        },
        Figure::Fig2b => Preset {
            figure,
            title: "Composite identifier, E -10% at 2 s".into(),
            plot: PlotKind::Estimates,
            runs: composite_set(scenario_b),
        },
        Figure::Fig3 => Preset {
            figure,
            title: "Reduced-LRE gradient, assumed X/R = 5".into(),
            plot: PlotKind::Estimates,
            runs: [3.0, 5.0, 7.0]
                .into_iter()
                .map(|xr| (format!("X/R -> {xr}"), scenario_reduced(xr)))
                .collect(),
        },
        Figure::Fig4 => Preset {
            figure,
            title: "lambda_min of the cumulative reduced Gram".into(),
            plot: PlotKind::LambdaMin,
            runs: vec![("X/R = 5".into(), scenario_reduced(5.0))],
        },
    }
}

/// Human-readable report of one run.
pub fn format_summary(name: &str, s: &RunSummary) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "run {name}");
    let opt = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.4}"));
    for seg in &s.segments {
        let _ = writeln!(out, "segment {:.4} .. {:.4} s", seg.t_start, seg.t_end);
        for (k, p) in PARAM_NAMES.iter().enumerate() {
            let _ = writeln!(
                out,
                "  {p}: settling {} s, peak {:.4}, final {:.3e}",
                opt(seg.settling[k]),
                seg.peak[k],
                seg.final_error[k]
            );
        }
        if let Some(e) = seg.final_obs_err {
            let _ = writeln!(out, "  |i_hat - i| at end: {e:.3e} pu");
        }
    }
    let _ = writeln!(
        out,
        "lambda_min: {:.6e} -> {:.6e}",
        s.lambda_min_start, s.lambda_min_end
    );
    let _ = writeln!(out, "bounded: {}", s.bounded);
    if let Some(t) = s.ceiling_time {
        let _ = writeln!(out, "ceiling exceeded at t = {t}");
    }
    if let Some((a, ph)) = s.phasor_deviation {
        let _ = writeln!(out, "phasor deviation: amplitude {a:.3e}, phase {ph:.3e} rad");
    }
    out
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })
}

fn file_stem(label: &str) -> String {
    label
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '.' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

/// Run one config and write `series.csv`, `summary.txt` and `estimates.svg` into `dir`,
/// as enabled in the config.
pub fn simulate_to_dir(cfg: &SimConfig, dir: &Path) -> Result<RunResult> {
    create_dir(dir)?;
    let res = run(cfg)?;
    if cfg.write_csv {
        emit_csv(&res.series, &dir.join("series.csv"))?;
    }
    if cfg.write_plot {
        emit_plot(
            &[(res.name.clone(), res.series.clone())],
            PlotKind::Estimates,
            &res.name,
            &dir.join("estimates.svg"),
        )?;
    }
    write_text(&dir.join("summary.txt"), &format_summary(&res.name, &res.summary))?;
    Ok(res)
}

/// Run every curve of a preset; one CSV per curve and a single `<figure>.svg`.
pub fn reproduce(figure: Figure, dir: &Path) -> Result<Vec<RunResult>> {
    create_dir(dir)?;
    let p = preset(figure);
    let mut results = Vec::with_capacity(p.runs.len());
    let mut report = String::new();
    for (label, file) in &p.runs {
        let mut file = file.clone();
        file.name = Some(label.clone());
        let cfg = SimConfig::from_file(&file)?;
        let res = run(&cfg)?;
        emit_csv(
            &res.series,
            &dir.join(format!("{}-{}.csv", figure.name(), file_stem(label))),
        )?;
        report.push_str(&format_summary(label, &res.summary));
        report.push('\n');
        results.push(res);
    }
    let curves: Vec<_> = results.iter().map(|r| (r.name.clone(), r.series.clone())).collect();
    emit_plot(&curves, p.plot, &p.title, &dir.join(format!("{}.svg", figure.name())))?;
    write_text(&dir.join(format!("{}-summary.txt", figure.name())), &report)?;
    Ok(results)
}

/// One point of an `alpha x gamma_P` sweep.
#[derive(Debug)]
pub struct SweepPoint {
    pub alpha: f64,
    pub gamma_p: f64,
    pub dir: PathBuf,
    pub outcome: Result<RunSummary>,
}

/// Run the base scenario once per `(alpha, gamma_P)` pair, concurrently, each in its own directory.
pub fn sweep(base: &ScenarioFile, alphas: &[f64], gammas_p: &[f64], dir: &Path) -> Result<Vec<SweepPoint>> {
    create_dir(dir)?;
    let mut jobs = Vec::new();
    for &alpha in alphas {
        for &gamma_p in gammas_p {
            let mut f = with_gains(base.clone(), alpha, gamma_p, base.estimator.gamma_i);
            let stem = format!("alpha{alpha}_gp{gamma_p}");
            f.name = Some(stem.clone());
            // configuration errors surface before anything runs
            let cfg = SimConfig::from_file(&f)?;
            jobs.push((alpha, gamma_p, dir.join(stem), cfg));
        }
    }
    let points = std::thread::scope(|s| {
        let handles: Vec<_> = jobs
            .into_iter()
            .map(|(alpha, gamma_p, sub, cfg)| {
                s.spawn(move || {
                    let outcome = simulate_to_dir(&cfg, &sub).map(|r| r.summary);
                    SweepPoint {
                        alpha,
                        gamma_p,
                        dir: sub,
                        outcome,
                    }
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sweep worker panicked"))
            .collect::<Vec<_>>()
    });
    let mut table = String::from("alpha,gamma_p,status,final_err_R,final_err_L,final_err_E\n");
    for p in &points {
        match &p.outcome {
            Ok(s) => {
                let e = s.final_error;
                let _ = writeln!(table, "{},{},ok,{},{},{}", p.alpha, p.gamma_p, e[0], e[1], e[2]);
            }
            Err(err) => {
                let _ = writeln!(
                    table,
                    "{},{},\"{}\",,,",
                    p.alpha,
                    p.gamma_p,
                    err.to_string().replace('"', "'")
                );
            }
        }
    }
    write_text(&dir.join("sweep.csv"), &table)?;
    Ok(points)
}
