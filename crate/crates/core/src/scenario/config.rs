//! Scenario files and the validated run configuration.
//!
//! Scenario files are TOML with dotted section names and the unit in every
//! key name, for example
//!
//! ```toml
//! grid.v_ll_kv = 400.0
//! grid.scr = 3.0
//! sim.duration_s = 2.0
//! event.1.time_s = 1.0
//! event.1.set_scr = 1.5
//! ```
//!
//! Every section is optional and falls back to the nominal 1000 MVA / 400 kV
//! case. Each event carries exactly one change.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::converter::PllGains;
use crate::error::{Error, Result};
use crate::estimators::CompositeGains;
use crate::plant::{GridParams, PerUnitBases};
use crate::regression::XrAssumption;
use crate::threephase::Phasor;

/// `X = V_LL^2 / (scr S)`, `L = X / omega`, `R = X / xr`, `E = V_LL sqrt(2/3)`.
///
/// `xr_ratio = inf` gives a purely inductive grid.
pub fn scr_to_params(scr: f64, xr_ratio: f64, v_ll: f64, s_rated: f64, omega: f64) -> Result<GridParams> {
    for (name, x) in [
        ("SCR", scr),
        ("X/R ratio", xr_ratio),
        ("V_LL", v_ll),
        ("S_rated", s_rated),
        ("omega", omega),
    ] {
        if !(x > 0.0) {
            return Err(Error::InvalidScenario(format!("{name} must be > 0, got {x}")));
        }
    }
    let x = v_ll * v_ll / (scr * s_rated);
    GridParams::new(x / xr_ratio, x / omega, v_ll * (2.0f64 / 3.0).sqrt(), omega)
        .map_err(|e| Error::InvalidScenario(e.to_string()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    /// Observer-based composite identifier on the full LRE.
    Composite,
    /// Plain gradient law on the full LRE.
    Gradient,
    /// Gradient law on the reduced LRE with an assumed X/R ratio.
    Reduced,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitMode {
    /// Parameters in force at `t = 0`.
    Nominal,
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlantStart {
    /// Phasor steady state of the initial operating point.
    Steady,
    /// Zero current.
    Rest,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub s_rated_mva: f64,
    pub v_ll_kv: f64,
    pub f_hz: f64,
    pub scr: f64,
    pub xr_ratio: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            s_rated_mva: 1000.0,
            v_ll_kv: 400.0,
            f_hz: 50.0,
            scr: 3.0,
            xr_ratio: 5.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimSection {
    pub duration_s: f64,
    pub step_s: f64,
    pub start: PlantStart,
    pub abort_on_ceiling: bool,
    pub seed: Option<u64>,
}

impl Default for SimSection {
    fn default() -> Self {
        Self {
            duration_s: 2.0,
            step_s: 1e-5,
            start: PlantStart::Steady,
            abort_on_ceiling: false,
            seed: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FilterSection {
    pub lambda_per_s: f64,
}

impl Default for FilterSection {
    fn default() -> Self {
        Self { lambda_per_s: 1e3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConverterSection {
    pub i_ref_pu: f64,
    pub i_ref_phase_rad: f64,
    pub tau_ms: f64,
}

impl Default for ConverterSection {
    fn default() -> Self {
        Self {
            i_ref_pu: 1.0,
            i_ref_phase_rad: 0.0,
            tau_ms: 20.0,
        }
    }
}

/// Default per-unit composite gains.
pub const DEFAULT_ALPHA: f64 = 1e3;
pub const DEFAULT_GAMMA_P: f64 = 1e4;
pub const DEFAULT_GAMMA_I: f64 = 1e3;
/// Default per-unit reduced-estimator gain.
pub const DEFAULT_GAMMA: f64 = 3e3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EstimatorSection {
    pub kind: EstimatorKind,
    pub alpha_per_s: f64,
    pub gamma_p: f64,
    pub gamma_i: f64,
    pub gamma: f64,
    pub assumed_xr: f64,
    pub init: InitMode,
    pub adapt_start_s: f64,
    pub use_pll_frequency: bool,
}

impl Default for EstimatorSection {
    fn default() -> Self {
        Self {
            kind: EstimatorKind::Composite,
            alpha_per_s: DEFAULT_ALPHA,
            gamma_p: DEFAULT_GAMMA_P,
            gamma_i: DEFAULT_GAMMA_I,
            gamma: DEFAULT_GAMMA,
            assumed_xr: 5.0,
            init: InitMode::Nominal,
            adapt_start_s: 0.02,
            use_pll_frequency: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PllSection {
    pub enabled: bool,
    pub kappa_p: f64,
    pub kappa_i: f64,
    pub f_ff_hz: f64,
}

impl Default for PllSection {
    fn default() -> Self {
        let g = PllGains::default();
        Self {
            enabled: true,
            kappa_p: g.kappa_p,
            kappa_i: g.kappa_i,
            f_ff_hz: g.omega_ff / (2.0 * PI),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExcitationSection {
    pub window_s: f64,
    pub decimation: usize,
}

impl Default for ExcitationSection {
    fn default() -> Self {
        Self {
            window_s: 0.1,
            decimation: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub decimation: usize,
    pub csv: bool,
    pub plot: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            decimation: 100,
            csv: true,
            plot: true,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventSection {
    pub time_s: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub set_scr: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub set_xr_ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scale_e: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub set_r_ohm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub set_l_mh: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub set_e_kv: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub set_i_ref_pu: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub set_i_ref_phase_rad: Option<f64>,
}

/// Raw scenario file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioFile {
    pub name: Option<String>,
    pub grid: GridSection,
    pub sim: SimSection,
    pub filter: FilterSection,
    pub converter: ConverterSection,
    pub estimator: EstimatorSection,
    pub pll: PllSection,
    pub excitation: ExcitationSection,
    pub output: OutputSection,
    pub event: BTreeMap<String, EventSection>,
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidScenario(e.message().to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    /// Append an event under the next free numeric key.
    pub fn push_event(&mut self, ev: EventSection) {
        let next = self
            .event
            .keys()
            .filter_map(|k| k.parse::<usize>().ok())
            .max()
            .map_or(1, |m| m + 1);
        self.event.insert(next.to_string(), ev);
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EventChange {
    SetScr(f64),
    SetXrRatio(f64),
    ScaleE(f64),
    /// SI parameters.
    SetParams {
        r: f64,
        l: f64,
        e: f64,
    },
    /// Per-unit current phasor.
    SetCommand(Phasor),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioEvent {
    pub time: f64,
    pub change: EventChange,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorConfig {
    pub kind: EstimatorKind,
    pub gains: CompositeGains,
    pub gamma: f64,
    pub xr: XrAssumption,
    pub init: InitMode,
    pub adapt_start: f64,
    pub use_pll_frequency: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub name: String,
    pub s_rated: f64,
    pub v_ll: f64,
    pub f_hz: f64,
    pub bases: PerUnitBases,
    pub duration: f64,
    pub h: f64,
    pub start: PlantStart,
    pub abort_on_ceiling: bool,
    pub seed: Option<u64>,
    pub scr: f64,
    pub xr_ratio: f64,
    /// SI parameters at `t = 0`.
    pub initial: GridParams,
    pub lambda: f64,
    /// Per-unit current command at `t = 0`.
    pub i_ref: Phasor,
    pub tau: f64,
    pub estimator: EstimatorConfig,
    pub pll: Option<PllGains>,
    pub pe_window: f64,
    pub pe_decimation: usize,
    pub output_decimation: usize,
    pub write_csv: bool,
    pub write_plot: bool,
    /// Sorted by time; ties keep file order.
    pub events: Vec<ScenarioEvent>,
}

fn positive(name: &str, x: f64) -> Result<f64> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(Error::InvalidScenario(format!(
            "{name} must be finite and > 0, got {x}"
        )))
    }
}

fn non_negative(name: &str, x: f64) -> Result<f64> {
    if x >= 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(Error::InvalidScenario(format!(
            "{name} must be finite and >= 0, got {x}"
        )))
    }
}

impl SimConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        Self::from_file(&ScenarioFile::parse(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn omega(&self) -> f64 {
        2.0 * PI * self.f_hz
    }

    pub fn from_file(f: &ScenarioFile) -> Result<Self> {
        let s_rated = positive("grid.s_rated_mva", f.grid.s_rated_mva)? * 1e6;
        let v_ll = positive("grid.v_ll_kv", f.grid.v_ll_kv)? * 1e3;
        let f_hz = positive("grid.f_hz", f.grid.f_hz)?;
        let omega = 2.0 * PI * f_hz;
        let scr = positive("grid.scr", f.grid.scr)?;
        if !(f.grid.xr_ratio > 0.0) {
            return Err(Error::InvalidScenario(format!(
                "grid.xr_ratio must be > 0, got {}",
                f.grid.xr_ratio
            )));
        }
        let initial = scr_to_params(scr, f.grid.xr_ratio, v_ll, s_rated, omega)?;
        let bases = PerUnitBases::from_ratings(s_rated, v_ll)?;

        let h = positive("sim.step_s", f.sim.step_s)?;
        let duration = positive("sim.duration_s", f.sim.duration_s)?;
        if !(duration > h) {
            return Err(Error::InvalidScenario(format!(
                "sim.duration_s = {duration} must exceed the step {h}"
            )));
        }

        let lambda = positive("filter.lambda_per_s", f.filter.lambda_per_s)?;
        let i_ref = Phasor::new(
            non_negative("converter.i_ref_pu", f.converter.i_ref_pu)?,
            f.converter.i_ref_phase_rad,
        )
        .map_err(|e| Error::InvalidScenario(e.to_string()))?;
        let tau = positive("converter.tau_ms", f.converter.tau_ms)? * 1e-3;

        let est = &f.estimator;
        let gains = CompositeGains::new(est.alpha_per_s, est.gamma_p, est.gamma_i)
            .map_err(|e| Error::InvalidScenario(format!("estimator gains: {e}")))?;
        let gamma = positive("estimator.gamma", est.gamma)?;
        let xr = if est.assumed_xr == f64::INFINITY {
            XrAssumption::PurelyInductive
        } else {
            XrAssumption::Ratio(positive("estimator.assumed_xr", est.assumed_xr)?)
        };
        let estimator = EstimatorConfig {
            kind: est.kind,
            gains,
            gamma,
            xr,
            init: est.init,
            adapt_start: non_negative("estimator.adapt_start_s", est.adapt_start_s)?,
            use_pll_frequency: est.use_pll_frequency,
        };

        let pll = if f.pll.enabled {
            Some(PllGains {
                kappa_p: non_negative("pll.kappa_p", f.pll.kappa_p)?,
                kappa_i: non_negative("pll.kappa_i", f.pll.kappa_i)?,
                omega_ff: 2.0 * PI * positive("pll.f_ff_hz", f.pll.f_ff_hz)?,
            })
        } else {
            None
        };
        if est.use_pll_frequency && pll.is_none() {
            return Err(Error::InvalidScenario(
                "estimator.use_pll_frequency requires pll.enabled".into(),
            ));
        }

        let pe_window = positive("excitation.window_s", f.excitation.window_s)?;
        if f.excitation.decimation == 0 || f.output.decimation == 0 {
            return Err(Error::InvalidScenario("decimation factors must be >= 1".into()));
        }

        // numeric keys in numeric order, then the rest by name
        let mut keyed: Vec<(&String, &EventSection)> = f.event.iter().collect();
        keyed.sort_by_key(|(k, _)| (k.parse::<u64>().map_or(u64::MAX, |n| n), (*k).clone()));
        let mut events = Vec::with_capacity(keyed.len());
        for (key, ev) in keyed {
            events.push(parse_event(key, ev)?);
        }
        events.sort_by(|a, b| a.time.total_cmp(&b.time));

        Ok(Self {
            name: f.name.clone().unwrap_or_else(|| "scenario".into()),
            s_rated,
            v_ll,
            f_hz,
            bases,
            duration,
            h,
            start: f.sim.start,
            abort_on_ceiling: f.sim.abort_on_ceiling,
            seed: f.sim.seed,
            scr,
            xr_ratio: f.grid.xr_ratio,
            initial,
            lambda,
            i_ref,
            tau,
            estimator,
            pll,
            pe_window,
            pe_decimation: f.excitation.decimation,
            output_decimation: f.output.decimation,
            write_csv: f.output.csv,
            write_plot: f.output.plot,
            events,
        })
    }
}

fn parse_event(key: &str, ev: &EventSection) -> Result<ScenarioEvent> {
    let ctx = |msg: String| Error::InvalidScenario(format!("event.{key}: {msg}"));
    if !(ev.time_s >= 0.0) || !ev.time_s.is_finite() {
        return Err(ctx(format!("time_s must be >= 0, got {}", ev.time_s)));
    }
    let params = [ev.set_r_ohm, ev.set_l_mh, ev.set_e_kv];
    let n_params = params.iter().filter(|x| x.is_some()).count();
    let command = ev.set_i_ref_pu.is_some() || ev.set_i_ref_phase_rad.is_some();
    let kinds = [
        ev.set_scr.is_some(),
        ev.set_xr_ratio.is_some(),
        ev.scale_e.is_some(),
        n_params > 0,
        command,
    ];
    if kinds.iter().filter(|&&k| k).count() != 1 {
        return Err(ctx("exactly one change is required per event".into()));
    }
    let check = |name: &str, x: f64| -> Result<f64> {
        if x > 0.0 {
            Ok(x)
        } else {
            Err(ctx(format!("{name} must be > 0, got {x}")))
        }
    };
    let change = if let Some(x) = ev.set_scr {
        EventChange::SetScr(check("set_scr", x)?)
    } else if let Some(x) = ev.set_xr_ratio {
        EventChange::SetXrRatio(check("set_xr_ratio", x)?)
    } else if let Some(x) = ev.scale_e {
        EventChange::ScaleE(check("scale_e", x)?)
    } else if n_params > 0 {
        let [Some(r), Some(l), Some(e)] = params else {
            return Err(ctx("set_r_ohm, set_l_mh and set_e_kv must be given together".into()));
        };
        if !(r >= 0.0) {
            return Err(ctx(format!("set_r_ohm must be >= 0, got {r}")));
        }
        EventChange::SetParams {
            r,
            l: check("set_l_mh", l)? * 1e-3,
            e: check("set_e_kv", e)? * 1e3,
        }
    } else {
        let amp = ev.set_i_ref_pu.unwrap_or(0.0);
        let phase = ev.set_i_ref_phase_rad.unwrap_or(0.0);
        EventChange::SetCommand(Phasor::new(amp, phase).map_err(|e| ctx(e.to_string()))?)
    };
    Ok(ScenarioEvent {
        time: ev.time_s,
        change,
    })
}
