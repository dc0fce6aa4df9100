//! Converter-side signals: the PCC voltage `v = V S_phi + eps_t` and the SRF-PLL.
//!
//! The converter is an ideal current-phasor tracker. A commanded current
//! phasor fixes the steady-state PCC phasor through the circuit equation, and
//! the inner control loops are replaced by a first-order lag of the complex
//! phasor toward that target. The lag restarts at every event, which makes
//! `eps_t` exponentially decaying by construction.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::plant::{GridParams, ParamSchedule};
use crate::threephase::{normalize_angle, rotating_frame, unit_set, Phasor, ThreePhase};

/// Commanded steady-state current, phase measured from the grid source `e`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConverterCommand {
    pub i_ref: Phasor,
    pub t_start: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PccSchedule {
    commands: Vec<ConverterCommand>,
    tau: f64,
}

impl PccSchedule {
    pub fn new(commands: Vec<ConverterCommand>, tau: f64) -> Result<Self> {
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(Error::InvalidParameter {
                name: "converter time constant",
                value: tau,
            });
        }
        if commands.is_empty() {
            return Err(Error::InvalidScenario("converter schedule has no commands".into()));
        }
        if commands.windows(2).any(|w| !(w[1].t_start > w[0].t_start)) {
            return Err(Error::InvalidScenario(
                "converter commands must be strictly increasing in time".into(),
            ));
        }
        Ok(Self { commands, tau })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn commands(&self) -> &[ConverterCommand] {
        &self.commands
    }

    /// Command in force at `t`, if the schedule has started.
    pub fn active(&self, t: f64) -> Option<&ConverterCommand> {
        let idx = self.commands.partition_point(|c| c.t_start <= t);
        idx.checked_sub(1).map(|k| &self.commands[k])
    }
}

/// PCC phasor that makes `i_ref` the steady-state current: `E + (R + j omega L) I`.
pub fn required_pcc_phasor(i_ref: Phasor, p: &GridParams) -> Result<Phasor> {
    let v = Complex64::new(p.e, 0.0) + p.impedance() * i_ref.to_complex();
    let out = Phasor::from_complex(v);
    if !(out.amplitude() > 0.0) || out.phase().abs() >= FRAC_PI_2 {
        return Err(Error::AssumptionViolation(format!(
            "required PCC phasor {:.6}∠{:.6} rad is outside V > 0, |phi| < pi/2",
            out.amplitude(),
            out.phase()
        )));
    }
    Ok(out)
}

/// First-order relaxation of a complex phasor toward a target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PccLag {
    tau: f64,
    anchor_t: f64,
    anchor: Complex64,
    target: Complex64,
}

impl PccLag {
    /// Start settled at `target`.
    pub fn new(t0: f64, target: Complex64, tau: f64) -> Self {
        Self {
            tau,
            anchor_t: t0,
            anchor: target,
            target,
        }
    }

    pub fn phasor_at(&self, t: f64) -> Complex64 {
        self.target + (self.anchor - self.target) * (-(t - self.anchor_t) / self.tau).exp()
    }

    /// Switch to a new target at `t`, keeping the emitted phasor continuous.
    pub fn retarget(&mut self, t: f64, target: Complex64) {
        self.anchor = self.phasor_at(t);
        self.anchor_t = t;
        self.target = target;
    }

    pub fn target(&self) -> Complex64 {
        self.target
    }
}

/// Instantaneous balanced set of a complex phasor `x + jy`: `x S_0(t) + y S_{pi/2}(t)`.
#[inline]
pub(crate) fn complex_to_instantaneous(z: Complex64, s0: &ThreePhase, c0: &ThreePhase) -> ThreePhase {
    *s0 * z.re + *c0 * z.im
}

/// PCC voltage at `t`, replaying every command and parameter change up to `t`.
pub fn pcc_voltage(t: f64, sched: &PccSchedule, params: &ParamSchedule, omega: f64) -> Result<ThreePhase> {
    if !(omega > 0.0) {
        return Err(Error::InvalidFrequency(omega));
    }
    let first = sched.commands[0];
    if t < first.t_start {
        return Err(Error::UndefinedSchedule(t));
    }
    let target_at = |tc: f64| -> Result<Complex64> {
        let cmd = sched.active(tc).ok_or(Error::UndefinedSchedule(tc))?;
        Ok(required_pcc_phasor(cmd.i_ref, &params.at(tc))?.to_complex())
    };

    let mut changes: Vec<f64> = sched
        .commands
        .iter()
        .skip(1)
        .map(|c| c.t_start)
        .chain(params.change_times())
        .filter(|&tc| tc > first.t_start && tc <= t)
        .collect();
    changes.sort_by(f64::total_cmp);
    changes.dedup();

    let mut lag = PccLag::new(first.t_start, target_at(first.t_start)?, sched.tau);
    for tc in changes {
        lag.retarget(tc, target_at(tc)?);
    }
    let angle = omega * t;
    Ok(complex_to_instantaneous(
        lag.phasor_at(t),
        &unit_set(angle),
        &unit_set(angle + FRAC_PI_2),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PllGains {
    pub kappa_p: f64,
    pub kappa_i: f64,
    /// Frequency feedforward, rad/s.
    pub omega_ff: f64,
}

impl Default for PllGains {
    fn default() -> Self {
        Self {
            kappa_p: 2.0e2,
            kappa_i: 5.0e3,
            omega_ff: 2.0 * PI * 50.0,
        }
    }
}

/// Synchronous-reference-frame PLL state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PllState {
    pub omega_hat: f64,
    pub theta_hat: f64,
    pub integrator: f64,
    pub gains: PllGains,
}

impl PllState {
    /// State locked onto frequency `omega` at angle `theta`.
    pub fn locked(omega: f64, theta: f64, gains: PllGains) -> Self {
        Self {
            omega_hat: omega,
            theta_hat: normalize_angle(theta),
            integrator: omega - gains.omega_ff,
            gains,
        }
    }
}

/// One explicit step of the PI loop driving the rotating-frame `q` component to zero.
pub fn pll_step(v: &ThreePhase, s: &PllState, h: f64) -> Result<PllState> {
    if !(h > 0.0) {
        return Err(Error::InvalidStep(h));
    }
    let (_, q) = rotating_frame(v, s.theta_hat);
    let g = s.gains;
    let integrator = s.integrator + g.kappa_i * q * h;
    let omega_hat = g.omega_ff + g.kappa_p * q + integrator;
    Ok(PllState {
        omega_hat,
        theta_hat: normalize_angle(s.theta_hat + omega_hat * h),
        integrator,
        gains: g,
    })
}
