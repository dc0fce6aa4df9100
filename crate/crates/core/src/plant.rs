//! Thevenin-equivalent grid seen from the converter terminals:
//! `L di/dt = -R i + v - e`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::ode::rk4;
use crate::threephase::ThreePhase;

/// Thevenin-equivalent circuit parameters.
///
/// Units are whatever the caller works in, as long as they are consistent.
/// Inside a run everything is per-unit with time kept in seconds, so `l` is
/// then in pu*s and `omega * l` is the per-unit reactance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridParams {
    pub r: f64,
    pub l: f64,
    /// Source amplitude, peak phase quantity under the power-invariant scaling.
    pub e: f64,
    pub omega: f64,
}

impl GridParams {
    pub fn new(r: f64, l: f64, e: f64, omega: f64) -> Result<Self> {
        let p = Self { r, l, e, omega };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega > 0.0) || !self.omega.is_finite() {
            return Err(Error::InvalidFrequency(self.omega));
        }
        if !(self.l > 0.0) || !self.l.is_finite() {
            return Err(Error::InvalidParameter {
                name: "L",
                value: self.l,
            });
        }
        if !(self.e > 0.0) || !self.e.is_finite() {
            return Err(Error::InvalidParameter {
                name: "E",
                value: self.e,
            });
        }
        if !(self.r >= 0.0) || !self.r.is_finite() {
            return Err(Error::InvalidParameter {
                name: "R",
                value: self.r,
            });
        }
        Ok(())
    }

    /// X/R ratio `omega L / R`; `None` for a purely inductive grid.
    pub fn rho(&self) -> Option<f64> {
        (self.r > 0.0).then(|| self.omega * self.l / self.r)
    }

    pub fn impedance(&self) -> Complex64 {
        Complex64::new(self.r, self.omega * self.l)
    }
}

/// Base quantities of the per-unit system.
///
/// `v_base` is the peak phase voltage `V_LL * sqrt(2/3)`, `i_base = 2 S / (3 V_b)`
/// and `z_base = V_b / I_b`, which works out to `V_LL^2 / S`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerUnitBases {
    pub s_base: f64,
    pub v_base: f64,
    pub i_base: f64,
    pub z_base: f64,
}

impl PerUnitBases {
    pub fn from_ratings(s_rated_va: f64, v_ll_rms: f64) -> Result<Self> {
        if !(s_rated_va > 0.0) {
            return Err(Error::InvalidParameter {
                name: "rated power",
                value: s_rated_va,
            });
        }
        if !(v_ll_rms > 0.0) {
            return Err(Error::InvalidParameter {
                name: "line-line voltage",
                value: v_ll_rms,
            });
        }
        let v_base = v_ll_rms * (2.0f64 / 3.0).sqrt();
        let i_base = 2.0 * s_rated_va / (3.0 * v_base);
        Ok(Self {
            s_base: s_rated_va,
            v_base,
            i_base,
            z_base: v_base / i_base,
        })
    }

    pub fn params_to_pu(&self, p: &GridParams) -> GridParams {
        GridParams {
            r: p.r / self.z_base,
            l: p.l / self.z_base,
            e: p.e / self.v_base,
            omega: p.omega,
        }
    }

    pub fn params_to_si(&self, p: &GridParams) -> GridParams {
        GridParams {
            r: p.r * self.z_base,
            l: p.l * self.z_base,
            e: p.e * self.v_base,
            omega: p.omega,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantState {
    pub i: ThreePhase,
    pub t: f64,
}

#[inline]
pub(crate) fn current_rate(i: &ThreePhase, v: &ThreePhase, e: &ThreePhase, p: &GridParams) -> ThreePhase {
    (*v - *e - *i * p.r) * (1.0 / p.l)
}

/// `di/dt = (v - e - R i) / L`.
pub fn plant_derivative(i: &ThreePhase, v: &ThreePhase, e: &ThreePhase, p: &GridParams) -> Result<ThreePhase> {
    if !(p.l > 0.0) {
        return Err(Error::InvalidParameter { name: "L", value: p.l });
    }
    Ok(current_rate(i, v, e, p))
}

/// Advance the circuit by one RK4 step, sampling `(v, e)` at the stage times.
pub fn rk4_step<F>(s: &PlantState, input_sampler: F, p: &GridParams, h: f64) -> Result<PlantState>
where
    F: Fn(f64) -> (ThreePhase, ThreePhase),
{
    if !(h > 0.0) {
        return Err(Error::InvalidStep(h));
    }
    p.validate()?;
    let i = rk4(&s.i, s.t, h, |t, i| {
        let (v, e) = input_sampler(t);
        current_rate(i, &v, &e, p)
    });
    Ok(PlantState { i, t: s.t + h })
}

/// Piecewise-constant parameter history. A change at `t_k` applies for `t >= t_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamSchedule {
    segments: Vec<(f64, GridParams)>,
}

impl ParamSchedule {
    pub fn new(initial: GridParams) -> Result<Self> {
        initial.validate()?;
        Ok(Self {
            segments: vec![(f64::NEG_INFINITY, initial)],
        })
    }

    pub fn push(&mut self, t: f64, p: GridParams) -> Result<()> {
        p.validate()?;
        let last = self.segments.last().map(|s| s.0).unwrap_or(f64::NEG_INFINITY);
        if !(t > last) {
            return Err(Error::InvalidScenario(format!(
                "parameter change at t = {t} s is not after the previous one at {last} s"
            )));
        }
        self.segments.push((t, p));
        Ok(())
    }

    pub fn at(&self, t: f64) -> GridParams {
        let idx = self.segments.partition_point(|s| s.0 <= t);
        self.segments[idx.saturating_sub(1)].1
    }

    /// Times of every change after the initial parameters.
    pub fn change_times(&self) -> impl Iterator<Item = f64> + '_ {
        self.segments.iter().skip(1).map(|s| s.0)
    }

    pub fn latest(&self) -> GridParams {
        self.segments.last().expect("schedule is never empty").1
    }
}
