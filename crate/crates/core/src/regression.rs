//! Filtered linear regression equations.
//!
//! With `F(p) = lambda / (p + lambda)` the plant gives `Z = Psi_f theta + eps_t`
//! where `Z = p F(p)[i]` and `Psi_f = F(p)[Psi]`. The derivative filter is
//! realized as `lambda (u - x)` on the low-pass state, so no measurement is
//! ever differentiated.

use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};

use crate::error::{Error, Result};
use crate::ode::rk4;
use crate::threephase::ThreePhase;

/// Bank of independent first-order low-pass filters `x' = lambda (u - x)`.
///
/// Inputs are interpolated linearly between consecutive calls. The first call
/// holds its input over the step.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterBank {
    pub lambda: f64,
    pub states: Vec<f64>,
    pub t: f64,
    last_input: Option<Vec<f64>>,
}

impl FilterBank {
    /// Zero-initialized bank with `channels` filters.
    pub fn new(lambda: f64, channels: usize) -> Result<Self> {
        Self::with_states(lambda, vec![0.0; channels])
    }

    pub fn with_states(lambda: f64, states: Vec<f64>) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidParameter {
                name: "filter bandwidth",
                value: lambda,
            });
        }
        Ok(Self {
            lambda,
            states,
            t: 0.0,
            last_input: None,
        })
    }

    pub fn channels(&self) -> usize {
        self.states.len()
    }

    /// Advance one step of length `h` ending at input `u`; returns the low-pass output.
    pub fn step(&mut self, u: &[f64], h: f64) -> Result<&[f64]> {
        if !(h > 0.0) {
            return Err(Error::InvalidStep(h));
        }
        if u.len() != self.states.len() {
            return Err(Error::ChannelCount {
                expected: self.states.len(),
                got: u.len(),
            });
        }
        let lambda = self.lambda;
        let start = self.last_input.take().unwrap_or_else(|| u.to_vec());
        let t0 = self.t;
        let x = rk4(&self.states, t0, h, |t, x| {
            let s = (t - t0) / h;
            x.iter()
                .zip(start.iter().zip(u))
                .map(|(xk, (a, b))| lambda * (a + s * (b - a) - xk))
                .collect()
        });
        self.states = x;
        self.t = t0 + h;
        self.last_input = Some(u.to_vec());
        Ok(&self.states)
    }
}

/// Value-style wrapper around [`FilterBank::step`].
pub fn filter_step(fb: &FilterBank, u: &[f64], h: f64) -> Result<(FilterBank, Vec<f64>)> {
    let mut next = fb.clone();
    let y = next.step(u, h)?.to_vec();
    Ok((next, y))
}

/// `Psi = [-i | v | -s0]`.
pub fn regressor_full(i: &ThreePhase, v: &ThreePhase, s0: &ThreePhase) -> Matrix3<f64> {
    Matrix3::from_columns(&[(-*i).to_vector(), v.to_vector(), (-*s0).to_vector()])
}

/// `Psi_ab = [v_ab | -s0_ab]`.
pub fn regressor_reduced(v_ab: &Vector2<f64>, s0_ab: &Vector2<f64>) -> Matrix2<f64> {
    Matrix2::from_columns(&[*v_ab, -*s0_ab])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LreSampleFull {
    pub z: Vector3<f64>,
    pub psi_f: Matrix3<f64>,
    pub t: f64,
}

impl LreSampleFull {
    pub fn residual(&self, theta: &Vector3<f64>) -> Vector3<f64> {
        self.z - self.psi_f * theta
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LreSampleReduced {
    pub z_ab: Vector2<f64>,
    pub psi_f_ab: Matrix2<f64>,
    pub t: f64,
}

impl LreSampleReduced {
    pub fn residual(&self, vartheta: &Vector2<f64>) -> Vector2<f64> {
        self.z_ab - self.psi_f_ab * vartheta
    }
}

/// Assumed X/R information for the reduced LRE.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum XrAssumption {
    /// `R = 0`: the `omega / rho` term is dropped.
    PurelyInductive,
    /// Known ratio `rho = omega L / R`.
    Ratio(f64),
}

impl XrAssumption {
    /// `R / L = omega / rho` under the assumption.
    pub fn r_over_l(&self, omega: f64) -> Result<f64> {
        match *self {
            XrAssumption::PurelyInductive => Ok(0.0),
            XrAssumption::Ratio(rho) if rho > 0.0 => Ok(omega / rho),
            XrAssumption::Ratio(rho) => Err(Error::InvalidRatio(rho)),
        }
    }

    pub fn rho(&self) -> f64 {
        match *self {
            XrAssumption::PurelyInductive => f64::INFINITY,
            XrAssumption::Ratio(rho) => rho,
        }
    }
}

/// Advance the full-LRE filters with the newest `(i, Psi)` and read `(Z, Psi_f)`.
///
/// `fb_i` has 3 channels, `fb_psi` has 9 (column-major `Psi`).
pub fn lre_full_step(
    fb_i: &mut FilterBank,
    fb_psi: &mut FilterBank,
    i: &ThreePhase,
    psi: &Matrix3<f64>,
    h: f64,
) -> Result<LreSampleFull> {
    let u = [i.a, i.b, i.c];
    let x = fb_i.step(&u, h)?;
    let z = (i.to_vector() - Vector3::from_column_slice(x)) * fb_i.lambda;
    let psi_f = Matrix3::from_column_slice(fb_psi.step(psi.as_slice(), h)?);
    Ok(LreSampleFull { z, psi_f, t: fb_i.t })
}

/// Advance the reduced-LRE filters and read `(Z_ab, Psi_f_ab)`.
///
/// `fb` has 6 channels: `i_ab` followed by column-major `Psi_ab`.
pub fn lre_reduced_step(
    fb: &mut FilterBank,
    i_ab: &Vector2<f64>,
    v_ab: &Vector2<f64>,
    s0_ab: &Vector2<f64>,
    xr: XrAssumption,
    omega: f64,
    h: f64,
) -> Result<LreSampleReduced> {
    let r_over_l = xr.r_over_l(omega)?;
    let psi = regressor_reduced(v_ab, s0_ab);
    let u = [i_ab[0], i_ab[1], psi[(0, 0)], psi[(1, 0)], psi[(0, 1)], psi[(1, 1)]];
    let lambda = fb.lambda;
    let x = fb.step(&u, h)?;
    let xi = Vector2::new(x[0], x[1]);
    Ok(LreSampleReduced {
        z_ab: (i_ab - xi) * lambda + xi * r_over_l,
        psi_f_ab: Matrix2::from_column_slice(&x[2..6]),
        t: fb.t,
    })
}

/// `(sqrt(3)/2) V sin(phi)`: determinant of `[V S_phi,ab | -S_0,ab]` built from
/// unscaled sines `sin(wt + phi - 2k pi/3)`. Independent of time.
pub fn reduced_regressor_det(v: f64, phi: f64) -> f64 {
    0.5 * 3f64.sqrt() * v * phi.sin()
}

/// Same determinant for the power-invariant sets used throughout this crate,
/// which carry an extra `sqrt(2/3)` per column: `V sin(phi) / sqrt(3)`.
pub fn reduced_regressor_det_scaled(v: f64, phi: f64) -> f64 {
    v * phi.sin() / 3f64.sqrt()
}
