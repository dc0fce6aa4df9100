//! Balanced three-phase signals.
//!
//! All balanced sets use the power-invariant scaling
//!
//! ```text
//! S_phi(t) = sqrt(2/3) * [sin(wt + phi), sin(wt + phi - 2pi/3), sin(wt + phi + 2pi/3)]
//! ```
//!
//! so `|S_phi(t)| = 1` and an amplitude `V` multiplying `S_phi` is the norm of
//! the instantaneous vector. The same scaling makes `S_a . S_b = cos(a - b)`,
//! which the rotating-frame transform below relies on.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{Vector2, Vector3};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// sqrt(2/3).
pub const SQRT_2_3: f64 = 0.816_496_580_927_726;

const TWO_PI_3: f64 = 2.0 * PI / 3.0;

/// Instantaneous three-phase sample.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ThreePhase {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl ThreePhase {
    pub const ZERO: ThreePhase = ThreePhase { a: 0.0, b: 0.0, c: 0.0 };

    pub fn new(a: f64, b: f64, c: f64) -> Self {
        Self { a, b, c }
    }

    /// Rebuild a balanced set from phases a and b only (`c = -a - b`).
    pub fn from_ab(a: f64, b: f64) -> Self {
        Self { a, b, c: -a - b }
    }

    pub fn sum(&self) -> f64 {
        self.a + self.b + self.c
    }

    pub fn norm_squared(&self) -> f64 {
        self.a * self.a + self.b * self.b + self.c * self.c
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.a.abs().max(self.b.abs()).max(self.c.abs())
    }

    pub fn is_finite(&self) -> bool {
        self.a.is_finite() && self.b.is_finite() && self.c.is_finite()
    }

    pub fn ab(&self) -> Vector2<f64> {
        Vector2::new(self.a, self.b)
    }

    pub fn to_vector(self) -> Vector3<f64> {
        Vector3::new(self.a, self.b, self.c)
    }

    pub fn from_vector(v: &Vector3<f64>) -> Self {
        Self::new(v[0], v[1], v[2])
    }
}

impl Add for ThreePhase {
    type Output = ThreePhase;
    fn add(self, o: ThreePhase) -> ThreePhase {
        ThreePhase::new(self.a + o.a, self.b + o.b, self.c + o.c)
    }
}

impl Sub for ThreePhase {
    type Output = ThreePhase;
    fn sub(self, o: ThreePhase) -> ThreePhase {
        ThreePhase::new(self.a - o.a, self.b - o.b, self.c - o.c)
    }
}

impl Mul<f64> for ThreePhase {
    type Output = ThreePhase;
    fn mul(self, k: f64) -> ThreePhase {
        ThreePhase::new(self.a * k, self.b * k, self.c * k)
    }
}

impl Neg for ThreePhase {
    type Output = ThreePhase;
    fn neg(self) -> ThreePhase {
        ThreePhase::new(-self.a, -self.b, -self.c)
    }
}

/// Wrap an angle to `(-pi, pi]`.
pub fn normalize_angle(x: f64) -> f64 {
    let mut y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y -= 2.0 * PI;
    }
    // rem_euclid can land exactly on -pi after the shift only through rounding
    if y <= -PI {
        y += 2.0 * PI;
    }
    y
}

/// Peak amplitude and phase of a balanced sinusoidal set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Phasor {
    amplitude: f64,
    phase: f64,
}

impl Phasor {
    pub fn new(amplitude: f64, phase: f64) -> Result<Self> {
        if !(amplitude >= 0.0) || !amplitude.is_finite() {
            return Err(Error::InvalidParameter {
                name: "phasor amplitude",
                value: amplitude,
            });
        }
        if !phase.is_finite() {
            return Err(Error::InvalidParameter {
                name: "phasor phase",
                value: phase,
            });
        }
        Ok(Self {
            amplitude,
            phase: normalize_angle(phase),
        })
    }

    pub fn from_complex(z: Complex64) -> Self {
        let amplitude = z.norm();
        let phase = if amplitude == 0.0 {
            0.0
        } else {
            normalize_angle(z.arg())
        };
        Self { amplitude, phase }
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn phase(&self) -> f64 {
        self.phase
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::from_polar(self.amplitude, self.phase)
    }
}

fn check_omega(omega: f64) -> Result<()> {
    if omega > 0.0 && omega.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidFrequency(omega))
    }
}

#[inline]
pub(crate) fn unit_set(angle: f64) -> ThreePhase {
    ThreePhase::new(
        SQRT_2_3 * angle.sin(),
        SQRT_2_3 * (angle - TWO_PI_3).sin(),
        SQRT_2_3 * (angle + TWO_PI_3).sin(),
    )
}

/// `S_phi(t)`: the unit balanced set at electrical angle `omega*t + phi`.
pub fn balanced_set(omega: f64, phi: f64, t: f64) -> Result<ThreePhase> {
    check_omega(omega)?;
    Ok(unit_set(omega * t + phi))
}

pub fn phasor_to_instantaneous(p: Phasor, omega: f64, t: f64) -> Result<ThreePhase> {
    Ok(balanced_set(omega, p.phase, t)? * p.amplitude)
}

/// Amplitude-recovering rotating-frame transform.
///
/// For `v = V * S_phi(t)` and `theta = omega*t + phi - delta` this returns
/// `(V cos(delta), V sin(delta))`, so a locked frame gives `(V, 0)`.
pub fn rotating_frame(v: &ThreePhase, theta: f64) -> (f64, f64) {
    let (sa, ca) = theta.sin_cos();
    let (sb, cb) = (theta - TWO_PI_3).sin_cos();
    let (sc, cc) = (theta + TWO_PI_3).sin_cos();
    let d = SQRT_2_3 * (v.a * sa + v.b * sb + v.c * sc);
    let q = SQRT_2_3 * (v.a * ca + v.b * cb + v.c * cc);
    (d, q)
}

/// Phasor of a balanced set relative to the reference angle `omega*t`.
///
/// Exact for balanced inputs; this is the inverse of [`phasor_to_instantaneous`].
pub fn instantaneous_to_phasor(v: &ThreePhase, omega: f64, t: f64) -> Result<Phasor> {
    check_omega(omega)?;
    let (d, q) = rotating_frame(v, omega * t);
    Ok(Phasor::from_complex(Complex64::new(d, q)))
}
