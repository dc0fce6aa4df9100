//! Online estimators.
//!
//! The composite identifier runs an observer of `i` next to a filtered-LRE
//! gradient law:
//!
//! ```text
//! i_hat'     = -alpha (i_hat - i) + Psi theta_hat
//! theta_hat' = -gamma_P Psi^T (i_hat - i) + gamma_I Psi_f^T (Z - Psi_f theta_hat)
//! ```
//!
//! With `alpha = gamma_P = 0` the second line is the plain gradient law on the
//! full LRE. The reduced estimator runs the same gradient law on the 2x2 LRE.

use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};

use crate::error::{Error, Result};
use crate::ode::rk4;
use crate::plant::GridParams;
use crate::regression::{LreSampleFull, LreSampleReduced};
use crate::threephase::ThreePhase;

/// `(R/L, 1/L, E/L)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ThetaFull {
    pub th1: f64,
    pub th2: f64,
    pub th3: f64,
}

impl ThetaFull {
    pub fn from_params(p: &GridParams) -> Self {
        Self {
            th1: p.r / p.l,
            th2: 1.0 / p.l,
            th3: p.e / p.l,
        }
    }

    pub fn to_vector(self) -> Vector3<f64> {
        Vector3::new(self.th1, self.th2, self.th3)
    }

    pub fn from_vector(v: &Vector3<f64>) -> Self {
        Self {
            th1: v[0],
            th2: v[1],
            th3: v[2],
        }
    }
}

/// `(1/L, E/L)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ThetaReduced {
    pub v1: f64,
    pub v2: f64,
}

impl ThetaReduced {
    pub fn from_params(p: &GridParams) -> Self {
        Self {
            v1: 1.0 / p.l,
            v2: p.e / p.l,
        }
    }

    pub fn to_vector(self) -> Vector2<f64> {
        Vector2::new(self.v1, self.v2)
    }

    pub fn from_vector(v: &Vector2<f64>) -> Self {
        Self { v1: v[0], v2: v[1] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompositeGains {
    pub alpha: f64,
    pub gamma_p: f64,
    pub gamma_i: f64,
}

impl CompositeGains {
    pub fn new(alpha: f64, gamma_p: f64, gamma_i: f64) -> Result<Self> {
        let g = Self {
            alpha,
            gamma_p,
            gamma_i,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        let check = |name, value: f64, strict: bool| {
            let ok = value.is_finite() && if strict { value > 0.0 } else { value >= 0.0 };
            if ok {
                Ok(())
            } else {
                Err(Error::InvalidParameter { name, value })
            }
        };
        check("alpha", self.alpha, false)?;
        check("gamma_P", self.gamma_p, false)?;
        check("gamma_I", self.gamma_i, true)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompositeState {
    pub i_hat: ThreePhase,
    pub theta_hat: ThetaFull,
    pub t: f64,
}

/// `gamma Psi_f^T (Z - Psi_f theta)`.
#[inline]
pub fn gradient_rate(theta: &Vector3<f64>, z: &Vector3<f64>, psi_f: &Matrix3<f64>, gamma: f64) -> Vector3<f64> {
    psi_f.tr_mul(&(z - psi_f * theta)) * gamma
}

#[inline]
pub fn gradient_rate_reduced(
    vartheta: &Vector2<f64>,
    z: &Vector2<f64>,
    psi_f: &Matrix2<f64>,
    gamma: f64,
) -> Vector2<f64> {
    psi_f.tr_mul(&(z - psi_f * vartheta)) * gamma
}

/// Right-hand side of the composite identifier.
#[inline]
pub fn composite_rates(
    i_hat: &ThreePhase,
    theta: &Vector3<f64>,
    i: &ThreePhase,
    psi: &Matrix3<f64>,
    z: &Vector3<f64>,
    psi_f: &Matrix3<f64>,
    g: &CompositeGains,
) -> (ThreePhase, Vector3<f64>) {
    let err = (*i_hat - *i).to_vector();
    let di = -err * g.alpha + psi * theta;
    let dtheta = gradient_rate(theta, z, psi_f, g.gamma_i) - psi.tr_mul(&err) * g.gamma_p;
    (ThreePhase::from_vector(&di), dtheta)
}

fn check_step(h: f64) -> Result<()> {
    if h > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidStep(h))
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "gamma",
            value: gamma,
        })
    }
}

fn finite<'a>(t: f64, name: &str, mut xs: impl Iterator<Item = &'a f64>) -> Result<()> {
    if xs.all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::numeric(t, name))
    }
}

/// Composite state packed for the integrator: `[i_hat; theta]`.
type Packed = nalgebra::SVector<f64, 6>;

/// One RK4 step of the composite identifier with inputs held over the step.
pub fn composite_step(
    s: &CompositeState,
    i: &ThreePhase,
    psi: &Matrix3<f64>,
    lre: &LreSampleFull,
    g: &CompositeGains,
    h: f64,
) -> Result<CompositeState> {
    check_step(h)?;
    g.validate()?;
    finite(s.t, "i", [i.a, i.b, i.c].iter())?;
    finite(s.t, "Psi", psi.iter())?;
    finite(s.t, "Z", lre.z.iter())?;
    finite(s.t, "Psi_f", lre.psi_f.iter())?;

    let mut y = Packed::zeros();
    y.fixed_rows_mut::<3>(0).copy_from(&s.i_hat.to_vector());
    y.fixed_rows_mut::<3>(3).copy_from(&s.theta_hat.to_vector());
    let y = rk4(&y, s.t, h, |_, y| {
        let ih = ThreePhase::from_vector(&y.fixed_rows::<3>(0).into_owned());
        let th = y.fixed_rows::<3>(3).into_owned();
        let (di, dth) = composite_rates(&ih, &th, i, psi, &lre.z, &lre.psi_f, g);
        let mut d = Packed::zeros();
        d.fixed_rows_mut::<3>(0).copy_from(&di.to_vector());
        d.fixed_rows_mut::<3>(3).copy_from(&dth);
        d
    });
    let t = s.t + h;
    finite(t, "i_hat", y.fixed_rows::<3>(0).iter())?;
    finite(t, "theta_hat", y.fixed_rows::<3>(3).iter())?;
    Ok(CompositeState {
        i_hat: ThreePhase::from_vector(&y.fixed_rows::<3>(0).into_owned()),
        theta_hat: ThetaFull::from_vector(&y.fixed_rows::<3>(3).into_owned()),
        t,
    })
}

/// Gradient law on the full LRE, one RK4 step with the sample held.
pub fn gradient_full_step(theta_hat: &ThetaFull, lre: &LreSampleFull, gamma: f64, h: f64) -> Result<ThetaFull> {
    check_step(h)?;
    check_gamma(gamma)?;
    finite(lre.t, "Z", lre.z.iter())?;
    finite(lre.t, "Psi_f", lre.psi_f.iter())?;
    let th = rk4(&theta_hat.to_vector(), lre.t, h, |_, th| {
        gradient_rate(th, &lre.z, &lre.psi_f, gamma)
    });
    finite(lre.t + h, "theta_hat", th.iter())?;
    Ok(ThetaFull::from_vector(&th))
}

/// Gradient law on the reduced LRE, one RK4 step with the sample held.
pub fn gd_reduced_step(v_hat: &ThetaReduced, lre: &LreSampleReduced, gamma: f64, h: f64) -> Result<ThetaReduced> {
    check_step(h)?;
    check_gamma(gamma)?;
    finite(lre.t, "Z_ab", lre.z_ab.iter())?;
    finite(lre.t, "Psi_f_ab", lre.psi_f_ab.iter())?;
    let v = rk4(&v_hat.to_vector(), lre.t, h, |_, v| {
        gradient_rate_reduced(v, &lre.z_ab, &lre.psi_f_ab, gamma)
    });
    finite(lre.t + h, "vartheta_hat", v.iter())?;
    Ok(ThetaReduced::from_vector(&v))
}

/// `(R, L, E)` from `(R/L, 1/L, E/L)`.
pub fn recover_full(theta: &ThetaFull) -> Result<(f64, f64, f64)> {
    if !(theta.th2 > 0.0) {
        return Err(Error::NonPhysical(format!("1/L estimate is {}", theta.th2)));
    }
    let l = 1.0 / theta.th2;
    Ok((theta.th1 * l, l, theta.th3 * l))
}

/// `(R, L, E)` from `(1/L, E/L)` with `R = omega L / rho`.
pub fn recover_reduced(v: &ThetaReduced, rho: f64, omega: f64) -> Result<(f64, f64, f64)> {
    if !(rho > 0.0) {
        return Err(Error::InvalidRatio(rho));
    }
    if !(v.v1 > 0.0) {
        return Err(Error::NonPhysical(format!("1/L estimate is {}", v.v1)));
    }
    let l = 1.0 / v.v1;
    Ok((omega * l / rho, l, v.v2 * l))
}
