//! Independent reference computations.
//!
//! These are deliberately brute-force and share no code path with the
//! simulation: phasor algebra for the circuit, closed-form filter responses,
//! central differences, and a power-iteration eigensolver.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::plant::GridParams;
use crate::threephase::Phasor;

/// Steady-state current `I = (V e^{j phi} - E) / (R + j omega L)`.
pub fn steady_state_current(p: &GridParams, v: Phasor) -> Result<Phasor> {
    let z = Complex64::new(p.r, p.omega * p.l);
    if z.norm() == 0.0 {
        return Err(Error::SingularCircuit);
    }
    Ok(Phasor::from_complex((v.to_complex() - Complex64::new(p.e, 0.0)) / z))
}

/// Unit step response of `lambda / (s + lambda)`.
pub fn first_order_step_response(lambda: f64, t: f64) -> f64 {
    1.0 - (-lambda * t).exp()
}

/// Steady-state gain and phase of `lambda / (s + lambda)` at `omega`.
pub fn first_order_frequency_response(lambda: f64, omega: f64) -> (f64, f64) {
    (
        lambda / (lambda * lambda + omega * omega).sqrt(),
        -(omega / lambda).atan(),
    )
}

/// Central-difference gradient.
pub fn finite_difference_gradient<F>(f: F, x: &[f64], eps: f64) -> Vec<f64>
where
    F: Fn(&[f64]) -> f64,
{
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|k| {
            probe[k] = x[k] + eps;
            let up = f(&probe);
            probe[k] = x[k] - eps;
            let down = f(&probe);
            probe[k] = x[k];
            (up - down) / (2.0 * eps)
        })
        .collect()
}

const MAX_SQUARINGS: usize = 64;

/// Smallest eigenvalue of a symmetric matrix by power iteration on `sigma I - G`,
/// with `sigma` a Gershgorin upper bound on the spectrum.
///
/// The power sequence is advanced by repeated squaring, so after `k` rounds the
/// iterate is `(sigma I - G)^(2^k)`; near-degenerate spectra still separate
/// within a few dozen rounds. The eigenvalue is read off as the Rayleigh
/// quotient of `G` at the dominant column.
pub fn iterative_min_eig(g: &DMatrix<f64>) -> Result<f64> {
    let n = g.nrows();
    if n != g.ncols() {
        return Err(Error::Dimension {
            expected: n,
            got: g.ncols(),
        });
    }
    let scale = g.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return Ok(0.0);
    }
    let sigma = (0..n)
        .map(|i| g.row(i).iter().map(|x| x.abs()).sum::<f64>())
        .fold(f64::MIN, f64::max);
    let mut power = DMatrix::<f64>::identity(n, n) * sigma - g;
    let top = power.amax();
    if top == 0.0 {
        // G = sigma I
        return Ok(sigma);
    }
    power /= top;

    for _ in 0..MAX_SQUARINGS {
        let mut next = &power * &power;
        let top = next.amax();
        if top == 0.0 || !top.is_finite() {
            break;
        }
        next /= top;
        let change = (&next - &power).amax();
        power = next;
        if change <= 1e-15 {
            let col = (0..n)
                .max_by(|&a, &b| power.column(a).norm().total_cmp(&power.column(b).norm()))
                .expect("non-empty matrix");
            let x = power.column(col).normalize();
            return Ok((x.transpose() * g * &x)[(0, 0)]);
        }
    }
    Err(Error::OracleFailure(MAX_SQUARINGS))
}
