//! Fixed-step classical Runge-Kutta integration shared by every subsystem.

use nalgebra::SMatrix;

use crate::threephase::ThreePhase;

/// A state that can be advanced by [`rk4`]: it only needs `self + h * k`.
pub trait OdeState: Clone {
    fn add_scaled(&self, h: f64, k: &Self) -> Self;
}

impl OdeState for f64 {
    fn add_scaled(&self, h: f64, k: &Self) -> Self {
        self + h * k
    }
}

impl OdeState for ThreePhase {
    fn add_scaled(&self, h: f64, k: &Self) -> Self {
        ThreePhase::new(self.a + h * k.a, self.b + h * k.b, self.c + h * k.c)
    }
}

impl<const R: usize, const C: usize> OdeState for SMatrix<f64, R, C> {
    fn add_scaled(&self, h: f64, k: &Self) -> Self {
        self + k * h
    }
}

impl OdeState for Vec<f64> {
    fn add_scaled(&self, h: f64, k: &Self) -> Self {
        self.iter().zip(k).map(|(x, dx)| x + h * dx).collect()
    }
}

/// One classical 4-stage Runge-Kutta step of `y' = f(t, y)` from `t` to `t + h`.
pub fn rk4<S, F>(y: &S, t: f64, h: f64, mut f: F) -> S
where
    S: OdeState,
    F: FnMut(f64, &S) -> S,
{
    let half = 0.5 * h;
    let k1 = f(t, y);
    let k2 = f(t + half, &y.add_scaled(half, &k1));
    let k3 = f(t + half, &y.add_scaled(half, &k2));
    let k4 = f(t + h, &y.add_scaled(h, &k3));
    y.add_scaled(h / 6.0, &k1)
        .add_scaled(h / 3.0, &k2)
        .add_scaled(h / 3.0, &k3)
        .add_scaled(h / 6.0, &k4)
}
