//! Excitation diagnostics: cumulative Gram integrals of the filtered regressor,
//! closed-form minimum eigenvalues, and the sliding-window PE test.

use std::collections::VecDeque;
use std::f64::consts::PI;

use nalgebra::SMatrix;

use crate::error::{Error, Result};

/// Running `G(t) = int_0^t M M^T ds`, trapezoidal in the step. Pass `Psi_f^T`
/// for the parameter-space Gram.
#[derive(Debug, Clone, PartialEq)]
pub struct GramAccumulator<const N: usize> {
    pub g: SMatrix<f64, N, N>,
    pub t: f64,
    last: Option<SMatrix<f64, N, N>>,
}

impl<const N: usize> Default for GramAccumulator<N> {
    fn default() -> Self {
        Self::new(0.0)
    }
}

impl<const N: usize> GramAccumulator<N> {
    pub fn new(t0: f64) -> Self {
        Self {
            g: SMatrix::zeros(),
            t: t0,
            last: None,
        }
    }

    /// Accumulate over `[t, t + h]` with `psi_f` the sample at `t + h`.
    ///
    /// The first update has no earlier sample and uses `psi_f` at both ends.
    pub fn update(&mut self, psi_f: &SMatrix<f64, N, N>, h: f64) -> Result<()> {
        if !(h > 0.0) {
            return Err(Error::InvalidStep(h));
        }
        let outer = psi_f * psi_f.transpose();
        let prev = self.last.unwrap_or(outer);
        self.g += (prev + outer) * (0.5 * h);
        self.t += h;
        self.last = Some(outer);
        Ok(())
    }

    /// [`update`](Self::update) from a column-major slice.
    pub fn update_slice(&mut self, psi_f: &[f64], h: f64) -> Result<()> {
        if psi_f.len() != N * N {
            return Err(Error::Dimension {
                expected: N * N,
                got: psi_f.len(),
            });
        }
        self.update(&SMatrix::from_column_slice(psi_f), h)
    }

    pub fn min_eig(&self) -> Result<f64> {
        min_eig_sym(&self.g)
    }
}

const SYMMETRY_TOL: f64 = 1e-10;

/// Smallest eigenvalue of a symmetric 2x2 or 3x3 matrix in closed form.
pub fn min_eig_sym<const N: usize>(g: &SMatrix<f64, N, N>) -> Result<f64> {
    let scale = g.amax();
    if scale > 0.0 {
        let asym = (g - g.transpose()).amax() / scale;
        if asym > SYMMETRY_TOL {
            return Err(Error::Asymmetric(asym));
        }
    }
    match N {
        2 => Ok(min_eig_2(g[(0, 0)], g[(0, 1)], g[(1, 1)])),
        3 => Ok(min_eig_3(
            [g[(0, 0)], g[(1, 1)], g[(2, 2)]],
            [g[(0, 1)], g[(0, 2)], g[(1, 2)]],
        )),
        _ => Err(Error::Dimension { expected: 3, got: N }),
    }
}

fn min_eig_2(a: f64, b: f64, c: f64) -> f64 {
    0.5 * (a + c) - (0.5 * (a - c)).hypot(b)
}

/// Trigonometric solution of the characteristic cubic.
fn min_eig_3(d: [f64; 3], o: [f64; 3]) -> f64 {
    let p1 = o[0] * o[0] + o[1] * o[1] + o[2] * o[2];
    if p1 == 0.0 {
        return d[0].min(d[1]).min(d[2]);
    }
    let q = (d[0] + d[1] + d[2]) / 3.0;
    let (b0, b1, b2) = (d[0] - q, d[1] - q, d[2] - q);
    let p2 = b0 * b0 + b1 * b1 + b2 * b2 + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();
    // det(A - qI) / (2 p^3)
    let det = b0 * (b1 * b2 - o[2] * o[2]) - o[0] * (o[0] * b2 - o[2] * o[1]) + o[1] * (o[0] * o[2] - b1 * o[1]);
    let r = (det / (2.0 * p * p * p)).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    q + 2.0 * p * (phi + 2.0 * PI / 3.0).cos()
}

/// Decimated history of `Psi_f` samples for windowed PE tests.
#[derive(Debug, Clone)]
pub struct PeHistory<const N: usize> {
    samples: VecDeque<(f64, SMatrix<f64, N, N>)>,
    decimation: usize,
    capacity: usize,
    counter: usize,
}

impl<const N: usize> PeHistory<N> {
    /// Keeps every `decimation`-th pushed sample, at most `capacity` of them.
    pub fn new(decimation: usize, capacity: usize) -> Self {
        let decimation = decimation.max(1);
        let capacity = capacity.max(2);
        Self {
            samples: VecDeque::with_capacity(capacity),
            decimation,
            capacity,
            counter: 0,
        }
    }

    /// Sized to hold `window` seconds at step `h`.
    pub fn for_window(window: f64, h: f64, decimation: usize) -> Self {
        let decimation = decimation.max(1);
        let capacity = (window / (h * decimation as f64)).ceil() as usize + 2;
        Self::new(decimation, capacity)
    }

    pub fn push(&mut self, t: f64, psi_f: &SMatrix<f64, N, N>) {
        if self.counter.is_multiple_of(self.decimation) {
            if self.samples.len() == self.capacity {
                self.samples.pop_front();
            }
            self.samples.push_back((t, *psi_f));
        }
        self.counter += 1;
    }

    /// Time covered by the stored samples.
    pub fn span(&self) -> f64 {
        match (self.samples.front(), self.samples.back()) {
            (Some(a), Some(b)) => b.0 - a.0,
            _ => 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// `int_{t-T}^{t} Psi_f Psi_f^T ds` over the most recent `window` seconds.
pub fn pe_window_gram<const N: usize>(history: &PeHistory<N>, window: f64) -> Result<SMatrix<f64, N, N>> {
    let have = history.span();
    // sample times carry rounding from repeated addition
    let slack = 1e-9 * window.max(1.0);
    if !(window > 0.0) || have + slack < window {
        return Err(Error::Window { needed: window, have });
    }
    let t_end = history.samples.back().map(|s| s.0).unwrap_or(0.0);
    let start = t_end - window - slack;
    let mut g = SMatrix::<f64, N, N>::zeros();
    let mut prev: Option<(f64, SMatrix<f64, N, N>)> = None;
    for (t, psi) in history.samples.iter().filter(|s| s.0 >= start) {
        let outer = psi * psi.transpose();
        if let Some((tp, op)) = prev {
            g += (op + outer) * (0.5 * (t - tp));
        }
        prev = Some((*t, outer));
    }
    Ok(g)
}

/// `lambda_min` of [`pe_window_gram`]; the caller compares it against `delta`.
pub fn pe_window<const N: usize>(history: &PeHistory<N>, window: f64) -> Result<f64> {
    min_eig_sym(&pe_window_gram(history, window)?)
}
