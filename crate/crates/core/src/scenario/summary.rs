//! Settling, peak and final-error figures of a recorded run.

use super::output::Sample;

/// Relative band for settling.
pub const SETTLING_BAND: f64 = 0.02;

pub const PARAM_NAMES: [&str; 3] = ["R", "L", "E"];

/// Figures for one interval between events.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentSummary {
    pub t_start: f64,
    pub t_end: f64,
    /// True `(R, L, E)` in force, SI.
    pub truth: [f64; 3],
    /// Time after `t_start` from which the estimate stays in the band; `None` if it never does.
    pub settling: [Option<f64>; 3],
    /// Largest relative deviation from truth.
    pub peak: [f64; 3],
    /// Relative error at the last sample of the segment; `NaN` for a recovery gap.
    pub final_error: [f64; 3],
    /// `|i_hat - i|` at the last sample, composite runs only.
    pub final_obs_err: Option<f64>,
}

impl SegmentSummary {
    pub fn settled_within(&self, k: usize, limit: f64) -> bool {
        self.settling[k].is_some_and(|s| s <= limit)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunSummary {
    pub segments: Vec<SegmentSummary>,
    pub final_error: [f64; 3],
    pub lambda_min_start: f64,
    pub lambda_min_end: f64,
    pub bounded: bool,
    pub ceiling_time: Option<f64>,
    /// Relative amplitude and absolute phase deviation of the final current
    /// from the phasor steady state of the final operating point.
    pub phasor_deviation: Option<(f64, f64)>,
    /// Largest `|1^T Psi| / |Psi|` seen at any step.
    pub max_null_residual: f64,
}

fn relative(est: f64, truth: f64) -> f64 {
    if truth == 0.0 {
        est.abs()
    } else {
        (est - truth).abs() / truth.abs()
    }
}

/// Split the series at `event_times` and measure each segment.
pub fn summarize(ts: &[Sample], event_times: &[f64]) -> RunSummary {
    let mut summary = RunSummary {
        bounded: true,
        ..Default::default()
    };
    let (Some(first), Some(last)) = (ts.first(), ts.last()) else {
        return summary;
    };

    let mut bounds = vec![first.t];
    bounds.extend(event_times.iter().copied().filter(|&t| t > first.t && t <= last.t));
    bounds.dedup();
    for (k, &start) in bounds.iter().enumerate() {
        let end = bounds.get(k + 1).copied().unwrap_or(f64::INFINITY);
        let seg: Vec<&Sample> = ts.iter().filter(|s| s.t >= start && s.t < end).collect();
        let Some(tail) = seg.last() else { continue };
        let mut out = SegmentSummary {
            t_start: start,
            t_end: tail.t,
            truth: tail.truth,
            settling: [None; 3],
            peak: [0.0; 3],
            final_error: [f64::NAN; 3],
            final_obs_err: tail.i_obs_err,
        };
        for p in 0..3 {
            let err = |s: &Sample| s.estimate.map(|e| relative(e[p], s.truth[p]));
            let mut settled_from = None;
            for s in &seg {
                match err(s) {
                    Some(e) if e < SETTLING_BAND => {
                        settled_from.get_or_insert(s.t);
                    }
                    _ => settled_from = None,
                }
                if let Some(e) = err(s) {
                    out.peak[p] = out.peak[p].max(e);
                }
            }
            out.settling[p] = settled_from.map(|t| t - start);
            out.final_error[p] = err(tail).unwrap_or(f64::NAN);
        }
        summary.segments.push(out);
    }
    summary.final_error = summary.segments.last().map_or([f64::NAN; 3], |s| s.final_error);
    summary.lambda_min_start = first.lambda_min_cum;
    summary.lambda_min_end = last.lambda_min_cum;
    summary
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::threephase::ThreePhase;

    fn sample(t: f64, est: Option<[f64; 3]>, truth: [f64; 3]) -> Sample {
        Sample {
            t,
            i: ThreePhase::ZERO,
            v: ThreePhase::ZERO,
            e: ThreePhase::ZERO,
            theta_hat: [0.0; 3],
            estimate: est,
            truth,
            residual_norm: 0.0,
            i_obs_err: None,
            lambda_min_cum: t,
            omega_pll: None,
        }
    }

    const TRUTH: [f64; 3] = [10.0, 0.17, 3.0e5];

    #[test]
    fn exact_estimate_settles_immediately() {
        let ts: Vec<Sample> = (0..100).map(|k| sample(k as f64 * 1e-3, Some(TRUTH), TRUTH)).collect();
        let s = summarize(&ts, &[]);
        assert_eq!(s.segments.len(), 1);
        assert_eq!(s.segments[0].settling, [Some(0.0); 3]);
        assert_eq!(s.segments[0].peak, [0.0; 3]);
        assert_eq!(s.final_error, [0.0; 3]);
    }

    #[test]
    fn exponential_approach_crosses_band_at_log_fifty() {
        let dt = 1e-3;
        let ts: Vec<Sample> = (0..1000)
            .map(|k| {
                let t = k as f64 * dt;
                let f = 1.0 + (-t / 0.05).exp();
                sample(t, Some(TRUTH.map(|x| x * f)), TRUTH)
            })
            .collect();
        let s = summarize(&ts, &[]);
        let expected = 0.05 * 50f64.ln();
        for p in 0..3 {
            let got = s.segments[0].settling[p].unwrap();
            assert!((got - expected).abs() <= dt, "{got} vs {expected}");
        }
        assert!((s.segments[0].peak[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn never_converging_is_not_settled() {
        let ts: Vec<Sample> = (0..100)
            .map(|k| sample(k as f64 * 1e-3, Some(TRUTH.map(|x| 1.5 * x)), TRUTH))
            .collect();
        let s = summarize(&ts, &[]);
        assert_eq!(s.segments[0].settling, [None; 3]);
        assert!(!s.segments[0].settled_within(0, 1.0));
    }

    #[test]
    fn segments_follow_events_and_gaps_break_settling() {
        let after = [20.0, 0.34, 3.0e5];
        let ts: Vec<Sample> = (0..200)
            .map(|k| {
                let t = k as f64 * 1e-2;
                if t < 1.0 {
                    sample(t, Some(TRUTH), TRUTH)
                } else if t < 1.2 {
                    sample(t, None, after)
                } else {
                    sample(t, Some(after), after)
                }
            })
            .collect();
        let s = summarize(&ts, &[1.0]);
        assert_eq!(s.segments.len(), 2);
        assert_eq!(s.segments[1].t_start, 1.0);
        assert_eq!(s.segments[1].truth, after);
        let settle = s.segments[1].settling[0].unwrap();
        assert!((settle - 0.2).abs() < 1e-9);
        assert_eq!(s.lambda_min_end, ts.last().unwrap().t);
    }

    #[test]
    fn empty_series() {
        let s = summarize(&[], &[1.0]);
        assert!(s.segments.is_empty());
        assert!(s.bounded);
    }
}
