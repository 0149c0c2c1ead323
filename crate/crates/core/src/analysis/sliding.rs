use super::single::{candidate_frequencies, fit_single_frequency, SingleFitOptions};
use crate::error::{Error, Result};
use crate::model::OscillationTrace;

/// Minimum number of dominant periods a window must span.
pub const MIN_WINDOW_PERIODS: f64 = 3.0;

/// One window of a sliding-frequency track.
#[derive(Debug, Clone, PartialEq)]
pub struct SlidingPoint {
    pub t_center: f64,
    /// Fitted angular frequency; `None` when the window's fit failed.
    pub omega: Option<f64>,
    /// 95% half-width of `omega`.
    pub omega_ci: f64,
    pub error: Option<String>,
}

/// Fits a damped cosine on successive windows of length `window_length`
/// advanced by `hop` (both ms). Failures become gaps.
pub fn sliding_window_frequency(
    trace: &OscillationTrace,
    window_length: f64,
    hop: f64,
    options: &SingleFitOptions,
) -> Result<Vec<SlidingPoint>> {
    if !(window_length > 0.0) || !(hop > 0.0) {
        return Err(Error::invalid("window", "length and hop must be > 0"));
    }
    let span = trace.t_end() - trace.t0();
    if window_length > span + 1e-9 * trace.dt() {
        return Err(Error::invalid("window_length", "longer than the trace"));
    }
    let t: Vec<f64> = trace.times().collect();
    let dominant = candidate_frequencies(&t, trace.values(), 1)
        .first()
        .copied()
        .unwrap_or(0.0);
    let periods = dominant * window_length / (2.0 * std::f64::consts::PI);
    if periods < MIN_WINDOW_PERIODS {
        return Err(Error::invalid(
            "window_length",
            format!("spans {periods:.2} dominant periods, need at least {MIN_WINDOW_PERIODS}"),
        ));
    }
    let mut out = Vec::new();
    let mut k = 0usize;
    loop {
        let lo = trace.t0() + k as f64 * hop;
        let hi = lo + window_length;
        if hi > trace.t_end() + 1e-9 * trace.dt() {
            break;
        }
        let point = match fit_single_frequency(trace, (lo, hi), options) {
            Ok(f) if !f.degenerate => SlidingPoint {
                t_center: 0.5 * (lo + hi),
                omega: Some(f.omega),
                omega_ci: f.ci95[2],
                error: None,
            },
            Ok(_) => SlidingPoint {
                t_center: 0.5 * (lo + hi),
                omega: None,
                omega_ci: f64::INFINITY,
                error: Some("flat window".into()),
            },
            Err(e) => SlidingPoint {
                t_center: 0.5 * (lo + hi),
                omega: None,
                omega_ci: f64::INFINITY,
                error: Some(e.to_string()),
            },
        };
        out.push(point);
        k += 1;
    }
    Ok(out)
}

/// Whether the fitted frequencies never rise by more than the combined CI
/// between consecutive successful windows, up to rounding.
pub fn is_non_increasing(track: &[SlidingPoint]) -> bool {
    let pts: Vec<(f64, f64)> = track
        .iter()
        .filter_map(|p| p.omega.map(|w| (w, p.omega_ci)))
        .collect();
    pts.windows(2)
        .all(|w| w[1].0 <= w[0].0 + w[0].1 + w[1].1 + 1e-9 * w[0].0.abs())
}
