use std::f64::consts::PI;

use nalgebra::DMatrix;

use super::lm::{linear_lsq, minimize, r_squared, LmOptions, LmOutcome, Model};
use super::spectrum::{fft_spectrum, SpectrumOptions, WindowFn};
use crate::error::{Error, Result};
use crate::model::OscillationTrace;

/// Fewest samples a fit window may hold.
pub const MIN_FIT_SAMPLES: usize = 30;

/// Number of spectral peaks used as starting frequencies.
pub const N_STARTS: usize = 5;

/// `A e^{-gamma t} cos(omega t + phi) + B t + C`.
#[derive(Debug, Clone, PartialEq)]
pub struct SingleFreqFit {
    pub a: f64,
    pub gamma: f64,
    pub omega: f64,
    pub phi: f64,
    pub b: f64,
    pub c: f64,
    pub r_squared: f64,
    /// 95% half-widths in the order A, gamma, omega, phi, B, C.
    pub ci95: [f64; 6],
    /// Flat window: nothing to fit.
    pub degenerate: bool,
}

impl SingleFreqFit {
    pub fn eval(&self, t: f64) -> f64 {
        self.a * (-self.gamma * t).exp() * (self.omega * t + self.phi).cos() + self.b * t + self.c
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleFitOptions {
    /// Fit the linear drift `B t`; otherwise B is pinned at 0.
    pub drift: bool,
    pub max_iterations: usize,
}

impl Default for SingleFitOptions {
    fn default() -> Self {
        Self {
            drift: true,
            max_iterations: 200,
        }
    }
}

/// `C + A e^{-gamma^2 t^2 / 2} cos(omega t + phi)`, the Gaussian-decay form.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianDecayFit {
    pub a: f64,
    pub gamma: f64,
    pub omega: f64,
    pub phi: f64,
    pub c: f64,
    pub r_squared: f64,
    /// Order A, gamma, omega, phi, C.
    pub ci95: [f64; 5],
}

pub(crate) struct Windowed {
    pub t: Vec<f64>,
    pub y: Vec<f64>,
}

pub(crate) fn windowed(trace: &OscillationTrace, window: (f64, f64)) -> Result<Windowed> {
    let (lo, hi) = window;
    if !(lo < hi) {
        return Err(Error::invalid("window", format!("empty window [{lo}, {hi}]")));
    }
    let eps = 1e-9 * trace.dt();
    if lo < trace.t0() - eps || hi > trace.t_end() + eps {
        return Err(Error::invalid(
            "window",
            format!(
                "[{lo}, {hi}] ms exceeds the trace span [{}, {}] ms",
                trace.t0(),
                trace.t_end()
            ),
        ));
    }
    let r = trace.window_indices(lo, hi);
    if r.len() < MIN_FIT_SAMPLES {
        return Err(Error::TooFewSamples {
            min: MIN_FIT_SAMPLES,
            got: r.len(),
        });
    }
    Ok(Windowed {
        t: r.clone().map(|k| trace.time(k)).collect(),
        y: trace.values()[r].to_vec(),
    })
}

fn is_flat(y: &[f64]) -> bool {
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let spread = y.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max);
    spread <= 1e-12 * mean.abs().max(1e-300) || spread == 0.0
}

/// Angular frequencies of the strongest spectral peaks in the window, strongest first.
pub(crate) fn candidate_frequencies(t: &[f64], y: &[f64], count: usize) -> Vec<f64> {
    let dt = t[1] - t[0];
    let Ok(tr) = OscillationTrace::new(t[0], dt, y.to_vec()) else {
        return Vec::new();
    };
    let opts = SpectrumOptions {
        detrend: true,
        window: WindowFn::Hann,
        zero_pad: 4,
        prominence: 0.0,
    };
    let Ok(s) = fft_spectrum(&tr, &opts) else {
        return Vec::new();
    };
    let mut out: Vec<f64> = s
        .peaks_by_height()
        .iter()
        .take(count)
        .map(|p| 2.0 * PI * p.freq)
        .collect();
    if out.is_empty() {
        let k = (1..s.power.len())
            .max_by(|&a, &b| s.power[a].total_cmp(&s.power[b]))
            .unwrap_or(1);
        out.push(2.0 * PI * s.freqs[k]);
    }
    out
}

pub(crate) fn wrap_phase(phi: f64) -> f64 {
    let w = (phi + PI).rem_euclid(2.0 * PI) - PI;
    if w <= -PI {
        w + 2.0 * PI
    } else {
        w
    }
}

/// Puts `(A, omega, phi)` into the canonical A >= 0, omega >= 0, phi in (-pi, pi].
pub(crate) fn canonical(a: f64, omega: f64, phi: f64) -> (f64, f64, f64) {
    let (omega, phi) = if omega < 0.0 { (-omega, -phi) } else { (omega, phi) };
    let (a, phi) = if a < 0.0 { (-a, phi + PI) } else { (a, phi) };
    (a, omega, wrap_phase(phi))
}

struct SingleModel<'a> {
    t: &'a [f64],
    y: &'a [f64],
}

impl Model for SingleModel<'_> {
    fn n_params(&self) -> usize {
        6
    }
    fn n_residuals(&self) -> usize {
        self.t.len()
    }
    fn eval(&self, p: &[f64], r: &mut [f64], j: &mut DMatrix<f64>) {
        let [a, g, w, phi, b, c] = [p[0], p[1], p[2], p[3], p[4], p[5]];
        for (k, (&t, &y)) in self.t.iter().zip(self.y).enumerate() {
            let e = (-g * t).exp();
            let (s, co) = (w * t + phi).sin_cos();
            r[k] = a * e * co + b * t + c - y;
            j[(k, 0)] = e * co;
            j[(k, 1)] = -t * a * e * co;
            j[(k, 2)] = -a * e * s * t;
            j[(k, 3)] = -a * e * s;
            j[(k, 4)] = t;
            j[(k, 5)] = 1.0;
        }
    }
}

/// Linear amplitudes for fixed `(omega, envelope)`: returns `(A, phi, B, C, ssr)`.
fn linear_start(
    t: &[f64],
    y: &[f64],
    omega: f64,
    envelope: impl Fn(f64) -> f64,
    drift: bool,
) -> Option<(f64, f64, f64, f64, f64)> {
    let cols = if drift { 4 } else { 3 };
    let x = DMatrix::from_fn(t.len(), cols, |k, c| {
        let tk = t[k];
        match c {
            0 => envelope(tk) * (omega * tk).cos(),
            1 => envelope(tk) * (omega * tk).sin(),
            2 => 1.0,
            _ => tk,
        }
    });
    let (b, ssr) = linear_lsq(&x, y)?;
    // a cos + b sin = A cos(wt + phi) with A cos phi = a, -A sin phi = b
    let amp = b[0].hypot(b[1]);
    let phi = (-b[1]).atan2(b[0]);
    let drift_b = if drift { b[3] } else { 0.0 };
    Some((amp, phi, drift_b, b[2], ssr))
}

/// Least-squares fit of the damped cosine with drift over `window` (ms).
///
/// Starting points come from the strongest spectral peaks of the window,
/// each combined with a few decay rates; the best local optimum wins.
pub fn fit_single_frequency(
    trace: &OscillationTrace,
    window: (f64, f64),
    options: &SingleFitOptions,
) -> Result<SingleFreqFit> {
    let w = windowed(trace, window)?;
    if is_flat(&w.y) {
        let mean = w.y.iter().sum::<f64>() / w.y.len() as f64;
        return Ok(SingleFreqFit {
            a: 0.0,
            gamma: 0.0,
            omega: 0.0,
            phi: 0.0,
            b: 0.0,
            c: mean,
            r_squared: 0.0,
            ci95: [f64::INFINITY; 6],
            degenerate: true,
        });
    }
    let span = w.t[w.t.len() - 1] - w.t[0];
    let gammas = [0.0, 0.5 / span, 2.0 / span, 6.0 / span];
    let mut starts = Vec::new();
    for omega in candidate_frequencies(&w.t, &w.y, N_STARTS) {
        let best = gammas
            .iter()
            .filter_map(|&g| {
                let (a, phi, b, c, ssr) =
                    linear_start(&w.t, &w.y, omega, |t| (-g * t).exp(), options.drift)?;
                Some((vec![a, g, omega, phi, b, c], ssr))
            })
            .min_by(|x, y| x.1.total_cmp(&y.1));
        if let Some((p, _)) = best {
            starts.push(p);
        }
    }
    if starts.is_empty() {
        return Err(Error::FitNoConvergence {
            iterations: 0,
            last: Vec::new(),
        });
    }
    let model = SingleModel { t: &w.t, y: &w.y };
    let mut opts = LmOptions::unbounded(6, options.max_iterations);
    opts.lower[2] = 0.0;
    opts.fixed[4] = !options.drift;
    let outcome = best_of(&model, &starts, &opts)?;
    let p = &outcome.params;
    let (a, omega, phi) = canonical(p[0], p[2], p[3]);
    let ci = &outcome.ci95;
    Ok(SingleFreqFit {
        a,
        gamma: p[1],
        omega,
        phi,
        b: p[4],
        c: p[5],
        r_squared: r_squared(&w.y, outcome.ssr),
        ci95: [ci[0], ci[1], ci[2], ci[3], ci[4], ci[5]],
        degenerate: false,
    })
}

/// Runs LM from each start and keeps the lowest residual; fails only if all fail.
pub(crate) fn best_of<M: Model>(model: &M, starts: &[Vec<f64>], opts: &LmOptions) -> Result<LmOutcome> {
    let mut best: Option<LmOutcome> = None;
    let mut last_err = None;
    for s in starts {
        match minimize(model, s, opts) {
            Ok(o) => {
                if best.as_ref().is_none_or(|b| o.ssr < b.ssr) {
                    best = Some(o);
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    best.ok_or_else(|| last_err.expect("at least one start"))
}

struct GaussModel<'a> {
    t: &'a [f64],
    y: &'a [f64],
}

impl Model for GaussModel<'_> {
    fn n_params(&self) -> usize {
        5
    }
    fn n_residuals(&self) -> usize {
        self.t.len()
    }
    fn eval(&self, p: &[f64], r: &mut [f64], j: &mut DMatrix<f64>) {
        let [a, g, w, phi, c] = [p[0], p[1], p[2], p[3], p[4]];
        for (k, (&t, &y)) in self.t.iter().zip(self.y).enumerate() {
            let e = (-0.5 * g * g * t * t).exp();
            let (s, co) = (w * t + phi).sin_cos();
            r[k] = a * e * co + c - y;
            j[(k, 0)] = e * co;
            j[(k, 1)] = -a * g * t * t * e * co;
            j[(k, 2)] = -a * e * s * t;
            j[(k, 3)] = -a * e * s;
            j[(k, 4)] = 1.0;
        }
    }
}

/// Fit of `C + A e^{-gamma^2 t^2/2} cos(omega t + phi)` over `window`; time is
/// measured from the trace origin, so the envelope is anchored at t = 0.
pub fn fit_gaussian_decay(
    trace: &OscillationTrace,
    window: (f64, f64),
    max_iterations: usize,
) -> Result<GaussianDecayFit> {
    let w = windowed(trace, window)?;
    if is_flat(&w.y) {
        return Err(Error::invalid("trace", "flat window, nothing to fit"));
    }
    let t_end = w.t[w.t.len() - 1];
    let gammas = [0.3 / t_end, 1.0 / t_end, 2.0 / t_end, 4.0 / t_end];
    let mut starts = Vec::new();
    for omega in candidate_frequencies(&w.t, &w.y, N_STARTS) {
        let best = gammas
            .iter()
            .filter_map(|&g| {
                let (a, phi, _, c, ssr) =
                    linear_start(&w.t, &w.y, omega, |t| (-0.5 * g * g * t * t).exp(), false)?;
                Some((vec![a, g, omega, phi, c], ssr))
            })
            .min_by(|x, y| x.1.total_cmp(&y.1));
        if let Some((p, _)) = best {
            starts.push(p);
        }
    }
    if starts.is_empty() {
        return Err(Error::FitNoConvergence {
            iterations: 0,
            last: Vec::new(),
        });
    }
    let model = GaussModel { t: &w.t, y: &w.y };
    let mut opts = LmOptions::unbounded(5, max_iterations);
    opts.lower[2] = 0.0;
    let outcome = best_of(&model, &starts, &opts)?;
    let p = &outcome.params;
    let (a, omega, phi) = canonical(p[0], p[2], p[3]);
    let ci = &outcome.ci95;
    Ok(GaussianDecayFit {
        a,
        gamma: p[1].abs(),
        omega,
        phi,
        c: p[4],
        r_squared: r_squared(&w.y, outcome.ssr),
        ci95: [ci[0], ci[1], ci[2], ci[3], ci[4]],
    })
}
