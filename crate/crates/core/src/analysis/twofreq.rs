use std::f64::consts::PI;

use nalgebra::DMatrix;

use super::lm::{linear_lsq, r_squared, LmOptions, Model};
use super::single::{best_of, canonical, candidate_frequencies, windowed, N_STARTS};
use crate::error::{Error, Result};
use crate::model::OscillationTrace;

/// Relative full CI width above which a parameter counts as poorly determined.
pub const UNCERTAIN_CI_FRACTION: f64 = 0.25;

/// `A e^{-gamma_a^2 t^2/2} cos(Omega0 t + phi_a) + B e^{-gamma_b^2 t^2/2} cos(Omega_bar t + phi_b) + offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoFreqFit {
    pub a: f64,
    pub phi_a: f64,
    pub gamma_a: f64,
    pub b_amp: f64,
    pub omega_bar: f64,
    pub phi_b: f64,
    pub gamma_b: f64,
    pub offset: f64,
    pub r_squared: f64,
    /// 95% half-widths in the order A, phi_a, gamma_a, B, Omega_bar, phi_b, gamma_b, offset.
    pub ci95: [f64; 8],
    /// |A| / (|A| + |B|).
    pub fraction_a: f64,
    /// Some of A, B, Omega_bar, gamma_b has a full CI wider than 25% of its value.
    pub uncertain: bool,
    /// Omega_bar lies within its CI of Omega0, so the second component is redundant.
    pub indistinguishable: bool,
    /// Flat trace.
    pub degenerate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoFitOptions {
    /// Hold gamma_a at zero.
    pub fix_gamma_a: bool,
    pub max_iterations: usize,
}

impl Default for TwoFitOptions {
    fn default() -> Self {
        Self {
            fix_gamma_a: true,
            max_iterations: 300,
        }
    }
}

/// Default window `[0, 10 * 2pi / omega0]`.
pub fn default_two_freq_window(omega0: f64) -> (f64, f64) {
    (0.0, 10.0 * 2.0 * PI / omega0)
}

struct TwoModel<'a> {
    t: &'a [f64],
    y: &'a [f64],
    omega0: f64,
}

impl Model for TwoModel<'_> {
    fn n_params(&self) -> usize {
        8
    }
    fn n_residuals(&self) -> usize {
        self.t.len()
    }
    fn eval(&self, p: &[f64], r: &mut [f64], j: &mut DMatrix<f64>) {
        let [a, pa, ga, b, wb, pb, gb, off] = [p[0], p[1], p[2], p[3], p[4], p[5], p[6], p[7]];
        for (k, (&t, &y)) in self.t.iter().zip(self.y).enumerate() {
            let ea = (-0.5 * ga * ga * t * t).exp();
            let eb = (-0.5 * gb * gb * t * t).exp();
            let (sa, ca) = (self.omega0 * t + pa).sin_cos();
            let (sb, cb) = (wb * t + pb).sin_cos();
            r[k] = a * ea * ca + b * eb * cb + off - y;
            j[(k, 0)] = ea * ca;
            j[(k, 1)] = -a * ea * sa;
            j[(k, 2)] = -a * ga * t * t * ea * ca;
            j[(k, 3)] = eb * cb;
            j[(k, 4)] = -b * eb * sb * t;
            j[(k, 5)] = -b * eb * sb;
            j[(k, 6)] = -b * gb * t * t * eb * cb;
            j[(k, 7)] = 1.0;
        }
    }
}

/// Linear amplitudes with both frequencies and decay rates fixed.
fn linear_start(t: &[f64], y: &[f64], omega0: f64, omega_bar: f64, gamma_b: f64) -> Option<(Vec<f64>, f64)> {
    let x = DMatrix::from_fn(t.len(), 5, |k, c| {
        let tk = t[k];
        let eb = (-0.5 * gamma_b * gamma_b * tk * tk).exp();
        match c {
            0 => (omega0 * tk).cos(),
            1 => (omega0 * tk).sin(),
            2 => eb * (omega_bar * tk).cos(),
            3 => eb * (omega_bar * tk).sin(),
            _ => 1.0,
        }
    });
    let (c, ssr) = linear_lsq(&x, y)?;
    let p = vec![
        c[0].hypot(c[1]),
        (-c[1]).atan2(c[0]),
        0.0,
        c[2].hypot(c[3]),
        omega_bar,
        (-c[3]).atan2(c[2]),
        gamma_b,
        c[4],
    ];
    Some((p, ssr))
}

fn is_uncertain(value: f64, half_width: f64) -> bool {
    !(2.0 * half_width <= UNCERTAIN_CI_FRACTION * value.abs())
}

/// Two-component fit with the slow frequency pinned at `omega0` (rad/ms).
pub fn fit_two_frequency(
    trace: &OscillationTrace,
    omega0: f64,
    window: (f64, f64),
    options: &TwoFitOptions,
) -> Result<TwoFreqFit> {
    if !(omega0 > 0.0) {
        return Err(Error::invalid("omega0", "must be > 0"));
    }
    let w = windowed(trace, window)?;
    let mean = w.y.iter().sum::<f64>() / w.y.len() as f64;
    if w.y.iter().all(|v| (v - mean).abs() <= 1e-12 * mean.abs().max(1e-300)) {
        return Ok(TwoFreqFit {
            a: 0.0,
            phi_a: 0.0,
            gamma_a: 0.0,
            b_amp: 0.0,
            omega_bar: omega0,
            phi_b: 0.0,
            gamma_b: 0.0,
            offset: mean,
            r_squared: 0.0,
            ci95: [f64::INFINITY; 8],
            fraction_a: 0.0,
            uncertain: true,
            indistinguishable: true,
            degenerate: true,
        });
    }

    let mut bars: Vec<f64> = candidate_frequencies(&w.t, &w.y, N_STARTS)
        .into_iter()
        .filter(|f| *f > 1.02 * omega0)
        .collect();
    bars.extend([1.1, 1.3, 1.6, 2.0, 2.5, 3.2].iter().map(|m| m * omega0));
    let gammas = [0.1, 0.3, 0.7, 1.5, 3.0].map(|g| g * omega0);
    let mut seeds: Vec<(Vec<f64>, f64)> = Vec::new();
    for &wb in &bars {
        for &gb in &gammas {
            if let Some(s) = linear_start(&w.t, &w.y, omega0, wb, gb) {
                seeds.push(s);
            }
        }
    }
    seeds.sort_by(|a, b| a.1.total_cmp(&b.1));
    // the Gaussian envelope is flat in gamma at zero, so a free rate needs a nudge
    let gamma_a_seed = if options.fix_gamma_a {
        0.0
    } else {
        1.0 / (w.t[w.t.len() - 1] - w.t[0])
    };
    let starts: Vec<Vec<f64>> = seeds
        .into_iter()
        .take(6)
        .map(|mut s| {
            s.0[2] = gamma_a_seed;
            s.0
        })
        .collect();
    if starts.is_empty() {
        return Err(Error::FitNoConvergence {
            iterations: 0,
            last: Vec::new(),
        });
    }

    let model = TwoModel {
        t: &w.t,
        y: &w.y,
        omega0,
    };
    let mut opts = LmOptions::unbounded(8, options.max_iterations);
    opts.fixed[2] = options.fix_gamma_a;
    opts.lower[2] = 0.0;
    opts.lower[4] = omega0;
    opts.lower[6] = 0.0;
    let out = best_of(&model, &starts, &opts)?;
    let p = &out.params;
    let ci = &out.ci95;
    let (a, _, phi_a) = canonical(p[0], omega0, p[1]);
    let (b_amp, omega_bar, phi_b) = canonical(p[3], p[4], p[5]);
    let (gamma_a, gamma_b) = (p[2].abs(), p[6].abs());
    let total = a + b_amp;
    let fraction_a = if total > 0.0 { a / total } else { 0.0 };
    let uncertain = is_uncertain(a, ci[0])
        || is_uncertain(b_amp, ci[3])
        || is_uncertain(omega_bar, ci[4])
        || is_uncertain(gamma_b, ci[6]);
    let indistinguishable = !((omega_bar - omega0).abs() > ci[4]);
    Ok(TwoFreqFit {
        a,
        phi_a,
        gamma_a,
        b_amp,
        omega_bar,
        phi_b,
        gamma_b,
        offset: p[7],
        r_squared: r_squared(&w.y, out.ssr),
        ci95: [ci[0], ci[1], ci[2], ci[3], ci[4], ci[5], ci[6], ci[7]],
        fraction_a,
        uncertain,
        indistinguishable,
        degenerate: false,
    })
}
