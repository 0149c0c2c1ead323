use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::model::OscillationTrace;

/// Shortest trace accepted by [`fft_spectrum`].
pub const MIN_SPECTRUM_SAMPLES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WindowFn {
    None,
    #[default]
    Hann,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumOptions {
    /// Subtract a least-squares line before transforming.
    pub detrend: bool,
    pub window: WindowFn,
    /// Zero-padding factor, 1 to 4.
    pub zero_pad: usize,
    /// Minimum peak prominence as a fraction of the global maximum.
    pub prominence: f64,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        Self {
            detrend: true,
            window: WindowFn::Hann,
            zero_pad: 4,
            prominence: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    /// kHz.
    pub freq: f64,
    pub height: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumResult {
    /// kHz, starting at 0.
    pub freqs: Vec<f64>,
    pub power: Vec<f64>,
    /// Ordered by frequency.
    pub peaks: Vec<Peak>,
}

impl SpectrumResult {
    /// Highest peak, if any.
    pub fn dominant(&self) -> Option<Peak> {
        self.peaks
            .iter()
            .copied()
            .max_by(|a, b| a.height.total_cmp(&b.height))
    }

    /// Peaks ordered by decreasing height.
    pub fn peaks_by_height(&self) -> Vec<Peak> {
        let mut p = self.peaks.clone();
        p.sort_by(|a, b| b.height.total_cmp(&a.height));
        p
    }

    /// Largest value of the spectrum within `tol` kHz of `freq`.
    pub fn max_near(&self, freq: f64, tol: f64) -> f64 {
        self.freqs
            .iter()
            .zip(&self.power)
            .filter(|(f, _)| (*f - freq).abs() <= tol)
            .map(|(_, p)| *p)
            .fold(0.0, f64::max)
    }
}

/// Slope and intercept of the least-squares line through `(x, y)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (slope, my - slope * mx)
}

/// One-sided amplitude spectrum of `trace`, with peak detection.
pub fn fft_spectrum(trace: &OscillationTrace, options: &SpectrumOptions) -> Result<SpectrumResult> {
    let n = trace.len();
    if n < MIN_SPECTRUM_SAMPLES {
        return Err(Error::TooFewSamples {
            min: MIN_SPECTRUM_SAMPLES,
            got: n,
        });
    }
    if !(1..=4).contains(&options.zero_pad) {
        return Err(Error::invalid("zero_pad", "must be between 1 and 4"));
    }
    if !(options.prominence >= 0.0) {
        return Err(Error::invalid("prominence", "must be >= 0"));
    }
    let mut y = trace.values().to_vec();
    if options.detrend {
        let t: Vec<f64> = trace.times().collect();
        let (b, c) = linear_fit(&t, &y);
        for (v, t) in y.iter_mut().zip(&t) {
            *v -= b * t + c;
        }
    }
    let w: Vec<f64> = match options.window {
        WindowFn::None => vec![1.0; n],
        WindowFn::Hann => (0..n)
            .map(|k| 0.5 - 0.5 * (2.0 * PI * k as f64 / (n - 1) as f64).cos())
            .collect(),
    };
    let norm = 2.0 / w.iter().sum::<f64>();
    let m = n * options.zero_pad;
    let mut buf: Vec<Complex64> = (0..m)
        .map(|k| Complex64::from(if k < n { y[k] * w[k] } else { 0.0 }))
        .collect();
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);
    let half = m / 2 + 1;
    let freqs: Vec<f64> = (0..half).map(|k| k as f64 / (m as f64 * trace.dt())).collect();
    let power: Vec<f64> = buf[..half].iter().map(|z| z.norm() * norm).collect();
    let peaks = find_peaks(&freqs, &power, options.prominence);
    Ok(SpectrumResult { freqs, power, peaks })
}

/// Interior local maxima whose topographic prominence is at least
/// `rel_prominence` times the global maximum.
pub fn find_peaks(freqs: &[f64], power: &[f64], rel_prominence: f64) -> Vec<Peak> {
    let n = power.len();
    let global = power.iter().cloned().fold(0.0, f64::max);
    if n < 3 || global <= 0.0 {
        return Vec::new();
    }
    let threshold = rel_prominence * global;
    let mut peaks = Vec::new();
    let mut k = 1;
    while k < n - 1 {
        if power[k] > power[k - 1] {
            // walk across a flat top
            let mut e = k;
            while e + 1 < n && power[e + 1] == power[k] {
                e += 1;
            }
            if e < n - 1 && power[e + 1] < power[k] {
                let h = power[k];
                let mut left_min = h;
                let mut i = k;
                while i > 0 {
                    i -= 1;
                    if power[i] > h {
                        break;
                    }
                    left_min = left_min.min(power[i]);
                }
                let mut right_min = h;
                let mut j = e;
                while j + 1 < n {
                    j += 1;
                    if power[j] > h {
                        break;
                    }
                    right_min = right_min.min(power[j]);
                }
                let prominence = h - left_min.max(right_min);
                if prominence >= threshold {
                    let mid = (k + e) / 2;
                    peaks.push(Peak {
                        freq: freqs[mid],
                        height: h,
                    });
                }
            }
            k = e + 1;
        } else {
            k += 1;
        }
    }
    peaks
}
