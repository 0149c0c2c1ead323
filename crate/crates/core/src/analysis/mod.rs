//! Fits, spectra and detuning scans of oscillation traces.

pub mod lm;
mod scan;
mod single;
mod sliding;
mod spectrum;
mod twofreq;

pub use scan::{scan_detuning, ScanAnalysis, ScanRow};
pub use single::{
    fit_gaussian_decay, fit_single_frequency, GaussianDecayFit, SingleFitOptions, SingleFreqFit,
    MIN_FIT_SAMPLES,
};
pub use sliding::{is_non_increasing, sliding_window_frequency, SlidingPoint, MIN_WINDOW_PERIODS};
pub use spectrum::{
    fft_spectrum, find_peaks, linear_fit, Peak, SpectrumOptions, SpectrumResult, WindowFn,
    MIN_SPECTRUM_SAMPLES,
};
pub use twofreq::{
    default_two_freq_window, fit_two_frequency, TwoFitOptions, TwoFreqFit, UNCERTAIN_CI_FRACTION,
};
