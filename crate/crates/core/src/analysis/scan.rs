use std::f64::consts::PI;

use rayon::prelude::*;

use super::single::{fit_single_frequency, SingleFitOptions};
use super::spectrum::{fft_spectrum, SpectrumOptions};
use super::twofreq::{default_two_freq_window, fit_two_frequency, TwoFitOptions};
use crate::ensemble::{ensemble_signal, EnsembleConfig};
use crate::error::Result;
use crate::model::TimeGrid;

/// Analysis applied to each detuning of a scan.
#[derive(Debug, Clone, PartialEq)]
pub enum ScanAnalysis {
    Single {
        window: (f64, f64),
        options: SingleFitOptions,
    },
    /// `window: None` uses `[0, 10 * 2pi / Omega0]`.
    Two {
        window: Option<(f64, f64)>,
        options: TwoFitOptions,
    },
    Fft {
        options: SpectrumOptions,
    },
}

/// One detuning of a scan. Frequencies are angular (rad/ms); absent fields
/// do not apply to the chosen analysis or the row failed.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScanRow {
    pub delta: f64,
    /// Single fit: omega. FFT: dominant peak. Two-frequency: Omega_bar.
    pub omega_fit: Option<f64>,
    pub omega_ci: Option<f64>,
    pub amplitude: Option<f64>,
    pub amplitude_ci: Option<f64>,
    pub gamma: Option<f64>,
    pub gamma_ci: Option<f64>,
    pub tau: Option<f64>,
    pub fraction_a: Option<f64>,
    pub b_amp: Option<f64>,
    pub gamma_b: Option<f64>,
    pub gamma_b_ci: Option<f64>,
    pub r_squared: Option<f64>,
    pub uncertain: Option<bool>,
    pub indistinguishable: Option<bool>,
    pub n_peaks: Option<usize>,
    pub error: Option<String>,
}

fn analyse(config: &EnsembleConfig, grid: &TimeGrid, analysis: &ScanAnalysis, row: &mut ScanRow) -> Result<()> {
    let trace = ensemble_signal(config, grid)?;
    match analysis {
        ScanAnalysis::Single { window, options } => {
            let f = fit_single_frequency(&trace, *window, options)?;
            row.omega_fit = Some(f.omega);
            row.omega_ci = Some(f.ci95[2]);
            row.amplitude = Some(f.a);
            row.amplitude_ci = Some(f.ci95[0]);
            row.gamma = Some(f.gamma);
            row.gamma_ci = Some(f.ci95[1]);
            row.tau = Some(1.0 / f.gamma);
            row.r_squared = Some(f.r_squared);
            row.uncertain = Some(f.degenerate);
        }
        ScanAnalysis::Two { window, options } => {
            let omega0 = config.drive.omega0();
            let win = window.unwrap_or_else(|| default_two_freq_window(omega0));
            let f = fit_two_frequency(&trace, omega0, win, options)?;
            row.omega_fit = Some(f.omega_bar);
            row.omega_ci = Some(f.ci95[4]);
            row.amplitude = Some(f.a);
            row.amplitude_ci = Some(f.ci95[0]);
            row.gamma = Some(f.gamma_a);
            row.gamma_ci = Some(f.ci95[2]);
            row.fraction_a = Some(f.fraction_a);
            row.b_amp = Some(f.b_amp);
            row.gamma_b = Some(f.gamma_b);
            row.gamma_b_ci = Some(f.ci95[6]);
            row.r_squared = Some(f.r_squared);
            row.uncertain = Some(f.uncertain);
            row.indistinguishable = Some(f.indistinguishable);
        }
        ScanAnalysis::Fft { options } => {
            let s = fft_spectrum(&trace, options)?;
            row.n_peaks = Some(s.peaks.len());
            if let Some(p) = s.dominant() {
                row.omega_fit = Some(2.0 * PI * p.freq);
                row.amplitude = Some(p.height);
            }
        }
    }
    Ok(())
}

/// Runs `analysis` on the ensemble trace at each detuning in `detunings`
/// (rad/ms). Rows keep the input order; a failing row carries its error
/// and the others still complete.
pub fn scan_detuning(
    base: &EnsembleConfig,
    grid: &TimeGrid,
    detunings: &[f64],
    analysis: &ScanAnalysis,
) -> Vec<ScanRow> {
    detunings
        .par_iter()
        .map(|&delta| {
            let mut row = ScanRow {
                delta,
                ..Default::default()
            };
            let mut config = base.clone();
            config.drive = base.drive.with_delta(delta);
            if let Err(e) = analyse(&config, grid, analysis, &mut row) {
                row = ScanRow {
                    delta,
                    error: Some(e.to_string()),
                    ..Default::default()
                };
            }
            row
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::DetuningDistribution;
    use crate::model::DriveParams;

    fn base(sigma: f64) -> EnsembleConfig {
        EnsembleConfig::analytic(
            DriveParams::new(1.0, 0.0).unwrap(),
            DetuningDistribution::gaussian(sigma).unwrap(),
        )
    }

    #[test]
    fn homogeneous_scan_follows_generalized_rabi() {
        let grid = TimeGrid::span(60.0, 0.05).unwrap();
        let detunings = [-3.0, -1.0, 0.0, 0.5, 2.0, 3.0];
        let rows = scan_detuning(
            &base(0.0),
            &grid,
            &detunings,
            &ScanAnalysis::Single {
                window: (0.0, 60.0),
                options: SingleFitOptions::default(),
            },
        );
        for (row, d) in rows.iter().zip(detunings) {
            assert_eq!(row.delta, d);
            let w = row.omega_fit.unwrap();
            assert!((w - (1.0f64 + d * d).sqrt()).abs() < 1e-6);
            let amp = row.amplitude.unwrap();
            assert!((amp - 0.5 / (1.0 + d * d)).abs() < 1e-6);
        }
    }

    #[test]
    fn failing_rows_are_reported_in_place() {
        let grid = TimeGrid::span(5.0, 0.5).unwrap();
        let rows = scan_detuning(
            &base(0.5),
            &grid,
            &[0.0, 1.0],
            &ScanAnalysis::Single {
                window: (0.0, 5.0),
                options: SingleFitOptions::default(),
            },
        );
        assert_eq!(rows.len(), 2);
        assert!(rows.iter().all(|r| r.error.is_some() && r.omega_fit.is_none()));
        assert_eq!(rows[1].delta, 1.0);
    }

    #[test]
    fn fft_scan_reports_dominant_peak() {
        let grid = TimeGrid::span(100.0, 0.1).unwrap();
        let rows = scan_detuning(
            &base(0.0),
            &grid,
            &[0.0, 2.0],
            &ScanAnalysis::Fft {
                options: SpectrumOptions::default(),
            },
        );
        let bin = 2.0 * PI / 100.0;
        assert!((rows[0].omega_fit.unwrap() - 1.0).abs() < bin);
        assert!((rows[1].omega_fit.unwrap() - 5f64.sqrt()).abs() < bin);
    }
}
