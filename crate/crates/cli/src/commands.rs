//! The four sub-commands. Each returns the paths it wrote.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

use rabi_rigidity::analysis::{
    fft_spectrum, scan_detuning, sliding_window_frequency, ScanAnalysis, ScanRow, SingleFitOptions,
    SpectrumOptions, SpectrumResult, TwoFitOptions, WindowFn,
};
use rabi_rigidity::ensemble::{ensemble_signal, monte_carlo_signal_with_error};
use rabi_rigidity::fieldmap::field_magnitude_histogram;
use rabi_rigidity::io::read_trace_csv;
use rabi_rigidity::units::{angular_to_khz, khz_to_angular};
use rabi_rigidity::OscillationTrace;

use crate::output::{write_atomic, Cell, Metadata, Table};
use crate::scenario::{AnalysisKind, Case, LoadedScenario, Method, WindowKind};
use crate::svg::{line_plot, Series};

/// Everything a command needs besides the scenario itself.
pub struct Run {
    pub loaded: LoadedScenario,
    pub out_dir: PathBuf,
    pub svg: bool,
    pub seed: u64,
}

impl Run {
    fn name(&self) -> &str {
        &self.loaded.scenario.name
    }

    fn meta(&self, command: &'static str) -> Metadata {
        Metadata::new(self.name(), &self.loaded.text, command, self.seed)
    }

    fn path(&self, suffix: &str, ext: &str) -> PathBuf {
        self.out_dir.join(format!("{}_{suffix}.{ext}", self.name()))
    }

    fn write_table(&self, suffix: &str, table: &Table, meta: &Metadata, extra: &[String]) -> Result<PathBuf> {
        let path = self.path(suffix, "csv");
        write_atomic(&path, &table.to_csv(meta, extra))?;
        Ok(path)
    }

    fn write_svg(&self, suffix: &str, svg: String) -> Result<PathBuf> {
        let path = self.path(suffix, "svg");
        write_atomic(&path, &svg)?;
        Ok(path)
    }
}

fn case_label(c: &Case) -> String {
    format!("Omega0 {} kHz, sigma {} kHz", c.omega0_khz, round6(c.sigma_khz))
}

fn round6(v: f64) -> f64 {
    (v * 1e6).round() / 1e6
}

fn spectrum_options(run: &Run) -> Result<SpectrumOptions> {
    let a = &run.loaded.scenario.analysis;
    if !(1..=4).contains(&a.zero_pad) {
        bail!("analysis.zero_pad: must lie in 1..=4, got {}", a.zero_pad);
    }
    if !(a.prominence > 0.0 && a.prominence < 1.0) {
        bail!("analysis.prominence: must lie in (0, 1)");
    }
    Ok(SpectrumOptions {
        detrend: a.detrend,
        window: match a.window_function {
            WindowKind::Hann => WindowFn::Hann,
            WindowKind::Rectangular => WindowFn::None,
        },
        zero_pad: a.zero_pad,
        prominence: a.prominence,
    })
}

fn single_options(run: &Run) -> SingleFitOptions {
    let a = &run.loaded.scenario.analysis;
    SingleFitOptions {
        drift: a.drift,
        max_iterations: a.max_iterations.unwrap_or(SingleFitOptions::default().max_iterations),
    }
}

fn window(run: &Run, grid_end: f64) -> Result<Option<(f64, f64)>> {
    match run.loaded.scenario.analysis.window_ms {
        None => Ok(None),
        Some([lo, hi]) => {
            if !(lo >= 0.0 && hi > lo) {
                bail!("analysis.window_ms: need 0 <= start < end, got [{lo}, {hi}]");
            }
            if hi > grid_end * (1.0 + 1e-9) {
                bail!("analysis.window_ms: end {hi} ms lies beyond time.t_max_ms");
            }
            Ok(Some((lo, hi)))
        }
    }
}

pub fn simulate(run: &Run) -> Result<Vec<PathBuf>> {
    let grid = run.loaded.time_grid()?;
    let cases = run.loaded.cases()?;
    let detunings = run.loaded.detunings_khz()?;
    let sim = &run.loaded.scenario.simulation;
    let mc = sim.method == Method::MonteCarlo;
    if mc && sim.samples < 1000 {
        bail!("simulation.samples: must be >= 1000, got {}", sim.samples);
    }
    let single = cases.len() == 1 && detunings.len() == 1;
    let mut header: Vec<&str> = if single {
        vec![]
    } else {
        vec!["omega0_kHz", "sigma_kHz", "delta_kHz"]
    };
    header.extend(["t_ms", "S"]);
    if mc {
        header.push("S_stderr");
    }
    let mut table = Table::new(&header);
    let mut series = Vec::new();
    for case in &cases {
        for &delta in &detunings {
            let mut config = case.config.clone();
            config.drive = config.drive.with_delta(khz_to_angular(delta));
            let (trace, err) = if mc {
                let est = monte_carlo_signal_with_error(&config, &grid, sim.samples, run.seed)?;
                (est.trace, Some(est.std_error))
            } else {
                (ensemble_signal(&config, &grid)?, None)
            };
            for (k, (t, s)) in trace.times().zip(trace.values()).enumerate() {
                let mut row: Vec<Cell> = if single {
                    vec![]
                } else {
                    vec![case.omega0_khz.into(), round6(case.sigma_khz).into(), delta.into()]
                };
                row.push(t.into());
                row.push((*s).into());
                if let Some(e) = &err {
                    row.push(e[k].into());
                }
                table.push(row);
            }
            series.push(Series {
                label: format!("{}, delta {delta} kHz", case_label(case)),
                points: trace.times().zip(trace.values().iter().copied()).collect(),
                dashed: false,
            });
        }
    }
    let meta = run.meta("simulate");
    let mut written = vec![run.write_table("trace", &table, &meta, &[])?];
    if run.svg {
        let svg = line_plot(&format!("{}: ensemble signal", run.name()), "t (ms)", "S", &series);
        written.push(run.write_svg("trace", svg)?);
    }
    Ok(written)
}

const SCAN_SINGLE: [&str; 13] = [
    "omega0_kHz",
    "sigma_kHz",
    "delta_kHz",
    "omega_R_kHz",
    "omega_fit_kHz",
    "omega_ci_kHz",
    "amplitude",
    "amplitude_ci",
    "lorentzian_half",
    "gamma_kHz",
    "tau_ms",
    "r_squared",
    "error",
];

const SCAN_TWO: [&str; 17] = [
    "omega0_kHz",
    "sigma_kHz",
    "delta_kHz",
    "omega_bar_kHz",
    "omega_bar_ci_kHz",
    "A",
    "A_ci",
    "B",
    "fraction_A",
    "gamma_a_kHz",
    "gamma_b_kHz",
    "gamma_b_ci_kHz",
    "r_squared",
    "uncertain",
    "indistinguishable",
    "gamma_b_over_sigma",
    "error",
];

const SCAN_FFT: [&str; 7] = [
    "omega0_kHz",
    "sigma_kHz",
    "delta_kHz",
    "omega_R_kHz",
    "peak_kHz",
    "peak_height",
    "n_peaks",
];

fn khz(v: Option<f64>) -> Cell {
    v.map(angular_to_khz).into()
}

fn scan_row(kind: AnalysisKind, case: &Case, delta_khz: f64, r: &ScanRow) -> Vec<Cell> {
    let omega0 = case.omega0_khz;
    let mut row: Vec<Cell> = vec![omega0.into(), round6(case.sigma_khz).into(), delta_khz.into()];
    let err: Cell = r.error.clone().map_or(Cell::Empty, Cell::Text);
    match kind {
        AnalysisKind::Single => {
            row.extend([
                omega0.hypot(delta_khz).into(),
                khz(r.omega_fit),
                khz(r.omega_ci),
                r.amplitude.into(),
                r.amplitude_ci.into(),
                (0.5 / (1.0 + (delta_khz / omega0).powi(2))).into(),
                khz(r.gamma),
                r.tau.into(),
                r.r_squared.into(),
                err,
            ]);
        }
        AnalysisKind::Two => {
            let ratio = r
                .gamma_b
                .filter(|_| case.sigma_khz > 0.0)
                .map(|g| g / khz_to_angular(case.sigma_khz));
            row.extend([
                khz(r.omega_fit),
                khz(r.omega_ci),
                r.amplitude.into(),
                r.amplitude_ci.into(),
                r.b_amp.into(),
                r.fraction_a.into(),
                khz(r.gamma),
                khz(r.gamma_b),
                khz(r.gamma_b_ci),
                r.r_squared.into(),
                r.uncertain.into(),
                r.indistinguishable.into(),
                ratio.into(),
                err,
            ]);
        }
        AnalysisKind::Fft => {
            row.extend([
                omega0.hypot(delta_khz).into(),
                khz(r.omega_fit),
                r.amplitude.into(),
                r.n_peaks.into(),
            ]);
        }
    }
    row
}

pub fn scan(run: &Run) -> Result<Vec<PathBuf>> {
    let grid = run.loaded.time_grid()?;
    let cases = run.loaded.cases()?;
    let detunings_khz = run.loaded.detunings_khz()?;
    let detunings: Vec<f64> = detunings_khz.iter().map(|d| khz_to_angular(*d)).collect();
    let kind = run.loaded.scenario.analysis.kind;
    let window = window(run, grid.t_end())?;
    let analysis = match kind {
        AnalysisKind::Single => ScanAnalysis::Single {
            window: window.unwrap_or((grid.t0(), grid.t_end())),
            options: single_options(run),
        },
        AnalysisKind::Two => ScanAnalysis::Two {
            window,
            options: TwoFitOptions {
                fix_gamma_a: run.loaded.scenario.analysis.fix_gamma_a,
                max_iterations: run
                    .loaded
                    .scenario
                    .analysis
                    .max_iterations
                    .unwrap_or(TwoFitOptions::default().max_iterations),
            },
        },
        AnalysisKind::Fft => ScanAnalysis::Fft {
            options: spectrum_options(run)?,
        },
    };
    let header: &[&str] = match kind {
        AnalysisKind::Single => &SCAN_SINGLE,
        AnalysisKind::Two => &SCAN_TWO,
        AnalysisKind::Fft => &SCAN_FFT,
    };
    let mut table = Table::new(header);
    let mut plots: Vec<Series> = Vec::new();
    let mut gamma_plots: Vec<Series> = Vec::new();
    for case in &cases {
        let rows = scan_detuning(&case.config, &grid, &detunings, &analysis);
        let mut pts = Vec::new();
        let mut gpts = Vec::new();
        for (r, &d) in rows.iter().zip(&detunings_khz) {
            table.push(scan_row(kind, case, d, r));
            let y = match kind {
                AnalysisKind::Two => r.fraction_a,
                _ => r.omega_fit.map(angular_to_khz),
            };
            pts.push((d, y.unwrap_or(f64::NAN)));
            gpts.push((d, r.gamma_b.map_or(f64::NAN, angular_to_khz)));
        }
        plots.push(Series {
            label: case_label(case),
            points: pts,
            dashed: false,
        });
        if kind == AnalysisKind::Two {
            gamma_plots.push(Series {
                label: case_label(case),
                points: gpts,
                dashed: false,
            });
        }
    }
    let meta = run.meta("scan");
    let mut written = vec![run.write_table("scan", &table, &meta, &[])?];
    if run.svg {
        let (y_label, title) = match kind {
            AnalysisKind::Single => ("fitted omega/2pi (kHz)", "fitted Rabi frequency"),
            AnalysisKind::Two => ("fraction_A", "initial fraction at Omega0"),
            AnalysisKind::Fft => ("dominant peak (kHz)", "dominant spectral peak"),
        };
        if kind != AnalysisKind::Two {
            let mut omegas: Vec<f64> = cases.iter().map(|c| c.omega0_khz).collect();
            omegas.dedup();
            for w in omegas {
                plots.push(Series {
                    label: format!("Omega_R, Omega0 {w} kHz"),
                    points: detunings_khz.iter().map(|d| (*d, w.hypot(*d))).collect(),
                    dashed: true,
                });
            }
        }
        let svg = line_plot(&format!("{}: {title}", run.name()), "delta/2pi (kHz)", y_label, &plots);
        written.push(run.write_svg("scan", svg)?);
        if kind == AnalysisKind::Two {
            let svg = line_plot(
                &format!("{}: fast-component decay", run.name()),
                "delta/2pi (kHz)",
                "gamma_b/2pi (kHz)",
                &gamma_plots,
            );
            written.push(run.write_svg("gamma_b", svg)?);
        }
    }
    Ok(written)
}

struct Labelled {
    /// `(omega0, sigma, delta)` in kHz; absent for a trace read from file.
    labels: Option<(f64, f64, f64)>,
    trace: OscillationTrace,
}

fn spectrum_traces(run: &Run) -> Result<Vec<Labelled>> {
    if let Some(input) = &run.loaded.scenario.input {
        let path = run.loaded.resolve(&input.trace);
        let trace = read_trace_csv(&path).context("input.trace")?;
        return Ok(vec![Labelled { labels: None, trace }]);
    }
    let grid = run.loaded.time_grid()?;
    let mut out = Vec::new();
    for case in run.loaded.cases()? {
        for delta in run.loaded.detunings_khz()? {
            let mut config = case.config.clone();
            config.drive = config.drive.with_delta(khz_to_angular(delta));
            out.push(Labelled {
                labels: Some((case.omega0_khz, round6(case.sigma_khz), delta)),
                trace: ensemble_signal(&config, &grid)?,
            });
        }
    }
    Ok(out)
}

fn label_cells(l: &Labelled) -> Vec<Cell> {
    match l.labels {
        Some((w, s, d)) => vec![w.into(), s.into(), d.into()],
        None => vec![],
    }
}

fn with_labels<'a>(labelled: bool, rest: &[&'a str]) -> Vec<&'a str> {
    let mut h = if labelled {
        vec!["omega0_kHz", "sigma_kHz", "delta_kHz"]
    } else {
        vec![]
    };
    h.extend_from_slice(rest);
    h
}

pub fn spectrum(run: &Run) -> Result<Vec<PathBuf>> {
    let opts = spectrum_options(run)?;
    let traces = spectrum_traces(run)?;
    let labelled = traces[0].labels.is_some();
    let spectra: Vec<SpectrumResult> = traces
        .iter()
        .map(|l| fft_spectrum(&l.trace, &opts))
        .collect::<rabi_rigidity::Result<_>>()?;

    let mut power = Table::new(&with_labels(labelled, &["freq_kHz", "power"]));
    let mut peaks = Table::new(&with_labels(labelled, &["rank", "freq_kHz", "height"]));
    for (l, s) in traces.iter().zip(&spectra) {
        for (f, p) in s.freqs.iter().zip(&s.power) {
            let mut row = label_cells(l);
            row.extend([(*f).into(), (*p).into()]);
            power.push(row);
        }
        for (rank, p) in s.peaks_by_height().iter().enumerate() {
            let mut row = label_cells(l);
            row.extend([(rank + 1).into(), p.freq.into(), p.height.into()]);
            peaks.push(row);
        }
    }
    let meta = run.meta("spectrum");
    let mut written = vec![
        run.write_table("spectrum", &power, &meta, &[])?,
        run.write_table("peaks", &peaks, &meta, &[])?,
    ];

    if let Some(sl) = &run.loaded.scenario.analysis.sliding {
        let mut table = Table::new(&with_labels(
            labelled,
            &["t_center_ms", "omega_kHz", "omega_ci_kHz", "error"],
        ));
        let opts = single_options(run);
        for l in &traces {
            let track = sliding_window_frequency(&l.trace, sl.window_ms, sl.hop_ms, &opts)
                .context("analysis.sliding")?;
            for p in track {
                let mut row = label_cells(l);
                row.extend([
                    p.t_center.into(),
                    khz(p.omega),
                    khz(p.omega.map(|_| p.omega_ci)),
                    p.error.map_or(Cell::Empty, Cell::Text),
                ]);
                table.push(row);
            }
        }
        written.push(run.write_table("sliding", &table, &meta, &[])?);
    }

    if run.svg {
        let offset = run.loaded.scenario.output.plot_offset;
        let f_max = traces
            .iter()
            .zip(&spectra)
            .map(|(l, s)| match l.labels {
                Some((w, sigma, d)) => 2.5 * (w.hypot(d) + 2.0 * sigma),
                None => 4.0 * s.dominant().map_or(f64::INFINITY, |p| p.freq),
            })
            .fold(0.0, f64::max);
        let series: Vec<Series> = traces
            .iter()
            .zip(&spectra)
            .enumerate()
            .map(|(i, (l, s))| Series {
                label: match l.labels {
                    Some((w, sigma, d)) => format!("Omega0 {w}, sigma {sigma}, delta {d} kHz"),
                    None => "input".into(),
                },
                points: s
                    .freqs
                    .iter()
                    .zip(&s.power)
                    .filter(|(f, _)| **f <= f_max)
                    .map(|(f, p)| (*f, p + offset * i as f64))
                    .collect(),
                dashed: false,
            })
            .collect();
        let svg = line_plot(&format!("{}: spectra", run.name()), "frequency (kHz)", "amplitude", &series);
        written.push(run.write_svg("spectrum", svg)?);
    }
    Ok(written)
}

pub fn field_dist(run: &Run) -> Result<Vec<PathBuf>> {
    let models = run.loaded.field_models()?;
    let mut hist_table = Table::new(&["current_sign", "bin_center_kHz", "weight"]);
    let mut stats = Table::new(&[
        "current_sign",
        "mean_kHz",
        "std_kHz",
        "skewness",
        "fraction_below",
        "fraction_above",
        "n_bins",
    ]);
    let mut series = Vec::new();
    for (model, beam, bins) in &models {
        let h = field_magnitude_histogram(model, beam, *bins).context("fieldmap")?;
        for (c, w) in h.bin_centers.iter().zip(&h.weights) {
            hist_table.push(vec![model.current_sign.into(), (*c).into(), (*w).into()]);
        }
        stats.push(vec![
            model.current_sign.into(),
            h.mean.into(),
            h.std_dev.into(),
            h.skewness.into(),
            h.fraction_below.into(),
            h.fraction_above.into(),
            h.bin_centers.len().into(),
        ]);
        series.push(Series {
            label: format!("current sign {:+}", model.current_sign),
            points: h.bin_centers.iter().copied().zip(h.weights.iter().copied()).collect(),
            dashed: model.current_sign > 0,
        });
    }
    let meta = run.meta("field-dist");
    let extra = vec!["bin_center_kHz is |B_tot| - B_set".to_owned()];
    let mut written = vec![
        run.write_table("histogram", &hist_table, &meta, &extra)?,
        run.write_table("field_stats", &stats, &meta, &[])?,
    ];
    if run.svg {
        let svg = line_plot(
            &format!("{}: field distribution", run.name()),
            "|B_tot| - B_set (kHz)",
            "weight",
            &series,
        );
        written.push(run.write_svg("histogram", svg)?);
    }
    Ok(written)
}

/// Output directory from the flag, else the scenario, else the working directory.
pub fn output_dir(flag: Option<&Path>, loaded: &LoadedScenario) -> PathBuf {
    match (flag, &loaded.scenario.output.dir) {
        (Some(p), _) => p.to_path_buf(),
        (None, Some(d)) => loaded.resolve(d),
        (None, None) => PathBuf::from("."),
    }
}
