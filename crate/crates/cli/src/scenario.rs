//! Scenario files: one TOML document describing a run.
//!
//! Frequencies are ordinary frequencies in kHz, times in ms, lengths in mm.
//! Relative paths are resolved against the directory holding the file.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::Deserialize;

use rabi_rigidity::ensemble::{
    AtomModel, DetuningDistribution, EnsembleConfig, MultilevelModel, QuadratureSpec,
};
use rabi_rigidity::fieldmap::{
    field_magnitude_histogram, histogram_to_distribution, BeamProfile, ComponentProfiles,
    FieldGridModel, Profile, ProbeBeam, FIG8_B_SET_KHZ,
};
use rabi_rigidity::io::{parse_two_columns, read_empirical_distribution};
use rabi_rigidity::multilevel::{Dopri5Options, Integrator};
use rabi_rigidity::units::khz_to_angular;
use rabi_rigidity::{DriveParams, TimeGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Simulate,
    Scan,
    Spectrum,
    FieldDist,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Simulate => "simulate",
            CommandKind::Scan => "scan",
            CommandKind::Spectrum => "spectrum",
            CommandKind::FieldDist => "field-dist",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    pub fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(v) => vec![v.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

/// Inclusive arithmetic range.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangeSpec {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl RangeSpec {
    fn values(&self, field: &str) -> Result<Vec<f64>> {
        if !(self.step > 0.0) || !self.start.is_finite() || !self.stop.is_finite() {
            bail!("{field}: step must be > 0 and bounds finite");
        }
        if self.stop < self.start {
            bail!("{field}: stop lies below start");
        }
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        if n > 100_000 {
            bail!("{field}: more than 100000 points");
        }
        Ok((0..=n).map(|k| self.start + k as f64 * self.step).collect())
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    /// Command run by `reproduce`.
    pub command: Option<CommandKind>,
    #[serde(default)]
    pub seed: u64,
    pub drive: Option<DriveSection>,
    #[serde(default)]
    pub distribution: DistributionSection,
    #[serde(default)]
    pub atom_model: AtomModelSection,
    pub time: Option<TimeSection>,
    #[serde(default)]
    pub quadrature: QuadratureSection,
    #[serde(default)]
    pub simulation: SimulationSection,
    #[serde(default)]
    pub analysis: AnalysisSection,
    pub fieldmap: Option<FieldmapSection>,
    pub input: Option<InputSection>,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveSection {
    pub omega0_khz: OneOrMany<f64>,
    pub detuning_khz: Option<OneOrMany<f64>>,
    pub detuning_range_khz: Option<RangeSpec>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DistributionSection {
    #[default]
    Homogeneous,
    Gaussian {
        sigma_khz: OneOrMany<f64>,
    },
    SkewedGaussian {
        sigma_khz: OneOrMany<f64>,
        /// Shape parameter of the skew-normal in detuning space.
        skew: f64,
    },
    /// Two columns `(shift_kHz, weight)`.
    Empirical {
        path: PathBuf,
    },
    /// Histogram of the `[fieldmap]` section.
    Fieldmap,
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegratorKind {
    #[default]
    Propagator,
    Adaptive,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AtomModelSection {
    #[default]
    Analytic,
    Multilevel {
        #[serde(default)]
        gamma_khz: f64,
        #[serde(default = "default_quadratic_shift")]
        quadratic_shift_khz: f64,
        #[serde(default)]
        relaxation_khz: f64,
        #[serde(default = "one")]
        pumping_fraction: f64,
        #[serde(default)]
        integrator: IntegratorKind,
    },
}

fn default_quadratic_shift() -> f64 {
    100.0
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    pub t_max_ms: f64,
    pub dt_ms: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSection {
    #[serde(default = "default_nodes")]
    pub nodes: usize,
    #[serde(default = "default_half_width")]
    pub half_width_sigma: f64,
}

fn default_nodes() -> usize {
    QuadratureSpec::default().nodes
}

fn default_half_width() -> f64 {
    QuadratureSpec::default().half_width
}

impl Default for QuadratureSection {
    fn default() -> Self {
        Self {
            nodes: default_nodes(),
            half_width_sigma: default_half_width(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    #[default]
    Quadrature,
    MonteCarlo,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSection {
    #[serde(default)]
    pub method: Method,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_samples() -> usize {
    100_000
}

impl Default for SimulationSection {
    fn default() -> Self {
        Self {
            method: Method::Quadrature,
            samples: default_samples(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnalysisKind {
    #[default]
    Single,
    Two,
    Fft,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowKind {
    #[default]
    Hann,
    Rectangular,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlidingSection {
    pub window_ms: f64,
    pub hop_ms: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSection {
    #[serde(default)]
    pub kind: AnalysisKind,
    /// Fit window `[t_min, t_max]` in ms.
    pub window_ms: Option<[f64; 2]>,
    #[serde(default = "yes")]
    pub drift: bool,
    #[serde(default = "yes")]
    pub fix_gamma_a: bool,
    pub max_iterations: Option<usize>,
    #[serde(default = "default_zero_pad")]
    pub zero_pad: usize,
    #[serde(default)]
    pub window_function: WindowKind,
    #[serde(default = "yes")]
    pub detrend: bool,
    #[serde(default = "default_prominence")]
    pub prominence: f64,
    pub sliding: Option<SlidingSection>,
}

fn yes() -> bool {
    true
}

fn default_zero_pad() -> usize {
    4
}

fn default_prominence() -> f64 {
    0.05
}

impl Default for AnalysisSection {
    fn default() -> Self {
        Self {
            kind: AnalysisKind::Single,
            window_ms: None,
            drift: true,
            fix_gamma_a: true,
            max_iterations: None,
            zero_pad: default_zero_pad(),
            window_function: WindowKind::Hann,
            detrend: true,
            prominence: default_prominence(),
            sliding: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileSection {
    Constant { value_khz: f64 },
    /// `[[position_mm, value_kHz], ...]`.
    PiecewiseLinear { nodes: Vec<[f64; 2]> },
    Polynomial { coeffs: Vec<f64>, scale_mm: f64 },
    /// Two columns `(position_mm, value_kHz)`, read as a piecewise-linear curve.
    File { path: PathBuf },
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfilesSection {
    pub b0x: Option<ProfileSection>,
    pub b0y: Option<ProfileSection>,
    pub b0z: Option<ProfileSection>,
    pub b1x: Option<ProfileSection>,
    pub b1y: Option<ProfileSection>,
    /// Deviation of the coil's axial field from `b_set`.
    pub b1z: Option<ProfileSection>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BeamKind {
    FlatTop,
    Gaussian,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeamSection {
    pub profile: BeamKind,
    pub diameter_mm: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldmapSection {
    /// `"fig8_like"` or absent.
    pub preset: Option<String>,
    #[serde(default)]
    pub profiles: ProfilesSection,
    pub b_set_khz: Option<f64>,
    pub current_sign: OneOrMany<i8>,
    pub beam: BeamSection,
    #[serde(default = "default_bins")]
    pub bins: usize,
}

fn default_bins() -> usize {
    60
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputSection {
    /// Two-column `(t_ms, value)` trace.
    pub trace: PathBuf,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
    #[serde(default)]
    pub svg: bool,
    /// Vertical displacement between successive spectra in plots.
    #[serde(default)]
    pub plot_offset: f64,
}

/// A parsed scenario with its raw text and base directory.
#[derive(Debug, Clone)]
pub struct LoadedScenario {
    pub scenario: Scenario,
    pub text: String,
    pub base_dir: PathBuf,
}

impl LoadedScenario {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read scenario file {}", path.display()))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, base).with_context(|| format!("in scenario file {}", path.display()))
    }

    pub fn parse(text: &str, base_dir: PathBuf) -> Result<Self> {
        let de = toml::Deserializer::parse(text).map_err(|e| anyhow!("{e}"))?;
        let scenario: Scenario = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            anyhow!("{path}: {}", e.into_inner())
        })?;
        Ok(Self {
            scenario,
            text: text.to_owned(),
            base_dir,
        })
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }
}

/// One ensemble configuration of the sweep, with its labels in kHz.
#[derive(Debug, Clone)]
pub struct Case {
    pub omega0_khz: f64,
    /// Standard deviation of the distribution (kHz).
    pub sigma_khz: f64,
    pub config: EnsembleConfig,
}

fn positive(field: &str, v: f64) -> Result<f64> {
    if !(v > 0.0) || !v.is_finite() {
        bail!("{field}: must be > 0, got {v}");
    }
    Ok(v)
}

fn non_negative(field: &str, v: f64) -> Result<f64> {
    if !(v >= 0.0) || !v.is_finite() {
        bail!("{field}: must be >= 0, got {v}");
    }
    Ok(v)
}

impl LoadedScenario {
    fn drive(&self) -> Result<&DriveSection> {
        self.scenario
            .drive
            .as_ref()
            .ok_or_else(|| anyhow!("drive: section is required"))
    }

    /// Central detunings (kHz).
    pub fn detunings_khz(&self) -> Result<Vec<f64>> {
        let d = self.drive()?;
        let values = match (&d.detuning_khz, &d.detuning_range_khz) {
            (Some(_), Some(_)) => bail!("drive: give detuning_khz or detuning_range_khz, not both"),
            (Some(list), None) => list.to_vec(),
            (None, Some(r)) => r.values("drive.detuning_range_khz")?,
            (None, None) => bail!("drive.detuning_khz: missing"),
        };
        if values.is_empty() {
            bail!("drive.detuning_khz: list is empty");
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            bail!("drive.detuning_khz: value {v} is not finite");
        }
        Ok(values)
    }

    pub fn time_grid(&self) -> Result<TimeGrid> {
        let t = self
            .scenario
            .time
            .as_ref()
            .ok_or_else(|| anyhow!("time: section is required"))?;
        positive("time.t_max_ms", t.t_max_ms)?;
        positive("time.dt_ms", t.dt_ms)?;
        if t.dt_ms > t.t_max_ms {
            bail!("time.dt_ms: exceeds t_max_ms");
        }
        TimeGrid::span(t.t_max_ms, t.dt_ms).context("time")
    }

    fn atom_model(&self) -> Result<AtomModel> {
        Ok(match &self.scenario.atom_model {
            AtomModelSection::Analytic => AtomModel::AnalyticTwoLevel,
            AtomModelSection::Multilevel {
                gamma_khz,
                quadratic_shift_khz,
                relaxation_khz,
                pumping_fraction,
                integrator,
            } => {
                non_negative("atom_model.gamma_khz", *gamma_khz)?;
                positive("atom_model.quadratic_shift_khz", *quadratic_shift_khz)?;
                non_negative("atom_model.relaxation_khz", *relaxation_khz)?;
                if !(0.0..=1.0).contains(pumping_fraction) {
                    bail!("atom_model.pumping_fraction: must lie in [0, 1]");
                }
                AtomModel::Multilevel(MultilevelModel {
                    quadratic_shift: khz_to_angular(*quadratic_shift_khz),
                    gamma: khz_to_angular(*gamma_khz),
                    relaxation: khz_to_angular(*relaxation_khz),
                    pumping_fraction: *pumping_fraction,
                    integrator: match integrator {
                        IntegratorKind::Propagator => Integrator::Propagator,
                        IntegratorKind::Adaptive => Integrator::Adaptive(Dopri5Options::default()),
                    },
                })
            }
        })
    }

    /// Distributions with their standard deviation (kHz).
    fn distributions(&self) -> Result<Vec<(f64, DetuningDistribution)>> {
        let sigmas = |field: &str, s: &OneOrMany<f64>| -> Result<Vec<f64>> {
            let v = s.to_vec();
            if v.is_empty() {
                bail!("{field}: list is empty");
            }
            v.into_iter().map(|x| non_negative(field, x)).collect()
        };
        Ok(match &self.scenario.distribution {
            DistributionSection::Homogeneous => {
                vec![(0.0, DetuningDistribution::gaussian(0.0)?)]
            }
            DistributionSection::Gaussian { sigma_khz } => sigmas("distribution.sigma_khz", sigma_khz)?
                .into_iter()
                .map(|s| Ok((s, DetuningDistribution::gaussian(khz_to_angular(s))?)))
                .collect::<Result<_>>()?,
            DistributionSection::SkewedGaussian { sigma_khz, skew } => {
                if !skew.is_finite() {
                    bail!("distribution.skew: must be finite");
                }
                sigmas("distribution.sigma_khz", sigma_khz)?
                    .into_iter()
                    .map(|s| Ok((s, DetuningDistribution::skewed(khz_to_angular(s), *skew)?)))
                    .collect::<Result<_>>()?
            }
            DistributionSection::Empirical { path } => {
                let d = read_empirical_distribution(&self.resolve(path))
                    .context("distribution.path")?;
                vec![(d.sigma() / (2.0 * std::f64::consts::PI), d)]
            }
            DistributionSection::Fieldmap => {
                let models = self.field_models()?;
                if models.len() != 1 {
                    bail!("fieldmap.current_sign: a fieldmap distribution needs exactly one sign");
                }
                let (model, beam, bins) = &models[0];
                let hist = field_magnitude_histogram(model, beam, *bins).context("fieldmap")?;
                let d = histogram_to_distribution(&hist)?;
                vec![(hist.std_dev, d)]
            }
        })
    }

    /// Every (Omega0, sigma) combination, each with detuning zero.
    pub fn cases(&self) -> Result<Vec<Case>> {
        let omegas = self.drive()?.omega0_khz.to_vec();
        if omegas.is_empty() {
            bail!("drive.omega0_khz: list is empty");
        }
        let atom_model = self.atom_model()?;
        let q = &self.scenario.quadrature;
        let quadrature = QuadratureSpec {
            nodes: q.nodes,
            half_width: q.half_width_sigma,
        };
        let dists = self.distributions()?;
        let mut out = Vec::new();
        for &w in &omegas {
            positive("drive.omega0_khz", w)?;
            for (sigma, dist) in &dists {
                let config = EnsembleConfig {
                    drive: DriveParams::from_khz(w, 0.0)?,
                    distribution: dist.clone(),
                    atom_model,
                    quadrature,
                };
                config.validate().context("quadrature")?;
                out.push(Case {
                    omega0_khz: w,
                    sigma_khz: *sigma,
                    config,
                });
            }
        }
        Ok(out)
    }

    fn profile(&self, field: &str, p: &ProfileSection) -> Result<Profile> {
        let profile = match p {
            ProfileSection::Constant { value_khz } => Profile::Constant(*value_khz),
            ProfileSection::PiecewiseLinear { nodes } => {
                Profile::PiecewiseLinear(nodes.iter().map(|n| (n[0], n[1])).collect())
            }
            ProfileSection::Polynomial { coeffs, scale_mm } => Profile::Polynomial {
                coeffs: coeffs.clone(),
                scale: *scale_mm,
            },
            ProfileSection::File { path } => {
                let path = self.resolve(path);
                let text = std::fs::read_to_string(&path)
                    .with_context(|| format!("{field}: cannot read profile file {}", path.display()))?;
                Profile::PiecewiseLinear(parse_two_columns(&text, &path)?)
            }
        };
        profile
            .validate("profile")
            .with_context(|| field.to_owned())?;
        Ok(profile)
    }

    /// Field models for each requested current sign, with the beam and bin count.
    pub fn field_models(&self) -> Result<Vec<(FieldGridModel, ProbeBeam, usize)>> {
        let f = self
            .scenario
            .fieldmap
            .as_ref()
            .ok_or_else(|| anyhow!("fieldmap: section is required"))?;
        let signs = f.current_sign.to_vec();
        if signs.is_empty() {
            bail!("fieldmap.current_sign: list is empty");
        }
        if let Some(s) = signs.iter().find(|s| **s != 1 && **s != -1) {
            bail!("fieldmap.current_sign: must be +1 or -1, got {s}");
        }
        if f.bins == 0 {
            bail!("fieldmap.bins: must be >= 1");
        }
        let beam = ProbeBeam::new(
            match f.beam.profile {
                BeamKind::FlatTop => BeamProfile::FlatTop,
                BeamKind::Gaussian => BeamProfile::Gaussian,
            },
            positive("fieldmap.beam.diameter_mm", f.beam.diameter_mm)?,
        )?;
        let (mut profiles, default_b_set) = match f.preset.as_deref() {
            None => (ComponentProfiles::default(), None),
            Some("fig8_like") => (FieldGridModel::fig8_like(1)?.profiles, Some(FIG8_B_SET_KHZ)),
            Some(other) => bail!("fieldmap.preset: unknown preset `{other}`"),
        };
        let p = &f.profiles;
        let slots: [(&str, &Option<ProfileSection>, &mut Profile); 6] = [
            ("fieldmap.profiles.b0x", &p.b0x, &mut profiles.b0x),
            ("fieldmap.profiles.b0y", &p.b0y, &mut profiles.b0y),
            ("fieldmap.profiles.b0z", &p.b0z, &mut profiles.b0z),
            ("fieldmap.profiles.b1x", &p.b1x, &mut profiles.b1x),
            ("fieldmap.profiles.b1y", &p.b1y, &mut profiles.b1y),
            ("fieldmap.profiles.b1z", &p.b1z, &mut profiles.b1z),
        ];
        for (field, section, slot) in slots {
            if let Some(section) = section {
                *slot = self.profile(field, section)?;
            }
        }
        let b_set = match (f.b_set_khz, default_b_set) {
            (Some(b), _) => positive("fieldmap.b_set_khz", b)?,
            (None, Some(b)) => b,
            (None, None) => bail!("fieldmap.b_set_khz: missing"),
        };
        signs
            .into_iter()
            .map(|s| Ok((FieldGridModel::new(profiles.clone(), b_set, s).context("fieldmap")?, beam, f.bins)))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<LoadedScenario> {
        LoadedScenario::parse(text, PathBuf::from("."))
    }

    const MINIMAL: &str = r#"
name = "t"
[drive]
omega0_khz = 9.0
detuning_khz = [-1.0, 0.0]
[time]
t_max_ms = 1.0
dt_ms = 0.01
"#;

    #[test]
    fn minimal_defaults() {
        let s = parse(MINIMAL).unwrap();
        assert_eq!(s.scenario.seed, 0);
        assert_eq!(s.detunings_khz().unwrap(), vec![-1.0, 0.0]);
        let cases = s.cases().unwrap();
        assert_eq!(cases.len(), 1);
        assert_eq!(cases[0].sigma_khz, 0.0);
        assert_eq!(s.time_grid().unwrap().len(), 101);
    }

    #[test]
    fn errors_name_the_field() {
        let bad = MINIMAL.replace("omega0_khz = 9.0", "omega0_khz = \"fast\"");
        let e = format!("{:#}", parse(&bad).unwrap_err());
        assert!(e.contains("drive.omega0_khz"), "{e}");
        let bad = MINIMAL.replace("dt_ms = 0.01", "dt_ms = 0.01\nstep = 3");
        let e = format!("{:#}", parse(&bad).unwrap_err());
        assert!(e.contains("time"), "{e}");
        let s = parse(&MINIMAL.replace("[-1.0, 0.0]", "[]")).unwrap();
        let e = format!("{:#}", s.detunings_khz().unwrap_err());
        assert!(e.contains("drive.detuning_khz"), "{e}");
        let s = parse(&MINIMAL.replace("omega0_khz = 9.0", "omega0_khz = -9.0")).unwrap();
        let e = format!("{:#}", s.cases().unwrap_err());
        assert!(e.contains("drive.omega0_khz"), "{e}");
    }

    #[test]
    fn ranges_and_sweeps() {
        let text = MINIMAL.replace(
            "detuning_khz = [-1.0, 0.0]",
            "detuning_range_khz = { start = -2.0, stop = 2.0, step = 0.5 }",
        ) + "[distribution]\nkind = \"skewed_gaussian\"\nsigma_khz = [1.0, 2.0]\nskew = 0.3\n";
        let s = parse(&text).unwrap();
        assert_eq!(s.detunings_khz().unwrap().len(), 9);
        assert_eq!(s.cases().unwrap().len(), 2);
    }

    #[test]
    fn missing_files_are_named() {
        let text = MINIMAL.to_owned() + "[distribution]\nkind = \"empirical\"\npath = \"no/such/hist.csv\"\n";
        let e = format!("{:#}", parse(&text).unwrap().cases().unwrap_err());
        assert!(e.contains("no/such/hist.csv"), "{e}");
    }

    #[test]
    fn fieldmap_preset_with_override() {
        let text = r#"
name = "f"
[fieldmap]
preset = "fig8_like"
current_sign = [1, -1]
beam = { profile = "flat_top", diameter_mm = 12.0 }
[fieldmap.profiles.b0x]
kind = "constant"
value_khz = 0.0
"#;
        let s = parse(text).unwrap();
        let models = s.field_models().unwrap();
        assert_eq!(models.len(), 2);
        assert_eq!(models[0].0.profiles.b0x, Profile::Constant(0.0));
        assert_eq!(models[1].0.current_sign, -1);
    }
}
