//! Inhomogeneous ensembles: detuning distributions and the averaged signal.

mod distribution;
mod quadrature;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub use distribution::{
    skew_normal_location_scale, skewed_gaussian_density, DetuningDistribution, EmpiricalDistribution,
    Sampler,
};
pub use quadrature::GaussLegendre;

use crate::error::{Error, Result};
use crate::model::{generalized_rabi, DriveParams, OscillationTrace, TimeGrid};
use crate::multilevel::{self, DensityMatrix, Integrator, F2_LEVELS};

/// Largest probability mass allowed outside the quadrature support.
pub const MAX_MASS_OUTSIDE: f64 = 1e-6;

/// Monte Carlo samples per RNG stream.
const MC_CHUNK: usize = 4096;

/// Nodes whose weight falls below this are skipped by the master-equation kernel.
const NEGLIGIBLE_WEIGHT: f64 = 1e-15;

/// Settings of the five-level kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultilevelModel {
    pub quadratic_shift: f64,
    pub gamma: f64,
    /// Depolarizing population relaxation rate.
    pub relaxation: f64,
    /// Initial population of |2,2>; the rest is spread over the other levels.
    pub pumping_fraction: f64,
    pub integrator: Integrator,
}

impl MultilevelModel {
    pub fn new(quadratic_shift: f64, gamma: f64) -> Self {
        Self {
            quadratic_shift,
            gamma,
            relaxation: 0.0,
            pumping_fraction: 1.0,
            integrator: Integrator::Propagator,
        }
    }
}

/// Per-atom response used inside the ensemble average.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AtomModel {
    AnalyticTwoLevel,
    Multilevel(MultilevelModel),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    /// Minimum Gauss-Legendre node count; raised automatically when the
    /// integrand oscillates faster than the rule resolves.
    pub nodes: usize,
    /// Support half-width in units of sigma, around the mean.
    pub half_width: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            nodes: 2001,
            half_width: 8.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleConfig {
    pub drive: DriveParams,
    pub distribution: DetuningDistribution,
    pub atom_model: AtomModel,
    pub quadrature: QuadratureSpec,
}

impl EnsembleConfig {
    pub fn analytic(drive: DriveParams, distribution: DetuningDistribution) -> Self {
        Self {
            drive,
            distribution,
            atom_model: AtomModel::AnalyticTwoLevel,
            quadrature: QuadratureSpec::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.quadrature.half_width >= 5.0) {
            return Err(Error::invalid(
                "quadrature.half_width",
                format!("must be >= 5 sigma, got {}", self.quadrature.half_width),
            ));
        }
        if self.distribution.is_parametric() && self.quadrature.nodes < 201 {
            return Err(Error::invalid(
                "quadrature.nodes",
                format!("must be >= 201, got {}", self.quadrature.nodes),
            ));
        }
        if let AtomModel::Multilevel(m) = &self.atom_model {
            if !(m.quadratic_shift >= 0.0) {
                return Err(Error::invalid("quadratic_shift", "must be >= 0"));
            }
            if !(m.gamma >= 0.0) {
                return Err(Error::invalid("gamma", "must be >= 0"));
            }
            if !(0.0..=1.0).contains(&m.pumping_fraction) {
                return Err(Error::invalid("pumping_fraction", "must lie in [0, 1]"));
            }
        }
        Ok(())
    }

    /// Quadrature nodes `(local_shift, weight)` for the distribution, with
    /// weights summing to 1. `t_max` sets the node count needed to follow the
    /// oscillation of the integrand in the detuning.
    pub fn nodes(&self, t_max: f64) -> Result<Vec<(f64, f64)>> {
        self.validate()?;
        match &self.distribution {
            DetuningDistribution::Empirical(e) => Ok(e
                .shifts()
                .iter()
                .copied()
                .zip(e.weights().iter().copied())
                .collect()),
            d if d.sigma() == 0.0 => Ok(vec![(0.0, 1.0)]),
            d => {
                let sigma = d.sigma();
                let half = self.quadrature.half_width * sigma;
                // phase of cos(omega(delta) t) varies by at most `half * t_max` over the half-support
                let needed = (1.2 * half * t_max.abs()).ceil() as usize + 200;
                let n = self.quadrature.nodes.max(needed);
                let gl = GaussLegendre::cached(n);
                let mut nodes: Vec<(f64, f64)> = gl
                    .nodes
                    .iter()
                    .zip(&gl.weights)
                    .map(|(x, w)| {
                        let s = half * x;
                        (s, half * w * d.density(s).unwrap_or(0.0))
                    })
                    .collect();
                let mass: f64 = nodes.iter().map(|(_, w)| w).sum();
                if (1.0 - mass).abs() > MAX_MASS_OUTSIDE {
                    return Err(Error::QuadratureSupport { mass: 1.0 - mass });
                }
                for n in &mut nodes {
                    n.1 /= mass;
                }
                Ok(nodes)
            }
        }
    }
}

/// Two-level response `(1 - cos(OmegaR t)) * L / 2`.
fn analytic_kernel(drive: &DriveParams, shift: f64, t: f64) -> f64 {
    let rabi = generalized_rabi(drive, shift);
    0.5 * drive.lorentzian(shift) * (1.0 - (rabi * t).cos())
}

fn multilevel_trace(
    drive: &DriveParams,
    model: &MultilevelModel,
    shift: f64,
    grid: &TimeGrid,
) -> Result<Vec<f64>> {
    let system = multilevel::build_f2_system(drive, shift, model.quadratic_shift, model.gamma)?
        .with_relaxation(model.relaxation)?;
    let rho0 = DensityMatrix::pumped(F2_LEVELS, 0, model.pumping_fraction)?;
    match model.integrator {
        Integrator::Propagator => multilevel::propagate_population(&system, &rho0, grid, 1),
        _ => Ok(multilevel::evolve_with(&system, &rho0, grid, &model.integrator)?.into_values()),
    }
}

/// Ensemble-averaged P1 on `grid` by quadrature over the distribution.
pub fn ensemble_signal(config: &EnsembleConfig, grid: &TimeGrid) -> Result<OscillationTrace> {
    let t_max = grid.t0().abs().max(grid.t_end().abs());
    let nodes = config.nodes(t_max)?;
    let values = match &config.atom_model {
        AtomModel::AnalyticTwoLevel => {
            let drive = config.drive;
            let times: Vec<f64> = grid.times().collect();
            times
                .par_iter()
                .map(|&t| {
                    nodes
                        .iter()
                        .map(|&(s, w)| w * analytic_kernel(&drive, s, t))
                        .sum::<f64>()
                })
                .collect()
        }
        AtomModel::Multilevel(model) => {
            let traces: Vec<(f64, Vec<f64>)> = nodes
                .par_iter()
                .filter(|(_, w)| *w > NEGLIGIBLE_WEIGHT)
                .map(|&(s, w)| Ok((w, multilevel_trace(&config.drive, model, s, grid)?)))
                .collect::<Result<_>>()?;
            let mut acc = vec![0.0; grid.len()];
            for (w, tr) in &traces {
                for (a, v) in acc.iter_mut().zip(tr) {
                    *a += w * v;
                }
            }
            acc
        }
    };
    OscillationTrace::from_grid(grid, values)
}

/// Monte Carlo estimate and the standard error of each sample.
#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloEstimate {
    pub trace: OscillationTrace,
    pub std_error: Vec<f64>,
}

/// Sample-mean estimate of the ensemble signal from `n_samples` random atoms.
/// Identical inputs give bit-identical output regardless of thread count.
pub fn monte_carlo_signal(
    config: &EnsembleConfig,
    grid: &TimeGrid,
    n_samples: usize,
    seed: u64,
) -> Result<OscillationTrace> {
    Ok(monte_carlo_signal_with_error(config, grid, n_samples, seed)?.trace)
}

pub fn monte_carlo_signal_with_error(
    config: &EnsembleConfig,
    grid: &TimeGrid,
    n_samples: usize,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    if n_samples < 1000 {
        return Err(Error::invalid(
            "n_samples",
            format!("must be >= 1000, got {n_samples}"),
        ));
    }
    config.validate()?;
    let sampler = config.distribution.sampler()?;
    let times: Vec<f64> = grid.times().collect();
    let chunks = n_samples.div_ceil(MC_CHUNK);
    let partial: Vec<(Vec<f64>, Vec<f64>)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let count = MC_CHUNK.min(n_samples - c * MC_CHUNK);
            let mut sum = vec![0.0; times.len()];
            let mut sum_sq = vec![0.0; times.len()];
            for _ in 0..count {
                let shift = sampler.draw(&mut rng);
                let values = match &config.atom_model {
                    AtomModel::AnalyticTwoLevel => times
                        .iter()
                        .map(|&t| analytic_kernel(&config.drive, shift, t))
                        .collect(),
                    AtomModel::Multilevel(model) => {
                        multilevel_trace(&config.drive, model, shift, grid)?
                    }
                };
                for ((s, q), v) in sum.iter_mut().zip(sum_sq.iter_mut()).zip(values) {
                    *s += v;
                    *q += v * v;
                }
            }
            Ok((sum, sum_sq))
        })
        .collect::<Result<_>>()?;
    let mut sum = vec![0.0; times.len()];
    let mut sum_sq = vec![0.0; times.len()];
    for (s, q) in &partial {
        for k in 0..times.len() {
            sum[k] += s[k];
            sum_sq[k] += q[k];
        }
    }
    let n = n_samples as f64;
    let mean: Vec<f64> = sum.iter().map(|s| s / n).collect();
    let std_error = mean
        .iter()
        .zip(&sum_sq)
        .map(|(m, q)| ((q / n - m * m).max(0.0) * n / (n - 1.0) / n).sqrt())
        .collect();
    Ok(MonteCarloEstimate {
        trace: OscillationTrace::from_grid(grid, mean)?,
        std_error,
    })
}
