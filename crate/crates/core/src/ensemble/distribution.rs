use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Normal, SkewNormal};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};

/// Standard normal density.
fn phi(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

/// Standard normal CDF.
fn big_phi(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// Location and scale `(xi, omega)` of the skew-normal with shape `alpha`
/// that has mean 0 and standard deviation `sigma`.
pub fn skew_normal_location_scale(sigma: f64, alpha: f64) -> (f64, f64) {
    let d = alpha / (1.0 + alpha * alpha).sqrt();
    let omega = sigma / (1.0 - 2.0 * d * d / PI).sqrt();
    let xi = -omega * d * (2.0 / PI).sqrt();
    (xi, omega)
}

/// Skew-normal density with shape `skew`, centred on its mean and scaled to
/// standard deviation `sigma`. `skew = 0` is the ordinary Gaussian.
pub fn skewed_gaussian_density(sigma: f64, skew: f64, x: f64) -> f64 {
    let (xi, omega) = skew_normal_location_scale(sigma, skew);
    let z = (x - xi) / omega;
    2.0 / omega * phi(z) * big_phi(skew * z)
}

/// Histogram of local shifts (rad/ms) with normalized weights.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalDistribution {
    shifts: Vec<f64>,
    weights: Vec<f64>,
    cumulative: Vec<f64>,
}

impl EmpiricalDistribution {
    /// Normalizes `weights`; they must be non-negative with a positive sum.
    pub fn new(shifts: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if shifts.is_empty() {
            return Err(Error::invalid("empirical", "histogram is empty"));
        }
        if shifts.len() != weights.len() {
            return Err(Error::invalid("empirical", "shift and weight counts differ"));
        }
        if shifts.iter().any(|s| !s.is_finite()) {
            return Err(Error::invalid("empirical", "shifts must be finite"));
        }
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::invalid("empirical", "weights must be non-negative"));
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::invalid("empirical", "weights sum to zero"));
        }
        let weights: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let mut acc = 0.0;
        let cumulative = weights
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        Ok(Self {
            shifts,
            weights,
            cumulative,
        })
    }

    pub fn shifts(&self) -> &[f64] {
        &self.shifts
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn mean(&self) -> f64 {
        self.shifts.iter().zip(&self.weights).map(|(s, w)| s * w).sum()
    }

    pub fn std_dev(&self) -> f64 {
        let m = self.mean();
        self.shifts
            .iter()
            .zip(&self.weights)
            .map(|(s, w)| w * (s - m).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Inverse-CDF draw of one bin value.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random::<f64>() * self.cumulative[self.cumulative.len() - 1];
        let idx = self.cumulative.partition_point(|c| *c <= u);
        self.shifts[idx.min(self.shifts.len() - 1)]
    }
}

/// Spread of local detunings around the central detuning. Parametric kinds
/// have zero mean, so the central detuning is the ensemble average.
#[derive(Debug, Clone, PartialEq)]
pub enum DetuningDistribution {
    Gaussian { sigma: f64 },
    /// Skew-normal with shape parameter `alpha`.
    SkewedGaussian { sigma: f64, alpha: f64 },
    Empirical(EmpiricalDistribution),
}

impl DetuningDistribution {
    pub fn gaussian(sigma: f64) -> Result<Self> {
        check_sigma(sigma)?;
        Ok(Self::Gaussian { sigma })
    }

    pub fn skewed(sigma: f64, alpha: f64) -> Result<Self> {
        check_sigma(sigma)?;
        if !alpha.is_finite() {
            return Err(Error::invalid("skew", "must be finite"));
        }
        Ok(Self::SkewedGaussian { sigma, alpha })
    }

    pub fn empirical(shifts: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        Ok(Self::Empirical(EmpiricalDistribution::new(shifts, weights)?))
    }

    /// Standard deviation (rad/ms).
    pub fn sigma(&self) -> f64 {
        match self {
            Self::Gaussian { sigma } | Self::SkewedGaussian { sigma, .. } => *sigma,
            Self::Empirical(e) => e.std_dev(),
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            Self::Empirical(e) => e.mean(),
            _ => 0.0,
        }
    }

    pub fn is_parametric(&self) -> bool {
        !matches!(self, Self::Empirical(_))
    }

    /// Density at local shift `x`; `None` for empirical or zero-width kinds.
    pub fn density(&self, x: f64) -> Option<f64> {
        match *self {
            Self::Gaussian { sigma } if sigma > 0.0 => Some(phi(x / sigma) / sigma),
            Self::SkewedGaussian { sigma, alpha } if sigma > 0.0 => {
                Some(skewed_gaussian_density(sigma, alpha, x))
            }
            _ => None,
        }
    }

    /// One local shift drawn from the distribution.
    pub fn sampler(&self) -> Result<Sampler<'_>> {
        Ok(match *self {
            Self::Gaussian { sigma } | Self::SkewedGaussian { sigma, .. } if sigma == 0.0 => {
                Sampler::Point
            }
            Self::Gaussian { sigma } => Sampler::Normal(
                Normal::new(0.0, sigma).map_err(|e| Error::Unsampleable(e.to_string()))?,
            ),
            Self::SkewedGaussian { sigma, alpha } => {
                let (xi, omega) = skew_normal_location_scale(sigma, alpha);
                Sampler::Skew(
                    SkewNormal::new(xi, omega, alpha).map_err(|e| Error::Unsampleable(e.to_string()))?,
                )
            }
            Self::Empirical(ref e) => Sampler::Empirical(e),
        })
    }
}

fn check_sigma(sigma: f64) -> Result<()> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::invalid("sigma", format!("must be >= 0, got {sigma}")));
    }
    Ok(())
}

pub enum Sampler<'a> {
    Point,
    Normal(Normal<f64>),
    Skew(SkewNormal<f64>),
    Empirical(&'a EmpiricalDistribution),
}

impl Sampler<'_> {
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Sampler::Point => 0.0,
            Sampler::Normal(n) => n.sample(rng),
            Sampler::Skew(s) => s.sample(rng),
            Sampler::Empirical(e) => e.sample(rng),
        }
    }
}
