//! Spatial DC-field model of the cell and the detuning distribution it induces.
//!
//! All field values are expressed as Larmor frequencies in kHz (0.7 kHz/mG),
//! positions in mm. The total field is `B0 + s*B1` with `s = current_sign`;
//! `B1` carries the set-point `b_set` along z plus a deviation profile.

use rayon::prelude::*;

use crate::ensemble::DetuningDistribution;
use crate::error::{Error, Result};
use crate::units::khz_to_angular;

/// Set-point field of the fig8-like preset: 26 G at 0.7 kHz/mG.
pub const FIG8_B_SET_KHZ: f64 = 26_000.0 * crate::units::KHZ_PER_MILLIGAUSS;

/// One-dimensional field profile along a single coordinate.
#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    Constant(f64),
    /// Nodes `(position_mm, value_kHz)` sorted by position; held constant
    /// beyond the end nodes.
    PiecewiseLinear(Vec<(f64, f64)>),
    /// `sum_k coeffs[k] * (x / scale)^k`.
    Polynomial { coeffs: Vec<f64>, scale: f64 },
}

impl Profile {
    pub fn zero() -> Self {
        Profile::Constant(0.0)
    }

    pub fn validate(&self, name: &'static str) -> Result<()> {
        match self {
            Profile::Constant(v) if !v.is_finite() => Err(Error::invalid(name, "value must be finite")),
            Profile::PiecewiseLinear(nodes) => {
                if nodes.is_empty() {
                    return Err(Error::invalid(name, "needs at least one node"));
                }
                if nodes.iter().any(|(x, v)| !x.is_finite() || !v.is_finite()) {
                    return Err(Error::invalid(name, "nodes must be finite"));
                }
                if nodes.windows(2).any(|w| w[1].0 <= w[0].0) {
                    return Err(Error::invalid(name, "node positions must increase"));
                }
                Ok(())
            }
            Profile::Polynomial { coeffs, scale } => {
                if !(*scale != 0.0 && scale.is_finite()) {
                    return Err(Error::invalid(name, "scale must be finite and non-zero"));
                }
                if coeffs.iter().any(|c| !c.is_finite()) {
                    return Err(Error::invalid(name, "coefficients must be finite"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Profile::Constant(v) => *v,
            Profile::PiecewiseLinear(nodes) => {
                let (x0, v0) = nodes[0];
                let (xn, vn) = nodes[nodes.len() - 1];
                if x <= x0 {
                    return v0;
                }
                if x >= xn {
                    return vn;
                }
                let i = nodes.partition_point(|(p, _)| *p <= x);
                let (xa, va) = nodes[i - 1];
                let (xb, vb) = nodes[i];
                va + (vb - va) * (x - xa) / (xb - xa)
            }
            Profile::Polynomial { coeffs, scale } => {
                let u = x / scale;
                coeffs.iter().rev().fold(0.0, |acc, c| acc * u + c)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComponentProfiles {
    pub b0x: Profile,
    pub b0y: Profile,
    pub b0z: Profile,
    pub b1x: Profile,
    pub b1y: Profile,
    /// Deviation of the coil field's z component from `b_set`.
    pub b1z: Profile,
}

impl Default for ComponentProfiles {
    fn default() -> Self {
        Self {
            b0x: Profile::zero(),
            b0y: Profile::zero(),
            b0z: Profile::zero(),
            b1x: Profile::zero(),
            b1y: Profile::zero(),
            b1z: Profile::zero(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldGridModel {
    pub x_bounds: (f64, f64),
    pub y_bounds: (f64, f64),
    pub z_bounds: (f64, f64),
    pub spacing: f64,
    pub profiles: ComponentProfiles,
    pub b_set: f64,
    /// +1 or -1.
    pub current_sign: i8,
}

impl FieldGridModel {
    /// Standard cell (x, y in [-8, 8] mm, z in [-20, 20] mm, 0.5 mm grid).
    pub fn new(profiles: ComponentProfiles, b_set: f64, current_sign: i8) -> Result<Self> {
        let m = Self {
            x_bounds: (-8.0, 8.0),
            y_bounds: (-8.0, 8.0),
            z_bounds: (-20.0, 20.0),
            spacing: 0.5,
            profiles,
            b_set,
            current_sign,
        };
        m.validate()?;
        Ok(m)
    }

    /// Illustrative profiles: mostly axial variation, with a small radial part.
    pub fn fig8_like(current_sign: i8) -> Result<Self> {
        let poly = |coeffs: &[f64], scale: f64| Profile::Polynomial {
            coeffs: coeffs.to_vec(),
            scale,
        };
        let profiles = ComponentProfiles {
            b0x: poly(&[0.0, 0.6], 8.0),
            b0y: poly(&[0.0, -0.4], 8.0),
            b0z: poly(&[0.0, 2.0, 5.0], 20.0),
            b1x: poly(&[0.0, 0.0, 0.3], 8.0),
            b1y: poly(&[0.0, 0.0, 0.3], 8.0),
            b1z: poly(&[0.0, 2.0, -4.6], 20.0),
        };
        Self::new(profiles, FIG8_B_SET_KHZ, current_sign)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, (lo, hi)) in [
            ("x_bounds", self.x_bounds),
            ("y_bounds", self.y_bounds),
            ("z_bounds", self.z_bounds),
        ] {
            if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::invalid(name, format!("bounds [{lo}, {hi}] are not ordered")));
            }
        }
        if !(self.spacing > 0.0) || !self.spacing.is_finite() {
            return Err(Error::invalid("spacing", "must be > 0"));
        }
        if self.current_sign != 1 && self.current_sign != -1 {
            return Err(Error::invalid("current_sign", "must be +1 or -1"));
        }
        if !self.b_set.is_finite() {
            return Err(Error::invalid("b_set", "must be finite"));
        }
        let p = &self.profiles;
        p.b0x.validate("b0x")?;
        p.b0y.validate("b0y")?;
        p.b0z.validate("b0z")?;
        p.b1x.validate("b1x")?;
        p.b1y.validate("b1y")?;
        p.b1z.validate("b1z")?;
        Ok(())
    }

    fn axis(bounds: (f64, f64), spacing: f64) -> Vec<f64> {
        let n = ((bounds.1 - bounds.0) / spacing + 1e-9).floor() as usize + 1;
        (0..n).map(|k| bounds.0 + k as f64 * spacing).collect()
    }

    pub fn xs(&self) -> Vec<f64> {
        Self::axis(self.x_bounds, self.spacing)
    }

    pub fn ys(&self) -> Vec<f64> {
        Self::axis(self.y_bounds, self.spacing)
    }

    pub fn zs(&self) -> Vec<f64> {
        Self::axis(self.z_bounds, self.spacing)
    }

    /// Total field vector `B0 + s*B1` at a point (kHz).
    pub fn field(&self, x: f64, y: f64, z: f64) -> [f64; 3] {
        let p = &self.profiles;
        let s = self.current_sign as f64;
        [
            p.b0x.eval(x) + s * p.b1x.eval(x),
            p.b0y.eval(y) + s * p.b1y.eval(y),
            p.b0z.eval(z) + s * (self.b_set + p.b1z.eval(z)),
        ]
    }

    /// `|B_tot| - b_set` at a point (kHz).
    pub fn deviation(&self, x: f64, y: f64, z: f64) -> f64 {
        let [bx, by, bz] = self.field(x, y, z);
        (bx * bx + by * by + bz * bz).sqrt() - self.b_set
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BeamProfile {
    FlatTop,
    /// `exp(-2 r^2 / w^2)` with `w` half the diameter.
    Gaussian,
}

/// Probe beam propagating along z, centred on the cell axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeBeam {
    pub profile: BeamProfile,
    /// mm.
    pub diameter: f64,
}

impl ProbeBeam {
    pub fn new(profile: BeamProfile, diameter: f64) -> Result<Self> {
        if !(diameter > 0.0) || !diameter.is_finite() {
            return Err(Error::invalid("diameter", format!("must be > 0, got {diameter}")));
        }
        Ok(Self { profile, diameter })
    }

    /// Unnormalized intensity at transverse position `(x, y)`.
    pub fn intensity(&self, x: f64, y: f64) -> f64 {
        let r2 = x * x + y * y;
        let w = 0.5 * self.diameter;
        match self.profile {
            BeamProfile::FlatTop => {
                if r2 <= w * w * (1.0 + 1e-12) {
                    1.0
                } else {
                    0.0
                }
            }
            BeamProfile::Gaussian => (-2.0 * r2 / (w * w)).exp(),
        }
    }
}

/// Weighted histogram of `|B_tot| - b_set` (kHz) and its summary statistics,
/// which are computed from the binned values.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldHistogram {
    pub bin_centers: Vec<f64>,
    pub bin_width: f64,
    pub weights: Vec<f64>,
    pub mean: f64,
    pub std_dev: f64,
    /// Third standardized moment.
    pub skewness: f64,
    pub fraction_below: f64,
    pub fraction_above: f64,
}

impl FieldHistogram {
    /// Builds the histogram from weighted samples; a zero-range sample set
    /// gives a single bin.
    pub fn from_samples(samples: &[(f64, f64)], n_bins: usize) -> Result<Self> {
        if n_bins == 0 {
            return Err(Error::invalid("n_bins", "must be >= 1"));
        }
        let total: f64 = samples.iter().map(|(_, w)| w).sum();
        if samples.is_empty() || !(total > 0.0) {
            return Err(Error::invalid("beam", "no grid point carries probe weight"));
        }
        let weighted: Vec<(f64, f64)> = samples.iter().filter(|(_, w)| *w > 0.0).copied().collect();
        let lo = weighted.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
        let hi = weighted.iter().map(|s| s.0).fold(f64::NEG_INFINITY, f64::max);
        let range = hi - lo;
        let (centers, width, weights) = if range <= 1e-12 * lo.abs().max(1.0) {
            (vec![0.5 * (lo + hi)], 0.0, vec![1.0])
        } else {
            let width = range / n_bins as f64;
            let mut w = vec![0.0; n_bins];
            for (v, wt) in &weighted {
                let k = (((v - lo) / width) as usize).min(n_bins - 1);
                w[k] += wt / total;
            }
            let centers = (0..n_bins).map(|k| lo + (k as f64 + 0.5) * width).collect();
            (centers, width, w)
        };
        let mean: f64 = centers.iter().zip(&weights).map(|(c, w)| c * w).sum();
        let var: f64 = centers.iter().zip(&weights).map(|(c, w)| w * (c - mean).powi(2)).sum();
        let third: f64 = centers.iter().zip(&weights).map(|(c, w)| w * (c - mean).powi(3)).sum();
        let std_dev = var.sqrt();
        let skewness = if std_dev > 0.0 { third / std_dev.powi(3) } else { 0.0 };
        let fraction_below = centers
            .iter()
            .zip(&weights)
            .filter(|(c, _)| **c < mean)
            .map(|(_, w)| w)
            .sum();
        let fraction_above = centers
            .iter()
            .zip(&weights)
            .filter(|(c, _)| **c > mean)
            .map(|(_, w)| w)
            .sum();
        Ok(Self {
            bin_centers: centers,
            bin_width: width,
            weights,
            mean,
            std_dev,
            skewness,
            fraction_below,
            fraction_above,
        })
    }
}

/// Beam-weighted grid samples `(deviation_kHz, weight)` in a fixed order.
pub fn weighted_grid_samples(model: &FieldGridModel, beam: &ProbeBeam) -> Result<Vec<(f64, f64)>> {
    model.validate()?;
    let xs = model.xs();
    let ys = model.ys();
    let zs = model.zs();
    let planes: Vec<Vec<(f64, f64)>> = xs
        .par_iter()
        .map(|&x| {
            let mut out = Vec::with_capacity(ys.len() * zs.len());
            for &y in &ys {
                let w = beam.intensity(x, y);
                if w <= 0.0 {
                    continue;
                }
                for &z in &zs {
                    out.push((model.deviation(x, y, z), w));
                }
            }
            out
        })
        .collect();
    Ok(planes.concat())
}

/// Histogram of `|B0 + s*B1| - b_set` over the grid, weighted by the beam.
pub fn field_magnitude_histogram(
    model: &FieldGridModel,
    beam: &ProbeBeam,
    n_bins: usize,
) -> Result<FieldHistogram> {
    FieldHistogram::from_samples(&weighted_grid_samples(model, beam)?, n_bins)
}

/// Empirical detuning distribution from a field histogram. A stronger field
/// means a lower detuning, and the distribution is centred on its mean so the
/// drive's detuning stays the ensemble average.
pub fn histogram_to_distribution(hist: &FieldHistogram) -> Result<DetuningDistribution> {
    if hist.bin_centers.is_empty() {
        return Err(Error::invalid("histogram", "is empty"));
    }
    let shifts = hist
        .bin_centers
        .iter()
        .map(|c| -khz_to_angular(c - hist.mean))
        .collect();
    DetuningDistribution::empirical(shifts, hist.weights.clone())
}
