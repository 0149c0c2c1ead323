//! Closed-form two-level physics and the time-series carriers.

use crate::error::{Error, Result};
use crate::units::khz_to_angular;

/// Minimum number of samples in an [`OscillationTrace`].
pub const MIN_TRACE_SAMPLES: usize = 8;

/// Bare Rabi frequency and central detuning of the drive, both in rad/ms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveParams {
    omega0: f64,
    delta: f64,
}

impl DriveParams {
    pub fn new(omega0: f64, delta: f64) -> Result<Self> {
        if !(omega0 > 0.0) || !omega0.is_finite() {
            return Err(Error::invalid("omega0", format!("must be > 0, got {omega0}")));
        }
        if !delta.is_finite() {
            return Err(Error::invalid("delta", "must be finite"));
        }
        Ok(Self { omega0, delta })
    }

    /// Builds the drive from ordinary frequencies (Omega0/2pi, Delta/2pi) in kHz.
    pub fn from_khz(omega0_khz: f64, delta_khz: f64) -> Result<Self> {
        Self::new(khz_to_angular(omega0_khz), khz_to_angular(delta_khz))
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Same bare Rabi frequency at a different central detuning.
    pub fn with_delta(&self, delta: f64) -> Self {
        Self { delta, ..*self }
    }

    /// Generalized Rabi frequency of the central atom.
    pub fn rabi_central(&self) -> f64 {
        generalized_rabi(self, 0.0)
    }

    /// Lorentzian amplitude factor 1/(1 + delta^2/Omega0^2) at local shift `local_shift`.
    pub fn lorentzian(&self, local_shift: f64) -> f64 {
        let d = (self.delta + local_shift) / self.omega0;
        1.0 / (1.0 + d * d)
    }
}

/// Uniform sampling grid `t0 + k*dt` for `k in 0..len`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    t0: f64,
    dt: f64,
    len: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, dt: f64, len: usize) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::invalid("dt", format!("must be > 0, got {dt}")));
        }
        if !t0.is_finite() {
            return Err(Error::invalid("t0", "must be finite"));
        }
        if len == 0 {
            return Err(Error::EmptyGrid);
        }
        Ok(Self { t0, dt, len })
    }

    /// Grid `0, dt, 2dt, ...` up to and including `t_max` (within rounding).
    pub fn span(t_max: f64, dt: f64) -> Result<Self> {
        if !(t_max >= 0.0) {
            return Err(Error::invalid("t_max", format!("must be >= 0, got {t_max}")));
        }
        if !(dt > 0.0) {
            return Err(Error::invalid("dt", format!("must be > 0, got {dt}")));
        }
        let len = (t_max / dt + 1e-9).floor() as usize + 1;
        Self::new(0.0, dt, len)
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    pub fn t_end(&self) -> f64 {
        self.time(self.len - 1)
    }

    pub fn times(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.len).map(move |k| self.time(k))
    }
}

/// Uniformly sampled signal; sample `k` sits at `t0 + k*dt` (ms).
#[derive(Debug, Clone, PartialEq)]
pub struct OscillationTrace {
    t0: f64,
    dt: f64,
    values: Vec<f64>,
}

impl OscillationTrace {
    pub fn new(t0: f64, dt: f64, values: Vec<f64>) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::invalid("dt", format!("must be > 0, got {dt}")));
        }
        if values.len() < MIN_TRACE_SAMPLES {
            return Err(Error::TooFewSamples {
                min: MIN_TRACE_SAMPLES,
                got: values.len(),
            });
        }
        Ok(Self { t0, dt, values })
    }

    pub fn from_grid(grid: &TimeGrid, values: Vec<f64>) -> Result<Self> {
        debug_assert_eq!(grid.len(), values.len());
        Self::new(grid.t0(), grid.dt(), values)
    }

    /// Samples `f(t)` on `grid`.
    pub fn sample(grid: &TimeGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::from_grid(grid, grid.times().map(f).collect())
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    pub fn t_end(&self) -> f64 {
        self.time(self.values.len() - 1)
    }

    pub fn grid(&self) -> TimeGrid {
        TimeGrid {
            t0: self.t0,
            dt: self.dt,
            len: self.values.len(),
        }
    }

    pub fn times(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.values.len()).map(move |k| self.time(k))
    }

    /// Index range of the samples with `t_min <= t <= t_max`.
    pub fn window_indices(&self, t_min: f64, t_max: f64) -> std::ops::Range<usize> {
        let tol = 1e-9 * self.dt;
        let lo = ((t_min - self.t0 - tol) / self.dt).ceil().max(0.0) as usize;
        let hi = (((t_max - self.t0 + tol) / self.dt).floor() + 1.0).max(0.0) as usize;
        let hi = hi.min(self.values.len());
        lo.min(hi)..hi
    }

    /// Sub-trace restricted to `[t_min, t_max]`.
    pub fn window(&self, t_min: f64, t_max: f64) -> Result<Self> {
        let r = self.window_indices(t_min, t_max);
        Self::new(self.time(r.start), self.dt, self.values[r].to_vec())
    }

    /// Affine copy `a*S + b`.
    pub fn affine(&self, a: f64, b: f64) -> Self {
        Self {
            t0: self.t0,
            dt: self.dt,
            values: self.values.iter().map(|v| a * v + b).collect(),
        }
    }
}

/// Generalized Rabi frequency sqrt(Omega0^2 + delta^2) with delta = Delta + `local_shift`.
pub fn generalized_rabi(drive: &DriveParams, local_shift: f64) -> f64 {
    drive.omega0.hypot(drive.delta + local_shift)
}

/// Population of |1> for an atom starting in |2>, at local detuning
/// delta = Delta + `local_shift`: (Omega0/OmegaR)^2 sin^2(OmegaR t/2).
pub fn p1_two_level(drive: &DriveParams, local_shift: f64, t: f64) -> f64 {
    let rabi = generalized_rabi(drive, local_shift);
    let s = (0.5 * rabi * t).sin();
    let ratio = drive.omega0 / rabi;
    ratio * ratio * s * s
}

/// Small-inhomogeneity closed form of the ensemble signal,
/// `L/2 * [1 - cos(OmegaR t) exp(-sigma^2 Delta^2 t^2 / (2 OmegaR^2))]`
/// with the Lorentzian `L` frozen at the central detuning.
///
/// Only meaningful for `sigma << omega0`; nothing enforces that.
pub fn analytic_small_sigma_signal(
    drive: &DriveParams,
    sigma: f64,
    grid: &TimeGrid,
) -> Result<OscillationTrace> {
    if !(sigma >= 0.0) {
        return Err(Error::invalid("sigma", format!("must be >= 0, got {sigma}")));
    }
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let rabi = drive.rabi_central();
    let half_amp = 0.5 * drive.lorentzian(0.0);
    let rate = sigma * drive.delta / rabi;
    OscillationTrace::sample(grid, |t| {
        let envelope = (-0.5 * rate * rate * t * t).exp();
        half_amp * (1.0 - (rabi * t).cos() * envelope)
    })
}
