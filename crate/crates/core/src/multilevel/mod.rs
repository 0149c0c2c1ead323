//! Master-equation dynamics of the five Zeeman sub-levels of an F=2 manifold.
//!
//! Level index `i` holds `m = 2 - i`, so index 0 is |2,2> and index 1 is |2,1>.
//! The Hamiltonian is written in a frame rotating with the drive, under the
//! rotating-wave approximation.

pub mod dopri;
pub mod propagator;

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{DriveParams, OscillationTrace, TimeGrid};
pub use dopri::{Dopri5Options, Dopri5Stats};
pub use propagator::propagate_population;

/// Number of sub-levels in F=2.
pub const F2_LEVELS: usize = 5;

/// Default extra detuning of the |2,1>-|2,0> transition: 2pi x 100 kHz in rad/ms.
pub const DEFAULT_QUADRATIC_SHIFT: f64 = 2.0 * PI * 100.0;

/// Drift allowed in trace and Hermiticity before `evolve` gives up.
pub const INVARIANT_TOLERANCE: f64 = 1e-6;

/// Magnetic quantum number of level index `i`.
pub fn level_m(i: usize) -> i32 {
    2 - i as i32
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelSystem {
    level_shifts: Vec<f64>,
    coupling: DMatrix<f64>,
    gamma: f64,
    relaxation: f64,
}

impl LevelSystem {
    /// Validates and assembles a system. `coupling` must be symmetric with
    /// non-zero entries only between adjacent levels.
    pub fn from_parts(level_shifts: Vec<f64>, coupling: DMatrix<f64>, gamma: f64) -> Result<Self> {
        let n = level_shifts.len();
        if n != F2_LEVELS {
            return Err(Error::invalid(
                "n_levels",
                format!("expected {F2_LEVELS}, got {n}"),
            ));
        }
        if coupling.nrows() != n || coupling.ncols() != n {
            return Err(Error::invalid(
                "coupling",
                format!("must be {n}x{n}, got {}x{}", coupling.nrows(), coupling.ncols()),
            ));
        }
        if level_shifts.iter().any(|s| !s.is_finite()) {
            return Err(Error::invalid("level_shifts", "must be finite"));
        }
        for a in 0..n {
            for b in 0..n {
                let c = coupling[(a, b)];
                if !c.is_finite() {
                    return Err(Error::invalid("coupling", "must be finite"));
                }
                if a.abs_diff(b) != 1 && c != 0.0 {
                    return Err(Error::invalid(
                        "coupling",
                        format!("entry ({a},{b}) violates the delta-m = +-1 rule"),
                    ));
                }
                if c != coupling[(b, a)] {
                    return Err(Error::invalid("coupling", "must be symmetric"));
                }
            }
        }
        if !(gamma >= 0.0) || !gamma.is_finite() {
            return Err(Error::invalid("gamma", format!("must be >= 0, got {gamma}")));
        }
        Ok(Self {
            level_shifts,
            coupling,
            gamma,
            relaxation: 0.0,
        })
    }

    /// Adds depolarizing population relaxation at rate `rate`, pulling the
    /// state toward the maximally mixed one.
    pub fn with_relaxation(mut self, rate: f64) -> Result<Self> {
        if !(rate >= 0.0) || !rate.is_finite() {
            return Err(Error::invalid("relaxation", format!("must be >= 0, got {rate}")));
        }
        self.relaxation = rate;
        Ok(self)
    }

    pub fn n_levels(&self) -> usize {
        self.level_shifts.len()
    }

    pub fn level_shifts(&self) -> &[f64] {
        &self.level_shifts
    }

    pub fn coupling(&self) -> &DMatrix<f64> {
        &self.coupling
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn relaxation(&self) -> f64 {
        self.relaxation
    }

    /// Real symmetric rotating-frame Hamiltonian (rad/ms): level shifts on the
    /// diagonal, half the couplings off it.
    pub fn hamiltonian(&self) -> DMatrix<f64> {
        let n = self.n_levels();
        let mut h = &self.coupling * 0.5;
        for i in 0..n {
            h[(i, i)] = self.level_shifts[i];
        }
        h
    }
}

/// F=2 ladder driven near the |2,2>-|2,1> resonance.
///
/// Level energies are `-m*delta + (q/2)*m*(m-3)`: the `m^2` part is the
/// quadratic Zeeman term and the linear remainder is absorbed into the frame,
/// so |2,2>-|2,1> is detuned by `delta` and each lower transition picks up a
/// further `q`.
pub fn build_f2_system(
    drive: &DriveParams,
    local_shift: f64,
    quadratic_shift: f64,
    gamma: f64,
) -> Result<LevelSystem> {
    if !(quadratic_shift >= 0.0) || !quadratic_shift.is_finite() {
        return Err(Error::invalid(
            "quadratic_shift",
            format!("must be >= 0 and finite, got {quadratic_shift}"),
        ));
    }
    let delta = drive.delta() + local_shift;
    let kappa = 0.5 * quadratic_shift;
    let shifts = (0..F2_LEVELS)
        .map(|i| {
            let m = level_m(i) as f64;
            -m * delta + kappa * m * (m - 3.0)
        })
        .collect();
    let omega0 = drive.omega0();
    let ladder = [omega0, omega0 * 6f64.sqrt() / 2.0, omega0 * 6f64.sqrt() / 2.0, omega0];
    let mut coupling = DMatrix::zeros(F2_LEVELS, F2_LEVELS);
    for (i, c) in ladder.iter().enumerate() {
        coupling[(i, i + 1)] = *c;
        coupling[(i + 1, i)] = *c;
    }
    LevelSystem::from_parts(shifts, coupling, gamma)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    elements: DMatrix<Complex64>,
}

impl DensityMatrix {
    pub(crate) fn from_raw(elements: DMatrix<Complex64>) -> Self {
        Self { elements }
    }

    /// Checks Hermiticity, unit trace and positivity.
    pub fn new(elements: DMatrix<Complex64>) -> Result<Self> {
        if !elements.is_square() || elements.nrows() == 0 {
            return Err(Error::invalid("rho", "must be a non-empty square matrix"));
        }
        let rho = Self { elements };
        rho.validate(1e-9)?;
        Ok(rho)
    }

    /// All population in level `index`.
    pub fn pure(n: usize, index: usize) -> Result<Self> {
        Self::pumped(n, index, 1.0)
    }

    /// Fraction `fraction` in level `index`, the rest spread evenly over the others.
    pub fn pumped(n: usize, index: usize, fraction: f64) -> Result<Self> {
        if index >= n {
            return Err(Error::invalid("index", format!("{index} out of range for {n} levels")));
        }
        if !(0.0..=1.0).contains(&fraction) {
            return Err(Error::invalid("pumping_fraction", format!("must lie in [0, 1], got {fraction}")));
        }
        let rest = if n > 1 { (1.0 - fraction) / (n - 1) as f64 } else { 0.0 };
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::from(if i == index { fraction } else { rest });
        }
        if n == 1 {
            m[(0, 0)] = Complex64::from(1.0);
        }
        Ok(Self { elements: m })
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.elements
    }

    pub fn dim(&self) -> usize {
        self.elements.nrows()
    }

    pub fn population(&self, i: usize) -> f64 {
        self.elements[(i, i)].re
    }

    pub fn trace(&self) -> Complex64 {
        self.elements.trace()
    }

    /// tr(rho^2).
    pub fn purity(&self) -> f64 {
        (&self.elements * &self.elements).trace().re
    }

    /// Largest |rho - rho^dagger| entry.
    pub fn hermiticity_error(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for a in 0..n {
            for b in a..n {
                worst = worst.max((self.elements[(a, b)] - self.elements[(b, a)].conj()).norm());
            }
        }
        worst
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (&self.elements + self.elements.adjoint()) * Complex64::from(0.5);
        herm.symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn validate(&self, tol: f64) -> Result<()> {
        let tr = self.trace();
        if (tr - Complex64::from(1.0)).norm() > tol {
            return Err(Error::invalid("rho", format!("trace {tr} differs from 1")));
        }
        if self.hermiticity_error() > tol {
            return Err(Error::invalid("rho", "not Hermitian"));
        }
        if self.min_eigenvalue() < -1e-6 {
            return Err(Error::invalid("rho", "not positive semidefinite"));
        }
        Ok(())
    }

    fn to_real_vec(&self) -> Vec<f64> {
        let n = self.dim();
        let mut y = Vec::with_capacity(2 * n * n);
        for a in 0..n {
            for b in 0..n {
                let z = self.elements[(a, b)];
                y.push(z.re);
                y.push(z.im);
            }
        }
        y
    }

    fn from_real_slice(n: usize, y: &[f64]) -> Self {
        Self::from_raw(DMatrix::from_fn(n, n, |a, b| {
            let k = 2 * (a * n + b);
            Complex64::new(y[k], y[k + 1])
        }))
    }
}

/// Time-stepping route used by [`evolve_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Integrator {
    /// Adaptive Dormand-Prince 5(4) with dense output.
    Adaptive(Dopri5Options),
    /// Matrix exponential of the Liouvillian over one grid step.
    Propagator,
}

impl Default for Integrator {
    fn default() -> Self {
        Integrator::Adaptive(Dopri5Options::default())
    }
}

fn master_rhs(system: &LevelSystem) -> impl Fn(f64, &[f64], &mut [f64]) {
    let n = system.n_levels();
    let h = system.hamiltonian();
    let h: Vec<f64> = (0..n * n).map(|k| h[(k / n, k % n)]).collect();
    let gamma = system.gamma();
    let g1 = system.relaxation();
    move |_t, y, dy| {
        let re = |a: usize, b: usize| y[2 * (a * n + b)];
        let im = |a: usize, b: usize| y[2 * (a * n + b) + 1];
        let mut trace = 0.0;
        for a in 0..n {
            trace += re(a, a);
        }
        for a in 0..n {
            for b in 0..n {
                // X = (H rho - rho H)_ab ; d rho = -i X
                let mut xr = 0.0;
                let mut xi = 0.0;
                for k in 0..n {
                    let hak = h[a * n + k];
                    let hkb = h[k * n + b];
                    xr += hak * re(k, b) - re(a, k) * hkb;
                    xi += hak * im(k, b) - im(a, k) * hkb;
                }
                let kk = 2 * (a * n + b);
                let mut dr = xi;
                let mut di = -xr;
                if a != b {
                    dr -= gamma * y[kk];
                    di -= gamma * y[kk + 1];
                }
                if g1 > 0.0 {
                    dr -= g1 * y[kk];
                    di -= g1 * y[kk + 1];
                    if a == b {
                        dr += g1 * trace / n as f64;
                    }
                }
                dy[kk] = dr;
                dy[kk + 1] = di;
            }
        }
    }
}

fn check_state(rho: &DensityMatrix, t: f64) -> Result<()> {
    let drift = (rho.trace() - Complex64::from(1.0)).norm();
    if drift > INVARIANT_TOLERANCE {
        return Err(Error::InvariantViolation {
            t,
            what: format!("trace drifted by {drift:e}"),
        });
    }
    let herm = rho.hermiticity_error();
    if herm > INVARIANT_TOLERANCE {
        return Err(Error::InvariantViolation {
            t,
            what: format!("Hermiticity error {herm:e}"),
        });
    }
    Ok(())
}

/// Full density matrices on `grid`; `rho0` is the state at t = 0 and the grid
/// must not start before that.
pub fn evolve_states(
    system: &LevelSystem,
    rho0: &DensityMatrix,
    grid: &TimeGrid,
    integrator: &Integrator,
) -> Result<Vec<DensityMatrix>> {
    let n = system.n_levels();
    if rho0.dim() != n {
        return Err(Error::invalid(
            "rho0",
            format!("dimension {} does not match {n} levels", rho0.dim()),
        ));
    }
    rho0.validate(1e-9)?;
    if grid.t0() < 0.0 {
        return Err(Error::invalid("times", "grid must start at t >= 0"));
    }
    let states = match integrator {
        Integrator::Propagator => propagator::propagate_states(system, rho0, grid)?,
        Integrator::Adaptive(opts) => {
            let times: Vec<f64> = grid.times().collect();
            let mut out = Vec::with_capacity(times.len());
            dopri::integrate_dense(
                master_rhs(system),
                0.0,
                &rho0.to_real_vec(),
                &times,
                opts,
                |k, y| {
                    let rho = DensityMatrix::from_real_slice(n, y);
                    check_state(&rho, times[k])?;
                    out.push(rho);
                    Ok(())
                },
            )?;
            out
        }
    };
    for (t, rho) in grid.times().zip(&states) {
        check_state(rho, t)?;
    }
    Ok(states)
}

/// Population of |2,1> on `grid`, using the adaptive integrator.
pub fn evolve(system: &LevelSystem, rho0: &DensityMatrix, grid: &TimeGrid) -> Result<OscillationTrace> {
    evolve_with(system, rho0, grid, &Integrator::default())
}

pub fn evolve_with(
    system: &LevelSystem,
    rho0: &DensityMatrix,
    grid: &TimeGrid,
    integrator: &Integrator,
) -> Result<OscillationTrace> {
    let states = evolve_states(system, rho0, grid, integrator)?;
    OscillationTrace::from_grid(grid, states.iter().map(|r| r.population(1)).collect())
}

/// P1 of the F=2 ladder started in |2,2>.
pub fn p1_multilevel(
    drive: &DriveParams,
    local_shift: f64,
    quadratic_shift: f64,
    gamma: f64,
    grid: &TimeGrid,
) -> Result<OscillationTrace> {
    let system = build_f2_system(drive, local_shift, quadratic_shift, gamma)?;
    evolve(&system, &DensityMatrix::pure(F2_LEVELS, 0)?, grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::p1_two_level;
    use crate::units::khz_to_angular;

    fn ground() -> DensityMatrix {
        DensityMatrix::pure(F2_LEVELS, 0).unwrap()
    }

    #[test]
    fn f2_coupling_ladder() {
        let d = DriveParams::new(10.0, 0.0).unwrap();
        let s = build_f2_system(&d, 0.0, 0.0, 0.0).unwrap();
        let c = s.coupling();
        assert_eq!(c[(0, 1)], 10.0);
        assert_eq!(c[(3, 4)], 10.0);
        assert!((c[(1, 2)] - 10.0 * 1.5f64.sqrt()).abs() < 1e-12);
        // ratio to the standard <m|F+|m'>/2 ladder
        for (i, m) in [(0usize, 2.0f64), (1, 1.0), (2, 0.0), (3, -1.0)] {
            let f_perp = 0.5 * (6.0 - m * (m - 1.0)).sqrt();
            assert!((c[(i, i + 1)] - 10.0 * f_perp).abs() < 1e-12);
        }
        for a in 0..5usize {
            for b in 0..5 {
                if a.abs_diff(b) != 1 {
                    assert_eq!(c[(a, b)], 0.0);
                }
            }
        }
        // all transitions resonant with no detuning and no quadratic shift
        assert!(s.level_shifts().iter().all(|&e| e == 0.0));
    }

    #[test]
    fn transition_detunings() {
        let d = DriveParams::new(1.0, 0.3).unwrap();
        let q = 7.0;
        let s = build_f2_system(&d, 0.2, q, 0.0).unwrap();
        let e = s.level_shifts();
        let delta = 0.5;
        assert!(((e[1] - e[0]) - delta).abs() < 1e-12);
        assert!(((e[2] - e[1]) - (delta + q)).abs() < 1e-12);
        assert!(((e[3] - e[2]) - (delta + 2.0 * q)).abs() < 1e-12);
    }

    #[test]
    fn from_parts_validation() {
        let c = DMatrix::zeros(4, 4);
        assert!(LevelSystem::from_parts(vec![0.0; 4], c, 0.0).is_err());
        let mut c = DMatrix::zeros(5, 5);
        c[(0, 2)] = 1.0;
        c[(2, 0)] = 1.0;
        assert!(LevelSystem::from_parts(vec![0.0; 5], c, 0.0).is_err());
        let mut c = DMatrix::zeros(5, 5);
        c[(0, 1)] = 1.0;
        assert!(LevelSystem::from_parts(vec![0.0; 5], c.clone(), 0.0).is_err());
        c[(1, 0)] = 1.0;
        assert!(LevelSystem::from_parts(vec![0.0; 5], c.clone(), -1.0).is_err());
        assert!(LevelSystem::from_parts(vec![0.0; 5], c, 0.5).is_ok());
        let d = DriveParams::new(1.0, 0.0).unwrap();
        assert!(build_f2_system(&d, 0.0, -1.0, 0.0).is_err());
    }

    #[test]
    fn density_matrix_checks() {
        let rho = DensityMatrix::pumped(5, 0, 0.8).unwrap();
        assert!((rho.trace().re - 1.0).abs() < 1e-15);
        assert!((rho.population(3) - 0.05).abs() < 1e-15);
        assert!((ground().purity() - 1.0).abs() < 1e-15);
        assert!(ground().min_eigenvalue().abs() < 1e-12);
        let mut bad = DMatrix::<Complex64>::identity(2, 2);
        bad[(0, 1)] = Complex64::new(0.0, 1.0);
        assert!(DensityMatrix::new(bad).is_err());
        assert!(DensityMatrix::pumped(5, 7, 1.0).is_err());
        assert!(DensityMatrix::pumped(5, 0, 1.5).is_err());
    }

    #[test]
    fn isolated_resonant_rabi() {
        let omega0 = khz_to_angular(1.0);
        let d = DriveParams::new(omega0, 0.0).unwrap();
        let grid = TimeGrid::span(2.0, 0.01).unwrap();
        let s = build_f2_system(&d, 0.0, khz_to_angular(1e4), 0.0).unwrap();
        let p = evolve_with(&s, &ground(), &grid, &Integrator::Propagator).unwrap();
        for (t, v) in p.times().zip(p.values()) {
            let want = (0.5 * omega0 * t).sin().powi(2);
            assert!((v - want).abs() < 1e-3, "t={t} got {v} want {want}");
        }
    }

    #[test]
    fn undriven_populations_stay_put() {
        let s = LevelSystem::from_parts(vec![0.0, 1.0, 3.0, 6.0, 10.0], DMatrix::zeros(5, 5), 2.0)
            .unwrap();
        let rho0 = DensityMatrix::pumped(5, 0, 0.6).unwrap();
        let grid = TimeGrid::span(1.0, 0.01).unwrap();
        for integ in [Integrator::default(), Integrator::Propagator] {
            let p = evolve_with(&s, &rho0, &grid, &integ).unwrap();
            assert!(p.values().iter().all(|v| (v - 0.1).abs() < 1e-12));
        }
    }

    #[test]
    fn adaptive_and_propagator_agree() {
        let d = DriveParams::from_khz(9.0, 3.0).unwrap();
        let s = build_f2_system(&d, khz_to_angular(-1.0), DEFAULT_QUADRATIC_SHIFT, khz_to_angular(1.0))
            .unwrap()
            .with_relaxation(0.5)
            .unwrap();
        let grid = TimeGrid::span(1.0, 0.008).unwrap();
        let a = evolve_with(&s, &ground(), &grid, &Integrator::default()).unwrap();
        let b = evolve_with(&s, &ground(), &grid, &Integrator::Propagator).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((x - y).abs() < 1e-7, "{x} vs {y}");
        }
    }

    #[test]
    fn conservation_laws_without_damping() {
        let d = DriveParams::from_khz(10.0, 2.0).unwrap();
        let s = build_f2_system(&d, 0.0, DEFAULT_QUADRATIC_SHIFT, 0.0).unwrap();
        let grid = TimeGrid::span(1.0, 0.008).unwrap();
        let states = evolve_states(&s, &ground(), &grid, &Integrator::default()).unwrap();
        for rho in &states {
            assert!((rho.trace().re - 1.0).abs() < 1e-9);
            assert!((rho.purity() - 1.0).abs() < 1e-6);
            assert!(rho.min_eigenvalue() > -1e-6);
        }
    }

    #[test]
    fn dephasing_keeps_state_physical() {
        let d = DriveParams::from_khz(9.0, 0.0).unwrap();
        let s = build_f2_system(&d, 0.0, DEFAULT_QUADRATIC_SHIFT, khz_to_angular(1.0)).unwrap();
        let grid = TimeGrid::span(1.0, 0.01).unwrap();
        let states = evolve_states(&s, &ground(), &grid, &Integrator::default()).unwrap();
        let last = states.last().unwrap();
        assert!(last.purity() < 0.99);
        assert!(last.min_eigenvalue() > -1e-6);
        assert!((last.trace().re - 1.0).abs() < 1e-9);
    }

    #[test]
    fn sign_symmetry_in_isolation_limit() {
        let grid = TimeGrid::span(1.0, 0.01).unwrap();
        let q = khz_to_angular(1e7);
        let plus = build_f2_system(&DriveParams::from_khz(2.0, 1.5).unwrap(), 0.0, q, 0.0).unwrap();
        let minus = build_f2_system(&DriveParams::from_khz(2.0, -1.5).unwrap(), 0.0, q, 0.0).unwrap();
        let a = evolve_with(&plus, &ground(), &grid, &Integrator::Propagator).unwrap();
        let b = evolve_with(&minus, &ground(), &grid, &Integrator::Propagator).unwrap();
        // the neighbouring transition's light shift, of order coupling^2 / q, breaks it slightly
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((x - y).abs() < 1e-6, "{x} {y}");
        }
    }

    #[test]
    fn near_two_level_at_default_isolation() {
        let d = DriveParams::from_khz(10.0, 0.0).unwrap();
        let grid = TimeGrid::span(1.0, 0.004).unwrap();
        let p = p1_multilevel(&d, 0.0, DEFAULT_QUADRATIC_SHIFT, 0.0, &grid).unwrap();
        let worst = p
            .times()
            .zip(p.values())
            .map(|(t, v)| (v - p1_two_level(&d, 0.0, t)).abs())
            .fold(0.0, f64::max);
        assert!(worst < 0.05, "worst deviation {worst}");
    }

    #[test]
    fn rejects_mismatched_initial_state() {
        let d = DriveParams::new(1.0, 0.0).unwrap();
        let s = build_f2_system(&d, 0.0, 1.0, 0.0).unwrap();
        let grid = TimeGrid::span(1.0, 0.1).unwrap();
        let rho = DensityMatrix::pure(3, 0).unwrap();
        assert!(evolve(&s, &rho, &grid).is_err());
    }
}
