//! Exact propagation through the matrix exponential of the Liouvillian.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{DensityMatrix, LevelSystem, INVARIANT_TOLERANCE};
use crate::error::{Error, Result};
use crate::model::TimeGrid;

/// Superoperator of the master equation acting on row-major `vec(rho)`.
pub fn liouvillian(system: &LevelSystem) -> DMatrix<Complex64> {
    let n = system.n_levels();
    let h = system.hamiltonian();
    let i = Complex64::i();
    let idx = |a: usize, b: usize| a * n + b;
    let mut l = DMatrix::<Complex64>::zeros(n * n, n * n);
    for a in 0..n {
        for b in 0..n {
            let row = idx(a, b);
            for k in 0..n {
                // -i (H rho)_ab
                if h[(a, k)] != 0.0 {
                    l[(row, idx(k, b))] -= i * h[(a, k)];
                }
                // +i (rho H)_ab
                if h[(k, b)] != 0.0 {
                    l[(row, idx(a, k))] += i * h[(k, b)];
                }
            }
            if a != b {
                l[(row, row)] -= Complex64::from(system.gamma());
            }
            let g1 = system.relaxation();
            if g1 > 0.0 {
                l[(row, row)] -= Complex64::from(g1);
                if a == b {
                    for k in 0..n {
                        l[(row, idx(k, k))] += Complex64::from(g1 / n as f64);
                    }
                }
            }
        }
    }
    l
}

/// States on `grid`, with `rho0` taken as the state at t = 0.
pub fn propagate_states(
    system: &LevelSystem,
    rho0: &DensityMatrix,
    grid: &TimeGrid,
) -> Result<Vec<DensityMatrix>> {
    let n = system.n_levels();
    let l = liouvillian(system);
    let step = (&l * Complex64::from(grid.dt())).exp();
    let mut v = DVector::from_iterator(n * n, rho0.matrix().transpose().iter().copied());
    if grid.t0() != 0.0 {
        v = (&l * Complex64::from(grid.t0())).exp() * v;
    }
    let mut out = Vec::with_capacity(grid.len());
    for k in 0..grid.len() {
        if k > 0 {
            v = &step * v;
        }
        out.push(DensityMatrix::from_raw(DMatrix::from_row_slice(n, n, v.as_slice())));
    }
    Ok(out)
}

/// Real coordinates of a Hermitian matrix: the diagonal, then `(Re, Im)` of
/// each upper off-diagonal element. Returns `(a, b, imaginary)` per coordinate.
fn hermitian_coordinates(n: usize) -> Vec<(usize, usize, bool)> {
    let mut c: Vec<(usize, usize, bool)> = (0..n).map(|a| (a, a, false)).collect();
    for a in 0..n {
        for b in a + 1..n {
            c.push((a, b, false));
            c.push((a, b, true));
        }
    }
    c
}

/// The Liouvillian restricted to Hermitian matrices, in the real coordinates
/// of [`hermitian_coordinates`].
fn real_liouvillian(system: &LevelSystem) -> DMatrix<f64> {
    let n = system.n_levels();
    let l = liouvillian(system);
    let coords = hermitian_coordinates(n);
    let m = coords.len();
    let mut out = DMatrix::zeros(m, m);
    for (j, &(a, b, imag)) in coords.iter().enumerate() {
        let mut basis = DVector::<Complex64>::zeros(n * n);
        if a == b {
            basis[a * n + a] = Complex64::from(1.0);
        } else if imag {
            basis[a * n + b] = Complex64::i();
            basis[b * n + a] = -Complex64::i();
        } else {
            basis[a * n + b] = Complex64::from(1.0);
            basis[b * n + a] = Complex64::from(1.0);
        }
        let image = &l * basis;
        for (i, &(c, d, im)) in coords.iter().enumerate() {
            let z = image[c * n + d];
            out[(i, j)] = if im { z.im } else { z.re };
        }
    }
    out
}

/// Population of `level` on `grid` from the real-coordinate propagator,
/// checking the trace at every sample.
pub fn propagate_population(
    system: &LevelSystem,
    rho0: &DensityMatrix,
    grid: &TimeGrid,
    level: usize,
) -> Result<Vec<f64>> {
    let n = system.n_levels();
    let coords = hermitian_coordinates(n);
    let l = real_liouvillian(system);
    let step = (&l * grid.dt()).exp();
    let rho = rho0.matrix();
    let mut v = DVector::from_iterator(
        coords.len(),
        coords
            .iter()
            .map(|&(a, b, im)| if im { rho[(a, b)].im } else { rho[(a, b)].re }),
    );
    if grid.t0() != 0.0 {
        v = (&l * grid.t0()).exp() * v;
    }
    let mut next = DVector::zeros(coords.len());
    let mut out = Vec::with_capacity(grid.len());
    for k in 0..grid.len() {
        if k > 0 {
            step.mul_to(&v, &mut next);
            std::mem::swap(&mut v, &mut next);
        }
        let trace: f64 = v.rows(0, n).sum();
        if (trace - 1.0).abs() > INVARIANT_TOLERANCE {
            return Err(Error::InvariantViolation {
                t: grid.time(k),
                what: format!("trace drifted by {:e}", trace - 1.0),
            });
        }
        out.push(v[level]);
    }
    Ok(out)
}
