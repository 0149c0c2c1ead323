//! Box-bounded Levenberg-Marquardt with Marquardt diagonal scaling.

use nalgebra::{DMatrix, DVector};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

/// Least-squares model: fills `residuals` (model minus data) and the Jacobian
/// of the residuals with respect to every parameter.
pub trait Model {
    fn n_params(&self) -> usize;
    fn n_residuals(&self) -> usize;
    fn eval(&self, p: &[f64], residuals: &mut [f64], jacobian: &mut DMatrix<f64>);
}

#[derive(Debug, Clone, PartialEq)]
pub struct LmOptions {
    pub max_iterations: usize,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Parameters held at their starting value.
    pub fixed: Vec<bool>,
    pub ftol: f64,
    pub xtol: f64,
}

impl LmOptions {
    pub fn unbounded(n: usize, max_iterations: usize) -> Self {
        Self {
            max_iterations,
            lower: vec![f64::NEG_INFINITY; n],
            upper: vec![f64::INFINITY; n],
            fixed: vec![false; n],
            ftol: 1e-14,
            xtol: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LmOutcome {
    pub params: Vec<f64>,
    pub ssr: f64,
    pub iterations: usize,
    /// 95% half-widths; fixed parameters get 0, unidentifiable ones infinity.
    pub ci95: Vec<f64>,
}

fn ssr(r: &[f64]) -> f64 {
    r.iter().map(|x| x * x).sum()
}

fn clamp_into(p: &mut [f64], opts: &LmOptions) {
    for (i, v) in p.iter_mut().enumerate() {
        *v = v.clamp(opts.lower[i], opts.upper[i]);
    }
}

/// Minimizes the sum of squared residuals from `start`.
pub fn minimize<M: Model>(model: &M, start: &[f64], opts: &LmOptions) -> Result<LmOutcome> {
    let np = model.n_params();
    let nr = model.n_residuals();
    assert_eq!(start.len(), np);
    let free: Vec<usize> = (0..np).filter(|&i| !opts.fixed[i]).collect();
    let nf = free.len();

    let mut p = start.to_vec();
    clamp_into(&mut p, opts);
    let mut r = vec![0.0; nr];
    let mut jac = DMatrix::zeros(nr, np);
    model.eval(&p, &mut r, &mut jac);
    let mut cost = ssr(&r);
    if !cost.is_finite() {
        return Err(Error::FitNoConvergence {
            iterations: 0,
            last: p,
        });
    }

    let reduce = |jac: &DMatrix<f64>, cols: &[usize]| -> DMatrix<f64> {
        DMatrix::from_fn(nr, cols.len(), |row, c| jac[(row, cols[c])])
    };

    let mut lambda = 1e-3;
    let mut converged = nf == 0;
    let mut iterations = 0;
    let mut trial = vec![0.0; np];
    let mut r_trial = vec![0.0; nr];
    let mut jac_trial = DMatrix::zeros(nr, np);

    while !converged && iterations < opts.max_iterations {
        iterations += 1;
        // parameters pinned at a bound with the gradient pushing outward sit out
        let rv = DVector::from_column_slice(&r);
        let active: Vec<usize> = free
            .iter()
            .copied()
            .filter(|&i| {
                let gi = jac.column(i).dot(&rv);
                !((p[i] <= opts.lower[i] && gi > 0.0) || (p[i] >= opts.upper[i] && gi < 0.0))
            })
            .collect();
        let na = active.len();
        if na == 0 {
            converged = true;
            break;
        }
        let j = reduce(&jac, &active);
        let jtj = j.transpose() * &j;
        let g = j.transpose() * rv;
        let diag: Vec<f64> = (0..na).map(|i| jtj[(i, i)].max(1e-12)).collect();
        if g.amax() <= 1e-300 {
            converged = true;
            break;
        }

        let mut accepted = false;
        while !accepted {
            let mut a = jtj.clone();
            for i in 0..na {
                a[(i, i)] += lambda * diag[i];
            }
            let step = match a.cholesky() {
                Some(ch) => ch.solve(&(-&g)),
                None => {
                    lambda *= 10.0;
                    if lambda > 1e20 {
                        converged = true;
                        break;
                    }
                    continue;
                }
            };
            trial.copy_from_slice(&p);
            for (c, &i) in active.iter().enumerate() {
                trial[i] += step[c];
            }
            clamp_into(&mut trial, opts);
            model.eval(&trial, &mut r_trial, &mut jac_trial);
            let new_cost = ssr(&r_trial);
            if new_cost.is_finite() && new_cost <= cost {
                let small_step = active
                    .iter()
                    .all(|&i| (trial[i] - p[i]).abs() <= opts.xtol * (p[i].abs() + opts.xtol));
                let small_gain = cost - new_cost <= opts.ftol * cost.max(1e-300);
                std::mem::swap(&mut p, &mut trial);
                std::mem::swap(&mut r, &mut r_trial);
                std::mem::swap(&mut jac, &mut jac_trial);
                cost = new_cost;
                lambda = (lambda / 3.0).max(1e-15);
                accepted = true;
                if small_step || small_gain {
                    converged = true;
                }
            } else {
                lambda *= 4.0;
                if lambda > 1e20 {
                    // no descent direction left: a local minimum to working precision
                    converged = true;
                    break;
                }
            }
        }
    }

    if !converged {
        return Err(Error::FitNoConvergence {
            iterations,
            last: p,
        });
    }
    let ci95 = confidence_half_widths(&reduce(&jac, &free), &free, np, cost, nr);
    Ok(LmOutcome {
        params: p,
        ssr: cost,
        iterations,
        ci95,
    })
}

/// Linearized 95% half-widths `t * sqrt(diag((J^T J)^-1) * s^2)`.
fn confidence_half_widths(j: &DMatrix<f64>, free: &[usize], np: usize, cost: f64, nr: usize) -> Vec<f64> {
    let mut ci = vec![0.0; np];
    let nf = free.len();
    if nf == 0 {
        return ci;
    }
    let dof = nr.saturating_sub(nf);
    if dof == 0 {
        free.iter().for_each(|&i| ci[i] = f64::INFINITY);
        return ci;
    }
    let s2 = cost / dof as f64;
    let tq = StudentsT::new(0.0, 1.0, dof as f64)
        .map(|d| d.inverse_cdf(0.975))
        .unwrap_or(1.96);
    let jtj = j.transpose() * j;
    // scale to unit diagonal before inverting to tame conditioning
    let d: Vec<f64> = (0..nf).map(|i| jtj[(i, i)].sqrt()).collect();
    if d.iter().any(|x| !(*x > 0.0)) {
        free.iter().for_each(|&i| ci[i] = f64::INFINITY);
        return ci;
    }
    let scaled = DMatrix::from_fn(nf, nf, |a, b| jtj[(a, b)] / (d[a] * d[b]));
    match scaled.try_inverse() {
        Some(inv) => {
            for (c, &i) in free.iter().enumerate() {
                let var = inv[(c, c)] / (d[c] * d[c]) * s2;
                ci[i] = if var.is_finite() && var >= 0.0 {
                    tq * var.sqrt()
                } else {
                    f64::INFINITY
                };
            }
        }
        None => free.iter().for_each(|&i| ci[i] = f64::INFINITY),
    }
    ci
}

/// Coefficient of determination, clipped to [0, 1].
pub fn r_squared(data: &[f64], ssr: f64) -> f64 {
    let n = data.len() as f64;
    let mean = data.iter().sum::<f64>() / n;
    let sst: f64 = data.iter().map(|y| (y - mean).powi(2)).sum();
    if sst <= 0.0 {
        return 0.0;
    }
    (1.0 - ssr / sst).clamp(0.0, 1.0)
}

/// Ordinary least squares `min |X b - y|`, returning `(b, ssr)`.
pub fn linear_lsq(x: &DMatrix<f64>, y: &[f64]) -> Option<(Vec<f64>, f64)> {
    let yv = DVector::from_column_slice(y);
    let svd = x.clone().svd(true, true);
    let b = svd.solve(&yv, 1e-12).ok()?;
    let res = x * &b - &yv;
    Some((b.iter().copied().collect(), res.norm_squared()))
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Exp<'a> {
        t: &'a [f64],
        y: &'a [f64],
    }

    impl Model for Exp<'_> {
        fn n_params(&self) -> usize {
            2
        }
        fn n_residuals(&self) -> usize {
            self.t.len()
        }
        fn eval(&self, p: &[f64], r: &mut [f64], j: &mut DMatrix<f64>) {
            for (k, (&t, &y)) in self.t.iter().zip(self.y).enumerate() {
                let e = (-p[1] * t).exp();
                r[k] = p[0] * e - y;
                j[(k, 0)] = e;
                j[(k, 1)] = -p[0] * t * e;
            }
        }
    }

    #[test]
    fn recovers_exponential() {
        let t: Vec<f64> = (0..50).map(|k| k as f64 * 0.1).collect();
        let y: Vec<f64> = t.iter().map(|t| 2.5 * (-0.7 * t).exp()).collect();
        let m = Exp { t: &t, y: &y };
        let out = minimize(&m, &[1.0, 0.1], &LmOptions::unbounded(2, 200)).unwrap();
        assert!((out.params[0] - 2.5).abs() < 1e-8);
        assert!((out.params[1] - 0.7).abs() < 1e-8);
        assert!(out.ssr < 1e-16);
    }

    #[test]
    fn respects_bounds_and_fixed() {
        let t: Vec<f64> = (0..50).map(|k| k as f64 * 0.1).collect();
        let y: Vec<f64> = t.iter().map(|t| 2.5 * (-0.7 * t).exp()).collect();
        let m = Exp { t: &t, y: &y };
        let mut opts = LmOptions::unbounded(2, 200);
        opts.upper[1] = 0.5;
        let out = minimize(&m, &[1.0, 0.1], &opts).unwrap();
        assert!(out.params[1] <= 0.5);
        let mut opts = LmOptions::unbounded(2, 200);
        opts.fixed[1] = true;
        let out = minimize(&m, &[1.0, 0.7], &opts).unwrap();
        assert_eq!(out.params[1], 0.7);
        assert_eq!(out.ci95[1], 0.0);
        assert!((out.params[0] - 2.5).abs() < 1e-10);
    }

    #[test]
    fn confidence_intervals_cover_noise() {
        // deterministic pseudo-noise
        let t: Vec<f64> = (0..200).map(|k| k as f64 * 0.025).collect();
        let y: Vec<f64> = t
            .iter()
            .enumerate()
            .map(|(k, t)| 2.0 * (-0.5 * t).exp() + 0.01 * ((k * 7919 % 97) as f64 / 48.0 - 1.0))
            .collect();
        let m = Exp { t: &t, y: &y };
        let out = minimize(&m, &[1.0, 1.0], &LmOptions::unbounded(2, 200)).unwrap();
        assert!(out.ci95.iter().all(|c| c.is_finite() && *c > 0.0));
        assert!((out.params[0] - 2.0).abs() < 3.0 * out.ci95[0]);
        assert!((out.params[1] - 0.5).abs() < 3.0 * out.ci95[1]);
    }

    #[test]
    fn r_squared_and_linear() {
        assert_eq!(r_squared(&[1.0, 1.0], 0.0), 0.0);
        assert!((r_squared(&[0.0, 1.0, 2.0], 0.0) - 1.0).abs() < 1e-15);
        let x = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 1.0, 1.0, 1.0, 2.0]);
        let (b, s) = linear_lsq(&x, &[1.0, 3.0, 5.0]).unwrap();
        assert!((b[0] - 1.0).abs() < 1e-12 && (b[1] - 2.0).abs() < 1e-12 && s < 1e-20);
    }
}
