//! Dormand-Prince 5(4) with Hairer's continuous extension.

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Step-control settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dopri5Options {
    pub rtol: f64,
    pub atol: f64,
    /// Upper bound on the step; `None` lets the controller decide.
    pub h_max: Option<f64>,
    pub max_steps: usize,
}

impl Default for Dopri5Options {
    fn default() -> Self {
        Self {
            rtol: 1e-8,
            atol: 1e-10,
            h_max: None,
            max_steps: 2_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Dopri5Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

fn axpy_into(out: &mut [f64], y: &[f64], h: f64, terms: &[(f64, &[f64])]) {
    for i in 0..out.len() {
        let mut s = 0.0;
        for (c, k) in terms {
            s += c * k[i];
        }
        out[i] = y[i] + h * s;
    }
}

fn hinit<F>(rhs: &mut F, t0: f64, y0: &[f64], f0: &[f64], t_end: f64, opts: &Dopri5Options) -> f64
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let n = y0.len() as f64;
    let mut dnf = 0.0;
    let mut dny = 0.0;
    for i in 0..y0.len() {
        let sk = opts.atol + opts.rtol * y0[i].abs();
        dnf += (f0[i] / sk).powi(2);
        dny += (y0[i] / sk).powi(2);
    }
    let span = (t_end - t0).abs();
    let mut h = if dnf <= 1e-10 || dny <= 1e-10 {
        1e-6
    } else {
        (dny / dnf).sqrt() * 0.01
    };
    h = h.min(span);
    if let Some(hm) = opts.h_max {
        h = h.min(hm);
    }
    let y1: Vec<f64> = y0.iter().zip(f0).map(|(y, f)| y + h * f).collect();
    let mut f1 = vec![0.0; y0.len()];
    rhs(t0 + h, &y1, &mut f1);
    let mut der2 = 0.0;
    for i in 0..y0.len() {
        let sk = opts.atol + opts.rtol * y0[i].abs();
        der2 += ((f1[i] - f0[i]) / sk).powi(2);
    }
    let der2 = (der2 / n).sqrt() / h;
    let der12 = der2.abs().max((dnf / n).sqrt());
    let h1 = if der12 <= 1e-15 {
        (h * 1e-3).max(1e-6)
    } else {
        (0.01 / der12).powf(0.2)
    };
    let mut h = (100.0 * h).min(h1).min(span);
    if let Some(hm) = opts.h_max {
        h = h.min(hm);
    }
    h
}

/// Integrates `y' = rhs(t, y)` from `t0` and calls `emit(k, y(outputs[k]))` for
/// each requested output time, in order. Output times must be sorted and `>= t0`.
pub fn integrate_dense<F, G>(
    mut rhs: F,
    t0: f64,
    y0: &[f64],
    outputs: &[f64],
    opts: &Dopri5Options,
    mut emit: G,
) -> Result<Dopri5Stats>
where
    F: FnMut(f64, &[f64], &mut [f64]),
    G: FnMut(usize, &[f64]) -> Result<()>,
{
    let n = y0.len();
    let mut stats = Dopri5Stats::default();
    if outputs.is_empty() {
        return Ok(stats);
    }
    if outputs.windows(2).any(|w| w[1] < w[0]) || outputs[0] < t0 {
        return Err(Error::invalid("times", "output times must be sorted and >= t0"));
    }
    let t_end = *outputs.last().unwrap();

    let mut t = t0;
    let mut y = y0.to_vec();
    let mut next_out = 0;
    while next_out < outputs.len() && outputs[next_out] <= t0 {
        emit(next_out, &y)?;
        next_out += 1;
    }
    if next_out == outputs.len() {
        return Ok(stats);
    }

    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut k5 = vec![0.0; n];
    let mut k6 = vec![0.0; n];
    let mut k7 = vec![0.0; n];
    let mut ytmp = vec![0.0; n];
    let mut ynew = vec![0.0; n];
    let mut cont = vec![vec![0.0; n]; 5];
    let mut yout = vec![0.0; n];

    rhs(t, &y, &mut k1);
    stats.rhs_evals += 1;
    let mut h = hinit(&mut rhs, t, &y, &k1, t_end, opts);
    stats.rhs_evals += 1;

    let beta = 0.04;
    let expo1 = 0.2 - beta * 0.75;
    let safe = 0.9;
    let facc1 = 1.0 / 0.2;
    let facc2 = 1.0 / 10.0;
    let mut facold: f64 = 1e-4;
    let mut last_rejected = false;
    let uround = f64::EPSILON;

    loop {
        if stats.accepted + stats.rejected >= opts.max_steps {
            return Err(Error::IntegrationFailure {
                t,
                reason: format!("step limit {} reached", opts.max_steps),
            });
        }
        if 0.1 * h.abs() <= t.abs() * uround {
            return Err(Error::IntegrationFailure {
                t,
                reason: format!("step size {h:e} underflowed"),
            });
        }
        let mut finishing = false;
        if t + 1.01 * h >= t_end {
            h = t_end - t;
            finishing = true;
        }

        axpy_into(&mut ytmp, &y, h, &[(A21, &k1)]);
        rhs(t + C2 * h, &ytmp, &mut k2);
        axpy_into(&mut ytmp, &y, h, &[(A31, &k1), (A32, &k2)]);
        rhs(t + C3 * h, &ytmp, &mut k3);
        axpy_into(&mut ytmp, &y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]);
        rhs(t + C4 * h, &ytmp, &mut k4);
        axpy_into(&mut ytmp, &y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]);
        rhs(t + C5 * h, &ytmp, &mut k5);
        axpy_into(
            &mut ytmp,
            &y,
            h,
            &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
        );
        rhs(t + h, &ytmp, &mut k6);
        axpy_into(
            &mut ynew,
            &y,
            h,
            &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
        );
        rhs(t + h, &ynew, &mut k7);
        stats.rhs_evals += 6;

        let mut err = 0.0;
        for i in 0..n {
            let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sk = opts.atol + opts.rtol * y[i].abs().max(ynew[i].abs());
            err += (e / sk).powi(2);
        }
        let err = (err / n.max(1) as f64).sqrt();
        if !err.is_finite() {
            return Err(Error::IntegrationFailure {
                t,
                reason: "non-finite error estimate".into(),
            });
        }

        let fac11 = err.powf(expo1);
        let fac = (fac11 / facold.powf(beta) / safe).clamp(facc2, facc1);
        let mut hnew = h / fac;
        if let Some(hm) = opts.h_max {
            hnew = hnew.min(hm);
        }

        if err <= 1.0 {
            stats.accepted += 1;
            facold = err.max(1e-4);
            let t_new = t + h;
            let needs_dense =
                next_out < outputs.len() && (outputs[next_out] <= t_new || finishing);
            if needs_dense {
                for i in 0..n {
                    let ydiff = ynew[i] - y[i];
                    let bspl = h * k1[i] - ydiff;
                    cont[0][i] = y[i];
                    cont[1][i] = ydiff;
                    cont[2][i] = bspl;
                    cont[3][i] = ydiff - h * k7[i] - bspl;
                    cont[4][i] = h
                        * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
                }
                while next_out < outputs.len() && (outputs[next_out] <= t_new || finishing) {
                    let s = ((outputs[next_out] - t) / h).clamp(0.0, 1.0);
                    let s1 = 1.0 - s;
                    for i in 0..n {
                        yout[i] = cont[0][i]
                            + s * (cont[1][i] + s1 * (cont[2][i] + s * (cont[3][i] + s1 * cont[4][i])));
                    }
                    emit(next_out, &yout)?;
                    next_out += 1;
                }
            }
            std::mem::swap(&mut k1, &mut k7);
            std::mem::swap(&mut y, &mut ynew);
            t = t_new;
            if finishing || next_out == outputs.len() {
                return Ok(stats);
            }
            if last_rejected {
                hnew = hnew.min(h);
            }
            last_rejected = false;
        } else {
            stats.rejected += 1;
            hnew = h / facc1.min(fac11 / safe);
            last_rejected = true;
        }
        h = hnew;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_dense_output() {
        let outputs: Vec<f64> = (0..=200).map(|k| k as f64 * 0.05).collect();
        let mut got = vec![[0.0; 2]; outputs.len()];
        let stats = integrate_dense(
            |_t, y, dy| {
                dy[0] = y[1];
                dy[1] = -4.0 * y[0];
            },
            0.0,
            &[1.0, 0.0],
            &outputs,
            &Dopri5Options::default(),
            |k, y| {
                got[k] = [y[0], y[1]];
                Ok(())
            },
        )
        .unwrap();
        assert!(stats.accepted > 10);
        for (t, g) in outputs.iter().zip(&got) {
            assert!((g[0] - (2.0 * t).cos()).abs() < 1e-7, "t={t}");
            assert!((g[1] + 2.0 * (2.0 * t).sin()).abs() < 1e-7);
        }
    }

    #[test]
    fn exponential_decay_and_step_limit() {
        let outputs = [0.5, 1.0, 2.0];
        let mut last = 0.0;
        integrate_dense(
            |_t, y, dy| dy[0] = -y[0],
            0.0,
            &[1.0],
            &outputs,
            &Dopri5Options::default(),
            |k, y| {
                assert!((y[0] - (-outputs[k]).exp()).abs() < 1e-8);
                last = y[0];
                Ok(())
            },
        )
        .unwrap();
        assert!(last > 0.0);

        let tight = Dopri5Options {
            max_steps: 3,
            ..Default::default()
        };
        let r = integrate_dense(
            |_t, y, dy| dy[0] = -100.0 * y[0] * (50.0 * y[0]).sin(),
            0.0,
            &[1.0],
            &[50.0],
            &tight,
            |_, _| Ok(()),
        );
        assert!(matches!(r, Err(Error::IntegrationFailure { .. })));
    }

    #[test]
    fn outputs_at_start_time_are_initial_state() {
        let mut seen = Vec::new();
        integrate_dense(
            |_t, _y, dy| dy[0] = 1.0,
            0.0,
            &[3.0],
            &[0.0, 0.0, 1.0],
            &Dopri5Options::default(),
            |k, y| {
                seen.push((k, y[0]));
                Ok(())
            },
        )
        .unwrap();
        assert_eq!(seen.len(), 3);
        assert_eq!(seen[0], (0, 3.0));
        assert!((seen[2].1 - 4.0).abs() < 1e-12);
    }
}
