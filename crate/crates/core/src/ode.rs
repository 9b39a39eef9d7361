//! Adaptive explicit Runge-Kutta integration.
//!
//! The workhorse is Fehlberg's 13-stage 7(8) pair, advanced with the
//! eighth-order weights (local extrapolation). A Dormand-Prince 5(4) pair is
//! kept as an independent low-order integrator for cross-checks.

use crate::error::{Error, Result};

/// Butcher tableau of an embedded pair. `b` advances the solution, `b_err`
/// holds `b - b_hat`.
pub struct Tableau {
    pub c: &'static [f64],
    pub a: &'static [&'static [f64]],
    pub b: &'static [f64],
    pub b_err: &'static [f64],
    pub order: u8,
}

const RKF78_C: [f64; 13] = [
    0.0,
    2.0 / 27.0,
    1.0 / 9.0,
    1.0 / 6.0,
    5.0 / 12.0,
    0.5,
    5.0 / 6.0,
    1.0 / 6.0,
    2.0 / 3.0,
    1.0 / 3.0,
    1.0,
    0.0,
    1.0,
];

const RKF78_A: [&[f64]; 13] = [
    &[],
    &[2.0 / 27.0],
    &[1.0 / 36.0, 1.0 / 12.0],
    &[1.0 / 24.0, 0.0, 1.0 / 8.0],
    &[5.0 / 12.0, 0.0, -25.0 / 16.0, 25.0 / 16.0],
    &[1.0 / 20.0, 0.0, 0.0, 1.0 / 4.0, 1.0 / 5.0],
    &[-25.0 / 108.0, 0.0, 0.0, 125.0 / 108.0, -65.0 / 27.0, 125.0 / 54.0],
    &[31.0 / 300.0, 0.0, 0.0, 0.0, 61.0 / 225.0, -2.0 / 9.0, 13.0 / 900.0],
    &[2.0, 0.0, 0.0, -53.0 / 6.0, 704.0 / 45.0, -107.0 / 9.0, 67.0 / 90.0, 3.0],
    &[
        -91.0 / 108.0,
        0.0,
        0.0,
        23.0 / 108.0,
        -976.0 / 135.0,
        311.0 / 54.0,
        -19.0 / 60.0,
        17.0 / 6.0,
        -1.0 / 12.0,
    ],
    &[
        2383.0 / 4100.0,
        0.0,
        0.0,
        -341.0 / 164.0,
        4496.0 / 1025.0,
        -301.0 / 82.0,
        2133.0 / 4100.0,
        45.0 / 82.0,
        45.0 / 164.0,
        18.0 / 41.0,
    ],
    &[
        3.0 / 205.0,
        0.0,
        0.0,
        0.0,
        0.0,
        -6.0 / 41.0,
        -3.0 / 205.0,
        -3.0 / 41.0,
        3.0 / 41.0,
        6.0 / 41.0,
        0.0,
    ],
    &[
        -1777.0 / 4100.0,
        0.0,
        0.0,
        -341.0 / 164.0,
        4496.0 / 1025.0,
        -289.0 / 82.0,
        2193.0 / 4100.0,
        51.0 / 82.0,
        33.0 / 164.0,
        12.0 / 41.0,
        0.0,
        1.0,
    ],
];

// eighth-order weights
const RKF78_B: [f64; 13] = [
    0.0,
    0.0,
    0.0,
    0.0,
    0.0,
    34.0 / 105.0,
    9.0 / 35.0,
    9.0 / 35.0,
    9.0 / 280.0,
    9.0 / 280.0,
    0.0,
    41.0 / 840.0,
    41.0 / 840.0,
];

const RKF78_ERR: [f64; 13] = [
    -41.0 / 840.0,
    0.0,
    0.0,
    0.0,
    0.0,
    0.0,
    0.0,
    0.0,
    0.0,
    0.0,
    -41.0 / 840.0,
    41.0 / 840.0,
    41.0 / 840.0,
];

pub static RKF78: Tableau = Tableau {
    c: &RKF78_C,
    a: &RKF78_A,
    b: &RKF78_B,
    b_err: &RKF78_ERR,
    order: 8,
};

const DP5_C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const DP5_A: [&[f64]; 7] = [
    &[],
    &[0.2],
    &[3.0 / 40.0, 9.0 / 40.0],
    &[44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0],
    &[19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0],
    &[
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
    ],
    &[
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const DP5_B: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const DP5_ERR: [f64; 7] = [
    35.0 / 384.0 - 5179.0 / 57600.0,
    0.0,
    500.0 / 1113.0 - 7571.0 / 16695.0,
    125.0 / 192.0 - 393.0 / 640.0,
    -2187.0 / 6784.0 + 92097.0 / 339200.0,
    11.0 / 84.0 - 187.0 / 2100.0,
    -1.0 / 40.0,
];

pub static DOPRI5: Tableau = Tableau {
    c: &DP5_C,
    a: &DP5_A,
    b: &DP5_B,
    b_err: &DP5_ERR,
    order: 5,
};

/// Step-size control settings.
#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub max_steps: usize,
}

impl OdeOptions {
    pub fn with_rtol(rtol: f64) -> Self {
        Self {
            rtol,
            atol: rtol * 1e-3,
            h_init: 0.0,
            max_steps: 2_000_000,
        }
    }
}

/// What an observer wants after an accepted step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

#[derive(Debug, Clone)]
pub struct Outcome<const N: usize> {
    pub t: f64,
    pub y: [f64; N],
    pub steps: usize,
    pub stopped: bool,
    /// Last accepted step size (signed).
    pub h: f64,
}

/// Adaptive integrator over `[f64; N]` states.
pub struct Integrator<'t> {
    tableau: &'t Tableau,
    opts: OdeOptions,
}

impl<'t> Integrator<'t> {
    pub fn new(tableau: &'t Tableau, opts: OdeOptions) -> Self {
        Self { tableau, opts }
    }

    pub fn rkf78(rtol: f64) -> Integrator<'static> {
        Integrator {
            tableau: &RKF78,
            opts: OdeOptions::with_rtol(rtol),
        }
    }

    pub fn dopri5(rtol: f64) -> Integrator<'static> {
        Integrator {
            tableau: &DOPRI5,
            opts: OdeOptions::with_rtol(rtol),
        }
    }

    pub fn options(&self) -> &OdeOptions {
        &self.opts
    }

    fn step<const N: usize, F>(&self, f: &F, t: f64, y: &[f64; N], h: f64) -> ([f64; N], f64)
    where
        F: Fn(f64, &[f64; N]) -> [f64; N],
    {
        let tab = self.tableau;
        let stages = tab.c.len();
        let mut k: Vec<[f64; N]> = Vec::with_capacity(stages);
        for i in 0..stages {
            let mut yi = *y;
            for (j, aij) in tab.a[i].iter().enumerate() {
                if *aij != 0.0 {
                    for (yv, kv) in yi.iter_mut().zip(k[j].iter()) {
                        *yv += h * aij * kv;
                    }
                }
            }
            k.push(f(t + tab.c[i] * h, &yi));
        }
        let mut y_new = *y;
        let mut err = [0.0; N];
        for i in 0..stages {
            let (bi, ei) = (tab.b[i], tab.b_err[i]);
            for n in 0..N {
                y_new[n] += h * bi * k[i][n];
                err[n] += h * ei * k[i][n];
            }
        }
        let mut norm: f64 = 0.0;
        for n in 0..N {
            let scale = self.opts.atol + self.opts.rtol * y[n].abs().max(y_new[n].abs());
            norm = norm.max((err[n] / scale).abs());
        }
        if !norm.is_finite() {
            norm = f64::INFINITY;
        }
        (y_new, norm)
    }

    /// Integrates from `t0` to `t1` (either direction). The observer sees every
    /// accepted step and may stop the integration early.
    pub fn integrate<const N: usize, F, O>(
        &self,
        f: F,
        t0: f64,
        y0: [f64; N],
        t1: f64,
        mut observer: O,
    ) -> Result<Outcome<N>>
    where
        F: Fn(f64, &[f64; N]) -> [f64; N],
        O: FnMut(f64, &[f64; N]) -> Control,
    {
        self.integrate_with_h(&f, t0, y0, t1, self.opts.h_init, &mut observer)
    }

    fn integrate_with_h<const N: usize, F, O>(
        &self,
        f: &F,
        t0: f64,
        y0: [f64; N],
        t1: f64,
        h_start: f64,
        observer: &mut O,
    ) -> Result<Outcome<N>>
    where
        F: Fn(f64, &[f64; N]) -> [f64; N],
        O: FnMut(f64, &[f64; N]) -> Control,
    {
        let span = t1 - t0;
        let dir = span.signum();
        if span == 0.0 {
            return Ok(Outcome {
                t: t0,
                y: y0,
                steps: 0,
                stopped: false,
                h: 0.0,
            });
        }
        let expo = 1.0 / f64::from(self.tableau.order);
        let mut h = if h_start != 0.0 {
            h_start.abs().min(span.abs()) * dir
        } else {
            (span.abs() * 1e-3).max(1e-12 * t0.abs().max(1.0)) * dir
        };
        let mut t = t0;
        let mut y = y0;
        let mut steps = 0usize;
        let h_floor = 1e-14 * t0.abs().max(t1.abs()).max(1e-300);
        loop {
            let remaining = t1 - t;
            if remaining * dir <= 0.0 || remaining.abs() <= 1e-15 * t1.abs().max(1.0) {
                return Ok(Outcome {
                    t: t1,
                    y,
                    steps,
                    stopped: false,
                    h,
                });
            }
            if steps >= self.opts.max_steps {
                return Err(Error::StepFailure {
                    radius: t,
                    reason: format!("step budget {} exhausted", self.opts.max_steps),
                });
            }
            let last = h.abs() >= remaining.abs();
            let h_try = if last { remaining } else { h };
            let (y_new, err) = self.step(f, t, &y, h_try);
            if err <= 1.0 {
                t = if last { t1 } else { t + h_try };
                y = y_new;
                steps += 1;
                let fac = if err == 0.0 {
                    5.0
                } else {
                    (0.9 * err.powf(-expo)).clamp(0.2, 5.0)
                };
                if !last || h.abs() < h_try.abs() * fac {
                    h = h_try * fac;
                }
                if observer(t, &y) == Control::Stop {
                    return Ok(Outcome {
                        t,
                        y,
                        steps,
                        stopped: true,
                        h,
                    });
                }
            } else {
                let fac = if err.is_finite() {
                    (0.9 * err.powf(-expo)).clamp(0.1, 0.9)
                } else {
                    0.1
                };
                h = h_try * fac;
                if h.abs() < h_floor {
                    return Err(Error::StepFailure {
                        radius: t,
                        reason: format!("step size underflow (h = {h:.3e}, error ratio {err:.3e})"),
                    });
                }
            }
        }
    }

    /// Samples the solution at each of `points`, which must be monotone in the
    /// direction of integration starting from `t0`.
    pub fn integrate_to_points<const N: usize, F>(
        &self,
        f: F,
        t0: f64,
        y0: [f64; N],
        points: &[f64],
    ) -> Result<Vec<[f64; N]>>
    where
        F: Fn(f64, &[f64; N]) -> [f64; N],
    {
        let mut out = Vec::with_capacity(points.len());
        let mut t = t0;
        let mut y = y0;
        let mut h = self.opts.h_init;
        let mut noop = |_: f64, _: &[f64; N]| Control::Continue;
        for &p in points {
            let res = self.integrate_with_h(&f, t, y, p, h, &mut noop)?;
            if res.h != 0.0 {
                h = res.h;
            }
            t = p;
            y = res.y;
            out.push(y);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tableau_rows_are_consistent() {
        for tab in [&RKF78, &DOPRI5] {
            for (i, row) in tab.a.iter().enumerate() {
                let s: f64 = row.iter().sum();
                assert!((s - tab.c[i]).abs() < 1e-14, "row {i}");
            }
            assert!((tab.b.iter().sum::<f64>() - 1.0).abs() < 1e-14);
            assert!(tab.b_err.iter().sum::<f64>().abs() < 1e-14);
        }
    }

    #[test]
    fn harmonic_oscillator_both_directions() {
        let f = |_t: f64, y: &[f64; 2]| [y[1], -y[0]];
        for integ in [Integrator::rkf78(1e-12), Integrator::dopri5(1e-11)] {
            let out = integ
                .integrate(f, 0.0, [1.0, 0.0], 10.0, |_, _| Control::Continue)
                .unwrap();
            assert!((out.y[0] - 10f64.cos()).abs() < 1e-8);
            let back = integ
                .integrate(f, 10.0, out.y, 0.0, |_, _| Control::Continue)
                .unwrap();
            assert!((back.y[0] - 1.0).abs() < 1e-8 && back.y[1].abs() < 1e-8);
        }
    }

    #[test]
    fn sampled_points_match_closed_form() {
        let f = |t: f64, y: &[f64; 1]| [y[0] / t];
        let pts = [2.0, 3.0, 5.0, 8.0];
        let ys = Integrator::rkf78(1e-13)
            .integrate_to_points(f, 1.0, [1.0], &pts)
            .unwrap();
        for (p, y) in pts.iter().zip(ys) {
            assert!((y[0] - p).abs() < 1e-11);
        }
    }

    #[test]
    fn observer_can_stop() {
        let f = |_t: f64, _y: &[f64; 1]| [1.0];
        let out = Integrator::rkf78(1e-10)
            .integrate(f, 0.0, [0.0], 100.0, |_, y| {
                if y[0] > 3.0 {
                    Control::Stop
                } else {
                    Control::Continue
                }
            })
            .unwrap();
        assert!(out.stopped && out.t < 100.0 && out.y[0] > 3.0);
    }
}
