//! The four canonical solutions at infinity, built in `(x, y) = (a+b, a-b)`
//! by Picard iteration on `[R₀, r_far]` and stored with the exponential
//! factor `e^{κr}` removed.
//!
//! The x-equation is written as `x'' + x'/r - (2 + ν²/r²)x = G_x` with
//! `ν² = n² - 2d²`, whose homogeneous solutions are `e^{±√2r} k±(r)/√r` with
//! `k± → 1`. The y-equation keeps `r^{±n}`.

use serde::{Deserialize, Serialize};

use crate::branch::{Behavior, SolutionBranch};
use crate::error::{Error, Result};
use crate::ode::{Integrator, OdeOptions, RKF78};
use crate::par::{self, Mode};
use crate::params::{frame_det, propagate_to_points, ModeParams};
use crate::profile::Profile;
use crate::quad::PanelGrid;

/// Default right end of the iteration interval; integrals to infinity are
/// closed with asymptotic tails from here.
pub const FAR_RADIUS: f64 = 400.0;

/// Far-field construction settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FarOptions {
    /// Branches are sampled on `[R₀, r_max]`.
    pub r_max: f64,
    /// End of the iteration interval.
    pub far_radius: f64,
    pub tol: f64,
}

impl Default for FarOptions {
    fn default() -> Self {
        Self {
            r_max: 40.0,
            far_radius: FAR_RADIUS,
            tol: 1e-12,
        }
    }
}
/// Smallest admissible `R₀`.
pub const MIN_R0: f64 = 8.0;
pub const MAX_ITERATIONS: usize = 60;
const MAX_ENLARGEMENTS: usize = 12;
const PANEL: f64 = 0.35;
const ORDER: usize = 16;
const SQRT2: f64 = std::f64::consts::SQRT_2;
/// Inward extension stops once a state exceeds this.
pub const INWARD_LIMIT: f64 = 1e12;

/// Asymptotic series of `k±` with optimal truncation: value and derivative.
/// `k''  ± 2√2 k' - μ k / r² = 0`, `μ = ν² - 1/4`.
fn k_series(mu: f64, plus: bool, r: f64) -> (f64, f64) {
    let sign = if plus { 1.0 } else { -1.0 };
    let (mut c, mut sum, mut dsum): (f64, f64, f64) = (1.0, 1.0, 0.0);
    let mut last = f64::INFINITY;
    for j in 0..400 {
        let jf = j as f64;
        c *= sign * (jf * (jf + 1.0) - mu) / (2.0 * SQRT2 * (jf + 1.0));
        let term = c * r.powi(-(j + 1));
        if term.abs() >= last || term.abs() < 1e-18 * sum.abs() {
            break;
        }
        last = term.abs();
        sum += term;
        dsum -= (jf + 1.0) * term / r;
    }
    (sum, dsum)
}

/// Compensated homogeneous solutions of the x-operator at the nodes.
struct Bessel {
    kp: Vec<f64>,
    dkp: Vec<f64>,
    km: Vec<f64>,
    dkm: Vec<f64>,
    /// `r (X₊X₋' - X₋X₊')`
    wronskian: f64,
}

fn bessel(mu: f64, nodes: &[f64], r0: f64, r_end: f64) -> Result<Bessel> {
    let integ = Integrator::new(
        &RKF78,
        OdeOptions {
            atol: 1e-300,
            ..OdeOptions::with_rtol(1e-14)
        },
    );
    let minus = move |r: f64, y: &[f64; 2]| [y[1], 2.0 * SQRT2 * y[1] + mu * y[0] / (r * r)];
    let plus = move |r: f64, y: &[f64; 2]| [y[1], -2.0 * SQRT2 * y[1] + mu * y[0] / (r * r)];

    let (m0, dm0) = k_series(mu, false, r_end);
    let rev: Vec<f64> = nodes.iter().rev().copied().collect();
    let mut km_rev = integ.integrate_to_points(minus, r_end, [m0, dm0], &rev)?;
    km_rev.reverse();

    let (p0, dp0) = k_series(mu, true, r0);
    let kp_raw = integ.integrate_to_points(plus, r0, [p0, dp0], nodes)?;
    let tail = integ.integrate(plus, *nodes.last().unwrap(), *kp_raw.last().unwrap(), r_end, |_, _| {
        crate::ode::Control::Continue
    })?;
    let norm = k_series(mu, true, r_end).0 / tail.y[0];

    let kp: Vec<f64> = kp_raw.iter().map(|v| v[0] * norm).collect();
    let dkp: Vec<f64> = kp_raw.iter().map(|v| v[1] * norm).collect();
    let km: Vec<f64> = km_rev.iter().map(|v| v[0]).collect();
    let dkm: Vec<f64> = km_rev.iter().map(|v| v[1]).collect();
    let mid = nodes.len() / 2;
    let wronskian = -2.0 * SQRT2 * kp[mid] * km[mid] + kp[mid] * dkm[mid] - km[mid] * dkp[mid];
    Ok(Bessel {
        kp,
        dkp,
        km,
        dkm,
        wronskian,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Limit {
    Start,
    Infinity,
}

/// `∫_α^r e^{μ(r-s)} g(s) ds` at every node.
fn kernel_integral(grid: &PanelGrid, g: &[f64], mu: f64, limit: Limit) -> Result<Vec<f64>> {
    match limit {
        Limit::Start => Ok(grid.exp_left(g, -mu)),
        Limit::Infinity => {
            let nodes = grid.nodes();
            let n = nodes.len();
            let end = grid.right();
            let tail = if mu > 0.0 {
                exp_tail(nodes, g, mu)
            } else {
                power_tail(nodes, g, end)?
            };
            let body = grid.exp_right(g, mu);
            Ok((0..n)
                .map(|i| -(body[i] + (-mu * (end - nodes[i])).exp() * tail))
                .collect())
        }
    }
}

/// `∫_end^∞ e^{-μ(s-end)} g(s) ds` for `g` locally like a power of `s`.
fn exp_tail(nodes: &[f64], g: &[f64], mu: f64) -> f64 {
    let n = nodes.len();
    let (g1, g0) = (g[n - 1], g[n - ORDER]);
    let p = if g1 != 0.0 && g0 != 0.0 && g1.signum() == g0.signum() {
        (g1 / g0).ln() / (nodes[n - 1] / nodes[n - ORDER]).ln()
    } else {
        0.0
    };
    let end = nodes[n - 1];
    let (mut term, mut sum) = (g1 / mu, 0.0);
    for k in 0..6 {
        sum += term;
        term *= (p - k as f64) / (end * mu);
    }
    sum
}

/// `∫_end^∞ g` for `g ≈ A s^P (1 + c/s)`, with `P` and `c` read off two
/// log-slopes near the end of the grid.
fn power_tail(nodes: &[f64], g: &[f64], end: f64) -> Result<f64> {
    let last = tail_window(nodes.len()).end - 1;
    let m = (8 * ORDER).min(last / 2);
    let idx = [last - 2 * m, last - m, last];
    let (s, v): (Vec<f64>, Vec<f64>) = idx.iter().map(|&i| (nodes[i], g[i])).unzip();
    if v[2] == 0.0 {
        return Ok(0.0);
    }
    if v.iter().any(|x| x.signum() != v[2].signum() || *x == 0.0) {
        return Ok(integer_power_tail(nodes, g, end).unwrap_or_else(|| mean_tail(nodes, g, end)));
    }
    let slope = |i: usize| ((v[i + 1] / v[i]).ln() / (s[i + 1] / s[i]).ln(), (s[i] * s[i + 1]).sqrt());
    let ((p0, m0), (p1, m1)) = (slope(0), slope(1));
    // local exponent p(s) = P - c/s
    let mut c = (p1 - p0) / (1.0 / m0 - 1.0 / m1);
    let mut big_p = p1 + c / m1;
    if !((c / s[2]).abs() < 0.05) {
        // not in the asymptotic regime yet: plain power law
        (c, big_p) = (0.0, (v[2] / v[1]).ln() / (s[2] / s[1]).ln());
    }
    // every tail integrand here decays at least like s^-3; a slower
    // apparent rate means the leading power cancels
    if !(big_p < -2.5) {
        return Ok(integer_power_tail(nodes, g, end).unwrap_or_else(|| mean_tail(nodes, g, end)));
    }
    let e = s[2];
    let amp = v[2] / (e.powf(big_p) * (1.0 + c / e));
    let from = |t: f64| amp * (t.powf(big_p + 1.0) / -(big_p + 1.0) + c * t.powf(big_p) / -big_p);
    Ok(from(end))
}

/// Nodes of the tail window; the last panels carry the error of the
/// previous tail estimate and are left out.
fn tail_window(len: usize) -> std::ops::Range<usize> {
    let n = len - 2 * ORDER;
    n - (32 * ORDER).min(n / 2)..n
}

/// Least-squares fit of `s^-3 .. s^-6` over the outer part of the grid. No
/// misfit test: a threshold would make the fixed-point map discontinuous.
fn integer_power_tail(nodes: &[f64], g: &[f64], end: f64) -> Option<f64> {
    let stop = tail_window(nodes.len()).end;
    let w = nodes.partition_point(|&s| s < 0.6 * end).min(stop / 2)..stop;
    let powers = [3, 4, 5, 6];
    // basis scaled to O(1) at the end
    let a = nalgebra::DMatrix::from_fn(w.len(), powers.len(), |i, j| (nodes[w.start + i] / end).powi(-powers[j]));
    let b = nalgebra::DVector::from_fn(w.len(), |i, _| g[w.start + i]);
    let fit = a.clone().svd(true, true).solve(&b, 1e-14).ok()?;
    Some(powers.iter().zip(fit.iter()).map(|(&k, c)| c * end / (k as f64 - 1.0)).sum())
}

/// Crude `s^-4` estimate for integrands reduced to cancellation noise.
fn mean_tail(nodes: &[f64], g: &[f64], end: f64) -> f64 {
    let w = tail_window(nodes.len());
    let mean = w.clone().map(|i| g[i] * nodes[i].powi(4)).sum::<f64>() / w.len() as f64;
    mean / (3.0 * end.powi(3))
}

#[derive(Debug, Clone, Copy)]
struct Plan {
    kappa: f64,
    x_limits: (Limit, Limit),
    y_limits: (Limit, Limit),
    drive_x: bool,
    /// exponent of the y driver, when driven
    drive_y: Option<f64>,
}

fn plan(params: &ModeParams, which: Behavior) -> Result<Plan> {
    use Limit::*;
    let n = params.n;
    Ok(match which {
        Behavior::InfGrow => Plan {
            kappa: SQRT2,
            x_limits: (Infinity, Start),
            y_limits: (Start, Start),
            drive_x: true,
            drive_y: None,
        },
        Behavior::InfDecay => Plan {
            kappa: -SQRT2,
            x_limits: (Infinity, Infinity),
            y_limits: (Infinity, Infinity),
            drive_x: true,
            drive_y: None,
        },
        Behavior::InfPlus => Plan {
            kappa: 0.0,
            x_limits: (Infinity, Start),
            y_limits: (Infinity, Start),
            drive_x: false,
            drive_y: Some(n),
        },
        Behavior::InfMinus => Plan {
            kappa: 0.0,
            x_limits: (Infinity, Start),
            y_limits: (Infinity, Infinity),
            drive_x: false,
            drive_y: Some(-n),
        },
        _ => {
            return Err(Error::InvalidInput(format!("{which:?} is not a behavior at infinity")));
        }
    })
}

struct Disc {
    grid: PanelGrid,
    r: Vec<f64>,
    /// `1 - f² - d²/r²`
    h: Vec<f64>,
    one_minus_f2: Vec<f64>,
    bessel: Bessel,
}

impl Disc {
    fn new(params: &ModeParams, p: &Profile, r0: f64, far: f64) -> Result<Self> {
        let grid = PanelGrid::uniform(r0, far, PANEL, ORDER);
        let r = grid.nodes().to_vec();
        let one_minus_f2: Vec<f64> = r.iter().map(|&r| p.one_minus_f_sq(r)).collect();
        let d2 = params.d * params.d;
        let h = r.iter().zip(&one_minus_f2).map(|(r, w)| w - d2 / (r * r)).collect();
        let mu = params.n * params.n - 2.0 * d2 - 0.25;
        let bessel = bessel(mu, &r, r0, far)?;
        Ok(Self {
            grid,
            r,
            h,
            one_minus_f2,
            bessel,
        })
    }
}

/// Compensated `(x, x', y, y')` at the nodes.
type Fields = [Vec<f64>; 4];

fn drivers(plan: &Plan, disc: &Disc) -> Fields {
    let len = disc.r.len();
    let mut out: Fields = std::array::from_fn(|_| vec![0.0; len]);
    for i in 0..len {
        let r = disc.r[i];
        if plan.drive_x {
            let (k, dk) = if plan.kappa > 0.0 {
                (disc.bessel.kp[i], disc.bessel.dkp[i])
            } else {
                (disc.bessel.km[i], disc.bessel.dkm[i])
            };
            out[0][i] = 2.0 * k / r.sqrt();
            out[1][i] = 2.0 * (dk / r.sqrt() - 0.5 * k / (r * r.sqrt()));
        }
        if let Some(e) = plan.drive_y {
            out[2][i] = 2.0 * r.powf(e);
            out[3][i] = 2.0 * e * r.powf(e - 1.0);
        }
    }
    out
}

fn apply(params: &ModeParams, plan: &Plan, disc: &Disc, cur: &Fields, drv: &Fields) -> Result<Fields> {
    let len = disc.r.len();
    let (n, xi2) = (params.n, params.xi_sq);
    let b = &disc.bessel;
    let c = b.wronskian;
    let gx: Vec<f64> = (0..len)
        .map(|i| -3.0 * disc.h[i] * cur[0][i] - xi2 * cur[2][i] / (disc.r[i] * disc.r[i]))
        .collect();
    let gy: Vec<f64> = (0..len)
        .map(|i| -disc.h[i] * cur[2][i] - xi2 * cur[0][i] / (disc.r[i] * disc.r[i]))
        .collect();
    let kappa = plan.kappa;
    let (mu1, mu2) = (SQRT2 - kappa, -(SQRT2 + kappa));
    let g1: Vec<f64> = (0..len).map(|i| b.km[i] * disc.r[i].sqrt() * gx[i]).collect();
    let g2: Vec<f64> = (0..len).map(|i| b.kp[i] * disc.r[i].sqrt() * gx[i]).collect();
    let i1 = kernel_integral(&disc.grid, &g1, mu1, plan.x_limits.0)?;
    let i2 = kernel_integral(&disc.grid, &g2, mu2, plan.x_limits.1)?;

    let muy = -kappa;
    let cy = -2.0 * n;
    let j1g: Vec<f64> = (0..len).map(|i| disc.r[i].powf(1.0 - n) * gy[i]).collect();
    let j2g: Vec<f64> = (0..len).map(|i| disc.r[i].powf(1.0 + n) * gy[i]).collect();
    let j1 = kernel_integral(&disc.grid, &j1g, muy, plan.y_limits.0)?;
    let j2 = kernel_integral(&disc.grid, &j2g, muy, plan.y_limits.1)?;

    let mut out: Fields = std::array::from_fn(|_| vec![0.0; len]);
    for i in 0..len {
        let r = disc.r[i];
        let sr = r.sqrt();
        let (pp, pm) = (b.kp[i] / sr, b.km[i] / sr);
        let dpp = b.dkp[i] / sr - 0.5 * pp / r;
        let dpm = b.dkm[i] / sr - 0.5 * pm / r;
        out[0][i] = drv[0][i] - pp * i1[i] / c + pm * i2[i] / c;
        out[1][i] = drv[1][i] - (dpp + mu1 * pp) * i1[i] / c + (dpm + mu2 * pm) * i2[i] / c;
        let (rp, rm) = (r.powf(n), r.powf(-n));
        out[2][i] = drv[2][i] - rp * j1[i] / cy + rm * j2[i] / cy;
        out[3][i] = drv[3][i] - (n * rp / r + muy * rp) * j1[i] / cy + (-n * rm / r + muy * rm) * j2[i] / cy;
    }
    Ok(out)
}

/// Diagnostics of a far-field construction.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FarStats {
    pub r0: f64,
    pub iterations: usize,
    pub ratios: Vec<f64>,
    pub final_change: f64,
    /// sup of the pointwise relative residual of the (x, y) system on `[R₀, r_max]`
    pub residual: f64,
    pub enlargements: usize,
    /// de-compensated values would not be representable somewhere on the grid
    pub overflow: bool,
    pub kappa: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FarBranch {
    pub branch: SolutionBranch,
    pub stats: FarStats,
}

struct Converged {
    fields: Fields,
    iterations: usize,
    ratios: Vec<f64>,
    change: f64,
}

fn iterate(params: &ModeParams, plan: &Plan, disc: &Disc, r0: f64, tol: f64, cap: usize) -> Result<Converged> {
    let drv = drivers(plan, disc);
    let len = disc.r.len();
    let weight: Vec<f64> = (0..len).map(|i| drv[0][i].abs() + drv[2][i].abs()).collect();
    let mut cur = drv.clone();
    let mut ratios = Vec::new();
    let mut history: Vec<f64> = Vec::new();
    for it in 1..=cap {
        let next = apply(params, plan, disc, &cur, &drv)?;
        let rel = |new: f64, old: f64, w: f64| (new - old).abs() / new.abs().max(1e-2 * w);
        let change = (0..len)
            .map(|i| rel(next[0][i], cur[0][i], weight[i]).max(rel(next[2][i], cur[2][i], weight[i])))
            .fold(0.0, f64::max);
        cur = next;
        // the x-y coupling makes successive changes alternate, so the rate
        // is taken over two steps
        if it > 2 {
            ratios.push((change / history[it - 3]).sqrt());
        }
        history.push(change);
        if !change.is_finite() {
            return Err(Error::NonContraction {
                radius: r0,
                ratio: f64::INFINITY,
            });
        }
        if change < tol {
            return Ok(Converged {
                fields: cur,
                iterations: it,
                ratios,
                change,
            });
        }
        if it >= 4 && ratios.last().is_some_and(|&q| q > 0.5) {
            return Err(Error::NonContraction {
                radius: r0,
                ratio: *ratios.last().unwrap(),
            });
        }
    }
    Err(Error::NonContraction {
        radius: r0,
        ratio: ratios.last().copied().unwrap_or(f64::NAN),
    })
}

fn node_residual(params: &ModeParams, kappa: f64, disc: &Disc, f: &Fields, r_max: f64) -> f64 {
    let dx = disc.grid.derivative(&f[1]);
    let dy = disc.grid.derivative(&f[3]);
    let (g2, xi2) = (params.gamma_sq, params.xi_sq);
    let mut worst: f64 = 0.0;
    for i in 0..disc.r.len() {
        let r = disc.r[i];
        if r > r_max {
            break;
        }
        let (x, xp, y, yp) = (f[0][i], f[1][i], f[2][i], f[3][i]);
        let w = disc.one_minus_f2[i];
        let tx = [
            dx[i] + 2.0 * kappa * xp + kappa * kappa * x,
            (xp + kappa * x) / r,
            -g2 * x / (r * r),
            xi2 * y / (r * r),
            -2.0 * x,
            3.0 * w * x,
        ];
        let ty = [
            dy[i] + 2.0 * kappa * yp + kappa * kappa * y,
            (yp + kappa * y) / r,
            -g2 * y / (r * r),
            xi2 * x / (r * r),
            w * y,
        ];
        for t in [&tx[..], &ty[..]] {
            let scale: f64 = t.iter().map(|v| v.abs()).sum();
            if scale > 0.0 {
                worst = worst.max(t.iter().sum::<f64>().abs() / scale);
            }
        }
    }
    worst
}

/// Starting `R₀`: the larger of [`MIN_R0`] and the bound `2α/β` with
/// `α = n + 1`, `β = √2` on the power-exponential kernels, enlarged by 25%
/// until a trial iteration of every branch contracts with ratio below 1/2.
pub fn choose_r0(params: &ModeParams, p: &Profile, opts: &FarOptions) -> Result<f64> {
    let mut r0 = MIN_R0.max(2.0 * (params.n + 1.0) / SQRT2);
    for _ in 0..MAX_ENLARGEMENTS {
        let disc = Disc::new(params, p, r0, opts.far_radius)?;
        let ok = Behavior::INFINITY.iter().all(|&w| {
            let plan = plan(params, w).expect("infinity behaviors have plans");
            match iterate(params, &plan, &disc, r0, 0.0, 4) {
                Err(Error::NonContraction { ratio, .. }) => ratio.is_finite() && ratio < 0.5,
                Ok(_) => true,
                Err(_) => false,
            }
        });
        if ok {
            return Ok(r0);
        }
        r0 *= 1.25;
    }
    Err(Error::NonContraction {
        radius: r0,
        ratio: f64::NAN,
    })
}

/// Output spacing on `[R₀, r_max]`.
pub const OUTPUT_STEP: f64 = 0.25;

/// One far-field branch on `[R₀, r_max]`; `R₀` grows by 25% on stalls.
pub fn far_branch(
    params: &ModeParams,
    p: &Profile,
    which: Behavior,
    r0: f64,
    opts: &FarOptions,
) -> Result<FarBranch> {
    let plan = plan(params, which)?;
    let FarOptions { r_max, far_radius, tol } = *opts;
    if !(r0 >= MIN_R0 * 0.5 && r_max > r0 && far_radius >= 2.0 * r_max) {
        return Err(Error::InvalidInput(format!(
            "need {} <= R0 < r_max <= far_radius/2 (got R0={r0}, r_max={r_max}, far_radius={far_radius})",
            MIN_R0 * 0.5
        )));
    }
    let mut r0 = r0;
    let mut enlargements = 0;
    let (disc, conv) = loop {
        let disc = Disc::new(params, p, r0, far_radius)?;
        match iterate(params, &plan, &disc, r0, tol, MAX_ITERATIONS) {
            Ok(c) => break (disc, c),
            Err(e @ Error::NonContraction { .. }) => {
                if enlargements == MAX_ENLARGEMENTS || r0 * 1.25 >= r_max {
                    return Err(e);
                }
                r0 *= 1.25;
                enlargements += 1;
            }
            Err(e) => return Err(e),
        }
    };
    let residual = node_residual(params, plan.kappa, &disc, &conv.fields, r_max);

    let count = ((r_max - r0) / OUTPUT_STEP).ceil() as usize;
    let grid: Vec<f64> = (0..=count)
        .map(|k| if k == count { r_max } else { r0 + k as f64 * OUTPUT_STEP })
        .collect();
    let f = &conv.fields;
    let kappa = plan.kappa;
    let mut branch = SolutionBranch {
        params: *params,
        behavior: which,
        grid: grid.clone(),
        a: Vec::new(),
        a_prime: Vec::new(),
        b: Vec::new(),
        b_prime: Vec::new(),
        log_scale: grid.iter().map(|r| kappa * r).collect(),
        lead_coeff: 1.0,
    };
    for &r in &grid {
        let v: [f64; 4] = std::array::from_fn(|k| disc.grid.interpolate(&f[k], r));
        // stored derivatives are e^{-κr} times the true ones
        let (xp, yp) = (v[1] + kappa * v[0], v[3] + kappa * v[2]);
        branch.a.push(0.5 * (v[0] + v[2]));
        branch.b.push(0.5 * (v[0] - v[2]));
        branch.a_prime.push(0.5 * (xp + yp));
        branch.b_prime.push(0.5 * (xp - yp));
    }
    let overflow = kappa * r_max > 700.0;
    Ok(FarBranch {
        branch,
        stats: FarStats {
            r0,
            iterations: conv.iterations,
            ratios: conv.ratios,
            final_change: conv.change,
            residual,
            enlargements,
            overflow,
            kappa,
        },
    })
}

/// Continues a far-field branch inward to `r_min` by integrating the
/// system, keeping the same compensation. Stops early (without error) at the
/// first radius where the true state exceeds [`INWARD_LIMIT`].
pub fn extend_inward(branch: &SolutionBranch, p: &Profile, r_min: f64, tol: f64) -> Result<SolutionBranch> {
    let r_start = branch.grid[0];
    if r_min >= r_start {
        return Ok(branch.clone());
    }
    let kappa = if branch.grid.len() > 1 {
        (branch.log_scale[1] - branch.log_scale[0]) / (branch.grid[1] - branch.grid[0])
    } else {
        0.0
    };
    let count = ((r_start - r_min) / OUTPUT_STEP).ceil() as usize;
    let points: Vec<f64> = (1..=count)
        .map(|k| if k == count { r_min } else { r_start - k as f64 * OUTPUT_STEP })
        .collect();
    let x0 = branch.state(0);
    let states = match propagate_to_points(&branch.params, p, x0, r_start, &points, tol.max(1e-14)) {
        Ok(s) => s,
        Err(Error::Overflow { .. }) => Vec::new(),
        Err(e) => return Err(e),
    };
    let mut out = branch.clone();
    let mut pre: Vec<(f64, [f64; 4])> = Vec::new();
    for (r, x) in points.iter().zip(states) {
        if x.iter().any(|v| v.abs() > INWARD_LIMIT) {
            break;
        }
        pre.push((*r, x));
    }
    pre.reverse();
    let mut grid = Vec::new();
    let (mut a, mut ap, mut b, mut bp, mut ls) = (Vec::new(), Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for (r, x) in pre {
        let s = (-kappa * r).exp();
        grid.push(r);
        a.push(x[0] * s);
        ap.push(x[1] / r * s);
        b.push(x[2] * s);
        bp.push(x[3] / r * s);
        ls.push(kappa * r);
    }
    grid.extend(&out.grid);
    a.extend(&out.a);
    ap.extend(&out.a_prime);
    b.extend(&out.b);
    bp.extend(&out.b_prime);
    ls.extend(&out.log_scale);
    out.grid = grid;
    out.a = a;
    out.a_prime = ap;
    out.b = b;
    out.b_prime = bp;
    out.log_scale = ls;
    Ok(out)
}

/// Frame determinant from compensated states: the exponential factors
/// multiply out.
pub fn compensated_det(cols: &[[f64; 4]; 4], log_scales: [f64; 4]) -> f64 {
    frame_det(cols) * log_scales.iter().sum::<f64>().exp()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InfinityBasis {
    /// In the order of [`Behavior::INFINITY`].
    pub branches: Vec<FarBranch>,
    pub determinants: Vec<f64>,
    pub determinant_radii: Vec<f64>,
    /// `16√2 n` for the order (InfGrow, InfDecay, InfPlus, InfMinus)
    pub expected_determinant: f64,
}

impl InfinityBasis {
    pub fn branch(&self, which: Behavior) -> &SolutionBranch {
        &self
            .branches
            .iter()
            .find(|b| b.branch.behavior == which)
            .expect("infinity basis holds all four behaviors")
            .branch
    }

    /// Compensated state at a grid radius shared by all branches.
    fn compensated(b: &SolutionBranch, i: usize) -> ([f64; 4], f64) {
        let r = b.grid[i];
        ([b.a[i], r * b.a_prime[i], b.b[i], r * b.b_prime[i]], b.log_scale[i])
    }

    /// Determinant at the common node closest to `r`.
    pub fn determinant_near(&self, r: f64) -> (f64, f64) {
        let mut cols = [[0.0; 4]; 4];
        let mut ls = [0.0; 4];
        let mut at = r;
        for (k, fb) in self.branches.iter().enumerate() {
            let i = fb.branch.nearest(r);
            at = fb.branch.grid[i];
            (cols[k], ls[k]) = Self::compensated(&fb.branch, i);
        }
        (compensated_det(&cols, ls), at)
    }
}

/// All four branches with a common `R₀` (the largest any branch needed).
pub fn infinity_basis(
    params: &ModeParams,
    p: &Profile,
    r0: Option<f64>,
    opts: &FarOptions,
    mode: Mode,
) -> Result<InfinityBasis> {
    let mut r0 = match r0 {
        Some(r) => r,
        None => choose_r0(params, p, opts)?,
    };
    let r_max = opts.r_max;
    let build = |r0: f64| {
        par::map(mode, &Behavior::INFINITY, |&w| far_branch(params, p, w, r0, opts))
            .into_iter()
            .collect::<Result<Vec<_>>>()
    };
    let mut branches = build(r0)?;
    let needed = branches.iter().map(|b| b.stats.r0).fold(r0, f64::max);
    if needed > r0 {
        r0 = needed;
        branches = build(r0)?;
    }
    let mut basis = InfinityBasis {
        branches,
        determinants: Vec::new(),
        determinant_radii: Vec::new(),
        expected_determinant: 16.0 * SQRT2 * params.n,
    };
    for r in [r0, 0.5 * (r0 + r_max), r_max] {
        let (w, at) = basis.determinant_near(r);
        if !(w.abs() > 1e-8 * basis.expected_determinant.abs()) {
            return Err(Error::DegenerateBasis { wronskian: w });
        }
        basis.determinants.push(w);
        basis.determinant_radii.push(at);
    }
    Ok(basis)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_order_series_is_exact() {
        // ν² = 1/4: k± ≡ 1
        for plus in [true, false] {
            let (k, dk) = k_series(0.0, plus, 3.0);
            assert_eq!((k, dk), (1.0, 0.0));
        }
    }

    #[test]
    fn series_solves_its_equation() {
        let mu = 3.7;
        for plus in [true, false] {
            let s = if plus { 1.0 } else { -1.0 };
            let r = 40.0;
            let h = 1e-3;
            let (k, dk) = k_series(mu, plus, r);
            let d2 = (k_series(mu, plus, r + h).1 - k_series(mu, plus, r - h).1) / (2.0 * h);
            let res = d2 + s * 2.0 * SQRT2 * dk - mu * k / (r * r);
            assert!(res.abs() < 1e-10, "{res}");
        }
    }

    #[test]
    fn cancelling_tail_falls_back_to_integer_powers() {
        let grid = PanelGrid::uniform(100.0, 200.0, 0.35, ORDER);
        let g: Vec<f64> = grid.nodes().iter().map(|r| r.powi(-4) * (0.02 - 3.0 / r)).collect();
        let t = power_tail(grid.nodes(), &g, 200.0).unwrap();
        let exact = 0.02 / (3.0 * 200f64.powi(3)) - 3.0 / (4.0 * 200f64.powi(4));
        assert!((t - exact).abs() < 1e-6 * exact.abs(), "{t} {exact}");
    }

    #[test]
    fn power_tail_integrates_inverse_cube() {
        let grid = PanelGrid::uniform(10.0, 20.0, 0.5, ORDER);
        let g: Vec<f64> = grid.nodes().iter().map(|r| r.powi(-3)).collect();
        let t = power_tail(grid.nodes(), &g, 20.0).unwrap();
        assert!((t - 0.5 / 400.0).abs() < 1e-12);
        let grid = PanelGrid::uniform(40.0, 80.0, 0.5, ORDER);
        let g: Vec<f64> = grid.nodes().iter().map(|r| r.powi(-3) * (1.0 + 2.0 / r)).collect();
        let t = power_tail(grid.nodes(), &g, 80.0).unwrap();
        let exact = 0.5 / 6400.0 + 2.0 / (3.0 * 512000.0);
        assert!((t - exact).abs() < 1e-3 * exact, "{t}");
    }
}
