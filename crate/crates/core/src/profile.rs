//! The degree-d vortex profile: the nondecreasing solution of
//! `f'' + f'/r - d² f / r² = -f (1 - f²)` with `f(0) = 0`, `f(∞) = 1`.
//!
//! The critical amplitude is located by bisection on the overshoot /
//! undershoot dichotomy. The stored profile is then built by matching an
//! outward solution seeded by the power series at 0 against an inward
//! solution seeded by the asymptotic series at infinity, which avoids the
//! exponential loss of accuracy of a single long shot.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interp::{fornberg_weights, locate, quintic_hermite};
use crate::ode::{Control, Integrator, OdeOptions, RKF78};

/// Result of one shot from the origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Shot {
    Overshoot,
    Undershoot,
    Indeterminate,
}

#[derive(Debug, Clone)]
pub struct ShootOutcome {
    pub class: Shot,
    /// Radius at which the classification was decided (or `r_max`).
    pub radius: f64,
    /// Accepted integrator states `(r, f, f')`.
    pub trajectory: Vec<[f64; 3]>,
}

const OVERSHOOT_MARGIN: f64 = 1e-12;
const UNDERSHOOT_SLOPE: f64 = -1e-12;
const UNDERSHOOT_GAP: f64 = 1e-6;

/// Power series at the origin: value and derivative.
///
/// `f = A r^d - A r^{d+2} / (4(d+1)) + A r^{d+4} / (32(d+1)(d+2))
///      + A³ r^{3d+2} / (4(d+1)(2d+1))`
pub fn series_at_zero(d: f64, amplitude: f64, r: f64) -> (f64, f64) {
    let (v, dv) = series_basis(d, r);
    let a = amplitude;
    (
        a * v[0] + a * a * a * v[1],
        a * dv[0] + a * a * a * dv[1],
    )
}

// linear and cubic parts of the series, per unit amplitude
fn series_basis(d: f64, r: f64) -> ([f64; 2], [f64; 2]) {
    let c1 = -1.0 / (4.0 * (d + 1.0));
    let c2 = 1.0 / (32.0 * (d + 1.0) * (d + 2.0));
    let e = 1.0 / (4.0 * (d + 1.0) * (2.0 * d + 1.0));
    let rd = r.powf(d);
    let r2 = r * r;
    let lin = rd * (1.0 + c1 * r2 + c2 * r2 * r2);
    let dlin = rd / r * (d + (d + 2.0) * c1 * r2 + (d + 4.0) * c2 * r2 * r2);
    let cub = e * rd * rd * rd * r2;
    let dcub = (3.0 * d + 2.0) * cub / r;
    ([lin, cub], [dlin, dcub])
}

/// Asymptotic series `f ~ 1 - Σ_k u_k r^{-2k}` at infinity.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TailSeries {
    pub d: f64,
    pub coeffs: Vec<f64>,
}

impl TailSeries {
    pub fn new(d: f64, terms: usize) -> Self {
        // u[0] is a placeholder so that u[k] multiplies r^{-2k}
        let mut u = vec![0.0; terms + 1];
        let d2 = d * d;
        for m in 1..=terms {
            let mut sq = 0.0;
            for i in 1..m {
                sq += u[i] * u[m - i];
            }
            let mut cube = 0.0;
            for i in 1..m {
                for j in 1..m - i {
                    cube += u[i] * u[j] * u[m - i - j];
                }
            }
            let mf = (m - 1) as f64;
            let delta = if m == 1 { d2 } else { 0.0 };
            u[m] = 0.5 * (delta + (4.0 * mf * mf - d2) * u[m - 1] + 3.0 * sq - cube);
        }
        Self { d, coeffs: u }
    }

    /// Value and derivative using the first `terms` coefficients.
    pub fn eval(&self, r: f64, terms: usize) -> (f64, f64) {
        let x = 1.0 / (r * r);
        let mut f = 1.0;
        let mut df = 0.0;
        let mut p = 1.0;
        for k in 1..=terms.min(self.coeffs.len() - 1) {
            p *= x;
            f -= self.coeffs[k] * p;
            df += 2.0 * k as f64 * self.coeffs[k] * p / r;
        }
        (f, df)
    }

    /// `1 - T(r)` and its derivative for the truncated series `T`.
    pub fn deficit(&self, r: f64, terms: usize) -> (f64, f64) {
        let x = 1.0 / (r * r);
        let n = terms.min(self.coeffs.len() - 1);
        let (mut g, mut dg) = (0.0, 0.0);
        for k in (1..=n).rev() {
            let p = x.powi(k as i32);
            g += self.coeffs[k] * p;
            dg -= 2.0 * k as f64 * self.coeffs[k] * p / r;
        }
        (g, dg)
    }

    /// Coefficients `e_m` of `Σ e_m r^{-2m}`, the defect left in the profile
    /// equation by the series truncated after `terms` terms. Entries with
    /// `m <= terms` vanish identically and are stored as exact zeros.
    pub fn defect_coeffs(&self, terms: usize) -> Vec<f64> {
        let n = terms.min(self.coeffs.len() - 1);
        let top = 3 * n + 1;
        let mut g = vec![0.0; top + 1];
        g[1..=n].copy_from_slice(&self.coeffs[1..=n]);
        let d2 = self.d * self.d;
        let mut e = vec![0.0; top + 1];
        e[1] -= d2;
        for k in 1..=n {
            let kf = k as f64;
            e[k + 1] += (d2 - 4.0 * kf * kf) * g[k];
            e[k] += 2.0 * g[k];
        }
        for i in 1..=n {
            for j in 1..=n {
                if i + j <= top {
                    e[i + j] -= 3.0 * g[i] * g[j];
                }
                for k in 1..=n {
                    if i + j + k <= top {
                        e[i + j + k] += g[i] * g[j] * g[k];
                    }
                }
            }
        }
        for v in e.iter_mut().take(n + 1) {
            *v = 0.0;
        }
        e
    }

    /// Optimal truncation at `r`: number of terms and size of the first
    /// omitted term.
    pub fn truncation(&self, r: f64) -> (usize, f64) {
        let x = 1.0 / (r * r);
        let mut best = (1usize, f64::INFINITY);
        let mut p = 1.0;
        for k in 1..self.coeffs.len() {
            p *= x;
            let term = (self.coeffs[k] * p).abs();
            if term < best.1 {
                best = (k - 1, term);
            }
        }
        best
    }
}

fn rhs(d: f64) -> impl Fn(f64, &[f64; 2]) -> [f64; 2] {
    let d2 = d * d;
    move |r, y| [y[1], -y[1] / r + d2 * y[0] / (r * r) - y[0] * (1.0 - y[0] * y[0])]
}

// profile plus its first variation
fn rhs_var(d: f64) -> impl Fn(f64, &[f64; 4]) -> [f64; 4] {
    let d2 = d * d;
    move |r, y| {
        let q = d2 / (r * r);
        [
            y[1],
            -y[1] / r + q * y[0] - y[0] * (1.0 - y[0] * y[0]),
            y[3],
            -y[3] / r + q * y[2] - (1.0 - 3.0 * y[0] * y[0]) * y[2],
        ]
    }
}

/// Terms of the tail series used as the reference for the inward leg.
const REFERENCE_TERMS: usize = 3;

// deviation w = f - T from the truncated tail series, plus its first variation
fn deviation_rhs(tail: &TailSeries, terms: usize) -> impl Fn(f64, &[f64; 4]) -> [f64; 4] {
    let e = tail.defect_coeffs(terms);
    let tail = tail.clone();
    let d2 = tail.d * tail.d;
    move |r, y| {
        let x = 1.0 / (r * r);
        let mut forcing = 0.0;
        for m in (terms + 1..e.len()).rev() {
            forcing = forcing * x + e[m];
        }
        forcing *= x.powi(terms as i32 + 1);
        let (g, _) = tail.deficit(r, terms);
        let t = 1.0 - g;
        let w = y[0];
        let lin = -2.0 + 6.0 * g - 3.0 * g * g;
        let f = t + w;
        [
            y[1],
            -y[1] / r + d2 * x * w - lin * w + 3.0 * t * w * w + w * w * w - forcing,
            y[3],
            -y[3] / r + d2 * x * y[2] - (1.0 - 3.0 * f * f) * y[2],
        ]
    }
}

/// Largest radius where the omitted series term `A r^{d+4}` stays below `tol`.
pub fn series_radius(d: f64, amplitude: f64, tol: f64) -> f64 {
    (tol / amplitude.max(1e-300)).powf(1.0 / (d + 4.0)).min(0.25)
}

fn shoot_with(
    integ: &Integrator,
    d: f64,
    a0: f64,
    r_max: f64,
    tol: f64,
    record: bool,
) -> Result<ShootOutcome> {
    if !(d > 0.0) || !(a0 >= 0.0) || !(r_max > 1.0) {
        return Err(Error::InvalidInput(format!(
            "shoot_profile needs d > 0, a0 >= 0, r_max > 1 (got {d}, {a0}, {r_max})"
        )));
    }
    if a0 == 0.0 {
        return Ok(ShootOutcome {
            class: Shot::Undershoot,
            radius: 0.0,
            trajectory: vec![[0.0, 0.0, 0.0], [r_max, 0.0, 0.0]],
        });
    }
    let r0 = series_radius(d, a0, tol);
    let (f0, df0) = series_at_zero(d, a0, r0);
    if !(f0 < 1.0) || !(df0 > 0.0) {
        return Err(Error::SeedBlowUp {
            amplitude: a0,
            radius: r0,
        });
    }
    let mut trajectory = vec![[r0, f0, df0]];
    let mut class = Shot::Indeterminate;
    let mut radius = r_max;
    let out = integ.integrate(rhs(d), r0, [f0, df0], r_max, |r, y| {
        if record {
            trajectory.push([r, y[0], y[1]]);
        }
        if y[0] > 1.0 + OVERSHOOT_MARGIN {
            class = Shot::Overshoot;
            radius = r;
            Control::Stop
        } else if y[1] < UNDERSHOOT_SLOPE && y[0] < 1.0 - UNDERSHOOT_GAP {
            class = Shot::Undershoot;
            radius = r;
            Control::Stop
        } else {
            Control::Continue
        }
    });
    match out {
        Ok(_) => Ok(ShootOutcome {
            class,
            radius,
            trajectory,
        }),
        Err(Error::StepFailure { radius, .. }) if radius < 2.0 * r0 => Err(Error::SeedBlowUp {
            amplitude: a0,
            radius,
        }),
        Err(e) => Err(e),
    }
}

/// Integrates from the series seed with amplitude `a0` and classifies the
/// trajectory.
pub fn shoot_profile(d: f64, a0: f64, r_max: f64) -> Result<ShootOutcome> {
    shoot_with(&Integrator::rkf78(1e-13), d, a0, r_max, 1e-12, true)
}

/// Same as [`shoot_profile`] with a caller-supplied integrator.
pub fn shoot_profile_with(integ: &Integrator, d: f64, a0: f64, r_max: f64) -> Result<ShootOutcome> {
    shoot_with(integ, d, a0, r_max, integ.options().rtol * 10.0, true)
}

/// Bisection for the critical amplitude `A_d`.
pub fn find_critical_amplitude(d: f64, tol: f64) -> Result<f64> {
    let rtol = (tol / 10.0).clamp(1e-14, 1e-9);
    find_critical_amplitude_with(&Integrator::rkf78(rtol), d, tol)
}

pub fn find_critical_amplitude_with(integ: &Integrator, d: f64, tol: f64) -> Result<f64> {
    if !(d > 0.0) || !(tol > 0.0) {
        return Err(Error::InvalidInput(format!(
            "critical amplitude needs d > 0 and tol > 0 (got {d}, {tol})"
        )));
    }
    let r_max = 40.0 + 5.0 * d;
    let stol = integ.options().rtol * 10.0;
    let classify = |a: f64| -> Result<Shot> { Ok(shoot_with(integ, d, a, r_max, stol, false)?.class) };
    let mut lo = 0.0;
    let mut hi = 1.0;
    while classify(hi)? != Shot::Overshoot {
        lo = hi;
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::DichotomyViolated {
                lo,
                hi,
                class: "Undershoot".into(),
            });
        }
    }
    if classify(lo)? == Shot::Overshoot {
        return Err(Error::DichotomyViolated {
            lo,
            hi,
            class: "Overshoot".into(),
        });
    }
    // at tiny amplitudes the seed radius is clamped; shrink the upper end first
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        match classify(mid)? {
            Shot::Overshoot => hi = mid,
            Shot::Undershoot => lo = mid,
            Shot::Indeterminate => return Ok(mid),
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Sampled vortex profile with series and tail extensions.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Profile {
    pub d: f64,
    pub amplitude: f64,
    pub grid: Vec<f64>,
    pub f: Vec<f64>,
    pub f_prime: Vec<f64>,
    pub r_series: f64,
    pub r_tail: f64,
    /// Estimate of `sup r⁴ |f - 1 + d²/(2r²)|` beyond `r_tail`.
    pub tail_constant: f64,
    pub tail: TailSeries,
    pub tail_terms: usize,
    pub tol: f64,
}

/// Build settings for [`build_profile`].
#[derive(Debug, Clone, Copy)]
pub struct ProfileOptions {
    pub r_max: f64,
    pub tol: f64,
    /// Log-spacing of grid nodes below r = 1 and uniform spacing above.
    pub spacing: f64,
}

impl Default for ProfileOptions {
    fn default() -> Self {
        Self {
            r_max: 40.0,
            tol: 1e-10,
            spacing: 0.02,
        }
    }
}

fn tail_switch(tail: &TailSeries, target: f64) -> (f64, usize) {
    let mut r = 6.0;
    loop {
        let (n, err) = tail.truncation(r);
        if err < target || r > 200.0 {
            return (r, n.max(1));
        }
        r += 0.5;
    }
}

/// Builds the profile on `(0, r_max]`.
pub fn build_profile(d: f64, r_max: f64, tol: f64) -> Result<Profile> {
    build_profile_with(
        d,
        ProfileOptions {
            r_max,
            tol,
            ..Default::default()
        },
    )
}

pub fn build_profile_with(d: f64, opts: ProfileOptions) -> Result<Profile> {
    let tol = opts.tol;
    if !(d > 0.0) || !(tol > 0.0) || !(opts.r_max > 1.0) {
        return Err(Error::InvalidInput(format!(
            "build_profile needs d > 0, tol > 0, r_max > 1 (got {d}, {tol}, {})",
            opts.r_max
        )));
    }
    let mut amp = find_critical_amplitude(d, 1e-9_f64.max(tol))?;
    let rtol = (tol * 1e-3).max(2e-15);
    let integ = Integrator::rkf78(rtol);

    let tail = TailSeries::new(d, 80);
    let (r_far, tail_terms) = tail_switch(&tail, (tol * 1e-3).max(1e-15));
    let r_match = 3.0 + d;

    let inward_rhs = deviation_rhs(&tail, REFERENCE_TERMS);
    let kappa = 2f64.sqrt() + 0.5 / r_far;
    // deviation of the optimally truncated series from the reference one
    let (g_opt, dg_opt) = tail.deficit(r_far, tail_terms);
    let (g_ref, dg_ref) = tail.deficit(r_far, REFERENCE_TERMS);
    let (w0, dw0) = (g_ref - g_opt, dg_ref - dg_opt);
    let integ_in = Integrator::new(
        &RKF78,
        OdeOptions {
            atol: 1e-300,
            ..OdeOptions::with_rtol(rtol)
        },
    );

    let mut c = 0.0;
    let mut defect = f64::INFINITY;
    let mut r_s = series_radius(d, amp, tol);
    let (g_m, dg_m) = tail.deficit(r_match, REFERENCE_TERMS);
    for _ in 0..30 {
        r_s = series_radius(d, amp, tol);
        let (v, dv) = series_basis(d, r_s);
        let seed = [
            amp * v[0] + amp.powi(3) * v[1],
            amp * dv[0] + amp.powi(3) * dv[1],
            v[0] + 3.0 * amp * amp * v[1],
            dv[0] + 3.0 * amp * amp * dv[1],
        ];
        let out = integ.integrate(rhs_var(d), r_s, seed, r_match, |_, _| Control::Continue)?;
        let seed_in = [w0 + c, dw0 - kappa * c, 1.0, -kappa];
        let inn = integ_in.integrate(&inward_rhs, r_far, seed_in, r_match, |_, _| Control::Continue)?;
        // compare 1 - f from both sides
        let res = [
            (1.0 - out.y[0]) - (g_m - inn.y[0]),
            -out.y[1] - (dg_m - inn.y[1]),
        ];
        // Newton step on (A, c)
        let (j11, j12, j21, j22) = (-out.y[2], inn.y[2], -out.y[3], inn.y[3]);
        let det = j11 * j22 - j12 * j21;
        let da = (res[0] * j22 - res[1] * j12) / det;
        let dc = (j11 * res[1] - j21 * res[0]) / det;
        amp -= da;
        c -= dc;
        let new_defect = res[0].abs() + res[1].abs();
        if new_defect < 1e-15 || (new_defect >= 0.5 * defect && new_defect < tol) {
            defect = new_defect.min(defect);
            break;
        }
        defect = new_defect;
    }
    if !(defect < tol) {
        return Err(Error::MatchingFailed { defect });
    }

    let h = opts.spacing;
    let r_lo = r_s / 10.0;
    let r_end = opts.r_max.max(r_far);
    let mut grid = Vec::new();
    let mut s = r_lo.ln();
    while s < 0.0 {
        grid.push(s.exp());
        s += h;
    }
    let steps = ((r_end - 1.0) / h).round() as usize;
    grid.extend((0..=steps).map(|k| 1.0 + (r_end - 1.0) * k as f64 / steps as f64));

    let mut f = vec![0.0; grid.len()];
    let mut fp = vec![0.0; grid.len()];
    let (v0, dv0) = series_at_zero(d, amp, r_s);
    let outward: Vec<usize> = (0..grid.len())
        .filter(|&i| grid[i] > r_s && grid[i] <= r_match)
        .collect();
    let pts: Vec<f64> = outward.iter().map(|&i| grid[i]).collect();
    let ys = integ.integrate_to_points(rhs(d), r_s, [v0, dv0], &pts)?;
    for (&i, y) in outward.iter().zip(ys) {
        f[i] = y[0];
        fp[i] = y[1];
    }
    let inward: Vec<usize> = (0..grid.len())
        .rev()
        .filter(|&i| grid[i] > r_match && grid[i] < r_far)
        .collect();
    let pts: Vec<f64> = inward.iter().map(|&i| grid[i]).collect();
    let ys = integ_in.integrate_to_points(&inward_rhs, r_far, [w0 + c, dw0 - kappa * c, 0.0, 0.0], &pts)?;
    for (&i, y) in inward.iter().zip(ys) {
        let (g, dg) = tail.deficit(grid[i], REFERENCE_TERMS);
        f[i] = (1.0 - g) + y[0];
        fp[i] = -dg + y[1];
    }
    let mut tail_constant: f64 = 0.0;
    for i in 0..grid.len() {
        let r = grid[i];
        if r <= r_s {
            let (a, b) = series_at_zero(d, amp, r);
            f[i] = a;
            fp[i] = b;
        } else if r >= r_far {
            let (a, b) = tail.eval(r, tail_terms);
            f[i] = a;
            fp[i] = b;
            tail_constant = tail_constant.max((a - 1.0 + d * d / (2.0 * r * r)).abs() * r.powi(4));
        }
    }

    Ok(Profile {
        d,
        amplitude: amp,
        grid,
        f,
        f_prime: fp,
        r_series: r_s,
        r_tail: r_far,
        tail_constant,
        tail,
        tail_terms,
        tol,
    })
}

impl Profile {
    /// Second derivative from the equation itself.
    pub fn second_derivative(&self, r: f64, f: f64, fp: f64) -> f64 {
        -fp / r + self.d * self.d * f / (r * r) - f * (1.0 - f * f)
    }

    /// `(f(r), f'(r))` for any `r > 0`.
    pub fn eval(&self, r: f64) -> (f64, f64) {
        if r <= self.grid[0] {
            return series_at_zero(self.d, self.amplitude, r);
        }
        if r >= self.r_tail || r >= *self.grid.last().unwrap() {
            return self.tail.eval(r, self.tail_terms);
        }
        let i = locate(&self.grid, r);
        let (r0, r1) = (self.grid[i], self.grid[i + 1]);
        let y0 = [
            self.f[i],
            self.f_prime[i],
            self.second_derivative(r0, self.f[i], self.f_prime[i]),
        ];
        let y1 = [
            self.f[i + 1],
            self.f_prime[i + 1],
            self.second_derivative(r1, self.f[i + 1], self.f_prime[i + 1]),
        ];
        quintic_hermite(r0, r1, y0, y1, r)
    }

    pub fn value(&self, r: f64) -> f64 {
        self.eval(r).0
    }

    /// `f(r)²`, the coefficient that couples the linearized system.
    pub fn f_sq(&self, r: f64) -> f64 {
        let v = self.value(r);
        v * v
    }

    /// `1 - f(r)²`, computed from the tail series where f is close to 1.
    pub fn one_minus_f_sq(&self, r: f64) -> f64 {
        if r >= self.r_tail {
            let x = 1.0 / (r * r);
            let mut g = 0.0;
            let mut p = 1.0;
            for k in 1..=self.tail_terms {
                p *= x;
                g += self.tail.coeffs[k] * p;
            }
            g * (2.0 - g)
        } else {
            let v = self.value(r);
            (1.0 - v) * (1.0 + v)
        }
    }

    pub fn r_max(&self) -> f64 {
        *self.grid.last().unwrap()
    }
}

/// Pointwise residual of the profile equation at the grid nodes.
#[derive(Debug, Clone)]
pub struct ResidualReport {
    pub sup: f64,
    pub at_radius: f64,
    /// `(r, residual)` at interior nodes.
    pub values: Vec<(f64, f64)>,
}

const STENCIL: usize = 11;

/// Residual of the profile equation, with `f''` obtained by an 11-point
/// finite-difference stencil applied to the stored `f'`.
pub fn profile_residual(p: &Profile) -> Result<ResidualReport> {
    profile_residual_on(p, f64::INFINITY)
}

/// Same as [`profile_residual`] restricted to nodes `r <= r_hi`.
pub fn profile_residual_on(p: &Profile, r_hi: f64) -> Result<ResidualReport> {
    let n = p.grid.len();
    if n < STENCIL + 2 {
        return Err(Error::GridTooCoarse(format!(
            "{n} nodes, stencil needs {}",
            STENCIL + 2
        )));
    }
    let half = STENCIL / 2;
    let d2 = p.d * p.d;
    let mut values = Vec::new();
    let mut sup: f64 = 0.0;
    let mut at = 0.0;
    for i in half..n - half {
        let r = p.grid[i];
        if r > r_hi {
            break;
        }
        let xs = &p.grid[i - half..=i + half];
        let w = fornberg_weights(r, xs, 1);
        let fpp: f64 = w[1]
            .iter()
            .zip(&p.f_prime[i - half..=i + half])
            .map(|(w, v)| w * v)
            .sum();
        let f = p.f[i];
        let res = fpp + p.f_prime[i] / r - d2 * f / (r * r) + f * (1.0 - f * f);
        if res.abs() > sup {
            sup = res.abs();
            at = r;
        }
        values.push((r, res));
    }
    Ok(ResidualReport {
        sup,
        at_radius: at,
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tail_coefficients_match_closed_forms() {
        let t = TailSeries::new(1.0, 8);
        assert!((t.coeffs[1] - 0.5).abs() < 1e-15);
        assert!((t.coeffs[2] - 1.125).abs() < 1e-15);
        assert!((t.coeffs[3] - 10.0625).abs() < 1e-12);
        let t3 = TailSeries::new(3.0, 3);
        assert!((t3.coeffs[1] - 4.5).abs() < 1e-15);
        assert!((t3.coeffs[2] - (9.0 + 81.0 / 8.0)).abs() < 1e-12);
    }

    #[test]
    fn zero_amplitude_is_undershoot() {
        let s = shoot_profile(1.0, 0.0, 30.0).unwrap();
        assert_eq!(s.class, Shot::Undershoot);
        assert!(s.trajectory.iter().all(|p| p[1] == 0.0));
    }

    #[test]
    fn large_amplitude_overshoots() {
        assert_eq!(shoot_profile(1.0, 10.0, 30.0).unwrap().class, Shot::Overshoot);
    }

    #[test]
    fn series_solves_equation_to_high_order() {
        let (d, a) = (1.5, 0.4);
        let r = 0.01;
        let h = 1e-6;
        let f = |r: f64| series_at_zero(d, a, r);
        let (v, dv) = f(r);
        let ddv = (f(r + h).1 - f(r - h).1) / (2.0 * h);
        let res = ddv + dv / r - d * d * v / (r * r) + v * (1.0 - v * v);
        assert!(res.abs() < 1e-7, "{res}");
    }
}
