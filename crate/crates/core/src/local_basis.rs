//! The four canonical solutions near `r = 0`, built by Picard iteration on
//! the integral fixed-point problems and continued outward by integration.
//!
//! Every component is `drive + φ(r) ∫_0^r χ(t) ∫_β^t ψ(s) F(s) ds dt` where
//! `φ` is a homogeneous solution of `u'' + u'/r - γ²u/r² = F`, `χ = 1/(tφ²)`,
//! `ψ = sφ` and `β` is either 0 or the right end of the iteration interval.

use serde::{Deserialize, Serialize};

use crate::branch::{Behavior, SolutionBranch};
use crate::error::{Error, Result};
use crate::par::{self, Mode};
use crate::params::{frame_det, propagate_to_points, ModeParams, DEGENERATE_THRESHOLD};
use crate::profile::Profile;
use crate::quad::PanelGrid;

/// Ratio of consecutive output radii.
pub const GRID_RATIO: f64 = 1.05;
/// Innermost node as a fraction of the iteration radius.
pub const INNER_FACTOR: f64 = 1e-6;
/// Below this the iteration radius is not halved further.
pub const RADIUS_FLOOR: f64 = 1e-4;
pub const MAX_ITERATIONS: usize = 60;

const ORDER: usize = 16;

/// θ, θ̃ and τ at one radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Weights {
    pub theta: f64,
    pub theta_tilde: f64,
    pub tau: f64,
}

pub fn special_weights(params: &ModeParams, r: f64) -> Result<Weights> {
    params.require_domain()?;
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::InvalidInput(format!("weights need r in (0, 1), got {r}")));
    }
    let (g1, g2) = (params.gamma1, params.gamma2);
    let den = params.theta_denominator();
    let lr = r.ln();
    let ratio = if den.abs() < DEGENERATE_THRESHOLD {
        -lr
    } else {
        (-den * lr).exp_m1() / den
    };
    let theta = r.powf(g1 - 2.0) * ratio;
    let theta_tilde = r.powf(g2 - 2.0) * ratio;
    Ok(Weights {
        theta,
        theta_tilde,
        tau: tau(g1, r).0,
    })
}

/// τ and τ'.
fn tau(g1: f64, r: f64) -> (f64, f64) {
    let l = -r.ln();
    if g1 < DEGENERATE_THRESHOLD {
        (l, -1.0 / r)
    } else {
        ((g1 * l).sinh() / g1, -(g1 * l).cosh() / r)
    }
}

#[derive(Debug, Clone, Copy)]
enum Kernel {
    Plus(f64),
    Minus(f64),
    Tau(f64),
}

impl Kernel {
    /// φ and φ'.
    fn phi(self, r: f64) -> (f64, f64) {
        match self {
            Kernel::Plus(g) => {
                let v = r.powf(g);
                (v, g * v / r)
            }
            Kernel::Minus(g) => {
                let v = r.powf(-g);
                (v, -g * v / r)
            }
            Kernel::Tau(g) => tau(g, r),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Part {
    kernel: Kernel,
    driven: bool,
    inner_from_zero: bool,
}

struct Layout {
    parts: [Part; 2],
    /// power used to scale both components for interpolation
    power: f64,
    dominant: usize,
    lead: f64,
}

fn layout(params: &ModeParams, which: Behavior) -> Result<Layout> {
    let (g1, g2) = (params.gamma1, params.gamma2);
    let part = |kernel, driven, inner_from_zero| Part {
        kernel,
        driven,
        inner_from_zero,
    };
    let missing = || {
        Err(Error::InvalidInput(format!(
            "{which:?} needs (γ1, γ2) = ({g1}, {g2}) in one of the two subdomains"
        )))
    };
    let out = match which {
        Behavior::Zero1 => Layout {
            parts: [part(Kernel::Plus(g1), false, true), part(Kernel::Plus(g2), true, true)],
            power: g2,
            dominant: 1,
            lead: 1.0,
        },
        Behavior::Zero3 => Layout {
            parts: [part(Kernel::Plus(g1), true, true), part(Kernel::Plus(g2), false, true)],
            power: g1,
            dominant: 0,
            lead: 1.0,
        },
        Behavior::Zero2 if params.in_d2 => Layout {
            parts: [part(Kernel::Plus(g1), false, true), part(Kernel::Minus(g2), true, false)],
            power: -g2,
            dominant: 1,
            lead: 1.0,
        },
        Behavior::Zero2 if params.in_d1 => Layout {
            parts: [part(Kernel::Minus(g1), false, false), part(Kernel::Minus(g2), true, false)],
            power: -g2,
            dominant: 1,
            lead: 1.0,
        },
        Behavior::Zero4 if params.in_d2 => Layout {
            parts: [part(Kernel::Tau(g1), true, true), part(Kernel::Minus(g2), false, true)],
            power: -g1,
            dominant: 0,
            lead: if g1 < DEGENERATE_THRESHOLD { 1.0 } else { 0.5 / g1 },
        },
        Behavior::Zero4 if params.in_d1 => Layout {
            parts: [part(Kernel::Minus(g1), true, false), part(Kernel::Minus(g2), false, false)],
            power: -g1,
            dominant: 0,
            lead: 1.0,
        },
        Behavior::Zero2 | Behavior::Zero4 => return missing(),
        _ => {
            return Err(Error::InvalidInput(format!("{which:?} is not a behavior at 0")));
        }
    };
    Ok(out)
}

/// The innermost panel width keeps `exp(λσ)` resolved by 16 nodes.
fn panel_width(params: &ModeParams) -> f64 {
    let rate = 2.0 * params.gamma2 + 2.0 * params.d + 2.0;
    (2.0 / rate).min(0.25)
}

/// `∫_{-∞}^{σ₀} g` assuming `g` is a pure exponential below the first panel.
fn lower_tail(grid: &PanelGrid, g: &[f64]) -> Result<f64> {
    let s = grid.nodes();
    let (g0, g1) = (g[0], g[ORDER - 1]);
    if g0 == 0.0 {
        return Ok(0.0);
    }
    let rate = (g1 / g0).ln() / (s[ORDER - 1] - s[0]);
    if g0.signum() != g1.signum() || !(rate > 0.05) {
        return Err(Error::QuadratureFailure(format!(
            "integrand is not decaying towards 0 (local exponent {rate:.3e})"
        )));
    }
    Ok(g0 / rate)
}

struct Disc {
    grid: PanelGrid,
    r: Vec<f64>,
    f2: Vec<f64>,
}

impl Disc {
    fn new(params: &ModeParams, p: &Profile, big_r: f64) -> Self {
        let grid = PanelGrid::uniform((INNER_FACTOR * big_r).ln(), big_r.ln(), panel_width(params), ORDER);
        let r: Vec<f64> = grid.nodes().iter().map(|s| s.exp()).collect();
        let f2 = r.iter().map(|&r| p.f_sq(r)).collect();
        Self { grid, r, f2 }
    }
}

/// One application of the integral operator to a single component.
fn apply(part: Part, disc: &Disc, force: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = disc.r.len();
    let phis: Vec<(f64, f64)> = disc.r.iter().map(|&r| part.kernel.phi(r)).collect();
    let g_in: Vec<f64> = (0..n)
        .map(|i| {
            let r = disc.r[i];
            r * phis[i].0 * force[i] * r
        })
        .collect();
    let inner: Vec<f64> = if part.inner_from_zero {
        let tail = lower_tail(&disc.grid, &g_in)?;
        disc.grid.cumulative_left(&g_in).into_iter().map(|v| v + tail).collect()
    } else {
        disc.grid.cumulative_right(&g_in).into_iter().map(|v| -v).collect()
    };
    let chi: Vec<f64> = (0..n).map(|i| 1.0 / (disc.r[i] * phis[i].0 * phis[i].0)).collect();
    let g_out: Vec<f64> = (0..n).map(|i| chi[i] * inner[i] * disc.r[i]).collect();
    let tail = lower_tail(&disc.grid, &g_out)?;
    let outer = disc.grid.cumulative_left(&g_out);
    let mut val = Vec::with_capacity(n);
    let mut der = Vec::with_capacity(n);
    for i in 0..n {
        let (phi, dphi) = phis[i];
        let o = outer[i] + tail;
        let (d0, d1) = if part.driven { (phi, dphi) } else { (0.0, 0.0) };
        val.push(d0 + phi * o);
        der.push(d1 + dphi * o + phi * chi[i] * inner[i]);
    }
    Ok((val, der))
}

/// Diagnostics of a converged iteration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PicardStats {
    pub radius: f64,
    pub iterations: usize,
    pub ratios: Vec<f64>,
    pub final_change: f64,
    /// sup of the pointwise relative residual of the system on the nodes
    pub residual: f64,
    pub halvings: usize,
    /// log-log slope of the dominant component over the innermost decade
    pub slope: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LocalBranch {
    pub branch: SolutionBranch,
    pub stats: PicardStats,
}

/// Starting iteration radius before any halving.
pub fn initial_radius(params: &ModeParams) -> f64 {
    (0.1 * (2.0 * params.d + 2.0) / (params.gamma2 + 1.0)).min(0.5)
}

struct Converged {
    a: Vec<f64>,
    ap: Vec<f64>,
    b: Vec<f64>,
    bp: Vec<f64>,
    iterations: usize,
    ratios: Vec<f64>,
    change: f64,
}

fn iterate(lay: &Layout, disc: &Disc, big_r: f64, tol: f64) -> Result<Converged> {
    let n = disc.r.len();
    let [pa, pb] = lay.parts;
    let drive = |part: Part, i: usize| {
        if part.driven {
            part.kernel.phi(disc.r[i]).0
        } else {
            0.0
        }
    };
    let weight: Vec<f64> = (0..n)
        .map(|i| lay.parts[lay.dominant].kernel.phi(disc.r[i]).0.abs())
        .collect();
    let mut a: Vec<f64> = (0..n).map(|i| drive(pa, i)).collect();
    let mut b: Vec<f64> = (0..n).map(|i| drive(pb, i)).collect();
    let mut ratios = Vec::new();
    let mut last = f64::NAN;
    for it in 1..=MAX_ITERATIONS {
        let fa: Vec<f64> = (0..n)
            .map(|i| disc.f2[i] * b[i] - (1.0 - 2.0 * disc.f2[i]) * a[i])
            .collect();
        let fb: Vec<f64> = (0..n)
            .map(|i| disc.f2[i] * a[i] - (1.0 - 2.0 * disc.f2[i]) * b[i])
            .collect();
        let (na, nap) = apply(pa, disc, &fa)?;
        let (nb, nbp) = apply(pb, disc, &fb)?;
        // each component against its own size; the floor covers zero crossings
        let rel = |new: f64, old: f64, w: f64| (new - old).abs() / new.abs().max(1e-6 * w);
        let change = (0..n)
            .map(|i| rel(na[i], a[i], weight[i]).max(rel(nb[i], b[i], weight[i])))
            .fold(0.0, f64::max);
        (a, b) = (na, nb);
        if it > 1 {
            ratios.push(change / last);
        }
        if !change.is_finite() {
            return Err(Error::NonContraction {
                radius: big_r,
                ratio: f64::INFINITY,
            });
        }
        if change < tol {
            return Ok(Converged {
                a,
                ap: nap,
                b,
                bp: nbp,
                iterations: it,
                ratios,
                change,
            });
        }
        if it >= 3 && ratios.last().is_some_and(|&q| q > 0.9) {
            return Err(Error::NonContraction {
                radius: big_r,
                ratio: *ratios.last().unwrap(),
            });
        }
        last = change;
    }
    Err(Error::NonContraction {
        radius: big_r,
        ratio: ratios.last().copied().unwrap_or(f64::NAN),
    })
}

/// Pointwise relative residual of the system on the iteration nodes.
fn node_residual(params: &ModeParams, disc: &Disc, c: &Converged) -> f64 {
    let dap = disc.grid.derivative(&c.ap);
    let dbp = disc.grid.derivative(&c.bp);
    let (g1s, g2s) = (params.gamma1.powi(2), params.gamma2.powi(2));
    let mut worst: f64 = 0.0;
    for i in 0..disc.r.len() {
        let (r, f2) = (disc.r[i], disc.f2[i]);
        let fa = f2 * c.b[i] - (1.0 - 2.0 * f2) * c.a[i];
        let fb = f2 * c.a[i] - (1.0 - 2.0 * f2) * c.b[i];
        let terms_a = [dap[i] / r, c.ap[i] / r, -g1s * c.a[i] / (r * r), -fa];
        let terms_b = [dbp[i] / r, c.bp[i] / r, -g2s * c.b[i] / (r * r), -fb];
        for t in [terms_a, terms_b] {
            let scale: f64 = t.iter().map(|v| v.abs()).sum();
            if scale > 0.0 {
                worst = worst.max(t.iter().sum::<f64>().abs() / scale);
            }
        }
    }
    worst
}

/// Geometric radii from `lo` by [`GRID_RATIO`], ending exactly at `hi`.
pub fn geometric_grid(lo: f64, hi: f64) -> Vec<f64> {
    let mut g = vec![lo];
    loop {
        let next = g.last().unwrap() * GRID_RATIO;
        if next >= hi * (1.0 - 1e-12) {
            break;
        }
        g.push(next);
    }
    g.push(hi);
    g
}

/// Builds one branch on `(0, R]` (halving `R` on failure) and continues it
/// by integration up to `r_out`.
pub fn picard_branch(
    params: &ModeParams,
    p: &Profile,
    which: Behavior,
    big_r: f64,
    r_out: f64,
    tol: f64,
) -> Result<LocalBranch> {
    params.require_domain()?;
    let lay = layout(params, which)?;
    if !(big_r > 0.0 && big_r <= 0.5) {
        return Err(Error::InvalidInput(format!("iteration radius {big_r} outside (0, 1/2]")));
    }
    let mut radius = big_r;
    let mut halvings = 0;
    let (disc, conv) = loop {
        let disc = Disc::new(params, p, radius);
        match iterate(&lay, &disc, radius, tol) {
            Ok(c) => break (disc, c),
            Err(e @ (Error::NonContraction { .. } | Error::QuadratureFailure(_))) => {
                if radius / 2.0 < RADIUS_FLOOR {
                    return Err(e);
                }
                radius /= 2.0;
                halvings += 1;
            }
            Err(e) => return Err(e),
        }
    };
    let residual = node_residual(params, &disc, &conv);

    let inner = geometric_grid(INNER_FACTOR * radius, radius);
    let pw = lay.power;
    let scaled = |v: &[f64], shift: f64| -> Vec<f64> {
        v.iter().zip(&disc.r).map(|(v, r)| v * r.powf(shift - pw)).collect()
    };
    let sa = scaled(&conv.a, 0.0);
    let sb = scaled(&conv.b, 0.0);
    let sap = scaled(&conv.ap, 1.0);
    let sbp = scaled(&conv.bp, 1.0);
    let mut grid = Vec::new();
    let (mut a, mut ap, mut b, mut bp) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for &r in &inner {
        let s = r.ln().clamp(disc.grid.left(), disc.grid.right());
        let up = r.powf(pw);
        grid.push(r);
        a.push(disc.grid.interpolate(&sa, s) * up);
        b.push(disc.grid.interpolate(&sb, s) * up);
        ap.push(disc.grid.interpolate(&sap, s) * up / r);
        bp.push(disc.grid.interpolate(&sbp, s) * up / r);
    }

    let comp = if lay.dominant == 0 { &a } else { &b };
    let k = inner.iter().position(|&r| r >= 10.0 * inner[0]).unwrap_or(inner.len() - 1);
    let slope = (comp[k].abs() / comp[0].abs()).ln() / (inner[k] / inner[0]).ln();

    if r_out > radius {
        let last = grid.len() - 1;
        let x0 = [a[last], radius * ap[last], b[last], radius * bp[last]];
        let outer: Vec<f64> = geometric_grid(radius, r_out)[1..].to_vec();
        let states = propagate_to_points(params, p, x0, radius, &outer, tol.max(1e-14))?;
        for (r, x) in outer.into_iter().zip(states) {
            grid.push(r);
            a.push(x[0]);
            ap.push(x[1] / r);
            b.push(x[2]);
            bp.push(x[3] / r);
        }
    }
    let len = grid.len();
    Ok(LocalBranch {
        branch: SolutionBranch {
            params: *params,
            behavior: which,
            grid,
            a,
            a_prime: ap,
            b,
            b_prime: bp,
            log_scale: vec![0.0; len],
            lead_coeff: lay.lead,
        },
        stats: PicardStats {
            radius,
            iterations: conv.iterations,
            ratios: conv.ratios,
            final_change: conv.change,
            residual,
            halvings,
            slope,
        },
    })
}

/// Determinant of the zero-side frame `(Zero1, Zero2, Zero3, Zero4)` implied
/// by the normalisations above.
pub fn expected_zero_wronskian(params: &ModeParams) -> f64 {
    if params.in_d2 {
        2.0 * params.gamma2
    } else {
        4.0 * params.gamma1 * params.gamma2
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ZeroBasis {
    pub branches: Vec<LocalBranch>,
    /// frame determinants at the radii in `wronskian_radii`
    pub wronskians: Vec<f64>,
    pub wronskian_radii: Vec<f64>,
    pub expected_wronskian: f64,
}

impl ZeroBasis {
    pub fn branch(&self, which: Behavior) -> &SolutionBranch {
        &self
            .branches
            .iter()
            .find(|b| b.branch.behavior == which)
            .expect("zero basis holds all four behaviors")
            .branch
    }

    /// Frame `(X₁, X₂, X₃, X₄)` at `r`.
    pub fn frame(&self, p: &Profile, r: f64, rtol: f64) -> Result<[[f64; 4]; 4]> {
        let mut cols = [[0.0; 4]; 4];
        for (c, lb) in cols.iter_mut().zip(&self.branches) {
            *c = lb.branch.state_at(p, r, rtol)?;
        }
        Ok(cols)
    }
}

/// All four canonical solutions at 0, continued to `r_out`, with the frame
/// determinant checked at the smallest iteration radius and at three times
/// that. Further out the large multiple of Zero1 inside Zero2 (a consequence
/// of the lower limit `R`) costs digits to cancellation.
pub fn zero_basis(
    params: &ModeParams,
    p: &Profile,
    big_r: Option<f64>,
    r_out: f64,
    tol: f64,
    mode: Mode,
) -> Result<ZeroBasis> {
    let big_r = big_r.unwrap_or_else(|| initial_radius(params));
    let built = par::map(mode, &Behavior::ZERO, |&w| picard_branch(params, p, w, big_r, r_out, tol));
    let branches = built.into_iter().collect::<Result<Vec<_>>>()?;
    let r_in = branches.iter().map(|b| b.stats.radius).fold(f64::INFINITY, f64::min);
    let mut basis = ZeroBasis {
        branches,
        wronskians: Vec::new(),
        wronskian_radii: Vec::new(),
        expected_wronskian: expected_zero_wronskian(params),
    };
    let rtol = tol.max(1e-14);
    for r in [r_in, (3.0 * r_in).min(r_out).max(r_in)] {
        let cols = basis.frame(p, r, rtol)?;
        let w = frame_det(&cols);
        let norms: f64 = cols
            .iter()
            .map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt())
            .product();
        if !(w.abs() > 1e-10 * norms) {
            return Err(Error::DegenerateBasis { wronskian: w });
        }
        basis.wronskians.push(w);
        basis.wronskian_radii.push(r);
    }
    Ok(basis)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tau_branches() {
        let p = ModeParams::new(1.0, 0.0, 2.0).unwrap();
        let w = special_weights(&p, 0.3).unwrap();
        assert!((w.tau + 0.3f64.ln()).abs() < 1e-15);
        let q = ModeParams::new(1.0, 1.0, 2.5).unwrap();
        assert!(special_weights(&q, 0.999_999_999).unwrap().tau.abs() < 1e-8);
        let (t, dt) = tau(0.2, 0.4);
        let h = 1e-6;
        let num = (tau(0.2, 0.4 + h).0 - tau(0.2, 0.4 - h).0) / (2.0 * h);
        assert!((dt - num).abs() < 1e-8);
        assert!((t - (0.4f64.powf(-0.2) - 0.4f64.powf(0.2)) / 0.4).abs() < 1e-14);
    }

    #[test]
    fn degenerate_theta_is_logarithmic() {
        // γ₁ + γ₂ = 2d + 2
        let p = ModeParams::new(1.0, 1.0, 3.0).unwrap();
        let r = (-1.0f64).exp();
        let w = special_weights(&p, r).unwrap();
        assert!((w.theta - (-(1.0 - 2.0f64)).exp()).abs() < 1e-13);
        let near = ModeParams::new(1.0, 1.0, 3.0 + 1e-6).unwrap();
        let wn = special_weights(&near, r).unwrap();
        assert!((wn.theta - w.theta).abs() < 1e-5);
    }

    #[test]
    fn geometric_grid_ends_exactly() {
        let g = geometric_grid(1e-3, 0.2);
        assert_eq!(*g.last().unwrap(), 0.2);
        assert!(g.windows(2).all(|w| w[1] / w[0] <= GRID_RATIO * (1.0 + 1e-12)));
    }
}
