//! First eigenvalues of the weighted radial problems on (0, 1]:
//! `m_{γ₁,γ₂}(ε)` for the coupled pair and `m₀(ε)` for the scalar problem,
//! together with the test-function bound `1 - C_n`.
//!
//! Continuous piecewise-linear elements on a mesh graded toward 0; the
//! generalized eigenproblem `A x = m B x` is solved by shifted inverse
//! iteration with banded LDLᵀ factorizations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::ModeParams;
use crate::profile::Profile;
use crate::quad::{GaussRule, PanelGrid};

/// Nodes `0 = r₀ < r₁ < … < r_K = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mesh(Vec<f64>);

impl Mesh {
    /// `r_k = (k/K)^β`.
    pub fn graded(elements: usize, beta: f64) -> Result<Self> {
        if elements < 4 || !(beta >= 1.0) {
            return Err(Error::InvalidInput(format!(
                "graded mesh needs at least 4 elements and β >= 1 (got {elements}, {beta})"
            )));
        }
        let k = elements as f64;
        Ok(Self((0..=elements).map(|i| (i as f64 / k).powf(beta)).collect()))
    }

    /// Grading `β = max(2, 2/max(γ₁, 1/2))`, with a node count that keeps
    /// about `density` elements per unit of `r/ε` near `r = ε`.
    pub fn adapted(gamma1: f64, epsilon: f64, density: usize) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(Error::InvalidInput(format!("ε must lie in (0, 1] (got {epsilon})")));
        }
        let beta = grading(gamma1);
        let k = (density as f64 * beta * epsilon.powf(-1.0 / beta)).ceil() as usize;
        Self::graded(k.max(16), beta)
    }

    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        let ok = nodes.len() >= 5
            && nodes[0] == 0.0
            && *nodes.last().unwrap() == 1.0
            && nodes.windows(2).all(|w| w[1] > w[0]);
        if !ok {
            return Err(Error::InvalidInput("mesh must increase strictly from 0 to 1".into()));
        }
        Ok(Self(nodes))
    }

    /// Every element split in two.
    pub fn refined(&self) -> Self {
        let mut out = Vec::with_capacity(2 * self.0.len());
        for w in self.0.windows(2) {
            out.push(w[0]);
            out.push(0.5 * (w[0] + w[1]));
        }
        out.push(1.0);
        Self(out)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.0
    }

    pub fn elements(&self) -> usize {
        self.0.len() - 1
    }
}

pub fn grading(gamma1: f64) -> f64 {
    (2.0 / gamma1.max(0.5)).max(2.0)
}

/// Which quotient is minimized.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Problem {
    /// `m_{γ₁,γ₂}(ε)` for the pair `(a, b)`.
    Pair(ModeParams),
    /// `m₀(ε)` for a single component with weight `d²/r`.
    Scalar { d: f64 },
}

impl Problem {
    pub fn d(&self) -> f64 {
        match self {
            Problem::Pair(p) => p.d,
            Problem::Scalar { d } => *d,
        }
    }

    fn components(&self) -> usize {
        match self {
            Problem::Pair(_) => 2,
            Problem::Scalar { .. } => 1,
        }
    }

    fn gammas(&self) -> [f64; 2] {
        match self {
            Problem::Pair(p) => [p.gamma1, p.gamma2],
            Problem::Scalar { d } => [*d, 0.0],
        }
    }
}

/// Symmetric band matrix, lower part stored row by row:
/// `v[i·(p+1) + k] = A[i][i-k]`.
#[derive(Debug, Clone)]
pub struct Band {
    n: usize,
    p: usize,
    v: Vec<f64>,
}

impl Band {
    fn zeros(n: usize, p: usize) -> Self {
        Self {
            n,
            p,
            v: vec![0.0; n * (p + 1)],
        }
    }

    fn add(&mut self, i: usize, j: usize, x: f64) {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        debug_assert!(i - j <= self.p);
        self.v[i * (self.p + 1) + (i - j)] += x;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        if i - j > self.p {
            0.0
        } else {
            self.v[i * (self.p + 1) + (i - j)]
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            let row = &self.v[i * (self.p + 1)..(i + 1) * (self.p + 1)];
            y[i] += row[0] * x[i];
            for k in 1..=self.p.min(i) {
                y[i] += row[k] * x[i - k];
                y[i - k] += row[k] * x[i];
            }
        }
        y
    }

    pub fn form(&self, x: &[f64]) -> f64 {
        dot(x, &self.mul(x))
    }

    /// LDLᵀ of `self - σ·other`; fails unless the shifted matrix is positive definite.
    fn factor_shifted(&self, other: &Band, sigma: f64) -> Option<Ldl> {
        let (n, p) = (self.n, self.p);
        let w = p + 1;
        let mut l = vec![0.0; n * w];
        let mut dg = vec![0.0; n];
        for i in 0..n {
            let lo = i.saturating_sub(p);
            for j in lo..=i {
                let mut s = self.v[i * w + (i - j)] - sigma * other.v[i * w + (i - j)];
                for k in lo.max(j.saturating_sub(p))..j {
                    s -= l[i * w + (i - k)] * l[j * w + (j - k)] * dg[k];
                }
                if j < i {
                    l[i * w + (i - j)] = s / dg[j];
                } else if s > 0.0 && s.is_finite() {
                    dg[i] = s;
                } else {
                    return None;
                }
            }
        }
        Some(Ldl { n, p, l, dg })
    }
}

struct Ldl {
    n: usize,
    p: usize,
    l: Vec<f64>,
    dg: Vec<f64>,
}

impl Ldl {
    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let w = self.p + 1;
        let mut y = rhs.to_vec();
        for i in 0..self.n {
            for k in i.saturating_sub(self.p)..i {
                y[i] -= self.l[i * w + (i - k)] * y[k];
            }
        }
        for i in 0..self.n {
            y[i] /= self.dg[i];
        }
        for i in (0..self.n).rev() {
            for k in i + 1..(i + self.p + 1).min(self.n) {
                y[i] -= self.l[k * w + (k - i)] * y[k];
            }
        }
        y
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `∫_p^q φ_i φ_j / r` for the two hat functions of `[p, q]`.
fn inv_r_local(p: f64, q: f64) -> [[f64; 2]; 2] {
    let h = q - p;
    if p == 0.0 {
        // only the right hat is finite here; the left entry is never used
        return [[f64::INFINITY, 0.5], [0.5, 0.5]];
    }
    if h < 0.2 * p {
        let g = GaussRule::new(10);
        let ll = g.integrate(p, q, |r| (q - r) * (q - r) / r) / (h * h);
        let lr = g.integrate(p, q, |r| (q - r) * (r - p) / r) / (h * h);
        let rr = g.integrate(p, q, |r| (r - p) * (r - p) / r) / (h * h);
        return [[ll, lr], [lr, rr]];
    }
    let lg = (q / p).ln();
    let half = 0.5 * (q * q - p * p);
    let ll = (q * q * lg - 2.0 * q * h + half) / (h * h);
    let lr = (-half + (p + q) * h - p * q * lg) / (h * h);
    let rr = (half - 2.0 * p * h + p * p * lg) / (h * h);
    [[ll, lr], [lr, rr]]
}

/// Assembled pencil for one `(problem, ε, mesh)`.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub problem: Problem,
    pub epsilon: f64,
    pub mesh: Mesh,
    /// Degree of freedom of each component at each node, if free.
    dofs: Vec<[Option<usize>; 2]>,
    pub a: Band,
    pub b: Band,
}

/// Builds the numerator form `A` and the weighted mass `B`.
pub fn assemble(problem: Problem, p: &Profile, epsilon: f64, mesh: &Mesh) -> Result<Discretization> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidInput(format!("ε must be positive (got {epsilon})")));
    }
    if (problem.d() - p.d).abs() > 1e-12 {
        return Err(Error::InvalidInput(format!(
            "profile degree {} does not match the problem's d = {}",
            p.d,
            problem.d()
        )));
    }
    let r = mesh.nodes();
    // the 1/r weights need nodes well inside the vortex core
    if r[1] > 1e-2 * epsilon {
        return Err(Error::GridTooCoarse(format!(
            "first node {:.3e} is not below ε/100 = {:.3e}",
            r[1],
            1e-2 * epsilon
        )));
    }
    let comps = problem.components();
    let gam = problem.gammas();
    let mut dofs = Vec::with_capacity(r.len());
    let mut next = 0;
    for k in 0..r.len() {
        let mut slot = [None, None];
        for (c, s) in slot.iter_mut().enumerate().take(comps) {
            let free = k + 1 < r.len() && (k > 0 || gam[c] == 0.0);
            if free {
                *s = Some(next);
                next += 1;
            }
        }
        dofs.push(slot);
    }
    let n = next;
    let band = 2 * comps - 1;
    let mut a = Band::zeros(n, band);
    let mut b = Band::zeros(n, band);
    let gauss = GaussRule::new(6);
    let e2 = epsilon * epsilon;
    for e in 0..mesh.elements() {
        let (lo, hi) = (r[e], r[e + 1]);
        let h = hi - lo;
        let stiff = 0.5 * (lo + hi) / h;
        let inv = inv_r_local(lo, hi);
        let mut coupling = [[0.0; 2]; 2];
        let mut mass = [[0.0; 2]; 2];
        for (&x, &w) in gauss.x.iter().zip(&gauss.w) {
            let s = lo + 0.5 * h * (x + 1.0);
            let phi = [(hi - s) / h, (s - lo) / h];
            let f2 = p.f_sq(s / epsilon);
            let g2 = p.one_minus_f_sq(s / epsilon);
            for i in 0..2 {
                for j in 0..2 {
                    let base = 0.5 * h * w * s * phi[i] * phi[j] / e2;
                    coupling[i][j] += base * f2;
                    mass[i][j] += base * g2;
                }
            }
        }
        let nodes = [e, e + 1];
        for i in 0..2 {
            for j in 0..2 {
                let sgn = if i == j { 1.0 } else { -1.0 };
                for c in 0..comps {
                    let (Some(di), Some(dj)) = (dofs[nodes[i]][c], dofs[nodes[j]][c]) else {
                        continue;
                    };
                    if di < dj {
                        continue;
                    }
                    let mut v = sgn * stiff;
                    if gam[c] != 0.0 {
                        v += gam[c] * gam[c] * inv[i][j];
                    }
                    if let Problem::Pair(_) = problem {
                        v += coupling[i][j];
                    }
                    a.add(di, dj, v);
                    b.add(di, dj, mass[i][j]);
                }
                if let Problem::Pair(_) = problem {
                    // the (a+b)² term couples the two components
                    if let (Some(di), Some(dj)) = (dofs[nodes[i]][0], dofs[nodes[j]][1]) {
                        a.add(di, dj, coupling[i][j]);
                    }
                }
            }
        }
    }
    Ok(Discretization {
        problem,
        epsilon,
        mesh: mesh.clone(),
        dofs,
        a,
        b,
    })
}

impl Discretization {
    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    /// Packs nodal values; pinned entries are ignored.
    pub fn pack(&self, va: &[f64], vb: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.dim()];
        for (k, slot) in self.dofs.iter().enumerate() {
            if let Some(i) = slot[0] {
                x[i] = va[k];
            }
            if let Some(i) = slot[1] {
                x[i] = vb[k];
            }
        }
        x
    }

    /// Nodal values of both components (the second is zero for the scalar problem).
    pub fn unpack(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let m = self.dofs.len();
        let (mut va, mut vb) = (vec![0.0; m], vec![0.0; m]);
        for (k, slot) in self.dofs.iter().enumerate() {
            if let Some(i) = slot[0] {
                va[k] = x[i];
            }
            if let Some(i) = slot[1] {
                vb[k] = x[i];
            }
        }
        (va, vb)
    }

    pub fn quotient(&self, x: &[f64]) -> f64 {
        self.a.form(x) / self.b.form(x)
    }

    /// Quotient of nodal values, the discrete counterpart of the variational ratio.
    pub fn nodal_quotient(&self, va: &[f64], vb: &[f64]) -> f64 {
        self.quotient(&self.pack(va, vb))
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EigenOptions {
    /// Stop when the B-normalized iterate moves less than this.
    pub tol: f64,
    pub max_iter: usize,
    /// Iteration cap of the deflated run that estimates the second eigenvalue.
    pub gap_iter: usize,
    /// Elements per unit of `r/ε` near `r = ε` for [`Mesh::adapted`].
    pub density: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 400,
            gap_iter: 60,
            density: 400,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EigenResult {
    pub problem: Problem,
    pub epsilon: f64,
    pub m: f64,
    /// Upper estimate of the second eigenvalue from a deflated run.
    pub m2: f64,
    pub gap: f64,
    /// Gap below `10⁻⁸·m`; reported, not fatal.
    pub near_degenerate: bool,
    pub mesh: Vec<f64>,
    pub vec_a: Vec<f64>,
    pub vec_b: Vec<f64>,
    /// `|quotient(vec) - m|` with `m` from the inverse-iteration ratio.
    pub rayleigh_residual: f64,
    pub iterations: usize,
}

impl EigenResult {
    /// Largest violation of `a ≥ -b ≥ 0` (scalar problem: of `a ≥ 0`),
    /// relative to `max |a|`.
    pub fn sign_violation(&self) -> f64 {
        let scale = self.vec_a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut worst = 0.0f64;
        for (&a, &b) in self.vec_a.iter().zip(&self.vec_b) {
            worst = worst.max(-(a + b)).max(b).max(-a);
        }
        worst / scale
    }

    /// Sup distance on `[0, reach]` between the rescaled first component
    /// `a(ε s)` and `target(s)`, after a least-squares amplitude fit.
    pub fn rescaled_distance(&self, target: impl Fn(f64) -> f64, reach: f64) -> f64 {
        let pts: Vec<(f64, f64)> = self
            .mesh
            .iter()
            .zip(&self.vec_a)
            .map(|(&r, &a)| (r / self.epsilon, a))
            .filter(|(s, _)| *s <= reach)
            .map(|(s, a)| (a, target(s)))
            .collect();
        let num: f64 = pts.iter().map(|(a, t)| a * t).sum();
        let den: f64 = pts.iter().map(|(a, _)| a * a).sum();
        let c = num / den;
        let top = pts.iter().fold(0.0f64, |m, (_, t)| m.max(t.abs()));
        pts.iter().fold(0.0f64, |m, (a, t)| m.max((c * a - t).abs())) / top
    }
}

/// Smallest eigenvalue of the pencil by shifted inverse iteration.
pub fn smallest_eig(disc: &Discretization, opts: &EigenOptions) -> Result<EigenResult> {
    let n = disc.dim();
    let r = disc.mesh.nodes();
    // positive a, negative b: already the expected sign pattern
    let va: Vec<f64> = r.iter().map(|&s| s * (1.0 - s) + 1e-3).collect();
    let vb: Vec<f64> = va.iter().map(|v| -0.5 * v).collect();
    let mut x = disc.pack(&va, &vb);
    normalize(&disc.b, &mut x);

    let mut sigma = 0.0;
    let mut fac = factor(disc, &mut sigma)?;
    let mut rq = disc.quotient(&x);
    let mut ratio_m = rq;
    let mut iterations = 0;
    let mut converged = false;
    for it in 1..=opts.max_iter {
        iterations = it;
        let bx = disc.b.mul(&x);
        let mut y = fac.solve(&bx);
        ratio_m = sigma + 1.0 / dot(&bx, &y);
        normalize(&disc.b, &mut y);
        let diff: Vec<f64> = y.iter().zip(&x).map(|(a, b)| a - b).collect();
        let change = disc.b.form(&diff).sqrt();
        x = y;
        let next = disc.quotient(&x);
        let step = (next - rq).abs();
        rq = next;
        if change < opts.tol {
            converged = true;
            break;
        }
        if sigma == 0.0 && it >= 3 && step < 1e-3 * rq {
            // the quotient overestimates m, so a 5% margin keeps A - σB definite
            sigma = 0.95 * rq;
            fac = factor(disc, &mut sigma)?;
        }
    }
    if !converged {
        return Err(Error::NoConvergence {
            iterations,
            change: (rq - ratio_m).abs(),
        });
    }

    // deflated run for the gap
    let mut z: Vec<f64> = (0..n).map(|i| ((i as f64) * 0.7548776662).fract() - 0.5).collect();
    let bx = disc.b.mul(&x);
    let deflate = |z: &mut Vec<f64>| {
        let c = dot(z, &bx);
        for (zi, xi) in z.iter_mut().zip(&x) {
            *zi -= c * xi;
        }
    };
    deflate(&mut z);
    normalize(&disc.b, &mut z);
    let mut m2 = disc.quotient(&z);
    for _ in 0..opts.gap_iter {
        let mut y = fac.solve(&disc.b.mul(&z));
        deflate(&mut y);
        normalize(&disc.b, &mut y);
        z = y;
        let next = disc.quotient(&z);
        let done = (next - m2).abs() < 1e-10 * next;
        m2 = next;
        if done {
            break;
        }
    }

    let (mut vec_a, mut vec_b) = disc.unpack(&x);
    let peak = vec_a
        .iter()
        .copied()
        .fold(0.0f64, |m, v| if v.abs() > m.abs() { v } else { m });
    if peak < 0.0 {
        vec_a.iter_mut().for_each(|v| *v = -*v);
        vec_b.iter_mut().for_each(|v| *v = -*v);
    }
    let gap = m2 - rq;
    Ok(EigenResult {
        problem: disc.problem,
        epsilon: disc.epsilon,
        m: rq,
        m2,
        gap,
        near_degenerate: gap < 1e-8 * rq,
        mesh: r.to_vec(),
        vec_a,
        vec_b,
        rayleigh_residual: (rq - ratio_m).abs(),
        iterations,
    })
}

fn normalize(b: &Band, x: &mut [f64]) {
    let s = b.form(x).sqrt();
    x.iter_mut().for_each(|v| *v /= s);
}

fn factor(disc: &Discretization, sigma: &mut f64) -> Result<Ldl> {
    for _ in 0..40 {
        if let Some(f) = disc.a.factor_shifted(&disc.b, *sigma) {
            return Ok(f);
        }
        if *sigma == 0.0 {
            break;
        }
        *sigma *= 0.5;
    }
    Err(Error::InvalidInput("numerator form is not positive definite".into()))
}

/// `m_{γ₁,γ₂}(ε)` on the given mesh, or on [`Mesh::adapted`] when `None`.
pub fn m_pair(params: &ModeParams, p: &Profile, epsilon: f64, mesh: Option<&Mesh>, opts: &EigenOptions) -> Result<EigenResult> {
    let own;
    let mesh = match mesh {
        Some(m) => m,
        None => {
            own = Mesh::adapted(params.gamma1, epsilon, opts.density)?;
            &own
        }
    };
    smallest_eig(&assemble(Problem::Pair(*params), p, epsilon, mesh)?, opts)
}

/// `m₀(ε)`, the scalar problem with weight `d²/r`.
pub fn m0(d: f64, p: &Profile, epsilon: f64, mesh: Option<&Mesh>, opts: &EigenOptions) -> Result<EigenResult> {
    let own;
    let mesh = match mesh {
        Some(m) => m,
        None => {
            own = Mesh::adapted(d, epsilon, opts.density)?;
            &own
        }
    };
    smallest_eig(&assemble(Problem::Scalar { d }, p, epsilon, mesh)?, opts)
}

/// `H(τ) = (γ₁²-d²)/r + (γ₂²-d²)τ²/r + r f²(1+τ)²`.
pub fn lin_h(params: &ModeParams, f: f64, r: f64, tau: f64) -> f64 {
    let d2 = params.d * params.d;
    (params.gamma1 * params.gamma1 - d2) / r
        + (params.gamma2 * params.gamma2 - d2) / r * tau * tau
        + r * f * f * (1.0 + tau) * (1.0 + tau)
}

/// Minimizer `τ₀(r)` of `H` and the minimum `H(τ₀)`.
pub fn lin_trick_eval(params: &ModeParams, p: &Profile, r: f64) -> Result<(f64, f64)> {
    let d2 = params.d * params.d;
    let c = (params.gamma2 * params.gamma2 - d2) / r;
    if !(c > 0.0) || !(r > 0.0) {
        return Err(Error::InvalidInput(format!("need γ₂² > d² and r > 0 (got r = {r})")));
    }
    let w = r * p.f_sq(r);
    let tau0 = -w / (c + w);
    let f = p.value(r);
    Ok((tau0, lin_h(params, f, r, tau0)))
}

/// The test pair `a = (x+y)/2`, `b = (x-y)/2` with `x = f'/r^{n-1}`,
/// `y = d f/r^n`: values and first two derivatives.
fn test_pair(d: f64, n: f64, p: &Profile, r: f64) -> ([f64; 3], [f64; 3]) {
    let (f, f1) = p.eval(r);
    let f2 = p.second_derivative(r, f, f1);
    let d2 = d * d;
    let f3 = -f2 / r + f1 / (r * r) + d2 * f1 / (r * r) - 2.0 * d2 * f / (r * r * r) - f1 + 3.0 * f * f * f1;
    let (m1, m0, mm1, mm2) = (r.powf(1.0 - n), r.powf(-n), r.powf(-n - 1.0), r.powf(-n - 2.0));
    let x = [
        f1 * m1,
        f2 * m1 + (1.0 - n) * f1 * m0,
        f3 * m1 + 2.0 * (1.0 - n) * f2 * m0 - n * (1.0 - n) * f1 * mm1,
    ];
    let y = [
        d * f * m0,
        d * (f1 * m0 - n * f * mm1),
        d * (f2 * m0 - 2.0 * n * f1 * mm1 + n * (n + 1.0) * f * mm2),
    ];
    (
        [0.5 * (x[0] + y[0]), 0.5 * (x[1] + y[1]), 0.5 * (x[2] + y[2])],
        [0.5 * (x[0] - y[0]), 0.5 * (x[1] - y[1]), 0.5 * (x[2] - y[2])],
    )
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TestFunctionBound {
    pub d: f64,
    pub n: f64,
    pub c_n: f64,
    /// `1 - C_n`
    pub bound: f64,
    /// The energy quotient of the test pair; equals `1 - C_n` when finite (n < d).
    pub energy_quotient: Option<f64>,
    /// Relative size of the truncation tails.
    pub tail: f64,
    /// Weighted sup residual of the inhomogeneous system satisfied by the pair.
    pub syst_residual: f64,
}

const LOWER_CUT: f64 = 1e-4;

/// `∫_{lo}^{hi} g(r) dr` in the variable `ln r`, with power-law tails at both
/// ends; returns the value and the tail estimate.
fn log_integral(g: impl Fn(f64) -> f64, lo: f64, hi: f64) -> (f64, f64) {
    let grid = PanelGrid::uniform(lo.ln(), hi.ln(), 0.1, 12);
    let vals: Vec<f64> = grid.nodes().iter().map(|&t| t.exp() * g(t.exp())).collect();
    let body = grid.integral(&vals);
    let k = vals.len();
    let t = grid.nodes();
    let slope = |i: usize, j: usize| (vals[j] / vals[i]).ln() / (t[j] - t[i]);
    let mut tails = 0.0;
    // G(t) ~ e^{q t} toward -∞ and e^{-q t} toward +∞
    let q_lo = slope(0, 12);
    if vals[0] != 0.0 && q_lo > 0.0 {
        tails += vals[0] / q_lo;
    } else if vals[0] != 0.0 {
        tails += f64::INFINITY;
    }
    let q_hi = -slope(k - 13, k - 1);
    if vals[k - 1] != 0.0 && q_hi > 0.0 {
        tails += vals[k - 1] / q_hi;
    } else if vals[k - 1] != 0.0 {
        tails += f64::INFINITY;
    }
    (body + tails, tails.abs())
}

/// `C_n` and the quotient `1 - C_n` of the explicit test pair, integrated
/// over `(0, r_max]` with tail corrections.
pub fn test_function_bound(d: f64, n: f64, p: &Profile, r_max: f64) -> Result<TestFunctionBound> {
    if !(d >= 1.0 && n > 1.0 && n < d + 1.0) {
        return Err(Error::InvalidInput(format!("need d >= 1 and 1 < n < d+1 (got d={d}, n={n})")));
    }
    if (p.d - d).abs() > 1e-12 {
        return Err(Error::InvalidInput(format!("profile degree {} does not match d = {d}", p.d)));
    }
    let (g1, g2) = ((n - d).abs(), n + d);
    let drive = |r: f64| (n - 1.0) * r.powf(1.0 - n) * p.value(r) * p.one_minus_f_sq(r);
    let (num, num_tail) = log_integral(
        |r| {
            let (a, b) = test_pair(d, n, p, r);
            drive(r) * (a[0] + b[0])
        },
        LOWER_CUT,
        r_max,
    );
    let (den, den_tail) = log_integral(
        |r| {
            let (a, b) = test_pair(d, n, p, r);
            r * p.one_minus_f_sq(r) * (a[0] * a[0] + b[0] * b[0])
        },
        LOWER_CUT,
        r_max,
    );
    let tail = (num_tail / num.abs()).max(den_tail / den.abs());
    let c_n = num / den;
    if !(tail <= 1e-2) {
        return Err(Error::TailTooLarge {
            tail: tail * c_n.abs(),
            value: c_n,
        });
    }
    let energy_quotient = (n < d).then(|| {
        let (e, _) = log_integral(
            |r| {
                let (a, b) = test_pair(d, n, p, r);
                let f2 = p.f_sq(r);
                r * a[1] * a[1]
                    + r * b[1] * b[1]
                    + g1 * g1 * a[0] * a[0] / r
                    + g2 * g2 * b[0] * b[0] / r
                    + r * f2 * (a[0] + b[0]) * (a[0] + b[0])
            },
            LOWER_CUT,
            r_max,
        );
        e / den
    });

    // -(r a')' + γ₁² a/r + r f² b - r(1-2f²) a = -(n-1) r^{1-n} f (1-f²), same for b
    let mut syst_residual = 0.0f64;
    let mut r = 1e-3;
    while r <= r_max.min(60.0) {
        let (a, b) = test_pair(d, n, p, r);
        let f2 = p.f_sq(r);
        let rhs = -drive(r);
        for (u, v, g) in [(a, b, g1), (b, a, g2)] {
            let terms = [-u[1], -r * u[2], g * g * u[0] / r, r * f2 * v[0], -r * (1.0 - 2.0 * f2) * u[0], -rhs];
            let scale: f64 = terms.iter().map(|t| t.abs()).sum();
            let res: f64 = terms.iter().sum();
            syst_residual = syst_residual.max(res.abs() / scale);
        }
        r *= 1.05;
    }
    Ok(TestFunctionBound {
        d,
        n,
        c_n,
        bound: 1.0 - c_n,
        energy_quotient,
        tail,
        syst_residual,
    })
}

/// The §6-style admissible pair on the mesh: the test pair at `r/ε` on
/// `[0, N]`, tapered by `(1-r)²/(1-N)²` on `[N, 1]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CutoffPair {
    pub epsilon: f64,
    pub cut: f64,
    pub vec_a: Vec<f64>,
    pub vec_b: Vec<f64>,
    pub quotient: f64,
}

pub fn cutoff_family(disc: &Discretization, p: &Profile, n: f64, cut: f64) -> Result<CutoffPair> {
    let Problem::Pair(params) = disc.problem else {
        return Err(Error::InvalidInput("the cutoff family needs the paired problem".into()));
    };
    let d = params.d;
    if !(cut > 0.0 && cut < 1.0) {
        return Err(Error::InvalidInput(format!("cutoff N must lie in (0, 1) (got {cut})")));
    }
    if !(n > 1.0 && n < d) {
        return Err(Error::InvalidInput(format!(
            "the test pair has finite energy only for 1 < n < d (got n={n}, d={d})"
        )));
    }
    let eps = disc.epsilon;
    let (mut va, mut vb) = (Vec::new(), Vec::new());
    for &r in disc.mesh.nodes() {
        if r == 0.0 || r == 1.0 {
            va.push(0.0);
            vb.push(0.0);
            continue;
        }
        let (a, b) = test_pair(d, n, p, r / eps);
        let taper = if r <= cut { 1.0 } else { ((1.0 - r) / (1.0 - cut)).powi(2) };
        va.push(a[0] * taper);
        vb.push(b[0] * taper);
    }
    let quotient = disc.nodal_quotient(&va, &vb);
    Ok(CutoffPair {
        epsilon: eps,
        cut,
        vec_a: va,
        vec_b: vb,
        quotient,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn band_factor_solves() {
        let mut a = Band::zeros(6, 2);
        let mut b = Band::zeros(6, 2);
        for i in 0..6 {
            a.add(i, i, 4.0 + i as f64);
            b.add(i, i, 1.0);
            if i >= 1 {
                a.add(i, i - 1, -1.0);
            }
            if i >= 2 {
                a.add(i, i - 2, 0.5);
            }
        }
        let x: Vec<f64> = (0..6).map(|i| (i as f64).sin() + 1.0).collect();
        let rhs = a.mul(&x);
        let back = a.factor_shifted(&b, 0.0).unwrap().solve(&rhs);
        for (u, v) in back.iter().zip(&x) {
            assert!((u - v).abs() < 1e-13);
        }
        assert!(a.factor_shifted(&b, 100.0).is_none());
    }

    #[test]
    fn inverse_r_entries_match_quadrature() {
        for (p, q) in [(0.1, 0.3), (1.0, 1.05), (2.0, 2.0001)] {
            let m = inv_r_local(p, q);
            let h = q - p;
            let g = GaussRule::new(30);
            let ll = g.integrate(p, q, |r| (q - r) * (q - r) / r) / (h * h);
            let lr = g.integrate(p, q, |r| (q - r) * (r - p) / r) / (h * h);
            assert!((m[0][0] - ll).abs() < 1e-11 * ll);
            assert!((m[0][1] - lr).abs() < 1e-11 * lr);
        }
    }

    #[test]
    fn refined_mesh_interleaves() {
        let m = Mesh::graded(8, 2.0).unwrap();
        let r = m.refined();
        assert_eq!(r.elements(), 16);
        assert_eq!(r.nodes()[2], m.nodes()[1]);
    }

    use crate::profile::build_profile;

    fn quick() -> EigenOptions {
        EigenOptions {
            density: 150,
            ..EigenOptions::default()
        }
    }

    #[test]
    fn weights_have_expected_structure() {
        let p = build_profile(2.0, 60.0, 1e-10).unwrap();
        let q = ModeParams::from_mode(2.0, 1.5).unwrap();
        let mesh = Mesh::adapted(q.gamma1, 0.1, 100).unwrap();
        let disc = assemble(Problem::Pair(q), &p, 0.1, &mesh).unwrap();
        for i in 0..disc.dim() {
            assert!(disc.b.get(i, i) >= 0.0);
            assert!(disc.a.get(i, i) > 0.0);
            for j in 0..i {
                assert_eq!(disc.a.get(i, j), disc.a.get(j, i));
            }
        }
        // far from the core 1 - f² is tiny, so B shrinks relative to A
        let last = disc.dim() - 1;
        assert!(disc.b.get(last, last) < 1e-2 * disc.a.get(last, last));
    }

    #[test]
    fn pencil_eigenpair_is_consistent() {
        let p = build_profile(2.0, 200.0, 1e-10).unwrap();
        let q = ModeParams::from_mode(2.0, 1.5).unwrap();
        let r = m_pair(&q, &p, 0.1, None, &quick()).unwrap();
        assert!(r.rayleigh_residual < 1e-8);
        assert!(r.gap > 0.1 && !r.near_degenerate);
        assert!(r.sign_violation() < 1e-10);
        let tb = test_function_bound(2.0, 1.5, &p, 200.0).unwrap();
        assert!(r.m < tb.bound);
    }

    #[test]
    fn scalar_eigenvector_is_nonnegative() {
        let p = build_profile(1.0, 200.0, 1e-10).unwrap();
        let r = m0(1.0, &p, 0.1, None, &quick()).unwrap();
        assert!(r.vec_a.iter().all(|&v| v >= 0.0));
        assert!(r.vec_b.iter().all(|&v| v == 0.0));
        assert!(r.m > 1.0);
    }

    #[test]
    fn cutoff_pair_bounds_the_eigenvalue() {
        let p = build_profile(3.0, 200.0, 1e-10).unwrap();
        let q = ModeParams::from_mode(3.0, 2.5).unwrap();
        let mesh = Mesh::adapted(q.gamma1, 0.05, 150).unwrap();
        let disc = assemble(Problem::Pair(q), &p, 0.05, &mesh).unwrap();
        let c = cutoff_family(&disc, &p, 2.5, 0.5).unwrap();
        assert_eq!(*c.vec_a.last().unwrap(), 0.0);
        let m = smallest_eig(&disc, &quick()).unwrap().m;
        assert!(m <= c.quotient);
        assert!(cutoff_family(&disc, &p, 3.2, 0.5).is_err());
    }

    #[test]
    fn test_pair_solves_driven_system() {
        let p = build_profile(2.0, 200.0, 1e-10).unwrap();
        let tb = test_function_bound(2.0, 1.5, &p, 200.0).unwrap();
        assert!(tb.syst_residual < 1e-6);
        assert!(tb.c_n > 0.0);
        let e = tb.energy_quotient.unwrap();
        assert!((e - tb.bound).abs() < 1e-6);
        // the driving term carries a factor n - 1
        let near = test_function_bound(2.0, 1.0 + 1e-4, &p, 200.0).unwrap();
        assert!(near.c_n > 0.0 && near.c_n < 1e-3);
    }

    #[test]
    fn lin_trick_limits() {
        let p = build_profile(2.0, 200.0, 1e-10).unwrap();
        let q = ModeParams::from_mode(2.0, 1.5).unwrap();
        let d2 = 4.0;
        let (t, h) = lin_trick_eval(&q, &p, 1e-8).unwrap();
        assert!(t.abs() < 1e-12);
        assert!((h * 1e-8 - (q.gamma1 * q.gamma1 - d2)).abs() < 1e-10);
        let r = 1e4;
        let (_, h) = lin_trick_eval(&q, &p, r).unwrap();
        let expect = (q.gamma1 * q.gamma1 + q.gamma2 * q.gamma2 - 2.0 * d2) / r;
        assert!((h / expect - 1.0).abs() < 1e-3);
    }
}
