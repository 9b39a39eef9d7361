//! Gauss-Legendre rules, spectral panel integration and adaptive
//! Gauss-Kronrod quadrature.

use crate::error::{Error, Result};

/// Gauss-Legendre rule on [-1, 1] together with the spectral operators that
/// act on values sampled at its nodes.
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub x: Vec<f64>,
    pub w: Vec<f64>,
    /// `cum[i][j] = ∫_{-1}^{x_i} ℓ_j`
    cum: Vec<Vec<f64>>,
    /// `diff[i][j] = ℓ_j'(x_i)`
    diff: Vec<Vec<f64>>,
    bary: Vec<f64>,
}

fn legendre_all(m: usize, x: f64) -> Vec<f64> {
    let mut p = vec![0.0; m + 1];
    p[0] = 1.0;
    if m >= 1 {
        p[1] = x;
    }
    for k in 1..m {
        let kf = k as f64;
        p[k + 1] = ((2.0 * kf + 1.0) * x * p[k] - kf * p[k - 1]) / (kf + 1.0);
    }
    p
}

impl GaussRule {
    pub fn new(m: usize) -> Self {
        assert!(m >= 2, "a Gauss rule needs at least two nodes");
        let mut x = vec![0.0; m];
        let mut w = vec![0.0; m];
        let mf = m as f64;
        for i in 0..m {
            let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (mf + 0.5)).cos();
            for _ in 0..100 {
                let p = legendre_all(m, z);
                let dp = mf * (z * p[m] - p[m - 1]) / (z * z - 1.0);
                let dz = p[m] / dp;
                z -= dz;
                if dz.abs() < 1e-16 {
                    break;
                }
            }
            let p = legendre_all(m, z);
            let dp = mf * (z * p[m] - p[m - 1]) / (z * z - 1.0);
            x[m - 1 - i] = z;
            w[m - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
        }

        // ∫_{-1}^{x} P_k = (P_{k+1} - P_{k-1}) / (2k+1), ∫ P_0 = x + 1
        let pn: Vec<Vec<f64>> = x.iter().map(|&z| legendre_all(m, z)).collect();
        let mut cum = vec![vec![0.0; m]; m];
        for i in 0..m {
            let q: Vec<f64> = (0..m)
                .map(|k| {
                    if k == 0 {
                        x[i] + 1.0
                    } else {
                        (pn[i][k + 1] - pn[i][k - 1]) / (2.0 * k as f64 + 1.0)
                    }
                })
                .collect();
            for j in 0..m {
                let mut s = 0.0;
                for k in 0..m {
                    s += q[k] * (2.0 * k as f64 + 1.0) / 2.0 * w[j] * pn[j][k];
                }
                cum[i][j] = s;
            }
        }

        let mut bary = vec![0.0; m];
        for j in 0..m {
            let mut prod = 1.0;
            for k in 0..m {
                if k != j {
                    prod *= x[j] - x[k];
                }
            }
            bary[j] = 1.0 / prod;
        }
        let mut diff = vec![vec![0.0; m]; m];
        for i in 0..m {
            let mut diag = 0.0;
            for j in 0..m {
                if i != j {
                    diff[i][j] = bary[j] / bary[i] / (x[i] - x[j]);
                    diag -= diff[i][j];
                }
            }
            diff[i][i] = diag;
        }
        Self {
            x,
            w,
            cum,
            diff,
            bary,
        }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Integral of the interpolant over [a, b].
    pub fn integrate(&self, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        self.x
            .iter()
            .zip(&self.w)
            .map(|(x, w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }

    /// Barycentric evaluation of the interpolant through `vals` at `z ∈ [-1, 1]`.
    pub fn interpolate(&self, vals: &[f64], z: f64) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for (j, (&xj, &v)) in self.x.iter().zip(vals).enumerate() {
            let dz = z - xj;
            if dz == 0.0 {
                return v;
            }
            let t = self.bary[j] / dz;
            num += t * v;
            den += t;
        }
        num / den
    }
}

/// A union of contiguous panels, each carrying a copy of the same Gauss rule.
/// Values live at the panel nodes, ordered left to right.
#[derive(Debug, Clone)]
pub struct PanelGrid {
    pub breaks: Vec<f64>,
    rule: GaussRule,
    nodes: Vec<f64>,
}

impl PanelGrid {
    pub fn new(breaks: Vec<f64>, order: usize) -> Self {
        assert!(breaks.len() >= 2);
        assert!(breaks.windows(2).all(|w| w[1] > w[0]));
        let rule = GaussRule::new(order);
        let mut nodes = Vec::with_capacity((breaks.len() - 1) * order);
        for w in breaks.windows(2) {
            let (mid, half) = (0.5 * (w[0] + w[1]), 0.5 * (w[1] - w[0]));
            nodes.extend(rule.x.iter().map(|x| mid + half * x));
        }
        Self { breaks, rule, nodes }
    }

    /// Panels of width at most `h_max` covering [a, b].
    pub fn uniform(a: f64, b: f64, h_max: f64, order: usize) -> Self {
        let count = ((b - a) / h_max).ceil().max(1.0) as usize;
        let breaks = (0..=count)
            .map(|k| {
                if k == count {
                    b
                } else {
                    a + (b - a) * k as f64 / count as f64
                }
            })
            .collect();
        Self::new(breaks, order)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn order(&self) -> usize {
        self.rule.len()
    }

    pub fn panels(&self) -> usize {
        self.breaks.len() - 1
    }

    pub fn left(&self) -> f64 {
        self.breaks[0]
    }

    pub fn right(&self) -> f64 {
        *self.breaks.last().unwrap()
    }

    fn half(&self, p: usize) -> f64 {
        0.5 * (self.breaks[p + 1] - self.breaks[p])
    }

    pub fn integral(&self, g: &[f64]) -> f64 {
        let m = self.order();
        (0..self.panels())
            .map(|p| {
                let h = self.half(p);
                (0..m).map(|j| self.rule.w[j] * g[p * m + j]).sum::<f64>() * h
            })
            .sum()
    }

    /// `∫_{left}^{t} g` at every node.
    pub fn cumulative_left(&self, g: &[f64]) -> Vec<f64> {
        self.exp_left(g, 0.0)
    }

    /// `∫_{t}^{right} g` at every node.
    pub fn cumulative_right(&self, g: &[f64]) -> Vec<f64> {
        self.exp_right(g, 0.0)
    }

    /// `∫_{left}^{t} e^{-λ(t-s)} g(s) ds` at every node.
    pub fn exp_left(&self, g: &[f64], lambda: f64) -> Vec<f64> {
        let m = self.order();
        let mut out = vec![0.0; g.len()];
        let mut carry = 0.0;
        let mut local = vec![0.0; m];
        for p in 0..self.panels() {
            let a = self.breaks[p];
            let h = self.half(p);
            let base = p * m;
            for j in 0..m {
                local[j] = (lambda * (self.nodes[base + j] - a)).exp() * g[base + j];
            }
            for i in 0..m {
                let t = self.nodes[base + i];
                let s: f64 = (0..m).map(|j| self.rule.cum[i][j] * local[j]).sum();
                let decay = (-lambda * (t - a)).exp();
                out[base + i] = decay * (carry + h * s);
            }
            let full: f64 = (0..m).map(|j| self.rule.w[j] * local[j]).sum::<f64>() * h;
            let width = self.breaks[p + 1] - a;
            carry = (-lambda * width).exp() * (carry + full);
        }
        out
    }

    /// `∫_{t}^{right} e^{-λ(s-t)} g(s) ds` at every node.
    pub fn exp_right(&self, g: &[f64], lambda: f64) -> Vec<f64> {
        let m = self.order();
        let mut out = vec![0.0; g.len()];
        let mut carry = 0.0;
        let mut local = vec![0.0; m];
        for p in (0..self.panels()).rev() {
            let b = self.breaks[p + 1];
            let h = self.half(p);
            let base = p * m;
            let a = self.breaks[p];
            for j in 0..m {
                local[j] = (-lambda * (self.nodes[base + j] - a)).exp() * g[base + j];
            }
            for i in 0..m {
                let t = self.nodes[base + i];
                let s: f64 = (0..m)
                    .map(|j| (self.rule.w[j] - self.rule.cum[i][j]) * local[j])
                    .sum();
                out[base + i] =
                    carry * (-lambda * (b - t)).exp() + (lambda * (t - a)).exp() * h * s;
            }
            let full: f64 = (0..m).map(|j| self.rule.w[j] * local[j]).sum::<f64>() * h;
            let width = b - self.breaks[p];
            carry = (-lambda * width).exp() * carry + full;
        }
        out
    }

    /// Derivative of the piecewise interpolant at the nodes.
    pub fn derivative(&self, g: &[f64]) -> Vec<f64> {
        let m = self.order();
        let mut out = vec![0.0; g.len()];
        for p in 0..self.panels() {
            let h = self.half(p);
            let base = p * m;
            for i in 0..m {
                out[base + i] =
                    (0..m).map(|j| self.rule.diff[i][j] * g[base + j]).sum::<f64>() / h;
            }
        }
        out
    }

    /// Index of the panel containing `t` (clamped to the grid).
    pub fn panel_of(&self, t: f64) -> usize {
        let p = self.breaks.partition_point(|&b| b <= t);
        p.saturating_sub(1).min(self.panels() - 1)
    }

    /// Evaluates the piecewise interpolant of `g` at `t`.
    pub fn interpolate(&self, g: &[f64], t: f64) -> f64 {
        let p = self.panel_of(t);
        let m = self.order();
        let (a, b) = (self.breaks[p], self.breaks[p + 1]);
        let z = (2.0 * t - a - b) / (b - a);
        self.rule.interpolate(&g[p * m..(p + 1) * m], z)
    }
}

const GK_X: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728,
];
const GK_WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    let fc = f(mid);
    let mut k = GK_WK[7] * fc;
    let mut g = GK_WG[3] * fc;
    for i in 0..7 {
        let dx = half * GK_X[i];
        let s = f(mid - dx) + f(mid + dx);
        k += GK_WK[i] * s;
        if i % 2 == 1 {
            g += GK_WG[i / 2] * s;
        }
    }
    (k * half, ((k - g) * half).abs())
}

/// Globally adaptive Gauss-Kronrod (7, 15) quadrature.
pub fn integrate_adaptive(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<(f64, f64)> {
    if a == b {
        return Ok((0.0, 0.0));
    }
    let mut pieces = vec![{
        let (v, e) = gk15(&f, a, b);
        (a, b, v, e)
    }];
    for _ in 0..2000 {
        let total: f64 = pieces.iter().map(|p| p.2).sum();
        let err: f64 = pieces.iter().map(|p| p.3).sum();
        if !total.is_finite() {
            return Err(Error::QuadratureFailure(format!(
                "non-finite integrand on [{a}, {b}]"
            )));
        }
        if err <= tol.max(tol * total.abs()) {
            return Ok((total, err));
        }
        let worst = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|(i, _)| i)
            .unwrap();
        let (lo, hi, _, _) = pieces.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        pieces.push((lo, mid, v1, e1));
        pieces.push((mid, hi, v2, e2));
    }
    let err: f64 = pieces.iter().map(|p| p.3).sum();
    Err(Error::QuadratureFailure(format!(
        "subdivision limit reached on [{a}, {b}] with error {err:.3e}"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gauss_rule_is_exact_for_high_degree() {
        let rule = GaussRule::new(16);
        assert_relative_eq!(rule.w.iter().sum::<f64>(), 2.0, epsilon = 1e-14);
        let v = rule.integrate(0.0, 1.0, |x| x.powi(31));
        assert_relative_eq!(v, 1.0 / 32.0, epsilon = 1e-14);
    }

    #[test]
    fn cumulative_and_exponential_primitives() {
        let grid = PanelGrid::uniform(0.0, 5.0, 0.5, 16);
        let g: Vec<f64> = grid.nodes().iter().map(|t| t.cos()).collect();
        let left = grid.cumulative_left(&g);
        let right = grid.cumulative_right(&g);
        for (i, t) in grid.nodes().iter().enumerate() {
            assert!((left[i] - t.sin()).abs() < 1e-13);
            assert!((right[i] - (5f64.sin() - t.sin())).abs() < 1e-13);
        }
        let lam = 2.0;
        // ∫_0^t e^{-λ(t-s)} ds and ∫_t^5 e^{-λ(s-t)} ds
        let ones = vec![1.0; g.len()];
        let el = grid.exp_left(&ones, lam);
        let er = grid.exp_right(&ones, lam);
        for (i, t) in grid.nodes().iter().enumerate() {
            assert!((el[i] - (1.0 - (-lam * t).exp()) / lam).abs() < 1e-13);
            assert!((er[i] - (1.0 - (-lam * (5.0 - t)).exp()) / lam).abs() < 1e-13);
        }
    }

    #[test]
    fn derivative_and_interpolation() {
        let grid = PanelGrid::uniform(1.0, 3.0, 0.5, 12);
        let g: Vec<f64> = grid.nodes().iter().map(|t| t.ln()).collect();
        let dg = grid.derivative(&g);
        for (t, d) in grid.nodes().iter().zip(dg) {
            assert!((d - 1.0 / t).abs() < 1e-10);
        }
        assert!((grid.interpolate(&g, 2.2) - 2.2f64.ln()).abs() < 1e-12);
        assert!((grid.interpolate(&g, 3.0) - 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        let (v, _) = integrate_adaptive(|x: f64| x.sqrt().ln(), 0.0, 1.0, 1e-12).unwrap();
        assert_relative_eq!(v, -0.5, epsilon = 1e-10);
    }
}
