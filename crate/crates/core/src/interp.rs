//! Piecewise Hermite interpolation and finite-difference weights.

/// Quintic Hermite interpolation on `[x0, x1]` given value, first and second
/// derivative at both ends. Returns value and first derivative at `x`.
pub fn quintic_hermite(x0: f64, x1: f64, y0: [f64; 3], y1: [f64; 3], x: f64) -> (f64, f64) {
    let h = x1 - x0;
    let t = (x - x0) / h;
    let (t2, t3, t4, t5) = (t * t, t * t * t, t.powi(4), t.powi(5));
    let h00 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5;
    let h10 = t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5;
    let h20 = 0.5 * (t2 - 3.0 * t3 + 3.0 * t4 - t5);
    let h01 = 10.0 * t3 - 15.0 * t4 + 6.0 * t5;
    let h11 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5;
    let h21 = 0.5 * (t3 - 2.0 * t4 + t5);
    let d00 = -30.0 * t2 + 60.0 * t3 - 30.0 * t4;
    let d10 = 1.0 - 18.0 * t2 + 32.0 * t3 - 15.0 * t4;
    let d20 = 0.5 * (2.0 * t - 9.0 * t2 + 12.0 * t3 - 5.0 * t4);
    let d01 = 30.0 * t2 - 60.0 * t3 + 30.0 * t4;
    let d11 = -12.0 * t2 + 28.0 * t3 - 15.0 * t4;
    let d21 = 0.5 * (3.0 * t2 - 8.0 * t3 + 5.0 * t4);
    let v = h00 * y0[0]
        + h * h10 * y0[1]
        + h * h * h20 * y0[2]
        + h01 * y1[0]
        + h * h11 * y1[1]
        + h * h * h21 * y1[2];
    let dv = (d00 * y0[0] + d01 * y1[0]) / h
        + d10 * y0[1]
        + d11 * y1[1]
        + h * (d20 * y0[2] + d21 * y1[2]);
    (v, dv)
}

/// Index `i` with `grid[i] <= x < grid[i+1]`, clamped to valid segments.
pub fn locate(grid: &[f64], x: f64) -> usize {
    let i = grid.partition_point(|&g| g <= x);
    i.saturating_sub(1).min(grid.len().saturating_sub(2))
}

/// Fornberg's finite-difference weights for derivatives `0..=m` at `z` from
/// the nodes `x`. Row `k` of the result holds the weights of the k-th derivative.
pub fn fornberg_weights(z: f64, x: &[f64], m: usize) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut c = vec![vec![0.0; n]; m + 1];
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_reproduces_quintics() {
        let p = |x: f64| 1.0 + x - 2.0 * x.powi(3) + 0.5 * x.powi(5);
        let dp = |x: f64| 1.0 - 6.0 * x * x + 2.5 * x.powi(4);
        let ddp = |x: f64| -12.0 * x + 10.0 * x.powi(3);
        let (a, b) = (0.3, 1.7);
        let (v, dv) = quintic_hermite(a, b, [p(a), dp(a), ddp(a)], [p(b), dp(b), ddp(b)], 1.1);
        assert!((v - p(1.1)).abs() < 1e-13);
        assert!((dv - dp(1.1)).abs() < 1e-12);
    }

    #[test]
    fn fornberg_second_derivative() {
        let x = [0.0, 0.1, 0.25, 0.3, 0.5];
        let w = fornberg_weights(0.2, &x, 2);
        let d2: f64 = w[2].iter().zip(&x).map(|(w, x)| w * x.exp()).sum();
        assert!((d2 - 0.2f64.exp()).abs() < 1e-4);
        let d0: f64 = w[0].iter().sum();
        assert!((d0 - 1.0).abs() < 1e-13);
    }

    #[test]
    fn locate_clamps() {
        let g = [0.0, 1.0, 2.0, 3.0];
        assert_eq!(locate(&g, -1.0), 0);
        assert_eq!(locate(&g, 1.5), 1);
        assert_eq!(locate(&g, 3.0), 2);
        assert_eq!(locate(&g, 9.0), 2);
    }
}
