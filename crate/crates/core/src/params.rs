//! Mode parameters `(d, γ₁, γ₂)` and the linear system they define.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::{Control, Integrator, OdeOptions, RKF78};
use crate::profile::Profile;

/// Magnitude beyond which state propagation is abandoned.
pub const OVERFLOW_GUARD: f64 = 1e280;

/// `|γ₁ + γ₂ - 2d - 2|` below this selects the logarithmic weights.
pub const DEGENERATE_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeParams {
    pub d: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma_sq: f64,
    pub xi_sq: f64,
    pub n: f64,
    pub in_d: bool,
    pub in_d1: bool,
    pub in_d2: bool,
}

impl ModeParams {
    pub fn new(d: f64, gamma1: f64, gamma2: f64) -> Result<Self> {
        if !(d > 0.0) || !(gamma1 >= 0.0) || !(gamma2 >= gamma1) {
            return Err(Error::InvalidInput(format!(
                "need d > 0 and 0 <= γ1 <= γ2 (got d={d}, γ1={gamma1}, γ2={gamma2})"
            )));
        }
        let gamma_sq = 0.5 * (gamma1 * gamma1 + gamma2 * gamma2);
        if !(gamma_sq > d * d) {
            return Err(Error::InvalidInput(format!(
                "(γ1² + γ2²)/2 = {gamma_sq} must exceed d² = {}",
                d * d
            )));
        }
        let xi_sq = 0.5 * (gamma2 * gamma2 - gamma1 * gamma1);
        let n = (gamma_sq - d * d).sqrt();
        let in_d = d >= 1.0 && gamma2 > 1.0 && gamma2 < gamma1 + 2.0 * d + 2.0;
        let in_d1 = in_d && gamma1 > 0.0;
        let in_d2 = in_d
            && gamma1 < 0.25
            && -gamma1 - gamma2 + 2.0 * d + 2.0 > 0.0
            && -gamma2 + 2.0 * d + 1.0 > 0.0;
        Ok(Self {
            d,
            gamma1,
            gamma2,
            gamma_sq,
            xi_sq,
            n,
            in_d,
            in_d1,
            in_d2,
        })
    }

    /// The Fourier mode `n` of a degree-`d` vortex: `(γ₁, γ₂) = (|n - d|, n + d)`.
    pub fn from_mode(d: f64, n: f64) -> Result<Self> {
        Self::new(d, (n - d).abs(), n + d)
    }

    pub fn require_domain(&self) -> Result<()> {
        if self.in_d {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!(
                "(d, γ1, γ2) = ({}, {}, {}) lies outside the admissible domain",
                self.d, self.gamma1, self.gamma2
            )))
        }
    }

    /// `γ₁ + γ₂ - 2d - 2`, the denominator of θ and θ̃.
    pub fn theta_denominator(&self) -> f64 {
        self.gamma1 + self.gamma2 - 2.0 * self.d - 2.0
    }
}

/// Right-hand side of the linear system in the state `X = (a, r a', b, r b')`.
/// The system matrix is trace-free, so frame determinants are conserved.
pub fn state_rhs<'a>(params: &'a ModeParams, p: &'a Profile) -> impl Fn(f64, &[f64; 4]) -> [f64; 4] + 'a {
    let (g1s, g2s) = (params.gamma1 * params.gamma1, params.gamma2 * params.gamma2);
    move |r, x| {
        let f2 = p.f_sq(r);
        let fa = f2 * x[2] - (1.0 - 2.0 * f2) * x[0];
        let fb = f2 * x[0] - (1.0 - 2.0 * f2) * x[2];
        [x[1] / r, g1s * x[0] / r + r * fa, x[3] / r, g2s * x[2] / r + r * fb]
    }
}

/// The matrix `M(r)` with `X' = M X`.
pub fn system_matrix(params: &ModeParams, p: &Profile, r: f64) -> [[f64; 4]; 4] {
    let f2 = p.f_sq(r);
    let diag = -r * (1.0 - 2.0 * f2);
    [
        [0.0, 1.0 / r, 0.0, 0.0],
        [params.gamma1 * params.gamma1 / r + diag, 0.0, r * f2, 0.0],
        [0.0, 0.0, 0.0, 1.0 / r],
        [r * f2, 0.0, params.gamma2 * params.gamma2 / r + diag, 0.0],
    ]
}

fn state_integrator(rtol: f64) -> Integrator<'static> {
    Integrator::new(
        &RKF78,
        OdeOptions {
            atol: 1e-300,
            ..OdeOptions::with_rtol(rtol)
        },
    )
}

fn guard(r: f64, x: &[f64; 4]) -> Result<()> {
    if x.iter().all(|v| v.is_finite() && v.abs() < OVERFLOW_GUARD) {
        Ok(())
    } else {
        Err(Error::Overflow { radius: r })
    }
}

/// Carries a state from `r0` to `r1` along `X' = M X`, in either direction.
pub fn propagate_state(
    params: &ModeParams,
    p: &Profile,
    x: [f64; 4],
    r0: f64,
    r1: f64,
    rtol: f64,
) -> Result<[f64; 4]> {
    let mut blown = None;
    let out = state_integrator(rtol).integrate(state_rhs(params, p), r0, x, r1, |r, y| {
        if guard(r, y).is_err() {
            blown = Some(r);
            Control::Stop
        } else {
            Control::Continue
        }
    })?;
    if let Some(radius) = blown {
        return Err(Error::Overflow { radius });
    }
    guard(out.t, &out.y)?;
    Ok(out.y)
}

/// States at each of `points` (monotone away from `r0`).
pub fn propagate_to_points(
    params: &ModeParams,
    p: &Profile,
    x: [f64; 4],
    r0: f64,
    points: &[f64],
    rtol: f64,
) -> Result<Vec<[f64; 4]>> {
    let ys = state_integrator(rtol).integrate_to_points(state_rhs(params, p), r0, x, points)?;
    for (r, y) in points.iter().zip(&ys) {
        guard(*r, y)?;
    }
    Ok(ys)
}

/// 4x4 determinant with columns given as state vectors.
pub fn frame_det(cols: &[[f64; 4]; 4]) -> f64 {
    let m = nalgebra::Matrix4::from_fn(|i, j| cols[j][i]);
    m.determinant()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn domains_follow_definitions() {
        let p = ModeParams::from_mode(1.0, 1.0).unwrap();
        assert_eq!((p.gamma1, p.gamma2), (0.0, 2.0));
        assert!(p.in_d && !p.in_d1 && p.in_d2);
        assert!((p.n - 1.0).abs() < 1e-15);
        let q = ModeParams::from_mode(2.0, 1.5).unwrap();
        assert!(q.in_d1 && !q.in_d2);
        assert!((q.xi_sq - 6.0).abs() < 1e-14);
        assert!(ModeParams::new(2.0, 0.5, 0.5).is_err());
    }

    #[test]
    fn mode_parametrisation_recovers_n() {
        for (d, n) in [(1.0, 0.9), (2.0, 3.3), (3.0, 1.7)] {
            let p = ModeParams::from_mode(d, n).unwrap();
            assert!((p.n - n).abs() < 1e-14);
        }
    }
}
