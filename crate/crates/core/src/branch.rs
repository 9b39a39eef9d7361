//! Sampled solutions of the linear system and their CSV form.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::params::{propagate_state, ModeParams};
use crate::profile::Profile;

/// Defining behavior of a canonical solution, at 0 or at infinity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Behavior {
    /// `(O(r^{γ₂+2d+2}), r^{γ₂})`
    Zero1,
    /// `(O(r²θ), r^{-γ₂})`
    Zero2,
    /// `(r^{γ₁}, O(r^{γ₁+2d+2}))`
    Zero3,
    /// `(r^{-γ₁}, O(r²θ̃))`, or `(τ, ·)` in the second domain
    Zero4,
    /// `(rⁿ, -rⁿ)`
    InfPlus,
    /// `(r⁻ⁿ, -r⁻ⁿ)`
    InfMinus,
    /// `(J₊, J₊)`
    InfGrow,
    /// `(J₋, J₋)`
    InfDecay,
}

impl Behavior {
    pub const ZERO: [Behavior; 4] = [Self::Zero1, Self::Zero2, Self::Zero3, Self::Zero4];
    /// Far-field frame order used for connection coefficients.
    pub const INFINITY: [Behavior; 4] = [Self::InfGrow, Self::InfDecay, Self::InfPlus, Self::InfMinus];

    pub fn name(self) -> &'static str {
        match self {
            Self::Zero1 => "zero1",
            Self::Zero2 => "zero2",
            Self::Zero3 => "zero3",
            Self::Zero4 => "zero4",
            Self::InfPlus => "inf_plus",
            Self::InfMinus => "inf_minus",
            Self::InfGrow => "inf_grow",
            Self::InfDecay => "inf_decay",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [Self::ZERO, Self::INFINITY]
            .concat()
            .into_iter()
            .find(|b| b.name() == s.to_ascii_lowercase())
    }

    pub fn is_zero_side(self) -> bool {
        Self::ZERO.contains(&self)
    }
}

/// A solution `(a, b)` sampled on increasing radii. Far-field branches keep
/// their compensated values together with `log_scale`: the true values are
/// the stored ones times `exp(log_scale)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolutionBranch {
    pub params: ModeParams,
    pub behavior: Behavior,
    pub grid: Vec<f64>,
    pub a: Vec<f64>,
    pub a_prime: Vec<f64>,
    pub b: Vec<f64>,
    pub b_prime: Vec<f64>,
    pub log_scale: Vec<f64>,
    pub lead_coeff: f64,
}

impl SolutionBranch {
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// `X = (a, r a', b, r b')` at node `i`, de-compensated.
    pub fn state(&self, i: usize) -> [f64; 4] {
        let s = self.log_scale[i].exp();
        let r = self.grid[i];
        [
            s * self.a[i],
            s * r * self.a_prime[i],
            s * self.b[i],
            s * r * self.b_prime[i],
        ]
    }

    /// Index of the node closest to `r`.
    pub fn nearest(&self, r: f64) -> usize {
        let i = self.grid.partition_point(|&g| g < r);
        if i == 0 {
            0
        } else if i == self.grid.len() {
            i - 1
        } else if (self.grid[i] - r) < (r - self.grid[i - 1]) {
            i
        } else {
            i - 1
        }
    }

    /// State at an arbitrary radius, carried from the nearest node.
    pub fn state_at(&self, p: &Profile, r: f64, rtol: f64) -> Result<[f64; 4]> {
        let i = self.nearest(r);
        let x = self.state(i);
        if self.grid[i] == r {
            return Ok(x);
        }
        propagate_state(&self.params, p, x, self.grid[i], r, rtol)
    }

    pub fn to_csv(&self) -> String {
        let p = &self.params;
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# d={:.17e} gamma1={:.17e} gamma2={:.17e} tag={} lead_coeff={:.17e}",
            p.d,
            p.gamma1,
            p.gamma2,
            self.behavior.name(),
            self.lead_coeff
        );
        out.push_str("r,a,a_prime,b,b_prime,log_scale\n");
        for i in 0..self.len() {
            let _ = writeln!(
                out,
                "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
                self.grid[i], self.a[i], self.a_prime[i], self.b[i], self.b_prime[i], self.log_scale[i]
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tags_round_trip() {
        for b in [Behavior::ZERO, Behavior::INFINITY].concat() {
            assert_eq!(Behavior::parse(b.name()), Some(b));
        }
        assert_eq!(Behavior::parse("ZERO3"), Some(Behavior::Zero3));
        assert!(Behavior::parse("zero5").is_none());
    }
}
