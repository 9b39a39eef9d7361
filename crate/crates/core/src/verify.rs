//! The acceptance suite: one report per criterion, each carrying a
//! deterministic CSV payload.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::branch::{Behavior, SolutionBranch};
use crate::connection::{
    amplitude_relation, build_bases, exact_mode_residual, scalar_bounded_check, scan_c3, ConnectOptions, ScalarEq,
};
use crate::eigen::{m0, m_pair, test_function_bound, EigenOptions, EigenResult};
use crate::error::Result;
use crate::interp::fornberg_weights;
use crate::par::Mode;
use crate::params::ModeParams;
use crate::profile::{build_profile, profile_residual_on, Profile};

/// Tolerances pinned by the acceptance criteria.
pub mod limits {
    pub const PROFILE_RESIDUAL: f64 = 1e-8;
    pub const TAIL_EXPONENT: (f64, f64) = (1.7, 2.3);
    pub const ORIGIN_COEFF_REL: f64 = 1e-2;
    pub const EXACT_MODE: f64 = 1e-7;
    pub const ZERO_FRAME_SPREAD: f64 = 1e-8;
    pub const FAR_DETERMINANT_REL: f64 = 1e-6;
    pub const LAGRANGE_SPREAD: f64 = 1e-6;
    pub const AMPLITUDE_REL: f64 = 1e-3;
    pub const ROOT_LOCATION: f64 = 1e-3;
    pub const C3_FLOOR: f64 = 1e-3;
    pub const M0_STABILITY: f64 = 2.0;
    pub const SIGN_SLACK: f64 = 1e-8;
    pub const DECOUPLING: f64 = 1e-6;
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub profile_r_max: f64,
    pub profile_tol: f64,
    pub scan_degrees: Vec<f64>,
    pub scan_step: f64,
    pub epsilons: Vec<f64>,
    pub eigen: EigenOptions,
    /// Truncation radius of the test-function integrals.
    pub test_r_max: f64,
    pub mode: Mode,
    /// Run criteria 1-8 a second time and compare payloads (criterion 9).
    pub rerun: bool,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            profile_r_max: 40.0,
            profile_tol: 1e-10,
            scan_degrees: vec![1.0, 2.0, 3.0],
            scan_step: 0.02,
            epsilons: vec![0.1, 0.05, 0.025],
            eigen: EigenOptions::default(),
            test_r_max: 200.0,
            mode: Mode::Parallel,
            rerun: true,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Criterion {
    pub id: u8,
    pub title: String,
    pub passed: bool,
    /// Named sub-checks; the criterion passes when all of them do.
    pub parts: Vec<(String, bool)>,
    /// One human-readable line of the key numbers.
    pub summary: String,
    /// Everything measured, 17 significant digits.
    pub csv: String,
    pub seconds: f64,
}

impl Criterion {
    pub fn line(&self) -> String {
        let failed = self.failed_parts();
        let tail = if failed.is_empty() {
            String::new()
        } else {
            format!(" [failed: {}]", failed.join(", "))
        };
        format!(
            "criterion {} [{}] {}: {}{tail}",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.title,
            self.summary
        )
    }

    pub fn failed_parts(&self) -> Vec<&str> {
        self.parts.iter().filter(|(_, ok)| !ok).map(|(n, _)| n.as_str()).collect()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteReport {
    pub criteria: Vec<Criterion>,
}

impl SuiteReport {
    /// Concatenated payloads of criteria 1-8.
    pub fn payload(&self) -> String {
        self.criteria
            .iter()
            .filter(|c| c.id <= 8)
            .map(|c| format!("# criterion {}\n{}", c.id, c.csv))
            .collect()
    }

    pub fn all_passed(&self) -> bool {
        self.criteria.iter().all(|c| c.passed)
    }
}

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Profiles shared by the criteria, built once per degree.
pub struct Profiles {
    r_max: f64,
    tol: f64,
    built: BTreeMap<u64, Profile>,
}

impl Profiles {
    pub fn new(r_max: f64, tol: f64) -> Self {
        Self {
            r_max,
            tol,
            built: BTreeMap::new(),
        }
    }

    pub fn get(&mut self, d: f64) -> Result<&Profile> {
        let key = d.to_bits();
        if !self.built.contains_key(&key) {
            let p = build_profile(d, self.r_max, self.tol)?;
            self.built.insert(key, p);
        }
        Ok(&self.built[&key])
    }
}

type Parts = Vec<(String, bool)>;

fn timed(id: u8, title: &str, body: impl FnOnce() -> Result<(Parts, String, String)>) -> Criterion {
    let start = Instant::now();
    let (parts, summary, csv) = match body() {
        Ok(v) => v,
        Err(e) => (vec![("run".into(), false)], format!("error: {e}"), format!("error,{e}\n")),
    };
    Criterion {
        id,
        title: title.into(),
        passed: parts.iter().all(|(_, ok)| *ok),
        parts,
        summary,
        csv,
        seconds: start.elapsed().as_secs_f64(),
    }
}

/// Profile residual, tail exponent and the origin correction.
pub fn criterion1(ps: &mut Profiles) -> Criterion {
    timed(1, "profile fidelity", || {
        let mut csv = String::from("d,residual,tail_exponent,f20_deviation_r4,origin_coeff,origin_expected\n");
        let mut parts = Vec::new();
        let mut worst = (0.0f64, 0.0f64, 0.0f64);
        for d in [1.0, 1.5, 2.0, 3.0] {
            let p = ps.get(d)?;
            let res = profile_residual_on(p, 30.0)?.sup;
            let defect = |r: f64| 1.0 - p.value(r);
            let expo = -(defect(30.0) / defect(15.0)).ln() / 2f64.ln();
            let f20 = (p.value(20.0) - (1.0 - d * d / 800.0)).abs() * 20f64.powi(4);
            // f/(A r^d) = 1 + c r² + e r⁴ + ..., extrapolated to r = 0
            let q = |r: f64| (p.value(r) / (p.amplitude * r.powf(d)) - 1.0) / (r * r);
            let (ra, rb) = (0.05f64, 0.1f64);
            let e = (q(rb) - q(ra)) / (rb * rb - ra * ra);
            let coeff = q(ra) - e * ra * ra;
            let expected = -1.0 / (4.0 * (d + 1.0));
            let coeff_rel = (coeff / expected - 1.0).abs();
            parts.push((
                format!("d={d}"),
                res < limits::PROFILE_RESIDUAL
                    && expo > limits::TAIL_EXPONENT.0
                    && expo < limits::TAIL_EXPONENT.1
                    && coeff_rel < limits::ORIGIN_COEFF_REL,
            ));
            worst = (worst.0.max(res), worst.1.max((expo - 2.0).abs()), worst.2.max(coeff_rel));
            let _ = writeln!(csv, "{},{},{},{},{},{}", num(d), num(res), num(expo), num(f20), num(coeff), num(expected));
        }
        Ok((
            parts,
            format!(
                "max residual {:.2e} (< 1e-8), max |exponent - 2| {:.3} (< 0.3), max origin-coefficient error {:.2e} (< 1e-2)",
                worst.0, worst.1, worst.2
            ),
            csv,
        ))
    })
}

pub fn criterion2(ps: &mut Profiles) -> Criterion {
    timed(2, "exact n = 1 mode", || {
        let mut csv = String::from("d,residual\n");
        let mut worst = 0.0f64;
        for d in [1.0, 2.0] {
            let r = exact_mode_residual(ps.get(d)?)?;
            worst = worst.max(r);
            let _ = writeln!(csv, "{},{}", num(d), num(r));
        }
        Ok((
            vec![("residual".into(), worst < limits::EXACT_MODE)],
            format!("max residual {worst:.2e} (< 1e-7)"),
            csv,
        ))
    })
}

/// Parameter points for the Wronskian and Lagrange checks.
pub const FRAME_POINTS: [(f64, f64); 4] = [(1.0, 1.5), (2.0, 1.5), (2.0, 3.0), (3.0, 2.5)];

pub fn criterion3(ps: &mut Profiles, mode: Mode) -> Criterion {
    timed(3, "frame determinants", || {
        let mut csv = String::from("d,n,zero_w1,zero_w2,zero_spread,far_expected,far_det_min,far_det_max,far_rel_error\n");
        let opts = ConnectOptions {
            mode,
            ..ConnectOptions::default()
        };
        let (mut zs, mut fe) = (0.0f64, 0.0f64);
        for (d, n) in FRAME_POINTS {
            let params = ModeParams::from_mode(d, n)?;
            let b = build_bases(&params, ps.get(d)?, &opts)?;
            let w = &b.zero.wronskians;
            let spread = (w[1] - w[0]).abs() / w[0].abs();
            let expect = b.far.expected_determinant;
            let dets = &b.far.determinants;
            let rel = dets.iter().map(|x| (x / expect - 1.0).abs()).fold(0.0, f64::max);
            let (lo, hi) = dets.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &x| (l.min(x), h.max(x)));
            zs = zs.max(spread);
            fe = fe.max(rel);
            let _ = writeln!(
                csv,
                "{},{},{},{},{},{},{},{},{}",
                num(d),
                num(n),
                num(w[0]),
                num(w[1]),
                num(spread),
                num(expect),
                num(lo),
                num(hi),
                num(rel)
            );
        }
        Ok((
            vec![
                ("zero frame".into(), zs < limits::ZERO_FRAME_SPREAD),
                ("far determinant".into(), fe < limits::FAR_DETERMINANT_REL),
            ],
            format!("zero-frame spread {zs:.2e} (< 1e-8), far determinant vs 16√2n {fe:.2e} (< 1e-6)"),
            csv,
        ))
    })
}

pub fn criterion4(ps: &mut Profiles, mode: Mode) -> Criterion {
    timed(4, "Lagrange identity and amplitude relation", || {
        let mut csv = String::from("d,n,c_amp,d_amp,d_predicted,relative_error,w_spread\n");
        let opts = ConnectOptions {
            mode,
            ..ConnectOptions::default()
        };
        let (mut ws, mut de) = (0.0f64, 0.0f64);
        for (d, n) in FRAME_POINTS {
            let params = ModeParams::from_mode(d, n)?;
            let p = ps.get(d)?;
            let b = build_bases(&params, p, &opts)?;
            let a = amplitude_relation(&b, p, &opts)?;
            ws = ws.max(a.w_spread);
            de = de.max(a.relative_error);
            let _ = writeln!(
                csv,
                "{},{},{},{},{},{},{}",
                num(d),
                num(n),
                num(a.c_amp),
                num(a.d_amp),
                num(a.d_predicted),
                num(a.relative_error),
                num(a.w_spread)
            );
        }
        Ok((
            vec![
                ("lagrange".into(), ws < limits::LAGRANGE_SPREAD),
                ("amplitude".into(), de < limits::AMPLITUDE_REL),
            ],
            format!("W spread {ws:.2e} (< 1e-6), D = 2√2C/γ₂ error {de:.2e} (< 1e-3)"),
            csv,
        ))
    })
}

pub fn criterion5(ps: &mut Profiles, degrees: &[f64], step: f64, mode: Mode) -> Criterion {
    timed(5, "C3 scan", || {
        let mut csv = String::from("d,n,c3,c3_normalized,error\n");
        let mut roots_csv = String::from("d,root,derivative,touching\n");
        let opts = ConnectOptions {
            mode,
            ..ConnectOptions::for_scan()
        };
        let mut checks = Vec::new();
        let mut parts = Vec::new();
        for &d in degrees {
            let rep = scan_c3(d, ps.get(d)?, 0.9, 2.0 * d - 0.1, step, &opts)?;
            let mut floor = f64::INFINITY;
            let mut failed = 0;
            for pt in &rep.points {
                match &pt.coeffs {
                    Some(c) => {
                        if pt.n >= 1.1 - 1e-9 {
                            floor = floor.min(c.c3_normalized().abs());
                        }
                        let _ = writeln!(csv, "{},{},{},{},", num(d), num(pt.n), num(c.c3()), num(c.c3_normalized()));
                    }
                    None => {
                        failed += 1;
                        let msg = pt.error.clone().unwrap_or_default().replace(',', ";");
                        let _ = writeln!(csv, "{},{},,,{}", num(d), num(pt.n), msg);
                    }
                }
            }
            for r in &rep.roots {
                let _ = writeln!(roots_csv, "{},{},{},{}", num(d), num(r.n), num(r.derivative), r.touching);
            }
            let near_one = rep.roots.iter().filter(|r| (r.n - 1.0).abs() < limits::ROOT_LOCATION).count();
            let good = failed == 0 && rep.roots.len() == 1 && near_one == 1 && floor > limits::C3_FLOOR;
            checks.push((format!("d={d}"), good));
            let listed: Vec<String> = rep.roots.iter().map(|r| format!("{:.7}", r.n)).collect();
            parts.push(format!(
                "d={d}: roots [{}], min |C3| for n >= 1.1 {floor:.3e}{}",
                listed.join(", "),
                if failed > 0 { format!(", {failed} failed points") } else { String::new() }
            ));
        }
        csv.push_str(&roots_csv);
        Ok((checks, parts.join("; "), csv))
    })
}

pub fn criterion6(ps: &mut Profiles) -> Criterion {
    timed(6, "scalar analogues", || {
        let mut csv = String::from("d,equation,bounded,unbounded_coeff,unbounded_coeff_check\n");
        let mut parts = Vec::new();
        for d in [1.0, 2.0, 3.0] {
            let p = ps.get(d)?;
            for (eq, want) in [(ScalarEq::Gl0, true), (ScalarEq::Glr, false)] {
                let r = scalar_bounded_check(p, eq)?;
                parts.push((format!("d={d} {eq:?}"), r.bounded == want));
                let _ = writeln!(
                    csv,
                    "{},{:?},{},{},{}",
                    num(d),
                    eq,
                    r.bounded,
                    num(r.unbounded_coeff),
                    num(r.unbounded_coeff_check)
                );
            }
        }
        let ok = parts.iter().all(|(_, b)| *b);
        Ok((
            parts,
            if ok {
                "GL0 bounded, GLR unbounded for d = 1, 2, 3".into()
            } else {
                "unexpected classification".into()
            },
            csv,
        ))
    })
}

/// Modes checked against the test-function bound.
pub const BOUND_POINTS: [(f64, f64); 3] = [(2.0, 1.5), (3.0, 1.5), (3.0, 2.5)];

fn eig_row(csv: &mut String, tag: &str, d: f64, n: f64, r: &EigenResult) {
    let (g1, g2) = match r.problem {
        crate::eigen::Problem::Pair(p) => (p.gamma1, p.gamma2),
        crate::eigen::Problem::Scalar { d } => (d, f64::NAN),
    };
    let _ = writeln!(
        csv,
        "{tag},{},{},{},{},{},{},{},{},{},{}",
        num(d),
        num(n),
        num(g1),
        num(g2),
        num(r.epsilon),
        num(r.m),
        num(r.gap),
        r.iterations,
        r.mesh.len(),
        num(r.sign_violation())
    );
}

pub fn criterion7(ps: &mut Profiles, eps: &[f64], opts: &EigenOptions, test_r_max: f64, mode: Mode) -> Criterion {
    timed(7, "eigenvalue shadows", || {
        let mut csv = String::from("part,d,n,gamma1,gamma2,epsilon,m,gap,iterations,mesh_size,sign_violation\n");
        let degrees = [1.0, 2.0, 3.0];
        for d in degrees {
            ps.get(d)?;
        }
        let ps = &*ps;
        let prof = |d: f64| &ps.built[&d.to_bits()];
        let mut sign_worst = 0.0f64;

        // (a) scalar problem
        let jobs: Vec<(f64, f64)> = degrees.iter().flat_map(|&d| eps.iter().map(move |&e| (d, e))).collect();
        let runs = crate::par::map(mode, &jobs, |&(d, e)| m0(d, prof(d), e, None, opts));
        let mut a_ok = true;
        let mut a_txt = Vec::new();
        for (chunk, &d) in runs.chunks(eps.len()).zip(&degrees) {
            let mut ratios = Vec::new();
            for r in chunk {
                let r = r.as_ref().map_err(clone_err)?;
                eig_row(&mut csv, "a", d, 0.0, r);
                a_ok &= r.vec_a.iter().all(|&v| v >= -limits::SIGN_SLACK);
                ratios.push((r.m - 1.0) / (r.epsilon * r.epsilon));
            }
            let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &x| (l.min(x), h.max(x)));
            a_ok &= lo > 0.0 && hi <= limits::M0_STABILITY * lo;
            a_txt.push(format!("d={d}: {}", ratios.iter().map(|x| format!("{x:.1}")).collect::<Vec<_>>().join("/")));
        }

        // (b) the translation pair (d-1, d+1)
        let runs = crate::par::map(mode, &jobs, |&(d, e)| {
            let q = ModeParams::new(d, d - 1.0, d + 1.0)?;
            m_pair(&q, prof(d), e, None, opts)
        });
        let mut b_ok = true;
        let mut b_txt = Vec::new();
        for (chunk, &d) in runs.chunks(eps.len()).zip(&degrees) {
            let mut excess = Vec::new();
            for r in chunk {
                let r = r.as_ref().map_err(clone_err)?;
                eig_row(&mut csv, "b", d, 1.0, r);
                sign_worst = sign_worst.max(r.sign_violation());
                excess.push(r.m - 1.0);
            }
            b_ok &= excess.iter().all(|&x| x > 0.0) && excess.windows(2).all(|w| w[1] < w[0]);
            b_txt.push(format!("d={d}: {}", excess.iter().map(|x| format!("{x:.2e}")).collect::<Vec<_>>().join("/")));
        }

        // (c) below 1 - C_n/2
        let jobs: Vec<(f64, f64, f64)> = BOUND_POINTS
            .iter()
            .flat_map(|&(d, n)| eps.iter().map(move |&e| (d, n, e)))
            .collect();
        let runs = crate::par::map(mode, &jobs, |&(d, n, e)| m_pair(&ModeParams::from_mode(d, n)?, prof(d), e, None, opts));
        let mut c_ok = true;
        let mut c_txt = Vec::new();
        for (chunk, &(d, n)) in runs.chunks(eps.len()).zip(&BOUND_POINTS) {
            let tb = test_function_bound(d, n, prof(d), test_r_max)?;
            let cap = 1.0 - 0.5 * tb.c_n;
            let mut worst = f64::NEG_INFINITY;
            for r in chunk {
                let r = r.as_ref().map_err(clone_err)?;
                eig_row(&mut csv, "c", d, n, r);
                sign_worst = sign_worst.max(r.sign_violation());
                worst = worst.max(r.m);
            }
            let _ = writeln!(csv, "c_bound,{},{},{},{},,,,,,", num(d), num(n), num(tb.c_n), num(cap));
            c_ok &= tb.c_n > 0.0 && worst <= cap;
            c_txt.push(format!("({d},{n}): max m {worst:.4} vs {cap:.4}"));
        }
        let d_ok = sign_worst < limits::SIGN_SLACK;
        let flag = |b: bool| if b { "ok" } else { "FAIL" };
        Ok((
            vec![
                ("a".into(), a_ok),
                ("b".into(), b_ok),
                ("c".into(), c_ok),
                ("d".into(), d_ok),
            ],
            format!(
                "(a) {} (m0-1)/ε² {}; (b) {} m-1 {}; (c) {} {}; (d) {} sign violation {sign_worst:.1e}",
                flag(a_ok),
                a_txt.join(", "),
                flag(b_ok),
                b_txt.join(", "),
                flag(c_ok),
                c_txt.join(", "),
                flag(d_ok)
            ),
            csv,
        ))
    })
}

fn clone_err(e: &crate::error::Error) -> crate::error::Error {
    crate::error::Error::InvalidInput(e.to_string())
}

/// Sup over interior nodes of the residual of the decoupled equations
/// `(r x')' = γ² x/r + r(3f² - 1) x` and `(r y')' = γ² y/r - r(1 - f²) y`
/// for `x = a + b`, `y = a - b`. `(r x')'` comes from finite differences of
/// the stored derivatives, so the check does not restate the integrator.
pub fn decoupling_residual(branch: &SolutionBranch, p: &Profile) -> f64 {
    const HALF: usize = 4;
    let g = &branch.grid;
    let gsq = branch.params.gamma_sq;
    let kappa = if branch.behavior.is_zero_side() { std::f64::consts::SQRT_2 } else { 0.0 };
    let mut worst = 0.0f64;
    for i in HALF..g.len().saturating_sub(HALF) {
        let win = i - HALF..=i + HALF;
        let r = g[i];
        let w = fornberg_weights(r, &g[win.clone()], 1);
        let fd = |v: &dyn Fn(usize) -> f64| -> f64 { win.clone().zip(&w[1]).map(|(j, c)| c * v(j)).sum() };
        let ls_prime = fd(&|j| branch.log_scale[j]);
        let f2 = p.f_sq(r);
        let x = branch.a[i] + branch.b[i];
        let y = branch.a[i] - branch.b[i];
        let ux = |j: usize| g[j] * (branch.a_prime[j] + branch.b_prime[j]);
        let uy = |j: usize| g[j] * (branch.a_prime[j] - branch.b_prime[j]);
        // x grows like e^{√2 r} on the uncompensated zero-side branches;
        // difference e^{-κ(r - rᵢ)} r x' instead and add κ r x' back
        let damped = |j: usize| (-kappa * (g[j] - r)).exp() * ux(j);
        let lhs_x = fd(&damped) + (ls_prime + kappa) * ux(i);
        let lhs_y = fd(&uy) + ls_prime * uy(i);
        let tx = [gsq * x / r, r * (3.0 * f2 - 1.0) * x];
        let ty = [gsq * y / r, -r * (1.0 - f2) * y];
        // measured against the size of the terms across the stencil, so that
        // sign changes of x or y do not inflate the ratio
        let size = |j: usize| {
            let (rj, fj) = (g[j], p.f_sq(g[j]));
            let (xj, yj) = (branch.a[j] + branch.b[j], branch.a[j] - branch.b[j]);
            let lift = (branch.log_scale[j] - branch.log_scale[i]).exp();
            lift * (gsq / rj + rj * (3.0 * fj - 1.0).abs()).max(gsq / rj + rj) * xj.abs().max(yj.abs())
        };
        let scale = win.clone().map(size).fold(0.0, f64::max);
        let res = (lhs_x - tx[0] - tx[1]).abs().max((lhs_y - ty[0] - ty[1]).abs());
        worst = worst.max(res / scale);
    }
    worst
}

/// Points with `γ₁ = γ₂` used for the decoupling check.
pub const DECOUPLED_POINTS: [(f64, f64); 2] = [(1.0, 1.5), (2.0, 2.5)];

pub fn criterion8(ps: &mut Profiles, mode: Mode) -> Criterion {
    timed(8, "decoupling at ξ² = 0", || {
        let mut csv = String::from("d,gamma,behavior,residual\n");
        let opts = ConnectOptions {
            mode,
            ..ConnectOptions::default()
        };
        let mut worst = 0.0f64;
        for (d, g) in DECOUPLED_POINTS {
            let params = ModeParams::new(d, g, g)?;
            let p = ps.get(d)?;
            let b = build_bases(&params, p, &opts)?;
            for w in [Behavior::ZERO, Behavior::INFINITY].concat() {
                let r = decoupling_residual(b.branch(w), p);
                worst = worst.max(r);
                let _ = writeln!(csv, "{},{},{},{}", num(d), num(g), w.name(), num(r));
            }
        }
        Ok((
            vec![("decoupling".into(), worst < limits::DECOUPLING)],
            format!("max residual over 16 branches {worst:.2e} (< 1e-6)"),
            csv,
        ))
    })
}

/// Criteria 1-8 in order.
pub fn run_core(cfg: &VerifyConfig, ps: &mut Profiles) -> Vec<Criterion> {
    vec![
        criterion1(ps),
        criterion2(ps),
        criterion3(ps, cfg.mode),
        criterion4(ps, cfg.mode),
        criterion5(ps, &cfg.scan_degrees, cfg.scan_step, cfg.mode),
        criterion6(ps),
        criterion7(ps, &cfg.epsilons, &cfg.eigen, cfg.test_r_max, cfg.mode),
        criterion8(ps, cfg.mode),
    ]
}

/// Compares the payload of `first` with a fresh run from new profiles.
pub fn criterion9(cfg: &VerifyConfig, first: &[Criterion]) -> Criterion {
    timed(9, "determinism", || {
        let mut fresh = Profiles::new(cfg.profile_r_max, cfg.profile_tol);
        let again = run_core(cfg, &mut fresh);
        let a = SuiteReport { criteria: first.to_vec() }.payload();
        let b = SuiteReport { criteria: again }.payload();
        let same = a == b;
        let mismatch = a.lines().zip(b.lines()).position(|(x, y)| x != y);
        Ok((
            vec![("payload".into(), same)],
            if same {
                format!("{} payload bytes identical across two runs", a.len())
            } else {
                format!("payloads differ (first differing line {mismatch:?})")
            },
            format!("bytes,identical\n{},{}\n", a.len(), same),
        ))
    })
}

pub fn run_suite(cfg: &VerifyConfig) -> SuiteReport {
    let mut ps = Profiles::new(cfg.profile_r_max, cfg.profile_tol);
    let mut criteria = run_core(cfg, &mut ps);
    if cfg.rerun {
        let c9 = criterion9(cfg, &criteria);
        criteria.push(c9);
    }
    SuiteReport { criteria }
}
