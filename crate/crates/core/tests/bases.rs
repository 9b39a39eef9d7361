use glradial::branch::Behavior;
use glradial::connection::*;
use glradial::params::ModeParams;
use glradial::profile::{build_profile, Profile};
use glradial::verify::decoupling_residual;
use proptest::prelude::*;
use std::sync::OnceLock;

fn profile(d: f64) -> &'static Profile {
    static P: [OnceLock<Profile>; 3] = [OnceLock::new(), OnceLock::new(), OnceLock::new()];
    P[d as usize - 1].get_or_init(|| build_profile(d, 40.0, 1e-10).unwrap())
}

#[test]
fn far_determinant_is_sixteen_root_two_n() {
    let params = ModeParams::from_mode(2.0, 1.5).unwrap();
    let b = build_bases(&params, profile(2.0), &ConnectOptions::default()).unwrap();
    let want = 16.0 * std::f64::consts::SQRT_2 * params.n;
    for r in [15.0, 30.0] {
        let (det, _) = b.far.determinant_near(r);
        assert!((det - want).abs() < 1e-6 * want, "r={r}: {det} vs {want}");
    }
}

#[test]
fn exact_mode_has_no_decaying_content() {
    // at n = 1 the pair built from f' and f/r is an exact Zero3 solution
    // decaying at infinity, so C3 vanishes
    for d in [1.0, 2.0] {
        let c = c3_at(d, 1.0, profile(d), &ConnectOptions::default()).unwrap();
        assert!(c.c3_normalized().abs() < 1e-6, "d={d}: {}", c.c3_normalized());
    }
}

#[test]
fn short_scan_finds_the_exact_root() {
    let report = scan_c3(1.0, profile(1.0), 0.9, 1.1, 0.1, &ConnectOptions::for_scan()).unwrap();
    assert_eq!(report.roots.len(), 1);
    assert!((report.roots[0].n - 1.0).abs() < 1e-3, "{}", report.roots[0].n);
}

#[test]
fn scalar_equations_split_as_expected() {
    for d in [1.0, 2.0] {
        assert!(scalar_bounded_check(profile(d), ScalarEq::Gl0).unwrap().bounded);
        assert!(!scalar_bounded_check(profile(d), ScalarEq::Glr).unwrap().bounded);
    }
}

#[test]
fn decoupling_residual_flags_a_perturbed_branch() {
    let params = ModeParams::new(1.0, 1.5, 1.5).unwrap();
    let b = build_bases(&params, profile(1.0), &ConnectOptions::default()).unwrap();
    let clean = b.branch(Behavior::Zero1).clone();
    assert!(decoupling_residual(&clean, profile(1.0)) < 1e-6);
    let mut bent = clean;
    let k = bent.len() / 2;
    bent.a[k] *= 1.0 + 1e-3;
    bent.b[k] *= 1.0 - 1e-3;
    assert!(decoupling_residual(&bent, profile(1.0)) > 1e-5);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn lagrange_form_is_constant(n in 1.1f64..2.9) {
        let params = ModeParams::from_mode(2.0, n).unwrap();
        let b = build_bases(&params, profile(2.0), &ConnectOptions::default()).unwrap();
        let rep = amplitude_relation(&b, profile(2.0), &ConnectOptions::default()).unwrap();
        prop_assert!(rep.w_spread < 1e-6, "spread {}", rep.w_spread);
        prop_assert!(rep.relative_error < 1e-3, "amplitude {}", rep.relative_error);
    }

    #[test]
    fn zero_frame_matches_its_closed_form(n in 1.1f64..3.9) {
        let params = ModeParams::from_mode(3.0, n).unwrap();
        let z = glradial::local_basis::zero_basis(&params, profile(3.0), None, 2.0, 1e-12, glradial::par::Mode::Sequential)
            .unwrap();
        for w in &z.wronskians {
            prop_assert!((w - z.expected_wronskian).abs() < 1e-8 * z.expected_wronskian.abs());
        }
    }
}
