use glradial::ode::Integrator;
use glradial::profile::*;
use proptest::prelude::*;

// Critical amplitudes from an independent DOP853 shooting bisection
// (rtol 1e-13, bracket width 3e-14).
const ORACLE_A: [(f64, f64); 5] = [
    (1.0, 0.583_189_495_860_338_5),
    (1.5, 0.319_361_224_897_974_7),
    (2.0, 0.153_099_102_859_542_3),
    (2.5, 0.066_104_529_063_565_56),
    (3.0, 0.026_183_420_716_776_6),
];

// (d, r, f(r)) from the same oracle's dense output.
const ORACLE_F: [(f64, f64, f64); 6] = [
    (1.0, 0.5, 0.282_822_183_917_697_5),
    (1.0, 1.0, 0.520_051_741_388_927_1),
    (1.0, 3.0, 0.917_481_089_796_981_7),
    (2.0, 1.0, 0.140_783_586_636_786_25),
    (2.0, 3.0, 0.691_547_542_600_273_3),
    (1.5, 3.0, 0.820_557_227_930_953_1),
];

#[test]
fn bisection_matches_oracle() {
    for (d, a) in ORACLE_A {
        let found = find_critical_amplitude(d, 1e-10).unwrap();
        assert!((found - a).abs() < 1e-8, "d={d}: {found} vs {a}");
    }
}

#[test]
fn second_integrator_agrees() {
    let a78 = find_critical_amplitude(1.0, 1e-10).unwrap();
    let a5 = find_critical_amplitude_with(&Integrator::dopri5(1e-12), 1.0, 1e-10).unwrap();
    assert!((a78 - a5).abs() < 1e-8, "{a78} vs {a5}");
}

#[test]
fn amplitude_decreases_with_degree() {
    let a: Vec<f64> = [1.0, 2.0, 2.5]
        .iter()
        .map(|&d| find_critical_amplitude(d, 1e-10).unwrap())
        .collect();
    assert!(a[0] > a[1] && a[1] > a[2], "{a:?}");
}

#[test]
fn shots_around_the_critical_amplitude() {
    let a1 = ORACLE_A[0].1;
    assert_eq!(shoot_profile(1.0, a1 - 1e-3, 30.0).unwrap().class, Shot::Undershoot);
    assert_eq!(shoot_profile(1.0, a1 + 1e-3, 30.0).unwrap().class, Shot::Overshoot);
    let low = shoot_profile_with(&Integrator::dopri5(1e-11), 1.0, 10.0, 30.0).unwrap();
    assert_eq!(low.class, Shot::Overshoot);
    assert!(low.trajectory.last().unwrap()[1] > 1.0);
}

#[test]
fn huge_amplitude_is_reported() {
    let err = shoot_profile(1.0, 1e14, 30.0).unwrap_err();
    assert!(matches!(err, glradial::Error::SeedBlowUp { .. }), "{err}");
}

#[test]
fn built_profile_matches_oracle_values() {
    for (d, r, f) in ORACLE_F {
        let p = build_profile(d, 40.0, 1e-10).unwrap();
        assert!((p.value(r) - f).abs() < 1e-9, "d={d} r={r}");
    }
}

#[test]
fn profile_invariants() {
    for d in [1.0, 1.5, 2.0, 3.0] {
        let p = build_profile(d, 40.0, 1e-10).unwrap();
        assert!(p.f[0] > 0.0);
        assert!(p.f.windows(2).all(|w| w[1] >= w[0]), "d={d} not monotone");
        assert!(p.f.iter().all(|&v| (0.0..1.0).contains(&v)));
        let res = profile_residual_on(&p, 30.0).unwrap();
        assert!(res.sup < 1e-8, "d={d}: residual {:.3e} at {}", res.sup, res.at_radius);
        let r0 = p.grid[0];
        let lead = p.f[0] / (p.amplitude * r0.powf(d));
        assert!((lead - 1.0).abs() <= r0 * r0 / (4.0 * (d + 1.0)) * 1.01);
        assert!(p.tail_constant.is_finite() && p.tail_constant > 0.0);
    }
}

#[test]
fn tail_and_origin_expansions() {
    let p = build_profile(1.0, 40.0, 1e-10).unwrap();
    let tail = 1.0 - 1.0 / 800.0;
    assert!((p.value(20.0) - tail).abs() < 20f64.powi(-4) * 2.0);

    let p2 = build_profile(2.0, 40.0, 1e-10).unwrap();
    let q = |r: f64| (p2.value(r) / (p2.amplitude * r * r) - 1.0) / (r * r);
    let (ra, rb) = (0.05f64, 0.1f64);
    let e = (q(rb) - q(ra)) / (rb * rb - ra * ra);
    let coef = q(ra) - e * ra * ra;
    assert!((coef + 1.0 / 12.0).abs() < 1e-3 / 12.0, "{coef}");
}

#[test]
fn residual_detects_local_perturbation() {
    let mut p = build_profile(1.0, 40.0, 1e-10).unwrap();
    let k = p.grid.iter().position(|&r| r > 5.0).unwrap();
    p.f[k] += 1e-4;
    let res = profile_residual(&p).unwrap();
    assert!(res.sup > 1e-5);
    assert_eq!(res.at_radius, p.grid[k]);
}

#[test]
fn residual_converges_under_refinement() {
    let coarse = build_profile_with(
        1.5,
        ProfileOptions {
            spacing: 0.08,
            ..Default::default()
        },
    )
    .unwrap();
    let fine = build_profile(1.5, 40.0, 1e-10).unwrap();
    let rc = profile_residual_on(&coarse, 30.0).unwrap().sup;
    let rf = profile_residual_on(&fine, 30.0).unwrap().sup;
    assert!(rf < 1e-8);
    assert!(rf < rc, "{rf} vs {rc}");
}

#[test]
fn higher_degree_profiles_lie_below() {
    let pairs = [(1.0, 1.5), (1.0, 2.0), (2.0, 3.0)];
    for (delta, d) in pairs {
        let lo = build_profile(delta, 40.0, 1e-10).unwrap();
        let hi = build_profile(d, 40.0, 1e-10).unwrap();
        let mut r = 1e-3;
        while r < 40.0 {
            assert!(hi.value(r) < lo.value(r), "f_{d} >= f_{delta} at {r}");
            r *= 1.02;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn eval_is_c1_and_bounded(d in 0.6f64..3.5, r in 0.001f64..60.0) {
        let p = build_profile(d, 40.0, 1e-10).unwrap();
        let (f, fp) = p.eval(r);
        prop_assert!((0.0..1.0).contains(&f));
        prop_assert!(fp >= 0.0);
        let h = 1e-5 * r.max(1.0);
        let num = (p.value(r + h) - p.value(r - h)) / (2.0 * h);
        prop_assert!((num - fp).abs() < 1e-6 * (1.0 + fp.abs()));
    }

    #[test]
    fn tail_series_is_consistent(d in 0.5f64..4.0) {
        let t = TailSeries::new(d, 6);
        prop_assert!((t.coeffs[1] - d * d / 2.0).abs() < 1e-14 * d * d);
        prop_assert!((t.coeffs[2] - (d * d + d.powi(4) / 8.0)).abs() < 1e-12 * (1.0 + d.powi(4)));
        let e = t.defect_coeffs(4);
        prop_assert!(e[..5].iter().all(|&v| v == 0.0));
        prop_assert!((e[5] + 2.0 * t.coeffs[5]).abs() < 1e-9 * t.coeffs[5].abs());
    }
}
