use glradial::eigen::*;
use glradial::params::ModeParams;
use glradial::profile::{build_profile, Profile};
use proptest::prelude::*;
use std::sync::OnceLock;

// Finite differences in ln r on (-25, ln 1/ε), steps 0.02/0.01/0.005 with
// two Richardson passes, over a collocation-BVP profile (scipy).
const ORACLE_M0: [(f64, f64); 2] = [(0.1, 1.516_058_029_049_444_5), (0.05, 1.298_154_999_486_656_1)];
const ORACLE_PAIR: [(f64, f64, f64, f64, f64); 2] = [
    (2.0, 1.5, 2.5, 0.1, 1.253_414_158_591_674_3),
    (1.0, 0.5, 2.5, 0.1, 1.874_611_264_887_423_6),
];

fn profile(d: f64) -> &'static Profile {
    static P1: OnceLock<Profile> = OnceLock::new();
    static P2: OnceLock<Profile> = OnceLock::new();
    let cell = if d == 1.0 { &P1 } else { &P2 };
    cell.get_or_init(|| build_profile(d, 40.0, 1e-10).unwrap())
}

#[test]
fn scalar_matches_oracle() {
    for (eps, want) in ORACLE_M0 {
        let m = m0(1.0, profile(1.0), eps, None, &EigenOptions::default()).unwrap().m;
        assert!((m - want).abs() < 1e-6 * want, "ε={eps}: {m} vs {want}");
    }
}

#[test]
fn pair_matches_oracle() {
    for (d, g1, g2, eps, want) in ORACLE_PAIR {
        let params = ModeParams::new(d, g1, g2).unwrap();
        let m = m_pair(&params, profile(d), eps, None, &EigenOptions::default()).unwrap().m;
        assert!((m - want).abs() < 1e-6 * want, "({d},{g1},{g2}): {m} vs {want}");
    }
}

#[test]
fn refinement_barely_moves_m() {
    let params = ModeParams::from_mode(2.0, 1.5).unwrap();
    let opts = EigenOptions::default();
    let mesh = Mesh::adapted(params.gamma1, 0.05, opts.density).unwrap();
    let coarse = m_pair(&params, profile(2.0), 0.05, Some(&mesh), &opts).unwrap().m;
    let fine = m_pair(&params, profile(2.0), 0.05, Some(&mesh.refined()), &opts).unwrap().m;
    assert!((coarse - fine).abs() < 1e-4, "{coarse} vs {fine}");
}

#[test]
fn m0_decreases_toward_one() {
    let opts = EigenOptions::default();
    let ms: Vec<f64> = [0.1, 0.05, 0.025, 0.0125]
        .iter()
        .map(|&e| m0(1.0, profile(1.0), e, None, &opts).unwrap().m)
        .collect();
    assert!(ms.windows(2).all(|w| w[1] < w[0] && w[1] > 1.0), "{ms:?}");
}

// The second C3 root of d = 2 is where the eigenvalue limit crosses 1.
#[test]
fn eigenvalue_crosses_one_at_second_root() {
    let opts = EigenOptions::default();
    let at = |n: f64| {
        let params = ModeParams::from_mode(2.0, n).unwrap();
        m_pair(&params, profile(2.0), 0.0125, None, &opts).unwrap().m
    };
    assert!(at(2.70) < 1.0 && at(2.76) > 1.0);
}

#[test]
fn cutoff_quotient_stays_above_m() {
    let params = ModeParams::from_mode(2.0, 1.5).unwrap();
    let opts = EigenOptions::default();
    let mesh = Mesh::adapted(params.gamma1, 0.05, 200).unwrap();
    let disc = assemble(Problem::Pair(params), profile(2.0), 0.05, &mesh).unwrap();
    let m = smallest_eig(&disc, &opts).unwrap().m;
    let pair = cutoff_family(&disc, profile(2.0), 1.5, 0.5).unwrap();
    assert!(pair.quotient >= m - 1e-12, "{} < {m}", pair.quotient);
}

fn small_disc() -> &'static Discretization {
    static D: OnceLock<Discretization> = OnceLock::new();
    D.get_or_init(|| {
        let params = ModeParams::from_mode(2.0, 1.5).unwrap();
        let mesh = Mesh::adapted(params.gamma1, 0.1, 40).unwrap();
        assemble(Problem::Pair(params), profile(2.0), 0.1, &mesh).unwrap()
    })
}

fn small_m() -> f64 {
    static M: OnceLock<f64> = OnceLock::new();
    *M.get_or_init(|| smallest_eig(small_disc(), &EigenOptions::default()).unwrap().m)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn quotient_is_bounded_below_by_m(seed in prop::collection::vec(-1.0f64..1.0, 8)) {
        let disc = small_disc();
        let n = disc.dim();
        // a smooth random vector built from a few Fourier-like modes
        let x: Vec<f64> = (0..n)
            .map(|i| {
                let t = i as f64 / n as f64;
                seed.iter().enumerate().map(|(k, c)| c * ((k + 1) as f64 * 3.1 * t).sin()).sum()
            })
            .collect();
        prop_assume!(x.iter().any(|v| v.abs() > 1e-6));
        prop_assert!(disc.quotient(&x) >= small_m() * (1.0 - 1e-10));
    }

    #[test]
    fn lin_minimizer_is_global(r in 0.01f64..20.0, tau in -3.0f64..3.0, n in 1.05f64..2.95) {
        let params = ModeParams::from_mode(2.0, n).unwrap();
        let (tau0, h0) = lin_trick_eval(&params, profile(2.0), r).unwrap();
        let h = lin_h(&params, profile(2.0).value(r), r, tau);
        prop_assert!(h >= h0 - 1e-12 * h0.abs().max(1.0));
        prop_assert!((-1.0..=0.0).contains(&tau0));
    }
}
