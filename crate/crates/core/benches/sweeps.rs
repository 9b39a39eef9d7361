use criterion::{criterion_group, criterion_main, Criterion};
use glradial::connection::{c3_at, ConnectOptions};
use glradial::eigen::{m_pair, EigenOptions};
use glradial::par::{self, Mode};
use glradial::params::ModeParams;
use glradial::profile::build_profile;
use std::hint::black_box;

fn sweeps(c: &mut Criterion) {
    let p = build_profile(2.0, 40.0, 1e-10).unwrap();
    let eig_jobs: Vec<(f64, f64)> = [1.2, 1.5, 1.8, 2.4]
        .iter()
        .flat_map(|&n| [0.1, 0.05].map(|e| (n, e)))
        .collect();
    let opts = EigenOptions {
        density: 100,
        ..EigenOptions::default()
    };
    let c3_jobs = [1.3, 1.7, 2.1, 2.5];

    let mut g = c.benchmark_group("sweeps");
    g.sample_size(10);
    for (label, mode) in [("parallel", Mode::Parallel), ("sequential", Mode::Sequential)] {
        g.bench_function(format!("eigen/{label}"), |b| {
            b.iter(|| {
                par::map(mode, &eig_jobs, |&(n, e)| {
                    let params = ModeParams::from_mode(2.0, n).unwrap();
                    m_pair(&params, &p, e, None, &opts).map(|r| r.m).ok()
                })
            })
        });
        let scan = ConnectOptions::for_scan();
        g.bench_function(format!("c3/{label}"), |b| {
            b.iter(|| par::map(mode, &c3_jobs, |&n| c3_at(2.0, black_box(n), &p, &scan).map(|c| c.c3()).ok()))
        });
    }
    g.finish();
}

criterion_group!(benches, sweeps);
criterion_main!(benches);
