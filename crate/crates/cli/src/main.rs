#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};
use glradial::branch::Behavior;
use glradial::connection::{build_bases, connect, scan_c3, c3_at, ConnectOptions};
use glradial::eigen::{m0, m_pair, EigenOptions, EigenResult};
use glradial::farfield::FarOptions;
use glradial::par;
use glradial::params::ModeParams;
use glradial::profile::profile_residual_on;
use glradial::verify::{num, run_suite, VerifyConfig};
use serde_json::json;

mod config;
mod io;
mod plot;

use config::{Problem, RunConfig, SweepKind};

/// Radial linearized Ginzburg-Landau vortex computations.
#[derive(Parser)]
#[command(name = "glradial", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand)]
enum Command {
    /// Build (or load from cache) the vortex profile f_d.
    Profile,
    /// Dump the canonical bases at 0 and at infinity.
    Basis,
    /// Connection coefficients of one behavior at 0 in the far frame.
    Connect,
    /// Scan C3 over an n-range and report its roots.
    Scan,
    /// One eigenvalue solve.
    Eig,
    /// Eigenvalue or C3 grids over d, n and ε.
    Sweep,
    /// Run the acceptance suite.
    Verify,
    /// Plot data from earlier results in the output directory.
    Plot,
}

/// Flags override entries of the configuration file.
#[derive(Args)]
struct Flags {
    /// Flat `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Any configuration key, as `KEY=VALUE`; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long, global = true)]
    d: Option<f64>,
    #[arg(long, global = true)]
    n: Option<f64>,
    #[arg(long, global = true)]
    gamma1: Option<f64>,
    #[arg(long, global = true)]
    gamma2: Option<f64>,
    #[arg(long, global = true)]
    n_min: Option<f64>,
    #[arg(long, global = true)]
    n_max: Option<f64>,
    #[arg(long, global = true)]
    n_step: Option<f64>,
    #[arg(long, global = true)]
    epsilon: Option<f64>,
    /// Comma-separated list.
    #[arg(long, global = true)]
    epsilons: Option<String>,
    /// Comma-separated list.
    #[arg(long, global = true)]
    d_list: Option<String>,
    /// Comma-separated list.
    #[arg(long, global = true)]
    n_list: Option<String>,
    /// `pair` or `scalar`.
    #[arg(long, global = true)]
    problem: Option<String>,
    /// Sweep kind: `eigen` or `c3`.
    #[arg(long, global = true)]
    kind: Option<String>,
    /// Behavior at 0 to connect, e.g. `zero3`.
    #[arg(long, global = true)]
    target: Option<String>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    cache: Option<PathBuf>,
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// `parallel` or `sequential`.
    #[arg(long, global = true)]
    mode: Option<String>,
    /// Write eigenvectors next to eigenvalue results.
    #[arg(long, global = true)]
    dump_vectors: bool,
}

impl Flags {
    fn overrides(&self) -> Result<BTreeMap<String, String>> {
        let mut m = BTreeMap::new();
        for kv in &self.set {
            let Some((k, v)) = kv.split_once('=') else {
                bail!("--set expects KEY=VALUE, got `{kv}`");
            };
            m.insert(k.trim().to_string(), v.trim().to_string());
        }
        let mut put = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                m.insert(k.to_string(), v);
            }
        };
        let s = |x: Option<f64>| x.map(|v| v.to_string());
        put("d", s(self.d));
        put("n", s(self.n));
        put("gamma1", s(self.gamma1));
        put("gamma2", s(self.gamma2));
        put("n_min", s(self.n_min));
        put("n_max", s(self.n_max));
        put("n_step", s(self.n_step));
        put("epsilon", s(self.epsilon));
        put("epsilons", self.epsilons.clone());
        put("d_list", self.d_list.clone());
        put("n_list", self.n_list.clone());
        put("problem", self.problem.clone());
        put("kind", self.kind.clone());
        put("target", self.target.clone());
        put("out", self.out.as_ref().map(|p| p.display().to_string()));
        put("cache", self.cache.as_ref().map(|p| p.display().to_string()));
        put("workers", self.workers.map(|w| w.to_string()));
        put("mode", self.mode.clone());
        if self.dump_vectors {
            put("dump_vectors", Some("true".into()));
        }
        Ok(m)
    }
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Profile => "profile",
            Command::Basis => "basis",
            Command::Connect => "connect",
            Command::Scan => "scan",
            Command::Eig => "eig",
            Command::Sweep => "sweep",
            Command::Verify => "verify",
            Command::Plot => "plot",
        }
    }
}

fn connect_options(cfg: &RunConfig) -> ConnectOptions {
    ConnectOptions {
        far: FarOptions {
            r_max: cfg.far_r_max,
            far_radius: cfg.far_radius,
            tol: cfg.far_tol,
        },
        zero_tol: cfg.picard_tol,
        rtol: cfg.ode_tol,
        r_mid: cfg.r_mid,
        mode: cfg.mode,
    }
}

/// The cheaper far field used for scans and C3 sweeps.
fn scan_options(cfg: &RunConfig) -> ConnectOptions {
    ConnectOptions {
        r_mid: cfg.r_mid,
        mode: cfg.mode,
        ..ConnectOptions::for_scan()
    }
}

fn eigen_options(cfg: &RunConfig) -> EigenOptions {
    EigenOptions {
        tol: cfg.eigen_tol,
        density: cfg.mesh_density,
        ..EigenOptions::default()
    }
}

fn mode_params(cfg: &RunConfig) -> Result<ModeParams> {
    Ok(match (cfg.gamma1, cfg.gamma2) {
        (Some(g1), Some(g2)) => ModeParams::new(cfg.d, g1, g2)?,
        (None, None) => ModeParams::from_mode(cfg.d, cfg.n)?,
        _ => bail!("give both gamma1 and gamma2, or neither"),
    })
}

fn tag(x: f64) -> String {
    x.to_string()
}

fn run_profile(cfg: &RunConfig, dir: &Path) -> Result<serde_json::Value> {
    let (p, hit) = io::cached_profile(cfg, cfg.d)?;
    let path = dir.join(format!("profile_d{}.csv", tag(cfg.d)));
    io::write_text(&path, &io::profile_csv(&p))?;
    let res = profile_residual_on(&p, 30f64.min(p.r_max()))?;
    Ok(json!({
        "d": p.d,
        "amplitude": p.amplitude,
        "nodes": p.grid.len(),
        "r_max": p.r_max(),
        "residual": res.sup,
        "cache_hit": hit,
        "csv": path,
    }))
}

fn run_basis(cfg: &RunConfig, dir: &Path) -> Result<serde_json::Value> {
    let params = mode_params(cfg)?;
    let (p, _) = io::cached_profile(cfg, cfg.d)?;
    let b = build_bases(&params, &p, &connect_options(cfg))?;
    for w in [Behavior::ZERO, Behavior::INFINITY].concat() {
        io::write_text(&dir.join(format!("{}.csv", w.name())), &b.branch(w).to_csv())?;
    }
    Ok(json!({
        "params": params,
        "r_mid": b.r_mid,
        "zero": {
            "wronskians": b.zero.wronskians,
            "radii": b.zero.wronskian_radii,
            "expected": b.zero.expected_wronskian,
        },
        "infinity": {
            "determinants": b.far.determinants,
            "radii": b.far.determinant_radii,
            "expected": b.far.expected_determinant,
        },
    }))
}

fn run_connect(cfg: &RunConfig, dir: &Path) -> Result<serde_json::Value> {
    let params = mode_params(cfg)?;
    let (p, _) = io::cached_profile(cfg, cfg.d)?;
    let opts = connect_options(cfg);
    let b = build_bases(&params, &p, &opts)?;
    let c = connect(&b, &p, cfg.target, &opts)?;
    let v = serde_json::to_value(&c)?;
    io::write_json(&dir.join("connect.json"), &v)?;
    Ok(v)
}

fn run_scan(cfg: &RunConfig, dir: &Path) -> Result<serde_json::Value> {
    let (p, _) = io::cached_profile(cfg, cfg.d)?;
    let rep = par::with_workers(cfg.workers, || scan_c3(cfg.d, &p, cfg.n_min, cfg.n_max, cfg.n_step, &scan_options(cfg)))?;
    let mut csv = String::from("n,c3,c3_normalized,error\n");
    for pt in &rep.points {
        match &pt.coeffs {
            Some(c) => csv.push_str(&format!("{},{},{},\n", num(pt.n), num(c.c3()), num(c.c3_normalized()))),
            None => csv.push_str(&format!(
                "{},,,{}\n",
                num(pt.n),
                pt.error.clone().unwrap_or_default().replace(',', ";")
            )),
        }
    }
    io::write_text(&dir.join(format!("scan_d{}.csv", tag(cfg.d))), &csv)?;
    let failed = rep.points.iter().filter(|p| p.error.is_some()).count();
    let v = json!({ "d": cfg.d, "points": rep.points.len(), "failed": failed, "roots": rep.roots });
    io::write_json(&dir.join(format!("roots_d{}.json", tag(cfg.d))), &v)?;
    Ok(v)
}

fn eig_summary(r: &EigenResult) -> serde_json::Value {
    json!({
        "problem": r.problem,
        "epsilon": r.epsilon,
        "m": r.m,
        "m2": r.m2,
        "gap": r.gap,
        "near_degenerate": r.near_degenerate,
        "mesh_size": r.mesh.len(),
        "iterations": r.iterations,
        "rayleigh_residual": r.rayleigh_residual,
        "sign_violation": r.sign_violation(),
    })
}

fn vectors_csv(r: &EigenResult) -> String {
    let mut out = String::from("r,a,b\n");
    for i in 0..r.mesh.len() {
        out.push_str(&format!("{},{},{}\n", num(r.mesh[i]), num(r.vec_a[i]), num(r.vec_b[i])));
    }
    out
}

fn run_eig(cfg: &RunConfig, dir: &Path) -> Result<serde_json::Value> {
    let (p, _) = io::cached_profile(cfg, cfg.d)?;
    let opts = eigen_options(cfg);
    let r = match cfg.problem {
        Problem::Pair => m_pair(&mode_params(cfg)?, &p, cfg.epsilon, None, &opts)?,
        Problem::Scalar => m0(cfg.d, &p, cfg.epsilon, None, &opts)?,
    };
    if cfg.dump_vectors {
        io::write_text(&dir.join("eigenvector.csv"), &vectors_csv(&r))?;
    }
    let v = eig_summary(&r);
    io::write_json(&dir.join("eig.json"), &v)?;
    Ok(v)
}

fn run_sweep(cfg: &RunConfig, dir: &Path) -> Result<serde_json::Value> {
    let mut profiles = BTreeMap::new();
    for &d in &cfg.d_list {
        profiles.insert(d.to_bits(), io::cached_profile(cfg, d)?.0);
    }
    let prof = |d: f64| &profiles[&d.to_bits()];
    // per-point jobs run sequentially inside; the sweep itself is parallel
    let inner = RunConfig {
        mode: par::Mode::Sequential,
        ..cfg.clone()
    };
    let (csv, failures) = match cfg.kind {
        SweepKind::Eigen => {
            let ns: Vec<f64> = match cfg.problem {
                Problem::Pair => cfg.n_list.clone(),
                Problem::Scalar => vec![f64::NAN],
            };
            let jobs: Vec<(f64, f64, f64)> = cfg
                .d_list
                .iter()
                .flat_map(|&d| ns.iter().flat_map(move |&n| cfg.epsilons.iter().map(move |&e| (d, n, e))))
                .collect();
            let opts = eigen_options(cfg);
            let results = par::with_workers(cfg.workers, || {
                par::map(cfg.mode, &jobs, |&(d, n, e)| match cfg.problem {
                    Problem::Pair => ModeParams::from_mode(d, n).and_then(|q| m_pair(&q, prof(d), e, None, &opts)),
                    Problem::Scalar => m0(d, prof(d), e, None, &opts),
                })
            });
            let mut csv = String::from("d,n,gamma1,gamma2,epsilon,m,gap,iterations,mesh_size,error\n");
            let mut failures = 0;
            for (&(d, n, e), r) in jobs.iter().zip(&results) {
                let (g1, g2) = match cfg.problem {
                    Problem::Pair => ModeParams::from_mode(d, n).map(|q| (q.gamma1, q.gamma2)).unwrap_or((f64::NAN, f64::NAN)),
                    Problem::Scalar => (d, f64::NAN),
                };
                let head = format!("{},{},{},{},{}", num(d), num(n), num(g1), num(g2), num(e));
                match r {
                    Ok(r) => {
                        csv.push_str(&format!("{head},{},{},{},{},\n", num(r.m), num(r.gap), r.iterations, r.mesh.len()));
                        if cfg.dump_vectors {
                            let name = format!("vec_d{}_n{}_eps{}.csv", tag(d), tag(n), tag(e));
                            io::write_text(&dir.join("vectors").join(name), &vectors_csv(r))?;
                        }
                    }
                    Err(err) => {
                        failures += 1;
                        csv.push_str(&format!("{head},,,,,{}\n", err.to_string().replace(',', ";")));
                    }
                }
            }
            (csv, failures)
        }
        SweepKind::C3 => {
            let jobs: Vec<(f64, f64)> = cfg
                .d_list
                .iter()
                .flat_map(|&d| cfg.n_list.iter().map(move |&n| (d, n)))
                .collect();
            let opts = scan_options(&inner);
            let results = par::with_workers(cfg.workers, || {
                par::map(cfg.mode, &jobs, |&(d, n)| c3_at(d, n, prof(d), &opts))
            });
            let mut csv = String::from("d,n,c3,c3_normalized,error\n");
            let mut failures = 0;
            for (&(d, n), r) in jobs.iter().zip(&results) {
                match r {
                    Ok(c) => csv.push_str(&format!("{},{},{},{},\n", num(d), num(n), num(c.c3()), num(c.c3_normalized()))),
                    Err(err) => {
                        failures += 1;
                        csv.push_str(&format!("{},{},,,{}\n", num(d), num(n), err.to_string().replace(',', ";")));
                    }
                }
            }
            (csv, failures)
        }
    };
    let path = dir.join("sweep.csv");
    io::write_text(&path, &csv)?;
    Ok(json!({ "rows": csv.lines().count() - 1, "failures": failures, "csv": path }))
}

fn run_verify(cfg: &RunConfig, dir: &Path) -> Result<(serde_json::Value, bool)> {
    let vc = VerifyConfig {
        profile_r_max: cfg.r_max,
        profile_tol: cfg.profile_tol,
        scan_degrees: cfg.d_list.clone(),
        scan_step: cfg.n_step,
        epsilons: cfg.epsilons.clone(),
        eigen: eigen_options(cfg),
        test_r_max: cfg.test_r_max,
        mode: cfg.mode,
        rerun: cfg.rerun,
    };
    let report = par::with_workers(cfg.workers, || run_suite(&vc));
    for c in &report.criteria {
        println!("{}", c.line());
        io::write_text(&dir.join(format!("criterion_{}.csv", c.id)), &c.csv)?;
    }
    io::write_text(&dir.join("payload.csv"), &report.payload())?;
    let v = json!({
        "passed": report.all_passed(),
        "criteria": report.criteria.iter().map(|c| json!({
            "id": c.id, "title": c.title, "passed": c.passed, "summary": c.summary, "seconds": c.seconds,
            "parts": c.parts.iter().map(|(n, ok)| json!({ "name": n, "passed": ok })).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
    });
    io::write_json(&dir.join("report.json"), &v)?;
    Ok((v, report.all_passed()))
}

fn numbers(row: &[String], idx: &[usize]) -> Option<Vec<f64>> {
    idx.iter().map(|&i| row.get(i)?.parse::<f64>().ok()).collect()
}

fn run_plot(cfg: &RunConfig, dir: &Path) -> Result<serde_json::Value> {
    let mut written = Vec::new();
    let listing = |sub: &str, prefix: &str| -> Vec<PathBuf> {
        let mut v: Vec<PathBuf> = std::fs::read_dir(cfg.out.join(sub))
            .map(|rd| {
                rd.filter_map(|e| e.ok().map(|e| e.path()))
                    .filter(|p| {
                        p.file_name()
                            .and_then(|s| s.to_str())
                            .is_some_and(|s| s.starts_with(prefix) && s.ends_with(".csv"))
                    })
                    .collect()
            })
            .unwrap_or_default();
        v.sort();
        v
    };
    let stem = |p: &Path| p.file_stem().and_then(|s| s.to_str()).unwrap_or("").to_string();

    let mut emit = |name: &str, series: Vec<plot::Series>, title: &str, x: &str, y: &str| -> Result<()> {
        io::write_text(&dir.join(format!("{name}.csv")), &plot::series_csv(&series, x, y))?;
        io::write_text(&dir.join(format!("{name}.svg")), &plot::svg(&series, title, x, y)?)?;
        written.push(name.to_string());
        Ok(())
    };

    let scans = listing("scan", "scan_d");
    if !scans.is_empty() {
        let mut series = Vec::new();
        for f in &scans {
            let (h, rows) = plot::read_csv(f)?;
            let idx = [plot::column(&h, "n")?, plot::column(&h, "c3_normalized")?];
            let pts = rows.iter().filter_map(|r| numbers(r, &idx)).map(|v| (v[0], v[1])).collect();
            series.push(plot::Series {
                label: stem(f).trim_start_matches("scan_").to_string(),
                points: pts,
            });
        }
        emit("c3_vs_n", series, "normalized C3 against n", "n", "C3")?;
    }

    let sweep = cfg.out.join("sweep").join("sweep.csv");
    if sweep.exists() {
        let (h, rows) = plot::read_csv(&sweep)?;
        if let (Ok(ci), Ok(cm)) = (plot::column(&h, "epsilon"), plot::column(&h, "m")) {
            let (cd, cn) = (plot::column(&h, "d")?, plot::column(&h, "n")?);
            let mut groups: BTreeMap<(String, String), Vec<(f64, f64)>> = BTreeMap::new();
            for r in &rows {
                if let Some(v) = numbers(r, &[ci, cm]) {
                    groups.entry((r[cd].clone(), r[cn].clone())).or_default().push((v[0], v[1]));
                }
            }
            let series = groups
                .into_iter()
                .map(|((d, n), mut pts)| {
                    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
                    let (d, n): (f64, f64) = (d.parse().unwrap_or(f64::NAN), n.parse().unwrap_or(f64::NAN));
                    plot::Series {
                        label: format!("d={d} n={n}"),
                        points: pts,
                    }
                })
                .collect();
            emit("m_vs_epsilon", series, "first eigenvalue against ε", "epsilon", "m")?;
        }
    }

    let profiles = listing("profile", "profile_d");
    if !profiles.is_empty() {
        let mut series = Vec::new();
        for f in &profiles {
            let (h, rows) = plot::read_csv(f)?;
            let idx = [plot::column(&h, "r")?, plot::column(&h, "f")?];
            let pts = rows
                .iter()
                .filter_map(|r| numbers(r, &idx))
                .map(|v| (v[0], v[1]))
                .filter(|(r, _)| *r <= 20.0)
                .collect();
            series.push(plot::Series {
                label: stem(f).trim_start_matches("profile_").to_string(),
                points: pts,
            });
        }
        emit("profiles", series, "vortex profiles", "r", "f")?;
    }

    if written.is_empty() {
        bail!(
            "no result files under {} (expected scan/scan_d*.csv, sweep/sweep.csv or profile/profile_d*.csv)",
            cfg.out.display()
        );
    }
    Ok(json!({ "written": written }))
}

fn run(cli: &Cli) -> Result<bool> {
    let cfg = RunConfig::load(cli.flags.config.as_deref(), &cli.flags.overrides()?)?;
    let name = cli.command.name();
    let dir = cfg.out.join(name);
    io::ensure_dir(&dir)?;
    io::write_manifest(&dir, name, &cfg)?;
    let (summary, ok) = match cli.command {
        Command::Profile => (run_profile(&cfg, &dir)?, true),
        Command::Basis => (run_basis(&cfg, &dir)?, true),
        Command::Connect => (run_connect(&cfg, &dir)?, true),
        Command::Scan => (run_scan(&cfg, &dir)?, true),
        Command::Eig => (run_eig(&cfg, &dir)?, true),
        Command::Sweep => (run_sweep(&cfg, &dir)?, true),
        Command::Verify => run_verify(&cfg, &dir)?,
        Command::Plot => (run_plot(&cfg, &dir)?, true),
    };
    io::write_json(&dir.join("summary.json"), &summary)?;
    println!("{}", serde_json::to_string(&summary)?);
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        // the suite ran but some criterion failed
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            let report = json!({
                "status": "error",
                "command": cli.command.name(),
                "message": e.to_string(),
                "chain": e.chain().skip(1).map(|c| c.to_string()).collect::<Vec<_>>(),
            });
            eprintln!("{report}");
            if let Some(out) = &cli.flags.out {
                let _ = io::write_json(&out.join("error.json"), &report);
            }
            ExitCode::FAILURE
        }
    }
}

