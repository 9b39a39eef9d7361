//! Flat `key = value` run configuration. Flags override file entries.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use glradial::branch::Behavior;
use glradial::par::Mode;

/// Environment variable that relocates the profile cache.
pub const CACHE_ENV: &str = "GLRADIAL_CACHE";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Problem {
    Pair,
    Scalar,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepKind {
    Eigen,
    C3,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub profile_tol: f64,
    pub picard_tol: f64,
    pub ode_tol: f64,
    pub eigen_tol: f64,
    pub far_tol: f64,
    pub r_max: f64,
    pub far_r_max: f64,
    pub far_radius: f64,
    pub r_mid: Option<f64>,
    pub mesh_density: usize,
    pub d: f64,
    pub n: f64,
    pub gamma1: Option<f64>,
    pub gamma2: Option<f64>,
    pub n_min: f64,
    pub n_max: f64,
    pub n_step: f64,
    pub epsilon: f64,
    pub epsilons: Vec<f64>,
    pub d_list: Vec<f64>,
    pub n_list: Vec<f64>,
    pub test_r_max: f64,
    pub problem: Problem,
    pub kind: SweepKind,
    pub target: Behavior,
    pub dump_vectors: bool,
    pub rerun: bool,
    pub out: PathBuf,
    pub cache: PathBuf,
    pub workers: usize,
    pub mode: Mode,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            profile_tol: 1e-10,
            picard_tol: 1e-12,
            ode_tol: 1e-13,
            eigen_tol: 1e-10,
            far_tol: 1e-12,
            r_max: 40.0,
            far_r_max: 40.0,
            far_radius: 400.0,
            r_mid: None,
            mesh_density: 400,
            d: 1.0,
            n: 1.5,
            gamma1: None,
            gamma2: None,
            n_min: 0.9,
            n_max: 1.9,
            n_step: 0.02,
            epsilon: 0.05,
            epsilons: vec![0.1, 0.05, 0.025],
            d_list: vec![1.0, 2.0, 3.0],
            n_list: vec![1.5],
            test_r_max: 200.0,
            problem: Problem::Pair,
            kind: SweepKind::Eigen,
            target: Behavior::Zero3,
            dump_vectors: false,
            rerun: true,
            out: PathBuf::from("out"),
            cache: PathBuf::from(".glradial-cache"),
            workers: 1,
            mode: Mode::Parallel,
        }
    }
}

fn real(key: &str, v: &str) -> Result<f64> {
    v.trim().parse().with_context(|| format!("{key}: `{v}` is not a number"))
}

fn reals(key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',').filter(|s| !s.trim().is_empty()).map(|s| real(key, s)).collect()
}

fn flag(key: &str, v: &str) -> Result<bool> {
    match v.trim() {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => bail!("{key}: `{v}` is not a boolean"),
    }
}

fn list(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

/// Reads `key = value` lines; `#` starts a comment.
pub fn parse_file(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            bail!("line {}: expected `key = value`, got `{raw}`", no + 1);
        };
        map.insert(k.trim().replace('-', "_"), v.trim().to_string());
    }
    Ok(map)
}

impl RunConfig {
    /// Defaults, then the file, then `overrides`.
    pub fn load(file: Option<&Path>, overrides: &BTreeMap<String, String>) -> Result<Self> {
        let mut entries = match file {
            Some(f) => {
                let text = std::fs::read_to_string(f).with_context(|| format!("reading config {}", f.display()))?;
                parse_file(&text)?
            }
            None => BTreeMap::new(),
        };
        let from_env = std::env::var(CACHE_ENV).ok();
        if let Some(dir) = &from_env {
            entries.insert("cache".into(), dir.clone());
        }
        entries.extend(overrides.iter().map(|(k, v)| (k.replace('-', "_"), v.clone())));
        let mut cfg = Self::default();
        for (k, v) in &entries {
            cfg.set(k, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        match key {
            "profile_tol" => self.profile_tol = real(key, v)?,
            "picard_tol" => self.picard_tol = real(key, v)?,
            "ode_tol" => self.ode_tol = real(key, v)?,
            "eigen_tol" => self.eigen_tol = real(key, v)?,
            "far_tol" => self.far_tol = real(key, v)?,
            "r_max" => self.r_max = real(key, v)?,
            "far_r_max" => self.far_r_max = real(key, v)?,
            "far_radius" => self.far_radius = real(key, v)?,
            "r_mid" => self.r_mid = Some(real(key, v)?),
            "mesh_density" => self.mesh_density = real(key, v)? as usize,
            "d" => self.d = real(key, v)?,
            "n" => self.n = real(key, v)?,
            "gamma1" => self.gamma1 = Some(real(key, v)?),
            "gamma2" => self.gamma2 = Some(real(key, v)?),
            "n_min" => self.n_min = real(key, v)?,
            "n_max" => self.n_max = real(key, v)?,
            "n_step" => self.n_step = real(key, v)?,
            "epsilon" => self.epsilon = real(key, v)?,
            "epsilons" => self.epsilons = reals(key, v)?,
            "d_list" => self.d_list = reals(key, v)?,
            "n_list" => self.n_list = reals(key, v)?,
            "test_r_max" => self.test_r_max = real(key, v)?,
            "problem" => {
                self.problem = match v.trim() {
                    "pair" => Problem::Pair,
                    "scalar" => Problem::Scalar,
                    _ => bail!("problem: expected pair or scalar, got `{v}`"),
                }
            }
            "kind" => {
                self.kind = match v.trim() {
                    "eigen" => SweepKind::Eigen,
                    "c3" => SweepKind::C3,
                    _ => bail!("kind: expected eigen or c3, got `{v}`"),
                }
            }
            "target" => {
                self.target = Behavior::parse(v.trim()).with_context(|| format!("target: unknown behavior `{v}`"))?
            }
            "dump_vectors" => self.dump_vectors = flag(key, v)?,
            "rerun" => self.rerun = flag(key, v)?,
            "out" => self.out = PathBuf::from(v.trim()),
            "cache" => self.cache = PathBuf::from(v.trim()),
            "workers" => self.workers = real(key, v)? as usize,
            "mode" => {
                self.mode = match v.trim() {
                    "parallel" => Mode::Parallel,
                    "sequential" => Mode::Sequential,
                    _ => bail!("mode: expected parallel or sequential, got `{v}`"),
                }
            }
            _ => bail!("unknown configuration key `{key}`"),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        for (k, v) in [
            ("profile_tol", self.profile_tol),
            ("picard_tol", self.picard_tol),
            ("ode_tol", self.ode_tol),
            ("eigen_tol", self.eigen_tol),
            ("far_tol", self.far_tol),
        ] {
            if !(v > 0.0) {
                bail!("{k} must be positive (got {v})");
            }
        }
        if self.epsilons.is_empty() || self.d_list.is_empty() || self.n_list.is_empty() {
            bail!("epsilons, d_list and n_list must be nonempty");
        }
        if !(self.n_max >= self.n_min && self.n_step > 0.0) {
            bail!("scan range [{}, {}] with step {} is empty", self.n_min, self.n_max, self.n_step);
        }
        if self.workers < 1 {
            bail!("workers must be at least 1");
        }
        if self.mesh_density < 1 {
            bail!("mesh_density must be at least 1");
        }
        Ok(())
    }

    /// Every key with its resolved value, in a fixed order.
    pub fn echo(&self) -> Vec<(&'static str, String)> {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        vec![
            ("profile_tol", self.profile_tol.to_string()),
            ("picard_tol", self.picard_tol.to_string()),
            ("ode_tol", self.ode_tol.to_string()),
            ("eigen_tol", self.eigen_tol.to_string()),
            ("far_tol", self.far_tol.to_string()),
            ("r_max", self.r_max.to_string()),
            ("far_r_max", self.far_r_max.to_string()),
            ("far_radius", self.far_radius.to_string()),
            ("r_mid", opt(self.r_mid)),
            ("mesh_density", self.mesh_density.to_string()),
            ("d", self.d.to_string()),
            ("n", self.n.to_string()),
            ("gamma1", opt(self.gamma1)),
            ("gamma2", opt(self.gamma2)),
            ("n_min", self.n_min.to_string()),
            ("n_max", self.n_max.to_string()),
            ("n_step", self.n_step.to_string()),
            ("epsilon", self.epsilon.to_string()),
            ("epsilons", list(&self.epsilons)),
            ("d_list", list(&self.d_list)),
            ("n_list", list(&self.n_list)),
            ("test_r_max", self.test_r_max.to_string()),
            (
                "problem",
                match self.problem {
                    Problem::Pair => "pair",
                    Problem::Scalar => "scalar",
                }
                .into(),
            ),
            (
                "kind",
                match self.kind {
                    SweepKind::Eigen => "eigen",
                    SweepKind::C3 => "c3",
                }
                .into(),
            ),
            ("target", self.target.name().into()),
            ("dump_vectors", self.dump_vectors.to_string()),
            ("rerun", self.rerun.to_string()),
            ("out", self.out.display().to_string()),
            ("cache", self.cache.display().to_string()),
            ("workers", self.workers.to_string()),
            (
                "mode",
                match self.mode {
                    Mode::Parallel => "parallel",
                    Mode::Sequential => "sequential",
                }
                .into(),
            ),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_win_over_file() {
        let file = parse_file("d = 2\n# comment\nn-min = 1.0  # trailing\nepsilons = 0.1,0.05\n").unwrap();
        let mut cfg = RunConfig::default();
        for (k, v) in &file {
            cfg.set(k, v).unwrap();
        }
        cfg.set("d", "3").unwrap();
        assert_eq!(cfg.d, 3.0);
        assert_eq!(cfg.n_min, 1.0);
        assert_eq!(cfg.epsilons, vec![0.1, 0.05]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(parse_file("no equals sign").is_err());
        let mut cfg = RunConfig::default();
        assert!(cfg.set("bogus", "1").is_err());
        cfg.set("eigen_tol", "-1").unwrap();
        assert!(cfg.validate().is_err());
        let mut cfg = RunConfig::default();
        cfg.set("workers", "0").unwrap();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn echo_round_trips() {
        let mut cfg = RunConfig::default();
        cfg.set("gamma1", "0.5").unwrap();
        cfg.set("kind", "c3").unwrap();
        let mut back = RunConfig::default();
        for (k, v) in cfg.echo() {
            if !v.is_empty() {
                back.set(k, &v).unwrap();
            }
        }
        assert_eq!(format!("{:?}", back.echo()), format!("{:?}", cfg.echo()));
    }
}
