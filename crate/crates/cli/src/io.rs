//! Files on disk: the profile cache, CSV/JSON writers and run manifests.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use glradial::profile::{build_profile, Profile};
use glradial::verify::num;
use serde::Serialize;

use crate::config::RunConfig;

pub fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        ensure_dir(parent)?;
    }
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}

fn cache_file(dir: &Path, d: f64, r_max: f64, tol: f64) -> PathBuf {
    dir.join(format!(
        "profile-{:016x}-{:016x}-{:016x}.json",
        d.to_bits(),
        r_max.to_bits(),
        tol.to_bits()
    ))
}

/// Loads the profile for `d` from the cache, building and storing it on a
/// miss. The flag reports a hit.
pub fn cached_profile(cfg: &RunConfig, d: f64) -> Result<(Profile, bool)> {
    let path = cache_file(&cfg.cache, d, cfg.r_max, cfg.profile_tol);
    if let Ok(text) = std::fs::read_to_string(&path) {
        if let Ok(p) = serde_json::from_str::<Profile>(&text) {
            return Ok((p, true));
        }
    }
    let p = build_profile(d, cfg.r_max, cfg.profile_tol)?;
    ensure_dir(&cfg.cache)?;
    std::fs::write(&path, serde_json::to_string(&p)?).with_context(|| format!("writing {}", path.display()))?;
    Ok((p, false))
}

pub fn profile_csv(p: &Profile) -> String {
    let mut out = String::from("r,f,f_prime\n");
    for i in 0..p.grid.len() {
        out.push_str(&format!("{},{},{}\n", num(p.grid[i]), num(p.f[i]), num(p.f_prime[i])));
    }
    out
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    config: std::collections::BTreeMap<&'static str, String>,
    version: &'static str,
    parallel_feature: bool,
    /// Nothing here is randomized.
    seeds: Vec<u64>,
}

/// Writes `manifest.json` with the resolved configuration into `dir`.
pub fn write_manifest(dir: &Path, command: &str, cfg: &RunConfig) -> Result<()> {
    write_json(
        &dir.join("manifest.json"),
        &Manifest {
            command,
            config: cfg.echo().into_iter().collect(),
            version: env!("CARGO_PKG_VERSION"),
            parallel_feature: glradial::par::parallel_enabled(),
            seeds: Vec::new(),
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cache_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = RunConfig {
            cache: dir.path().to_path_buf(),
            ..RunConfig::default()
        };
        let (a, hit_a) = cached_profile(&cfg, 1.0).unwrap();
        let (b, hit_b) = cached_profile(&cfg, 1.0).unwrap();
        assert!(!hit_a && hit_b);
        assert_eq!(profile_csv(&a), profile_csv(&b));
        assert_eq!(a.amplitude.to_bits(), b.amplitude.to_bits());
    }
}
