use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::detection::TraceScale;
use crate::error::{Error, Result};
use crate::experiments::{self, monte_carlo_error, resolution_sweep, run_scenario};
use crate::ifft_detector::RangeProfile;

use super::config::{load_kv, parse_kv, render_kv, KeyValues, RunConfig, SIMULATE_REQUIRED};
use super::format::{self, write_file};

pub const MANIFEST_FILE: &str = "manifest.txt";
pub const CONFIG_FILE: &str = "config.cfg";
/// Monte Carlo runs shorter than this are flagged as low confidence.
pub const CONFIDENT_ITERATIONS: usize = 100;

/// What a command wrote. `wall_time_s` is reported but kept out of the
/// manifest file so that reruns stay byte-identical.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub command: String,
    pub config_snapshot: KeyValues,
    pub artifact_version: String,
    pub output_paths: Vec<PathBuf>,
    pub wall_time_s: f64,
    pub low_confidence: bool,
}

impl RunManifest {
    fn render(&self) -> String {
        let mut kv = KeyValues::new();
        kv.insert("command".into(), self.command.clone());
        kv.insert("artifact_version".into(), self.artifact_version.clone());
        kv.insert("low_confidence".into(), self.low_confidence.to_string());
        let names: Vec<String> = self
            .output_paths
            .iter()
            .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
            .collect();
        kv.insert("outputs".into(), names.join(","));
        for (k, v) in &self.config_snapshot {
            kv.insert(format!("config.{k}"), v.clone());
        }
        render_kv(&kv)
    }
}

/// Reads a manifest written by one of the commands; output paths are
/// resolved against the manifest's directory and `wall_time_s` is zero.
pub fn read_manifest(path: &Path) -> Result<RunManifest> {
    let kv = load_kv(path)?;
    let dir = path.parent().unwrap_or(Path::new("."));
    let get = |k: &str| kv.get(k).cloned().ok_or_else(|| Error::MissingKeys(vec![k.to_string()]));
    let config_snapshot = kv
        .iter()
        .filter_map(|(k, v)| k.strip_prefix("config.").map(|k| (k.to_string(), v.clone())))
        .collect();
    Ok(RunManifest {
        command: get("command")?,
        artifact_version: get("artifact_version")?,
        low_confidence: get("low_confidence")? == "true",
        output_paths: get("outputs")?
            .split(',')
            .filter(|s| !s.is_empty())
            .map(|s| dir.join(s))
            .collect(),
        config_snapshot,
        wall_time_s: 0.0,
    })
}

/// A finished command: its manifest plus a short human-readable summary.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub manifest: RunManifest,
    pub summary: String,
}

/// Loads a run config from an optional file and applies a seed override.
pub fn load_run_config(path: Option<&Path>, required: &[&str], seed: Option<u64>) -> Result<RunConfig> {
    let mut kv = match path {
        Some(p) => load_kv(p)?,
        None => KeyValues::new(),
    };
    if let Some(s) = seed {
        kv.insert("seed".into(), s.to_string());
    }
    RunConfig::from_kv(&kv, required)
}

struct Writer<'a> {
    dir: &'a Path,
    paths: Vec<PathBuf>,
}

impl<'a> Writer<'a> {
    fn new(dir: &'a Path) -> Result<Self> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        Ok(Self { dir, paths: Vec::new() })
    }

    fn put(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.dir.join(name);
        write_file(&path, contents)?;
        self.paths.push(path);
        Ok(())
    }

    /// Writes the config snapshot and the manifest, which lists itself.
    fn finish(mut self, command: &str, cfg: &RunConfig, started: Instant, low_confidence: bool) -> Result<RunManifest> {
        let snapshot = cfg.snapshot();
        self.put(CONFIG_FILE, &render_kv(&snapshot))?;
        let manifest_path = self.dir.join(MANIFEST_FILE);
        self.paths.push(manifest_path.clone());
        let mut manifest = RunManifest {
            command: command.to_string(),
            config_snapshot: snapshot,
            artifact_version: env!("CARGO_PKG_VERSION").to_string(),
            output_paths: self.paths,
            wall_time_s: 0.0,
            low_confidence,
        };
        write_file(&manifest_path, &manifest.render())?;
        manifest.wall_time_s = started.elapsed().as_secs_f64();
        Ok(manifest)
    }
}

/// Runs one two-target scenario and writes its detection statistic
/// (`profile.csv` or `pseudospectrum.csv`) and `detection.txt`.
pub fn cmd_simulate(config_path: &Path, out_dir: &Path, seed: Option<u64>) -> Result<Outcome> {
    let cfg = load_run_config(Some(config_path), &SIMULATE_REQUIRED, seed)?;
    simulate(&cfg, out_dir)
}

pub fn simulate(cfg: &RunConfig, out_dir: &Path) -> Result<Outcome> {
    let started = Instant::now();
    let sc = &cfg.scenario;
    let result = run_scenario(sc)?;
    let resolved = experiments::resolvability(&result, sc.true_delays(), crate::constants::RESOLVE_TOL_FRAC);
    let result = result.with_meta("resolved", resolved);

    let mut w = Writer::new(out_dir)?;
    match result.trace.as_ref().map(|t| t.scale) {
        Some(TraceScale::Amplitude) => {
            let trace = result.trace.as_ref().expect("checked above");
            let profile = RangeProfile {
                values: trace.values.clone(),
                lag_step_s: 1.0 / sc.sample_rate_hz,
            };
            w.put("profile.csv", &format::profile_csv(&profile))?;
        }
        Some(TraceScale::Power) => {
            if let Some(csv) = format::pseudospectrum_csv(&result) {
                w.put("pseudospectrum.csv", &csv)?;
            }
        }
        None => {}
    }
    w.put("detection.txt", &format::detection_record(&result))?;
    let manifest = w.finish("simulate", cfg, started, false)?;

    let mut summary = format!(
        "{} with {} channel(s), separation {} m: {} detection(s), resolved = {}\n",
        sc.method,
        sc.channel_count,
        sc.separation_m,
        result.len(),
        resolved
    );
    for (d, r) in result.delays_s.iter().zip(&result.ranges_m) {
        let _ = writeln!(summary, "  delay {:.6e} s  range {:.1} m", d, r);
    }
    Ok(Outcome { manifest, summary })
}

/// Resolution sweep reduced to Table 1: `resolution.csv` and `table1.csv`.
pub fn cmd_table1(cfg: &RunConfig, out_dir: &Path) -> Result<Outcome> {
    let started = Instant::now();
    let report = sweep(cfg)?;
    let rows = format::table1_rows(&report.rows, &cfg.channels);
    let mut w = Writer::new(out_dir)?;
    w.put("resolution.csv", &format::resolution_csv(&report.cells))?;
    let table = format::table1_csv(&rows);
    w.put("table1.csv", &table)?;
    let manifest = w.finish("table1", cfg, started, false)?;
    Ok(Outcome { manifest, summary: table })
}

/// Resolve rate for every (channel count, method, separation) cell.
pub fn cmd_sweep(cfg: &RunConfig, out_dir: &Path) -> Result<Outcome> {
    let started = Instant::now();
    let report = sweep(cfg)?;
    let mut w = Writer::new(out_dir)?;
    let csv = format::resolution_csv(&report.cells);
    w.put("resolution.csv", &csv)?;
    let manifest = w.finish("sweep", cfg, started, false)?;
    Ok(Outcome { manifest, summary: csv })
}

/// Monte Carlo delay error for every channel count and method.
pub fn cmd_fig10(cfg: &RunConfig, out_dir: &Path) -> Result<Outcome> {
    let started = Instant::now();
    let points = monte_carlo_error(
        &cfg.scenario,
        cfg.mc,
        &cfg.channels,
        &cfg.methods,
        cfg.iterations,
        cfg.scenario.seed,
    )?;
    let mut w = Writer::new(out_dir)?;
    let csv = format::error_curve_csv(&points);
    w.put("error_curve.csv", &csv)?;
    let low = cfg.iterations < CONFIDENT_ITERATIONS;
    let manifest = w.finish("fig10", cfg, started, low)?;
    let mut summary = csv;
    if low {
        let _ = writeln!(summary, "low confidence: {} iteration(s)", cfg.iterations);
    }
    Ok(Outcome { manifest, summary })
}

fn sweep(cfg: &RunConfig) -> Result<experiments::SweepReport> {
    resolution_sweep(
        &cfg.scenario,
        &cfg.channels,
        &cfg.methods,
        &cfg.separations_m,
        cfg.trials,
        cfg.scenario.seed,
    )
}

/// Parses a config snapshot (as written to `config.cfg`) back into a run
/// config.
pub fn config_from_snapshot(text: &str) -> Result<RunConfig> {
    RunConfig::from_kv(&parse_kv(text)?, &[])
}
