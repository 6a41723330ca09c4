use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::constants;
use crate::detection::Method;
use crate::error::{Error, Result};
use crate::experiments::{McSettings, ScenarioConfig};

/// Flat `key = value` map; later duplicates win.
pub type KeyValues = BTreeMap<String, String>;

/// Keys `simulate` cannot run without.
pub const SIMULATE_REQUIRED: [&str; 3] = ["channel_count", "separation_m", "method"];

/// Parses `key = value` lines. Blank lines and text after `#` are ignored.
pub fn parse_kv(text: &str) -> Result<KeyValues> {
    let mut out = KeyValues::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Format(format!("line {}: expected `key = value`", lineno + 1)))?;
        let k = k.trim();
        if k.is_empty() {
            return Err(Error::Format(format!("line {}: empty key", lineno + 1)));
        }
        out.insert(k.to_string(), v.trim().to_string());
    }
    Ok(out)
}

pub fn load_kv(path: &Path) -> Result<KeyValues> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_kv(&text)
}

/// One `key = value` line per entry, sorted by key.
pub fn render_kv(kv: &KeyValues) -> String {
    let mut s = String::new();
    for (k, v) in kv {
        s.push_str(k);
        s.push_str(" = ");
        s.push_str(v);
        s.push('\n');
    }
    s
}

/// Everything a subcommand needs: the scenario template plus the batch
/// settings of the sweeps.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: ScenarioConfig,
    pub channels: Vec<usize>,
    pub methods: Vec<Method>,
    pub separations_m: Vec<f64>,
    pub trials: usize,
    pub iterations: usize,
    pub mc: McSettings,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            scenario: ScenarioConfig::default(),
            channels: constants::CHANNEL_COUNTS.to_vec(),
            methods: Method::ALL.to_vec(),
            separations_m: constants::SWEEP_SEPARATIONS_M.to_vec(),
            trials: constants::SWEEP_TRIALS,
            iterations: 100,
            mc: McSettings::default(),
        }
    }
}

fn value<T: FromStr>(key: &str, raw: &str) -> Result<T> {
    raw.parse().map_err(|_| Error::ConfigValue {
        key: key.to_string(),
        reason: format!("cannot parse `{raw}`"),
    })
}

fn list<T: FromStr>(key: &str, raw: &str) -> Result<Vec<T>> {
    let items = raw
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| value(key, s))
        .collect::<Result<Vec<T>>>()?;
    if items.is_empty() {
        return Err(Error::ConfigValue {
            key: key.to_string(),
            reason: "list is empty".into(),
        });
    }
    Ok(items)
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

impl RunConfig {
    /// Builds a config from defaults overridden by `kv`. Every key in
    /// `required` must be present; unknown keys are rejected.
    pub fn from_kv(kv: &KeyValues, required: &[&str]) -> Result<Self> {
        let missing: Vec<String> = required
            .iter()
            .filter(|k| !kv.contains_key(**k))
            .map(|k| k.to_string())
            .collect();
        if !missing.is_empty() {
            return Err(Error::MissingKeys(missing));
        }
        let mut c = RunConfig::default();
        for (k, raw) in kv {
            let s = &mut c.scenario;
            let d = &mut s.detector_params;
            match k.as_str() {
                "channel_count" => s.channel_count = value(k, raw)?,
                "separation_m" => s.separation_m = value(k, raw)?,
                "base_delay_s" => s.base_delay_s = value(k, raw)?,
                "snr_db" => s.snr_db = value(k, raw)?,
                "n_samples" => s.n_samples = value(k, raw)?,
                "seed" => s.seed = value(k, raw)?,
                "method" => s.method = value(k, raw)?,
                "sample_rate_hz" => s.sample_rate_hz = value(k, raw)?,
                "carrier_offset_hz" => s.carrier_offset_hz = value(k, raw)?,
                "freq_deviation_hz" => s.freq_deviation_hz = value(k, raw)?,
                "channel_spacing_hz" => s.channel_spacing_hz = value(k, raw)?,
                "audio_bw_hz" => s.audio_bw_hz = value(k, raw)?,
                "direct_amplitude" => s.direct_amplitude = value(k, raw)?,
                "echo_amplitude" => s.echo_amplitude = value(k, raw)?,
                "random_echo_phase" => s.random_echo_phase = value(k, raw)?,
                "eps_rel" => d.eps_rel = value(k, raw)?,
                "passband_hz" => {
                    d.passband_hz = match raw.as_str() {
                        "auto" => None,
                        _ => Some(value(k, raw)?),
                    }
                }
                "profile_mode" => d.profile_mode = value(k, raw)?,
                "ifft_refine" => d.ifft_refine = value(k, raw)?,
                "min_sep_bins" => d.min_sep_bins = value(k, raw)?,
                "music_snapshot_len" => d.music.snapshot_len = value(k, raw)?,
                "music_subvector_len" => d.music.subvector_len = value(k, raw)?,
                "music_forward_backward" => d.music.forward_backward = value(k, raw)?,
                "music_sources" => d.music.sources = value(k, raw)?,
                "music_grid" => d.music.grid_size = value(k, raw)?,
                "music_refine" => d.music.refine = value(k, raw)?,
                "channels" => c.channels = list(k, raw)?,
                "methods" => c.methods = list(k, raw)?,
                "separations_m" => c.separations_m = list(k, raw)?,
                "trials" => c.trials = value(k, raw)?,
                "iterations" => c.iterations = value(k, raw)?,
                "mc_delay_min_s" => c.mc.delay_min_s = value(k, raw)?,
                "mc_delay_max_s" => c.mc.delay_max_s = value(k, raw)?,
                _ => {
                    return Err(Error::ConfigValue {
                        key: k.clone(),
                        reason: "unknown key".into(),
                    })
                }
            }
        }
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        let bad = |key: &str, reason: &str| {
            Err(Error::ConfigValue {
                key: key.into(),
                reason: reason.into(),
            })
        };
        if self.trials == 0 {
            return bad("trials", "must be at least 1");
        }
        if self.iterations == 0 {
            return bad("iterations", "must be at least 1");
        }
        if self.separations_m.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
            return bad("separations_m", "separations must be positive");
        }
        if !(self.mc.delay_min_s > 0.0 && self.mc.delay_min_s < self.mc.delay_max_s) {
            return bad("mc_delay_min_s", "need 0 < mc_delay_min_s < mc_delay_max_s");
        }
        Ok(())
    }

    /// Every setting as a flat map; `from_kv` of the result rebuilds an
    /// equivalent config.
    pub fn snapshot(&self) -> KeyValues {
        let mut kv = self.scenario.to_metadata();
        kv.insert("channels".into(), join(&self.channels));
        kv.insert("methods".into(), join(&self.methods));
        kv.insert("separations_m".into(), join(&self.separations_m));
        kv.insert("trials".into(), self.trials.to_string());
        kv.insert("iterations".into(), self.iterations.to_string());
        kv.insert("mc_delay_min_s".into(), self.mc.delay_min_s.to_string());
        kv.insert("mc_delay_max_s".into(), self.mc.delay_max_s.to_string());
        kv
    }
}
