use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::scenario::{derive_seed, detect, simulate_quotient, ScenarioConfig};
use crate::detection::Method;
use crate::error::{Error, Result};

/// Mean single-target delay error of one detector.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorCurvePoint {
    pub channel_count: usize,
    pub method: Method,
    /// Mean of `100 |est - true| / true` over successful iterations.
    pub mean_rel_error_pct: f64,
    pub iterations: usize,
    /// Iterations where the detector reported no peak.
    pub excluded: usize,
}

/// Range of the randomized target delay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McSettings {
    pub delay_min_s: f64,
    pub delay_max_s: f64,
}

impl Default for McSettings {
    fn default() -> Self {
        Self {
            delay_min_s: 10.0e-6,
            delay_max_s: 40.0e-6,
        }
    }
}

const DELAY_STREAM: u64 = 0xDE1A;

/// Single-target Monte Carlo: iteration `i` draws its delay, programme and
/// noise from seed `base_seed + i`; both methods see the same realization.
pub fn monte_carlo_error(
    base: &ScenarioConfig,
    settings: McSettings,
    channels: &[usize],
    methods: &[Method],
    iterations: usize,
    base_seed: u64,
) -> Result<Vec<ErrorCurvePoint>> {
    if iterations == 0 {
        return Err(Error::param("iterations", "must be at least 1"));
    }
    if !(settings.delay_min_s > 0.0 && settings.delay_min_s < settings.delay_max_s) {
        return Err(Error::param("delay_min_s", "need 0 < delay_min_s < delay_max_s"));
    }
    let mut out = Vec::new();
    for &channel_count in channels {
        let per_iter: Vec<Vec<Option<f64>>> = (0..iterations)
            .into_par_iter()
            .map(|i| {
                let seed = base_seed.wrapping_add(i as u64);
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, DELAY_STREAM));
                let delay = rng.random_range(settings.delay_min_s..settings.delay_max_s);
                let cfg = ScenarioConfig {
                    channel_count,
                    seed,
                    ..base.clone()
                };
                let q = simulate_quotient(&cfg, &[delay])?;
                methods
                    .iter()
                    .map(|&m| {
                        let r = detect(&q, m, &cfg.detector_params, 1)?;
                        let idx = r.strongest(1);
                        Ok(idx
                            .first()
                            .map(|&k| 100.0 * (r.delays_s[k] - delay).abs() / delay))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;

        for (mi, &method) in methods.iter().enumerate() {
            let errs: Vec<f64> = per_iter.iter().filter_map(|v| v[mi]).collect();
            let mean = if errs.is_empty() {
                f64::NAN
            } else {
                errs.iter().sum::<f64>() / errs.len() as f64
            };
            out.push(ErrorCurvePoint {
                channel_count,
                method,
                mean_rel_error_pct: mean,
                iterations,
                excluded: iterations - errs.len(),
            });
        }
    }
    Ok(out)
}
