//! Plain-text result formats. Fields are written with `f64`'s shortest
//! round-trip representation, '.' as decimal separator and '\n' line ends,
//! so equal inputs give byte-identical files.

use std::fmt::Write as _;
use std::path::Path;

use crate::detection::{DetectionResult, Method, TraceScale};
use crate::error::{Error, Result};
use crate::experiments::{ErrorCurvePoint, ResolutionRow, SweepCell};
use crate::frontend::SpectrumQuotient;
use crate::ifft_detector::RangeProfile;
use crate::music;

use super::config::{render_kv, KeyValues};

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "none".to_string(), |x| x.to_string())
}

pub fn profile_csv(p: &RangeProfile<f64>) -> String {
    let mut s = String::from("lag_s,value\n");
    for (i, v) in p.values.iter().enumerate() {
        let _ = writeln!(s, "{},{}", i as f64 * p.lag_step_s, v);
    }
    s
}

/// MUSIC trace of a detection as `omega_rad,delay_s,p_music`, ascending
/// in delay. `None` when the result carries no power trace.
pub fn pseudospectrum_csv(r: &DetectionResult<f64>) -> Option<String> {
    let trace = r.trace.as_ref().filter(|t| t.scale == TraceScale::Power)?;
    let df: f64 = r.metadata.get("bin_spacing_hz")?.parse().ok()?;
    let mut s = String::from("omega_rad,delay_s,p_music\n");
    for (d, v) in trace.delays_s.iter().zip(&trace.values) {
        let _ = writeln!(s, "{},{},{}", music::delay_to_omega(*d, df), d, v);
    }
    Some(s)
}

/// Every quotient bin as `freq_hz,re,im,valid` in ascending frequency.
pub fn quotient_csv(q: &SpectrumQuotient<f64>) -> String {
    let n = q.len();
    let mut s = String::from("freq_hz,re,im,valid\n");
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| q.freq_hz(a).total_cmp(&q.freq_hz(b)));
    for k in order {
        let z = q.bins[k];
        let _ = writeln!(s, "{},{},{},{}", q.freq_hz(k), z.re, z.im, u8::from(q.valid_mask[k]));
    }
    s
}

/// Detection as a `key = value` record.
pub fn detection_record(r: &DetectionResult<f64>) -> String {
    let mut kv = KeyValues::new();
    kv.insert("method".into(), r.method.to_string());
    kv.insert("count".into(), r.len().to_string());
    for i in 0..r.len() {
        kv.insert(format!("delay_{i}_s"), r.delays_s[i].to_string());
        kv.insert(format!("range_{i}_m"), r.ranges_m[i].to_string());
        kv.insert(format!("value_{i}"), r.peak_values[i].to_string());
    }
    for (k, v) in &r.metadata {
        kv.insert(format!("meta.{k}"), v.clone());
    }
    render_kv(&kv)
}

pub fn resolution_csv(cells: &[SweepCell]) -> String {
    let mut s = String::from("channel_count,method,separation_m,resolve_rate\n");
    for c in cells {
        let _ = writeln!(s, "{},{},{},{}", c.channel_count, c.method, c.separation_m, c.resolve_rate);
    }
    s
}

pub fn error_curve_csv(points: &[ErrorCurvePoint]) -> String {
    let mut s = String::from("channel_count,method,mean_rel_error_pct,iterations,excluded\n");
    for p in points {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            p.channel_count, p.method, p.mean_rel_error_pct, p.iterations, p.excluded
        );
    }
    s
}

/// One Table 1 line: both methods' resolutions at one channel count.
#[derive(Debug, Clone, PartialEq)]
pub struct Table1Row {
    pub channel_count: usize,
    pub ifft_m: Option<f64>,
    pub music_m: Option<f64>,
    /// `100 * ifft / music`, e.g. 150 for 3 km against 2 km.
    pub improvement_pct: Option<f64>,
}

pub fn table1_rows(rows: &[ResolutionRow], channels: &[usize]) -> Vec<Table1Row> {
    let get = |ch: usize, m: Method| {
        rows.iter()
            .find(|r| r.channel_count == ch && r.method == m)
            .and_then(|r| r.min_resolved_separation_m)
    };
    channels
        .iter()
        .map(|&ch| {
            let (ifft_m, music_m) = (get(ch, Method::Ifft), get(ch, Method::Music));
            Table1Row {
                channel_count: ch,
                ifft_m,
                music_m,
                improvement_pct: match (ifft_m, music_m) {
                    (Some(i), Some(m)) => Some(100.0 * i / m),
                    _ => None,
                },
            }
        })
        .collect()
}

pub fn table1_csv(rows: &[Table1Row]) -> String {
    let mut s = String::from("channel_count,ifft_min_resolved_m,music_min_resolved_m,improvement_pct\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{}",
            r.channel_count,
            opt(r.ifft_m),
            opt(r.music_m),
            opt(r.improvement_pct)
        );
    }
    s
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(ch: usize, method: Method, m: Option<f64>) -> ResolutionRow {
        ResolutionRow {
            channel_count: ch,
            method,
            min_resolved_separation_m: m,
            trials: 1,
            resolve_rate: 1.0,
        }
    }

    #[test]
    fn improvement_is_ifft_over_music() {
        let rows = [row(1, Method::Ifft, Some(3000.0)), row(1, Method::Music, Some(2000.0))];
        let t = table1_rows(&rows, &[1]);
        assert_eq!(t[0].improvement_pct, Some(150.0));
        assert_eq!(
            table1_csv(&t),
            "channel_count,ifft_min_resolved_m,music_min_resolved_m,improvement_pct\n1,3000,2000,150\n"
        );
    }

    #[test]
    fn unresolved_rows_print_none() {
        let t = table1_rows(&[row(3, Method::Ifft, None)], &[3]);
        assert!(table1_csv(&t).ends_with("3,none,none,none\n"));
    }

    #[test]
    fn profile_rows() {
        let p = RangeProfile {
            values: vec![1.0, 0.5],
            lag_step_s: 0.5e-6,
        };
        assert_eq!(profile_csv(&p), "lag_s,value\n0,1\n0.0000005,0.5\n");
    }
}
