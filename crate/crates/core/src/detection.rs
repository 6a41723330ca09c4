//! Detector-agnostic result type and peak-picking helpers.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::constants::SPEED_OF_LIGHT_M_S;
use crate::error::{Error, Result};
use crate::scalar::{cast, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    Ifft,
    Music,
}

impl Method {
    pub const ALL: [Method; 2] = [Method::Ifft, Method::Music];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Ifft => "IFFT",
            Method::Music => "MUSIC",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "IFFT" => Ok(Method::Ifft),
            "MUSIC" => Ok(Method::Music),
            other => Err(Error::param("method", format!("unknown method `{other}`"))),
        }
    }
}

/// How the values of a [`Trace`] relate to signal level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceScale {
    /// Field-like values (IFFT profile); dB = 20 log10.
    Amplitude,
    /// Power-like values (MUSIC pseudospectrum); dB = 10 log10.
    Power,
}

/// The detection statistic a result was read from, sorted by delay.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace<T> {
    pub delays_s: Vec<T>,
    pub values: Vec<T>,
    pub scale: TraceScale,
}

impl<T: Real> Trace<T> {
    /// Index of the sample closest to `delay_s`.
    pub fn nearest(&self, delay_s: T) -> Option<usize> {
        if self.delays_s.is_empty() {
            return None;
        }
        let i = self.delays_s.partition_point(|&d| d < delay_s);
        let cand = [i.saturating_sub(1), i.min(self.delays_s.len() - 1)];
        cand.into_iter()
            .min_by(|&a, &b| {
                let da = (self.delays_s[a] - delay_s).abs();
                let db = (self.delays_s[b] - delay_s).abs();
                da.partial_cmp(&db).unwrap_or(std::cmp::Ordering::Equal)
            })
    }

    /// Depth in dB of the deepest point strictly between two delays, relative
    /// to the smaller of the two end values. Infinite when the valley is
    /// non-positive while both ends are positive; `None` when the ends are
    /// not distinct samples or not both positive.
    pub fn valley_depth_db(&self, a_s: T, b_s: T) -> Option<f64> {
        let (i, j) = match (self.nearest(a_s), self.nearest(b_s)) {
            (Some(i), Some(j)) => (i.min(j), i.max(j)),
            _ => return None,
        };
        if j <= i + 1 {
            return None;
        }
        let lo_peak = self.values[i].min(self.values[j]);
        if !(lo_peak > T::zero()) {
            return None;
        }
        let valley = self.values[i + 1..j]
            .iter()
            .copied()
            .fold(T::infinity(), T::min);
        if !(valley > T::zero()) {
            return Some(f64::INFINITY);
        }
        let ratio = (lo_peak / valley).to_f64().unwrap_or(f64::NAN);
        Some(match self.scale {
            TraceScale::Amplitude => 20.0 * ratio.log10(),
            TraceScale::Power => 10.0 * ratio.log10(),
        })
    }
}

/// Estimated target delays shared by both detectors.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionResult<T> {
    /// Ascending, non-negative.
    pub delays_s: Vec<T>,
    /// `c * delays_s`.
    pub ranges_m: Vec<T>,
    /// Detection statistic at each delay, same order as `delays_s`.
    pub peak_values: Vec<T>,
    pub method: Method,
    pub metadata: BTreeMap<String, String>,
    pub trace: Option<Trace<T>>,
}

impl<T: Real> DetectionResult<T> {
    /// Builds a result from `(delay, value)` pairs in any order.
    pub fn from_peaks(mut peaks: Vec<(T, T)>, method: Method) -> Result<Self> {
        if peaks.is_empty() {
            return Err(Error::EmptyResult);
        }
        if peaks.iter().any(|(d, _)| !(*d >= T::zero())) {
            return Err(Error::param("peaks", "delays must be non-negative"));
        }
        peaks.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
        let c: T = cast(SPEED_OF_LIGHT_M_S);
        Ok(Self {
            ranges_m: peaks.iter().map(|(d, _)| *d * c).collect(),
            delays_s: peaks.iter().map(|(d, _)| *d).collect(),
            peak_values: peaks.iter().map(|(_, v)| *v).collect(),
            method,
            metadata: BTreeMap::new(),
            trace: None,
        })
    }

    /// A result with no detections (e.g. when every peak search came up
    /// empty); carries its metadata and trace.
    pub fn empty(method: Method) -> Self {
        Self {
            delays_s: Vec::new(),
            ranges_m: Vec::new(),
            peak_values: Vec::new(),
            method,
            metadata: BTreeMap::new(),
            trace: None,
        }
    }

    pub fn len(&self) -> usize {
        self.delays_s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.delays_s.is_empty()
    }

    pub fn with_meta(mut self, key: &str, value: impl ToString) -> Self {
        self.metadata.insert(key.to_string(), value.to_string());
        self
    }

    /// Indices of the `k` strongest detections, returned in delay order.
    pub fn strongest(&self, k: usize) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.sort_by(|&a, &b| {
            self.peak_values[b]
                .partial_cmp(&self.peak_values[a])
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        idx.truncate(k);
        idx.sort_unstable();
        idx
    }
}

/// Local maxima of `values` (strictly above the left neighbour, at least the
/// right one), greedily accepted by value while keeping `min_sep` samples
/// apart. With `circular`, neighbours and separations wrap around.
pub(crate) fn greedy_maxima<T: Real>(
    values: &[T],
    k: usize,
    min_sep: usize,
    circular: bool,
) -> Vec<usize> {
    let n = values.len();
    if n < 3 {
        return Vec::new();
    }
    let mut cands: Vec<usize> = (0..n)
        .filter(|&i| {
            let (l, r) = if circular {
                ((i + n - 1) % n, (i + 1) % n)
            } else if i == 0 || i == n - 1 {
                return false;
            } else {
                (i - 1, i + 1)
            };
            values[i] > values[l] && values[i] >= values[r]
        })
        .collect();
    cands.sort_by(|&a, &b| {
        values[b]
            .partial_cmp(&values[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let dist = |a: usize, b: usize| {
        let d = a.abs_diff(b);
        if circular {
            d.min(n - d)
        } else {
            d
        }
    };
    let mut picked: Vec<usize> = Vec::with_capacity(k);
    for c in cands {
        if picked.len() == k {
            break;
        }
        if picked.iter().all(|&p| dist(p, c) >= min_sep) {
            picked.push(c);
        }
    }
    picked
}

/// Vertex offset in `[-0.5, 0.5]` of the parabola through three samples
/// centred on a maximum.
pub(crate) fn parabolic_offset<T: Real>(left: T, centre: T, right: T) -> T {
    let denom = left - centre - centre + right;
    if !(denom < T::zero()) {
        return T::zero();
    }
    let half: T = cast(0.5);
    let off = half * (left - right) / denom;
    off.max(-half).min(half)
}
