//! Physical constants and the default simulation configuration.
//!
//! Every default used by the scenario runner, the sweeps and the CLI is
//! defined here.

/// Speed of light in vacuum, m/s. Ranges are reported as `c * delay`.
pub const SPEED_OF_LIGHT_M_S: f64 = 299_792_458.0;

/// ADC sample rate, Hz.
pub const SAMPLE_RATE_HZ: f64 = 2.0e6;
/// FM carrier offset from complex-baseband zero before down-conversion, Hz.
pub const CARRIER_OFFSET_HZ: f64 = 90.0e3;
/// Peak FM frequency deviation, Hz.
pub const FREQ_DEVIATION_HZ: f64 = 75.0e3;
/// Spacing between adjacent FM channels, Hz.
pub const CHANNEL_SPACING_HZ: f64 = 200.0e3;
/// Bandwidth of the synthetic programme (message) signal, Hz.
pub const AUDIO_BANDWIDTH_HZ: f64 = 15.0e3;
/// Widest occupied band an FM broadcast composite may use, Hz.
pub const MAX_OCCUPIED_BANDWIDTH_HZ: f64 = 20.0e6;

/// Record length in samples.
pub const N_SAMPLES: usize = 1 << 16;
/// Direct-path amplitude.
pub const DIRECT_AMPLITUDE: f64 = 1.0;
/// Amplitude of each target echo.
pub const ECHO_AMPLITUDE: f64 = 0.1;
/// Surveillance-channel SNR per echo, dB.
pub const SNR_DB: f64 = 20.0;
/// Delay of the nearer target, s.
pub const BASE_DELAY_S: f64 = 20.0e-6;

/// Relative regularization of the spectral division.
pub const QUOTIENT_EPS_REL: f64 = 1.0e-3;

/// Number of sources assumed by MUSIC.
pub const MUSIC_SOURCES: usize = 2;
/// Pseudospectrum grid size over the full unambiguous delay span.
pub const MUSIC_GRID: usize = 4096;

/// Fraction of trials that must resolve for a separation to count.
pub const RESOLVE_RATE_THRESHOLD: f64 = 0.9;
/// Trials per separation in the resolution sweep.
pub const SWEEP_TRIALS: usize = 25;
/// Peak-to-truth tolerance as a fraction of the true separation.
pub const RESOLVE_TOL_FRAC: f64 = 0.5;
/// Required depth of the valley between two resolved peaks, dB.
pub const RESOLVE_VALLEY_DB: f64 = 3.0;
/// Separation grid of the resolution sweep, m.
pub const SWEEP_SEPARATIONS_M: [f64; 6] = [3000.0, 2000.0, 1000.0, 500.0, 300.0, 150.0];
/// Channel counts studied.
pub const CHANNEL_COUNTS: [usize; 3] = [1, 3, 7];
