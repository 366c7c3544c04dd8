//! Incident photon flux model for a pulsed source observed through a cyclic
//! acquisition of `B` discrete time bins.
//!
//! All fluxes are photon counts per bin per laser cycle, already folded with
//! detector efficiency. A scene point at bin `tau` contributes `phi_sig`
//! photons spread over the pulse shape; ambient light and dark counts
//! contribute a constant `phi_bkg` per bin. An attenuation fraction
//! `upsilon` in (0, 1] scales both.

use thiserror::Error;

/// Speed of light in vacuum [m/s].
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("signal flux must be finite and non-negative, got {0}")]
    InvalidSignalFlux(f64),
    #[error("background flux must be finite and non-negative, got {0}")]
    InvalidBackgroundFlux(f64),
    #[error("signal and background flux cannot both be zero")]
    ZeroFlux,
    #[error("need at least 2 bins, got {0}")]
    TooFewBins(usize),
    #[error("true depth bin {tau} outside 1..={num_bins}")]
    DepthBinOutOfRange { tau: usize, num_bins: usize },
    #[error("attenuation fraction must lie in (0, 1], got {0}")]
    InvalidAttenuation(f64),
    #[error("bin width must be finite and positive, got {0}")]
    InvalidBinWidth(f64),
    #[error("pulse profile must be non-empty")]
    EmptyProfile,
    #[error("pulse profile weight at index {0} is negative or not finite")]
    InvalidProfileWeight(usize),
    #[error("pulse profile sums to {0}, expected 1")]
    ProfileNotNormalized(f64),
    #[error("pulse profile has {len} taps but the cycle only has {num_bins} bins")]
    ProfileTooLong { len: usize, num_bins: usize },
    #[error("waveform must be non-empty")]
    EmptyWaveform,
    #[error("waveform rate at bin {0} is negative or not finite")]
    InvalidRate(usize),
}

/// Temporal shape of the laser pulse, discretized to histogram bins.
#[derive(Debug, Clone, PartialEq)]
pub enum PulseShape {
    /// All signal photons arrive in the single bin `tau`.
    Delta,
    /// Unit-sum weights. The middle tap (index `len / 2`) lands on `tau`;
    /// the remainder wraps cyclically around the `B`-bin period.
    Profile(Vec<f64>),
}

impl PulseShape {
    /// Validates a custom profile: non-negative finite taps summing to 1.
    pub fn profile(weights: Vec<f64>) -> Result<Self, ConfigError> {
        if weights.is_empty() {
            return Err(ConfigError::EmptyProfile);
        }
        for (i, &w) in weights.iter().enumerate() {
            if !w.is_finite() || w < 0.0 {
                return Err(ConfigError::InvalidProfileWeight(i));
            }
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(ConfigError::ProfileNotNormalized(sum));
        }
        Ok(PulseShape::Profile(weights))
    }

    /// Sampled Gaussian of standard deviation `sigma_bins`, truncated at
    /// `radius_bins` either side of the peak and renormalized.
    pub fn gaussian(sigma_bins: f64, radius_bins: usize) -> Result<Self, ConfigError> {
        if !(sigma_bins.is_finite() && sigma_bins > 0.0) {
            return Err(ConfigError::InvalidProfileWeight(0));
        }
        let mut weights: Vec<f64> = (-(radius_bins as i64)..=radius_bins as i64)
            .map(|k| (-0.5 * (k as f64 / sigma_bins).powi(2)).exp())
            .collect();
        let sum: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= sum;
        }
        Ok(PulseShape::Profile(weights))
    }

    fn len(&self) -> usize {
        match self {
            PulseShape::Delta => 1,
            PulseShape::Profile(w) => w.len(),
        }
    }
}

/// Scene and acquisition parameters for one illuminated point.
#[derive(Debug, Clone, PartialEq)]
pub struct FluxConfig {
    phi_sig: f64,
    phi_bkg: f64,
    num_bins: usize,
    tau: usize,
    upsilon: f64,
    bin_width: f64,
}

impl FluxConfig {
    pub fn new(
        phi_sig: f64,
        phi_bkg: f64,
        num_bins: usize,
        tau: usize,
        upsilon: f64,
        bin_width: f64,
    ) -> Result<Self, ConfigError> {
        if !phi_sig.is_finite() || phi_sig < 0.0 {
            return Err(ConfigError::InvalidSignalFlux(phi_sig));
        }
        if !phi_bkg.is_finite() || phi_bkg < 0.0 {
            return Err(ConfigError::InvalidBackgroundFlux(phi_bkg));
        }
        if phi_sig == 0.0 && phi_bkg == 0.0 {
            return Err(ConfigError::ZeroFlux);
        }
        if num_bins < 2 {
            return Err(ConfigError::TooFewBins(num_bins));
        }
        if tau < 1 || tau > num_bins {
            return Err(ConfigError::DepthBinOutOfRange { tau, num_bins });
        }
        if !upsilon.is_finite() || upsilon <= 0.0 || upsilon > 1.0 {
            return Err(ConfigError::InvalidAttenuation(upsilon));
        }
        if !bin_width.is_finite() || bin_width <= 0.0 {
            return Err(ConfigError::InvalidBinWidth(bin_width));
        }
        Ok(FluxConfig {
            phi_sig,
            phi_bkg,
            num_bins,
            tau,
            upsilon,
            bin_width,
        })
    }

    pub fn phi_sig(&self) -> f64 {
        self.phi_sig
    }

    pub fn phi_bkg(&self) -> f64 {
        self.phi_bkg
    }

    pub fn num_bins(&self) -> usize {
        self.num_bins
    }

    pub fn tau(&self) -> usize {
        self.tau
    }

    pub fn upsilon(&self) -> f64 {
        self.upsilon
    }

    pub fn bin_width(&self) -> f64 {
        self.bin_width
    }

    /// Unambiguous depth range: half the round-trip distance light covers
    /// in one full cycle of `B` bins.
    pub fn d_max(&self) -> f64 {
        distance_for_bin(self.num_bins, self.bin_width)
    }
}

/// Round-trip-corrected distance of a bin index: `c * bin * bin_width / 2`.
pub fn distance_for_bin(bin: usize, bin_width: f64) -> f64 {
    SPEED_OF_LIGHT * bin as f64 * bin_width / 2.0
}

/// Per-bin expected incident photons in one cycle.
///
/// Bin `i` carries `upsilon * (phi_sig * w_i + phi_bkg)` where `w` is the
/// pulse shape placed at `tau`.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    rates: Vec<f64>,
}

impl Waveform {
    /// Validates raw per-bin rates: finite, non-negative, at least one bin.
    pub fn new(rates: Vec<f64>) -> Result<Self, ConfigError> {
        if rates.is_empty() {
            return Err(ConfigError::EmptyWaveform);
        }
        for (i, &r) in rates.iter().enumerate() {
            if !r.is_finite() || r < 0.0 {
                return Err(ConfigError::InvalidRate(i));
            }
        }
        Ok(Waveform { rates })
    }

    /// Constant rate in every bin; the laser-off (background only) case.
    pub fn constant(rate: f64, num_bins: usize) -> Result<Self, ConfigError> {
        Waveform::new(vec![rate; num_bins])
    }

    pub fn from_config(cfg: &FluxConfig, pulse: &PulseShape) -> Result<Self, ConfigError> {
        let b = cfg.num_bins;
        if pulse.len() > b {
            return Err(ConfigError::ProfileTooLong {
                len: pulse.len(),
                num_bins: b,
            });
        }
        let mut rates = vec![cfg.upsilon * cfg.phi_bkg; b];
        match pulse {
            PulseShape::Delta => rates[cfg.tau - 1] += cfg.upsilon * cfg.phi_sig,
            PulseShape::Profile(weights) => {
                let center = weights.len() / 2;
                for (k, &w) in weights.iter().enumerate() {
                    // 0-based target bin, wrapped over the cycle.
                    let offset = k as i64 - center as i64;
                    let bin = (cfg.tau as i64 - 1 + offset).rem_euclid(b as i64) as usize;
                    rates[bin] += cfg.upsilon * cfg.phi_sig * w;
                }
            }
        }
        Waveform::new(rates)
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn num_bins(&self) -> usize {
        self.rates.len()
    }

    /// Total expected incident photons per cycle.
    pub fn total_flux(&self) -> f64 {
        self.rates.iter().sum()
    }
}
