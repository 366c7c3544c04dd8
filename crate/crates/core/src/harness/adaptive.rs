//! Two-phase acquisition that picks its own attenuation level.
//!
//! Phase one runs a short laser-off burst and fits the constant background
//! flux; phase two applies the first-order optimal attenuation
//! `1 / (B * phi_hat)` (clamped to full transmission) and acquires the
//! actual depth histogram, decoded with the pile-up correction. A failed
//! or zero background fit falls back to no attenuation and flags it.

use super::DOMAIN_ADAPT;
use crate::estimators::{coates_correct, coates_depth, estimate_background, DepthEstimate};
use crate::histogram::{sample_histogram, DetectionDistribution};
use crate::photon::{ConfigError, FluxConfig, PulseShape, Waveform};
use crate::rng::stream_rng;
use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveSpec {
    pub num_bins: usize,
    pub bin_width: f64,
    /// Cycles spent estimating the background before the laser turns on.
    pub laser_off_cycles: u64,
    pub laser_on_cycles: u64,
}

impl Default for AdaptiveSpec {
    fn default() -> Self {
        AdaptiveSpec {
            num_bins: 1000,
            bin_width: 100e-12,
            laser_off_cycles: 30,
            laser_on_cycles: 500,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveOutcome {
    /// Fitted background flux, `None` when the fit itself errored.
    pub phi_bkg_hat: Option<f64>,
    /// Attenuation applied in phase two.
    pub upsilon: f64,
    /// True when the fit failed or returned zero and phase two ran
    /// unattenuated.
    pub fallback: bool,
    pub estimate: DepthEstimate,
}

/// Picks the attenuation from a laser-off burst sampled with `rng`.
/// Returns `(upsilon, phi_hat, fallback)`.
pub(crate) fn upsilon_from_laser_off(
    phi_bkg: f64,
    num_bins: usize,
    cycles: u64,
    rng: &mut impl Rng,
) -> (f64, Option<f64>, bool) {
    let w = Waveform::constant(phi_bkg, num_bins).expect("background rate validated");
    let dist = DetectionDistribution::from_waveform(&w);
    let h = sample_histogram(&dist, cycles, rng);
    match estimate_background(&h) {
        Ok(phi_hat) if phi_hat > 0.0 => {
            let upsilon = (1.0 / (num_bins as f64 * phi_hat)).min(1.0);
            (upsilon, Some(phi_hat), false)
        }
        Ok(phi_hat) => (1.0, Some(phi_hat), true),
        Err(_) => (1.0, None, true),
    }
}

/// One adaptive acquisition of a scene point with true parameters
/// `(phi_sig, phi_bkg, tau)`. `point_index` keys the RNG streams so a batch
/// of acquisitions stays reproducible under any parallel schedule.
pub fn adaptive_acquire(
    spec: &AdaptiveSpec,
    phi_sig: f64,
    phi_bkg: f64,
    tau: usize,
    master_seed: u64,
    point_index: u64,
) -> Result<AdaptiveOutcome, ConfigError> {
    // validate scene parameters before spending any cycles
    FluxConfig::new(
        phi_sig,
        phi_bkg,
        spec.num_bins,
        tau,
        1.0,
        spec.bin_width,
    )?;
    let mut rng_off = stream_rng(master_seed, &[DOMAIN_ADAPT, point_index, 0]);
    let (upsilon, phi_bkg_hat, fallback) =
        upsilon_from_laser_off(phi_bkg, spec.num_bins, spec.laser_off_cycles, &mut rng_off);

    let cfg = FluxConfig::new(
        phi_sig,
        phi_bkg,
        spec.num_bins,
        tau,
        upsilon,
        spec.bin_width,
    )?;
    let w = Waveform::from_config(&cfg, &PulseShape::Delta)?;
    let dist = DetectionDistribution::from_waveform(&w);
    let mut rng_on = stream_rng(master_seed, &[DOMAIN_ADAPT, point_index, 1]);
    let h = sample_histogram(&dist, spec.laser_on_cycles, &mut rng_on);
    let estimate = coates_depth(&coates_correct(&h), spec.bin_width);
    Ok(AdaptiveOutcome {
        phi_bkg_hat,
        upsilon,
        fallback,
        estimate,
    })
}
