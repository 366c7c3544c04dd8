//! Pixel-array simulation: one independent acquisition per scene point
//! under a global or per-pixel attenuation policy.

use super::adaptive::upsilon_from_laser_off;
use super::grid::Grid;
use super::{wrapped_error, DOMAIN_SCENE};
use crate::estimators::{
    argmax_depth, bayes_depth, coates_correct, coates_depth, map_depth, map_posterior,
    EstimatorKind,
};
use crate::histogram::{sample_histogram, DetectionDistribution};
use crate::photon::{distance_for_bin, ConfigError, FluxConfig, PulseShape, Waveform};
use crate::receptivity::optimal_attenuation;
use crate::rng::stream_rng;
use rayon::prelude::*;
use std::fmt::Write as _;
use thiserror::Error;

/// Incident fraction that the "attenuate to a few percent of cycles"
/// convention pins the extreme policy at: `upsilon * B * phi_bkg = 0.05`.
pub const EXTREME_INCIDENT_FRACTION: f64 = 0.05;

#[derive(Debug, Error, PartialEq)]
pub enum SceneError {
    #[error("{map} map is {got_h}x{got_w}, depth map is {h}x{w}")]
    MismatchedMaps {
        map: &'static str,
        got_h: usize,
        got_w: usize,
        h: usize,
        w: usize,
    },
    #[error("depth bin {bin} at pixel ({row}, {col}) outside 1..={num_bins}")]
    DepthOutOfRange {
        bin: u32,
        row: usize,
        col: usize,
        num_bins: usize,
    },
    #[error("attenuation policy needs a positive background flux, got mean {0}")]
    NoBackground(f64),
    #[error("pixel pitch must be finite and positive, got {0}")]
    InvalidPitch(f64),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Receptivity(#[from] crate::receptivity::ReceptivityError),
}

/// Scalar or per-pixel flux level.
#[derive(Debug, Clone, PartialEq)]
pub enum FluxField {
    Uniform(f64),
    PerPixel(Grid<f64>),
}

impl FluxField {
    fn at(&self, row: usize, col: usize) -> f64 {
        match self {
            FluxField::Uniform(v) => *v,
            FluxField::PerPixel(g) => *g.at(row, col),
        }
    }

    fn mean(&self) -> f64 {
        match self {
            FluxField::Uniform(v) => *v,
            FluxField::PerPixel(g) => g.data().iter().sum::<f64>() / g.len() as f64,
        }
    }

    fn check_shape(
        &self,
        name: &'static str,
        h: usize,
        w: usize,
    ) -> Result<(), SceneError> {
        match self {
            FluxField::Uniform(_) => Ok(()),
            FluxField::PerPixel(g) if g.height() == h && g.width() == w => Ok(()),
            FluxField::PerPixel(g) => Err(SceneError::MismatchedMaps {
                map: name,
                got_h: g.height(),
                got_w: g.width(),
                h,
                w,
            }),
        }
    }
}

/// How each pixel's neutral-density attenuation is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttenuationPolicy {
    /// Full transmission everywhere.
    None,
    /// Scene-average incident background forced down to
    /// `EXTREME_INCIDENT_FRACTION` photons per cycle.
    Extreme,
    /// First-order optimum `1 / (B * phi_bkg)` from the scene-average
    /// background.
    OptimalGlobal,
    /// Per-pixel laser-off background fit, then the first-order optimum of
    /// the fitted value.
    OptimalPerPixel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneJob {
    pub depth: Grid<u32>,
    pub phi_sig: FluxField,
    pub phi_bkg: FluxField,
    pub num_bins: usize,
    pub num_cycles: u64,
    pub bin_width: f64,
    /// Pixel spacing of the emitted point cloud [m].
    pub pixel_pitch: f64,
    pub policy: AttenuationPolicy,
    pub estimator: EstimatorKind,
    /// Laser-off budget for the per-pixel policy.
    pub laser_off_cycles: u64,
    /// A pixel counts as an inlier when |wrapped error| <= this.
    pub inlier_threshold_bins: u32,
    pub master_seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneResult {
    /// Estimated depth bin per pixel; 0 marks an invalid estimate.
    pub estimated: Grid<u32>,
    /// Signed wrapped error per pixel; NaN where invalid.
    pub errors: Grid<f64>,
    /// Attenuation applied per pixel.
    pub upsilon: Grid<f64>,
    /// Background fitted per pixel (per-pixel policy only, else NaN).
    pub phi_bkg_hat: Grid<f64>,
    pub inlier_pct: f64,
    /// Over all pixels, invalid ones scored at the maximal error B/2.
    pub rmse_bins: f64,
    pub invalid_pixels: u32,
    pub master_seed: u64,
    num_bins: usize,
    bin_width: f64,
    pixel_pitch: f64,
}

impl SceneResult {
    /// ASCII point cloud, one `x y z` line per valid pixel. x spans
    /// columns, y rows, z is the round-trip-corrected bin distance.
    pub fn point_cloud(&self) -> String {
        let mut out = String::new();
        writeln!(out, "# seed={}", self.master_seed).unwrap();
        for r in 0..self.estimated.height() {
            for c in 0..self.estimated.width() {
                let bin = *self.estimated.at(r, c);
                if bin == 0 {
                    continue;
                }
                let x = c as f64 * self.pixel_pitch;
                let y = r as f64 * self.pixel_pitch;
                let z = distance_for_bin(bin as usize, self.bin_width);
                writeln!(out, "{x} {y} {z}").unwrap();
            }
        }
        out
    }

    pub fn summary(&self) -> String {
        format!(
            "# seed={}\npixels={} invalid={} inlier_pct={} rmse_bins={} num_bins={}\n",
            self.master_seed,
            self.estimated.len(),
            self.invalid_pixels,
            self.inlier_pct,
            self.rmse_bins,
            self.num_bins,
        )
    }
}

/// Attenuation for the global policies; per-pixel is resolved inside the
/// pixel loop.
fn global_upsilon(job: &SceneJob) -> Result<Option<f64>, SceneError> {
    match job.policy {
        AttenuationPolicy::None => Ok(Some(1.0)),
        AttenuationPolicy::Extreme => {
            let mean = job.phi_bkg.mean();
            if mean <= 0.0 {
                return Err(SceneError::NoBackground(mean));
            }
            let upsilon = EXTREME_INCIDENT_FRACTION / (job.num_bins as f64 * mean);
            Ok(Some(upsilon.min(1.0)))
        }
        AttenuationPolicy::OptimalGlobal => {
            let mean = job.phi_bkg.mean();
            if mean <= 0.0 {
                return Err(SceneError::NoBackground(mean));
            }
            Ok(Some(optimal_attenuation(mean, job.num_bins)?.approx))
        }
        AttenuationPolicy::OptimalPerPixel => Ok(None),
    }
}

pub fn simulate_scene(job: &SceneJob) -> Result<SceneResult, SceneError> {
    let (h, w) = (job.depth.height(), job.depth.width());
    job.phi_sig.check_shape("phi_sig", h, w)?;
    job.phi_bkg.check_shape("phi_bkg", h, w)?;
    if !job.pixel_pitch.is_finite() || job.pixel_pitch <= 0.0 {
        return Err(SceneError::InvalidPitch(job.pixel_pitch));
    }
    for r in 0..h {
        for c in 0..w {
            let bin = *job.depth.at(r, c);
            if bin < 1 || bin as usize > job.num_bins {
                return Err(SceneError::DepthOutOfRange {
                    bin,
                    row: r,
                    col: c,
                    num_bins: job.num_bins,
                });
            }
        }
    }
    let fixed_upsilon = global_upsilon(job)?;

    struct PixelOutcome {
        bin: u32,
        err: f64,
        upsilon: f64,
        phi_hat: f64,
    }

    let outcomes: Vec<Result<PixelOutcome, SceneError>> = (0..h * w)
        .into_par_iter()
        .map(|idx| {
            let (r, c) = (idx / w, idx % w);
            let tau = *job.depth.at(r, c) as usize;
            let phi_sig = job.phi_sig.at(r, c);
            let phi_bkg = job.phi_bkg.at(r, c);
            let (upsilon, phi_hat) = match fixed_upsilon {
                Some(u) => (u, f64::NAN),
                None => {
                    let mut rng_off =
                        stream_rng(job.master_seed, &[DOMAIN_SCENE, idx as u64, 0]);
                    let (u, hat, _fallback) = upsilon_from_laser_off(
                        phi_bkg,
                        job.num_bins,
                        job.laser_off_cycles,
                        &mut rng_off,
                    );
                    (u, hat.unwrap_or(f64::NAN))
                }
            };
            let cfg = FluxConfig::new(
                phi_sig,
                phi_bkg,
                job.num_bins,
                tau,
                upsilon,
                job.bin_width,
            )?;
            let wave = Waveform::from_config(&cfg, &PulseShape::Delta)?;
            let dist = DetectionDistribution::from_waveform(&wave);
            let mut rng = stream_rng(job.master_seed, &[DOMAIN_SCENE, idx as u64, 1]);
            let hist = sample_histogram(&dist, job.num_cycles, &mut rng);
            let est = match job.estimator {
                EstimatorKind::Coates => coates_depth(&coates_correct(&hist), job.bin_width),
                EstimatorKind::Argmax => argmax_depth(&hist, job.bin_width),
                EstimatorKind::Map => map_depth(
                    &map_posterior(&hist, phi_sig, phi_bkg, upsilon),
                    job.bin_width,
                ),
                EstimatorKind::Bayes => bayes_depth(
                    &map_posterior(&hist, phi_sig, phi_bkg, upsilon),
                    job.bin_width,
                ),
            };
            let (bin, err) = if est.valid {
                (
                    est.bin as u32,
                    wrapped_error(est.bin, tau, job.num_bins) as f64,
                )
            } else {
                (0, f64::NAN)
            };
            Ok(PixelOutcome {
                bin,
                err,
                upsilon,
                phi_hat,
            })
        })
        .collect();

    let mut estimated = Grid::filled(h, w, 0u32);
    let mut errors = Grid::filled(h, w, f64::NAN);
    let mut upsilon = Grid::filled(h, w, f64::NAN);
    let mut phi_bkg_hat = Grid::filled(h, w, f64::NAN);
    let mut invalid = 0u32;
    let mut inliers = 0u32;
    let mut sum_sq = 0.0;
    let max_err = job.num_bins as f64 / 2.0;
    for (idx, outcome) in outcomes.into_iter().enumerate() {
        let o = outcome?;
        let (r, c) = (idx / w, idx % w);
        estimated.set(r, c, o.bin);
        errors.set(r, c, o.err);
        upsilon.set(r, c, o.upsilon);
        phi_bkg_hat.set(r, c, o.phi_hat);
        if o.bin == 0 {
            invalid += 1;
            sum_sq += max_err * max_err;
        } else {
            sum_sq += o.err * o.err;
            if o.err.abs() <= job.inlier_threshold_bins as f64 {
                inliers += 1;
            }
        }
    }
    let pixels = (h * w) as f64;
    Ok(SceneResult {
        estimated,
        errors,
        upsilon,
        phi_bkg_hat,
        inlier_pct: 100.0 * inliers as f64 / pixels,
        rmse_bins: (sum_sq / pixels).sqrt(),
        invalid_pixels: invalid,
        master_seed: job.master_seed,
        num_bins: job.num_bins,
        bin_width: job.bin_width,
        pixel_pitch: job.pixel_pitch,
    })
}
