//! Statistical model of single-photon pulsed LiDAR under high ambient flux.
//!
//! A SPAD-based time-correlated acquisition records at most the first photon
//! per laser cycle, so bright scenes skew the timing histogram toward early
//! bins (pile-up). This crate simulates that acquisition exactly, inverts
//! the distortion to recover per-bin flux and depth, derives the flux
//! attenuation level that minimizes depth error, and runs the seeded Monte
//! Carlo experiments that tie those pieces together.

pub mod estimators;
pub mod harness;
pub mod histogram;
pub mod photon;
pub mod receptivity;
pub mod rng;

pub use estimators::{
    argmax_depth, bayes_depth, coates_correct, coates_depth, estimate_background, map_depth,
    map_posterior, DepthEstimate, EstimatorKind, Posterior, WaveformEstimate,
};
pub use histogram::{sample_histogram, DetectionDistribution, Histogram};
pub use photon::{FluxConfig, PulseShape, Waveform, SPEED_OF_LIGHT};
pub use receptivity::{optimal_attenuation, OptimalAttenuation, ReceptivityCurve};
