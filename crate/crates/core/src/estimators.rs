//! Depth and flux estimators operating on first-photon histograms.
//!
//! The pile-up correction reconstructs each bin's detection probability from
//! the cycles that were still undetected when the bin opened:
//!
//! ```text
//! D_i = N - sum_{j<i} N_j        cycles at risk at bin i
//! q_hat_i = N_i / D_i            per-bin detection probability
//! r_hat_i = ln(1 / (1 - q_hat_i))  per-bin flux
//! ```
//!
//! `q_hat_i` is undefined when no cycle reached bin `i`, and saturates to
//! infinite flux when every one of them fired there. Depth is the flux
//! argmax. The naive alternative (argmax of raw counts) is kept as the
//! distortion baseline, and a full per-depth posterior supports MAP and
//! Bayes readouts when the flux parameters are known.

use crate::histogram::Histogram;
use crate::photon::{distance_for_bin, Waveform};
use std::f64::consts::TAU as TWO_PI;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// Clamp applied to per-bin detection probabilities before taking logs.
const LOG_CLAMP: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum EstimateError {
    #[error("histogram carries no information about the background (no detections past bin 1)")]
    InsufficientSpread,
    #[error("background estimate came out negative: {0}")]
    NegativeBackground(f64),
    #[error("unknown estimator '{0}', expected coates|argmax|map|bayes")]
    UnknownEstimator(String),
    #[error("{0} estimation needs strictly positive flux parameters")]
    MissingFluxParameters(&'static str),
}

/// Pile-up-corrected per-bin estimates recovered from one histogram.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveformEstimate {
    q_hat: Vec<Option<f64>>,
    r_hat: Vec<Option<f64>>,
    cycles_at_risk: Vec<u64>,
}

impl WaveformEstimate {
    /// Detection probability per bin; `None` where no cycle was at risk.
    pub fn q_hat(&self) -> &[Option<f64>] {
        &self.q_hat
    }

    /// Flux per bin; `None` where undefined, `+inf` where every cycle at
    /// risk detected (flux too high to quantify).
    pub fn r_hat(&self) -> &[Option<f64>] {
        &self.r_hat
    }

    /// `D_i`: cycles still undetected when bin `i` opened.
    pub fn cycles_at_risk(&self) -> &[u64] {
        &self.cycles_at_risk
    }

    pub fn num_bins(&self) -> usize {
        self.q_hat.len()
    }
}

/// Pile-up correction of a histogram (per-bin maximum likelihood).
pub fn coates_correct(h: &Histogram) -> WaveformEstimate {
    let b = h.num_bins();
    let mut q_hat = Vec::with_capacity(b);
    let mut r_hat = Vec::with_capacity(b);
    let mut cycles_at_risk = Vec::with_capacity(b);
    let mut at_risk = h.num_cycles();
    for &n_i in h.detected() {
        cycles_at_risk.push(at_risk);
        if at_risk == 0 {
            q_hat.push(None);
            r_hat.push(None);
        } else {
            let q = n_i as f64 / at_risk as f64;
            q_hat.push(Some(q));
            r_hat.push(Some(if n_i == at_risk {
                f64::INFINITY
            } else {
                -(-q).ln_1p()
            }));
        }
        at_risk -= n_i;
    }
    WaveformEstimate {
        q_hat,
        r_hat,
        cycles_at_risk,
    }
}

/// One depth readout. `bin` is 1-based; invalid estimates (no defined bin
/// to pick) carry `bin == 0` and a NaN distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepthEstimate {
    pub bin: usize,
    pub distance_m: f64,
    pub valid: bool,
}

impl DepthEstimate {
    pub fn from_bin(bin: usize, bin_width: f64) -> Self {
        DepthEstimate {
            bin,
            distance_m: distance_for_bin(bin, bin_width),
            valid: true,
        }
    }

    pub fn invalid() -> Self {
        DepthEstimate {
            bin: 0,
            distance_m: f64::NAN,
            valid: false,
        }
    }
}

/// Depth from a pile-up-corrected estimate: argmax of `r_hat` over defined
/// bins, ties to the smallest bin. Invalid when no bin is defined.
pub fn coates_depth(est: &WaveformEstimate, bin_width: f64) -> DepthEstimate {
    let mut best: Option<(usize, f64)> = None;
    for (i, r) in est.r_hat().iter().enumerate() {
        if let Some(r) = *r {
            match best {
                Some((_, cur)) if r <= cur => {}
                _ => best = Some((i, r)),
            }
        }
    }
    match best {
        Some((i, _)) => DepthEstimate::from_bin(i + 1, bin_width),
        None => DepthEstimate::invalid(),
    }
}

/// Uncorrected baseline: argmax of raw per-bin counts, ties to the smallest
/// bin. Invalid when the histogram saw no detection at all.
pub fn argmax_depth(h: &Histogram, bin_width: f64) -> DepthEstimate {
    let mut best: Option<(usize, u64)> = None;
    for (i, &n) in h.detected().iter().enumerate() {
        match best {
            Some((_, cur)) if n <= cur => {}
            _ => best = Some((i, n)),
        }
    }
    match best {
        Some((_, 0)) | None => DepthEstimate::invalid(),
        Some((i, _)) => DepthEstimate::from_bin(i + 1, bin_width),
    }
}

/// Posterior over the true depth bin given a histogram and known flux
/// parameters (ideal delta pulse).
#[derive(Debug, Clone, PartialEq)]
pub struct Posterior {
    log_weights: Vec<f64>,
    probs: Vec<f64>,
}

impl Posterior {
    /// Normalized posterior probability of each depth bin (1-based bin
    /// `d` sits at index `d - 1`). Sums to 1.
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Unnormalized log posterior, same indexing as `probs`.
    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    pub fn num_bins(&self) -> usize {
        self.probs.len()
    }

    /// Mode, ties to the smallest bin.
    pub fn map_bin(&self) -> usize {
        let mut best = 0usize;
        for (i, &p) in self.probs.iter().enumerate() {
            if p > self.probs[best] {
                best = i;
            }
        }
        best + 1
    }

    /// Circular posterior mean, rounded to the nearest bin. Depth wraps
    /// modulo B, so bins are averaged as angles on the cycle; a posterior
    /// with no direction (resultant ~ 0) falls back to the mode.
    pub fn bayes_bin(&self) -> usize {
        let b = self.probs.len() as f64;
        let (mut sin_sum, mut cos_sum) = (0.0, 0.0);
        for (i, &p) in self.probs.iter().enumerate() {
            let angle = TWO_PI * (i + 1) as f64 / b;
            sin_sum += p * angle.sin();
            cos_sum += p * angle.cos();
        }
        if sin_sum.hypot(cos_sum) < 1e-12 {
            return self.map_bin();
        }
        let frac = (sin_sum.atan2(cos_sum) / TWO_PI * b).rem_euclid(b);
        let bin = frac.round() as usize;
        if bin == 0 {
            self.probs.len()
        } else {
            bin
        }
    }
}

/// Depth posterior for known `phi_sig`, `phi_bkg`, `upsilon`.
///
/// Candidate depth `d` predicts detection probability
/// `q_s = 1 - exp(-upsilon * (phi_sig + phi_bkg))` at bin `d` and
/// `q_b = 1 - exp(-upsilon * phi_bkg)` elsewhere. The log-likelihood of the
/// observed counts is the sum of per-bin binomial terms over the cycles at
/// risk, which reduces to a base value plus a two-term correction at `d`:
///
/// ```text
/// log P(d) = const + N_d (ln q_s - ln q_b) + (D_d - N_d)(ln(1-q_s) - ln(1-q_b))
/// ```
///
/// Probabilities are clamped away from 0 and 1 before the logs so zero
/// background stays finite.
pub fn map_posterior(h: &Histogram, phi_sig: f64, phi_bkg: f64, upsilon: f64) -> Posterior {
    let clamp = |q: f64| q.clamp(LOG_CLAMP, 1.0 - LOG_CLAMP);
    let q_b = clamp(-(-upsilon * phi_bkg).exp_m1());
    let q_s = clamp(-(-upsilon * (phi_sig + phi_bkg)).exp_m1());
    let (ln_qb, ln_qs) = (q_b.ln(), q_s.ln());
    let (ln_mb, ln_ms) = ((-q_b).ln_1p(), (-q_s).ln_1p());

    let b = h.num_bins();
    let mut log_weights = Vec::with_capacity(b);
    let mut at_risk = h.num_cycles();
    for &n_d in h.detected() {
        let n = n_d as f64;
        let d_minus_n = (at_risk - n_d) as f64;
        log_weights.push(n * (ln_qs - ln_qb) + d_minus_n * (ln_ms - ln_mb));
        at_risk -= n_d;
    }

    let max = log_weights.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut probs: Vec<f64> = log_weights.iter().map(|&w| (w - max).exp()).collect();
    let total: f64 = probs.iter().sum();
    for p in &mut probs {
        *p /= total;
    }
    Posterior { log_weights, probs }
}

/// Depth at the posterior mode.
pub fn map_depth(post: &Posterior, bin_width: f64) -> DepthEstimate {
    DepthEstimate::from_bin(post.map_bin(), bin_width)
}

/// Depth at the circular posterior mean.
pub fn bayes_depth(post: &Posterior, bin_width: f64) -> DepthEstimate {
    DepthEstimate::from_bin(post.bayes_bin(), bin_width)
}

/// Maximum-likelihood constant background flux from a laser-off histogram,
/// in photons per bin per cycle. Works on real-valued counts so expected
/// (noise-free) histograms can be inverted exactly.
pub fn background_flux_mle(counts: &[f64], num_cycles: f64) -> Result<f64, EstimateError> {
    let b = counts.len() - 1;
    // detections weighted by bin index, empty cycles weighted at bin B
    let mut weighted: f64 = 0.0;
    for (i, &c) in counts.iter().enumerate() {
        let bin = if i < b { i + 1 } else { b };
        weighted += bin as f64 * c;
    }
    // empty cycles move up one more bin in the denominator, which shifts
    // the whole sum by exactly one mean detection time
    let numerator = weighted;
    let denominator = weighted + counts[b] - num_cycles;
    if denominator <= 0.0 {
        return Err(EstimateError::InsufficientSpread);
    }
    let phi = (numerator / denominator).ln();
    if phi < 0.0 {
        return Err(EstimateError::NegativeBackground(phi));
    }
    Ok(phi)
}

/// `background_flux_mle` on an integer histogram.
pub fn estimate_background(h: &Histogram) -> Result<f64, EstimateError> {
    let counts: Vec<f64> = h.counts().iter().map(|&c| c as f64).collect();
    background_flux_mle(&counts, h.num_cycles() as f64)
}

/// Per-bin variance of the pile-up-corrected probability estimates,
/// `q_i^2 (1 - q_i) / (N p_i)`. `None` where the bin can never be observed
/// (`p_i = 0`).
pub fn coates_variance(w: &Waveform, num_cycles: u64) -> Vec<Option<f64>> {
    let dist = crate::histogram::DetectionDistribution::from_waveform(w);
    let n = num_cycles as f64;
    w.rates()
        .iter()
        .zip(dist.probs())
        .map(|(&r, &p)| {
            if p > 0.0 {
                let q = -(-r).exp_m1();
                Some(q * q * (1.0 - q) / (n * p))
            } else {
                None
            }
        })
        .collect()
}

/// Low-flux approximation of `coates_variance`: `r_i * r / (N * C_i)` with
/// `C_i` the bin receptivity, which simplifies to `r_i^2 / (N p_i)`.
pub fn coates_variance_approx(w: &Waveform, num_cycles: u64) -> Vec<Option<f64>> {
    let dist = crate::histogram::DetectionDistribution::from_waveform(w);
    let n = num_cycles as f64;
    w.rates()
        .iter()
        .zip(dist.probs())
        .map(|(&r, &p)| (p > 0.0).then(|| r * r / (n * p)))
        .collect()
}

/// Depth estimator selector used by sweeps, scenes and the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimatorKind {
    Coates,
    Argmax,
    Map,
    Bayes,
}

impl EstimatorKind {
    /// Whether the estimator needs `phi_sig`/`phi_bkg`/`upsilon` as input.
    pub fn needs_flux(&self) -> bool {
        matches!(self, EstimatorKind::Map | EstimatorKind::Bayes)
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            EstimatorKind::Coates => "coates",
            EstimatorKind::Argmax => "argmax",
            EstimatorKind::Map => "map",
            EstimatorKind::Bayes => "bayes",
        };
        f.write_str(name)
    }
}

impl FromStr for EstimatorKind {
    type Err = EstimateError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "coates" => Ok(EstimatorKind::Coates),
            "argmax" => Ok(EstimatorKind::Argmax),
            "map" => Ok(EstimatorKind::Map),
            "bayes" => Ok(EstimatorKind::Bayes),
            other => Err(EstimateError::UnknownEstimator(other.into())),
        }
    }
}
