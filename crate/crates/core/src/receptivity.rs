//! Bin receptivity and the optimal flux attenuation derived from it.
//!
//! Receptivity `C_i = r * p_i / r_i` measures how much of a bin's incident
//! flux survives pile-up: the corrected estimate of bin `i` has variance
//! approximately `r_i * r / (N * C_i)`, so a small `C_i` means a noisy bin.
//! Under constant background the curve decays geometrically,
//!
//! ```text
//! C_i = B (1 - exp(-a)) exp(-(i - 1) a),   a = upsilon * phi_bkg
//! ```
//!
//! and the worst bin is always the last one. Attenuation trades average
//! receptivity against that decay; maximizing the last bin's receptivity
//! gives the closed-form optimum `ln(B / (B - 1)) / phi_bkg`, which is
//! `1 / (B * phi_bkg)` to first order.

use crate::photon::{Waveform, SPEED_OF_LIGHT};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ReceptivityError {
    #[error("background flux must be finite and positive, got {0}")]
    InvalidBackgroundFlux(f64),
    #[error("need at least 2 bins, got {0}")]
    TooFewBins(usize),
    #[error("attenuation fraction must lie in (0, 1], got {0}")]
    InvalidAttenuation(f64),
    #[error("signal-to-background ratio must be finite and non-negative, got {0}")]
    InvalidSbr(f64),
    #[error("unambiguous range and bin width give {0} bins, need at least 2")]
    DegenerateRange(usize),
}

/// Per-bin receptivity of a waveform. Entries are strictly positive.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceptivityCurve {
    coeffs: Vec<f64>,
}

impl ReceptivityCurve {
    /// Closed form for constant per-bin background under attenuation.
    pub fn constant_flux(
        upsilon: f64,
        phi_bkg: f64,
        num_bins: usize,
    ) -> Result<Self, ReceptivityError> {
        if !phi_bkg.is_finite() || phi_bkg <= 0.0 {
            return Err(ReceptivityError::InvalidBackgroundFlux(phi_bkg));
        }
        if num_bins < 2 {
            return Err(ReceptivityError::TooFewBins(num_bins));
        }
        if !upsilon.is_finite() || upsilon <= 0.0 || upsilon > 1.0 {
            return Err(ReceptivityError::InvalidAttenuation(upsilon));
        }
        let a = upsilon * phi_bkg;
        let lead = num_bins as f64 * -(-a).exp_m1();
        let coeffs = (0..num_bins)
            .map(|i| lead * (-(i as f64) * a).exp())
            .collect();
        Ok(ReceptivityCurve { coeffs })
    }

    /// General waveform receptivity `r * p_i / r_i`, extended by continuity
    /// to `r * exp(-sum_{k<i} r_k)` where a bin's own rate vanishes.
    pub fn from_waveform(w: &Waveform) -> Self {
        let total = w.total_flux();
        let mut survival = 1.0_f64;
        let coeffs = w
            .rates()
            .iter()
            .map(|&r| {
                // (1 - e^{-r}) / r -> 1 as r -> 0
                let ratio = if r > 1e-8 {
                    -(-r).exp_m1() / r
                } else {
                    1.0 - r / 2.0 + r * r / 6.0
                };
                let c = total * ratio * survival;
                survival *= (-r).exp();
                c
            })
            .collect();
        ReceptivityCurve { coeffs }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn num_bins(&self) -> usize {
        self.coeffs.len()
    }

    pub fn min(&self) -> f64 {
        self.coeffs.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn mean(&self) -> f64 {
        self.coeffs.iter().sum::<f64>() / self.coeffs.len() as f64
    }
}

/// Attenuation fraction that maximizes the worst bin's receptivity. Both
/// forms are clamped into (0, 1]; `clamped` records that the unconstrained
/// value exceeded full transmission.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalAttenuation {
    /// `ln(B / (B - 1)) / phi_bkg`, exact maximizer of the last bin.
    pub exact: f64,
    /// First-order form `1 / (B * phi_bkg)`.
    pub approx: f64,
    pub clamped: bool,
}

pub fn optimal_attenuation(
    phi_bkg: f64,
    num_bins: usize,
) -> Result<OptimalAttenuation, ReceptivityError> {
    if !phi_bkg.is_finite() || phi_bkg <= 0.0 {
        return Err(ReceptivityError::InvalidBackgroundFlux(phi_bkg));
    }
    if num_bins < 2 {
        return Err(ReceptivityError::TooFewBins(num_bins));
    }
    let b = num_bins as f64;
    // ln(B / (B-1)) via ln_1p keeps full precision at large B
    let exact = (1.0 / (b - 1.0)).ln_1p() / phi_bkg;
    let approx = 1.0 / (b * phi_bkg);
    Ok(OptimalAttenuation {
        exact: exact.min(1.0),
        approx: approx.min(1.0),
        clamped: exact > 1.0 || approx > 1.0,
    })
}

/// Mean/skew split of a geometric receptivity curve.
///
/// `mean` is the average receptivity; `skew` spreads the reciprocal
/// receptivity between the last and first bins. Dividing the mean by the
/// reciprocal spread taken one bin earlier (`reconstructed_min`) recovers
/// the worst-bin receptivity exactly, which is what makes the optimum a
/// tradeoff: attenuating lowers the mean but flattens the decay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BrcDecomposition {
    pub mean: f64,
    pub skew: f64,
    /// `mean / (1/C_B - 1/C_0)` with `C_0` the curve extrapolated one bin
    /// before the first; equals `min C_i` exactly for geometric curves.
    pub reconstructed_min: f64,
}

pub fn brc_decomposition(curve: &ReceptivityCurve) -> Result<BrcDecomposition, ReceptivityError> {
    let c = curve.coeffs();
    if c.len() < 2 {
        return Err(ReceptivityError::TooFewBins(c.len()));
    }
    let first = c[0];
    let last = *c.last().unwrap();
    let mean = curve.mean();
    let skew = 1.0 / last - 1.0 / first;
    // common ratio of the geometric decay, from the leading bins
    let ratio = c[1] / c[0];
    let lead_in = first / ratio;
    let reconstructed_min = mean / (1.0 / last - 1.0 / lead_in);
    Ok(BrcDecomposition {
        mean,
        skew,
        reconstructed_min,
    })
}

/// Union bound on the probability of misestimating depth, averaged over a
/// uniform true bin, for a delta pulse at signal-to-background ratio `sbr`
/// observed over `num_cycles` cycles. O(B^2).
pub fn error_probability_bound(
    upsilon: f64,
    phi_bkg: f64,
    sbr: f64,
    num_cycles: u64,
    num_bins: usize,
) -> Result<f64, ReceptivityError> {
    if !sbr.is_finite() || sbr < 0.0 {
        return Err(ReceptivityError::InvalidSbr(sbr));
    }
    let curve = ReceptivityCurve::constant_flux(upsilon, phi_bkg, num_bins)?;
    let inv: Vec<f64> = curve.coeffs().iter().map(|c| 1.0 / c).collect();
    let b = num_bins as f64;
    let scale = num_cycles as f64 / b * sbr * sbr / 2.0;
    let mut sum = 0.0;
    for &inv_tau in &inv {
        let tau_term = (1.0 + sbr) * inv_tau;
        for &inv_i in &inv {
            sum += 0.5 * (-scale / (inv_i + tau_term)).exp();
        }
    }
    Ok(sum / b)
}

/// Acquisition plan for a ranging system: bin count from the unambiguous
/// range, the optimal attenuation for a given ambient flux, and the
/// resulting attenuated background levels.
#[derive(Debug, Clone, PartialEq)]
pub struct AttenuationPlan {
    pub num_bins: usize,
    pub d_max: f64,
    pub bin_width: f64,
    pub phi_bkg: f64,
    pub optimal: OptimalAttenuation,
    /// Attenuated background per bin per cycle, `approx * phi_bkg`.
    pub per_bin_attenuated_bkg: f64,
    /// Attenuated background per cycle, `approx * B * phi_bkg`.
    pub per_cycle_attenuated_bkg: f64,
}

impl AttenuationPlan {
    /// Per-bin background that a fixed fraction of incident photons per
    /// cycle corresponds to; the classical "attenuate until x% of cycles
    /// detect" rule of thumb.
    pub fn fraction_rule_per_bin(&self, fraction: f64) -> f64 {
        fraction / self.num_bins as f64
    }
}

pub fn plan_attenuation(
    d_max: f64,
    bin_width: f64,
    phi_bkg: f64,
) -> Result<AttenuationPlan, ReceptivityError> {
    let num_bins = (2.0 * d_max / (SPEED_OF_LIGHT * bin_width)).round() as usize;
    if num_bins < 2 {
        return Err(ReceptivityError::DegenerateRange(num_bins));
    }
    let optimal = optimal_attenuation(phi_bkg, num_bins)?;
    let per_bin = optimal.approx * phi_bkg;
    Ok(AttenuationPlan {
        num_bins,
        d_max,
        bin_width,
        phi_bkg,
        optimal,
        per_bin_attenuated_bkg: per_bin,
        per_cycle_attenuated_bkg: per_bin * num_bins as f64,
    })
}
