//! First-photon detection model and histogram acquisition.
//!
//! A single-photon detector timestamps at most one photon per laser cycle:
//! the first arrival. With per-bin incident rates `r_i` the probability
//! that the first detection lands in bin `i` is
//!
//! ```text
//! p_i = (1 - exp(-r_i)) * exp(-sum_{k<i} r_k)
//! ```
//!
//! and with probability `exp(-sum_k r_k)` the cycle records nothing. Over
//! `N` independent cycles the per-bin counts plus the no-detection count
//! follow a multinomial with those `B + 1` cell probabilities. Early bins
//! shadow later ones, which is the pile-up distortion everything downstream
//! corrects for.

use crate::photon::Waveform;
use rand::Rng;
use rand_distr::{Binomial, Distribution};
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum HistogramError {
    #[error("need probabilities for at least one bin plus the no-detection cell")]
    TooFewCells,
    #[error("cell probability at index {0} is outside [0, 1] or not finite")]
    InvalidProbability(usize),
    #[error("cell probabilities sum to {0}, expected 1")]
    NotNormalized(f64),
    #[error("need counts for at least one bin plus the no-detection cell")]
    TooFewCounts,
    #[error("csv parse error at line {line}: {reason}")]
    Csv { line: usize, reason: String },
}

/// Probabilities of the `B + 1` mutually exclusive outcomes of one cycle:
/// first detection in bin `1..=B`, or no detection at all.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionDistribution {
    /// Length `B + 1`; the last entry is the no-detection probability.
    probs: Vec<f64>,
}

impl DetectionDistribution {
    /// Validates raw cell probabilities (length `B + 1`, entries in [0, 1],
    /// unit sum within 1e-10).
    pub fn new(probs: Vec<f64>) -> Result<Self, HistogramError> {
        if probs.len() < 2 {
            return Err(HistogramError::TooFewCells);
        }
        for (i, &p) in probs.iter().enumerate() {
            if !p.is_finite() || !(0.0..=1.0).contains(&p) {
                return Err(HistogramError::InvalidProbability(i));
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > 1e-10 {
            return Err(HistogramError::NotNormalized(sum));
        }
        Ok(DetectionDistribution { probs })
    }

    /// First-photon probabilities of a waveform.
    pub fn from_waveform(w: &Waveform) -> Self {
        let mut probs = Vec::with_capacity(w.num_bins() + 1);
        // survival = exp(-sum of rates strictly before the current bin)
        let mut survival = 1.0_f64;
        for &r in w.rates() {
            probs.push(-(-r).exp_m1() * survival);
            survival *= (-r).exp();
        }
        probs.push(survival);
        DetectionDistribution { probs }
    }

    /// Cell probabilities, detection bins first, no-detection cell last.
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn num_bins(&self) -> usize {
        self.probs.len() - 1
    }

    pub fn no_detection_prob(&self) -> f64 {
        *self.probs.last().unwrap()
    }
}

/// Counts of first detections per bin over `N` cycles, plus the cycles that
/// saw nothing. The cells always sum to `N` exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Histogram {
    /// Length `B + 1`; the last entry counts empty cycles.
    counts: Vec<u64>,
    num_cycles: u64,
}

impl Histogram {
    pub fn new(counts: Vec<u64>) -> Result<Self, HistogramError> {
        if counts.len() < 2 {
            return Err(HistogramError::TooFewCounts);
        }
        let num_cycles = counts.iter().sum();
        Ok(Histogram { counts, num_cycles })
    }

    /// All `B + 1` cells, no-detection cell last.
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Per-bin detection counts only.
    pub fn detected(&self) -> &[u64] {
        &self.counts[..self.counts.len() - 1]
    }

    pub fn missed_cycles(&self) -> u64 {
        *self.counts.last().unwrap()
    }

    pub fn num_bins(&self) -> usize {
        self.counts.len() - 1
    }

    pub fn num_cycles(&self) -> u64 {
        self.num_cycles
    }

    /// Two-column CSV, one row per bin and a final `none` row for empty
    /// cycles. `seed` records the master seed of the run that produced a
    /// sampled histogram; pass `None` for deterministic content.
    pub fn to_csv(&self, seed: Option<u64>) -> String {
        let mut out = String::new();
        if let Some(s) = seed {
            writeln!(out, "# seed={s}").unwrap();
        }
        out.push_str("bin,count\n");
        let b = self.num_bins();
        for (i, &c) in self.counts.iter().enumerate() {
            if i < b {
                writeln!(out, "{},{}", i + 1, c).unwrap();
            } else {
                writeln!(out, "none,{c}").unwrap();
            }
        }
        out
    }

    /// Parses the `to_csv` format. `#` lines are comments; bins must appear
    /// in order 1..=B followed by the `none` row.
    pub fn from_csv(text: &str) -> Result<Self, HistogramError> {
        let mut counts = Vec::new();
        let mut saw_header = false;
        let mut saw_none = false;
        let mut expected_bin = 1usize;
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let lineno = idx + 1;
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if !saw_header {
                if line != "bin,count" {
                    return Err(HistogramError::Csv {
                        line: lineno,
                        reason: format!("expected header 'bin,count', got '{line}'"),
                    });
                }
                saw_header = true;
                continue;
            }
            if saw_none {
                return Err(HistogramError::Csv {
                    line: lineno,
                    reason: "data after the 'none' row".into(),
                });
            }
            let (label, value) = line.split_once(',').ok_or_else(|| HistogramError::Csv {
                line: lineno,
                reason: "expected 'bin,count' pair".into(),
            })?;
            let count: u64 = value.trim().parse().map_err(|e| HistogramError::Csv {
                line: lineno,
                reason: format!("bad count '{value}': {e}"),
            })?;
            if label.trim() == "none" {
                saw_none = true;
            } else {
                let bin: usize = label.trim().parse().map_err(|e| HistogramError::Csv {
                    line: lineno,
                    reason: format!("bad bin label '{label}': {e}"),
                })?;
                if bin != expected_bin {
                    return Err(HistogramError::Csv {
                        line: lineno,
                        reason: format!("expected bin {expected_bin}, got {bin}"),
                    });
                }
                expected_bin += 1;
            }
            counts.push(count);
        }
        if !saw_none {
            return Err(HistogramError::Csv {
                line: text.lines().count(),
                reason: "missing 'none' row".into(),
            });
        }
        Histogram::new(counts)
    }
}

/// Draws one histogram of `num_cycles` cycles.
///
/// Sequential conditional-binomial decomposition of the multinomial: bin by
/// bin, the count among the still-unassigned cycles is binomial with the
/// renormalized cell probability. O(B) regardless of `num_cycles`, and the
/// cells sum to `num_cycles` by construction.
pub fn sample_histogram<R: Rng + ?Sized>(
    dist: &DetectionDistribution,
    num_cycles: u64,
    rng: &mut R,
) -> Histogram {
    let probs = dist.probs();
    let cells = probs.len();
    // suffix[i] = total probability mass from cell i onward
    let mut suffix = vec![0.0_f64; cells + 1];
    for i in (0..cells).rev() {
        suffix[i] = suffix[i + 1] + probs[i];
    }
    let mut counts = vec![0u64; cells];
    let mut remaining = num_cycles;
    for i in 0..cells - 1 {
        if remaining == 0 {
            break;
        }
        if suffix[i] <= 0.0 {
            break;
        }
        let q = (probs[i] / suffix[i]).clamp(0.0, 1.0);
        if q == 0.0 {
            continue;
        }
        let drawn = if q >= 1.0 {
            remaining
        } else {
            Binomial::new(remaining, q).unwrap().sample(rng)
        };
        counts[i] = drawn;
        remaining -= drawn;
    }
    *counts.last_mut().unwrap() += remaining;
    Histogram {
        counts,
        num_cycles,
    }
}

/// Reference sampler: simulates every cycle separately by inverting the
/// cell CDF with one uniform draw. O(N * B); intended as an independent
/// cross-check of `sample_histogram`, not for production sweeps.
pub fn sample_histogram_per_cycle<R: Rng + ?Sized>(
    dist: &DetectionDistribution,
    num_cycles: u64,
    rng: &mut R,
) -> Histogram {
    let probs = dist.probs();
    let mut counts = vec![0u64; probs.len()];
    for _ in 0..num_cycles {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let mut cell = probs.len() - 1;
        for (i, &p) in probs.iter().enumerate() {
            acc += p;
            if u < acc {
                cell = i;
                break;
            }
        }
        counts[cell] += 1;
    }
    Histogram {
        counts,
        num_cycles,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::photon::{FluxConfig, PulseShape};
    use crate::rng::stream_rng;
    use approx::assert_relative_eq;

    fn uniform_waveform(total: f64, bins: usize) -> Waveform {
        Waveform::constant(total / bins as f64, bins).unwrap()
    }

    #[test]
    fn uniform_flux_probabilities_decay_geometrically() {
        // constant rate: p_i = (1 - e^{-r/B}) e^{-(i-1) r/B}
        let w = uniform_waveform(1.0, 4);
        let d = DetectionDistribution::from_waveform(&w);
        let step = (1.0_f64 - (-0.25_f64).exp()) * 1.0;
        for i in 0..4 {
            let expected = step * (-(i as f64) * 0.25).exp();
            assert_relative_eq!(d.probs()[i], expected, max_relative = 1e-12);
        }
        assert_relative_eq!(d.no_detection_prob(), (-1.0_f64).exp(), max_relative = 1e-12);
    }

    #[test]
    fn probabilities_sum_to_one_and_match_survival() {
        let cfg = FluxConfig::new(2.0, 0.01, 1000, 333, 0.7, 1e-10).unwrap();
        let w = Waveform::from_config(&cfg, &PulseShape::Delta).unwrap();
        let d = DetectionDistribution::from_waveform(&w);
        let sum: f64 = d.probs().iter().sum();
        assert_relative_eq!(sum, 1.0, epsilon = 1e-10);
        assert_relative_eq!(
            d.no_detection_prob(),
            (-w.total_flux()).exp(),
            max_relative = 1e-10
        );
    }

    #[test]
    fn pileup_shadows_later_bins() {
        // equal rates everywhere, yet earlier bins are strictly more likely
        let w = uniform_waveform(5.0, 10);
        let d = DetectionDistribution::from_waveform(&w);
        for i in 1..10 {
            assert!(d.probs()[i] < d.probs()[i - 1]);
        }
    }

    #[test]
    fn saturating_first_bin_takes_every_cycle() {
        let d = DetectionDistribution::new(vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        let mut rng = stream_rng(1, &[0]);
        let h = sample_histogram(&d, 1000, &mut rng);
        assert_eq!(h.counts(), &[1000, 0, 0, 0]);
    }

    #[test]
    fn sampled_cells_always_sum_to_cycle_count() {
        let cfg = FluxConfig::new(0.5, 0.02, 64, 17, 1.0, 1e-10).unwrap();
        let w = Waveform::from_config(&cfg, &PulseShape::Delta).unwrap();
        let d = DetectionDistribution::from_waveform(&w);
        let mut rng = stream_rng(99, &[4]);
        for n in [0u64, 1, 7, 1000] {
            let h = sample_histogram(&d, n, &mut rng);
            assert_eq!(h.counts().iter().sum::<u64>(), n);
            assert_eq!(h.num_cycles(), n);
            let h2 = sample_histogram_per_cycle(&d, n, &mut rng);
            assert_eq!(h2.counts().iter().sum::<u64>(), n);
        }
    }

    #[test]
    fn csv_round_trip_preserves_counts() {
        let h = Histogram::new(vec![3, 0, 12, 5]).unwrap();
        let text = h.to_csv(Some(42));
        assert!(text.starts_with("# seed=42\nbin,count\n"));
        assert!(text.contains("none,5"));
        let back = Histogram::from_csv(&text).unwrap();
        assert_eq!(back, h);
    }

    #[test]
    fn csv_rejects_malformed_input() {
        assert!(matches!(
            Histogram::from_csv("bin,count\n1,2\n"),
            Err(HistogramError::Csv { .. })
        ));
        assert!(matches!(
            Histogram::from_csv("bin,count\n2,5\nnone,0\n"),
            Err(HistogramError::Csv { .. })
        ));
        assert!(matches!(
            Histogram::from_csv("count\n1,2\nnone,0\n"),
            Err(HistogramError::Csv { .. })
        ));
    }

    #[test]
    fn distribution_validation_catches_bad_cells() {
        assert_eq!(
            DetectionDistribution::new(vec![1.0]),
            Err(HistogramError::TooFewCells)
        );
        assert_eq!(
            DetectionDistribution::new(vec![0.5, 0.6]),
            Err(HistogramError::NotNormalized(1.1))
        );
        assert_eq!(
            DetectionDistribution::new(vec![-0.1, 1.1]),
            Err(HistogramError::InvalidProbability(0))
        );
    }
}
