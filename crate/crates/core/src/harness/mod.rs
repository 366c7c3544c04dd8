//! Seeded Monte Carlo experiments: depth-error sweeps over attenuation
//! grids, adaptive acquisition, and full scene simulations.
//!
//! Every experiment derives per-trial RNG streams from its master seed and
//! stable indices, so results are byte-identical for any thread count.

pub mod adaptive;
pub mod grid;
pub mod scene;
pub mod sweep;

/// RNG path tags keeping the experiment families on disjoint streams.
pub(crate) const DOMAIN_SWEEP: u64 = 1;
pub(crate) const DOMAIN_PROFILE: u64 = 2;
pub(crate) const DOMAIN_SCENE: u64 = 3;
pub(crate) const DOMAIN_ADAPT: u64 = 4;

/// Signed depth error on the cyclic bin axis, in `[-B/2, B/2)` for even
/// `B`. Depth aliases modulo the cycle, so bin `B` and bin `1` are
/// neighbors.
pub fn wrapped_error(tau_hat: usize, tau: usize, num_bins: usize) -> i64 {
    let b = num_bins as i64;
    let half = b / 2;
    (tau_hat as i64 - tau as i64 + half).rem_euclid(b) - half
}

/// Aggregate of one experiment cell. Invalid trials are scored as the
/// maximal wrapped error `B/2` unless dropped, in which case `rmse_bins`
/// is NaN when nothing remains.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorSummary {
    pub trials: u32,
    pub invalid: u32,
    pub rmse_bins: f64,
    pub rel_err_pct: f64,
    pub mean_abs_err: f64,
}

pub fn summarize_errors(
    errors: &[Option<i64>],
    num_bins: usize,
    drop_invalid: bool,
) -> ErrorSummary {
    let max_err = num_bins as f64 / 2.0;
    let mut sum_sq = 0.0;
    let mut sum_abs = 0.0;
    let mut scored = 0u32;
    let mut invalid = 0u32;
    for e in errors {
        match e {
            Some(err) => {
                let err = *err as f64;
                sum_sq += err * err;
                sum_abs += err.abs();
                scored += 1;
            }
            None => {
                invalid += 1;
                if !drop_invalid {
                    sum_sq += max_err * max_err;
                    sum_abs += max_err;
                    scored += 1;
                }
            }
        }
    }
    let (rmse, mean_abs) = if scored > 0 {
        let n = scored as f64;
        ((sum_sq / n).sqrt(), sum_abs / n)
    } else {
        (f64::NAN, f64::NAN)
    };
    ErrorSummary {
        trials: errors.len() as u32,
        invalid,
        rmse_bins: rmse,
        rel_err_pct: 100.0 * rmse / num_bins as f64,
        mean_abs_err: mean_abs,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrapped_error_stays_in_the_half_open_window() {
        let b = 10;
        for tau_hat in 1..=b {
            for tau in 1..=b {
                let e = wrapped_error(tau_hat, tau, b);
                assert!((-5..5).contains(&e), "err {e} for {tau_hat} vs {tau}");
            }
        }
        assert_eq!(wrapped_error(10, 1, 10), -1);
        assert_eq!(wrapped_error(1, 10, 10), 1);
        assert_eq!(wrapped_error(6, 1, 10), -5);
        assert_eq!(wrapped_error(3, 3, 10), 0);
    }

    #[test]
    fn summary_scores_invalids_as_max_error_by_default() {
        let errors = vec![Some(3), Some(-4), None];
        let s = summarize_errors(&errors, 10, false);
        assert_eq!(s.invalid, 1);
        let expected = ((9.0 + 16.0 + 25.0) / 3.0_f64).sqrt();
        assert!((s.rmse_bins - expected).abs() < 1e-12);
        assert!((s.mean_abs_err - 4.0).abs() < 1e-12);
        assert!((s.rel_err_pct - 10.0 * expected).abs() < 1e-9);

        let dropped = summarize_errors(&errors, 10, true);
        let expected = ((9.0 + 16.0) / 2.0_f64).sqrt();
        assert!((dropped.rmse_bins - expected).abs() < 1e-12);
    }

    #[test]
    fn all_invalid_dropped_flags_nan() {
        let s = summarize_errors(&[None, None], 10, true);
        assert!(s.rmse_bins.is_nan());
        assert_eq!(s.invalid, 2);
    }
}
