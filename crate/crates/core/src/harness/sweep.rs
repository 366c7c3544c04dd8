//! Depth-error Monte Carlo over a (phi_sig, phi_bkg, upsilon) grid.

use super::{summarize_errors, wrapped_error, DOMAIN_PROFILE, DOMAIN_SWEEP};
use crate::estimators::{
    argmax_depth, bayes_depth, coates_correct, coates_depth, map_depth, map_posterior,
    DepthEstimate, EstimatorKind,
};
use crate::histogram::sample_histogram;
use crate::photon::{ConfigError, FluxConfig, PulseShape, Waveform};
use crate::rng::stream_rng;
use rand::Rng;
use rayon::prelude::*;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SweepError {
    #[error("flux grid dimension is empty")]
    EmptyGrid,
    #[error("need at least one trial per grid point")]
    NoTrials,
    #[error(transparent)]
    Config(#[from] ConfigError),
}

/// True depth used for each trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DepthPrior {
    /// Fresh uniform draw from 1..=B per trial.
    UniformRandom,
    /// Same bin for every trial.
    Fixed(usize),
}

/// One grid point of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSpec {
    pub phi_sig: f64,
    pub phi_bkg: f64,
    pub upsilon: f64,
    pub num_bins: usize,
    pub num_cycles: u64,
    pub trials: u32,
    pub estimator: EstimatorKind,
    pub depth_prior: DepthPrior,
    pub bin_width: f64,
}

fn estimate_depth(
    cell: &CellSpec,
    cfg: &FluxConfig,
    rng: &mut impl Rng,
) -> DepthEstimate {
    let w = Waveform::from_config(cfg, &PulseShape::Delta).expect("validated config");
    let dist = crate::histogram::DetectionDistribution::from_waveform(&w);
    let h = sample_histogram(&dist, cell.num_cycles, rng);
    match cell.estimator {
        EstimatorKind::Coates => coates_depth(&coates_correct(&h), cell.bin_width),
        EstimatorKind::Argmax => argmax_depth(&h, cell.bin_width),
        EstimatorKind::Map => map_depth(
            &map_posterior(&h, cfg.phi_sig(), cfg.phi_bkg(), cfg.upsilon()),
            cell.bin_width,
        ),
        EstimatorKind::Bayes => bayes_depth(
            &map_posterior(&h, cfg.phi_sig(), cfg.phi_bkg(), cfg.upsilon()),
            cell.bin_width,
        ),
    }
}

/// Runs every trial of one grid point; returns the per-trial wrapped error,
/// `None` where the estimator produced no estimate. Trials parallelize
/// over a private stream each, so the output is schedule-independent.
pub fn run_cell(
    cell: &CellSpec,
    master_seed: u64,
    domain: u64,
    row: u64,
) -> Result<Vec<Option<i64>>, SweepError> {
    if cell.trials == 0 {
        return Err(SweepError::NoTrials);
    }
    // validate the flux parameters once; per-trial configs only vary tau
    let probe_tau = match cell.depth_prior {
        DepthPrior::Fixed(tau) => tau,
        DepthPrior::UniformRandom => 1,
    };
    FluxConfig::new(
        cell.phi_sig,
        cell.phi_bkg,
        cell.num_bins,
        probe_tau,
        cell.upsilon,
        cell.bin_width,
    )?;
    let errors = (0..cell.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = stream_rng(master_seed, &[domain, row, trial as u64]);
            let tau = match cell.depth_prior {
                DepthPrior::UniformRandom => rng.gen_range(1..=cell.num_bins),
                DepthPrior::Fixed(tau) => tau,
            };
            let cfg = FluxConfig::new(
                cell.phi_sig,
                cell.phi_bkg,
                cell.num_bins,
                tau,
                cell.upsilon,
                cell.bin_width,
            )
            .expect("validated config");
            let est = estimate_depth(cell, &cfg, &mut rng);
            est.valid
                .then(|| wrapped_error(est.bin, tau, cell.num_bins))
        })
        .collect();
    Ok(errors)
}

/// Full experiment: the cartesian grid of flux and attenuation levels.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialSpec {
    pub phi_sig_grid: Vec<f64>,
    pub phi_bkg_grid: Vec<f64>,
    pub upsilon_grid: Vec<f64>,
    pub num_bins: usize,
    pub num_cycles: u64,
    pub trials: u32,
    pub estimator: EstimatorKind,
    pub depth_prior: DepthPrior,
    pub bin_width: f64,
    pub master_seed: u64,
    /// Drop invalid trials from the scores instead of counting them at the
    /// maximal error B/2.
    pub drop_invalid: bool,
}

impl Default for TrialSpec {
    /// Standard acquisition: 1000 bins of 100 ps, 500 cycles, 200 trials,
    /// random depth, pile-up-corrected estimator.
    fn default() -> Self {
        TrialSpec {
            phi_sig_grid: vec![1.0],
            phi_bkg_grid: vec![0.01],
            upsilon_grid: vec![1.0],
            num_bins: 1000,
            num_cycles: 500,
            trials: 200,
            estimator: EstimatorKind::Coates,
            depth_prior: DepthPrior::UniformRandom,
            bin_width: 100e-12,
            master_seed: 0,
            drop_invalid: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub phi_sig: f64,
    pub phi_bkg: f64,
    pub upsilon: f64,
    pub estimator: EstimatorKind,
    pub trials: u32,
    pub rmse_bins: f64,
    pub rel_err_pct: f64,
    pub mean_abs_err: f64,
    pub invalid_trials: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub master_seed: u64,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    /// CSV with the master seed on a comment line; row order follows the
    /// grid nesting phi_sig, then phi_bkg, then upsilon.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        writeln!(out, "# seed={}", self.master_seed).unwrap();
        out.push_str(
            "phi_sig,phi_bkg,upsilon,estimator,trials,rmse_bins,rel_err_pct,mean_abs_err,invalid_trials\n",
        );
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                r.phi_sig,
                r.phi_bkg,
                r.upsilon,
                r.estimator,
                r.trials,
                r.rmse_bins,
                r.rel_err_pct,
                r.mean_abs_err,
                r.invalid_trials
            )
            .unwrap();
        }
        out
    }
}

pub fn run_sweep(spec: &TrialSpec) -> Result<SweepResult, SweepError> {
    if spec.phi_sig_grid.is_empty() || spec.phi_bkg_grid.is_empty() || spec.upsilon_grid.is_empty()
    {
        return Err(SweepError::EmptyGrid);
    }
    let mut cells = Vec::new();
    for &phi_sig in &spec.phi_sig_grid {
        for &phi_bkg in &spec.phi_bkg_grid {
            for &upsilon in &spec.upsilon_grid {
                cells.push(CellSpec {
                    phi_sig,
                    phi_bkg,
                    upsilon,
                    num_bins: spec.num_bins,
                    num_cycles: spec.num_cycles,
                    trials: spec.trials,
                    estimator: spec.estimator,
                    depth_prior: spec.depth_prior,
                    bin_width: spec.bin_width,
                });
            }
        }
    }
    let rows = cells
        .par_iter()
        .enumerate()
        .map(|(row, cell)| {
            let errors = run_cell(cell, spec.master_seed, DOMAIN_SWEEP, row as u64)?;
            let s = summarize_errors(&errors, cell.num_bins, spec.drop_invalid);
            Ok(SweepRow {
                phi_sig: cell.phi_sig,
                phi_bkg: cell.phi_bkg,
                upsilon: cell.upsilon,
                estimator: cell.estimator,
                trials: cell.trials,
                rmse_bins: s.rmse_bins,
                rel_err_pct: s.rel_err_pct,
                mean_abs_err: s.mean_abs_err,
                invalid_trials: s.invalid,
            })
        })
        .collect::<Result<Vec<_>, SweepError>>()?;
    Ok(SweepResult {
        master_seed: spec.master_seed,
        rows,
    })
}

/// RMSE as a function of the true depth bin: the cell is rerun with a fixed
/// tau for each entry of `taus`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileRow {
    pub tau: usize,
    pub rmse_bins: f64,
    pub mean_abs_err: f64,
    pub invalid_trials: u32,
}

pub fn run_depth_profile(
    cell: &CellSpec,
    taus: &[usize],
    master_seed: u64,
    drop_invalid: bool,
) -> Result<Vec<ProfileRow>, SweepError> {
    taus.par_iter()
        .enumerate()
        .map(|(row, &tau)| {
            let fixed = CellSpec {
                depth_prior: DepthPrior::Fixed(tau),
                ..cell.clone()
            };
            let errors = run_cell(&fixed, master_seed, DOMAIN_PROFILE, row as u64)?;
            let s = summarize_errors(&errors, cell.num_bins, drop_invalid);
            Ok(ProfileRow {
                tau,
                rmse_bins: s.rmse_bins,
                mean_abs_err: s.mean_abs_err,
                invalid_trials: s.invalid,
            })
        })
        .collect()
}
