//! `spadsim`: simulate pile-up-distorted photon histograms, decode them,
//! and run the attenuation experiments from the library, all driven by
//! TOML configs so runs are reproducible artifacts.

mod config;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use config::{
    load, parse_policy, AdaptConfig, SceneConfig, SimulateConfig, SweepConfig,
};
use spadsim_core::harness::adaptive::{adaptive_acquire, AdaptiveSpec};
use spadsim_core::harness::scene::{simulate_scene, SceneJob};
use spadsim_core::harness::sweep::{run_sweep, TrialSpec};
use spadsim_core::harness::{grid::Grid, wrapped_error};
use spadsim_core::rng::stream_rng;
use spadsim_core::{
    argmax_depth, bayes_depth, coates_correct, coates_depth, map_depth, map_posterior,
    optimal_attenuation, sample_histogram, DepthEstimate, DetectionDistribution, EstimatorKind,
    FluxConfig, Histogram, PulseShape, Waveform,
};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// RNG stream tag for histograms written by `simulate`; the library's
/// experiment runners use their own tags.
const STREAM_SIMULATE: u64 = 5;

#[derive(Parser)]
#[command(name = "spadsim", version, about = "Single-photon LiDAR histogram simulator and depth estimation toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML run configuration (required by simulate, sweep, scene, adapt)
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override the seed from the config file
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Directory for output files
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    /// Cap worker threads (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Override the estimator from the config file (coates, argmax, map, bayes)
    #[arg(long, global = true)]
    estimator: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Sample pile-up-distorted histograms and write them as CSV
    Simulate,
    /// Decode a histogram CSV into a depth estimate
    Estimate {
        /// Histogram CSV, as written by simulate
        #[arg(long)]
        input: PathBuf,
        /// Signal flux, needed by the map and bayes estimators
        #[arg(long)]
        phi_sig: Option<f64>,
        /// Background flux, needed by the map and bayes estimators
        #[arg(long)]
        phi_bkg: Option<f64>,
        /// Attenuation in effect during acquisition
        #[arg(long, default_value_t = 1.0)]
        upsilon: f64,
        /// Bin width in seconds
        #[arg(long, default_value_t = 100e-12)]
        bin_width: f64,
    },
    /// Report the attenuation level that maximizes worst-bin receptivity
    OptimalFlux {
        /// Background flux per bin per cycle
        #[arg(long)]
        phi_bkg: f64,
        /// Number of histogram bins
        #[arg(long)]
        num_bins: Option<usize>,
        /// Unambiguous range in meters (alternative to --num-bins)
        #[arg(long)]
        d_max: Option<f64>,
        /// Bin width in seconds (required with --d-max)
        #[arg(long)]
        bin_width: Option<f64>,
    },
    /// Run a depth-error sweep over a flux/attenuation grid
    Sweep,
    /// Simulate a whole depth map under an attenuation policy
    Scene,
    /// Adaptive two-phase acquisition over a list of scene points
    Adapt,
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("configuring the thread pool")?;
    }
    match &cli.command {
        Command::Simulate => simulate(&cli),
        Command::Estimate {
            input,
            phi_sig,
            phi_bkg,
            upsilon,
            bin_width,
        } => estimate(&cli, input, *phi_sig, *phi_bkg, *upsilon, *bin_width),
        Command::OptimalFlux {
            phi_bkg,
            num_bins,
            d_max,
            bin_width,
        } => optimal_flux(*phi_bkg, *num_bins, *d_max, *bin_width),
        Command::Sweep => sweep(&cli),
        Command::Scene => scene(&cli),
        Command::Adapt => adapt(&cli),
    }
}

fn config_path(cli: &Cli) -> Result<&Path> {
    cli.config
        .as_deref()
        .context("this command needs --config <file>")
}

fn estimator_choice(cli: &Cli, from_config: Option<&str>) -> Result<EstimatorKind> {
    let name = cli
        .estimator
        .as_deref()
        .or(from_config)
        .unwrap_or("coates");
    name.parse().with_context(|| format!("estimator {name:?}"))
}

fn write_output(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)
        .with_context(|| format!("creating output directory {}", dir.display()))?;
    let path = dir.join(name);
    std::fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(path)
}

fn simulate(cli: &Cli) -> Result<()> {
    let cfg: SimulateConfig = load(config_path(cli)?)?;
    let seed = cli.seed.unwrap_or(cfg.seed);
    let pulse = match &cfg.pulse {
        Some(p) => p.shape()?,
        None => PulseShape::Delta,
    };
    let flux = FluxConfig::new(
        cfg.phi_sig,
        cfg.phi_bkg,
        cfg.num_bins,
        cfg.tau,
        cfg.upsilon,
        cfg.bin_width,
    )?;
    let wave = Waveform::from_config(&flux, &pulse)?;
    let dist = DetectionDistribution::from_waveform(&wave);
    for trial in 0..cfg.trials {
        let mut rng = stream_rng(seed, &[STREAM_SIMULATE, trial as u64]);
        let h = sample_histogram(&dist, cfg.num_cycles, &mut rng);
        write_output(
            &cli.out,
            &format!("histogram_{trial:03}.csv"),
            &h.to_csv(Some(seed)),
        )?;
    }
    Ok(())
}

fn decode(
    estimator: EstimatorKind,
    h: &Histogram,
    flux: Option<(f64, f64, f64)>,
    bin_width: f64,
) -> Result<DepthEstimate> {
    Ok(match estimator {
        EstimatorKind::Coates => coates_depth(&coates_correct(h), bin_width),
        EstimatorKind::Argmax => argmax_depth(h, bin_width),
        EstimatorKind::Map | EstimatorKind::Bayes => {
            let (phi_sig, phi_bkg, upsilon) =
                flux.context("map and bayes need --phi-sig and --phi-bkg")?;
            let posterior = map_posterior(h, phi_sig, phi_bkg, upsilon);
            match estimator {
                EstimatorKind::Map => map_depth(&posterior, bin_width),
                _ => bayes_depth(&posterior, bin_width),
            }
        }
    })
}

fn estimate(
    cli: &Cli,
    input: &Path,
    phi_sig: Option<f64>,
    phi_bkg: Option<f64>,
    upsilon: f64,
    bin_width: f64,
) -> Result<()> {
    let estimator = estimator_choice(cli, None)?;
    let text = std::fs::read_to_string(input)
        .with_context(|| format!("reading histogram {}", input.display()))?;
    let h = Histogram::from_csv(&text)?;
    let flux = match (phi_sig, phi_bkg) {
        (Some(s), Some(b)) => Some((s, b, upsilon)),
        _ => None,
    };
    let est = decode(estimator, &h, flux, bin_width)?;
    println!(
        "estimator={estimator} valid={} bin={} distance_m={}",
        est.valid, est.bin, est.distance_m
    );
    Ok(())
}

fn optimal_flux(
    phi_bkg: f64,
    num_bins: Option<usize>,
    d_max: Option<f64>,
    bin_width: Option<f64>,
) -> Result<()> {
    let report = match (num_bins, d_max) {
        (Some(b), None) => {
            let opt = optimal_attenuation(phi_bkg, b)?;
            let mut s = String::new();
            writeln!(s, "num_bins = {b}").unwrap();
            writeln!(s, "phi_bkg = {phi_bkg}").unwrap();
            writeln!(s, "upsilon_exact = {}", opt.exact).unwrap();
            writeln!(s, "upsilon_approx = {}", opt.approx).unwrap();
            writeln!(s, "clamped = {}", opt.clamped).unwrap();
            writeln!(
                s,
                "per_cycle_attenuated_bkg = {}",
                opt.approx * b as f64 * phi_bkg
            )
            .unwrap();
            s
        }
        (None, Some(d)) => {
            let width = bin_width.context("--d-max needs --bin-width")?;
            let plan = spadsim_core::receptivity::plan_attenuation(d, width, phi_bkg)?;
            let mut s = String::new();
            writeln!(s, "d_max_m = {d}").unwrap();
            writeln!(s, "bin_width_s = {width}").unwrap();
            writeln!(s, "num_bins = {}", plan.num_bins).unwrap();
            writeln!(s, "phi_bkg = {phi_bkg}").unwrap();
            writeln!(s, "upsilon_exact = {}", plan.optimal.exact).unwrap();
            writeln!(s, "upsilon_approx = {}", plan.optimal.approx).unwrap();
            writeln!(s, "clamped = {}", plan.optimal.clamped).unwrap();
            writeln!(s, "per_bin_attenuated_bkg = {}", plan.per_bin_attenuated_bkg).unwrap();
            writeln!(
                s,
                "per_cycle_attenuated_bkg = {}",
                plan.per_cycle_attenuated_bkg
            )
            .unwrap();
            s
        }
        _ => bail!("give exactly one of --num-bins or --d-max"),
    };
    print!("{report}");
    Ok(())
}

fn sweep(cli: &Cli) -> Result<()> {
    let cfg: SweepConfig = load(config_path(cli)?)?;
    let spec = TrialSpec {
        phi_sig_grid: cfg.phi_sig.values()?,
        phi_bkg_grid: cfg.phi_bkg.values()?,
        upsilon_grid: cfg.upsilon.values()?,
        num_bins: cfg.num_bins,
        num_cycles: cfg.num_cycles,
        trials: cfg.trials,
        estimator: estimator_choice(cli, cfg.estimator.as_deref())?,
        depth_prior: cfg.depth.prior()?,
        bin_width: cfg.bin_width,
        master_seed: cli.seed.unwrap_or(cfg.seed),
        drop_invalid: cfg.drop_invalid,
    };
    let result = run_sweep(&spec)?;
    write_output(&cli.out, "sweep.csv", &result.to_csv())?;
    Ok(())
}

fn scene(cli: &Cli) -> Result<()> {
    let path = config_path(cli)?;
    let cfg: SceneConfig = load(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let depth_path = base.join(&cfg.depth_map);
    let depth_text = std::fs::read_to_string(&depth_path)
        .with_context(|| format!("reading depth map {}", depth_path.display()))?;
    let depth: Grid<u32> = Grid::parse(&depth_text)
        .with_context(|| format!("parsing depth map {}", depth_path.display()))?;
    let seed = cli.seed.unwrap_or(cfg.seed);
    let job = SceneJob {
        depth,
        phi_sig: cfg.phi_sig.resolve(base)?,
        phi_bkg: cfg.phi_bkg.resolve(base)?,
        num_bins: cfg.num_bins,
        num_cycles: cfg.num_cycles,
        bin_width: cfg.bin_width,
        pixel_pitch: cfg.pixel_pitch,
        policy: parse_policy(&cfg.policy)?,
        estimator: estimator_choice(cli, cfg.estimator.as_deref())?,
        laser_off_cycles: cfg.laser_off_cycles,
        inlier_threshold_bins: cfg.inlier_threshold_bins,
        master_seed: seed,
    };
    let result = simulate_scene(&job)?;
    write_output(&cli.out, "estimated_bins.txt", &result.estimated.to_text(Some(seed)))?;
    write_output(&cli.out, "error_bins.txt", &result.errors.to_text(Some(seed)))?;
    write_output(&cli.out, "upsilon.txt", &result.upsilon.to_text(Some(seed)))?;
    write_output(&cli.out, "phi_bkg_hat.txt", &result.phi_bkg_hat.to_text(Some(seed)))?;
    write_output(&cli.out, "point_cloud.xyz", &result.point_cloud())?;
    write_output(&cli.out, "summary.txt", &result.summary())?;
    Ok(())
}

fn adapt(cli: &Cli) -> Result<()> {
    let cfg: AdaptConfig = load(config_path(cli)?)?;
    let seed = cli.seed.unwrap_or(cfg.seed);
    let spec = AdaptiveSpec {
        num_bins: cfg.num_bins,
        bin_width: cfg.bin_width,
        laser_off_cycles: cfg.laser_off_cycles,
        laser_on_cycles: cfg.laser_on_cycles,
    };
    let mut csv = format!("# seed={seed}\n");
    csv.push_str("point,tau,phi_bkg,phi_bkg_hat,upsilon,fallback,estimated_bin,wrapped_error\n");
    for (index, point) in cfg.points.iter().enumerate() {
        let phi_sig = point.phi_sig.unwrap_or(cfg.phi_sig);
        let out = adaptive_acquire(
            &spec,
            phi_sig,
            point.phi_bkg,
            point.tau,
            seed,
            index as u64,
        )?;
        let err = match out.estimate.valid {
            true => wrapped_error(out.estimate.bin, point.tau, cfg.num_bins).to_string(),
            false => "NaN".to_string(),
        };
        let hat = out
            .phi_bkg_hat
            .map_or("NaN".to_string(), |v| v.to_string());
        writeln!(
            csv,
            "{index},{},{},{hat},{},{},{},{err}",
            point.tau, point.phi_bkg, out.upsilon, out.fallback, out.estimate.bin
        )
        .unwrap();
    }
    write_output(&cli.out, "adapt.csv", &csv)?;
    Ok(())
}
