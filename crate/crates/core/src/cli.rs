//! Command-line front end. Exit codes: 0 success, 1 validation, 2 I/O,
//! 3 numerical failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::estimators::{EstimatorConfig, EstimatorId};
use crate::freq_domain::ApeMode;
use crate::io;
use crate::montecarlo::{self, ExperimentConfig, Scale, MIN_LENGTH};
use crate::plot::{self, Metric, PlotSpec};
use crate::series_gen::{generate_pair, PairMeta, SeriesPair, SettingTag, SimulationSetting};
use crate::time_domain;

#[derive(Debug, Parser)]
#[command(name = "xhurst", version, about = "Bivariate Hurst exponent estimation under heavy tails")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one series pair and write it as `t,x,y` CSV.
    Generate(GenerateArgs),
    /// Estimate H_xy of a pair file.
    Estimate(EstimateArgs),
    /// Run a Monte Carlo experiment and write the records CSV.
    Simulate(SimulateArgs),
    /// Aggregate a records CSV into per-cell statistics.
    Summarize(SummarizeArgs),
    /// Draw a summary CSV as an SVG chart.
    Plot(PlotArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub setting: SettingTag,
    #[arg(long)]
    pub alpha: f64,
    #[arg(long, short = 'n')]
    pub length: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[arg(long, short)]
    pub input: PathBuf,
    /// dcca, dmca, hxa, ape, xpe, lxw or all
    #[arg(long, short, default_value = "all")]
    pub estimator: String,
    /// Estimator settings as TOML; flags below override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Frequency-domain bandwidth (number of Fourier frequencies).
    #[arg(long)]
    pub m: Option<usize>,
    /// APE frequency ratio.
    #[arg(long)]
    pub q: Option<f64>,
    /// Daniell half-width.
    #[arg(long)]
    pub span: Option<usize>,
    #[arg(long, value_parser = parse_ape_mode)]
    pub ape_mode: Option<ApeMode>,
    /// Write the fluctuation curve of the (single, time-domain) estimator.
    #[arg(long)]
    pub curve_out: Option<PathBuf>,
    /// Write the smoothed cross-periodogram.
    #[arg(long)]
    pub periodogram_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Experiment configuration (TOML).
    #[arg(long, conflicts_with = "scale")]
    pub config: Option<PathBuf>,
    /// Built-in preset, used when no config is given.
    #[arg(long, value_parser = parse_scale, default_value = "quick")]
    pub scale: Scale,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub reps: Option<usize>,
    /// Worker threads; defaults to the number of CPUs.
    #[arg(long, short = 'j')]
    pub parallelism: Option<usize>,
    #[arg(long, short)]
    pub out: PathBuf,
    #[arg(long, short)]
    pub quiet: bool,
}

#[derive(Debug, Args)]
pub struct SummarizeArgs {
    #[arg(long, short)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    pub true_h: f64,
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    #[arg(long, short)]
    pub input: PathBuf,
    /// mean, sd or mse
    #[arg(long, short, default_value = "mean")]
    pub metric: String,
    #[arg(long)]
    pub setting: Option<SettingTag>,
    #[arg(long, default_value_t = 0.5)]
    pub true_h: f64,
    #[arg(long, short)]
    pub out: PathBuf,
}

fn parse_scale(s: &str) -> std::result::Result<Scale, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_ape_mode(s: &str) -> std::result::Result<ApeMode, String> {
    match s {
        "sum_of_moduli" => Ok(ApeMode::SumOfModuli),
        "modulus_of_sum" => Ok(ApeMode::ModulusOfSum),
        "real_part" => Ok(ApeMode::RealPart),
        _ => Err(format!("unknown APE mode `{s}` (sum_of_moduli, modulus_of_sum, real_part)")),
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, A>(args: I) -> i32
where
    I: IntoIterator<Item = A>,
    A: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.class().exit_code()
        }
    }
}

pub fn execute(command: Command) -> Result<()> {
    match command {
        Command::Generate(a) => cmd_generate(&a),
        Command::Estimate(a) => cmd_estimate(&a, &mut std::io::stdout().lock()),
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Summarize(a) => cmd_summarize(&a),
        Command::Plot(a) => cmd_plot(&a),
    }
}

pub fn cmd_generate(a: &GenerateArgs) -> Result<()> {
    if a.length < 2 {
        return Err(Error::invalid(format!("length must be >= 2, got {}", a.length)));
    }
    let setting = SimulationSetting::new(a.setting, a.alpha)?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let pair: SeriesPair<f64> = generate_pair(&setting, a.length, &mut rng)?.with_meta(PairMeta {
        setting: Some(a.setting),
        alpha: Some(a.alpha),
        seed: Some(a.seed),
    });
    io::save_pair(&pair, &a.out)
}

fn estimator_config(a: &EstimateArgs) -> Result<EstimatorConfig> {
    let mut cfg = match &a.config {
        Some(path) => {
            let text = io::read_text(path)?;
            toml::from_str(&text).map_err(|e| Error::Config(e.to_string()))?
        }
        None => EstimatorConfig::default(),
    };
    if let Some(m) = a.m {
        cfg.freq.m = Some(m);
    }
    if let Some(q) = a.q {
        cfg.freq.q = q;
    }
    if let Some(span) = a.span {
        cfg.freq.span = span;
    }
    if let Some(mode) = a.ape_mode {
        cfg.freq.ape_mode = mode;
    }
    cfg.freq.validate()?;
    Ok(cfg)
}

fn selected_estimators(sel: &str) -> Result<Vec<EstimatorId>> {
    if sel.eq_ignore_ascii_case("all") {
        return Ok(EstimatorId::ALL.to_vec());
    }
    sel.split(',').map(str::parse).collect()
}

/// Prints `estimator,h_hat` lines. Every selected estimator is attempted;
/// failures print `NA` and the first one decides the error returned.
pub fn cmd_estimate<W: Write>(a: &EstimateArgs, out: &mut W) -> Result<()> {
    let ids = selected_estimators(&a.estimator)?;
    let cfg = estimator_config(a)?;
    let pair: SeriesPair<f64> = io::load_pair(&a.input)?;
    if pair.len() < MIN_LENGTH {
        return Err(Error::invalid(format!(
            "series has {} observations, need at least {MIN_LENGTH}",
            pair.len()
        )));
    }

    if let Some(path) = &a.curve_out {
        let [id] = ids[..] else {
            return Err(Error::invalid("--curve-out needs exactly one time-domain estimator"));
        };
        let (xp, yp) = (crate::series_gen::profile(pair.x()), crate::series_gen::profile(pair.y()));
        let curve = match id {
            EstimatorId::Dcca => time_domain::dcca_curve(&xp, &yp, &cfg.dcca.grid(pair.len())?, cfg.dcca.aggregation)?,
            EstimatorId::Dmca => time_domain::dmca_curve(&xp, &yp, &cfg.dmca.grid(pair.len())?, cfg.dmca.aggregation)?,
            EstimatorId::Hxa => time_domain::hxa_curve(&xp, &yp, cfg.hxa.tau_max_hi, cfg.hxa.nu)?,
            other => return Err(Error::invalid(format!("{other} has no fluctuation curve"))),
        };
        io::save_curve(&curve, path)?;
    }
    if let Some(path) = &a.periodogram_out {
        let (pg, _) = cfg.freq.smoothed_periodogram(&pair)?;
        io::save_periodogram(&pg, path)?;
    }

    let prepared = crate::estimators::PreparedPair::new(&pair, &cfg);
    let mut first_err = None;
    writeln!(out, "estimator,h_hat")?;
    for id in ids {
        match prepared.estimate(id) {
            Ok(h) => writeln!(out, "{id},{}", io::format_number(h))?,
            Err(e) => {
                eprintln!("{id}: {e}");
                writeln!(out, "{id},NA")?;
                first_err.get_or_insert(e);
            }
        }
    }
    out.flush()?;
    first_err.map_or(Ok(()), Err)
}

pub fn simulate_config(a: &SimulateArgs) -> Result<ExperimentConfig> {
    let mut cfg = match &a.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::preset(a.scale),
    };
    if let Some(seed) = a.seed {
        cfg.master_seed = seed;
    }
    if let Some(reps) = a.reps {
        cfg.n_reps = reps;
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn cmd_simulate(a: &SimulateArgs) -> Result<()> {
    let cfg = simulate_config(a)?;
    let threads = a
        .parallelism
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let reported = AtomicUsize::new(0);
    let quiet = a.quiet;
    let progress = |done: usize, total: usize| {
        if quiet {
            return;
        }
        // roughly every 5%, plus the last one
        let bucket = done * 20 / total;
        if reported.fetch_max(bucket, Ordering::Relaxed) < bucket {
            eprintln!("simulate: {done}/{total} replications");
        }
    };
    if !quiet {
        eprintln!(
            "simulate: {} records on {threads} thread(s), seed {}",
            cfg.record_count(),
            cfg.master_seed
        );
    }
    let records = montecarlo::run_experiment_parallel(&cfg, threads, progress)?;
    let failed = records.iter().filter(|r| r.outcome.h_hat().is_none()).count();
    if !quiet && failed > 0 {
        eprintln!("simulate: {failed} failed estimates flagged in the status column");
    }
    io::save_records(&records, &a.out)
}

pub fn cmd_summarize(a: &SummarizeArgs) -> Result<()> {
    if !a.true_h.is_finite() {
        return Err(Error::invalid("true_h must be finite"));
    }
    let records = io::load_records(&a.input)?;
    io::save_summary(&montecarlo::summarize(&records, a.true_h), &a.out)
}

pub fn cmd_plot(a: &PlotArgs) -> Result<()> {
    let metric: Metric = a.metric.parse()?;
    let rows = io::load_summary(&a.input)?;
    let spec = PlotSpec { metric, setting: a.setting, true_h: a.true_h };
    plot::save_svg(&rows, &spec, &a.out)
}
