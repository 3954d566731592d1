//! Command-line front end.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::acx::{contraction_report, simulate, supervised_pairs, Trajectory};
use crate::bounds::{generalization_report, moment_condition_check, BoundMode, Eps1Form};
use crate::config::Config;
use crate::erm::{erm_fit, FitMethod, FitResult, LossKind};
use crate::error::{Error, Result};
use crate::experiments::{overlay_bounds, run_excess_risk_curve, write_outputs, OutputFiles};
use crate::parallel::Workers;

#[derive(Debug, Parser)]
#[command(
    name = "wdlearn",
    version,
    about = "Simulate AC-X time series, fit ERM predictors and evaluate generalization bounds"
)]
pub struct Cli {
    /// Log level (error, warn, info, debug, trace)
    #[arg(long, global = true, default_value = "warn")]
    pub log_level: String,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a trajectory and write it as CSV
    Simulate(SimulateArgs),
    /// Fit a predictor by empirical risk minimization on a trajectory CSV
    Fit(FitArgs),
    /// Evaluate the excess-risk bound at a sample size and confidence level
    Bound(BoundArgs),
    /// Run the Monte Carlo excess-risk experiment
    Experiment(ExperimentArgs),
    /// Check the contraction and moment conditions
    Check(CheckArgs),
}

#[derive(Debug, Args)]
pub struct ConfigArg {
    /// JSON configuration file (built-in defaults when omitted)
    #[arg(long, short)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub config: ConfigArg,
    /// Number of observations kept after burn-in
    #[arg(long)]
    pub n: usize,
    /// Random seed (overrides experiment.seed)
    #[arg(long)]
    pub seed: Option<u64>,
    /// Burn-in steps (overrides experiment.burn_in)
    #[arg(long)]
    pub burn_in: Option<usize>,
    /// Output CSV path; stdout when omitted
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MethodArg {
    Auto,
    ClosedFormLeastSquares,
    NelderMead,
    GridRefine,
}

impl From<MethodArg> for FitMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Auto => FitMethod::Auto,
            MethodArg::ClosedFormLeastSquares => FitMethod::ClosedFormLeastSquares,
            MethodArg::NelderMead => FitMethod::NelderMead,
            MethodArg::GridRefine => FitMethod::GridRefine,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum LossArg {
    Absolute,
    Squared,
}

impl From<LossArg> for LossKind {
    fn from(l: LossArg) -> Self {
        match l {
            LossArg::Absolute => LossKind::Absolute,
            LossArg::Squared => LossKind::Squared,
        }
    }
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub config: ConfigArg,
    /// Training trajectory CSV (header t,y,chi_1..chi_dx)
    #[arg(long)]
    pub train: PathBuf,
    /// Loss (overrides loss.kind)
    #[arg(long, value_enum)]
    pub loss: Option<LossArg>,
    /// Optimizer (overrides experiment.fit.method)
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
    /// Restart seed (overrides experiment.fit.seed)
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output JSON path; JSON goes to stdout when omitted
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Slow,
    Fast,
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    #[command(flatten)]
    pub config: ConfigArg,
    /// Sample size
    #[arg(long)]
    pub n: f64,
    /// Confidence parameter in (0, 1); the bound holds with probability 1 - 2 eta
    #[arg(long)]
    pub eta: f64,
    #[arg(long, value_enum, default_value = "slow")]
    pub mode: ModeArg,
    /// Use the alternative form [log(1/eta)/Cn1]^(mu+2) of eps1'
    #[arg(long)]
    pub as_stated: bool,
    /// Also write the report as JSON
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// Print JSON instead of the table
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[command(flatten)]
    pub config: ConfigArg,
    /// R = 100, n in {100, 400, 1600}
    #[arg(long, conflicts_with = "full")]
    pub desk: bool,
    /// R = 500, n = 100, 120, ..., 2000
    #[arg(long)]
    pub full: bool,
    /// Worker threads; 0 uses every core (overrides experiment.workers)
    #[arg(long)]
    pub workers: Option<usize>,
    /// Base seed (overrides experiment.seed)
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory (overrides output.dir)
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Log-scaled y axis in the SVG plot
    #[arg(long)]
    pub log_y: bool,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub config: ConfigArg,
    /// Moment order r used for the innovation norm
    #[arg(long, default_value_t = 2.0)]
    pub r: f64,
    /// Largest k in the moment-condition check
    #[arg(long, default_value_t = 10)]
    pub k_max: u32,
    /// Initial number of terms in the moment sums
    #[arg(long, default_value_t = 64)]
    pub truncation: usize,
    /// Also write the report as JSON
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

fn load(arg: &ConfigArg) -> Result<Config> {
    match &arg.config {
        Some(p) => Config::load(p),
        None => Ok(Config::default()),
    }
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let s = serde_json::to_string_pretty(value)?;
    fs::write(path, s + "\n").map_err(|e| Error::io(path, e))
}

fn stdout_err(e: io::Error) -> Error {
    Error::io("<stdout>", e)
}

fn tsv(out: &mut impl Write, rows: &[(&str, String)]) -> Result<()> {
    for (k, v) in rows {
        writeln!(out, "{k}\t{v}").map_err(stdout_err)?;
    }
    Ok(())
}

pub fn cmd_simulate(args: &SimulateArgs, out: &mut impl Write) -> Result<()> {
    let cfg = load(&args.config)?;
    if args.n == 0 {
        return Err(Error::param("--n must be positive"));
    }
    let seed = args.seed.unwrap_or(cfg.experiment.seed);
    let burn_in = args.burn_in.unwrap_or(cfg.experiment.burn_in);
    let traj = simulate(&cfg.model, &cfg.covariate, &cfg.innovation, args.n, burn_in, seed)?;
    match &args.out {
        Some(p) => traj.save_csv(p),
        None => traj.write_csv(&mut *out).map_err(stdout_err),
    }
}

#[derive(Debug, Serialize)]
struct FitOutput {
    loss: LossKind,
    pairs: usize,
    #[serde(flatten)]
    fit: FitResult,
}

pub fn cmd_fit(args: &FitArgs, out: &mut impl Write) -> Result<()> {
    let cfg = load(&args.config)?;
    let traj = Trajectory::load_csv(&args.train)?;
    if traj.dx != cfg.covariate.dim {
        return Err(Error::DimensionMismatch {
            expected: cfg.covariate.dim,
            got: traj.dx,
        });
    }
    let data = supervised_pairs(&traj, cfg.predictor.q)?;
    let mut fit_cfg = cfg.experiment.fit.clone();
    if let Some(m) = args.method {
        fit_cfg.method = m.into();
    }
    if let Some(s) = args.seed {
        fit_cfg.seed = s;
    }
    let mut loss = cfg.loss;
    if let Some(l) = args.loss {
        loss.kind = l.into();
    }
    let predictor = cfg.predictor.predictor(traj.dx);
    let fit = erm_fit(&predictor, &cfg.predictor.param_box(traj.dx), &data, &loss, &fit_cfg)?;
    let result = FitOutput {
        loss: loss.kind,
        pairs: data.len(),
        fit,
    };
    match &args.out {
        Some(p) => {
            write_json(&result, p)?;
            let theta: Vec<String> = result.fit.theta.iter().map(|v| v.to_string()).collect();
            tsv(
                out,
                &[
                    ("loss", result.loss.name().to_string()),
                    ("pairs", result.pairs.to_string()),
                    ("theta", theta.join(",")),
                    ("empirical_risk", result.fit.empirical_risk.to_string()),
                    ("iterations", result.fit.iterations.to_string()),
                    ("converged", result.fit.converged.to_string()),
                    ("box_active", result.fit.box_active.to_string()),
                    ("ridge_used", result.fit.ridge_used.to_string()),
                ],
            )
        }
        None => writeln!(out, "{}", serde_json::to_string_pretty(&result)?).map_err(stdout_err),
    }
}

pub fn cmd_bound(args: &BoundArgs, out: &mut impl Write) -> Result<()> {
    let cfg = load(&args.config)?;
    let bc = cfg.bound_constants()?;
    let mut options = cfg.report_options();
    if args.as_stated {
        options.eps1_form = Eps1Form::AsStated;
    }
    let mode = match args.mode {
        ModeArg::Slow => BoundMode::Slow,
        ModeArg::Fast => BoundMode::Fast,
    };
    let r = generalization_report(args.n, args.eta, mode, &bc, &cfg.dependence, &options)?;
    if r.small_n_caveat || !r.min_n_satisfied {
        log::warn!(
            "bound reported outside its validity range (n = {}, min_n = {})",
            r.n,
            r.min_n
        );
    }
    if let Some(p) = &args.out {
        write_json(&r, p)?;
    }
    if args.json {
        return writeln!(out, "{}", serde_json::to_string_pretty(&r)?).map_err(stdout_err);
    }
    let opt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| x.to_string());
    let mode_name = match mode {
        BoundMode::Slow => "slow",
        BoundMode::Fast => "fast",
    };
    tsv(
        out,
        &[
            ("mode", mode_name.to_string()),
            ("kind", r.kind.name().to_string()),
            ("n", r.n.to_string()),
            ("eta", r.eta.to_string()),
            ("confidence", r.confidence.to_string()),
            ("M", bc.m.to_string()),
            ("L", bc.l.to_string()),
            ("C1", r.constants.c1.to_string()),
            ("C2", r.constants.c2.to_string()),
            ("C4", r.constants.c4.to_string()),
            ("C5", r.constants.c5.to_string()),
            ("Cn1", r.sample.cn1.to_string()),
            ("Cpn", r.sample.cpn.to_string()),
            ("Cn2", r.sample.cn2.to_string()),
            ("Cpn2", r.sample.cpn2.to_string()),
            ("An", r.sample.an.to_string()),
            ("eps1", opt(r.eps1)),
            ("eps1p", opt(r.eps1p)),
            ("eps2", opt(r.eps2)),
            ("eps2p", opt(r.eps2p)),
            ("total", r.total.to_string()),
            ("min_n", r.min_n.to_string()),
            ("min_n_satisfied", r.min_n_satisfied.to_string()),
            ("small_n_caveat", r.small_n_caveat.to_string()),
        ],
    )
}

pub fn cmd_experiment(args: &ExperimentArgs, out: &mut impl Write) -> Result<()> {
    let cfg = load(&args.config)?;
    let mut ecfg = cfg.experiment_config();
    if args.desk {
        ecfg = ecfg.desk();
    }
    if args.full {
        ecfg = ecfg.full();
    }
    if let Some(s) = args.seed {
        ecfg.base_seed = s;
    }
    let worker_count = args.workers.unwrap_or(cfg.experiment.workers);
    let workers = Workers::from_count(Some(worker_count));
    let result = run_excess_risk_curve(&ecfg, workers)?;
    let overlay = overlay_bounds(&result, &cfg.overlay_inputs(), cfg.input_width())?;
    if overlay.violations > 0 {
        log::warn!("{} bound dominance violations", overlay.violations);
    }
    let dir = args.out_dir.clone().unwrap_or_else(|| cfg.output.dir.clone());
    let files = OutputFiles::in_dir(&dir);
    write_outputs(
        &ecfg,
        &result,
        Some(&overlay),
        cfg.experiment.eta,
        &files,
        args.log_y || cfg.output.log_y,
        (worker_count > 0).then_some(worker_count),
    )?;
    writeln!(out, "loss\tn\tmean_excess\tsd\treps\tslow_bound\tfast_bound").map_err(stdout_err)?;
    for (r, o) in result.rows.iter().zip(&overlay.rows) {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            r.loss.name(),
            r.n,
            r.mean_excess,
            r.sd,
            r.reps,
            o.slow_bound,
            o.fast_bound
        )
        .map_err(stdout_err)?;
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct CheckOutput {
    contraction: crate::acx::ContractionReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    moment: Option<crate::bounds::MomentReport>,
}

pub fn cmd_check(args: &CheckArgs, out: &mut impl Write) -> Result<()> {
    let cfg = load(&args.config)?;
    if !(args.r >= 1.0) {
        return Err(Error::param("--r must be at least 1"));
    }
    let xi = cfg.innovation.lr_norm(args.r);
    let c = contraction_report(&cfg.model, &cfg.covariate, xi);
    writeln!(out, "section\tk\talpha_g\talpha_y\talpha").map_err(stdout_err)?;
    for t in &c.terms {
        let y = t.alpha_y_f + xi * t.alpha_y_m + xi * xi * t.alpha_y_h;
        writeln!(out, "contraction\t{}\t{}\t{}\t{}", t.k, t.alpha_g, y, t.alpha).map_err(stdout_err)?;
    }
    tsv(
        out,
        &[
            ("contraction_xi_norm", c.xi_norm_r.to_string()),
            ("contraction_y_sum", c.y_sum.to_string()),
            ("contraction_total", c.total.to_string()),
            ("contraction_satisfied", c.satisfied.to_string()),
        ],
    )?;
    let dp = &cfg.dependence;
    let moment = match &dp.decay {
        Some(decay) => {
            let m = moment_condition_check(decay, dp.mu, dp.l1, dp.l2, args.k_max, args.truncation)?;
            writeln!(out, "section\tk\tlhs\trhs\tsatisfied").map_err(stdout_err)?;
            for r in &m.rows {
                writeln!(out, "moment\t{}\t{}\t{}\t{}", r.k, r.lhs, r.rhs, r.satisfied).map_err(stdout_err)?;
            }
            tsv(out, &[("moment_satisfied", m.satisfied.to_string())])?;
            Some(m)
        }
        None => {
            tsv(out, &[("moment_satisfied", "unchecked (no dependence.decay)".to_string())])?;
            None
        }
    };
    if let Some(p) = &args.out {
        write_json(
            &CheckOutput {
                contraction: c,
                moment,
            },
            p,
        )?;
    }
    Ok(())
}

pub fn run(cli: &Cli, out: &mut impl Write) -> Result<()> {
    match &cli.command {
        Command::Simulate(a) => cmd_simulate(a, out),
        Command::Fit(a) => cmd_fit(a, out),
        Command::Bound(a) => cmd_bound(a, out),
        Command::Experiment(a) => cmd_experiment(a, out),
        Command::Check(a) => cmd_check(a, out),
    }
}

/// 0 on success, 2 for invalid input, 3 for failures at run time.
pub fn exit_code(result: &Result<()>) -> ExitCode {
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is_validation() => ExitCode::from(2),
        Err(_) => ExitCode::from(3),
    }
}

pub fn main_with_args() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::new()
        .parse_filters(&cli.log_level)
        .format_timestamp(None)
        .init();
    let stdout = io::stdout();
    let mut lock = stdout.lock();
    let result = run(&cli, &mut lock);
    if let Err(e) = &result {
        eprintln!("error: {e}");
    }
    exit_code(&result)
}
