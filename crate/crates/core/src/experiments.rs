//! Monte Carlo excess-risk experiment: reference fit, learning curve over an
//! n-grid, bound overlay, CSV/SVG/JSON outputs.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::acx::{simulate, supervised_pairs, AcxModelSpec, CovariateSpec, Dataset, InnovationSpec};
use crate::bounds::{
    generalization_report, min_n_fast, min_n_slow, BoundConstants, BoundMode, DependenceParams,
    ReportOptions,
};
use crate::erm::{erm_fit, risk_estimate, FitConfig, LossKind, LossSpec};
use crate::error::{Error, Result};
use crate::hypothesis::{dot, LinearArPredictor, ParamBox, Predictor};
use crate::parallel::{map_indexed, Workers};
use crate::rng::{derive_seed, EVAL, FIT, TARGET, TRAIN};

/// Linear autoregressive predictor and its parameter box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictorSpec {
    /// Number of lags `q`.
    #[serde(default = "PredictorSpec::default_q")]
    pub q: usize,
    /// Defaults to `[-10, 10]^d`.
    #[serde(default, rename = "box", skip_serializing_if = "Option::is_none")]
    pub param_box: Option<ParamBox>,
}

impl PredictorSpec {
    fn default_q() -> usize {
        1
    }

    pub fn predictor(&self, dx: usize) -> LinearArPredictor {
        LinearArPredictor::new(self.q, dx)
    }

    pub fn param_box(&self, dx: usize) -> ParamBox {
        self.param_box
            .clone()
            .unwrap_or_else(|| ParamBox::cube(self.predictor(dx).n_params(), 10.0))
    }
}

impl Default for PredictorSpec {
    fn default() -> Self {
        PredictorSpec {
            q: Self::default_q(),
            param_box: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub model: AcxModelSpec,
    pub covariate: CovariateSpec,
    pub innovation: InnovationSpec,
    pub burn_in: usize,
    pub predictor: PredictorSpec,
    pub losses: Vec<LossKind>,
    /// `B_Y`; estimated as `1.05 max|Y|` on the reference sample when absent.
    pub output_bound: Option<f64>,
    pub reference_size: usize,
    pub n_grid: Vec<usize>,
    pub replications: usize,
    /// Fixed evaluation length; `None` evaluates on `n` points.
    pub eval_size: Option<usize>,
    pub base_seed: u64,
    pub fit: FitConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            model: AcxModelSpec::reference_arx(),
            covariate: CovariateSpec::default(),
            innovation: InnovationSpec::default(),
            burn_in: 1000,
            predictor: PredictorSpec::default(),
            losses: vec![LossKind::Absolute, LossKind::Squared],
            output_bound: None,
            reference_size: 10_000,
            n_grid: full_grid(),
            replications: 500,
            eval_size: None,
            base_seed: 1,
            fit: FitConfig::default(),
        }
    }
}

/// `n = 100, 120, ..., 2000`.
pub fn full_grid() -> Vec<usize> {
    (100..=2000).step_by(20).collect()
}

pub fn desk_grid() -> Vec<usize> {
    vec![100, 400, 1600]
}

impl ExperimentConfig {
    /// `R = 100`, `n ∈ {100, 400, 1600}`.
    pub fn desk(mut self) -> Self {
        self.n_grid = desk_grid();
        self.replications = 100;
        self
    }

    pub fn full(mut self) -> Self {
        self.n_grid = full_grid();
        self.replications = 500;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate(&self.covariate)?;
        self.innovation.validate()?;
        let p = self.predictor.q;
        if p == 0 {
            return Err(Error::param("predictor needs at least one lag"));
        }
        let predictor = self.predictor.predictor(self.covariate.dim);
        let b = self.predictor.param_box(self.covariate.dim);
        b.validate()?;
        if b.dim() != predictor.n_params() {
            return Err(Error::DimensionMismatch {
                expected: predictor.n_params(),
                got: b.dim(),
            });
        }
        if self.losses.is_empty() {
            return Err(Error::param("at least one loss is required"));
        }
        if self.replications == 0 {
            return Err(Error::param("replications must be positive"));
        }
        if self.reference_size <= p {
            return Err(Error::InsufficientData {
                needed: p,
                got: self.reference_size,
            });
        }
        if let Some(&n) = self.n_grid.iter().find(|&&n| n <= p) {
            return Err(Error::InsufficientData { needed: p, got: n });
        }
        if self.eval_size == Some(0) {
            return Err(Error::param("eval_size must be positive"));
        }
        if let Some(b) = self.output_bound {
            if !(b > 0.0 && b.is_finite()) {
                return Err(Error::param("output_bound must be positive"));
            }
        }
        if !(self.fit.tolerance > 0.0) {
            return Err(Error::param("fit tolerance must be positive"));
        }
        Ok(())
    }

    /// `len` supervised pairs from a fresh trajectory.
    pub fn sample(&self, len: usize, seed: u64) -> Result<Dataset> {
        let q = self.predictor.q;
        let traj = simulate(
            &self.model,
            &self.covariate,
            &self.innovation,
            len + q,
            self.burn_in,
            seed,
        )?;
        supervised_pairs(&traj, q)
    }
}

/// `θ̃` and `R̃₁(θ̃)` for one loss.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetEstimate {
    pub loss: LossKind,
    pub theta: Vec<f64>,
    pub risk: f64,
    pub output_bound: f64,
    pub box_active: bool,
    pub seed: u64,
}

/// Fits on the length-`m` reference sample drawn from the `TARGET` stream.
pub fn estimate_target(config: &ExperimentConfig, loss: LossKind) -> Result<TargetEstimate> {
    config.validate()?;
    let seed = derive_seed(config.base_seed, &[TARGET]);
    let data = config.sample(config.reference_size, seed)?;
    let output_bound = config.output_bound.unwrap_or_else(|| {
        let m = data.targets().iter().fold(0.0f64, |m, y| m.max(y.abs()));
        1.05 * m
    });
    let predictor = config.predictor.predictor(config.covariate.dim);
    let fit_cfg = FitConfig {
        seed: derive_seed(seed, &[FIT]),
        ..config.fit.clone()
    };
    let fit = erm_fit(
        &predictor,
        &config.predictor.param_box(config.covariate.dim),
        &data,
        &LossSpec::new(loss),
        &fit_cfg,
    )?;
    Ok(TargetEstimate {
        loss,
        theta: fit.theta,
        risk: fit.empirical_risk,
        output_bound,
        box_active: fit.box_active,
        seed,
    })
}

fn loss_index(config: &ExperimentConfig, loss: LossKind) -> u64 {
    config.losses.iter().position(|&l| l == loss).unwrap_or(0) as u64
}

pub fn train_seed(base: u64, loss_idx: u64, n: usize, rep: usize) -> u64 {
    derive_seed(base, &[loss_idx, n as u64, rep as u64, TRAIN])
}

pub fn eval_seed(base: u64, loss_idx: u64, n: usize, rep: usize) -> u64 {
    derive_seed(base, &[loss_idx, n as u64, rep as u64, EVAL])
}

/// One training/evaluation cycle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Replication {
    pub loss: LossKind,
    pub n: usize,
    pub rep: usize,
    pub train_risk: f64,
    pub eval_risk: f64,
    /// `|R̃₂(θ̂) - R̃₁(θ̃)|` for this replication alone.
    pub abs_excess: f64,
    pub converged: bool,
    pub box_active: bool,
}

pub fn run_replication(
    config: &ExperimentConfig,
    target: &TargetEstimate,
    n: usize,
    rep: usize,
) -> Result<Replication> {
    let li = loss_index(config, target.loss);
    let predictor = config.predictor.predictor(config.covariate.dim);
    let loss = LossSpec::new(target.loss);
    let ts = train_seed(config.base_seed, li, n, rep);
    let train = config.sample(n, ts)?;
    let fit = erm_fit(
        &predictor,
        &config.predictor.param_box(config.covariate.dim),
        &train,
        &loss,
        &FitConfig {
            seed: derive_seed(ts, &[FIT]),
            ..config.fit.clone()
        },
    )?;
    let eval = config.sample(
        config.eval_size.unwrap_or(n),
        eval_seed(config.base_seed, li, n, rep),
    )?;
    let eval_risk = risk_estimate(&predictor, &fit.theta, &eval, &loss)?;
    Ok(Replication {
        loss: target.loss,
        n,
        rep,
        train_risk: fit.empirical_risk,
        eval_risk,
        abs_excess: (eval_risk - target.risk).abs(),
        converged: fit.converged,
        box_active: fit.box_active,
    })
}

/// One point of the learning curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub loss: LossKind,
    pub n: usize,
    /// `|mean_r R̃₂(θ̂_r) - R̃₁(θ̃)|`.
    pub mean_excess: f64,
    /// Standard deviation of `R̃₂(θ̂_r)` across replications.
    pub sd: f64,
    pub reps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub rows: Vec<CurveRow>,
    pub replications: Vec<Replication>,
    pub targets: Vec<TargetEstimate>,
    pub failures: usize,
    pub wall_time_secs: f64,
}

/// Mean and sample standard deviation, summed in the given order.
fn mean_sd(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    if x.len() < 2 {
        return (mean, 0.0);
    }
    let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Aggregates replication records into curve rows. Also used to re-derive
/// the curve from persisted records.
pub fn aggregate(replications: &[Replication], targets: &[TargetEstimate]) -> Vec<CurveRow> {
    let mut rows = Vec::new();
    for t in targets {
        let mut ns: Vec<usize> = replications
            .iter()
            .filter(|r| r.loss == t.loss)
            .map(|r| r.n)
            .collect();
        ns.dedup();
        for n in ns {
            let mut recs: Vec<&Replication> = replications
                .iter()
                .filter(|r| r.loss == t.loss && r.n == n)
                .collect();
            recs.sort_by_key(|r| r.rep);
            let eval: Vec<f64> = recs.iter().map(|r| r.eval_risk).collect();
            let (mean, sd) = mean_sd(&eval);
            rows.push(CurveRow {
                loss: t.loss,
                n,
                mean_excess: (mean - t.risk).abs(),
                sd,
                reps: eval.len(),
            });
        }
    }
    rows
}

/// Runs every `(loss, n, replication)` job. Failed replications are logged
/// and dropped; more than 1% failures aborts.
pub fn run_excess_risk_curve(config: &ExperimentConfig, workers: Workers) -> Result<ExperimentResult> {
    config.validate()?;
    let start = Instant::now();
    let mut targets = Vec::with_capacity(config.losses.len());
    for &loss in &config.losses {
        targets.push(estimate_target(config, loss)?);
    }
    let per_loss = config.n_grid.len() * config.replications;
    let total = per_loss * targets.len();
    let outcomes = map_indexed(total, workers, |job| {
        let t = &targets[job / per_loss];
        let within = job % per_loss;
        let n = config.n_grid[within / config.replications];
        let rep = within % config.replications;
        run_replication(config, t, n, rep)
    });
    let mut replications = Vec::with_capacity(total);
    let mut failures = 0;
    for (job, o) in outcomes.into_iter().enumerate() {
        match o {
            Ok(r) => replications.push(r),
            Err(e) => {
                failures += 1;
                log::warn!("replication job {job} failed: {e}");
            }
        }
    }
    if failures * 100 > total {
        return Err(Error::ReplicationFailures { failed: failures, total });
    }
    let rows = aggregate(&replications, &targets);
    Ok(ExperimentResult {
        rows,
        replications,
        targets,
        failures,
        wall_time_secs: start.elapsed().as_secs_f64(),
    })
}

/// Per-pair losses of a fixed predictor on a fresh trajectory, for
/// [`variance_constant_estimate`](crate::bounds::variance_constant_estimate).
pub fn loss_series(
    config: &ExperimentConfig,
    theta: &[f64],
    loss: LossKind,
    seed: u64,
    n: usize,
) -> Result<Vec<f64>> {
    let predictor = config.predictor.predictor(config.covariate.dim);
    let data = config.sample(n, seed)?;
    let spec = LossSpec::new(loss);
    let mut row = vec![0.0; predictor.n_params()];
    Ok(data
        .iter()
        .map(|(x, y)| {
            predictor.features(x, &mut row);
            spec.eval(y, dot(theta, &row))
        })
        .collect())
}

/// One-sided paired sign test of `after < before`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignTest {
    pub successes: usize,
    /// Pairs without ties.
    pub trials: usize,
    /// `P(X >= successes)` for `X ~ Bin(trials, 1/2)`.
    pub p_value: f64,
}

pub fn sign_test(before: &[f64], after: &[f64]) -> SignTest {
    let mut successes = 0;
    let mut trials = 0;
    for (b, a) in before.iter().zip(after) {
        if a < b {
            successes += 1;
            trials += 1;
        } else if a > b {
            trials += 1;
        }
    }
    SignTest {
        successes,
        trials,
        p_value: binomial_upper_tail(trials, successes),
    }
}

fn ln_choose(n: usize, k: usize) -> f64 {
    (1..=k).map(|i| ((n - k + i) as f64 / i as f64).ln()).sum()
}

fn binomial_upper_tail(n: usize, k: usize) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let half = (0.5f64).ln() * n as f64;
    (k..=n).map(|i| (ln_choose(n, i) + half).exp()).sum::<f64>().min(1.0)
}

/// Inputs for the theoretical columns of the overlay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OverlayInputs {
    pub eta: f64,
    pub dependence: DependenceParams,
    pub c0: f64,
    /// Hölder dimension and smoothness; the predictor input width when absent.
    pub d: Option<f64>,
    pub s: Option<f64>,
    pub options: ReportOptions,
}

impl Default for OverlayInputs {
    fn default() -> Self {
        OverlayInputs {
            eta: 0.05,
            dependence: DependenceParams::default(),
            c0: 1.0,
            d: None,
            s: None,
            options: ReportOptions::default(),
        }
    }
}

impl OverlayInputs {
    /// Loss-specific bound constants: `M` and `L` from the loss, `B_Y` from
    /// the target estimate.
    pub fn constants(&self, target: &TargetEstimate, input_width: usize) -> Result<BoundConstants> {
        let loss = LossSpec::new(target.loss).with_bound(target.output_bound);
        Ok(BoundConstants {
            m: loss.sup()?,
            l: loss.lipschitz()?,
            c0: self.c0,
            d: self.d.unwrap_or(input_width as f64),
            s: self.s.unwrap_or(input_width as f64),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlayRow {
    pub loss: LossKind,
    pub n: usize,
    pub empirical_excess: f64,
    pub slow_bound: f64,
    pub fast_bound: f64,
    pub min_n_slow_ok: bool,
    pub min_n_fast_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Overlay {
    pub rows: Vec<OverlayRow>,
    pub min_n_slow: Vec<(LossKind, f64)>,
    pub min_n_fast: Vec<(LossKind, f64)>,
    /// Rows where the slow min-n condition holds.
    pub checked: usize,
    /// Checked rows where `ε₁ + ε′₁` falls below the empirical excess.
    pub violations: usize,
}

pub fn overlay_bounds(
    result: &ExperimentResult,
    inputs: &OverlayInputs,
    input_width: usize,
) -> Result<Overlay> {
    let mut rows = Vec::with_capacity(result.rows.len());
    let mut mins_slow = Vec::new();
    let mut mins_fast = Vec::new();
    let (mut checked, mut violations) = (0, 0);
    for t in &result.targets {
        let bc = inputs.constants(t, input_width)?;
        let dp = &inputs.dependence;
        let ms = min_n_slow(inputs.eta, &bc, dp)?;
        let mf = min_n_fast(inputs.eta, &bc, dp)?;
        mins_slow.push((t.loss, ms));
        mins_fast.push((t.loss, mf));
        for r in result.rows.iter().filter(|r| r.loss == t.loss) {
            let n = r.n as f64;
            let slow = generalization_report(n, inputs.eta, BoundMode::Slow, &bc, dp, &inputs.options)?;
            let fast = generalization_report(n, inputs.eta, BoundMode::Fast, &bc, dp, &inputs.options)?;
            if slow.min_n_satisfied {
                checked += 1;
                if slow.total < r.mean_excess {
                    violations += 1;
                }
            }
            rows.push(OverlayRow {
                loss: t.loss,
                n: r.n,
                empirical_excess: r.mean_excess,
                slow_bound: slow.total,
                fast_bound: fast.total,
                min_n_slow_ok: slow.min_n_satisfied,
                min_n_fast_ok: fast.min_n_satisfied,
            });
        }
    }
    Ok(Overlay {
        rows,
        min_n_slow: mins_slow,
        min_n_fast: mins_fast,
        checked,
        violations,
    })
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        kind => {
            let line = match &kind {
                csv::ErrorKind::Deserialize { pos: Some(p), .. } => p.line() as usize,
                csv::ErrorKind::UnequalLengths { pos: Some(p), .. } => p.line() as usize,
                _ => 0,
            };
            Error::Parse {
                path: path.to_path_buf(),
                line,
                message: format!("{kind:?}"),
            }
        }
    }
}

/// Writes serializable rows with a header derived from the field names; an
/// empty slice still gets `header`.
pub fn write_rows<T: Serialize>(rows: &[T], header: &[&str], path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    w.write_record(header).map_err(|e| csv_error(path, e))?;
    for r in rows {
        w.serialize(r).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_rows<T: for<'de> Deserialize<'de>>(path: &Path, header: &[&str]) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let got = r.headers().map_err(|e| csv_error(path, e))?.clone();
    if got.iter().ne(header.iter().copied()) {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: format!("expected header `{}`", header.join(",")),
        });
    }
    r.deserialize()
        .map(|row| row.map_err(|e| csv_error(path, e)))
        .collect()
}

pub const CURVE_HEADER: [&str; 5] = ["loss", "n", "mean_excess", "sd", "reps"];
pub const REPLICATION_HEADER: [&str; 8] = [
    "loss",
    "n",
    "rep",
    "train_risk",
    "eval_risk",
    "abs_excess",
    "converged",
    "box_active",
];
pub const OVERLAY_HEADER: [&str; 7] = [
    "loss",
    "n",
    "empirical_excess",
    "slow_bound",
    "fast_bound",
    "min_n_slow_ok",
    "min_n_fast_ok",
];

/// `loss,n,mean_excess,sd,reps`.
pub fn emit_csv(rows: &[CurveRow], path: &Path) -> Result<()> {
    write_rows(rows, &CURVE_HEADER, path)
}

pub fn read_curve_csv(path: &Path) -> Result<Vec<CurveRow>> {
    read_rows(path, &CURVE_HEADER)
}

pub fn emit_replications_csv(rows: &[Replication], path: &Path) -> Result<()> {
    write_rows(rows, &REPLICATION_HEADER, path)
}

pub fn read_replications_csv(path: &Path) -> Result<Vec<Replication>> {
    read_rows(path, &REPLICATION_HEADER)
}

pub fn emit_overlay_csv(rows: &[OverlayRow], path: &Path) -> Result<()> {
    write_rows(rows, &OVERLAY_HEADER, path)
}

const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// Standalone SVG line chart of mean excess against `n`, one polyline per loss.
pub fn render_svg(rows: &[CurveRow], log_y: bool) -> String {
    let (w, h) = (640.0, 400.0);
    let (left, right, top, bottom) = (70.0, 20.0, 20.0, 50.0);
    let mut losses: Vec<LossKind> = Vec::new();
    for r in rows {
        if !losses.contains(&r.loss) {
            losses.push(r.loss);
        }
    }
    let ty = |v: f64| if log_y { v.max(1e-300).log10() } else { v };
    let xs = rows.iter().map(|r| r.n as f64);
    let ys = rows.iter().map(|r| ty(r.mean_excess));
    let (x0, x1) = bounds_of(xs);
    let (y0, y1) = bounds_of(ys);
    let px = |x: f64| left + (x - x0) / (x1 - x0) * (w - left - right);
    let py = |y: f64| h - bottom - (y - y0) / (y1 - y0) * (h - top - bottom);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<path d="M{left} {top} V{} H{}" fill="none" stroke="black"/>"#,
        h - bottom,
        w - right
    );
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let xv = x0 + f * (x1 - x0);
        let yv = y0 + f * (y1 - y0);
        let ylab = if log_y { format!("1e{yv:.1}") } else { format!("{yv:.3}") };
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{}" text-anchor="middle">{:.0}</text>"#,
            px(xv),
            h - bottom + 18.0,
            xv
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{:.1}" text-anchor="end">{ylab}</text>"#,
            left - 6.0,
            py(yv) + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{}" text-anchor="middle">n</text>"#,
        (left + w - right) / 2.0,
        h - 10.0
    );
    for (i, loss) in losses.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let pts: Vec<String> = rows
            .iter()
            .filter(|r| r.loss == *loss)
            .map(|r| format!("{:.2},{:.2}", px(r.n as f64), py(ty(r.mean_excess))))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline class="series" data-loss="{}" fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
            loss.name(),
            pts.join(" ")
        );
        let ly = top + 16.0 * (i as f64 + 1.0);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{ly}" fill="{color}" text-anchor="end">{}</text>"#,
            w - right - 6.0,
            loss.name()
        );
    }
    s.push_str("</svg>\n");
    s
}

fn bounds_of(it: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = it
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi - lo <= 0.0 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

pub fn emit_svg_plot(rows: &[CurveRow], path: &Path, log_y: bool) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, render_svg(rows, log_y)).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest<'a> {
    pub version: &'static str,
    pub config: &'a ExperimentConfig,
    pub base_seed: u64,
    pub targets: &'a [TargetEstimate],
    pub failures: usize,
    pub wall_time_secs: f64,
    pub workers: Option<usize>,
    pub files: Vec<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub overlay: Option<OverlaySummary>,
}

#[derive(Debug, Clone, Serialize)]
pub struct OverlaySummary {
    pub eta: f64,
    pub checked: usize,
    pub violations: usize,
    pub min_n_slow: Vec<(LossKind, f64)>,
    pub min_n_fast: Vec<(LossKind, f64)>,
}

/// Paths written by [`write_outputs`].
#[derive(Debug, Clone)]
pub struct OutputFiles {
    pub curve: PathBuf,
    pub replications: PathBuf,
    pub overlay: PathBuf,
    pub plot: PathBuf,
    pub manifest: PathBuf,
}

impl OutputFiles {
    pub fn in_dir(dir: &Path) -> Self {
        OutputFiles {
            curve: dir.join("excess_risk.csv"),
            replications: dir.join("replications.csv"),
            overlay: dir.join("overlay.csv"),
            plot: dir.join("excess_risk.svg"),
            manifest: dir.join("manifest.json"),
        }
    }
}

pub fn write_outputs(
    config: &ExperimentConfig,
    result: &ExperimentResult,
    overlay: Option<&Overlay>,
    overlay_eta: f64,
    files: &OutputFiles,
    log_y: bool,
    workers: Option<usize>,
) -> Result<()> {
    emit_csv(&result.rows, &files.curve)?;
    emit_replications_csv(&result.replications, &files.replications)?;
    emit_svg_plot(&result.rows, &files.plot, log_y)?;
    let mut written = vec![files.curve.clone(), files.replications.clone(), files.plot.clone()];
    if let Some(o) = overlay {
        emit_overlay_csv(&o.rows, &files.overlay)?;
        written.push(files.overlay.clone());
    }
    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION"),
        config,
        base_seed: config.base_seed,
        targets: &result.targets,
        failures: result.failures,
        wall_time_secs: result.wall_time_secs,
        workers,
        files: written,
        overlay: overlay.map(|o| OverlaySummary {
            eta: overlay_eta,
            checked: o.checked,
            violations: o.violations,
            min_n_slow: o.min_n_slow.clone(),
            min_n_fast: o.min_n_fast.clone(),
        }),
    };
    let json = serde_json::to_string_pretty(&manifest)?;
    fs::write(&files.manifest, json + "\n").map_err(|e| Error::io(&files.manifest, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> ExperimentConfig {
        ExperimentConfig {
            reference_size: 500,
            n_grid: vec![50, 200],
            replications: 6,
            burn_in: 200,
            fit: FitConfig {
                restarts: 2,
                ..Default::default()
            },
            ..Default::default()
        }
    }

    #[test]
    fn sign_test_tail() {
        assert_eq!(binomial_upper_tail(10, 0), 1.0);
        assert!((binomial_upper_tail(10, 10) - 0.5f64.powi(10)).abs() < 1e-18);
        // 59 of 100 is the smallest count rejecting at 5%
        assert!(binomial_upper_tail(100, 59) < 0.05);
        assert!(binomial_upper_tail(100, 58) > 0.05);
        let t = sign_test(&[1.0, 2.0, 3.0], &[0.5, 2.0, 4.0]);
        assert_eq!((t.successes, t.trials), (1, 2));
    }

    #[test]
    fn zero_model_target() {
        let cfg = ExperimentConfig {
            model: AcxModelSpec::Arx {
                lags: vec![0.0, 0.0],
                covariate_coef: vec![0.0],
                timing: Default::default(),
            },
            innovation: InnovationSpec::CustomBounded {
                lower: -1.0,
                upper: 1.0,
                scale: 0.0,
            },
            covariate: CovariateSpec {
                innovation: InnovationSpec::CustomBounded {
                    lower: -1.0,
                    upper: 1.0,
                    scale: 0.0,
                },
                ..Default::default()
            },
            output_bound: Some(1.0),
            ..tiny()
        };
        let t = estimate_target(&cfg, LossKind::Squared).unwrap();
        assert_eq!(t.risk, 0.0);
        let p = cfg.predictor.predictor(1);
        let x = [0.0, cfg.covariate.mean];
        assert!(p.predict(&t.theta, &x).unwrap().abs() < 1e-12);
    }

    #[test]
    fn target_is_deterministic() {
        let cfg = tiny();
        let a = estimate_target(&cfg, LossKind::Absolute).unwrap();
        let b = estimate_target(&cfg, LossKind::Absolute).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn single_replication_matches_manual_pipeline() {
        let cfg = ExperimentConfig {
            n_grid: vec![100],
            replications: 1,
            losses: vec![LossKind::Squared],
            ..tiny()
        };
        let res = run_excess_risk_curve(&cfg, Workers::Fixed(1)).unwrap();
        let t = estimate_target(&cfg, LossKind::Squared).unwrap();
        let p = cfg.predictor.predictor(1);
        let ts = train_seed(cfg.base_seed, 0, 100, 0);
        let train = cfg.sample(100, ts).unwrap();
        let fit = erm_fit(
            &p,
            &cfg.predictor.param_box(1),
            &train,
            &LossSpec::new(LossKind::Squared),
            &FitConfig {
                seed: derive_seed(ts, &[FIT]),
                ..cfg.fit.clone()
            },
        )
        .unwrap();
        let eval = cfg.sample(100, eval_seed(cfg.base_seed, 0, 100, 0)).unwrap();
        let r2 = risk_estimate(&p, &fit.theta, &eval, &LossSpec::new(LossKind::Squared)).unwrap();
        assert_eq!(res.rows.len(), 1);
        assert_eq!(res.rows[0].mean_excess, (r2 - t.risk).abs());
        assert_eq!(res.rows[0].reps, 1);
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let cfg = tiny();
        let a = run_excess_risk_curve(&cfg, Workers::Fixed(1)).unwrap();
        let b = run_excess_risk_curve(&cfg, Workers::Fixed(3)).unwrap();
        assert_eq!(a.rows, b.rows);
        assert_eq!(a.replications, b.replications);
        assert_eq!(aggregate(&a.replications, &a.targets), a.rows);
    }

    #[test]
    fn rejects_short_grid_points() {
        let cfg = ExperimentConfig {
            n_grid: vec![1],
            ..tiny()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn svg_has_one_series_per_loss() {
        let rows = vec![
            CurveRow {
                loss: LossKind::Absolute,
                n: 100,
                mean_excess: 0.1,
                sd: 0.0,
                reps: 1,
            },
            CurveRow {
                loss: LossKind::Absolute,
                n: 400,
                mean_excess: 0.05,
                sd: 0.0,
                reps: 1,
            },
            CurveRow {
                loss: LossKind::Squared,
                n: 100,
                mean_excess: 0.2,
                sd: 0.0,
                reps: 1,
            },
        ];
        for log_y in [false, true] {
            let s = render_svg(&rows, log_y);
            assert_eq!(s.matches("<polyline").count(), 2);
            assert!(s.starts_with("<svg") && s.trim_end().ends_with("</svg>"));
        }
        assert_eq!(render_svg(&[], false).matches("<polyline").count(), 0);
    }
}
