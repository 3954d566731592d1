//! Losses, empirical risk and empirical risk minimization over a box.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::acx::Dataset;
use crate::error::{Error, Result};
use crate::hypothesis::{dot, ParamBox, Predictor};
use crate::rng::{derive_seed, rng_from_seed, FIT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    Absolute,
    Squared,
}

impl LossKind {
    pub fn name(self) -> &'static str {
        match self {
            LossKind::Absolute => "absolute",
            LossKind::Squared => "squared",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossSpec {
    pub kind: LossKind,
    /// `B_Y = sup |y|`; required for the Lipschitz and sup constants.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_bound: Option<f64>,
}

impl LossSpec {
    pub fn new(kind: LossKind) -> Self {
        LossSpec {
            kind,
            output_bound: None,
        }
    }

    pub fn with_bound(self, b: f64) -> Self {
        LossSpec {
            output_bound: Some(b),
            ..self
        }
    }

    #[inline]
    pub fn eval(&self, y: f64, y_hat: f64) -> f64 {
        let r = y - y_hat;
        match self.kind {
            LossKind::Absolute => r.abs(),
            LossKind::Squared => r * r,
        }
    }

    fn bound(&self) -> Result<f64> {
        match self.output_bound {
            Some(b) if b >= 0.0 && b.is_finite() => Ok(b),
            Some(b) => Err(Error::param(format!("output bound must be nonnegative, got {b}"))),
            None => Err(Error::param("loss constants need an output bound B_Y")),
        }
    }

    /// `K_ℓ`: 1 for the absolute loss, `2 B_Y` for the squared loss. This is
    /// also the constant `L` relating loss and sup-norm distances.
    pub fn lipschitz(&self) -> Result<f64> {
        match self.kind {
            LossKind::Absolute => Ok(1.0),
            LossKind::Squared => Ok(2.0 * self.bound()?),
        }
    }

    /// `M = sup ℓ`: `2 B_Y` or `4 B_Y²`.
    pub fn sup(&self) -> Result<f64> {
        let b = self.bound()?;
        Ok(match self.kind {
            LossKind::Absolute => 2.0 * b,
            LossKind::Squared => 4.0 * b * b,
        })
    }
}

/// `ℓ(y, y')`.
pub fn loss_eval(loss: &LossSpec, y: f64, y_hat: f64) -> f64 {
    loss.eval(y, y_hat)
}

/// Feature matrix of a dataset under a predictor, row-major.
#[derive(Debug, Clone)]
pub struct Design {
    d: usize,
    rows: Vec<f64>,
    targets: Vec<f64>,
}

impl Design {
    pub fn new(predictor: &dyn Predictor, data: &Dataset) -> Result<Self> {
        if data.width() < predictor.input_width() || data.covariate_dim() != predictor.covariate_dim() {
            return Err(Error::DimensionMismatch {
                expected: predictor.input_width(),
                got: data.width(),
            });
        }
        let d = predictor.n_params();
        let mut rows = vec![0.0; d * data.len()];
        for (i, chunk) in rows.chunks_mut(d).enumerate() {
            predictor.features(data.input(i), chunk);
        }
        Ok(Design {
            d,
            rows,
            targets: data.targets().to_vec(),
        })
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i * self.d..(i + 1) * self.d]
    }

    /// Mean loss, summed in row order.
    pub fn risk(&self, loss: &LossSpec, theta: &[f64]) -> f64 {
        let mut s = 0.0;
        for (i, &y) in self.targets.iter().enumerate() {
            s += loss.eval(y, dot(theta, self.row(i)));
        }
        s / self.len() as f64
    }

    fn gram(&self) -> (DMatrix<f64>, DVector<f64>) {
        let d = self.d;
        let mut g = DMatrix::zeros(d, d);
        let mut c = DVector::zeros(d);
        for (i, &y) in self.targets.iter().enumerate() {
            let r = self.row(i);
            for a in 0..d {
                c[a] += r[a] * y;
                for b in a..d {
                    g[(a, b)] += r[a] * r[b];
                }
            }
        }
        for a in 0..d {
            for b in 0..a {
                g[(a, b)] = g[(b, a)];
            }
        }
        (g, c)
    }
}

/// `R̂_n(h_θ) = (1/n) Σ ℓ(h_θ(X_i), Y_i)`.
pub fn empirical_risk(
    predictor: &dyn Predictor,
    theta: &[f64],
    data: &Dataset,
    loss: &LossSpec,
) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if theta.len() != predictor.n_params() {
        return Err(Error::DimensionMismatch {
            expected: predictor.n_params(),
            got: theta.len(),
        });
    }
    Ok(Design::new(predictor, data)?.risk(loss, theta))
}

/// Out-of-sample risk on an evaluation sample drawn independently of the
/// training sample. Numerically identical to [`empirical_risk`].
pub fn risk_estimate(
    predictor: &dyn Predictor,
    theta: &[f64],
    eval: &Dataset,
    loss: &LossSpec,
) -> Result<f64> {
    empirical_risk(predictor, theta, eval, loss)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FitMethod {
    /// Least squares for the squared loss, Nelder–Mead otherwise.
    #[default]
    Auto,
    ClosedFormLeastSquares,
    NelderMead,
    GridRefine,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitConfig {
    pub method: FitMethod,
    /// Simplex diameter (Nelder–Mead) or grid step (grid refine) at which
    /// the search stops.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Random restarts for Nelder–Mead in addition to the least-squares start.
    pub restarts: usize,
    pub seed: u64,
    pub ridge_fallback: bool,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            method: FitMethod::Auto,
            tolerance: 1e-10,
            max_iterations: 5_000,
            restarts: 20,
            seed: 0,
            ridge_fallback: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub theta: Vec<f64>,
    pub empirical_risk: f64,
    pub iterations: usize,
    pub converged: bool,
    pub box_active: bool,
    pub ridge_used: bool,
    pub method: FitMethod,
}

/// `θ̂ = argmin_{θ ∈ Θ} R̂_n(h_θ)`.
pub fn erm_fit(
    predictor: &dyn Predictor,
    params: &ParamBox,
    data: &Dataset,
    loss: &LossSpec,
    config: &FitConfig,
) -> Result<FitResult> {
    params.validate()?;
    if params.dim() != predictor.n_params() {
        return Err(Error::DimensionMismatch {
            expected: predictor.n_params(),
            got: params.dim(),
        });
    }
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if !(config.tolerance > 0.0) {
        return Err(Error::param("fit tolerance must be positive"));
    }
    let design = Design::new(predictor, data)?;
    let method = match (config.method, loss.kind) {
        (FitMethod::Auto, LossKind::Squared) => FitMethod::ClosedFormLeastSquares,
        (FitMethod::Auto, LossKind::Absolute) => FitMethod::NelderMead,
        (FitMethod::ClosedFormLeastSquares, LossKind::Absolute) => {
            return Err(Error::param("closed-form least squares requires the squared loss"))
        }
        (m, _) => m,
    };

    let mut out = match method {
        FitMethod::ClosedFormLeastSquares => least_squares_box(&design, params, config)?,
        FitMethod::NelderMead => nelder_mead_restarts(&design, params, loss, config)?,
        FitMethod::GridRefine => grid_refine(&design, params, loss, config),
        FitMethod::Auto => unreachable!(),
    };
    out.empirical_risk = design.risk(loss, &out.theta);
    out.box_active = params.on_boundary(&out.theta);
    out.method = method;
    Ok(out)
}

pub(crate) struct LeastSquares {
    pub theta: Vec<f64>,
    pub ridge_used: bool,
}

/// Unconstrained least squares through the SVD of the design; rank-deficient
/// designs fall back to a ridge solve with penalty `1e-10 · tr(XᵀX)`.
pub(crate) fn least_squares(design: &Design, ridge_fallback: bool) -> Result<LeastSquares> {
    let d = design.d;
    let x = DMatrix::from_row_slice(design.len(), d, &design.rows);
    let y = DVector::from_column_slice(&design.targets);
    let svd = x.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let full_rank = design.len() >= d && smax > 0.0 && smin > smax * 1e-10;
    if full_rank {
        let theta = svd
            .solve(&y, 0.0)
            .map_err(|e| Error::param(format!("least squares solve failed: {e}")))?;
        return Ok(LeastSquares {
            theta: theta.iter().copied().collect(),
            ridge_used: false,
        });
    }
    if !ridge_fallback {
        return Err(Error::SingularDesign);
    }
    let (g, c) = design.gram();
    let lambda = 1e-10 * g.trace().max(f64::MIN_POSITIVE);
    let a = g + DMatrix::identity(d, d) * lambda;
    let theta = a
        .cholesky()
        .map(|ch| ch.solve(&c))
        .ok_or(Error::SingularDesign)?;
    Ok(LeastSquares {
        theta: theta.iter().copied().collect(),
        ridge_used: true,
    })
}

fn least_squares_box(design: &Design, params: &ParamBox, config: &FitConfig) -> Result<FitResult> {
    let ls = least_squares(design, config.ridge_fallback)?;
    let mut theta = ls.theta;
    let mut iterations = 0;
    let mut converged = true;
    if !params.contains(&theta) {
        params.clamp(&mut theta);
        let (g, c) = design.gram();
        converged = false;
        // cyclic coordinate descent on θᵀGθ/2 - cᵀθ over the box
        while iterations < config.max_iterations {
            iterations += 1;
            let mut max_step = 0.0f64;
            for i in 0..theta.len() {
                if g[(i, i)] <= 0.0 {
                    continue;
                }
                let mut s = c[i];
                for j in 0..theta.len() {
                    if j != i {
                        s -= g[(i, j)] * theta[j];
                    }
                }
                let new = (s / g[(i, i)]).clamp(params.lower[i], params.upper[i]);
                max_step = max_step.max((new - theta[i]).abs());
                theta[i] = new;
            }
            if max_step <= config.tolerance {
                converged = true;
                break;
            }
        }
    }
    Ok(FitResult {
        theta,
        empirical_risk: f64::NAN,
        iterations,
        converged,
        box_active: false,
        ridge_used: ls.ridge_used,
        method: FitMethod::ClosedFormLeastSquares,
    })
}

struct SimplexRun {
    x: Vec<f64>,
    f: f64,
    iterations: usize,
    converged: bool,
}

/// Nelder–Mead with projection onto the box.
fn nelder_mead<F: Fn(&[f64]) -> f64>(
    f: &F,
    params: &ParamBox,
    start: &[f64],
    step: &[f64],
    tol: f64,
    max_iter: usize,
) -> SimplexRun {
    let d = start.len();
    let project = |x: &mut Vec<f64>| params.clamp(x);
    let mut pts: Vec<Vec<f64>> = Vec::with_capacity(d + 1);
    let mut x0 = start.to_vec();
    project(&mut x0);
    pts.push(x0.clone());
    for i in 0..d {
        let mut x = x0.clone();
        x[i] = if x0[i] + step[i] <= params.upper[i] {
            x0[i] + step[i]
        } else {
            x0[i] - step[i]
        };
        project(&mut x);
        pts.push(x);
    }
    let mut vals: Vec<f64> = pts.iter().map(|p| f(p)).collect();
    let mut iterations = 0;
    let mut converged = false;

    while iterations < max_iter {
        let mut order: Vec<usize> = (0..=d).collect();
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        pts = order.iter().map(|&i| pts[i].clone()).collect();
        vals = order.iter().map(|&i| vals[i]).collect();

        let diameter = pts[1..]
            .iter()
            .map(|p| {
                p.iter()
                    .zip(&pts[0])
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if diameter <= tol {
            converged = true;
            break;
        }
        iterations += 1;

        let mut centroid = vec![0.0; d];
        for p in &pts[..d] {
            for (c, v) in centroid.iter_mut().zip(p) {
                *c += v / d as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            let mut x: Vec<f64> = centroid
                .iter()
                .zip(&pts[d])
                .map(|(c, w)| c + t * (c - w))
                .collect();
            project(&mut x);
            x
        };

        let xr = along(1.0);
        let fr = f(&xr);
        if fr < vals[0] {
            let xe = along(2.0);
            let fe = f(&xe);
            if fe < fr {
                pts[d] = xe;
                vals[d] = fe;
            } else {
                pts[d] = xr;
                vals[d] = fr;
            }
        } else if fr < vals[d - 1] {
            pts[d] = xr;
            vals[d] = fr;
        } else {
            let (xc, fc) = if fr < vals[d] {
                let x = along(0.5);
                let v = f(&x);
                (x, v)
            } else {
                let x = along(-0.5);
                let v = f(&x);
                (x, v)
            };
            if fc < vals[d].min(fr) {
                pts[d] = xc;
                vals[d] = fc;
            } else {
                let best = pts[0].clone();
                for i in 1..=d {
                    for (x, b) in pts[i].iter_mut().zip(&best) {
                        *x = b + 0.5 * (*x - b);
                    }
                    vals[i] = f(&pts[i]);
                }
            }
        }
    }
    let best = (0..=d).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap_or(0);
    SimplexRun {
        x: pts[best].clone(),
        f: vals[best],
        iterations,
        converged,
    }
}

fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

/// Prefers lower risk; near-ties go to the smaller Euclidean norm.
fn better(cand: (&[f64], f64), best: (&[f64], f64)) -> bool {
    let tie = 1e-13 * (1.0 + best.1.abs());
    cand.1 < best.1 - tie || (cand.1 <= best.1 + tie && norm2(cand.0) < norm2(best.0))
}

fn nelder_mead_restarts(
    design: &Design,
    params: &ParamBox,
    loss: &LossSpec,
    config: &FitConfig,
) -> Result<FitResult> {
    let f = |x: &[f64]| design.risk(loss, x);
    let ls = least_squares(design, true)?;
    let mut start = ls.theta;
    params.clamp(&mut start);

    let mut starts = vec![start];
    let mut rng = rng_from_seed(derive_seed(config.seed, &[FIT]));
    for _ in 0..config.restarts {
        starts.push(
            params
                .lower
                .iter()
                .zip(&params.upper)
                .map(|(l, u)| if l < u { rng.random_range(*l..*u) } else { *l })
                .collect(),
        );
    }

    let widths = params.widths();
    let mut best_x = starts[0].clone();
    let mut best_f = f(&best_x);
    let mut iterations = 0;
    let mut converged = false;

    for (i, s) in starts.iter().enumerate() {
        // the least-squares start is usually close, so it gets a tighter simplex
        let scale = if i == 0 { 0.01 } else { 0.05 };
        let mut step: Vec<f64> = widths.iter().map(|w| (scale * w).min(1.0)).collect();
        let mut run = nelder_mead(&f, params, s, &step, config.tolerance, config.max_iterations);
        iterations += run.iterations;
        // restart from the converged point until it stops improving
        for _ in 0..8 {
            step.iter_mut().for_each(|v| *v *= 0.1);
            let again = nelder_mead(&f, params, &run.x, &step, config.tolerance, config.max_iterations);
            iterations += again.iterations;
            let improved = again.f < run.f - 1e-15 * (1.0 + run.f.abs());
            if again.f <= run.f {
                run = SimplexRun {
                    converged: again.converged,
                    ..again
                };
            }
            if !improved {
                break;
            }
        }
        if better((&run.x, run.f), (&best_x, best_f)) {
            best_x = run.x;
            best_f = run.f;
            converged = run.converged;
        } else if i == 0 {
            converged = run.converged;
        }
    }

    Ok(FitResult {
        theta: best_x,
        empirical_risk: best_f,
        iterations,
        converged,
        box_active: false,
        ridge_used: false,
        method: FitMethod::NelderMead,
    })
}

/// Repeated grid search, shrinking the box around the incumbent. Exhaustive
/// and slow; meant as a reference for the other methods.
fn grid_refine(design: &Design, params: &ParamBox, loss: &LossSpec, config: &FitConfig) -> FitResult {
    let d = params.dim();
    let per_dim = ((100_000f64).powf(1.0 / d as f64).floor() as usize).clamp(3, 41);
    let mut lo = params.lower.clone();
    let mut hi = params.upper.clone();
    let mut best_x: Vec<f64> = lo.iter().zip(&hi).map(|(l, h)| 0.5 * (l + h)).collect();
    let mut best_f = design.risk(loss, &best_x);
    let mut iterations = 0;
    let mut converged = false;
    let mut x = vec![0.0; d];

    while iterations < config.max_iterations.min(200) {
        iterations += 1;
        let steps: Vec<f64> = lo
            .iter()
            .zip(&hi)
            .map(|(l, h)| (h - l) / (per_dim - 1) as f64)
            .collect();
        let total = per_dim.pow(d as u32);
        for idx in 0..total {
            let mut r = idx;
            for k in 0..d {
                x[k] = lo[k] + (r % per_dim) as f64 * steps[k];
                r /= per_dim;
            }
            let v = design.risk(loss, &x);
            if better((&x, v), (&best_x, best_f)) {
                best_x.copy_from_slice(&x);
                best_f = v;
            }
        }
        if steps.iter().fold(0.0f64, |m, s| m.max(*s)) <= config.tolerance {
            converged = true;
            break;
        }
        for k in 0..d {
            lo[k] = (best_x[k] - 2.0 * steps[k]).max(params.lower[k]);
            hi[k] = (best_x[k] + 2.0 * steps[k]).min(params.upper[k]);
        }
    }
    FitResult {
        theta: best_x,
        empirical_risk: best_f,
        iterations,
        converged,
        box_active: false,
        ridge_used: false,
        method: FitMethod::GridRefine,
    }
}
