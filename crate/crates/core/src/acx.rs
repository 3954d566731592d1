//! Affine causal models with exogenous covariates.
//!
//! A process `Y_t` in this class obeys
//!
//! ```text
//! Y_t = M(Y_{t-1}, ...; χ_{t-1}, ...) ξ_t + f(Y_{t-1}, ...; χ_{t-1}, ...)
//! χ_t = m + φ (χ_{t-1} - m) + η_t
//! ```
//!
//! with i.i.d. zero-mean, unit-variance innovations `ξ_t` and a stationary
//! AR(1) covariate. The ARX and TARX variants can also feed the covariate in
//! contemporaneously (`χ_t` instead of `χ_{t-1}`).

use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Law of the i.i.d. innovations. Every variant has mean 0 and variance 1
/// (up to the explicit `scale` of [`InnovationSpec::CustomBounded`]).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InnovationSpec {
    /// Uniform on [-2, 2] rescaled by √3/2, i.e. uniform on [-√3, √3].
    #[default]
    StandardizedUniformPm2,
    StandardNormal,
    /// Uniform on `[lower, upper]`, centred, standardized to unit variance and
    /// multiplied by `scale`. `scale = 0` gives a degenerate zero innovation.
    CustomBounded { lower: f64, upper: f64, scale: f64 },
}

impl InnovationSpec {
    pub fn validate(&self) -> Result<()> {
        if let InnovationSpec::CustomBounded {
            lower,
            upper,
            scale,
        } = *self
        {
            if !(lower.is_finite() && upper.is_finite() && scale.is_finite()) {
                return Err(Error::param("custom_bounded innovation bounds must be finite"));
            }
            if lower >= upper {
                return Err(Error::param("custom_bounded innovation needs lower < upper"));
            }
        }
        Ok(())
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        match *self {
            InnovationSpec::StandardizedUniformPm2 => SQRT3 * (2.0 * rng.random::<f64>() - 1.0),
            InnovationSpec::StandardNormal => rng.sample(StandardNormal),
            InnovationSpec::CustomBounded { scale, .. } => {
                let u: f64 = rng.random();
                scale * SQRT3 * (2.0 * u - 1.0)
            }
        }
    }

    /// Almost-sure bound on `|ξ|`, if the law is bounded.
    pub fn sup_abs(&self) -> Option<f64> {
        match *self {
            InnovationSpec::StandardizedUniformPm2 => Some(SQRT3),
            InnovationSpec::StandardNormal => None,
            InnovationSpec::CustomBounded { scale, .. } => Some(scale.abs() * SQRT3),
        }
    }

    /// The `L^r` norm `(E|ξ|^r)^{1/r}`, for `r >= 1`.
    pub fn lr_norm(&self, r: f64) -> f64 {
        match *self {
            InnovationSpec::StandardizedUniformPm2 => SQRT3 * (r + 1.0).powf(-1.0 / r),
            InnovationSpec::CustomBounded { scale, .. } => {
                scale.abs() * SQRT3 * (r + 1.0).powf(-1.0 / r)
            }
            InnovationSpec::StandardNormal => {
                // E|Z|^r = 2^{r/2} Γ((r+1)/2) / √π
                let log_moment = 0.5 * r * std::f64::consts::LN_2 + ln_gamma(0.5 * (r + 1.0))
                    - 0.5 * std::f64::consts::PI.ln();
                (log_moment / r).exp()
            }
        }
    }
}

/// Lanczos approximation (g = 7, n = 9), accurate to ~1e-15 for x > 0.
fn ln_gamma(x: f64) -> f64 {
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = COEF[0];
    let t = x + 7.5;
    for (i, c) in COEF.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// Stationary AR(1) covariate `χ_t = m + φ(χ_{t-1} - m) + η_t`, applied
/// coordinate-wise when `dim > 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CovariateSpec {
    #[serde(default = "CovariateSpec::default_phi")]
    pub ar_coefficient: f64,
    #[serde(default = "CovariateSpec::default_mean")]
    pub mean: f64,
    #[serde(default)]
    pub innovation: InnovationSpec,
    #[serde(default = "CovariateSpec::default_dim")]
    pub dim: usize,
}

impl CovariateSpec {
    fn default_phi() -> f64 {
        0.5
    }
    fn default_mean() -> f64 {
        1.0
    }
    fn default_dim() -> usize {
        1
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.ar_coefficient.abs() < 1.0) {
            return Err(Error::param(format!(
                "covariate AR coefficient must satisfy |φ| < 1, got {}",
                self.ar_coefficient
            )));
        }
        if !self.mean.is_finite() {
            return Err(Error::param("covariate mean must be finite"));
        }
        if self.dim == 0 {
            return Err(Error::param("covariate dimension must be positive"));
        }
        self.innovation.validate()
    }
}

impl Default for CovariateSpec {
    fn default() -> Self {
        CovariateSpec {
            ar_coefficient: Self::default_phi(),
            mean: Self::default_mean(),
            innovation: InnovationSpec::default(),
            dim: Self::default_dim(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CovariateTiming {
    /// `χ_t` enters the equation for `Y_t`.
    #[default]
    Contemporaneous,
    /// `χ_{t-1}` enters the equation for `Y_t`.
    Lagged,
}

/// Lipschitz coefficient sequences, index 0 holding lag 1.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LipschitzSequences {
    pub y_f: Vec<f64>,
    pub chi_f: Vec<f64>,
    pub y_m: Vec<f64>,
    pub chi_m: Vec<f64>,
    pub y_h: Vec<f64>,
    pub chi_h: Vec<f64>,
}

impl LipschitzSequences {
    fn all(&self) -> impl Iterator<Item = &f64> {
        self.y_f
            .iter()
            .chain(&self.chi_f)
            .chain(&self.y_m)
            .chain(&self.chi_m)
            .chain(&self.y_h)
            .chain(&self.chi_h)
    }
}

/// Finite-memory function of the lagged history. The first slice holds
/// `Y_{t-1}, ..., Y_{t-p}` and the second `χ_{t-1}, ..., χ_{t-p}` flattened
/// with stride `d_x`.
pub type HistoryFn = Arc<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>;

/// A general member of the class with user-supplied `f` and `M`.
#[derive(Clone)]
pub struct GenericAffine {
    pub memory: usize,
    pub f: HistoryFn,
    /// `None` means `M ≡ 1`.
    pub m: Option<HistoryFn>,
    pub lipschitz: LipschitzSequences,
}

impl fmt::Debug for GenericAffine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GenericAffine")
            .field("memory", &self.memory)
            .field("constant_m", &self.m.is_none())
            .field("lipschitz", &self.lipschitz)
            .finish()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case", deny_unknown_fields)]
pub enum AcxModelSpec {
    /// `Y_t = Σ_k a_k Y_{t-k} + b·χ + ξ_t`.
    Arx {
        lags: Vec<f64>,
        covariate_coef: Vec<f64>,
        #[serde(default)]
        timing: CovariateTiming,
    },
    /// `Y_t = a⁺ max(Y_{t-1}, 0) + a⁻ min(Y_{t-1}, 0) + b·χ + ξ_t`.
    Tarx {
        positive: f64,
        negative: f64,
        covariate_coef: Vec<f64>,
        #[serde(default)]
        timing: CovariateTiming,
    },
    #[serde(skip)]
    Generic(GenericAffine),
}

impl AcxModelSpec {
    /// The ARX(2) model `Y_t = 0.25 Y_{t-1} - 0.4 Y_{t-2} + 0.8 χ_t + ξ_t`.
    pub fn reference_arx() -> Self {
        AcxModelSpec::Arx {
            lags: vec![0.25, -0.4],
            covariate_coef: vec![0.8],
            timing: CovariateTiming::Contemporaneous,
        }
    }

    /// The threshold model `Y_t = 0.2 max(Y_{t-1},0) - 0.6 min(Y_{t-1},0) + 1.5 χ_t + ξ_t`.
    pub fn reference_tarx() -> Self {
        AcxModelSpec::Tarx {
            positive: 0.2,
            negative: -0.6,
            covariate_coef: vec![1.5],
            timing: CovariateTiming::Contemporaneous,
        }
    }

    pub fn memory(&self) -> usize {
        match self {
            AcxModelSpec::Arx { lags, .. } => lags.len().max(1),
            AcxModelSpec::Tarx { .. } => 1,
            AcxModelSpec::Generic(g) => g.memory.max(1),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            AcxModelSpec::Arx { .. } => "arx",
            AcxModelSpec::Tarx { .. } => "tarx",
            AcxModelSpec::Generic(_) => "generic",
        }
    }

    /// Declared (ARX/TARX: derived) Lipschitz sequences.
    pub fn lipschitz(&self) -> LipschitzSequences {
        let sup = |b: &[f64]| b.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        match self {
            AcxModelSpec::Arx {
                lags,
                covariate_coef,
                ..
            } => LipschitzSequences {
                y_f: lags.iter().map(|a| a.abs()).collect(),
                chi_f: vec![sup(covariate_coef)],
                ..Default::default()
            },
            AcxModelSpec::Tarx {
                positive,
                negative,
                covariate_coef,
                ..
            } => LipschitzSequences {
                y_f: vec![positive.abs().max(negative.abs())],
                chi_f: vec![sup(covariate_coef)],
                ..Default::default()
            },
            AcxModelSpec::Generic(g) => g.lipschitz.clone(),
        }
    }

    pub fn validate(&self, covariate: &CovariateSpec) -> Result<()> {
        let check_b = |b: &[f64]| {
            if b.len() != covariate.dim {
                Err(Error::DimensionMismatch {
                    expected: covariate.dim,
                    got: b.len(),
                })
            } else {
                Ok(())
            }
        };
        match self {
            AcxModelSpec::Arx {
                lags,
                covariate_coef,
                ..
            } => {
                if lags.is_empty() {
                    return Err(Error::param("ARX model needs at least one lag"));
                }
                check_b(covariate_coef)?;
            }
            AcxModelSpec::Tarx { covariate_coef, .. } => check_b(covariate_coef)?,
            AcxModelSpec::Generic(g) => {
                if g.memory == 0 {
                    return Err(Error::param("generic model memory must be positive"));
                }
            }
        }
        let lip = self.lipschitz();
        if lip.all().any(|a| !(a.is_finite() && *a >= 0.0)) {
            return Err(Error::param("Lipschitz coefficients must be finite and nonnegative"));
        }
        covariate.validate()
    }
}

/// Provenance of a simulated trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryOrigin {
    pub model: String,
    pub seed: u64,
    pub burn_in: usize,
}

/// Time-aligned sample `(Y_t, χ_t)`, `χ` stored flat with stride `dx`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub y: Vec<f64>,
    pub chi: Vec<f64>,
    pub dx: usize,
    pub origin: Option<TrajectoryOrigin>,
}

impl Trajectory {
    pub fn new(y: Vec<f64>, chi: Vec<f64>, dx: usize) -> Result<Self> {
        if dx == 0 {
            return Err(Error::param("covariate dimension must be positive"));
        }
        if chi.len() != y.len() * dx {
            return Err(Error::DimensionMismatch {
                expected: y.len() * dx,
                got: chi.len(),
            });
        }
        Ok(Trajectory {
            y,
            chi,
            dx,
            origin: None,
        })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn chi_at(&self, t: usize) -> &[f64] {
        &self.chi[t * self.dx..(t + 1) * self.dx]
    }

    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["t".to_string(), "y".to_string()];
        header.extend((1..=self.dx).map(|i| format!("chi_{i}")));
        w.write_record(&header)?;
        let mut row = Vec::with_capacity(2 + self.dx);
        for t in 0..self.len() {
            row.clear();
            row.push(t.to_string());
            row.push(self.y[t].to_string());
            row.extend(self.chi_at(t).iter().map(|c| c.to_string()));
            w.write_record(&row)?;
        }
        w.flush()
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(file))
            .map_err(|e| Error::io(path, e))
    }

    /// Parses the `t,y,chi_1..chi_dx` format. `path` only labels errors.
    pub fn read_csv<R: Read>(input: R, path: &Path) -> Result<Self> {
        let parse_err = |line: usize, message: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
        let header = rdr
            .headers()
            .map_err(|e| parse_err(1, e.to_string()))?
            .clone();
        let cols: Vec<&str> = header.iter().collect();
        if cols.len() < 3 || cols[0] != "t" || cols[1] != "y" {
            return Err(parse_err(1, "expected header t,y,chi_1..chi_dx".into()));
        }
        for (i, c) in cols[2..].iter().enumerate() {
            if *c != format!("chi_{}", i + 1) {
                return Err(parse_err(1, format!("unexpected column '{c}'")));
            }
        }
        let dx = cols.len() - 2;
        let (mut y, mut chi) = (Vec::new(), Vec::new());
        for (i, rec) in rdr.records().enumerate() {
            let line = i + 2;
            let rec = rec.map_err(|e| {
                let l = e.position().map(|p| p.line() as usize).unwrap_or(line);
                parse_err(l, e.to_string())
            })?;
            if rec.len() != dx + 2 {
                return Err(parse_err(line, format!("expected {} fields", dx + 2)));
            }
            let num = |s: &str| -> Result<f64> {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| parse_err(line, format!("'{s}': {e}")))
            };
            let t: usize = rec[0]
                .trim()
                .parse()
                .map_err(|_| parse_err(line, format!("bad time index '{}'", &rec[0])))?;
            if t != i {
                return Err(parse_err(line, format!("time index {t} out of order")));
            }
            y.push(num(&rec[1])?);
            for f in rec.iter().skip(2) {
                chi.push(num(f)?);
            }
        }
        Trajectory::new(y, chi, dx)
    }

    pub fn load_csv(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Trajectory::read_csv(std::io::BufReader::new(file), path)
    }
}

/// Simulates `n` observations after discarding `burn_in` steps. Pre-sample
/// values are zero. Each step draws `η_t` (all covariate coordinates) and
/// then `ξ_t` from a ChaCha8 stream seeded with `seed`.
pub fn simulate(
    model: &AcxModelSpec,
    covariate: &CovariateSpec,
    innovation: &InnovationSpec,
    n: usize,
    burn_in: usize,
    seed: u64,
) -> Result<Trajectory> {
    if n == 0 {
        return Err(Error::param("trajectory length must be positive"));
    }
    model.validate(covariate)?;
    innovation.validate()?;

    let report = contraction_report(model, covariate, innovation.lr_norm(2.0));
    if !report.satisfied {
        log::warn!(
            "contraction condition fails (Σα_k = {:.4} ≥ 1); simulating anyway",
            report.total
        );
    }

    let dx = covariate.dim;
    let total = burn_in + n;
    let p = model.memory();
    let mut rng = rng_from_seed(seed);
    let mut y = vec![0.0; total];
    let mut chi = vec![0.0; total * dx];
    let (phi, mean) = (covariate.ar_coefficient, covariate.mean);
    let mut ylags = vec![0.0; p];
    let mut chilags = vec![0.0; p * dx];

    for t in 0..total {
        for i in 0..dx {
            let prev = if t > 0 { chi[(t - 1) * dx + i] } else { 0.0 };
            chi[t * dx + i] = mean + phi * (prev - mean) + covariate.innovation.sample(&mut rng);
        }
        let xi = innovation.sample(&mut rng);

        let ylag = |k: usize| if t >= k { y[t - k] } else { 0.0 };
        let covariate_term = |b: &[f64], timing: CovariateTiming| -> f64 {
            let s = match timing {
                CovariateTiming::Contemporaneous => Some(t),
                CovariateTiming::Lagged => t.checked_sub(1),
            };
            match s {
                Some(s) => b
                    .iter()
                    .zip(&chi[s * dx..(s + 1) * dx])
                    .map(|(b, c)| b * c)
                    .sum(),
                None => 0.0,
            }
        };

        let value = match model {
            AcxModelSpec::Arx {
                lags,
                covariate_coef,
                timing,
            } => {
                let mut v = 0.0;
                for (k, a) in lags.iter().enumerate() {
                    v += a * ylag(k + 1);
                }
                v + covariate_term(covariate_coef, *timing) + xi
            }
            AcxModelSpec::Tarx {
                positive,
                negative,
                covariate_coef,
                timing,
            } => {
                let prev = ylag(1);
                positive * prev.max(0.0)
                    + negative * prev.min(0.0)
                    + covariate_term(covariate_coef, *timing)
                    + xi
            }
            AcxModelSpec::Generic(g) => {
                for k in 1..=p {
                    ylags[k - 1] = ylag(k);
                    for i in 0..dx {
                        chilags[(k - 1) * dx + i] = if t >= k { chi[(t - k) * dx + i] } else { 0.0 };
                    }
                }
                let scale = g.m.as_ref().map_or(1.0, |m| m(&ylags, &chilags));
                scale * xi + (g.f)(&ylags, &chilags)
            }
        };
        if !value.is_finite() {
            return Err(Error::Explosion { t, value });
        }
        y[t] = value;
    }

    Ok(Trajectory {
        y: y.split_off(burn_in),
        chi: chi.split_off(burn_in * dx),
        dx,
        origin: Some(TrajectoryOrigin {
            model: model.label().to_string(),
            seed,
            burn_in,
        }),
    })
}

/// Closed-form almost-sure bound on `sup_t |Y_t|` for ARX/TARX models with
/// bounded innovations, started from zero. `None` when the innovations are
/// unbounded, the model is generic, or the Y-Lipschitz sum is at least 1.
pub fn stationary_bound(
    model: &AcxModelSpec,
    covariate: &CovariateSpec,
    innovation: &InnovationSpec,
) -> Option<f64> {
    let xi = innovation.sup_abs()?;
    let eta = covariate.innovation.sup_abs()?;
    let phi = covariate.ar_coefficient.abs();
    let m = covariate.mean.abs();
    let chi_sup = m + m.max(eta / (1.0 - phi));
    let (rho, b) = match model {
        AcxModelSpec::Arx {
            lags,
            covariate_coef,
            ..
        } => (lags.iter().map(|a| a.abs()).sum::<f64>(), covariate_coef),
        AcxModelSpec::Tarx {
            positive,
            negative,
            covariate_coef,
            ..
        } => (positive.abs().max(negative.abs()), covariate_coef),
        AcxModelSpec::Generic(_) => return None,
    };
    if rho >= 1.0 {
        return None;
    }
    let b1: f64 = b.iter().map(|b| b.abs()).sum();
    Some((b1 * chi_sup + xi) / (1.0 - rho))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContractionTerm {
    pub k: usize,
    pub alpha_g: f64,
    pub alpha_y_f: f64,
    pub alpha_y_m: f64,
    pub alpha_y_h: f64,
    /// `max{α_k(g), α_{k,Y}(f) + ‖ξ‖_r α_{k,Y}(M) + ‖ξ‖_r² α_{k,Y}(H)}`.
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContractionReport {
    pub xi_norm_r: f64,
    pub terms: Vec<ContractionTerm>,
    /// `Σ_k α_{k,Y}(f) + ‖ξ‖_r α_{k,Y}(M) + ‖ξ‖_r² α_{k,Y}(H)`.
    pub y_sum: f64,
    pub total: f64,
    pub satisfied: bool,
}

impl ContractionReport {
    /// The `α_k` sequence as an explicit decay profile.
    pub fn decay(&self) -> DecaySpec {
        DecaySpec::Explicit {
            values: self.terms.iter().map(|t| t.alpha).collect(),
        }
    }
}

pub fn contraction_report(
    model: &AcxModelSpec,
    covariate: &CovariateSpec,
    xi_norm_r: f64,
) -> ContractionReport {
    let lip = model.lipschitz();
    let at = |v: &[f64], k: usize| v.get(k).copied().unwrap_or(0.0);
    let len = lip.y_f.len().max(lip.y_m.len()).max(lip.y_h.len()).max(1);
    let mut terms = Vec::with_capacity(len);
    let (mut y_sum, mut total) = (0.0, 0.0);
    for k in 0..len {
        let alpha_g = if k == 0 { covariate.ar_coefficient.abs() } else { 0.0 };
        let (f, m, h) = (at(&lip.y_f, k), at(&lip.y_m, k), at(&lip.y_h, k));
        let y_part = f + xi_norm_r * m + xi_norm_r * xi_norm_r * h;
        let alpha = alpha_g.max(y_part);
        y_sum += y_part;
        total += alpha;
        terms.push(ContractionTerm {
            k: k + 1,
            alpha_g,
            alpha_y_f: f,
            alpha_y_m: m,
            alpha_y_h: h,
            alpha,
        });
    }
    ContractionReport {
        xi_norm_r,
        terms,
        y_sum,
        total,
        satisfied: total < 1.0,
    }
}

/// Decay profile of a nonnegative coefficient sequence.
///
/// Indexed from `k = 1` it gives the Lipschitz sums `α_k` used by
/// [`tau_upper_bound`]: `c·a^k`, `c·k^{-γ}` or `values[k-1]`. Read as a
/// dependence-coefficient sequence `ε_j`, `j >= 0`, it gives `c·a^j`,
/// `c·(j+1)^{-γ}` or `values[j]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DecaySpec {
    Geometric {
        rate: f64,
        #[serde(default = "one")]
        scale: f64,
    },
    Riemann {
        gamma: f64,
        #[serde(default = "one")]
        scale: f64,
    },
    Explicit { values: Vec<f64> },
}

fn one() -> f64 {
    1.0
}

impl DecaySpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            DecaySpec::Geometric { rate, scale } => {
                if !(0.0..1.0).contains(rate) {
                    return Err(Error::InvalidDecay(format!("geometric rate {rate} not in [0,1)")));
                }
                if !(*scale >= 0.0 && scale.is_finite()) {
                    return Err(Error::InvalidDecay("scale must be nonnegative".into()));
                }
            }
            DecaySpec::Riemann { gamma, scale } => {
                if !(*gamma > 1.0 && gamma.is_finite()) {
                    return Err(Error::InvalidDecay(format!("riemann exponent {gamma} must exceed 1")));
                }
                if !(*scale >= 0.0 && scale.is_finite()) {
                    return Err(Error::InvalidDecay("scale must be nonnegative".into()));
                }
            }
            DecaySpec::Explicit { values } => {
                if values.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
                    return Err(Error::InvalidDecay("explicit values must be nonnegative".into()));
                }
            }
        }
        Ok(())
    }

    /// `α_k`, `k >= 1`.
    pub fn alpha(&self, k: usize) -> f64 {
        match self {
            DecaySpec::Geometric { rate, scale } => scale * rate.powi(k as i32),
            DecaySpec::Riemann { gamma, scale } => scale * (k as f64).powf(-gamma),
            DecaySpec::Explicit { values } => values.get(k.wrapping_sub(1)).copied().unwrap_or(0.0),
        }
    }

    /// `ε_j`, `j >= 0`.
    pub fn epsilon(&self, j: usize) -> f64 {
        match self {
            DecaySpec::Geometric { rate, scale } => scale * rate.powi(j as i32),
            DecaySpec::Riemann { gamma, scale } => scale * ((j + 1) as f64).powf(-gamma),
            DecaySpec::Explicit { values } => values.get(j).copied().unwrap_or(0.0),
        }
    }

    /// `Σ_{k > iota} α_k`, explicit sequences truncated at `truncation`.
    pub fn tail(&self, iota: usize, truncation: usize) -> f64 {
        match self {
            DecaySpec::Geometric { rate, scale } => {
                scale * rate.powi(iota as i32 + 1) / (1.0 - rate)
            }
            DecaySpec::Riemann { gamma, scale } => scale * zeta_tail(*gamma, iota + 1),
            DecaySpec::Explicit { values } => {
                let end = values.len().min(truncation);
                values.get(iota.min(end)..end).map_or(0.0, |s| s.iter().sum())
            }
        }
    }

    /// `α = Σ_{k >= 1} α_k`.
    pub fn total(&self, truncation: usize) -> f64 {
        self.tail(0, truncation)
    }
}

/// `Σ_{k >= m} k^{-γ}` for `m >= 1`, `γ > 1`: direct summation of the first
/// terms, then an Euler–Maclaurin remainder.
pub(crate) fn zeta_tail(gamma: f64, m: usize) -> f64 {
    const DIRECT: usize = 64;
    let m = m.max(1);
    let mut s = 0.0;
    for k in m..m + DIRECT {
        s += (k as f64).powf(-gamma);
    }
    let x = (m + DIRECT) as f64;
    let f = x.powf(-gamma);
    let d1 = -gamma * x.powf(-gamma - 1.0);
    let d3 = -gamma * (gamma + 1.0) * (gamma + 2.0) * x.powf(-gamma - 3.0);
    let d5 = d3 * (gamma + 3.0) * (gamma + 4.0) / (x * x);
    s + x.powf(1.0 - gamma) / (gamma - 1.0) + 0.5 * f - d1 / 12.0 + d3 / 720.0 - d5 / 30240.0
}

/// Upper bound `inf_{1 ≤ ι ≤ j} { α^{j/ι} + Σ_{k > ι} α_k }` on the
/// τ-dependence coefficient, up to the unspecified leading constant.
pub fn tau_upper_bound(decay: &DecaySpec, j: usize, truncation: usize) -> Result<f64> {
    decay.validate()?;
    if j == 0 {
        return Err(Error::param("lag j must be positive"));
    }
    let alpha = decay.total(truncation);
    if alpha >= 1.0 {
        return Err(Error::InvalidDecay(format!(
            "Σα_k = {alpha} must be < 1 for a meaningful bound"
        )));
    }
    let mut best = f64::INFINITY;
    for iota in 1..=j {
        let v = alpha.powf(j as f64 / iota as f64) + decay.tail(iota, truncation);
        best = best.min(v);
    }
    Ok(best)
}

/// Supervised pairs `X_t = ((Y_{t-1}, χ_{t-1}), ..., (Y_{t-p}, χ_{t-p}))`,
/// `Y_t` for `t = p, ..., n-1`, stored row-major with the newest lag first.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    p: usize,
    dx: usize,
    inputs: Vec<f64>,
    targets: Vec<f64>,
}

impl Dataset {
    /// Builds a dataset from flattened input rows of width `p·(1 + dx)`.
    pub fn from_rows(p: usize, dx: usize, inputs: Vec<f64>, targets: Vec<f64>) -> Result<Self> {
        let width = p * (1 + dx);
        if p == 0 || dx == 0 {
            return Err(Error::param("memory and covariate dimension must be positive"));
        }
        if inputs.len() != width * targets.len() {
            return Err(Error::DimensionMismatch {
                expected: width * targets.len(),
                got: inputs.len(),
            });
        }
        Ok(Dataset {
            p,
            dx,
            inputs,
            targets,
        })
    }

    pub fn memory(&self) -> usize {
        self.p
    }

    pub fn covariate_dim(&self) -> usize {
        self.dx
    }

    /// Width of one input row, `p·(1 + dx)`.
    pub fn width(&self) -> usize {
        self.p * (1 + self.dx)
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn input(&self, i: usize) -> &[f64] {
        let w = self.width();
        &self.inputs[i * w..(i + 1) * w]
    }

    pub fn target(&self, i: usize) -> f64 {
        self.targets[i]
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    /// `(Y_{t-k}, χ_{t-k})` of row `i`, `1 ≤ k ≤ p`.
    pub fn lag(&self, i: usize, k: usize) -> (f64, &[f64]) {
        let row = self.input(i);
        let off = (k - 1) * (1 + self.dx);
        (row[off], &row[off + 1..off + 1 + self.dx])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        (0..self.len()).map(move |i| (self.input(i), self.targets[i]))
    }
}

pub fn supervised_pairs(traj: &Trajectory, p: usize) -> Result<Dataset> {
    if p == 0 {
        return Err(Error::param("memory p must be positive"));
    }
    let n = traj.len();
    if p >= n {
        return Err(Error::InsufficientData { needed: p, got: n });
    }
    let dx = traj.dx;
    let mut inputs = Vec::with_capacity((n - p) * p * (1 + dx));
    let mut targets = Vec::with_capacity(n - p);
    for t in p..n {
        for k in 1..=p {
            inputs.push(traj.y[t - k]);
            inputs.extend_from_slice(traj.chi_at(t - k));
        }
        targets.push(traj.y[t]);
    }
    Dataset::from_rows(p, dx, inputs, targets)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CovEstimate {
    pub gap: usize,
    pub cov: f64,
    pub abs_cov: f64,
    /// Batch-means standard error of `cov`.
    pub std_err: f64,
}

/// Lagged covariances `Ĉov(f1(Z_t), f2(Z_{t+r}))` with `Z_t = (Y_t, χ_t)`
/// passed as the slice `[y, χ_1, ..., χ_dx]`. Means are taken over the
/// overlapping windows and the normalization is `1/(n-r)`.
pub fn empirical_cov_decay<F1, F2>(
    traj: &Trajectory,
    f1: F1,
    f2: F2,
    gaps: &[usize],
) -> Result<Vec<CovEstimate>>
where
    F1: Fn(&[f64]) -> f64,
    F2: Fn(&[f64]) -> f64,
{
    let n = traj.len();
    let mut z = Vec::with_capacity(1 + traj.dx);
    let mut eval = |f: &dyn Fn(&[f64]) -> f64| -> Vec<f64> {
        (0..n)
            .map(|t| {
                z.clear();
                z.push(traj.y[t]);
                z.extend_from_slice(traj.chi_at(t));
                f(&z)
            })
            .collect()
    };
    let a = eval(&f1);
    let b = eval(&f2);

    gaps.iter()
        .map(|&r| {
            if 2 * r >= n {
                return Err(Error::param(format!("gap {r} must be below half the length {n}")));
            }
            let m = n - r;
            let ma = a[..m].iter().sum::<f64>() / m as f64;
            let mb = b[r..].iter().sum::<f64>() / m as f64;
            let prod: Vec<f64> = (0..m).map(|t| (a[t] - ma) * (b[t + r] - mb)).collect();
            let cov = prod.iter().sum::<f64>() / m as f64;
            Ok(CovEstimate {
                gap: r,
                cov,
                abs_cov: cov.abs(),
                std_err: batch_means_se(&prod),
            })
        })
        .collect()
}

/// Standard error of the mean of `x` from `⌊√n⌋` contiguous batches.
pub fn batch_means_se(x: &[f64]) -> f64 {
    let n = x.len();
    let batches = ((n as f64).sqrt() as usize).max(2);
    let size = n / batches;
    if size == 0 {
        return f64::NAN;
    }
    let means: Vec<f64> = (0..batches)
        .map(|b| x[b * size..(b + 1) * size].iter().sum::<f64>() / size as f64)
        .collect();
    let grand = means.iter().sum::<f64>() / batches as f64;
    let var = means.iter().map(|m| (m - grand).powi(2)).sum::<f64>() / (batches - 1) as f64;
    (var / batches as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mean_var(x: &[f64]) -> (f64, f64) {
        let n = x.len() as f64;
        let m = x.iter().sum::<f64>() / n;
        (m, x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0))
    }

    fn zero_innovation() -> InnovationSpec {
        InnovationSpec::CustomBounded {
            lower: -1.0,
            upper: 1.0,
            scale: 0.0,
        }
    }

    #[test]
    fn innovations_are_standardized() {
        let n = 200_000;
        for spec in [InnovationSpec::StandardizedUniformPm2, InnovationSpec::StandardNormal] {
            let mut rng = rng_from_seed(7);
            let x: Vec<f64> = (0..n).map(|_| spec.sample(&mut rng)).collect();
            let (m, v) = mean_var(&x);
            // se of the mean is 1/√n; se of the variance is √((κ-1)/n) with κ ≤ 3
            assert!(m.abs() < 3.0 / (n as f64).sqrt(), "{spec:?} mean {m}");
            assert!((v - 1.0).abs() < 3.0 * (2.0 / n as f64).sqrt(), "{spec:?} var {v}");
            if spec == InnovationSpec::StandardizedUniformPm2 {
                assert!(x.iter().all(|v| v.abs() <= SQRT3));
            }
        }
    }

    #[test]
    fn lr_norms() {
        // ‖ξ‖_2 = 1 for both standardized laws
        assert!((InnovationSpec::StandardizedUniformPm2.lr_norm(2.0) - 1.0).abs() < 1e-14);
        assert!((InnovationSpec::StandardNormal.lr_norm(2.0) - 1.0).abs() < 1e-12);
        // E|Z| = √(2/π)
        let e1 = InnovationSpec::StandardNormal.lr_norm(1.0);
        assert!((e1 - (2.0 / std::f64::consts::PI).sqrt()).abs() < 1e-12);
        // uniform on [-√3, √3]: E|ξ| = √3/2
        assert!((InnovationSpec::StandardizedUniformPm2.lr_norm(1.0) - SQRT3 / 2.0).abs() < 1e-14);
    }

    #[test]
    fn zero_dynamics_give_zero_trajectory() {
        let model = AcxModelSpec::Arx {
            lags: vec![0.0, 0.0],
            covariate_coef: vec![0.0],
            timing: CovariateTiming::Contemporaneous,
        };
        let traj = simulate(&model, &CovariateSpec::default(), &zero_innovation(), 500, 10, 1).unwrap();
        assert_eq!(traj.len(), 500);
        assert!(traj.y.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn simulation_is_deterministic() {
        let m = AcxModelSpec::reference_arx();
        let c = CovariateSpec::default();
        let i = InnovationSpec::default();
        let a = simulate(&m, &c, &i, 1000, 100, 99).unwrap();
        let b = simulate(&m, &c, &i, 1000, 100, 99).unwrap();
        let d = simulate(&m, &c, &i, 1000, 100, 100).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.y, d.y);
    }

    #[test]
    fn arx_mean_matches_fixed_point() {
        // m_Y (1 - 0.25 + 0.4) = 0.8 m_χ
        let cov = CovariateSpec::default();
        let traj = simulate(
            &AcxModelSpec::reference_arx(),
            &cov,
            &InnovationSpec::default(),
            100_000,
            1000,
            3,
        )
        .unwrap();
        let expected = 0.8 * cov.mean / (1.0 - 0.25 + 0.4);
        let (m, _) = mean_var(&traj.y);
        let se = batch_means_se(&traj.y);
        assert!((m - expected).abs() < 3.0 * se, "mean {m} vs {expected} (se {se})");
    }

    #[test]
    fn tarx_is_bounded_by_contraction() {
        let model = AcxModelSpec::reference_tarx();
        let cov = CovariateSpec::default();
        let traj = simulate(&model, &cov, &InnovationSpec::default(), 100_000, 0, 11).unwrap();
        // |Y_t| ≤ 0.6 |Y_{t-1}| + |u_t| with u_t the input terms, from Y_{-1} = 0
        let mut sup_u = traj.y[0].abs();
        for t in 1..traj.len() {
            let prev = traj.y[t - 1];
            let u = traj.y[t] - (0.2 * prev.max(0.0) - 0.6 * prev.min(0.0));
            sup_u = sup_u.max(u.abs());
        }
        let sup_y = traj.y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(sup_y <= sup_u / (1.0 - 0.6) + 1e-12);
        let closed = stationary_bound(&model, &cov, &InnovationSpec::default()).unwrap();
        assert!(sup_y <= closed);
    }

    #[test]
    fn explosion_is_reported() {
        let model = AcxModelSpec::Arx {
            lags: vec![3.0],
            covariate_coef: vec![1.0],
            timing: CovariateTiming::Lagged,
        };
        let err = simulate(&model, &CovariateSpec::default(), &InnovationSpec::default(), 2000, 0, 1)
            .unwrap_err();
        match err {
            Error::Explosion { t, .. } => assert!(t > 100 && t < 2000),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn generic_model_matches_arx() {
        let g = AcxModelSpec::Generic(GenericAffine {
            memory: 1,
            f: Arc::new(|y: &[f64], chi: &[f64]| 0.3 * y[0] + 0.5 * chi[0]),
            m: None,
            lipschitz: LipschitzSequences {
                y_f: vec![0.3],
                chi_f: vec![0.5],
                ..Default::default()
            },
        });
        let arx = AcxModelSpec::Arx {
            lags: vec![0.3],
            covariate_coef: vec![0.5],
            timing: CovariateTiming::Lagged,
        };
        let c = CovariateSpec::default();
        let i = InnovationSpec::default();
        let a = simulate(&g, &c, &i, 300, 20, 5).unwrap();
        let b = simulate(&arx, &c, &i, 300, 20, 5).unwrap();
        for (u, v) in a.y.iter().zip(&b.y) {
            assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn contraction_reports() {
        let c = CovariateSpec::default();
        let arx = contraction_report(&AcxModelSpec::reference_arx(), &c, 1.0);
        assert!((arx.y_sum - 0.65).abs() < 1e-15);
        assert!((arx.total - 0.9).abs() < 1e-15);
        assert!(arx.satisfied);

        let tarx = contraction_report(&AcxModelSpec::reference_tarx(), &c, 1.0);
        assert_eq!(tarx.terms[0].alpha_y_f, 0.6);
        assert!(tarx.satisfied);
        let hot = CovariateSpec {
            ar_coefficient: 0.99,
            ..c.clone()
        };
        assert!((contraction_report(&AcxModelSpec::reference_tarx(), &hot, 1.0).total - 0.99).abs() < 1e-15);

        let zero = AcxModelSpec::Arx {
            lags: vec![0.0],
            covariate_coef: vec![0.0],
            timing: CovariateTiming::Lagged,
        };
        let still = CovariateSpec {
            ar_coefficient: 0.0,
            ..c.clone()
        };
        let r = contraction_report(&zero, &still, 1.0);
        assert_eq!(r.total, 0.0);
        assert!(r.satisfied);

        let explosive = AcxModelSpec::Arx {
            lags: vec![1.2],
            covariate_coef: vec![1.0],
            timing: CovariateTiming::Lagged,
        };
        assert!(!contraction_report(&explosive, &c, 1.0).satisfied);
    }

    #[test]
    fn tau_bound_single_iota_at_one() {
        let d = DecaySpec::Explicit {
            values: vec![0.3, 0.2, 0.1],
        };
        let v = tau_upper_bound(&d, 1, 100).unwrap();
        assert!((v - (0.6 + 0.3)).abs() < 1e-15);
        assert!(tau_upper_bound(&DecaySpec::Explicit { values: vec![0.7, 0.4] }, 3, 10).is_err());
    }

    #[test]
    fn zeta_tail_matches_direct_sum() {
        // ζ(2) = π²/6, ζ(4) = π⁴/90
        let pi = std::f64::consts::PI;
        assert!((zeta_tail(2.0, 1) - pi * pi / 6.0).abs() < 1e-13);
        assert!((zeta_tail(4.0, 1) - pi.powi(4) / 90.0).abs() < 1e-14);
        let direct: f64 = (5..2_000_000).map(|k| (k as f64).powf(-3.0)).sum();
        assert!((zeta_tail(3.0, 5) - direct).abs() < 1e-12);
    }

    #[test]
    fn pairs_basic_layout() {
        let traj = Trajectory::new(vec![1.0, 2.0, 3.0], vec![10.0, 20.0, 30.0], 1).unwrap();
        let ds = supervised_pairs(&traj, 1).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.input(0), &[1.0, 10.0]);
        assert_eq!(ds.target(0), 2.0);
        assert_eq!(ds.input(1), &[2.0, 20.0]);
        assert_eq!(ds.target(1), 3.0);

        let traj = Trajectory::new(
            (0..5).map(|v| v as f64).collect(),
            (0..5).map(|v| 10.0 * v as f64).collect(),
            1,
        )
        .unwrap();
        let ds = supervised_pairs(&traj, 2).unwrap();
        assert_eq!(ds.len(), 3);
        assert_eq!(ds.input(0), &[1.0, 10.0, 0.0, 0.0]);
        assert_eq!(ds.lag(0, 2), (0.0, &[0.0][..]));
        assert!(matches!(
            supervised_pairs(&traj, 5),
            Err(Error::InsufficientData { .. })
        ));
    }

    #[test]
    fn covariance_diagonal_is_variance() {
        let traj = simulate(
            &AcxModelSpec::reference_arx(),
            &CovariateSpec::default(),
            &InnovationSpec::default(),
            5000,
            100,
            2,
        )
        .unwrap();
        let est = empirical_cov_decay(&traj, |z| z[0], |z| z[0], &[0]).unwrap();
        let n = traj.len() as f64;
        let m = traj.y.iter().sum::<f64>() / n;
        let var = traj.y.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n;
        assert!((est[0].cov - var).abs() < 1e-12 * var);
        assert!(empirical_cov_decay(&traj, |z| z[0], |z| z[0], &[2500]).is_err());
    }

    #[test]
    fn iid_series_has_no_covariance() {
        let model = AcxModelSpec::Arx {
            lags: vec![0.0, 0.0],
            covariate_coef: vec![0.0],
            timing: CovariateTiming::Contemporaneous,
        };
        let traj = simulate(&model, &CovariateSpec::default(), &InnovationSpec::default(), 200_000, 0, 8)
            .unwrap();
        for e in empirical_cov_decay(&traj, |z| z[0], |z| z[0], &[1, 2, 5, 20]).unwrap() {
            assert!(e.abs_cov < 3.0 * e.std_err, "gap {}: {} vs {}", e.gap, e.abs_cov, e.std_err);
        }
    }

    #[test]
    fn csv_round_trip_and_errors() {
        let traj = simulate(
            &AcxModelSpec::reference_arx(),
            &CovariateSpec {
                dim: 2,
                ..Default::default()
            },
            &InnovationSpec::default(),
            50,
            5,
            4,
        );
        // covariate_coef has one entry but dim = 2
        assert!(matches!(traj, Err(Error::DimensionMismatch { .. })));

        let traj = simulate(
            &AcxModelSpec::reference_arx(),
            &CovariateSpec::default(),
            &InnovationSpec::default(),
            50,
            5,
            4,
        )
        .unwrap();
        let mut buf = Vec::new();
        traj.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("t,y,chi_1\n"));
        let back = Trajectory::read_csv(&buf[..], Path::new("mem")).unwrap();
        assert_eq!(back.y, traj.y);
        assert_eq!(back.chi, traj.chi);

        let bad = "t,y,chi_1\n0,1.0,2.0\n1,abc,2.0\n";
        match Trajectory::read_csv(bad.as_bytes(), Path::new("bad.csv")) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }
}
