//! Constants, deviation probabilities and excess-risk bounds for ERM under
//! ψ-weak dependence.

use serde::{Deserialize, Serialize};

use crate::acx::DecaySpec;
use crate::error::{Error, Result};
use crate::parallel::{map_indexed, Workers};
use crate::rng::{derive_seed, VARIANCE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DependenceKind {
    #[default]
    Theta,
    Eta,
    Kappa,
    Lambda,
}

impl DependenceKind {
    pub const ALL: [DependenceKind; 4] = [
        DependenceKind::Theta,
        DependenceKind::Eta,
        DependenceKind::Kappa,
        DependenceKind::Lambda,
    ];

    /// `Ψ(1, 1)`.
    pub fn psi11(self) -> f64 {
        psi_value(self, 1, 1)
    }

    pub fn name(self) -> &'static str {
        match self {
            DependenceKind::Theta => "theta",
            DependenceKind::Eta => "eta",
            DependenceKind::Kappa => "kappa",
            DependenceKind::Lambda => "lambda",
        }
    }
}

/// Normalized `Ψ(u, v)`: `2v`, `u + v`, `uv` or `(u + v + uv)/2`.
pub fn psi_value(kind: DependenceKind, u: u64, v: u64) -> f64 {
    let (u, v) = (u as f64, v as f64);
    match kind {
        DependenceKind::Theta => 2.0 * v,
        DependenceKind::Eta => u + v,
        DependenceKind::Kappa => u * v,
        DependenceKind::Lambda => (u + v + u * v) / 2.0,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DependenceParams {
    #[serde(default)]
    pub kind: DependenceKind,
    pub mu: f64,
    pub l1: f64,
    pub l2: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decay: Option<DecaySpec>,
    /// Fast-rate exponent `ν ∈ (0, 1]`.
    #[serde(default = "one")]
    pub nu: f64,
    /// Variance constant `C` of the fast regime.
    #[serde(default = "one")]
    pub c: f64,
    #[serde(default = "one")]
    pub c3: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for DependenceParams {
    fn default() -> Self {
        DependenceParams {
            kind: DependenceKind::Theta,
            mu: 2.0,
            l1: 1.0,
            l2: 1.0,
            decay: None,
            nu: 1.0,
            c: 1.0,
            c3: 1.0,
        }
    }
}

impl DependenceParams {
    pub fn validate(&self) -> Result<()> {
        let nonneg = |name: &str, v: f64| {
            if v >= 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::param(format!("{name} must be finite and nonnegative, got {v}")))
            }
        };
        nonneg("mu", self.mu)?;
        nonneg("l1", self.l1)?;
        nonneg("l2", self.l2)?;
        if !(self.nu > 0.0 && self.nu <= 1.0) {
            return Err(Error::param(format!("nu must lie in (0, 1], got {}", self.nu)));
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::param("variance constant C must be positive"));
        }
        if !(self.c3 > 0.0 && self.c3.is_finite()) {
            return Err(Error::param("C3 must be positive"));
        }
        if let Some(d) = &self.decay {
            d.validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundConstants {
    /// Sup of the loss.
    pub m: f64,
    /// Lipschitz constant of the loss in its prediction argument.
    pub l: f64,
    #[serde(default = "one")]
    pub c0: f64,
    /// Input dimension and smoothness of the Hölder covering.
    pub d: f64,
    pub s: f64,
}

impl BoundConstants {
    pub fn validate(&self) -> Result<()> {
        if !(self.m > 0.0 && self.m.is_finite()) {
            return Err(Error::param(format!("M must be positive, got {}", self.m)));
        }
        if !(self.l > 0.0 && self.l.is_finite()) {
            return Err(Error::param(format!("L must be positive, got {}", self.l)));
        }
        if !(self.c0 >= 0.0 && self.c0.is_finite()) {
            return Err(Error::param("C0 must be nonnegative"));
        }
        if !(self.d > 0.0 && self.s > 0.0 && self.d.is_finite() && self.s.is_finite()) {
            return Err(Error::param("d and s must be positive"));
        }
        Ok(())
    }

    /// `2d/s`.
    pub fn exponent(&self) -> f64 {
        2.0 * self.d / self.s
    }

    /// `log N(H, ε/4L) ≤ C₀ (ε/4L)^{-2d/s}`.
    pub fn log_covering(&self, eps: f64) -> f64 {
        self.c0 * (eps / (4.0 * self.l)).powf(-self.exponent())
    }
}

/// Sample-size-free constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedConstants {
    pub psi11: f64,
    #[serde(rename = "C1")]
    pub c1: f64,
    #[serde(rename = "C2")]
    pub c2: f64,
    #[serde(rename = "C4")]
    pub c4: f64,
    #[serde(rename = "C5")]
    pub c5: f64,
}

pub fn derived_constants(bc: &BoundConstants, dp: &DependenceParams) -> DerivedConstants {
    let psi11 = dp.kind.psi11();
    let m = bc.m;
    let mu = dp.mu;
    let c1 = 4.0 * m * m * psi11 * dp.l1;
    let c2 = 2.0 * m * dp.l2 * (2f64.powf(3.0 + mu) / psi11).max(1.0);
    let c4 = 4.0 * c1 + 8.0 * c2.powf(1.0 / (mu + 2.0)) * m.powf(slow_power(mu));
    let c5 = 4.0 * (dp.c + m.powf(dp.nu) / dp.c);
    DerivedConstants {
        psi11,
        c1,
        c2,
        c4,
        c5,
    }
}

/// `(2μ + 3)/(μ + 2)`.
fn slow_power(mu: f64) -> f64 {
    (2.0 * mu + 3.0) / (mu + 2.0)
}

/// Constants depending on the sample size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleConstants {
    #[serde(rename = "Cn1")]
    pub cn1: f64,
    #[serde(rename = "Cpn")]
    pub cpn: f64,
    #[serde(rename = "Cn2")]
    pub cn2: f64,
    #[serde(rename = "Cpn2")]
    pub cpn2: f64,
    #[serde(rename = "An")]
    pub an: f64,
}

pub fn sample_constants(n: f64, bc: &BoundConstants, dp: &DependenceParams) -> SampleConstants {
    let k = derived_constants(bc, dp);
    let m = bc.m;
    let mu = dp.mu;
    let q = k.c2.powf(1.0 / (mu + 2.0));
    let r = slow_power(mu);
    let cn1 = n * n / (4.0 * k.c1 * n + 8.0 * q * (n * m).powf(r));
    let cpn = n * n / (k.c1 * n + 2.0 * q * (2.0 * n * m).powf(r));
    let (c, nu) = (dp.c, dp.nu);
    let ln = n.ln();
    let cn2 = (n * n / 4.0) / (n * c + ln * n.powf(nu - 0.25) * m.powf(nu) / c);
    let cpn2 = n * n / (n * c + ln * n.powf(nu - 0.25) * (2.0 * m).powf(nu) / (2.0 * c));
    SampleConstants {
        cn1,
        cpn,
        cn2,
        cpn2,
        an: variance_bound_slow(n, m, dp.kind, dp.l1),
    }
}

/// `A_n = 2nM²Ψ(1,1)L₁`.
pub fn variance_bound_slow(n: f64, m: f64, kind: DependenceKind, l1: f64) -> f64 {
    2.0 * n * m * m * kind.psi11() * l1
}

/// A probability bound, before and after clamping to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Probability {
    pub raw: f64,
    pub clamped: f64,
}

impl Probability {
    fn new(raw: f64) -> Self {
        Probability {
            raw,
            clamped: raw.min(1.0),
        }
    }
}

/// `N exp(-(n²ε²/4) / (C₁n + 2C₂^{1/(μ+2)} (nε/2)^{(2μ+3)/(μ+2)}))`, doubled
/// for the two-sided version.
pub fn deviation_bound_slow(
    eps: f64,
    n: f64,
    bc: &BoundConstants,
    dp: &DependenceParams,
    log_covering: f64,
    two_sided: bool,
) -> Result<Probability> {
    if !(eps > 0.0) {
        return Err(Error::param(format!("eps must be positive, got {eps}")));
    }
    if !(n >= 1.0) {
        return Err(Error::param(format!("n must be at least 1, got {n}")));
    }
    let k = derived_constants(bc, dp);
    let mu = dp.mu;
    let denom = k.c1 * n + 2.0 * k.c2.powf(1.0 / (mu + 2.0)) * (n * eps / 2.0).powf(slow_power(mu));
    let expo = log_covering - (n * n * eps * eps / 4.0) / denom;
    let factor = if two_sided { 2.0 } else { 1.0 };
    Ok(Probability::new(factor * expo.exp()))
}

/// `C₃ N exp(log log n - (n²ε²/4) / (A′ + B′ (nε/2)^ν))` with
/// `B′ = n^{3/4} log n / A′`.
pub fn deviation_bound_fast(
    eps: f64,
    n: f64,
    a_prime: f64,
    c3: f64,
    nu: f64,
    log_covering: f64,
) -> Result<Probability> {
    if !(n >= 3.0) {
        return Err(Error::param(format!("fast deviation bound needs n >= 3, got {n}")));
    }
    if !(eps > 0.0) {
        return Err(Error::param(format!("eps must be positive, got {eps}")));
    }
    if !(a_prime > 0.0) {
        return Err(Error::param("A'_n must be positive"));
    }
    let b_prime = n.powf(0.75) * n.ln() / a_prime;
    let expo = log_covering + n.ln().ln()
        - (n * n * eps * eps / 4.0) / (a_prime + b_prime * (n * eps / 2.0).powf(nu));
    Ok(Probability::new(c3 * expo.exp()))
}

fn check_eta(eta: f64) -> Result<()> {
    if eta > 0.0 && eta < 1.0 {
        Ok(())
    } else {
        Err(Error::param(format!("eta must lie in (0, 1), got {eta}")))
    }
}

/// Positive root of `ε^{2+e} - a ε^e - b = 0`, `e = 2d/s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RootSolution {
    pub eps: f64,
    pub a: f64,
    pub b: f64,
    /// `|F(ε)|` over the sum of the absolute values of its three terms.
    pub relative_residual: f64,
    /// `max{(2a)^{1/2}, (2b)^{1/(2+e)}}`.
    pub upper: f64,
    pub iterations: usize,
}

pub fn root_residual(eps: f64, a: f64, b: f64, e: f64) -> f64 {
    let t1 = eps.powf(2.0 + e);
    let t2 = a * eps.powf(e);
    let scale = t1.abs() + t2.abs() + b.abs();
    if scale == 0.0 {
        0.0
    } else {
        (t1 - t2 - b).abs() / scale
    }
}

/// Bisection on `G(ε) = ε² - a - b ε^{-e}`, which is increasing and shares
/// its positive root with the polynomial form.
pub fn solve_root(a: f64, b: f64, e: f64) -> Result<RootSolution> {
    if !(a >= 0.0 && b >= 0.0 && a.is_finite() && b.is_finite()) {
        return Err(Error::param(format!("root coefficients must be finite and nonnegative (a={a}, b={b})")));
    }
    let upper = (2.0 * a).sqrt().max((2.0 * b).powf(1.0 / (2.0 + e)));
    if upper == 0.0 {
        return Ok(RootSolution {
            eps: 0.0,
            a,
            b,
            relative_residual: 0.0,
            upper,
            iterations: 0,
        });
    }
    let g = |x: f64| x * x - a - b * x.powf(-e);
    let mut lo = 1e-30f64.min(upper / 2.0);
    let mut hi = 2.0 * upper;
    let mut iterations = 0;
    if g(lo) >= 0.0 {
        hi = lo;
    } else {
        while iterations < 200 {
            iterations += 1;
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if g(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }
    // pick whichever end leaves the smaller residual
    let eps = if root_residual(lo, a, b, e) < root_residual(hi, a, b, e) {
        lo
    } else {
        hi
    };
    Ok(RootSolution {
        eps,
        a,
        b,
        relative_residual: root_residual(eps, a, b, e),
        upper,
        iterations,
    })
}

/// `ε₁(n, η)`: root with `a = log(1/η)/C_{n,1}`, `b = C₀(4L)^{2d/s}/C_{n,1}`.
pub fn solve_eps1(n: f64, eta: f64, bc: &BoundConstants, dp: &DependenceParams) -> Result<RootSolution> {
    check_eta(eta)?;
    check_n(n, 1.0)?;
    bc.validate()?;
    dp.validate()?;
    let cn1 = sample_constants(n, bc, dp).cn1;
    let e = bc.exponent();
    solve_root(
        (1.0 / eta).ln() / cn1,
        bc.c0 * (4.0 * bc.l).powf(e) / cn1,
        e,
    )
}

fn check_n(n: f64, min: f64) -> Result<()> {
    if n >= min && n.is_finite() {
        Ok(())
    } else {
        Err(Error::param(format!("n must be at least {min}, got {n}")))
    }
}

/// Which expression to use for `ε′₁`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Eps1Form {
    /// `[log(1/η)/C′_n]^{1/2}`, obtained by inverting the tail bound.
    #[default]
    Proof,
    /// `[log(1/η)/C_{n,1}]^{μ+2}`, the alternative closed form.
    AsStated,
}

pub fn eps1_prime(
    n: f64,
    eta: f64,
    bc: &BoundConstants,
    dp: &DependenceParams,
    form: Eps1Form,
) -> Result<f64> {
    check_eta(eta)?;
    check_n(n, 1.0)?;
    let sc = sample_constants(n, bc, dp);
    let l = (1.0 / eta).ln();
    Ok(match form {
        Eps1Form::Proof => (l / sc.cpn).sqrt(),
        Eps1Form::AsStated => (l / sc.cn1).powf(dp.mu + 2.0),
    })
}

/// Smallest admissible `n` for the slow-rate bound, evaluated in log space so
/// that huge thresholds come back as large floats (or `inf`) instead of
/// overflowing part-way.
pub fn min_n_slow(eta: f64, bc: &BoundConstants, dp: &DependenceParams) -> Result<f64> {
    check_eta(eta)?;
    bc.validate()?;
    dp.validate()?;
    let k = derived_constants(bc, dp);
    let p = dp.mu + 2.0;
    let (m, d, s) = (bc.m, bc.d, bc.s);
    let t1 = p * (2.0 * k.c4 / (2.0 * m).sqrt() * (1.0 / eta).ln()).ln();
    let t2 = p * (2.0 * bc.c0 * k.c4).ln() + 2.0 * p * d / s * (4.0 * bc.l).ln()
        - p * (2.0 * s + 2.0 * d) / s * (2.0 * m).ln();
    let v = t1.max(t2).exp();
    // ceil of a float that is already integral can land one ulp high
    let r = v.round();
    Ok(if (v - r).abs() <= 1e-9 * r.max(1.0) { r } else { v.ceil() })
}

/// Two terms of [`min_n_slow`] before the ceiling.
pub fn min_n_slow_terms(eta: f64, bc: &BoundConstants, dp: &DependenceParams) -> Result<(f64, f64)> {
    check_eta(eta)?;
    let k = derived_constants(bc, dp);
    let p = dp.mu + 2.0;
    let (m, d, s) = (bc.m, bc.d, bc.s);
    let t1 = (2.0 * k.c4 / (2.0 * m).sqrt() * (1.0 / eta).ln()).powf(p);
    let t2 = (2.0 * bc.c0 * k.c4).powf(p) * (4.0 * bc.l).powf(2.0 * p * d / s)
        / (2.0 * m).powf(p * (2.0 * s + 2.0 * d) / s);
    Ok((t1, t2))
}

/// Fast-rate root together with a flag for `C₃ log n / η ≤ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FastRoot {
    pub root: RootSolution,
    /// `C₃ log n / η ≤ 1`: the log term was clamped to zero.
    pub log_term_clamped: bool,
}

fn fast_log_term(n: f64, eta: f64, dp: &DependenceParams) -> (f64, bool) {
    let v = (dp.c3 * n.ln() / eta).ln();
    if v > 0.0 {
        (v, false)
    } else {
        (0.0, true)
    }
}

/// `ε₂(n, η, ν)`: root with `a = log(C₃ log n/η)/C_{n,2}`, `b = C₀(4L)^{2d/s}/C_{n,2}`.
pub fn solve_eps2(n: f64, eta: f64, bc: &BoundConstants, dp: &DependenceParams) -> Result<FastRoot> {
    check_eta(eta)?;
    check_n(n, 3.0)?;
    bc.validate()?;
    dp.validate()?;
    let cn2 = sample_constants(n, bc, dp).cn2;
    let (log_term, clamped) = fast_log_term(n, eta, dp);
    let e = bc.exponent();
    Ok(FastRoot {
        root: solve_root(log_term / cn2, bc.c0 * (4.0 * bc.l).powf(e) / cn2, e)?,
        log_term_clamped: clamped,
    })
}

/// `ε′₂ = [log(C₃ log n/η)/C′_{n,2}]^{1/2}`, zero when the log is not positive.
pub fn eps2_prime(n: f64, eta: f64, bc: &BoundConstants, dp: &DependenceParams) -> Result<f64> {
    check_eta(eta)?;
    check_n(n, 3.0)?;
    let (log_term, _) = fast_log_term(n, eta, dp);
    Ok((log_term / sample_constants(n, bc, dp).cpn2).sqrt())
}

/// `max{exp(η/C₃), (C₅C₃/η)²/(4M⁴), 2C₅C₀(4L)^{2d/s}/(2M)^{(2s+2d)/s}}`.
pub fn min_n_fast(eta: f64, bc: &BoundConstants, dp: &DependenceParams) -> Result<f64> {
    check_eta(eta)?;
    bc.validate()?;
    dp.validate()?;
    let c5 = derived_constants(bc, dp).c5;
    let (m, d, s) = (bc.m, bc.d, bc.s);
    let t1 = (eta / dp.c3).exp();
    let t2 = (c5 * dp.c3 / eta).powi(2) / (4.0 * m.powi(4));
    let t3 = 2.0 * c5 * bc.c0 * (4.0 * bc.l).powf(2.0 * d / s) / (2.0 * m).powf((2.0 * s + 2.0 * d) / s);
    Ok(t1.max(t2).max(t3))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentRow {
    pub k: u32,
    /// Partial sum plus a rigorous bound on the remainder.
    pub lhs: f64,
    pub rhs: f64,
    pub tail_bound: f64,
    pub terms: usize,
    pub satisfied: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub rows: Vec<MomentRow>,
    /// All checked `k` pass. This certifies `k <= k_max` only.
    pub satisfied: bool,
}

const MAX_TERMS: usize = 1 << 22;

/// Checks `Σ_{j≥0} (j+1)^k ε_j ≤ L₁ L₂^k (k!)^μ` for `k = 0..=k_max`.
///
/// Sums start with `truncation` terms and grow until the closed-form tail
/// bound is at most `1e-12` of the partial sum.
pub fn moment_condition_check(
    decay: &DecaySpec,
    mu: f64,
    l1: f64,
    l2: f64,
    k_max: u32,
    truncation: usize,
) -> Result<MomentReport> {
    decay.validate()?;
    if !(mu >= 0.0 && l1 >= 0.0 && l2 >= 0.0) {
        return Err(Error::param("mu, L1 and L2 must be nonnegative"));
    }
    let mut rows = Vec::with_capacity(k_max as usize + 1);
    let mut log_fact = 0.0;
    for k in 0..=k_max {
        if k > 0 {
            log_fact += (k as f64).ln();
        }
        let rhs = l1 * l2.powi(k as i32) * (mu * log_fact).exp();
        let kf = k as f64;
        let row = |lhs: f64, tail_bound: f64, terms: usize, reason: Option<String>| MomentRow {
            k,
            lhs,
            rhs,
            tail_bound,
            terms,
            satisfied: reason.is_none() && lhs <= rhs,
            reason,
        };
        let term = |j: usize| ((j + 1) as f64).powf(kf) * decay.epsilon(j);
        let r = match decay {
            DecaySpec::Explicit { values } => {
                let lhs: f64 = (0..values.len()).map(term).sum();
                row(lhs, 0.0, values.len(), None)
            }
            DecaySpec::Geometric { rate, scale } => {
                if *rate == 0.0 || *scale == 0.0 {
                    row(term(0), 0.0, 1, None)
                } else {
                    let mut j_end = truncation.max(1);
                    let mut partial = 0.0;
                    let mut next = 0;
                    loop {
                        for j in next..j_end {
                            partial += term(j);
                        }
                        next = j_end;
                        // term ratios ((j+2)/(j+1))^k a decrease in j
                        let ratio = (((j_end + 2) as f64) / ((j_end + 1) as f64)).powf(kf) * rate;
                        let tail = if ratio < 1.0 {
                            term(j_end) / (1.0 - ratio)
                        } else {
                            f64::INFINITY
                        };
                        if tail <= 1e-12 * partial || j_end >= MAX_TERMS {
                            break row(partial + tail, tail, j_end, None);
                        }
                        j_end *= 2;
                    }
                }
            }
            DecaySpec::Riemann { gamma, scale } => {
                let excess = gamma - kf - 1.0;
                if excess <= 0.0 {
                    row(
                        f64::INFINITY,
                        f64::INFINITY,
                        0,
                        Some(format!("sum diverges: gamma = {gamma} <= k + 1 = {}", k + 1)),
                    )
                } else if *scale == 0.0 {
                    row(0.0, 0.0, 0, None)
                } else {
                    let mut j_end = truncation.max(1);
                    let mut partial = 0.0;
                    let mut next = 0;
                    loop {
                        for j in next..j_end {
                            partial += term(j);
                        }
                        next = j_end;
                        // Σ_{m > J} m^{k-γ} ≤ ∫_J^∞ x^{k-γ} dx
                        let tail = scale * (j_end as f64).powf(-excess) / excess;
                        if tail <= 1e-12 * partial || j_end >= MAX_TERMS {
                            break row(partial + tail, tail, j_end, None);
                        }
                        j_end *= 2;
                    }
                }
            }
        };
        rows.push(r);
    }
    let satisfied = rows.iter().all(|r| r.satisfied);
    Ok(MomentReport { rows, satisfied })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceEstimate {
    /// `1.2 · max_n Var(Σ ℓ)/n`.
    pub c_hat: f64,
    /// `(n, Var(Σ ℓ)/n)` per grid point.
    pub per_n: Vec<(usize, f64)>,
}

/// Empirical surrogate for the fast-rate variance constant `C`.
///
/// `losses(seed, n)` must return a length-`n` loss series from a fresh
/// trajectory; replication seeds are derived from `seed`.
pub fn variance_constant_estimate<F>(
    losses: F,
    n_grid: &[usize],
    replications: usize,
    seed: u64,
    workers: Workers,
) -> Result<VarianceEstimate>
where
    F: Fn(u64, usize) -> Result<Vec<f64>> + Sync,
{
    if replications < 2 {
        return Err(Error::param("variance estimate needs at least 2 replications"));
    }
    if n_grid.is_empty() || n_grid.contains(&0) {
        return Err(Error::param("n grid must be nonempty with positive entries"));
    }
    let mut per_n = Vec::with_capacity(n_grid.len());
    for &n in n_grid {
        let sums = map_indexed(replications, workers, |r| {
            let s = derive_seed(seed, &[VARIANCE, n as u64, r as u64]);
            let l = losses(s, n)?;
            if l.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: l.len(),
                });
            }
            Ok(l.iter().sum::<f64>())
        })
        .into_iter()
        .collect::<Result<Vec<f64>>>()?;
        let mean = sums.iter().sum::<f64>() / replications as f64;
        let var = sums.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / (replications - 1) as f64;
        per_n.push((n, var / n as f64));
    }
    let c_hat = 1.2 * per_n.iter().map(|p| p.1).fold(0.0, f64::max);
    Ok(VarianceEstimate { c_hat, per_n })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BoundMode {
    #[default]
    Slow,
    Fast,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReportOptions {
    pub eps1_form: Eps1Form,
    /// Fast-mode reports below this `n` carry a caveat.
    pub small_n_threshold: f64,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions {
            eps1_form: Eps1Form::Proof,
            small_n_threshold: 1e3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub n: f64,
    pub eta: f64,
    pub mode: BoundMode,
    /// The total holds with probability at least `1 - 2η`.
    pub confidence: f64,
    pub kind: DependenceKind,
    #[serde(flatten)]
    pub constants: DerivedConstants,
    #[serde(flatten)]
    pub sample: SampleConstants,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps1p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps2p: Option<f64>,
    pub eps1_form: Eps1Form,
    pub total: f64,
    pub root_residual: f64,
    pub root_upper: f64,
    /// `log N(H, ε/4L)` at the root.
    pub log_covering: f64,
    pub min_n: f64,
    pub min_n_satisfied: bool,
    pub log_term_clamped: bool,
    pub small_n_caveat: bool,
}

/// `ε + ε′` for either regime, with every intermediate constant.
pub fn generalization_report(
    n: f64,
    eta: f64,
    mode: BoundMode,
    bc: &BoundConstants,
    dp: &DependenceParams,
    options: &ReportOptions,
) -> Result<BoundReport> {
    check_eta(eta)?;
    bc.validate()?;
    dp.validate()?;
    let constants = derived_constants(bc, dp);
    let sample = sample_constants(n, bc, dp);
    let mut r = BoundReport {
        n,
        eta,
        mode,
        confidence: 1.0 - 2.0 * eta,
        kind: dp.kind,
        constants,
        sample,
        eps1: None,
        eps1p: None,
        eps2: None,
        eps2p: None,
        eps1_form: options.eps1_form,
        total: 0.0,
        root_residual: 0.0,
        root_upper: 0.0,
        log_covering: 0.0,
        min_n: 0.0,
        min_n_satisfied: false,
        log_term_clamped: false,
        small_n_caveat: false,
    };
    let root = match mode {
        BoundMode::Slow => {
            let root = solve_eps1(n, eta, bc, dp)?;
            let p = eps1_prime(n, eta, bc, dp, options.eps1_form)?;
            r.eps1 = Some(root.eps);
            r.eps1p = Some(p);
            r.total = root.eps + p;
            r.min_n = min_n_slow(eta, bc, dp)?;
            root
        }
        BoundMode::Fast => {
            let fr = solve_eps2(n, eta, bc, dp)?;
            let p = eps2_prime(n, eta, bc, dp)?;
            r.eps2 = Some(fr.root.eps);
            r.eps2p = Some(p);
            r.total = fr.root.eps + p;
            r.min_n = min_n_fast(eta, bc, dp)?;
            r.log_term_clamped = fr.log_term_clamped;
            r.small_n_caveat = n < options.small_n_threshold;
            fr.root
        }
    };
    r.root_residual = root.relative_residual;
    r.root_upper = root.upper;
    r.log_covering = if root.eps > 0.0 {
        bc.log_covering(root.eps)
    } else {
        0.0
    };
    r.min_n_satisfied = n >= r.min_n && !r.log_term_clamped;
    Ok(r)
}
