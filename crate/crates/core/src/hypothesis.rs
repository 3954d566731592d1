//! Parametric predictor classes `{h_θ : θ ∈ Θ}` that are linear in `θ`.
//!
//! Inputs are rows of a [`Dataset`](crate::acx::Dataset):
//! `[Y_{t-1}, χ_{t-1}, ..., Y_{t-p}, χ_{t-p}]`. Lipschitz constants are taken
//! with respect to the product norm `Σ_k (|y_k| + Σ_i |χ_{k,i}|)`, so the
//! coefficient block paired with one lag contributes its max-norm.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Compact box `Θ = Π_i [lower_i, upper_i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamBox {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl ParamBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let b = ParamBox { lower, upper };
        b.validate()?;
        Ok(b)
    }

    /// `[-half, half]^d`.
    pub fn cube(d: usize, half: f64) -> Self {
        ParamBox {
            lower: vec![-half; d],
            upper: vec![half; d],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.lower.len() != self.upper.len() {
            return Err(Error::DimensionMismatch {
                expected: self.lower.len(),
                got: self.upper.len(),
            });
        }
        for (lo, hi) in self.lower.iter().zip(&self.upper) {
            if !(lo.is_finite() && hi.is_finite()) {
                return Err(Error::param("parameter box must be finite"));
            }
            if lo > hi {
                return Err(Error::param(format!("parameter box has lower {lo} > upper {hi}")));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn widths(&self) -> Vec<f64> {
        self.lower.iter().zip(&self.upper).map(|(l, u)| u - l).collect()
    }

    /// `max(|lower_i|, |upper_i|)`.
    pub fn max_abs(&self) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| l.abs().max(u.abs()))
            .collect()
    }

    pub fn contains(&self, theta: &[f64]) -> bool {
        theta.len() == self.dim()
            && theta
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(t, (l, u))| *l <= *t && *t <= *u)
    }

    pub fn clamp(&self, theta: &mut [f64]) {
        for (t, (l, u)) in theta.iter_mut().zip(self.lower.iter().zip(&self.upper)) {
            *t = t.clamp(*l, *u);
        }
    }

    /// Whether any coordinate of `theta` sits on a face of the box.
    pub fn on_boundary(&self, theta: &[f64]) -> bool {
        theta
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .any(|(t, (l, u))| l < u && (*t <= *l || *t >= *u))
    }

    /// All `2^d` corners (small `d` only).
    pub fn corners(&self) -> Vec<Vec<f64>> {
        let d = self.dim();
        (0..1usize << d)
            .map(|mask| {
                (0..d)
                    .map(|i| if mask >> i & 1 == 1 { self.upper[i] } else { self.lower[i] })
                    .collect()
            })
            .collect()
    }
}

/// Coordinate-wise bounds on an input row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputBox {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl InputBox {
    pub fn symmetric(width: usize, bound: f64) -> Self {
        InputBox {
            lower: vec![-bound; width],
            upper: vec![bound; width],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.lower.len() != self.upper.len() {
            return Err(Error::DimensionMismatch {
                expected: self.lower.len(),
                got: self.upper.len(),
            });
        }
        if self
            .lower
            .iter()
            .chain(&self.upper)
            .any(|v| !v.is_finite())
        {
            return Err(Error::param("input box must be bounded"));
        }
        Ok(())
    }

    fn max_abs(&self, i: usize) -> f64 {
        self.lower[i].abs().max(self.upper[i].abs())
    }
}

/// A predictor `h_θ(x) = Σ_i θ_i φ_i(x)`.
pub trait Predictor: Send + Sync {
    fn n_params(&self) -> usize;

    /// Number of lags the feature map reads.
    fn memory(&self) -> usize;

    fn covariate_dim(&self) -> usize;

    /// Writes `φ(x)` into `out` (length [`n_params`](Self::n_params)).
    fn features(&self, x: &[f64], out: &mut [f64]);

    /// Coordinate-wise `sup |φ_i(x)|` over the input box.
    fn feature_sup(&self, inputs: &InputBox) -> Vec<f64>;

    /// `sup_{θ ∈ Θ} max_k α_k(θ)` where `α_k(θ)` bounds the sensitivity of
    /// `h_θ` to lag `k`. `inputs` is needed only for nonlinear features.
    fn class_lipschitz(&self, params: &ParamBox, inputs: Option<&InputBox>) -> Result<f64>;

    fn input_width(&self) -> usize {
        self.memory() * (1 + self.covariate_dim())
    }

    /// `Σ_i θ_i φ_i(x)`, accumulated left to right.
    fn predict(&self, theta: &[f64], x: &[f64]) -> Result<f64> {
        if theta.len() != self.n_params() {
            return Err(Error::DimensionMismatch {
                expected: self.n_params(),
                got: theta.len(),
            });
        }
        if x.len() < self.input_width() {
            return Err(Error::DimensionMismatch {
                expected: self.input_width(),
                got: x.len(),
            });
        }
        let mut phi = vec![0.0; self.n_params()];
        self.features(x, &mut phi);
        Ok(dot(theta, &phi))
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for (x, y) in a.iter().zip(b) {
        s += x * y;
    }
    s
}

/// `h_θ(X_t) = θ_{0,0} + Σ_{j=1}^q (θ_{j,Y} Y_{t-j} + θ_{j,χ}·χ_{t-j})`,
/// with `θ = (θ_{0,0}, θ_{1,Y}, θ_{1,χ}, ..., θ_{q,Y}, θ_{q,χ})`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearArPredictor {
    pub q: usize,
    #[serde(default = "one")]
    pub dx: usize,
}

fn one() -> usize {
    1
}

impl LinearArPredictor {
    pub fn new(q: usize, dx: usize) -> Self {
        LinearArPredictor { q, dx }
    }
}

impl Predictor for LinearArPredictor {
    fn n_params(&self) -> usize {
        1 + self.q * (1 + self.dx)
    }

    fn memory(&self) -> usize {
        self.q
    }

    fn covariate_dim(&self) -> usize {
        self.dx
    }

    fn features(&self, x: &[f64], out: &mut [f64]) {
        out[0] = 1.0;
        let w = self.n_params() - 1;
        out[1..].copy_from_slice(&x[..w]);
    }

    fn feature_sup(&self, inputs: &InputBox) -> Vec<f64> {
        let mut g = vec![1.0];
        g.extend((0..self.n_params() - 1).map(|i| inputs.max_abs(i)));
        g
    }

    fn class_lipschitz(&self, params: &ParamBox, _inputs: Option<&InputBox>) -> Result<f64> {
        check_box(self, params)?;
        Ok(params.max_abs()[1..].iter().fold(0.0, |m, v| m.max(*v)))
    }
}

fn check_box(p: &dyn Predictor, params: &ParamBox) -> Result<()> {
    params.validate()?;
    if params.dim() != p.n_params() {
        return Err(Error::DimensionMismatch {
            expected: p.n_params(),
            got: params.dim(),
        });
    }
    Ok(())
}

/// One block `φ_j` of a [`FeatureBasisPredictor`].
pub trait FeatureMap: Send + Sync + std::fmt::Debug {
    fn dim(&self, dx: usize) -> usize;

    /// Largest lag read, 0 for constant maps.
    fn memory(&self) -> usize;

    fn eval(&self, x: &[f64], dx: usize, out: &mut [f64]);

    fn sup_abs(&self, inputs: &InputBox, dx: usize) -> Vec<f64>;

    /// Per-lag Lipschitz contributions `(k, bound)` given `|θ|` bounds for
    /// this block.
    fn lipschitz(&self, coef_abs: &[f64], inputs: Option<&InputBox>, dx: usize) -> Result<Vec<(usize, f64)>>;
}

/// `(1, 0, ..., 0)` of length `width`.
#[derive(Debug, Clone, Copy)]
pub struct UnitMap {
    pub width: usize,
}

impl FeatureMap for UnitMap {
    fn dim(&self, _dx: usize) -> usize {
        self.width
    }
    fn memory(&self) -> usize {
        0
    }
    fn eval(&self, _x: &[f64], _dx: usize, out: &mut [f64]) {
        out.fill(0.0);
        out[0] = 1.0;
    }
    fn sup_abs(&self, _inputs: &InputBox, _dx: usize) -> Vec<f64> {
        let mut v = vec![0.0; self.width];
        v[0] = 1.0;
        v
    }
    fn lipschitz(&self, _c: &[f64], _i: Option<&InputBox>, _dx: usize) -> Result<Vec<(usize, f64)>> {
        Ok(Vec::new())
    }
}

/// `(Y_{t-k}, χ_{t-k})`.
#[derive(Debug, Clone, Copy)]
pub struct LagMap {
    pub lag: usize,
}

impl FeatureMap for LagMap {
    fn dim(&self, dx: usize) -> usize {
        1 + dx
    }
    fn memory(&self) -> usize {
        self.lag
    }
    fn eval(&self, x: &[f64], dx: usize, out: &mut [f64]) {
        let off = (self.lag - 1) * (1 + dx);
        out.copy_from_slice(&x[off..off + 1 + dx]);
    }
    fn sup_abs(&self, inputs: &InputBox, dx: usize) -> Vec<f64> {
        let off = (self.lag - 1) * (1 + dx);
        (off..off + 1 + dx).map(|i| inputs.max_abs(i)).collect()
    }
    fn lipschitz(&self, c: &[f64], _i: Option<&InputBox>, _dx: usize) -> Result<Vec<(usize, f64)>> {
        Ok(vec![(self.lag, c.iter().fold(0.0, |m, v| m.max(*v)))])
    }
}

/// `(Y_{t-k}, Y_{t-k}^2, ..., Y_{t-k}^degree)`.
#[derive(Debug, Clone, Copy)]
pub struct PolynomialLagMap {
    pub lag: usize,
    pub degree: usize,
}

impl FeatureMap for PolynomialLagMap {
    fn dim(&self, _dx: usize) -> usize {
        self.degree
    }
    fn memory(&self) -> usize {
        self.lag
    }
    fn eval(&self, x: &[f64], dx: usize, out: &mut [f64]) {
        let y = x[(self.lag - 1) * (1 + dx)];
        let mut p = 1.0;
        for o in out.iter_mut() {
            p *= y;
            *o = p;
        }
    }
    fn sup_abs(&self, inputs: &InputBox, dx: usize) -> Vec<f64> {
        let b = inputs.max_abs((self.lag - 1) * (1 + dx));
        (1..=self.degree).map(|d| b.powi(d as i32)).collect()
    }
    fn lipschitz(&self, c: &[f64], inputs: Option<&InputBox>, dx: usize) -> Result<Vec<(usize, f64)>> {
        let inputs = inputs.ok_or_else(|| {
            Error::param("polynomial features need an input box for their Lipschitz constant")
        })?;
        inputs.validate()?;
        let b = inputs.max_abs((self.lag - 1) * (1 + dx));
        // |y^d - y'^d| ≤ d b^{d-1} |y - y'| on [-b, b]
        let k = c
            .iter()
            .enumerate()
            .map(|(i, a)| a * (i + 1) as f64 * b.powi(i as i32))
            .sum();
        Ok(vec![(self.lag, k)])
    }
}

/// `h_θ(X_t) = Σ_j θ_jᵀ φ_j(X_t)` over a list of feature blocks.
#[derive(Debug)]
pub struct FeatureBasisPredictor {
    pub dx: usize,
    pub maps: Vec<Box<dyn FeatureMap>>,
}

impl FeatureBasisPredictor {
    /// The identity-lag basis that reproduces [`LinearArPredictor`] with
    /// `θ_0 = (θ_{0,0}, 0, ..., 0)` padded to block width `1 + dx`.
    pub fn identity_lags(q: usize, dx: usize) -> Self {
        let mut maps: Vec<Box<dyn FeatureMap>> = vec![Box::new(UnitMap { width: 1 + dx })];
        maps.extend((1..=q).map(|lag| Box::new(LagMap { lag }) as Box<dyn FeatureMap>));
        FeatureBasisPredictor { dx, maps }
    }

    fn blocks(&self) -> impl Iterator<Item = (usize, &dyn FeatureMap)> + '_ {
        let mut off = 0;
        self.maps.iter().map(move |m| {
            let o = off;
            off += m.dim(self.dx);
            (o, m.as_ref())
        })
    }
}

impl Predictor for FeatureBasisPredictor {
    fn n_params(&self) -> usize {
        self.maps.iter().map(|m| m.dim(self.dx)).sum()
    }

    fn memory(&self) -> usize {
        self.maps.iter().map(|m| m.memory()).max().unwrap_or(0)
    }

    fn covariate_dim(&self) -> usize {
        self.dx
    }

    fn features(&self, x: &[f64], out: &mut [f64]) {
        for (off, m) in self.blocks() {
            let d = m.dim(self.dx);
            m.eval(x, self.dx, &mut out[off..off + d]);
        }
    }

    fn feature_sup(&self, inputs: &InputBox) -> Vec<f64> {
        self.maps.iter().flat_map(|m| m.sup_abs(inputs, self.dx)).collect()
    }

    fn class_lipschitz(&self, params: &ParamBox, inputs: Option<&InputBox>) -> Result<f64> {
        check_box(self, params)?;
        let abs = params.max_abs();
        let mut per_lag = vec![0.0; self.memory() + 1];
        for (off, m) in self.blocks() {
            let d = m.dim(self.dx);
            for (k, v) in m.lipschitz(&abs[off..off + d], inputs, self.dx)? {
                per_lag[k] += v;
            }
        }
        Ok(per_lag.into_iter().fold(0.0, f64::max))
    }
}

/// Interval upper bound on `sup_{θ∈Θ, x∈X} |h_θ(x)|`.
pub fn sup_norm_bound(predictor: &dyn Predictor, params: &ParamBox, inputs: &InputBox) -> Result<f64> {
    check_box(predictor, params)?;
    inputs.validate()?;
    if inputs.lower.len() < predictor.input_width() {
        return Err(Error::DimensionMismatch {
            expected: predictor.input_width(),
            got: inputs.lower.len(),
        });
    }
    let g = predictor.feature_sup(inputs);
    Ok(dot(&params.max_abs(), &g))
}

/// Natural log of the grid covering count `Π_i max(1, ⌈w_i G_i d / (2ε)⌉)`,
/// an upper bound on `N(H, ε)` for classes with
/// `‖h_θ - h_θ'‖_∞ ≤ Σ_i |θ_i - θ'_i| G_i`.
pub fn covering_bound_parametric(
    predictor: &dyn Predictor,
    params: &ParamBox,
    eps: f64,
    feature_sup_norms: &[f64],
) -> Result<f64> {
    check_box(predictor, params)?;
    if !(eps > 0.0) {
        return Err(Error::param(format!("covering radius must be positive, got {eps}")));
    }
    if feature_sup_norms.len() != params.dim() {
        return Err(Error::DimensionMismatch {
            expected: params.dim(),
            got: feature_sup_norms.len(),
        });
    }
    Ok(grid_counts(params, eps, feature_sup_norms)
        .iter()
        .map(|&c| (c as f64).ln())
        .sum())
}

fn grid_counts(params: &ParamBox, eps: f64, g: &[f64]) -> Vec<u64> {
    let d = params.dim() as f64;
    params
        .widths()
        .iter()
        .zip(g)
        .map(|(w, g)| ((w * g * d / (2.0 * eps)).ceil() as u64).max(1))
        .collect()
}

/// Centres of the grid net counted by [`covering_bound_parametric`]
/// (small classes only).
pub fn grid_net(params: &ParamBox, eps: f64, g: &[f64]) -> Vec<Vec<f64>> {
    let counts = grid_counts(params, eps, g);
    let axes: Vec<Vec<f64>> = counts
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let step = (params.upper[i] - params.lower[i]) / c as f64;
            (0..c)
                .map(|j| params.lower[i] + (j as f64 + 0.5) * step)
                .collect()
        })
        .collect();
    let mut out = vec![Vec::new()];
    for axis in &axes {
        out = out
            .into_iter()
            .flat_map(|p| {
                axis.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    out
}

/// Hölder-ball capacity parameters for `ln N(H, u) ≤ C₀ u^{-2d/s}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HolderClassParams {
    pub smoothness: f64,
    pub dim: f64,
    #[serde(default = "unit")]
    pub c0: f64,
    pub loss_lipschitz: f64,
}

fn unit() -> f64 {
    1.0
}

impl HolderClassParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("smoothness", self.smoothness),
            ("dim", self.dim),
            ("c0", self.c0),
            ("loss_lipschitz", self.loss_lipschitz),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::param(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// `2d/s`.
    pub fn exponent(&self) -> f64 {
        2.0 * self.dim / self.smoothness
    }

    /// `ln N(H, ε/(4L))`.
    pub fn log_covering_at(&self, eps: f64) -> Result<f64> {
        covering_bound_holder(self, eps / (4.0 * self.loss_lipschitz))
    }
}

/// `C₀ u^{-2d/s}`, the log of the covering bound at radius `u`.
pub fn covering_bound_holder(params: &HolderClassParams, u: f64) -> Result<f64> {
    params.validate()?;
    if !(u > 0.0) {
        return Err(Error::param(format!("radius must be positive, got {u}")));
    }
    Ok(params.c0 * u.powf(-params.exponent()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn predict_examples() {
        let p = LinearArPredictor::new(1, 1);
        let x = [2.0, 5.0];
        assert_eq!(p.predict(&[0.7, 0.0, 0.0], &x).unwrap(), 0.7);
        assert_eq!(p.predict(&[0.0, 1.0, 0.0], &x).unwrap(), 2.0);
        let v = p.predict(&[0.3, 0.25, 0.8], &[1.0, 2.0]).unwrap();
        assert!((v - 2.15).abs() < 1e-15);
        assert!(matches!(
            p.predict(&[1.0, 2.0], &x),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn feature_basis_reduces_to_linear_ar() {
        let lin = LinearArPredictor::new(2, 1);
        let basis = FeatureBasisPredictor::identity_lags(2, 1);
        assert_eq!(basis.n_params(), 6);
        let x = [0.3, -1.2, 2.5, 0.7];
        let theta_lin = [0.4, 0.1, -0.2, 0.3, 0.5];
        let theta_basis = [0.4, 0.0, 0.1, -0.2, 0.3, 0.5];
        let a = lin.predict(&theta_lin, &x).unwrap();
        let b = basis.predict(&theta_basis, &x).unwrap();
        assert!((a - b).abs() < 1e-15);
    }

    #[test]
    fn class_lipschitz_examples() {
        let p = LinearArPredictor::new(1, 1);
        let zero = ParamBox::cube(3, 0.0);
        assert_eq!(p.class_lipschitz(&zero, None).unwrap(), 0.0);
        assert_eq!(p.class_lipschitz(&ParamBox::cube(3, 1.0), None).unwrap(), 1.0);
        let b = ParamBox::new(vec![-5.0, -0.2, -0.3], vec![5.0, 0.5, 0.3]).unwrap();
        assert_eq!(p.class_lipschitz(&b, None).unwrap(), 0.5);
        // corner enumeration agrees
        let by_corner = b
            .corners()
            .iter()
            .map(|c| c[1].abs().max(c[2].abs()))
            .fold(0.0, f64::max);
        assert_eq!(by_corner, 0.5);
    }

    #[test]
    fn polynomial_features_need_input_box() {
        let p = FeatureBasisPredictor {
            dx: 1,
            maps: vec![Box::new(UnitMap { width: 1 }), Box::new(PolynomialLagMap { lag: 1, degree: 2 })],
        };
        let b = ParamBox::cube(3, 1.0);
        assert!(p.class_lipschitz(&b, None).is_err());
        // 1 + 2·b with b = 2
        let k = p.class_lipschitz(&b, Some(&InputBox::symmetric(2, 2.0))).unwrap();
        assert_eq!(k, 5.0);
        let x = [3.0, 9.9];
        assert_eq!(p.predict(&[1.0, 1.0, 1.0], &x).unwrap(), 13.0);
    }

    #[test]
    fn sup_norm_examples() {
        let p = LinearArPredictor::new(1, 1);
        let inputs = InputBox::symmetric(2, 2.0);
        assert_eq!(sup_norm_bound(&p, &ParamBox::cube(3, 0.0), &inputs).unwrap(), 0.0);
        let b = ParamBox::new(vec![1.0, 0.0, 0.0], vec![1.0, 0.0, 0.0]).unwrap();
        assert_eq!(sup_norm_bound(&p, &b, &InputBox::symmetric(2, 100.0)).unwrap(), 1.0);
        assert_eq!(sup_norm_bound(&p, &ParamBox::cube(3, 1.0), &inputs).unwrap(), 5.0);
        let unbounded = InputBox::symmetric(2, f64::INFINITY);
        assert!(sup_norm_bound(&p, &ParamBox::cube(3, 1.0), &unbounded).is_err());
    }

    #[test]
    fn parametric_covering_examples() {
        let p1 = LinearArPredictor { q: 0, dx: 1 };
        let b = ParamBox::cube(1, 1.0);
        assert_eq!(covering_bound_parametric(&p1, &b, 1.0, &[1.0]).unwrap(), 0.0);
        let p = LinearArPredictor::new(1, 1);
        let zero = ParamBox::cube(3, 0.0);
        assert_eq!(covering_bound_parametric(&p, &zero, 0.1, &[1.0, 2.0, 2.0]).unwrap(), 0.0);
        assert!(covering_bound_parametric(&p, &zero, 0.0, &[1.0, 2.0, 2.0]).is_err());
        // widths 2, G = (1,2,2), d = 3, ε = 0.1: counts 30, 60, 60
        let v = covering_bound_parametric(&p, &ParamBox::cube(3, 1.0), 0.1, &[1.0, 2.0, 2.0]).unwrap();
        assert!((v - (30.0f64 * 60.0 * 60.0).ln()).abs() < 1e-12);
    }

    #[test]
    fn one_parameter_slice_matches_greedy_net() {
        // Greedy left-to-right net of an interval of width w for the class
        // θ ↦ θ·G under the sup norm: the minimal count is ⌈wG/(2ε)⌉.
        let p1 = LinearArPredictor { q: 0, dx: 1 };
        for (w, g, eps) in [(2.0, 1.0, 0.3), (5.0, 0.7, 0.11), (1.0, 3.0, 0.5)] {
            let mut centres = 0u64;
            let mut covered = 0.0f64;
            while covered < w * g - 1e-12 {
                covered += 2.0 * eps;
                centres += 1;
            }
            let b = ParamBox::new(vec![0.0], vec![w]).unwrap();
            let lc = covering_bound_parametric(&p1, &b, eps, &[g]).unwrap();
            assert!((lc - (centres as f64).ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn holder_examples() {
        let h = |d: f64, s: f64| HolderClassParams {
            smoothness: s,
            dim: d,
            c0: 1.0,
            loss_lipschitz: 1.0,
        };
        assert_eq!(covering_bound_holder(&h(3.0, 2.0), 1.0).unwrap(), 1.0);
        let a = covering_bound_holder(&h(3.0, 2.0), 0.5).unwrap();
        let b = covering_bound_holder(&h(3.0, 2.0), 0.25).unwrap();
        assert!((b / a - 2f64.powf(3.0)).abs() < 1e-12);
        assert!((covering_bound_holder(&h(3.0, 6.0), 0.25).unwrap() - 4.0).abs() < 1e-12);
        assert!(covering_bound_holder(&h(3.0, 6.0), 0.0).is_err());
    }
}
