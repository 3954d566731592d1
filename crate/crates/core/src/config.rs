//! Versioned JSON configuration shared by every subcommand.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::acx::{AcxModelSpec, CovariateSpec, InnovationSpec};
use crate::bounds::{BoundConstants, DependenceParams, ReportOptions};
use crate::erm::{FitConfig, LossKind, LossSpec};
use crate::error::{Error, Result};
use crate::experiments::{desk_grid, ExperimentConfig, OverlayInputs, PredictorSpec};

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub version: u32,
    #[serde(default = "AcxModelSpec::reference_arx")]
    pub model: AcxModelSpec,
    #[serde(default)]
    pub covariate: CovariateSpec,
    #[serde(default)]
    pub innovation: InnovationSpec,
    #[serde(default)]
    pub predictor: PredictorSpec,
    #[serde(default = "default_loss")]
    pub loss: LossSpec,
    #[serde(default)]
    pub dependence: DependenceParams,
    #[serde(default)]
    pub bound_constants: BoundSection,
    #[serde(default)]
    pub experiment: ExperimentSection,
    #[serde(default)]
    pub output: OutputSection,
}

fn default_loss() -> LossSpec {
    LossSpec::new(LossKind::Squared)
}

impl Default for Config {
    fn default() -> Self {
        Config {
            version: CONFIG_VERSION,
            model: AcxModelSpec::reference_arx(),
            covariate: CovariateSpec::default(),
            innovation: InnovationSpec::default(),
            predictor: PredictorSpec::default(),
            loss: default_loss(),
            dependence: DependenceParams::default(),
            bound_constants: BoundSection::default(),
            experiment: ExperimentSection::default(),
            output: OutputSection::default(),
        }
    }
}

/// Covering and loss constants. `m` and `l` fall back to the loss section
/// (which then needs `output_bound`); `d` and `s` fall back to the predictor
/// input width.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoundSection {
    pub m: Option<f64>,
    pub l: Option<f64>,
    pub c0: f64,
    pub d: Option<f64>,
    pub s: Option<f64>,
    pub eps1_form: crate::bounds::Eps1Form,
    pub small_n_threshold: f64,
}

impl Default for BoundSection {
    fn default() -> Self {
        let o = ReportOptions::default();
        BoundSection {
            m: None,
            l: None,
            c0: 1.0,
            d: None,
            s: None,
            eps1_form: o.eps1_form,
            small_n_threshold: o.small_n_threshold,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentSection {
    pub seed: u64,
    pub burn_in: usize,
    pub losses: Vec<LossKind>,
    pub reference_size: usize,
    pub n_grid: Vec<usize>,
    pub replications: usize,
    pub eval_size: Option<usize>,
    /// `0` uses every core.
    pub workers: usize,
    /// Confidence parameter of the bound overlay.
    pub eta: f64,
    pub fit: FitConfig,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        let e = ExperimentConfig::default();
        ExperimentSection {
            seed: e.base_seed,
            burn_in: e.burn_in,
            losses: e.losses,
            reference_size: e.reference_size,
            n_grid: desk_grid(),
            replications: 100,
            eval_size: None,
            workers: 0,
            eta: 0.05,
            fit: FitConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
    pub log_y: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            dir: PathBuf::from("out"),
            log_y: false,
        }
    }
}

impl Config {
    pub fn from_json(text: &str, path: &Path) -> Result<Self> {
        let cfg: Config = serde_json::from_str(text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: e.line(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text, path)
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != CONFIG_VERSION {
            return Err(Error::param(format!(
                "unsupported config version {} (expected {CONFIG_VERSION})",
                self.version
            )));
        }
        self.model.validate(&self.covariate)?;
        self.innovation.validate()?;
        self.dependence.validate()?;
        if !(self.experiment.eta > 0.0 && self.experiment.eta < 1.0) {
            return Err(Error::param("experiment.eta must lie in (0, 1)"));
        }
        if let Some(b) = self.loss.output_bound {
            if !(b > 0.0 && b.is_finite()) {
                return Err(Error::param("loss.output_bound must be positive"));
            }
        }
        Ok(())
    }

    pub fn input_width(&self) -> usize {
        self.predictor.q * (1 + self.covariate.dim)
    }

    /// Constants for the `bound` subcommand.
    pub fn bound_constants(&self) -> Result<BoundConstants> {
        let b = &self.bound_constants;
        let (m, l) = match (b.m, b.l) {
            (Some(m), Some(l)) => (m, l),
            (m, l) => {
                if self.loss.output_bound.is_none() {
                    return Err(Error::param(
                        "bound_constants.m and .l are required unless loss.output_bound is set",
                    ));
                }
                (m.unwrap_or(self.loss.sup()?), l.unwrap_or(self.loss.lipschitz()?))
            }
        };
        let w = self.input_width() as f64;
        let bc = BoundConstants {
            m,
            l,
            c0: b.c0,
            d: b.d.unwrap_or(w),
            s: b.s.unwrap_or(w),
        };
        bc.validate()?;
        Ok(bc)
    }

    pub fn report_options(&self) -> ReportOptions {
        ReportOptions {
            eps1_form: self.bound_constants.eps1_form,
            small_n_threshold: self.bound_constants.small_n_threshold,
        }
    }

    pub fn experiment_config(&self) -> ExperimentConfig {
        let e = &self.experiment;
        ExperimentConfig {
            model: self.model.clone(),
            covariate: self.covariate.clone(),
            innovation: self.innovation.clone(),
            burn_in: e.burn_in,
            predictor: self.predictor.clone(),
            losses: e.losses.clone(),
            output_bound: self.loss.output_bound,
            reference_size: e.reference_size,
            n_grid: e.n_grid.clone(),
            replications: e.replications,
            eval_size: e.eval_size,
            base_seed: e.seed,
            fit: e.fit.clone(),
        }
    }

    pub fn overlay_inputs(&self) -> OverlayInputs {
        OverlayInputs {
            eta: self.experiment.eta,
            dependence: self.dependence.clone(),
            c0: self.bound_constants.c0,
            d: self.bound_constants.d,
            s: self.bound_constants.s,
            options: self.report_options(),
        }
    }
}
