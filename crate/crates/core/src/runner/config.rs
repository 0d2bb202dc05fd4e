//! Experiment configuration files (TOML).

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{LabError, Result};
use crate::models::{make_cev, make_cev_2d, payoff_library, CevSpec, DiffusionModel, Payoff, PayoffParams};
use crate::pde::{FarField, Scheme};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Price,
    Delta,
    Sweep,
    GprimeCheck,
    Margrabe,
    Counterexample,
    Barrier,
    Sharpness,
    McCrosscheck,
    Refine,
    Properties,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Price => "price",
            Self::Delta => "delta",
            Self::Sweep => "sweep",
            Self::GprimeCheck => "gprime-check",
            Self::Margrabe => "margrabe",
            Self::Counterexample => "counterexample",
            Self::Barrier => "barrier",
            Self::Sharpness => "sharpness",
            Self::McCrosscheck => "mc-crosscheck",
            Self::Refine => "refine",
            Self::Properties => "properties",
        }
    }
}

/// One CEV coordinate; `beta` defaults to 2 (GBM).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoordBlock {
    pub sigma: f64,
    #[serde(default = "two")]
    pub beta: f64,
}

fn two() -> f64 {
    2.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelBlock {
    pub sigma: f64,
    #[serde(default = "two")]
    pub beta: f64,
    /// Second coordinate of a diagonal 2D model.
    pub second: Option<CoordBlock>,
}

impl ModelBlock {
    pub fn build(&self) -> Result<DiffusionModel> {
        match self.second {
            None => make_cev(self.sigma, self.beta),
            Some(c) => make_cev_2d(CevSpec::new(self.sigma, self.beta)?, CevSpec::new(c.sigma, c.beta)?),
        }
    }

    /// Lower constant `C` in `a >= C x^beta` of the first coordinate.
    pub fn lower_constant(&self) -> f64 {
        0.5 * self.sigma * self.sigma
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PayoffBlock {
    pub tag: String,
    pub strike: Option<f64>,
    pub gamma: Option<f64>,
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
}

impl PayoffBlock {
    pub fn params(&self) -> PayoffParams {
        PayoffParams { strike: self.strike, gamma: self.gamma, slope: self.slope, intercept: self.intercept }
    }

    pub fn build(&self) -> Result<Payoff> {
        payoff_library(&self.tag, &self.params())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridBlock {
    /// Truncation point; chosen from the strike and volatility when absent.
    pub xmax: Option<f64>,
    pub m: usize,
    #[serde(default = "two")]
    pub p: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeBlock {
    #[serde(rename = "T")]
    pub horizon: f64,
    pub steps: usize,
    #[serde(default = "one")]
    pub theta: f64,
    /// Far field `u_xx = 0` (default) or Dirichlet data from the payoff.
    #[serde(default)]
    pub dirichlet_far_field: bool,
}

fn one() -> f64 {
    1.0
}

impl TimeBlock {
    pub fn scheme(&self) -> Scheme {
        let far_field = if self.dirichlet_far_field { FarField::Payoff } else { FarField::Linear };
        let rannacher_steps = if self.theta < 1.0 { 2 } else { 0 };
        Scheme { theta: self.theta, rannacher_steps, far_field }
    }
}

/// Kind-specific settings; unused fields are ignored by the other kinds.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsBlock {
    /// Evaluation times (default: the horizon).
    #[serde(default)]
    pub times: Vec<f64>,
    /// CEV exponents for sweeps and certificates.
    #[serde(default)]
    pub betas: Vec<f64>,
    /// Volatilities paired with `betas` (mc-crosscheck).
    #[serde(default)]
    pub sigmas: Vec<f64>,
    /// Spot for prices and Monte Carlo.
    pub x0: Option<f64>,
    /// Successive doublings of the grid and time steps.
    pub refinements: Option<usize>,
    /// Largest node used for pointwise error measurement.
    pub eval_max: Option<f64>,
    /// Power exponent whose boundary delta must come out divergent.
    pub divergent_gamma: Option<f64>,
    /// Bound `C` in `a <= C x^2`.
    pub bound: Option<f64>,
    /// Volatility of the CEV `beta = 1` variant of the exchange option.
    pub cev_variant_sigma: Option<f64>,
    pub t0: Option<f64>,
    pub paths: Option<usize>,
    pub mc_steps: Option<usize>,
    /// Sample points per axis (certificates).
    pub density: Option<usize>,
    pub epsilon: Option<f64>,
    pub n_exp: Option<u32>,
    pub eta: Option<f64>,
    pub max_halvings: Option<u32>,
    /// Constant `C` of the supersolution check.
    pub neghopf_c: Option<f64>,
    pub neghopf_epsilon: Option<f64>,
    pub neghopf_n: Option<u32>,
    #[serde(default)]
    pub sharpness: bool,
    /// Payoff tags of the property matrix.
    #[serde(default)]
    pub payoffs: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    /// Report file name inside the output directory (default `<name>.csv`).
    pub output: Option<String>,
    pub model: Option<ModelBlock>,
    pub payoff: Option<PayoffBlock>,
    pub grid: Option<GridBlock>,
    pub time: Option<TimeBlock>,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub params: ParamsBlock,
}

fn config_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(LabError::Config(msg.into()))
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| LabError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// SHA-256 of the canonical serialization, as lowercase hex.
    pub fn digest(&self) -> String {
        let canonical = toml::to_string(self).unwrap_or_default();
        Sha256::digest(canonical.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn output_name(&self) -> String {
        self.output.clone().unwrap_or_else(|| format!("{}.csv", self.name))
    }

    pub fn tol(&self, key: &str) -> Result<f64> {
        self.tolerances.get(key).copied().ok_or_else(|| LabError::Config(format!("missing tolerance `{key}`")))
    }

    pub fn model(&self) -> Result<&ModelBlock> {
        self.model.as_ref().ok_or_else(|| LabError::Config("missing [model] block".into()))
    }

    pub fn payoff(&self) -> Result<&PayoffBlock> {
        self.payoff.as_ref().ok_or_else(|| LabError::Config("missing [payoff] block".into()))
    }

    pub fn grid(&self) -> Result<&GridBlock> {
        self.grid.as_ref().ok_or_else(|| LabError::Config("missing [grid] block".into()))
    }

    pub fn time(&self) -> Result<&TimeBlock> {
        self.time.as_ref().ok_or_else(|| LabError::Config("missing [time] block".into()))
    }

    /// Evaluation times, defaulting to the horizon.
    pub fn times(&self) -> Result<Vec<f64>> {
        if self.params.times.is_empty() {
            Ok(vec![self.time()?.horizon])
        } else {
            Ok(self.params.times.clone())
        }
    }

    fn required(&self) -> (&'static [&'static str], &'static [&'static str]) {
        use ExperimentKind::*;
        match self.kind {
            Price => (&["model", "payoff", "grid", "time"], &["rel_error"]),
            Delta => (&["model", "payoff", "grid", "time"], &[]),
            Sweep => (&["model", "payoff", "grid", "time"], &["margin", "zero"]),
            GprimeCheck => (&["model", "payoff", "grid", "time"], &["delta_error"]),
            Margrabe => (&["model", "payoff", "grid", "time"], &["price_rel", "delta1", "delta2"]),
            Counterexample => (&["grid", "time"], &["before", "after_min", "exact_residual"]),
            Barrier => (&["model"], &["residual"]),
            Sharpness => (&[], &["residual"]),
            McCrosscheck => (&["payoff", "grid", "time"], &["se_multiple"]),
            Refine => (&["model", "payoff", "grid", "time"], &["min_order"]),
            Properties => (&["grid", "time"], &["comparison", "convexity", "monotonicity", "affine"]),
        }
    }

    /// Checks that the blocks and tolerances the kind needs are present and sane.
    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return config_err("name must be a nonempty plain file stem");
        }
        let (blocks, tols) = self.required();
        for b in blocks {
            let present = match *b {
                "model" => self.model.is_some(),
                "payoff" => self.payoff.is_some(),
                "grid" => self.grid.is_some(),
                _ => self.time.is_some(),
            };
            if !present {
                return config_err(format!("kind `{}` needs a [{b}] block", self.kind.as_str()));
            }
        }
        for t in tols {
            self.tol(t)?;
        }
        for (k, v) in &self.tolerances {
            if !(*v > 0.0) || !v.is_finite() {
                return config_err(format!("tolerance `{k}` must be positive, got {v}"));
            }
        }
        if let Some(m) = &self.model {
            m.build().map_err(|e| LabError::Config(format!("model: {e}")))?;
        }
        if let Some(p) = &self.payoff {
            p.build().map_err(|e| LabError::Config(format!("payoff: {e}")))?;
        }
        if let Some(g) = &self.grid {
            if g.m < 3 || g.p < 1.0 || g.xmax.is_some_and(|x| !(x > 0.0)) {
                return config_err("grid needs m >= 3, p >= 1 and xmax > 0");
            }
        }
        if let Some(t) = &self.time {
            if !(t.horizon > 0.0) || t.steps == 0 || !(0.5..=1.0).contains(&t.theta) {
                return config_err("time needs T > 0, steps >= 1 and theta in [1/2, 1]");
            }
        }
        if self.kind == ExperimentKind::McCrosscheck && self.params.betas.len() != self.params.sigmas.len() {
            return config_err("mc-crosscheck needs `betas` and `sigmas` of equal length");
        }
        Ok(())
    }
}
