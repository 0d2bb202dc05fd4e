//! Diffusion coefficients, contract functions and the structural checks
//! the boundary results rely on.
//!
//! A model is diagonal: coordinate `i` carries its own volatility
//! `alpha_i(x_i, t)` and the diffusion matrix is `a_ii = alpha_i^2 / 2`.

use std::fmt;
use std::sync::Arc;

use crate::error::{param, LabError, Result};

/// Coefficient `f(x, t)` of one spatial coordinate.
pub type CoefFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Coefficient `f(x, t)` depending on the full spatial point.
pub type PointFn = Arc<dyn Fn(&[f64], f64) -> f64 + Send + Sync>;

/// Constant-elasticity volatility `alpha(x) = sigma * x^(beta/2)`, absorbed at zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CevSpec {
    pub sigma: f64,
    pub beta: f64,
}

impl CevSpec {
    pub fn new(sigma: f64, beta: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return param(format!("sigma must be positive, got {sigma}"));
        }
        if !(0.0..=2.0).contains(&beta) {
            return param(format!("beta must lie in [0, 2], got {beta}"));
        }
        Ok(Self { sigma, beta })
    }

    /// Zero at `x = 0` for every `beta`, including `beta = 0` where the
    /// coefficient jumps at the boundary.
    #[inline]
    pub fn alpha(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else if self.beta == 2.0 {
            self.sigma * x
        } else {
            self.sigma * x.powf(0.5 * self.beta)
        }
    }

    #[inline]
    pub fn diffusion(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else if self.beta == 2.0 {
            0.5 * self.sigma * self.sigma * x * x
        } else {
            0.5 * self.sigma * self.sigma * x.powf(self.beta)
        }
    }

    /// Lower-bound constant in `a >= C x^beta`.
    pub fn lower_constant(&self) -> f64 {
        0.5 * self.sigma * self.sigma
    }
}

/// Piecewise-linear, time-independent volatility table. Held flat beyond
/// the last abscissa.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientTable {
    xs: Vec<f64>,
    alphas: Vec<f64>,
}

impl CoefficientTable {
    pub fn new(xs: Vec<f64>, alphas: Vec<f64>) -> Result<Self> {
        if xs.len() < 2 || xs.len() != alphas.len() {
            return param("coefficient table needs >= 2 (x, alpha) pairs of equal length");
        }
        if xs[0] != 0.0 {
            return param("coefficient table must start at x = 0");
        }
        if xs.windows(2).any(|w| w[1] <= w[0]) {
            return param("coefficient table abscissae must be strictly increasing");
        }
        if alphas.iter().any(|a| !a.is_finite() || *a < 0.0) {
            return param("coefficient table values must be finite and non-negative");
        }
        Ok(Self { xs, alphas })
    }

    pub fn alpha(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.alphas[0];
        }
        if x >= self.xs[n - 1] {
            return self.alphas[n - 1];
        }
        let k = self.xs.partition_point(|&xi| xi <= x) - 1;
        let w = (x - self.xs[k]) / (self.xs[k + 1] - self.xs[k]);
        self.alphas[k] * (1.0 - w) + self.alphas[k + 1] * w
    }

    /// Smallest `C` with `alpha(x) <= C (1 + x)`; the ratio is monotone on
    /// each linear piece, so the maximum sits at a table node.
    pub fn growth_constant(&self) -> f64 {
        self.xs
            .iter()
            .zip(&self.alphas)
            .map(|(x, a)| a / (1.0 + x))
            .fold(0.0, f64::max)
    }
}

#[derive(Clone)]
pub enum Volatility {
    Cev(CevSpec),
    Table(CoefficientTable),
    /// Arbitrary `alpha(x, t)`.
    Custom { name: String, alpha: CoefFn },
    /// Given through the diffusion coefficient `a(x, t)` itself; `alpha = sqrt(2a)`.
    Diffusion { name: String, a: CoefFn },
}

impl Volatility {
    pub fn alpha(&self, x: f64, t: f64) -> f64 {
        match self {
            Volatility::Cev(c) => c.alpha(x),
            Volatility::Table(tab) => tab.alpha(x),
            Volatility::Custom { alpha, .. } => alpha(x, t),
            Volatility::Diffusion { a, .. } => (2.0 * a(x, t)).max(0.0).sqrt(),
        }
    }

    pub fn diffusion(&self, x: f64, t: f64) -> f64 {
        match self {
            Volatility::Cev(c) => c.diffusion(x),
            Volatility::Diffusion { a, .. } => a(x, t),
            other => {
                let al = other.alpha(x, t);
                0.5 * al * al
            }
        }
    }

    pub fn name(&self) -> String {
        match self {
            Volatility::Cev(c) if c.beta == 2.0 => format!("gbm(sigma={})", c.sigma),
            Volatility::Cev(c) => format!("cev(sigma={}, beta={})", c.sigma, c.beta),
            Volatility::Table(_) => "table".to_string(),
            Volatility::Custom { name, .. } | Volatility::Diffusion { name, .. } => name.clone(),
        }
    }

    /// Time-independent coefficients let the solvers assemble once.
    pub fn is_autonomous(&self) -> bool {
        matches!(self, Volatility::Cev(_) | Volatility::Table(_))
    }
}

impl fmt::Debug for Volatility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Volatility({})", self.name())
    }
}

/// Diagonal diffusion model in one or two dimensions.
#[derive(Clone, Debug)]
pub struct DiffusionModel {
    coords: Vec<Volatility>,
    growth_constant: f64,
}

impl DiffusionModel {
    pub fn new(coords: Vec<Volatility>, growth_constant: f64) -> Result<Self> {
        if coords.is_empty() || coords.len() > 2 {
            return param(format!("only 1D and 2D models are supported, got n = {}", coords.len()));
        }
        if !(growth_constant.is_finite() && growth_constant > 0.0) {
            return param(format!("growth constant must be positive, got {growth_constant}"));
        }
        Ok(Self { coords, growth_constant })
    }

    pub fn one_d(vol: Volatility, growth_constant: f64) -> Result<Self> {
        Self::new(vec![vol], growth_constant)
    }

    pub fn diagonal_2d(first: Volatility, second: Volatility, growth_constant: f64) -> Result<Self> {
        Self::new(vec![first, second], growth_constant)
    }

    /// 1D model from the diffusion coefficient `a(x, t)` directly.
    pub fn from_diffusion(
        name: impl Into<String>,
        a: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        growth_constant: f64,
    ) -> Result<Self> {
        Self::one_d(Volatility::Diffusion { name: name.into(), a: Arc::new(a) }, growth_constant)
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coordinate(&self, i: usize) -> &Volatility {
        &self.coords[i]
    }

    pub fn coordinates(&self) -> &[Volatility] {
        &self.coords
    }

    pub fn growth_constant(&self) -> f64 {
        self.growth_constant
    }

    pub fn alpha(&self, i: usize, x: f64, t: f64) -> f64 {
        self.coords[i].alpha(x, t)
    }

    /// Diagonal entry `a_ii(x_i, t)`.
    pub fn a(&self, i: usize, x: f64, t: f64) -> f64 {
        self.coords[i].diffusion(x, t)
    }

    pub fn cev(&self, i: usize) -> Option<CevSpec> {
        match &self.coords[i] {
            Volatility::Cev(c) => Some(*c),
            _ => None,
        }
    }

    /// Restriction of a 2D model to one coordinate.
    pub fn marginal(&self, i: usize) -> DiffusionModel {
        DiffusionModel { coords: vec![self.coords[i].clone()], growth_constant: self.growth_constant }
    }

    pub fn name(&self) -> String {
        self.coords.iter().map(Volatility::name).collect::<Vec<_>>().join(" x ")
    }
}

/// 1D CEV model `dX = sigma X^(beta/2) dW`, growth constant `sigma`.
pub fn make_cev(sigma: f64, beta: f64) -> Result<DiffusionModel> {
    let spec = CevSpec::new(sigma, beta)?;
    DiffusionModel::one_d(Volatility::Cev(spec), sigma)
}

pub fn gbm(sigma: f64) -> Result<DiffusionModel> {
    make_cev(sigma, 2.0)
}

/// Two independent CEV coordinates.
pub fn make_cev_2d(first: CevSpec, second: CevSpec) -> Result<DiffusionModel> {
    DiffusionModel::diagonal_2d(
        Volatility::Cev(first),
        Volatility::Cev(second),
        first.sigma.max(second.sigma),
    )
}

// ---------------------------------------------------------------------------
// Hypothesis validation
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct SampleGrid {
    pub xs: Vec<f64>,
    pub ts: Vec<f64>,
}

impl SampleGrid {
    pub fn new(xs: Vec<f64>, ts: Vec<f64>) -> Result<Self> {
        if xs.is_empty() || ts.is_empty() {
            return param("sample grid must be nonempty");
        }
        if xs.iter().chain(&ts).any(|v| !v.is_finite() || *v < 0.0) {
            return param("sample coordinates must be finite and >= 0");
        }
        Ok(Self { xs, ts })
    }

    /// `0` plus a geometric ladder on `[1e-6 xmax, xmax]`, crossed with `{0, T/2, T}`.
    pub fn default_for(xmax: f64, horizon: f64) -> Self {
        let mut xs = vec![0.0];
        let n = 40;
        let lo = (xmax * 1e-6).ln();
        let hi = xmax.ln();
        xs.extend((0..n).map(|k| (lo + (hi - lo) * k as f64 / (n - 1) as f64).exp()));
        Self { xs, ts: vec![0.0, 0.5 * horizon, horizon] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Condition {
    /// Finite values and `|alpha| <= C (1 + |x|)`.
    Growth,
    /// `alpha_i(0, t) = 0`.
    Absorption,
    /// Rank equals the number of non-zero coordinates.
    Rank,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Offender {
    pub coordinate: usize,
    pub x: f64,
    pub t: f64,
    pub value: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionCheck {
    pub condition: Condition,
    pub passed: bool,
    pub worst: Option<Offender>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisReport {
    pub checks: Vec<ConditionCheck>,
    pub samples: usize,
}

impl HypothesisReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, condition: Condition) -> &ConditionCheck {
        self.checks.iter().find(|c| c.condition == condition).expect("all conditions are checked")
    }
}

pub fn validate_hypothesis(model: &DiffusionModel, grid: &SampleGrid) -> HypothesisReport {
    let c = model.growth_constant();
    let mut growth: Option<Offender> = None;
    let mut growth_excess = 0.0;
    let mut absorption: Option<Offender> = None;
    let mut rank: Option<Offender> = None;
    let mut samples = 0;

    for i in 0..model.dim() {
        for &t in &grid.ts {
            for &x in &grid.xs {
                samples += 1;
                let al = model.alpha(i, x, t);
                let bound = c * (1.0 + x.abs());
                let excess = if al.is_finite() { al.abs() - bound } else { f64::INFINITY };
                if excess > growth_excess {
                    growth_excess = excess;
                    growth = Some(Offender { coordinate: i, x, t, value: al, bound });
                }
                if x == 0.0 && al != 0.0 && absorption.is_none_or(|o| al.abs() > o.value.abs()) {
                    absorption = Some(Offender { coordinate: i, x, t, value: al, bound: 0.0 });
                }
                // Diagonal: the rank condition reduces to alpha_ii != 0 off the face.
                if x > 0.0 && al == 0.0 && rank.is_none() {
                    rank = Some(Offender { coordinate: i, x, t, value: al, bound: 0.0 });
                }
            }
        }
    }

    let entry = |condition, worst: Option<Offender>| ConditionCheck { condition, passed: worst.is_none(), worst };
    HypothesisReport {
        checks: vec![
            entry(Condition::Growth, growth),
            entry(Condition::Absorption, absorption),
            entry(Condition::Rank, rank),
        ],
        samples,
    }
}

// ---------------------------------------------------------------------------
// Payoffs
// ---------------------------------------------------------------------------

#[derive(Clone)]
pub enum PayoffKind {
    Call { strike: f64 },
    Power { gamma: f64 },
    Affine { slope: f64, intercept: f64 },
    /// `slope * x + (x - strike)^+`.
    CallPlusAffine { strike: f64, slope: f64 },
    /// `(x2 - x1)^+`.
    Exchange,
    /// `max(x1, x2)`.
    Max,
    /// `(x1 + x2 - strike)^+`.
    BasketCall { strike: f64 },
    Custom(PointPayoff),
}

pub type PointPayoff = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

#[derive(Clone)]
pub struct Payoff {
    pub name: String,
    pub dim: usize,
    pub kind: PayoffKind,
    pub growth_degree: f64,
    pub is_convex: bool,
    /// `g'(0+)`, 1D only; `None` where it does not exist or is unknown.
    pub gprime0: Option<f64>,
}

impl fmt::Debug for Payoff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Payoff")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("growth_degree", &self.growth_degree)
            .field("is_convex", &self.is_convex)
            .field("gprime0", &self.gprime0)
            .finish()
    }
}

impl Payoff {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match &self.kind {
            PayoffKind::Call { strike } => (x[0] - strike).max(0.0),
            PayoffKind::Power { gamma } => {
                if x[0] <= 0.0 {
                    0.0
                } else {
                    x[0].powf(*gamma)
                }
            }
            PayoffKind::Affine { slope, intercept } => slope * x[0] + intercept,
            PayoffKind::CallPlusAffine { strike, slope } => slope * x[0] + (x[0] - strike).max(0.0),
            PayoffKind::Exchange => (x[1] - x[0]).max(0.0),
            PayoffKind::Max => x[0].max(x[1]),
            PayoffKind::BasketCall { strike } => (x[0] + x[1] - strike).max(0.0),
            PayoffKind::Custom(g) => g(x),
        }
    }

    #[inline]
    pub fn eval1(&self, x: f64) -> f64 {
        self.eval(&[x])
    }

    pub fn custom(
        name: impl Into<String>,
        dim: usize,
        growth_degree: f64,
        is_convex: bool,
        gprime0: Option<f64>,
        g: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Payoff {
        Payoff {
            name: name.into(),
            dim,
            kind: PayoffKind::Custom(Arc::new(g)),
            growth_degree,
            is_convex,
            gprime0,
        }
    }

    /// 1D payoff seen on the face `x_axis = 0` of a 2D payoff.
    pub fn restrict_to_face(&self, axis: usize) -> Payoff {
        assert_eq!(self.dim, 2, "face restriction needs a 2D payoff");
        let me = self.clone();
        let g = move |x: &[f64]| {
            let p = if axis == 0 { [0.0, x[0]] } else { [x[0], 0.0] };
            me.eval(&p)
        };
        Payoff::custom(
            format!("{}|x{}=0", self.name, axis + 1),
            1,
            self.growth_degree,
            self.is_convex,
            None,
            g,
        )
    }

    /// Kinks of the payoff along one coordinate, used to snap grid nodes.
    pub fn kink(&self) -> Option<f64> {
        match self.kind {
            PayoffKind::Call { strike }
            | PayoffKind::CallPlusAffine { strike, .. }
            | PayoffKind::BasketCall { strike } => Some(strike),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PayoffParams {
    pub strike: Option<f64>,
    pub gamma: Option<f64>,
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
}

impl PayoffParams {
    pub fn strike(k: f64) -> Self {
        Self { strike: Some(k), ..Self::default() }
    }

    pub fn gamma(g: f64) -> Self {
        Self { gamma: Some(g), ..Self::default() }
    }
}

fn positive(v: Option<f64>, what: &str, tag: &str) -> Result<f64> {
    match v {
        Some(v) if v.is_finite() && v > 0.0 => Ok(v),
        Some(v) => param(format!("{tag}: {what} must be positive, got {v}")),
        None => param(format!("{tag}: missing {what}")),
    }
}

/// Named contract functions used throughout the experiments.
pub fn payoff_library(tag: &str, p: &PayoffParams) -> Result<Payoff> {
    let make = |name: String, dim, kind, growth_degree, is_convex, gprime0| Payoff {
        name,
        dim,
        kind,
        growth_degree,
        is_convex,
        gprime0,
    };
    Ok(match tag {
        "call" => {
            let strike = positive(p.strike, "strike", tag)?;
            make(format!("call(K={strike})"), 1, PayoffKind::Call { strike }, 1.0, true, Some(0.0))
        }
        "power" => {
            let gamma = positive(p.gamma, "gamma", tag)?;
            let gprime0 = if gamma > 1.0 {
                Some(0.0)
            } else if gamma == 1.0 {
                Some(1.0)
            } else {
                None
            };
            make(format!("power(gamma={gamma})"), 1, PayoffKind::Power { gamma }, gamma, gamma >= 1.0, gprime0)
        }
        "affine" => {
            let slope = p.slope.unwrap_or(1.0);
            let intercept = p.intercept.unwrap_or(0.0);
            make(
                format!("affine({slope}x+{intercept})"),
                1,
                PayoffKind::Affine { slope, intercept },
                1.0,
                true,
                Some(slope),
            )
        }
        "call-plus-affine" => {
            let strike = positive(p.strike, "strike", tag)?;
            let slope = p.slope.unwrap_or(1.0);
            make(
                format!("{slope}x+call(K={strike})"),
                1,
                PayoffKind::CallPlusAffine { strike, slope },
                1.0,
                true,
                Some(slope),
            )
        }
        "exchange" => make("exchange".into(), 2, PayoffKind::Exchange, 1.0, true, None),
        "max" => make("max".into(), 2, PayoffKind::Max, 1.0, true, None),
        "basket-call" => {
            let strike = positive(p.strike, "strike", tag)?;
            make(format!("basket-call(K={strike})"), 2, PayoffKind::BasketCall { strike }, 1.0, true, None)
        }
        other => return Err(LabError::UnknownPayoff(other.to_string())),
    })
}

// ---------------------------------------------------------------------------
// Lower-order terms
// ---------------------------------------------------------------------------

/// Drift and zeroth-order coefficients of `sum a u_xx + sum b_i u_xi + c u - u_t`,
/// together with the bounds they claim to satisfy near `x1 = 0`:
/// `b_1 >= -C x1^(beta-1+delta)`, `|b_i| <= C x1^(beta-2+delta)`, `c >= -C x1^(beta-2+delta)`.
#[derive(Clone)]
pub struct LowerOrderTerms {
    pub drift: Vec<PointFn>,
    pub zeroth: PointFn,
    pub bound_constant: f64,
    pub bound_delta: f64,
    pub beta: f64,
}

impl fmt::Debug for LowerOrderTerms {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LowerOrderTerms")
            .field("n", &self.drift.len())
            .field("bound_constant", &self.bound_constant)
            .field("bound_delta", &self.bound_delta)
            .field("beta", &self.beta)
            .finish()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundViolation {
    /// `0` for `b_1`, `i` for `b_{i+1}`, `usize::MAX` for `c`.
    pub term: usize,
    pub x: f64,
    pub t: f64,
    pub value: f64,
    pub bound: f64,
}

impl LowerOrderTerms {
    pub fn one_d(
        drift: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        zeroth: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        bound_constant: f64,
        bound_delta: f64,
        beta: f64,
    ) -> Self {
        Self {
            drift: vec![Arc::new(move |x: &[f64], t| drift(x[0], t))],
            zeroth: Arc::new(move |x: &[f64], t| zeroth(x[0], t)),
            bound_constant,
            bound_delta,
            beta,
        }
    }

    pub fn b(&self, i: usize, x: &[f64], t: f64) -> f64 {
        (self.drift[i])(x, t)
    }

    pub fn c(&self, x: &[f64], t: f64) -> f64 {
        (self.zeroth)(x, t)
    }

    /// Checks the declared bounds at sampled points (`x[0] > 0`). Returns
    /// every violation found.
    pub fn check_bounds(&self, points: &[Vec<f64>], times: &[f64]) -> Vec<BoundViolation> {
        let (cc, d, beta) = (self.bound_constant, self.bound_delta, self.beta);
        let mut out = Vec::new();
        for x in points.iter().filter(|x| x[0] > 0.0) {
            let x1 = x[0];
            for &t in times {
                let b1 = self.b(0, x, t);
                let lb = -cc * x1.powf(beta - 1.0 + d);
                if b1 < lb {
                    out.push(BoundViolation { term: 0, x: x1, t, value: b1, bound: lb });
                }
                let ub = cc * x1.powf(beta - 2.0 + d);
                for i in 1..self.drift.len() {
                    let bi = self.b(i, x, t);
                    if bi.abs() > ub {
                        out.push(BoundViolation { term: i, x: x1, t, value: bi, bound: ub });
                    }
                }
                let c = self.c(x, t);
                if c < -ub {
                    out.push(BoundViolation { term: usize::MAX, x: x1, t, value: c, bound: -ub });
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cev_diffusion_values() {
        let m = make_cev(1.0, 2.0).unwrap();
        assert_eq!(m.a(0, 2.0, 0.3), 2.0);
        let m = make_cev(2.0, 1.0).unwrap();
        assert_eq!(m.a(0, 0.0, 0.3), 0.0);
        assert_eq!(m.a(0, 1.0, 0.3), 2.0);
        assert_eq!(m.alpha(0, 0.0, 1.0), 0.0);
    }

    #[test]
    fn cev_rejects_bad_parameters() {
        assert!(make_cev(1.0, 2.5).is_err());
        assert!(make_cev(1.0, -0.1).is_err());
        assert!(make_cev(0.0, 1.0).is_err());
        assert!(make_cev(-1.0, 1.0).is_err());
    }

    #[test]
    fn cev_is_absorbed_even_for_beta_zero() {
        let m = make_cev(1.5, 0.0).unwrap();
        assert_eq!(m.alpha(0, 0.0, 0.0), 0.0);
        assert_eq!(m.alpha(0, 1e-9, 0.0), 1.5);
    }

    #[test]
    fn hypothesis_passes_for_cev() {
        let m = make_cev(1.0, 1.0).unwrap();
        let grid = SampleGrid::new(vec![0.0, 0.5, 1.0, 10.0], vec![0.0, 1.0]).unwrap();
        let rep = validate_hypothesis(&m, &grid);
        assert!(rep.passed(), "{rep:?}");
        assert_eq!(rep.samples, 8);
    }

    #[test]
    fn quadratic_volatility_breaks_growth() {
        let vol = Volatility::Custom { name: "x^2".into(), alpha: Arc::new(|x, _| x * x) };
        let m = DiffusionModel::one_d(vol, 5.0).unwrap();
        let grid = SampleGrid::new(vec![0.0, 0.5, 1.0, 10.0], vec![0.0, 1.0]).unwrap();
        let rep = validate_hypothesis(&m, &grid);
        let g = rep.check(Condition::Growth);
        assert!(!g.passed);
        let w = g.worst.unwrap();
        assert_eq!(w.x, 10.0);
        assert_eq!(w.value, 100.0);
        assert!(rep.check(Condition::Absorption).passed);
    }

    #[test]
    fn nonzero_boundary_volatility_breaks_absorption() {
        let vol = Volatility::Custom { name: "one".into(), alpha: Arc::new(|_, _| 1.0) };
        let m = DiffusionModel::one_d(vol, 1.0).unwrap();
        let grid = SampleGrid::new(vec![0.0, 1.0], vec![0.0]).unwrap();
        let rep = validate_hypothesis(&m, &grid);
        let a = rep.check(Condition::Absorption);
        assert!(!a.passed);
        assert_eq!(a.worst.unwrap().x, 0.0);
        assert!(rep.check(Condition::Growth).passed);
    }

    #[test]
    fn vanishing_interior_volatility_breaks_rank() {
        let vol = Volatility::Custom {
            name: "gap".into(),
            alpha: Arc::new(|x, _| if (1.0..2.0).contains(&x) { 0.0 } else { x }),
        };
        let m = DiffusionModel::one_d(vol, 1.0).unwrap();
        let grid = SampleGrid::new(vec![0.0, 0.5, 1.5, 3.0], vec![0.0]).unwrap();
        let rep = validate_hypothesis(&m, &grid);
        assert!(!rep.check(Condition::Rank).passed);
    }

    #[test]
    fn payoff_library_examples() {
        let call = payoff_library("call", &PayoffParams::strike(1.0)).unwrap();
        assert_eq!(call.eval1(1.5), 0.5);
        assert!(call.is_convex);
        assert_eq!(call.gprime0, Some(0.0));

        let pw = payoff_library("power", &PayoffParams::gamma(2.0)).unwrap();
        assert_eq!(pw.eval1(3.0), 9.0);
        assert!(pw.is_convex);
        assert_eq!(pw.gprime0, Some(0.0));
        assert_eq!(payoff_library("power", &PayoffParams::gamma(1.0)).unwrap().gprime0, Some(1.0));
        let root = payoff_library("power", &PayoffParams::gamma(0.5)).unwrap();
        assert_eq!(root.gprime0, None);
        assert!(!root.is_convex);

        let ex = payoff_library("exchange", &PayoffParams::default()).unwrap();
        assert_eq!(ex.eval(&[1.0, 3.0]), 2.0);
        let mx = payoff_library("max", &PayoffParams::default()).unwrap();
        assert_eq!(mx.eval(&[1.0, 3.0]), 3.0);
    }

    #[test]
    fn payoff_library_errors() {
        assert!(matches!(payoff_library("digital", &PayoffParams::default()), Err(LabError::UnknownPayoff(_))));
        assert!(payoff_library("call", &PayoffParams::default()).is_err());
        assert!(payoff_library("call", &PayoffParams::strike(-1.0)).is_err());
        assert!(payoff_library("power", &PayoffParams::gamma(0.0)).is_err());
    }

    #[test]
    fn exchange_plus_affine_is_max() {
        let ex = payoff_library("exchange", &PayoffParams::default()).unwrap();
        let mx = payoff_library("max", &PayoffParams::default()).unwrap();
        for &(a, b) in &[(0.0, 1.0), (2.0, 0.5), (1.0, 1.0), (3.2, 7.1)] {
            assert_eq!(ex.eval(&[a, b]) + a, mx.eval(&[a, b]));
        }
    }

    #[test]
    fn face_restriction() {
        let ex = payoff_library("exchange", &PayoffParams::default()).unwrap();
        let f1 = ex.restrict_to_face(0);
        let f2 = ex.restrict_to_face(1);
        assert_eq!(f1.eval1(2.5), 2.5);
        assert_eq!(f2.eval1(2.5), 0.0);
    }

    #[test]
    fn table_interpolates_and_bounds_growth() {
        let tab = CoefficientTable::new(vec![0.0, 1.0, 3.0], vec![0.0, 1.0, 2.0]).unwrap();
        assert_eq!(tab.alpha(0.5), 0.5);
        assert_eq!(tab.alpha(2.0), 1.5);
        assert_eq!(tab.alpha(10.0), 2.0);
        assert_eq!(tab.growth_constant(), 0.5);
        assert!(CoefficientTable::new(vec![0.5, 1.0], vec![0.0, 1.0]).is_err());
    }

    #[test]
    fn sharpness_drift_violates_declared_bound() {
        let beta = 1.0;
        let terms = LowerOrderTerms::one_d(move |x, _| -x.powf(beta - 1.0), |_, _| 0.0, 1.0, 0.5, beta);
        let pts: Vec<Vec<f64>> = [1e-6, 1e-3, 0.5].iter().map(|&x| vec![x]).collect();
        let v = terms.check_bounds(&pts, &[0.5]);
        assert!(v.iter().any(|b| b.term == 0 && b.x == 1e-6));
    }
}
