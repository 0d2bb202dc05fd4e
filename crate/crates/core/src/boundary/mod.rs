//! Boundary delta `u_x(0, t)`: one-sided difference quotients at shrinking
//! spacings, polynomial extrapolation to zero spacing, and a ratio test for
//! divergence.

mod patched;

pub use patched::{
    build_patched_counterexample, build_patched_with, check_transition, gauss_legendre, smooth_step, BumpTransition, PatchedExample, Transition,
};

use rayon::prelude::*;

use crate::error::{param, LabError, Result};
use crate::models::{make_cev, DiffusionModel, Payoff};
use crate::pde::{solve_1d, Grid1D, Scheme, Solution1D, TimeGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Finite,
    Divergent,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaOptions {
    /// Number of spacings; on a grid these are the nodes `1, 2, 4, ...`.
    pub levels: usize,
    /// Largest admissible spacing.
    pub probe: f64,
    /// Polynomial degree of the extrapolation (uses `order + 1` finest quotients).
    pub order: usize,
    /// Successive quotient growth above this ratio counts toward divergence.
    pub divergence_ratio: f64,
    /// Quotients below this magnitude never count as growing.
    pub floor: f64,
}

impl Default for DeltaOptions {
    fn default() -> Self {
        Self { levels: 6, probe: 0.1, order: 2, divergence_ratio: 1.5, floor: 1e-12 }
    }
}

/// Minimum number of spacings inside the probe window.
pub const MIN_LEVELS: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct DeltaEstimate {
    pub value: f64,
    /// Spacings, coarse to fine.
    pub spacings: Vec<f64>,
    pub quotients: Vec<f64>,
    pub order: usize,
    /// Difference between the extrapolations of degree `order` and `order - 1`.
    pub residual: f64,
    pub verdict: Verdict,
}

/// Value at 0 of the polynomial through `(xs, ys)` (Neville).
fn neville_at_zero(xs: &[f64], ys: &[f64]) -> f64 {
    let mut p = ys.to_vec();
    let n = xs.len();
    for level in 1..n {
        for i in 0..n - level {
            let (xi, xj) = (xs[i], xs[i + level]);
            p[i] = (xj * p[i] - xi * p[i + 1]) / (xj - xi);
        }
    }
    p[0]
}

fn analyze(spacings: Vec<f64>, quotients: Vec<f64>, opts: &DeltaOptions) -> Result<DeltaEstimate> {
    let n = spacings.len();
    if n < MIN_LEVELS {
        return Err(LabError::Resolution(format!(
            "only {n} spacings inside (0, {}]; need at least {MIN_LEVELS}",
            opts.probe
        )));
    }
    let growing = quotients[n - 4..]
        .windows(2)
        .all(|w| w[1].abs() > opts.floor && w[1].abs() > opts.divergence_ratio * w[0].abs());
    if growing {
        return Ok(DeltaEstimate {
            value: quotients[n - 1],
            spacings,
            quotients,
            order: 0,
            residual: f64::INFINITY,
            verdict: Verdict::Divergent,
        });
    }
    let order = opts.order.min(n - 1).max(1);
    let hi = neville_at_zero(&spacings[n - order - 1..], &quotients[n - order - 1..]);
    let lo = neville_at_zero(&spacings[n - order..], &quotients[n - order..]);
    Ok(DeltaEstimate { value: hi, spacings, quotients, order, residual: (hi - lo).abs(), verdict: Verdict::Finite })
}

/// Boundary delta of a grid solution at the time level `t`.
pub fn boundary_delta(sol: &Solution1D, t: f64, opts: &DeltaOptions) -> Result<DeltaEstimate> {
    let row = sol
        .at_time(t)
        .ok_or_else(|| LabError::Parameter(format!("t = {t} is not a time level of the solution")))?;
    boundary_delta_on_nodes(sol.grid.nodes(), row, opts)
}

/// Boundary delta of values `row` given at `nodes` (with `nodes[0] = 0`).
pub fn boundary_delta_on_nodes(nodes: &[f64], row: &[f64], opts: &DeltaOptions) -> Result<DeltaEstimate> {
    if nodes.len() != row.len() || nodes.first() != Some(&0.0) {
        return param("values must match the nodes and the first node must be 0");
    }
    let mut idx: Vec<usize> = (0..opts.levels)
        .map(|k| 1usize << k)
        .filter(|&i| i < nodes.len() && nodes[i] <= opts.probe)
        .collect();
    idx.reverse();
    let spacings: Vec<f64> = idx.iter().map(|&i| nodes[i]).collect();
    let quotients = idx.iter().map(|&i| (row[i] - row[0]) / nodes[i]).collect();
    analyze(spacings, quotients, opts)
}

/// Boundary delta of a closed-form `x -> u(x, t)`, spacings `probe * 4^-k`.
pub fn boundary_delta_fn(f: impl Fn(f64) -> f64, opts: &DeltaOptions) -> Result<DeltaEstimate> {
    let u0 = f(0.0);
    let spacings: Vec<f64> = (0..opts.levels).map(|k| opts.probe * 0.25f64.powi(k as i32)).collect();
    let quotients = spacings.iter().map(|&e| (f(e) - u0) / e).collect();
    analyze(spacings, quotients, opts)
}

/// Truncation point covering the strike and six local standard deviations.
pub fn suggested_xmax(strike: f64, sigma: f64, beta: f64, horizon: f64) -> f64 {
    (4.0 * strike).max(strike + 6.0 * sigma * strike.powf(0.5 * beta) * horizon.sqrt())
}

/// Resolution used by the sweep and delta experiments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resolution {
    pub m: usize,
    pub steps: usize,
    pub grading: f64,
}

impl Default for Resolution {
    fn default() -> Self {
        Self { m: 801, steps: 400, grading: 2.0 }
    }
}

/// Grid anchored at the payoff kink (if any) and a uniform time grid on `[0, t]`.
pub fn standard_grids(payoff: &Payoff, xmax: f64, t: f64, res: Resolution) -> Result<(Grid1D, TimeGrid)> {
    let grid = match payoff.kink() {
        Some(k) => Grid1D::with_node_at(xmax, res.m, res.grading, k)?,
        None => crate::pde::build_grid(xmax, res.m, res.grading)?,
    };
    Ok((grid, TimeGrid::uniform(t, res.steps)?))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub beta: f64,
    pub estimate: DeltaEstimate,
}

/// Boundary delta at time `t` for CEV models with the given exponents.
pub fn hopf_sweep(betas: &[f64], sigma: f64, payoff: &Payoff, t: f64, res: Resolution) -> Result<Vec<SweepRow>> {
    if betas.iter().any(|b| !(0.0..=2.0).contains(b)) {
        return param("sweep exponents must lie in [0, 2]");
    }
    let strike = payoff.kink().unwrap_or(1.0);
    betas
        .par_iter()
        .map(|&beta| {
            let model = make_cev(sigma, beta)?;
            let (grid, tg) = standard_grids(payoff, suggested_xmax(strike, sigma, beta, t), t, res)?;
            let sol = solve_1d(&model, payoff, &grid, &tg, Scheme::implicit())?;
            Ok(SweepRow { beta, estimate: boundary_delta(&sol, t, &DeltaOptions::default())? })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct GprimeRow {
    pub t: f64,
    pub estimate: DeltaEstimate,
    pub error: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GprimeReport {
    pub gprime0: f64,
    pub rows: Vec<GprimeRow>,
}

impl GprimeReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.passed)
    }
}

/// Checks `u_x(0, t) = g'(0)` for a model with `a <= bound x^2`. The bound is
/// sampled on the grid nodes at every time level first.
pub fn check_gprime_match(
    model: &DiffusionModel,
    bound: f64,
    payoff: &Payoff,
    grid: &Grid1D,
    tgrid: &TimeGrid,
    times: &[f64],
    tol: f64,
) -> Result<GprimeReport> {
    let gprime0 = payoff
        .gprime0
        .ok_or_else(|| LabError::Parameter(format!("payoff {} has no g'(0)", payoff.name)))?;
    for &t in tgrid.times() {
        for &x in grid.nodes() {
            let a = model.a(0, x, t);
            if a > bound * x * x * (1.0 + 1e-12) {
                return Err(LabError::ModelBound(format!("a({x}, {t}) = {a} exceeds {bound} x^2")));
            }
        }
    }
    let sol = solve_1d(model, payoff, grid, tgrid, Scheme::implicit())?;
    let rows = times
        .iter()
        .map(|&t| {
            let estimate = boundary_delta(&sol, t, &DeltaOptions::default())?;
            let error = (estimate.value - gprime0).abs();
            Ok(GprimeRow { t, passed: estimate.verdict == Verdict::Finite && error <= tol, error, estimate })
        })
        .collect::<Result<_>>()?;
    Ok(GprimeReport { gprime0, rows })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jump {
    pub t_before: f64,
    pub t_after: f64,
    /// Signed change of the delta.
    pub size: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeltaCurve {
    pub times: Vec<f64>,
    pub estimates: Vec<DeltaEstimate>,
    /// Largest decrease between consecutive times (0 when nondecreasing).
    pub max_decrease: f64,
    pub jumps: Vec<Jump>,
}

impl DeltaCurve {
    pub fn values(&self) -> Vec<f64> {
        self.estimates.iter().map(|e| e.value).collect()
    }

    /// No jump goes downward.
    pub fn upward_only(&self) -> bool {
        self.jumps.iter().all(|j| j.size > 0.0)
    }

    pub fn value_at(&self, t: f64) -> Option<f64> {
        self.times.iter().position(|&s| (s - t).abs() <= 1e-10).map(|k| self.estimates[k].value)
    }

    /// Builds the monotonicity and jump report. A step counts as a jump when
    /// it exceeds `floor`, twenty times the median step, and twenty times the
    /// extrapolation residuals on both sides.
    pub fn from_estimates(times: Vec<f64>, estimates: Vec<DeltaEstimate>, floor: f64) -> DeltaCurve {
        let steps: Vec<f64> = estimates.windows(2).map(|w| w[1].value - w[0].value).collect();
        let max_decrease = steps.iter().fold(0.0f64, |m, &d| m.max(-d));
        let mut mags: Vec<f64> = steps.iter().map(|d| d.abs()).collect();
        mags.sort_by(f64::total_cmp);
        let median = if mags.is_empty() { 0.0 } else { mags[mags.len() / 2] };
        let jumps = steps
            .iter()
            .enumerate()
            .filter(|&(k, d)| {
                let local = 20.0 * (estimates[k].residual + estimates[k + 1].residual);
                d.abs() > floor.max(20.0 * median).max(local)
            })
            .map(|(k, &size)| Jump { t_before: times[k], t_after: times[k + 1], size })
            .collect();
        DeltaCurve { times, estimates, max_decrease, jumps }
    }
}

/// Delta curve of one solution at the given times (all levels when empty).
pub fn boundary_delta_in_time(sol: &Solution1D, times: &[f64], opts: &DeltaOptions) -> Result<DeltaCurve> {
    let times: Vec<f64> = if times.is_empty() { sol.tgrid.times().to_vec() } else { times.to_vec() };
    let estimates = times.iter().map(|&t| boundary_delta(sol, t, opts)).collect::<Result<_>>()?;
    Ok(DeltaCurve::from_estimates(times, estimates, 1e-2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{gbm, payoff_library, PayoffParams};
    use crate::oracles::bs_call_price;

    #[test]
    fn neville_recovers_polynomials() {
        let xs = [0.4, 0.1, 0.025];
        let ys: Vec<f64> = xs.iter().map(|x| 1.5 - 2.0 * x + 3.0 * x * x).collect();
        assert!((neville_at_zero(&xs, &ys) - 1.5).abs() < 1e-13);
    }

    #[test]
    fn closed_form_call_has_zero_delta() {
        let est = boundary_delta_fn(|x| bs_call_price(x, 1.0, 0.2, 1.0), &DeltaOptions::default()).unwrap();
        assert_eq!(est.verdict, Verdict::Finite);
        assert!(est.value.abs() < 1e-12, "{est:?}");
    }

    #[test]
    fn closed_form_root_diverges() {
        let est = boundary_delta_fn(|x| x.sqrt(), &DeltaOptions::default()).unwrap();
        assert_eq!(est.verdict, Verdict::Divergent);
        let est = boundary_delta_fn(|x| 2.0 * x + x * x, &DeltaOptions::default()).unwrap();
        assert_eq!(est.verdict, Verdict::Finite);
        assert!((est.value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn coarse_grid_is_rejected() {
        let call = payoff_library("call", &PayoffParams::strike(1.0)).unwrap();
        let grid = crate::pde::build_grid(4.0, 20, 1.0).unwrap();
        let tg = TimeGrid::uniform(1.0, 4).unwrap();
        let sol = solve_1d(&gbm(0.2).unwrap(), &call, &grid, &tg, Scheme::implicit()).unwrap();
        assert!(matches!(boundary_delta(&sol, 1.0, &DeltaOptions::default()), Err(LabError::Resolution(_))));
        assert!(boundary_delta(&sol, 0.3, &DeltaOptions::default()).is_err());
    }

    #[test]
    fn gprime_check_refuses_fast_growth() {
        let model = crate::models::make_cev(1.0, 1.0).unwrap();
        let call = payoff_library("call", &PayoffParams::strike(1.0)).unwrap();
        let grid = crate::pde::build_grid(4.0, 101, 2.0).unwrap();
        let tg = TimeGrid::uniform(1.0, 10).unwrap();
        let r = check_gprime_match(&model, 1.0, &call, &grid, &tg, &[1.0], 1e-3);
        assert!(matches!(r, Err(LabError::ModelBound(_))));
    }

    #[test]
    fn affine_payoff_delta_is_slope() {
        let g = payoff_library("affine", &PayoffParams { slope: Some(1.0), intercept: Some(0.0), ..Default::default() })
            .unwrap();
        let grid = crate::pde::build_grid(4.0, 201, 2.0).unwrap();
        let tg = TimeGrid::uniform(1.0, 10).unwrap();
        let rep = check_gprime_match(&gbm(0.3).unwrap(), 0.045, &g, &grid, &tg, &[0.5, 1.0], 1e-12).unwrap();
        assert!(rep.passed());
        for r in &rep.rows {
            assert!((r.estimate.value - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn jump_detection() {
        let est = |v: f64| DeltaEstimate {
            value: v,
            spacings: vec![],
            quotients: vec![],
            order: 2,
            residual: 1e-6,
            verdict: Verdict::Finite,
        };
        let vals = [0.0, 0.0, 0.001, 0.001, 1.0, 1.01, 1.02];
        let times: Vec<f64> = (0..vals.len()).map(|k| k as f64 * 0.1).collect();
        let curve = DeltaCurve::from_estimates(times, vals.iter().map(|&v| est(v)).collect(), 1e-2);
        assert_eq!(curve.jumps.len(), 1);
        assert!((curve.jumps[0].t_before - 0.3).abs() < 1e-12);
        assert!(curve.upward_only());
        assert_eq!(curve.max_decrease, 0.0);
    }
}
