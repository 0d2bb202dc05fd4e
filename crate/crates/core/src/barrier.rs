//! Sampled certificates for the comparison functions behind the boundary
//! results.
//!
//! Derivatives are closed-form; only the domain is sampled.

use rayon::prelude::*;

use crate::error::{param, LabError, Result};
use crate::models::{DiffusionModel, LowerOrderTerms, Payoff};
use crate::pde::{solve_1d, Grid1D, Scheme, TimeGrid};

/// Roundoff allowance on the minimum residual.
pub const RESIDUAL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct BarrierParams {
    pub beta: f64,
    /// Lower-bound constant in `a_11 >= C x1^beta`.
    pub c: f64,
    pub epsilon: f64,
    pub n_exp: u32,
    /// Slab width in `x1`.
    pub eta: f64,
    /// `(x2', ..., xn')` of the boundary point; empty in 1D.
    pub point: Vec<f64>,
    pub t0: f64,
}

impl BarrierParams {
    pub fn dim(&self) -> usize {
        1 + self.point.len()
    }

    /// `beta + epsilon - 1 < (N - 1) / N < 1`.
    pub fn rule_holds(&self) -> bool {
        let n = self.n_exp as f64;
        self.beta + self.epsilon - 1.0 < (n - 1.0) / n
    }

    /// `v = x1 + x1^(1+eps) - |t - t0|^N - sum |x_i - x_i'|^(2N)`.
    pub fn value(&self, x: &[f64], t: f64) -> f64 {
        let n = self.n_exp as i32;
        let mut v = x[0] + x[0].powf(1.0 + self.epsilon) - (t - self.t0).abs().powi(n);
        for (xi, pi) in x[1..].iter().zip(&self.point) {
            v -= (xi - pi).abs().powi(2 * n);
        }
        v
    }

    pub fn dx1(&self, x1: f64) -> f64 {
        1.0 + (1.0 + self.epsilon) * x1.powf(self.epsilon)
    }

    /// `sum a_ii v_ii - v_t` for `t <= t0`.
    pub fn residual(&self, model: &DiffusionModel, x: &[f64], t: f64) -> f64 {
        let (eps, n) = (self.epsilon, self.n_exp as i32);
        let nf = n as f64;
        let mut r = model.a(0, x[0], t) * (1.0 + eps) * eps * x[0].powf(eps - 1.0) - nf * (self.t0 - t).powi(n - 1);
        for (i, (xi, pi)) in x[1..].iter().zip(&self.point).enumerate() {
            r -= (4.0 * nf * nf - 2.0 * nf) * model.a(i + 1, *xi, t) * (xi - pi).abs().powi(2 * n - 2);
        }
        r
    }
}

/// `epsilon = min(1/4, (2 - beta)/4)` and the smallest `N` in `1, 2, 4, ...`
/// with `beta + epsilon - 1 < (N - 1)/N`.
pub fn choose_barrier_params(beta: f64) -> Result<(f64, u32)> {
    if !(0.0..2.0).contains(&beta) {
        return param(format!("no admissible barrier for beta = {beta}: need 0 <= beta < 2"));
    }
    let epsilon = 0.25f64.min((2.0 - beta) / 4.0);
    let mut n = 1u32;
    while beta + epsilon - 1.0 >= (n as f64 - 1.0) / n as f64 {
        n *= 2;
    }
    Ok((epsilon, n))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions {
    /// Points per sampled axis.
    pub density: usize,
    pub eta_start: f64,
    pub max_halvings: u32,
    /// Smallest sampled `x1` as a fraction of `eta`.
    pub depth: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self { density: 200, eta_start: 0.5, max_halvings: 40, depth: 1e-10 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Worst {
    pub x: Vec<f64>,
    pub t: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BarrierReport {
    /// Parameters with the last `eta` tried.
    pub params: BarrierParams,
    pub min_residual: f64,
    pub samples: usize,
    pub worst: Option<Worst>,
    pub halvings: u32,
    pub rule_holds: bool,
    pub passed: bool,
}

fn geometric(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    let mut v: Vec<f64> = (0..n).map(|k| (a + (b - a) * k as f64 / (n - 1) as f64).exp()).collect();
    v[n - 1] = hi;
    v
}

/// Minimum residual over a sample of `D = {v >= 0, 0 < x1 <= eta, t <= t0}`.
fn sample_domain(model: &DiffusionModel, p: &BarrierParams, opts: &SearchOptions) -> (f64, usize, Option<Worst>) {
    let d = opts.density.max(2);
    let n = p.n_exp as f64;
    let xs = geometric(p.eta * opts.depth, p.eta, d);
    let fold = |acc: (f64, usize, Option<Worst>), (x, t, r): (Vec<f64>, f64, f64)| {
        let (m, c, w) = acc;
        if r < m {
            (r, c + 1, Some(Worst { x, t, residual: r }))
        } else {
            (m, c + 1, w)
        }
    };
    let merge = |a: (f64, usize, Option<Worst>), b: (f64, usize, Option<Worst>)| {
        let count = a.1 + b.1;
        if b.0 < a.0 || (b.0 == a.0 && a.2.is_none()) {
            (b.0, count, b.2)
        } else {
            (a.0, count, a.2)
        }
    };
    let init = || (f64::INFINITY, 0usize, None);
    xs.par_iter()
        .map(|&x1| {
            let reach = x1 + x1.powf(1.0 + p.epsilon);
            let tau_max = reach.powf(1.0 / n).min(p.t0);
            let mut acc = init();
            for k in 0..d {
                let t = p.t0 - tau_max * k as f64 / (d - 1) as f64;
                if p.point.is_empty() {
                    let pt = [x1];
                    if p.value(&pt, t) >= 0.0 {
                        acc = fold(acc, (pt.to_vec(), t, p.residual(model, &pt, t)));
                    }
                    continue;
                }
                let slack = reach - (p.t0 - t).powi(p.n_exp as i32);
                if slack < 0.0 {
                    continue;
                }
                let rmax = slack.powf(1.0 / (2.0 * n));
                for j in 0..d {
                    for sign in [-1.0, 1.0] {
                        let x2 = p.point[0] + sign * rmax * j as f64 / (d - 1) as f64;
                        let pt = [x1, x2];
                        if x2 >= 0.0 && p.value(&pt, t) >= 0.0 {
                            acc = fold(acc, (pt.to_vec(), t, p.residual(model, &pt, t)));
                        }
                    }
                }
            }
            acc
        })
        .reduce(init, merge)
}

/// Certifies `L v >= 0` on sampled `D`, halving `eta` from `opts.eta_start`
/// until the minimum residual clears `-1e-12`.
pub fn verify_barrier_degenhopf(model: &DiffusionModel, params: &BarrierParams, opts: &SearchOptions) -> Result<BarrierReport> {
    if !(0.0..2.0).contains(&params.beta) {
        return param(format!("barrier rule unsatisfiable for beta = {}", params.beta));
    }
    if !(params.epsilon > 0.0 && params.n_exp >= 1 && params.c > 0.0 && params.t0 > 0.0) {
        return param("barrier needs epsilon > 0, N >= 1, C > 0, t0 > 0");
    }
    if params.dim() != model.dim() || params.dim() > 2 {
        return param("barrier point dimension does not match the model");
    }
    // a_11 >= C x1^beta on a sample of (0, eta_start].
    for &x in &geometric(opts.eta_start * opts.depth, opts.eta_start, 200) {
        for t in [0.0, 0.5 * params.t0, params.t0] {
            let a = model.a(0, x, t);
            let lb = params.c * x.powf(params.beta);
            if a < lb * (1.0 - 1e-12) {
                return Err(LabError::ModelBound(format!("a_11({x}, {t}) = {a} < {lb}")));
            }
        }
    }
    let mut p = params.clone();
    p.eta = opts.eta_start;
    let mut halvings = 0;
    loop {
        let (min_residual, samples, worst) = sample_domain(model, &p, opts);
        let passed = min_residual >= -RESIDUAL_TOL;
        if passed || halvings == opts.max_halvings {
            return Ok(BarrierReport { rule_holds: p.rule_holds(), params: p, min_residual, samples, worst, halvings, passed });
        }
        p.eta *= 0.5;
        halvings += 1;
    }
}

/// Auto-chosen parameters for a 1D CEV-type bound `a >= C x^beta`.
pub fn auto_params(beta: f64, c: f64) -> Result<BarrierParams> {
    let (epsilon, n_exp) = choose_barrier_params(beta)?;
    Ok(BarrierParams { beta, c, epsilon, n_exp, eta: 0.5, point: vec![], t0: 1.0 })
}

// ---------------------------------------------------------------------------
// Supersolution for a <= C x^2
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct NeghopfReport {
    pub c_bound: f64,
    pub epsilon: f64,
    pub n_exp: u32,
    pub c1: f64,
    pub c2: f64,
    /// `1 / (2 C (N^2 - N))`.
    pub t0: f64,
    /// `2 C C1 N (N - 1)`, the smallest `C2` the inequality needs.
    pub c2_threshold: f64,
    pub domination_passed: bool,
    /// `(x, g(x), eps x + C1 x^N)` at the worst sample.
    pub domination_worst: Option<(f64, f64, f64)>,
    pub min_residual: f64,
    pub worst_residual_at: Option<(f64, f64)>,
    pub residual_passed: bool,
}

impl NeghopfReport {
    pub fn passed(&self) -> bool {
        self.domination_passed && self.residual_passed
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeghopfOptions {
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub x_max: f64,
    pub density: usize,
}

impl Default for NeghopfOptions {
    fn default() -> Self {
        Self { c1: None, c2: None, x_max: 10.0, density: 200 }
    }
}

/// `t0 = 1 / (2 C (N^2 - N))`.
pub fn neghopf_t0(c: f64, n: u32) -> f64 {
    let nf = n as f64;
    1.0 / (2.0 * c * (nf * nf - nf))
}

/// Checks `v = eps x + C1 x^N + C2 t x^N` dominates the normalized payoff and
/// satisfies `v_t - a v_xx >= 0` for `t <= t0`. With no model, the extreme
/// coefficient `a = C x^2` is used; a given model is checked against it.
pub fn verify_supersolution_neghopf(
    c_bound: f64,
    model: Option<&DiffusionModel>,
    payoff: &Payoff,
    epsilon: f64,
    n_exp: u32,
    opts: &NeghopfOptions,
) -> Result<NeghopfReport> {
    if n_exp < 2 {
        return param("the supersolution needs N > 1");
    }
    if !(c_bound > 0.0 && epsilon > 0.0) {
        return param("C and epsilon must be positive");
    }
    if payoff.eval1(0.0).abs() > 1e-12 || payoff.gprime0 != Some(0.0) {
        return param(format!("payoff {} must be normalized to g(0) = 0, g'(0) = 0", payoff.name));
    }
    let nf = n_exp as f64;
    let t0 = neghopf_t0(c_bound, n_exp);
    let d = opts.density.max(2);
    let xs = geometric(opts.x_max * 1e-6, opts.x_max, d);
    let ts: Vec<f64> = (0..d).map(|k| t0 * k as f64 / (d - 1) as f64).collect();

    if let Some(m) = model {
        for &x in &xs {
            for &t in &ts {
                if m.a(0, x, t) > c_bound * x * x * (1.0 + 1e-12) {
                    return Err(LabError::ModelBound(format!("a({x}, {t}) exceeds {c_bound} x^2")));
                }
            }
        }
    }

    let c1 = opts.c1.unwrap_or_else(|| {
        xs.iter().map(|&x| (payoff.eval1(x) - epsilon * x).max(0.0) / x.powf(nf)).fold(0.0, f64::max)
    });
    let c2_threshold = 2.0 * c_bound * c1 * nf * (nf - 1.0);
    let c2 = opts.c2.unwrap_or(2.0 * c2_threshold);

    let mut domination_worst = None;
    let mut worst_gap = 0.0;
    for &x in &xs {
        let g = payoff.eval1(x);
        let bound = epsilon * x + c1 * x.powf(nf);
        if g - bound > worst_gap {
            worst_gap = g - bound;
            domination_worst = Some((x, g, bound));
        }
    }

    let a_at = |x: f64, t: f64| model.map_or(c_bound * x * x, |m| m.a(0, x, t));
    let mut min_residual = f64::INFINITY;
    let mut worst_residual_at = None;
    let mut residual_passed = true;
    for &x in &xs {
        for &t in &ts {
            let vt = c2 * x.powf(nf);
            let vxx = (c1 + c2 * t) * nf * (nf - 1.0) * x.powf(nf - 2.0);
            let r = vt - a_at(x, t) * vxx;
            if r < -RESIDUAL_TOL * vt.abs().max(1.0) {
                residual_passed = false;
            }
            if r < min_residual {
                min_residual = r;
                worst_residual_at = Some((x, t));
            }
        }
    }

    Ok(NeghopfReport {
        c_bound,
        epsilon,
        n_exp,
        c1,
        c2,
        t0,
        c2_threshold,
        domination_passed: domination_worst.is_none(),
        domination_worst,
        min_residual,
        worst_residual_at,
        residual_passed,
    })
}

/// Solves up to `t0`, restarts from `u(., t0)` with the same `N`, and
/// returns the report of every round.
pub fn iterate_supersolution(
    c_bound: f64,
    model: &DiffusionModel,
    payoff: &Payoff,
    epsilon: f64,
    n_exp: u32,
    grid: &Grid1D,
    steps_per_round: usize,
    rounds: usize,
) -> Result<Vec<NeghopfReport>> {
    let t0 = neghopf_t0(c_bound, n_exp);
    let opts = NeghopfOptions { x_max: grid.xmax().min(10.0), ..Default::default() };
    let mut current = payoff.clone();
    let mut reports = Vec::with_capacity(rounds);
    for round in 0..rounds {
        reports.push(verify_supersolution_neghopf(c_bound, Some(model), &current, epsilon, n_exp, &opts)?);
        let tg = TimeGrid::uniform_from(round as f64 * t0, (round + 1) as f64 * t0, steps_per_round)?;
        let sol = solve_1d(model, &current, grid, &tg, Scheme::implicit())?;
        let last = tg.steps();
        let snapshot = sol.clone();
        current = Payoff::custom(format!("u(., {:.4})", (round + 1) as f64 * t0), 1, payoff.growth_degree, payoff.is_convex, Some(0.0), move |x| snapshot.interpolate(last, x[0]));
    }
    Ok(reports)
}

// ---------------------------------------------------------------------------
// Sharpness of the lower-order bounds
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct SharpnessRow {
    pub beta: f64,
    /// Largest `|u_t - (x^b u_xx - x^(b-1) u_x)|` for `u = x^2/2`.
    pub drift_residual: f64,
    /// Largest `|u_t - (x^b u_xx - 2 x^(b-2) u)|`.
    pub reaction_residual: f64,
    pub boundary_delta: f64,
    /// For each `(C, delta)` tried: `x` where the drift bound fails and the
    /// ratio `b_1 / bound` there (> 1 means violated).
    pub drift_witnesses: Vec<(f64, f64, f64, f64)>,
    pub reaction_witnesses: Vec<(f64, f64, f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SharpnessReport {
    pub rows: Vec<SharpnessRow>,
    pub samples: usize,
}

impl SharpnessReport {
    pub fn max_residual(&self) -> f64 {
        self.rows.iter().map(|r| r.drift_residual.max(r.reaction_residual)).fold(0.0, f64::max)
    }

    pub fn bounds_fail(&self) -> bool {
        self.rows.iter().all(|r| {
            r.drift_witnesses.iter().all(|w| w.3 > 1.0) && r.reaction_witnesses.iter().all(|w| w.3 > 1.0)
        })
    }
}

/// `u = x^2/2` solves both `u_t = x^b u_xx - x^(b-1) u_x` and
/// `u_t = x^b u_xx - 2 x^(b-2) u` with `u_x(0, t) = 0`, while the drift resp.
/// reaction bound fails near 0 for every `delta > 0`.
pub fn sharpness_residuals() -> SharpnessReport {
    let betas = [0.0, 0.5, 1.0, 1.5];
    let constants: [(f64, f64); 4] = [(0.5, 0.5), (1.0, 0.25), (4.0, 0.1), (10.0, 1.0)];
    let mut rows = Vec::new();
    let mut samples = 0;
    for &beta in &betas {
        let (mut r1, mut r2) = (0.0f64, 0.0f64);
        samples = 0;
        for i in 0..10 {
            let x = 0.001 * 2000f64.powf(i as f64 / 9.0);
            for k in 0..10 {
                let _t = 0.1 * (k + 1) as f64;
                samples += 1;
                let (u, ux, uxx, ut) = (0.5 * x * x, x, 1.0, 0.0);
                r1 = r1.max((ut - (x.powf(beta) * uxx - x.powf(beta - 1.0) * ux)).abs());
                r2 = r2.max((ut - (x.powf(beta) * uxx - 2.0 * x.powf(beta - 2.0) * u)).abs());
            }
        }
        let delta = crate::boundary::boundary_delta_fn(|x| 0.5 * x * x, &Default::default())
            .map(|e| e.value)
            .unwrap_or(f64::NAN);
        // b_1 = -x^(b-1) against -C x^(b-1+d): ratio x^-d / C, above 1 for x < C^(-1/d).
        let drift_witnesses = constants
            .iter()
            .map(|&(c, d)| {
                let x = (2.0 * c).powf(-1.0 / d);
                (c, d, x, x.powf(-d) / c)
            })
            .collect();
        // c = -2 x^(b-2) against -C x^(b-2+d): ratio 2 x^-d / C, above 1 for x < (2/C)^(1/d).
        let reaction_witnesses = constants
            .iter()
            .map(|&(c, d)| {
                let x = (1.0 / c).powf(1.0 / d);
                (c, d, x, 2.0 * x.powf(-d) / c)
            })
            .collect();
        rows.push(SharpnessRow {
            beta,
            drift_residual: r1,
            reaction_residual: r2,
            boundary_delta: delta,
            drift_witnesses,
            reaction_witnesses,
        });
    }
    SharpnessReport { rows, samples }
}

/// The sharpness drift as declared lower-order terms (claiming bound `delta`).
pub fn sharpness_drift_terms(beta: f64, c: f64, delta: f64) -> LowerOrderTerms {
    LowerOrderTerms::one_d(move |x: f64, _| -x.powf(beta - 1.0), |_, _| 0.0, c, delta, beta)
}

/// The sharpness reaction term as declared lower-order terms.
pub fn sharpness_reaction_terms(beta: f64, c: f64, delta: f64) -> LowerOrderTerms {
    LowerOrderTerms::one_d(|_, _| 0.0, move |x: f64, _| -2.0 * x.powf(beta - 2.0), c, delta, beta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{gbm, make_cev, payoff_library, PayoffParams};

    #[test]
    fn parameter_rule_examples() {
        assert_eq!(choose_barrier_params(0.0).unwrap(), (0.25, 1));
        assert_eq!(choose_barrier_params(1.0).unwrap(), (0.25, 2));
        let (e, n) = choose_barrier_params(1.9).unwrap();
        assert!((e - 0.025).abs() < 1e-15);
        assert_eq!(n, 16);
        assert!(choose_barrier_params(2.0).is_err());
        let p = BarrierParams { beta: 1.0, c: 2.0, epsilon: 0.25, n_exp: 4, eta: 0.1, point: vec![], t0: 1.0 };
        assert!(p.rule_holds());
    }

    #[test]
    fn barrier_vanishes_with_unit_slope_at_the_point() {
        let p = BarrierParams { beta: 1.0, c: 2.0, epsilon: 0.25, n_exp: 2, eta: 0.1, point: vec![0.7], t0: 1.0 };
        assert_eq!(p.value(&[0.0, 0.7], 1.0), 0.0);
        assert_eq!(p.dx1(0.0), 1.0);
    }

    #[test]
    fn uniformly_parabolic_barrier() {
        let model = DiffusionModel::from_diffusion("one", |x: f64, _| if x > 0.0 { 1.0 } else { 0.0 }, 2.0).unwrap();
        let p = BarrierParams { beta: 0.0, c: 1.0, epsilon: 0.5, n_exp: 1, eta: 0.5, point: vec![], t0: 1.0 };
        let r = verify_barrier_degenhopf(&model, &p, &SearchOptions::default()).unwrap();
        assert!(r.passed, "{r:?}");
        // L v = 0.75 x^-0.5 - 1 > 0 for x < 0.5625, so eta = 0.5 already works.
        assert_eq!(r.halvings, 0);
    }

    #[test]
    fn illegal_parameters_never_certify() {
        let model = make_cev(2.0, 1.0).unwrap();
        let p = BarrierParams { beta: 1.0, c: 2.0, epsilon: 0.25, n_exp: 1, eta: 0.5, point: vec![], t0: 1.0 };
        assert!(!p.rule_holds());
        let opts = SearchOptions { density: 50, ..Default::default() };
        let r = verify_barrier_degenhopf(&model, &p, &opts).unwrap();
        assert!(!r.passed);
        assert_eq!(r.halvings, opts.max_halvings);
        assert!(r.worst.is_some());
    }

    #[test]
    fn model_below_the_bound_is_refused() {
        let model = make_cev(1.0, 1.0).unwrap();
        let p = auto_params(1.0, 2.0).unwrap();
        assert!(matches!(verify_barrier_degenhopf(&model, &p, &SearchOptions::default()), Err(LabError::ModelBound(_))));
    }

    #[test]
    fn two_dimensional_barrier() {
        let model = crate::models::make_cev_2d(
            crate::models::CevSpec::new(2.0, 1.0).unwrap(),
            crate::models::CevSpec::new(0.5, 2.0).unwrap(),
        )
        .unwrap();
        let (epsilon, n_exp) = choose_barrier_params(1.0).unwrap();
        let p = BarrierParams { beta: 1.0, c: 2.0, epsilon, n_exp, eta: 0.5, point: vec![1.0], t0: 1.0 };
        let r = verify_barrier_degenhopf(&model, &p, &SearchOptions { density: 40, ..Default::default() }).unwrap();
        assert!(r.passed, "{r:?}");
        assert!(r.samples > 40 * 40);
    }

    #[test]
    fn neghopf_examples() {
        assert_eq!(neghopf_t0(1.0, 2), 0.25);
        let call = payoff_library("call", &PayoffParams::strike(1.0)).unwrap();
        let opts = NeghopfOptions { c1: Some(0.9), c2: Some(2.0 * 0.9 * 2.0), ..Default::default() };
        let m = gbm(2f64.sqrt()).unwrap();
        let r = verify_supersolution_neghopf(1.0, Some(&m), &call, 0.1, 2, &opts).unwrap();
        assert!(r.domination_passed);
        assert_eq!(r.c2, r.c2_threshold);
        assert!(r.residual_passed, "{r:?}");
        let too_small = NeghopfOptions { c2: Some(0.9 * r.c2_threshold), ..opts };
        assert!(!verify_supersolution_neghopf(1.0, None, &call, 0.1, 2, &too_small).unwrap().residual_passed);
        let weak = NeghopfOptions { c1: Some(0.1), ..opts };
        let r = verify_supersolution_neghopf(1.0, None, &call, 0.1, 2, &weak).unwrap();
        assert!(!r.domination_passed);
        assert!(r.domination_worst.is_some());
    }

    #[test]
    fn neghopf_rejects_unnormalized_payoff_and_fast_models() {
        let aff = payoff_library("affine", &PayoffParams { slope: Some(1.0), ..Default::default() }).unwrap();
        assert!(verify_supersolution_neghopf(1.0, None, &aff, 0.1, 2, &NeghopfOptions::default()).is_err());
        let call = payoff_library("call", &PayoffParams::strike(1.0)).unwrap();
        let m = gbm(2.0).unwrap();
        assert!(matches!(
            verify_supersolution_neghopf(1.0, Some(&m), &call, 0.1, 2, &NeghopfOptions::default()),
            Err(LabError::ModelBound(_))
        ));
    }

    #[test]
    fn sharpness() {
        let r = sharpness_residuals();
        assert_eq!(r.samples, 100);
        assert!(r.max_residual() <= 1e-12);
        assert!(r.bounds_fail());
        for row in &r.rows {
            assert!(row.boundary_delta.abs() < 1e-12);
        }
        let terms = sharpness_drift_terms(1.0, 1.0, 0.5);
        let x = 0.01;
        assert!(!terms.check_bounds(&[vec![x]], &[0.5]).is_empty());
        let terms = sharpness_reaction_terms(1.0, 1.0, 0.5);
        assert!(!terms.check_bounds(&[vec![x]], &[0.5]).is_empty());
    }
}
