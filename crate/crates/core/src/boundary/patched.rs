//! A convex payoff whose boundary delta jumps in time.
//!
//! For `t < t0` the solution is the explicit
//! `v(x, t) = x^2 e^t + (t0 - t) h(x / (t0 - t))`, which solves
//! `v_t = a~ v_xx` with a coefficient `a~` read off from `v`, and has
//! `v_x(0, t) = 0`. At `t0` the data `x^2 e^t0 + x` is continued with
//! `a = (x^2 + C e^-t0) / 2`, which matches `v_t` at `t0` and gives
//! `w_x(0, t) >= 1` afterwards.

use std::sync::Arc;

use crate::boundary::{boundary_delta, DeltaCurve, DeltaEstimate, DeltaOptions};
use crate::error::{param, LabError, Result};
use crate::models::{DiffusionModel, Payoff};
use crate::pde::{solve_1d, Grid1D, Scheme, Solution1D, TimeGrid};

/// Smooth convex ramp `h` with `h(0) = h'(0) = 0` and `h' = 1`, `h'' = 0` past `y0`.
pub trait Transition: Send + Sync {
    fn y0(&self) -> f64;
    fn h(&self, y: f64) -> f64;
    fn dh(&self, y: f64) -> f64;
    fn d2h(&self, y: f64) -> f64;
}

/// `s(u) = B(u) / (B(u) + B(1 - u))` with `B(u) = exp(-1/u)` for `u > 0`.
pub fn smooth_step(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else if u >= 1.0 {
        1.0
    } else {
        1.0 / (1.0 + (1.0 / u - 1.0 / (1.0 - u)).exp())
    }
}

pub fn smooth_step_derivative(u: f64) -> f64 {
    if u <= 0.0 || u >= 1.0 {
        return 0.0;
    }
    let s = smooth_step(u);
    s * (1.0 - s) * (1.0 / (u * u) + 1.0 / ((1.0 - u) * (1.0 - u)))
}

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// `h'(y) = s(y / y0)`, integrated by Gauss-Legendre on a cached cell table.
#[derive(Debug, Clone)]
pub struct BumpTransition {
    y0: f64,
    width: f64,
    /// `h` at the cell edges `k * width`.
    edges: Vec<f64>,
    gl_nodes: Vec<f64>,
    gl_weights: Vec<f64>,
}

impl BumpTransition {
    pub fn new(y0: f64) -> Result<Self> {
        if !(y0.is_finite() && y0 > 0.0) {
            return param(format!("transition width must be positive, got {y0}"));
        }
        let cells = 512;
        let (gl_nodes, gl_weights) = gauss_legendre(16);
        let mut me = Self { y0, width: y0 / cells as f64, edges: vec![0.0; cells + 1], gl_nodes, gl_weights };
        for k in 0..cells {
            let (a, b) = (k as f64 * me.width, (k + 1) as f64 * me.width);
            me.edges[k + 1] = me.edges[k] + me.integrate(a, b);
        }
        Ok(me)
    }

    fn integrate(&self, a: f64, b: f64) -> f64 {
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        let sum: f64 = self
            .gl_nodes
            .iter()
            .zip(&self.gl_weights)
            .map(|(z, w)| w * smooth_step((mid + half * z) / self.y0))
            .sum();
        half * sum
    }
}

impl Default for BumpTransition {
    fn default() -> Self {
        Self::new(1.0).expect("y0 = 1 is valid")
    }
}

impl Transition for BumpTransition {
    fn y0(&self) -> f64 {
        self.y0
    }

    fn h(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        let cells = self.edges.len() - 1;
        if y >= self.y0 {
            return self.edges[cells] + (y - self.y0);
        }
        let k = ((y / self.width) as usize).min(cells - 1);
        self.edges[k] + self.integrate(k as f64 * self.width, y)
    }

    fn dh(&self, y: f64) -> f64 {
        smooth_step(y / self.y0)
    }

    fn d2h(&self, y: f64) -> f64 {
        smooth_step_derivative(y / self.y0) / self.y0
    }
}

/// Checks the defining properties of `h` on samples of `[0, 4 y0]`;
/// returns one message per failed property.
pub fn check_transition(h: &dyn Transition) -> Vec<String> {
    let y0 = h.y0();
    let mut problems = Vec::new();
    if h.h(0.0).abs() > 1e-14 {
        problems.push(format!("h(0) = {}", h.h(0.0)));
    }
    if h.dh(0.0).abs() > 1e-14 {
        problems.push(format!("h'(0) = {}", h.dh(0.0)));
    }
    let ys: Vec<f64> = (0..=400).map(|k| 4.0 * y0 * k as f64 / 400.0).collect();
    let mut prev = f64::NEG_INFINITY;
    for &y in &ys {
        let (v, d1, d2) = (h.h(y), h.dh(y), h.d2h(y));
        if v < -1e-14 {
            problems.push(format!("h({y}) = {v} < 0"));
        }
        if d1 < prev - 1e-14 || d2 < -1e-14 {
            problems.push(format!("h is not convex near y = {y}"));
        }
        prev = d1;
        if y >= y0 && ((d1 - 1.0).abs() > 1e-12 || d2.abs() > 1e-12) {
            problems.push(format!("h'({y}) = {d1}, h''({y}) = {d2} past y0"));
        }
        let d = 1e-5 * y0;
        if y > d {
            let fd = (h.h(y + d) - h.h(y - d)) / (2.0 * d);
            if (fd - d1).abs() > 1e-6 {
                problems.push(format!("h' inconsistent with h at y = {y}: {fd} vs {d1}"));
            }
        }
    }
    problems
}

pub struct PatchedExample {
    pub t0: f64,
    pub y0: f64,
    /// `C = y0 - h(y0)`.
    pub c_const: f64,
    transition: Arc<dyn Transition>,
    /// Exact `v` sampled on the grid at the levels before `t0`.
    pub before: Solution1D,
    /// Numerical `w` from `t0` on.
    pub after: Solution1D,
    pub curve: DeltaCurve,
}

impl std::fmt::Debug for PatchedExample {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PatchedExample")
            .field("t0", &self.t0)
            .field("y0", &self.y0)
            .field("c_const", &self.c_const)
            .field("curve", &self.curve)
            .finish()
    }
}

impl PatchedExample {
    pub fn h(&self, y: f64) -> f64 {
        self.transition.h(y)
    }

    /// `v(x, t)` for `t < t0`.
    pub fn v(&self, x: f64, t: f64) -> f64 {
        let s = self.t0 - t;
        x * x * t.exp() + s * self.transition.h(x / s)
    }

    pub fn v_t(&self, x: f64, t: f64) -> f64 {
        let y = x / (self.t0 - t);
        x * x * t.exp() - self.transition.h(y) + y * self.transition.dh(y)
    }

    pub fn v_x(&self, x: f64, t: f64) -> f64 {
        2.0 * x * t.exp() + self.transition.dh(x / (self.t0 - t))
    }

    pub fn v_xx(&self, x: f64, t: f64) -> f64 {
        let s = self.t0 - t;
        2.0 * t.exp() + self.transition.d2h(x / s) / s
    }

    /// Coefficient making `v` a solution before `t0`.
    pub fn a_tilde(&self, x: f64, t: f64) -> f64 {
        let s = self.t0 - t;
        let y = x / s;
        let tr = &self.transition;
        (x * x * t.exp() * s + x * tr.dh(y) - s * tr.h(y)) / (2.0 * t.exp() * s + tr.d2h(y))
    }

    pub fn residual(&self, x: f64, t: f64) -> f64 {
        self.v_t(x, t) - self.a_tilde(x, t) * self.v_xx(x, t)
    }

    /// Coefficient used from `t0` on.
    pub fn a_after(&self, x: f64) -> f64 {
        0.5 * (x * x + self.c_const * (-self.t0).exp())
    }

    /// Largest `|v_t - a~ v_xx|` over a 10 x 10 tensor sample of
    /// `x in [0.01, 3]`, `t in [0.05 t0, 0.95 t0]`.
    pub fn max_exact_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..10 {
            let x = 0.01 * 300f64.powf(i as f64 / 9.0);
            for k in 0..10 {
                let t = self.t0 * (0.05 + 0.1 * k as f64);
                worst = worst.max(self.residual(x, t).abs());
            }
        }
        worst
    }

    pub fn delta_at(&self, t: f64) -> Option<f64> {
        self.curve.value_at(t)
    }
}

/// Patched example with the default `h` (`y0 = 1`).
pub fn build_patched_counterexample(t0: f64, grid: &Grid1D, tgrid: &TimeGrid) -> Result<PatchedExample> {
    build_patched_with(Arc::new(BumpTransition::default()), t0, grid, tgrid)
}

pub fn build_patched_with(
    transition: Arc<dyn Transition>,
    t0: f64,
    grid: &Grid1D,
    tgrid: &TimeGrid,
) -> Result<PatchedExample> {
    if !(t0 > 0.0) {
        return param(format!("t0 must be positive, got {t0}"));
    }
    let problems = check_transition(transition.as_ref());
    if !problems.is_empty() {
        return Err(LabError::Parameter(format!("transition function rejected: {}", problems.join("; "))));
    }
    let before_times: Vec<f64> = tgrid.times().iter().copied().filter(|&t| t < t0 - 1e-12).collect();
    let mut after_times = vec![t0];
    after_times.extend(tgrid.times().iter().copied().filter(|&t| t > t0 + 1e-12));
    if before_times.len() < 2 || after_times.len() < 2 {
        return param("time grid must have at least two levels on each side of t0");
    }
    let before_grid = TimeGrid::from_times(before_times)?;
    let after_grid = TimeGrid::from_times(after_times)?;

    let y0 = transition.y0();
    let c_const = y0 - transition.h(y0);
    let mut ex = PatchedExample {
        t0,
        y0,
        c_const,
        transition,
        before: Solution1D::from_values(grid.clone(), before_grid.clone(), vec![0.0; grid.len() * before_grid.times().len()], "v", "a~"),
        after: Solution1D::from_values(grid.clone(), after_grid.clone(), vec![0.0; grid.len() * after_grid.times().len()], "w", "a"),
        curve: DeltaCurve::from_estimates(vec![], vec![], 1e-2),
    };

    let values: Vec<f64> = before_grid
        .times()
        .iter()
        .flat_map(|&t| grid.nodes().iter().map(move |&x| (x, t)))
        .map(|(x, t)| ex.v(x, t))
        .collect();
    ex.before = Solution1D::from_values(grid.clone(), before_grid.clone(), values, "v", "a~");

    let ce = c_const * (-t0).exp();
    let model = DiffusionModel::from_diffusion(
        format!("(x^2+{ce})/2"),
        move |x: f64, _| 0.5 * (x * x + ce),
        ce.sqrt().max(1.0),
    )?;
    let et0 = t0.exp();
    let payoff = Payoff::custom("x^2 e^t0 + x", 1, 2.0, true, Some(1.0), move |x| x[0] * x[0] * et0 + x[0]);
    ex.after = solve_1d(&model, &payoff, grid, &after_grid, Scheme::implicit())?;

    let opts = DeltaOptions::default();
    let mut times = Vec::new();
    let mut estimates: Vec<DeltaEstimate> = Vec::new();
    for &t in before_grid.times() {
        times.push(t);
        estimates.push(boundary_delta(&ex.before, t, &opts)?);
    }
    for &t in after_grid.times() {
        times.push(t);
        estimates.push(boundary_delta(&ex.after, t, &opts)?);
    }
    ex.curve = DeltaCurve::from_estimates(times, estimates, 1e-2);
    Ok(ex)
}
