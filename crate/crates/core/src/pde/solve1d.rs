//! Theta-scheme for `u_t = a(x, t) u_xx (+ b u_x + c u)` on a graded grid.
//!
//! The node at `x = 0` carries the solution of the ODE `u_t = 0` on the
//! time axis, i.e. it stays at `g(0)`. The last node carries the
//! far-field condition.

use crate::error::{LabError, Result};
use crate::models::{DiffusionModel, LowerOrderTerms, Payoff};
use crate::pde::grid::{Grid1D, TimeGrid};
use crate::pde::tridiag::solve_tridiagonal;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FarField {
    /// `u_xx = 0` at the truncation. Without lower-order terms this
    /// freezes the last node at its initial value.
    Linear,
    /// Dirichlet data equal to the payoff.
    Payoff,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scheme {
    /// 1 is implicit Euler, 1/2 Crank-Nicolson.
    pub theta: f64,
    /// Leading steps replaced by two implicit half steps each (only used when `theta < 1`).
    pub rannacher_steps: usize,
    pub far_field: FarField,
}

impl Default for Scheme {
    fn default() -> Self {
        Self::implicit()
    }
}

impl Scheme {
    pub fn implicit() -> Self {
        Self { theta: 1.0, rannacher_steps: 0, far_field: FarField::Linear }
    }

    pub fn crank_nicolson() -> Self {
        Self { theta: 0.5, rannacher_steps: 2, far_field: FarField::Linear }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Diagnostics {
    /// Largest cell Peclet number `|b| h / a` seen (lower-order terms only).
    pub max_peclet: f64,
    pub peclet_warning: bool,
}

/// Solution values on the (time x space) grid, row-major in time.
#[derive(Debug, Clone)]
pub struct Solution1D {
    pub grid: Grid1D,
    pub tgrid: TimeGrid,
    values: Vec<f64>,
    pub payoff_name: String,
    pub model_name: String,
    pub diagnostics: Diagnostics,
}

impl Solution1D {
    /// Wraps externally computed values (e.g. an exact solution sampled on a grid).
    pub fn from_values(
        grid: Grid1D,
        tgrid: TimeGrid,
        values: Vec<f64>,
        payoff_name: impl Into<String>,
        model_name: impl Into<String>,
    ) -> Solution1D {
        assert_eq!(values.len(), grid.len() * tgrid.times().len());
        Solution1D {
            grid,
            tgrid,
            values,
            payoff_name: payoff_name.into(),
            model_name: model_name.into(),
            diagnostics: Diagnostics::default(),
        }
    }

    pub fn row(&self, k: usize) -> &[f64] {
        let m = self.grid.len();
        &self.values[k * m..(k + 1) * m]
    }

    pub fn value(&self, k: usize, j: usize) -> f64 {
        self.values[k * self.grid.len() + j]
    }

    pub fn at_time(&self, t: f64) -> Option<&[f64]> {
        self.tgrid.index_of(t).map(|k| self.row(k))
    }

    pub fn final_row(&self) -> &[f64] {
        self.row(self.tgrid.steps())
    }

    pub fn levels(&self) -> usize {
        self.tgrid.times().len()
    }

    /// Linear interpolation in space at time level `k`.
    pub fn interpolate(&self, k: usize, x: f64) -> f64 {
        let nodes = self.grid.nodes();
        let row = self.row(k);
        if x <= 0.0 {
            return row[0];
        }
        let m = nodes.len();
        if x >= nodes[m - 1] {
            return row[m - 1];
        }
        let j = nodes.partition_point(|&n| n <= x) - 1;
        let w = (x - nodes[j]) / (nodes[j + 1] - nodes[j]);
        row[j] * (1.0 - w) + row[j + 1] * w
    }

    /// Writes `t,x,u` rows.
    pub fn write_csv(&self, out: &mut impl std::io::Write) -> std::io::Result<()> {
        writeln!(out, "t,x,u")?;
        for (k, &t) in self.tgrid.times().iter().enumerate() {
            for (j, &x) in self.grid.nodes().iter().enumerate() {
                writeln!(out, "{t},{x},{}", self.value(k, j))?;
            }
        }
        Ok(())
    }
}

/// Three-point weights on a nonuniform grid.
#[derive(Debug, Clone, Copy, Default)]
struct Stencil {
    // second derivative
    d2: [f64; 3],
    // centered first derivative
    d1: [f64; 3],
    h_max: f64,
}

fn stencils(nodes: &[f64]) -> Vec<Stencil> {
    let m = nodes.len();
    let mut out = vec![Stencil::default(); m];
    for j in 1..m - 1 {
        let hm = nodes[j] - nodes[j - 1];
        let hp = nodes[j + 1] - nodes[j];
        let s = hm + hp;
        let lo = 2.0 / (hm * s);
        let hi = 2.0 / (hp * s);
        out[j] = Stencil {
            d2: [lo, -(lo + hi), hi],
            d1: [-hp / (hm * s), (hp - hm) / (hm * hp), hm / (hp * s)],
            h_max: hm.max(hp),
        };
    }
    out
}

/// Banded operator `L u_j = lo_j u_{j-1} + mid_j u_j + hi_j u_{j+1}`.
struct Operator {
    lo: Vec<f64>,
    mid: Vec<f64>,
    hi: Vec<f64>,
}

impl Operator {
    fn new(m: usize) -> Self {
        Self { lo: vec![0.0; m], mid: vec![0.0; m], hi: vec![0.0; m] }
    }

    fn apply(&self, u: &[f64], j: usize) -> f64 {
        let m = u.len();
        let mut v = self.mid[j] * u[j];
        if j > 0 {
            v += self.lo[j] * u[j - 1];
        }
        if j + 1 < m {
            v += self.hi[j] * u[j + 1];
        }
        v
    }
}

struct Assembler<'a> {
    model: &'a DiffusionModel,
    lower: Option<&'a LowerOrderTerms>,
    nodes: &'a [f64],
    stencils: Vec<Stencil>,
    far_field: FarField,
    diagnostics: Diagnostics,
}

impl Assembler<'_> {
    fn assemble(&mut self, t: f64, op: &mut Operator) {
        let m = self.nodes.len();
        for j in 1..m - 1 {
            let x = self.nodes[j];
            let st = &self.stencils[j];
            let a = self.model.a(0, x, t);
            let mut w = [a * st.d2[0], a * st.d2[1], a * st.d2[2]];
            if let Some(terms) = self.lower {
                let b = terms.b(0, &[x], t);
                let c = terms.c(&[x], t);
                for (wi, d) in w.iter_mut().zip(st.d1) {
                    *wi += b * d;
                }
                w[1] += c;
                let peclet = if a > 0.0 { b.abs() * st.h_max / a } else if b != 0.0 { f64::INFINITY } else { 0.0 };
                if peclet > self.diagnostics.max_peclet {
                    self.diagnostics.max_peclet = peclet;
                }
            }
            op.lo[j] = w[0];
            op.mid[j] = w[1];
            op.hi[j] = w[2];
        }
        // Far field: with u_xx = 0 only the lower-order terms survive.
        let last = m - 1;
        op.lo[last] = 0.0;
        op.mid[last] = 0.0;
        op.hi[last] = 0.0;
        if let (FarField::Linear, Some(terms)) = (self.far_field, self.lower) {
            let x = self.nodes[last];
            let h = x - self.nodes[last - 1];
            let b = terms.b(0, &[x], t);
            let c = terms.c(&[x], t);
            op.lo[last] = -b / h;
            op.mid[last] = b / h + c;
        }
    }
}

struct Stepper {
    sub: Vec<f64>,
    diag: Vec<f64>,
    sup: Vec<f64>,
    rhs: Vec<f64>,
    scratch: Vec<f64>,
}

impl Stepper {
    fn new(m: usize) -> Self {
        Self {
            sub: vec![0.0; m],
            diag: vec![0.0; m],
            sup: vec![0.0; m],
            rhs: vec![0.0; m],
            scratch: Vec::with_capacity(m),
        }
    }

    /// One theta step of size `dt` from `u` (whose operator is `old`) to the
    /// operator `new`. Boundary values for the new level are passed in.
    #[allow(clippy::too_many_arguments)]
    fn step(
        &mut self,
        u: &[f64],
        old: &Operator,
        new: &Operator,
        theta: f64,
        dt: f64,
        left: f64,
        right: Option<f64>,
        step: usize,
    ) -> Result<()> {
        let m = u.len();
        let explicit = (1.0 - theta) * dt;
        for j in 0..m {
            self.rhs[j] = u[j] + if explicit != 0.0 { explicit * old.apply(u, j) } else { 0.0 };
            self.sub[j] = -theta * dt * new.lo[j];
            self.diag[j] = 1.0 - theta * dt * new.mid[j];
            self.sup[j] = -theta * dt * new.hi[j];
        }
        self.sub[0] = 0.0;
        self.diag[0] = 1.0;
        self.sup[0] = 0.0;
        self.rhs[0] = left;
        if let Some(r) = right {
            self.sub[m - 1] = 0.0;
            self.diag[m - 1] = 1.0;
            self.rhs[m - 1] = r;
        }
        solve_tridiagonal(&self.sub, &self.diag, &self.sup, &mut self.rhs, &mut self.scratch)
            .map_err(|row| LabError::SingularSystem { step, row })
    }
}

pub fn solve_1d(
    model: &DiffusionModel,
    payoff: &Payoff,
    grid: &Grid1D,
    tgrid: &TimeGrid,
    scheme: Scheme,
) -> Result<Solution1D> {
    solve_impl(model, payoff, grid, tgrid, scheme, None)
}

/// Same scheme with drift and zeroth-order terms, centered differences.
/// `diagnostics.peclet_warning` is raised when the cell Peclet number exceeds 2.
pub fn solve_1d_with_lower_order(
    model: &DiffusionModel,
    payoff: &Payoff,
    grid: &Grid1D,
    tgrid: &TimeGrid,
    scheme: Scheme,
    terms: &LowerOrderTerms,
) -> Result<Solution1D> {
    solve_impl(model, payoff, grid, tgrid, scheme, Some(terms))
}

fn solve_impl(
    model: &DiffusionModel,
    payoff: &Payoff,
    grid: &Grid1D,
    tgrid: &TimeGrid,
    scheme: Scheme,
    lower: Option<&LowerOrderTerms>,
) -> Result<Solution1D> {
    if model.dim() != 1 || payoff.dim != 1 {
        return Err(LabError::Parameter("solve_1d needs a 1D model and payoff".into()));
    }
    if !(0.5..=1.0).contains(&scheme.theta) {
        return Err(LabError::Parameter(format!("theta must lie in [1/2, 1], got {}", scheme.theta)));
    }
    let nodes = grid.nodes();
    let m = nodes.len();
    let times = tgrid.times();
    let mut values = Vec::with_capacity(m * times.len());
    let initial: Vec<f64> = nodes.iter().map(|&x| payoff.eval1(x)).collect();
    if let Some(j) = initial.iter().position(|v| !v.is_finite()) {
        return Err(LabError::NonFinitePayoff(j));
    }
    values.extend_from_slice(&initial);

    let left = initial[0];
    let right = match (scheme.far_field, lower) {
        (FarField::Payoff, _) | (FarField::Linear, None) => Some(initial[m - 1]),
        (FarField::Linear, Some(_)) => None,
    };

    let mut asm = Assembler {
        model,
        lower,
        nodes,
        stencils: stencils(nodes),
        far_field: scheme.far_field,
        diagnostics: Diagnostics::default(),
    };
    let mut old = Operator::new(m);
    let mut new = Operator::new(m);
    let mut mid_op = Operator::new(m);
    asm.assemble(times[0], &mut old);
    let mut stepper = Stepper::new(m);
    let mut u = initial;

    for n in 0..tgrid.steps() {
        let (t0, t1) = (times[n], times[n + 1]);
        let dt = t1 - t0;
        asm.assemble(t1, &mut new);
        if scheme.theta < 1.0 && n < scheme.rannacher_steps {
            let th = t0 + 0.5 * dt;
            asm.assemble(th, &mut mid_op);
            stepper.step(&u, &old, &mid_op, 1.0, 0.5 * dt, left, right, n)?;
            u.copy_from_slice(&stepper.rhs);
            stepper.step(&u, &mid_op, &new, 1.0, 0.5 * dt, left, right, n)?;
        } else {
            stepper.step(&u, &old, &new, scheme.theta, dt, left, right, n)?;
        }
        u.copy_from_slice(&stepper.rhs);
        if let Some(j) = u.iter().position(|v| !v.is_finite()) {
            return Err(LabError::Unstable { step: n + 1, node: j, t: t1 });
        }
        values.extend_from_slice(&u);
        std::mem::swap(&mut old, &mut new);
    }

    let mut diagnostics = asm.diagnostics;
    diagnostics.peclet_warning = diagnostics.max_peclet > 2.0;
    Ok(Solution1D {
        grid: grid.clone(),
        tgrid: tgrid.clone(),
        values,
        payoff_name: payoff.name.clone(),
        model_name: model.name(),
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{gbm, make_cev, payoff_library, PayoffParams};
    use crate::oracles::bs_call_price;
    use crate::pde::grid::build_grid;

    #[test]
    fn affine_payoff_is_preserved() {
        let g = payoff_library("affine", &PayoffParams { slope: Some(2.0), intercept: Some(3.0), ..Default::default() }).unwrap();
        for model in [gbm(0.4).unwrap(), make_cev(2.0, 1.0).unwrap(), make_cev(1.0, 0.0).unwrap()] {
            for scheme in [Scheme::implicit(), Scheme::crank_nicolson()] {
                let grid = build_grid(5.0, 101, 2.0).unwrap();
                let tg = TimeGrid::uniform(1.0, 50).unwrap();
                let sol = solve_1d(&model, &g, &grid, &tg, scheme).unwrap();
                for k in 0..sol.levels() {
                    for (j, &x) in grid.nodes().iter().enumerate() {
                        assert!((sol.value(k, j) - (2.0 * x + 3.0)).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn boundary_node_stays_at_payoff() {
        let g = payoff_library("call-plus-affine", &PayoffParams { strike: Some(1.0), slope: Some(2.0), ..Default::default() }).unwrap();
        let grid = build_grid(4.0, 64, 2.0).unwrap();
        let tg = TimeGrid::uniform(1.0, 20).unwrap();
        let sol = solve_1d(&gbm(0.3).unwrap(), &g, &grid, &tg, Scheme::implicit()).unwrap();
        for k in 0..sol.levels() {
            assert_eq!(sol.value(k, 0), 0.0);
        }
        assert_eq!(sol.row(0)[10], g.eval1(grid.nodes()[10]));
    }

    #[test]
    fn gbm_call_close_to_formula() {
        let call = payoff_library("call", &PayoffParams::strike(1.0)).unwrap();
        let grid = Grid1D::with_node_at(4.0, 401, 2.0, 1.0).unwrap();
        let tg = TimeGrid::uniform(1.0, 200).unwrap();
        let sol = solve_1d(&gbm(0.2).unwrap(), &call, &grid, &tg, Scheme::crank_nicolson()).unwrap();
        let j = grid.index_of(1.0).unwrap();
        let v = sol.value(200, j);
        let exact = bs_call_price(1.0, 1.0, 0.2, 1.0);
        assert!(((v - exact) / exact).abs() < 2e-3, "{v} vs {exact}");
    }

    #[test]
    fn rejects_bad_theta_and_dimension() {
        let call = payoff_library("call", &PayoffParams::strike(1.0)).unwrap();
        let grid = build_grid(4.0, 20, 2.0).unwrap();
        let tg = TimeGrid::uniform(1.0, 4).unwrap();
        let s = Scheme { theta: 0.3, ..Scheme::implicit() };
        assert!(solve_1d(&gbm(0.2).unwrap(), &call, &grid, &tg, s).is_err());
        let ex = payoff_library("exchange", &PayoffParams::default()).unwrap();
        assert!(solve_1d(&gbm(0.2).unwrap(), &ex, &grid, &tg, Scheme::implicit()).is_err());
    }

    #[test]
    fn non_finite_payoff_is_reported() {
        let bad = Payoff::custom("log", 1, 1.0, false, None, |x| x[0].ln());
        let grid = build_grid(4.0, 20, 2.0).unwrap();
        let tg = TimeGrid::uniform(1.0, 4).unwrap();
        assert!(matches!(
            solve_1d(&gbm(0.2).unwrap(), &bad, &grid, &tg, Scheme::implicit()),
            Err(LabError::NonFinitePayoff(0))
        ));
    }

    #[test]
    fn non_finite_reaction_term_aborts() {
        let one = payoff_library("affine", &PayoffParams { slope: Some(0.0), intercept: Some(1.0), ..Default::default() }).unwrap();
        let grid = build_grid(1.0, 10, 1.0).unwrap();
        let tg = TimeGrid::uniform(1.0, 5).unwrap();
        let terms = LowerOrderTerms::one_d(|_, _| 0.0, |_, t| if t > 0.5 { f64::NAN } else { 1.0 }, 1.0, 1.0, 0.0);
        let r = solve_1d_with_lower_order(&gbm(0.2).unwrap(), &one, &grid, &tg, Scheme::crank_nicolson(), &terms);
        assert!(matches!(r, Err(LabError::Unstable { .. }) | Err(LabError::SingularSystem { .. })), "{r:?}");
    }

    #[test]
    fn sharpness_drift_keeps_half_square() {
        // u = x^2/2 solves u_t = x^b u_xx - x^(b-1) u_x; the stencils are exact on quadratics.
        let beta = 1.0;
        let model = DiffusionModel::from_diffusion("x^b", move |x: f64, _| x.powf(beta), 1.0).unwrap();
        let terms = LowerOrderTerms::one_d(move |x: f64, _| -x.powf(beta - 1.0), |_, _| 0.0, 1.0, 0.0, beta);
        let g = Payoff::custom("x^2/2", 1, 2.0, true, Some(0.0), |x| 0.5 * x[0] * x[0]);
        let grid = build_grid(2.0, 81, 2.0).unwrap();
        let tg = TimeGrid::uniform(1.0, 40).unwrap();
        let scheme = Scheme { far_field: FarField::Payoff, ..Scheme::implicit() };
        let sol = solve_1d_with_lower_order(&model, &g, &grid, &tg, scheme, &terms).unwrap();
        for (j, &x) in grid.nodes().iter().enumerate() {
            assert!((sol.final_row()[j] - 0.5 * x * x).abs() < 1e-12);
        }
        // |b| h / a = h / x is O(1) next to the degenerate boundary.
        assert!(sol.diagnostics.max_peclet > 2.0 && sol.diagnostics.peclet_warning);
    }
}
