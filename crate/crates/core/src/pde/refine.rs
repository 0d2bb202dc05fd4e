//! Grid-refinement studies: each level doubles the space and time resolution.

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{param, Result};
use crate::models::{DiffusionModel, Payoff};
use crate::pde::grid::{Grid1D, TimeGrid};
use crate::pde::solve1d::{solve_1d, Scheme};

/// Exact value `u(x, t)` to measure errors against.
pub type Oracle = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub struct RefineProblem {
    pub model: DiffusionModel,
    pub payoff: Payoff,
    pub xmax: f64,
    /// Node count of the coarsest level.
    pub m0: usize,
    pub grading: f64,
    pub horizon: f64,
    /// Time steps of the coarsest level.
    pub steps0: usize,
    pub scheme: Scheme,
    /// Points where the final-time values are compared.
    pub probes: Vec<f64>,
    pub oracle: Option<Oracle>,
    /// If true, relative errors are reported.
    pub relative: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefineLevel {
    pub m: usize,
    pub steps: usize,
    pub values: Vec<f64>,
    pub error_vs_oracle: Option<f64>,
    pub error_vs_finer: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub levels: Vec<RefineLevel>,
    /// `log2(e_l / e_{l+1})` between consecutive levels, from oracle errors
    /// when available, otherwise from successive differences.
    pub orders: Vec<f64>,
}

impl ConvergenceTable {
    pub fn observed_order(&self) -> Option<f64> {
        self.orders.last().copied()
    }

    pub fn errors(&self) -> Vec<f64> {
        self.levels
            .iter()
            .filter_map(|l| l.error_vs_oracle.or(l.error_vs_finer))
            .collect()
    }
}

fn distance(a: &[f64], b: &[f64], relative: bool) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = (x - y).abs();
            if relative && *y != 0.0 { d / y.abs() } else { d }
        })
        .fold(0.0, f64::max)
}

pub fn refine_study(problem: &RefineProblem, levels: usize) -> Result<ConvergenceTable> {
    if levels < 2 {
        return param("a refinement study needs at least 2 levels");
    }
    if problem.probes.is_empty() {
        return param("a refinement study needs probe points");
    }
    let kink = problem.payoff.kink();
    let solved: Vec<Result<RefineLevel>> = (0..levels)
        .into_par_iter()
        .map(|l| {
            let m = (problem.m0 - 1) * (1 << l) + 1;
            let steps = problem.steps0 << l;
            let grid = match kink {
                Some(k) => Grid1D::with_node_at(problem.xmax, m, problem.grading, k)?,
                None => crate::pde::grid::build_grid(problem.xmax, m, problem.grading)?,
            };
            let tg = TimeGrid::uniform(problem.horizon, steps)?;
            let sol = solve_1d(&problem.model, &problem.payoff, &grid, &tg, problem.scheme)?;
            let last = tg.steps();
            let values: Vec<f64> = problem.probes.iter().map(|&x| sol.interpolate(last, x)).collect();
            let error_vs_oracle = problem.oracle.as_ref().map(|f| {
                let exact: Vec<f64> = problem.probes.iter().map(|&x| f(x, problem.horizon)).collect();
                distance(&values, &exact, problem.relative)
            });
            Ok(RefineLevel { m, steps, values, error_vs_oracle, error_vs_finer: None })
        })
        .collect();
    let mut table: Vec<RefineLevel> = solved.into_iter().collect::<Result<_>>()?;
    for l in 0..levels - 1 {
        let d = distance(&table[l].values, &table[l + 1].values, problem.relative);
        table[l].error_vs_finer = Some(d);
    }
    let errs: Vec<f64> = if problem.oracle.is_some() {
        table.iter().filter_map(|l| l.error_vs_oracle).collect()
    } else {
        table.iter().filter_map(|l| l.error_vs_finer).collect()
    };
    let orders = errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    Ok(ConvergenceTable { levels: table, orders })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{gbm, make_cev, payoff_library, PayoffParams};
    use crate::oracles::bs_call_price;

    fn call_problem() -> RefineProblem {
        RefineProblem {
            model: gbm(0.2).unwrap(),
            payoff: payoff_library("call", &PayoffParams::strike(1.0)).unwrap(),
            xmax: 4.0,
            m0: 101,
            grading: 2.0,
            horizon: 1.0,
            steps0: 25,
            scheme: Scheme::crank_nicolson(),
            probes: vec![1.0],
            oracle: Some(Arc::new(|x, t| bs_call_price(x, t, 0.2, 1.0))),
            relative: false,
        }
    }

    #[test]
    fn crank_nicolson_call_is_second_order() {
        let table = refine_study(&call_problem(), 3).unwrap();
        let order = table.observed_order().unwrap();
        assert!(order >= 1.5, "{table:?}");
    }

    #[test]
    fn affine_is_exact_up_to_roundoff() {
        let mut p = call_problem();
        p.payoff = payoff_library("affine", &PayoffParams { slope: Some(3.0), intercept: Some(1.0), ..Default::default() })
            .unwrap();
        p.model = make_cev(1.0, 1.0).unwrap();
        p.oracle = Some(Arc::new(|x, _| 3.0 * x + 1.0));
        p.probes = vec![0.5, 1.0, 2.0];
        let table = refine_study(&p, 2).unwrap();
        for l in &table.levels {
            assert!(l.error_vs_oracle.unwrap() < 1e-11, "{l:?}");
            assert!(l.error_vs_finer.is_none_or(|e| e < 1e-11), "{l:?}");
        }
    }

    #[test]
    fn needs_two_levels() {
        assert!(refine_study(&call_problem(), 1).is_err());
    }
}
