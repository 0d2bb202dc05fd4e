// Observed convergence order of implicit Euler and Crank-Nicolson on a GBM call.

use std::sync::Arc;

use hopf_lab::error::Result;
use hopf_lab::models::{gbm, payoff_library, PayoffParams};
use hopf_lab::oracles::bs_call_price;
use hopf_lab::pde::{refine_study, RefineProblem, Scheme};

pub fn run_example() -> Result<Vec<(f64, Vec<f64>, f64)>> {
    let mut out = Vec::new();
    for scheme in [Scheme::implicit(), Scheme::crank_nicolson()] {
        let problem = RefineProblem {
            model: gbm(0.2)?,
            payoff: payoff_library("call", &PayoffParams::strike(1.0))?,
            xmax: 4.0,
            m0: 101,
            grading: 2.0,
            horizon: 1.0,
            steps0: 25,
            scheme,
            probes: vec![0.9, 1.0, 1.1],
            oracle: Some(Arc::new(|x, t| bs_call_price(x, t, 0.2, 1.0))),
            relative: false,
        };
        let table = refine_study(&problem, 3)?;
        out.push((scheme.theta, table.errors(), table.observed_order().unwrap_or(f64::NAN)));
    }
    Ok(out)
}

fn main() -> Result<()> {
    for (theta, errors, order) in run_example()? {
        println!("theta = {theta}: errors {errors:?}  observed order {order:.2}");
    }
    Ok(())
}
