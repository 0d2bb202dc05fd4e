// Price a call under GBM with the theta scheme and compare with the
// closed form.

use hopf_lab::boundary::{standard_grids, Resolution};
use hopf_lab::error::Result;
use hopf_lab::models::{gbm, payoff_library, PayoffParams};
use hopf_lab::oracles::bs_call_price;
use hopf_lab::pde::{solve_1d, Scheme};

pub fn run_example() -> Result<Vec<(f64, f64, f64)>> {
    let (sigma, strike) = (0.2, 1.0);
    let model = gbm(sigma)?;
    let call = payoff_library("call", &PayoffParams::strike(strike))?;
    let (grid, tg) = standard_grids(&call, 4.0, 1.0, Resolution { m: 401, steps: 100, grading: 2.0 })?;
    let mut rows = Vec::new();
    for scheme in [Scheme::implicit(), Scheme::crank_nicolson()] {
        let sol = solve_1d(&model, &call, &grid, &tg, scheme)?;
        let u = sol.interpolate(tg.steps(), 1.0);
        rows.push((scheme.theta, u, bs_call_price(1.0, 1.0, sigma, strike)));
    }
    Ok(rows)
}

fn main() -> Result<()> {
    for (theta, u, exact) in run_example()? {
        println!("theta = {theta}: u(1, 1) = {u:.7}  closed form {exact:.7}  rel error {:.2e}", (u / exact - 1.0).abs());
    }
    Ok(())
}
