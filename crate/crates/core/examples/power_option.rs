// Power claims x^gamma under a = x^2: the price x^gamma e^((gamma^2 - gamma) t)
// and a boundary delta that exists only for gamma >= 1.

use hopf_lab::boundary::{boundary_delta, DeltaOptions, Verdict};
use hopf_lab::error::Result;
use hopf_lab::models::{gbm, payoff_library, PayoffParams};
use hopf_lab::oracles::power_option_price;
use hopf_lab::pde::{build_grid, solve_1d, Scheme, TimeGrid};

pub fn run_example() -> Result<Vec<(f64, f64, Verdict)>> {
    let model = gbm(2f64.sqrt())?;
    let grid = build_grid(1e4, 801, 3.0)?;
    let tg = TimeGrid::uniform(1.0, 200)?;
    let mut out = Vec::new();
    for gamma in [0.5, 1.0, 2.0] {
        let payoff = payoff_library("power", &PayoffParams::gamma(gamma))?;
        let sol = solve_1d(&model, &payoff, &grid, &tg, Scheme::crank_nicolson())?;
        let u = sol.interpolate(tg.steps(), 1.0);
        let rel = (u / power_option_price(1.0, 1.0, gamma).value - 1.0).abs();
        out.push((gamma, rel, boundary_delta(&sol, 1.0, &DeltaOptions::default())?.verdict));
    }
    Ok(out)
}

fn main() -> Result<()> {
    for (gamma, rel, verdict) in run_example()? {
        println!("gamma = {gamma}: rel error at x = 1 {rel:.2e}, boundary delta {verdict:?}");
    }
    Ok(())
}
