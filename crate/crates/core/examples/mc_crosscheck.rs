// Monte Carlo prices of a call (exact GBM, Euler CEV with absorption)
// against the PDE.

use hopf_lab::boundary::{standard_grids, suggested_xmax, Resolution};
use hopf_lab::error::Result;
use hopf_lab::mc::{mc_price, simulate_gbm_exact, step_doubling, PathConfig};
use hopf_lab::models::{make_cev, payoff_library, PayoffParams};
use hopf_lab::pde::{solve_1d, Scheme};

pub fn run_example() -> Result<Vec<(f64, f64, f64, f64)>> {
    let call = payoff_library("call", &PayoffParams::strike(1.0))?;
    let cfg = PathConfig::new(20_000, 256, 7, 1.0)?;
    let mut out = Vec::new();
    for (beta, sigma) in [(2.0, 0.2), (1.0, 2.0)] {
        let (grid, tg) = standard_grids(&call, suggested_xmax(1.0, sigma, beta, 1.0), 1.0, Resolution { m: 801, steps: 200, grading: 2.0 })?;
        let pde = solve_1d(&make_cev(sigma, beta)?, &call, &grid, &tg, Scheme::crank_nicolson())?.interpolate(tg.steps(), 1.0);
        let (mean, band) = if beta == 2.0 {
            let est = mc_price(&call, &simulate_gbm_exact(1.0, sigma, 1.0, &cfg)?)?;
            (est.mean, 3.0 * est.std_error)
        } else {
            let sd = step_doubling(&call, 1.0, sigma, beta, 1.0, &cfg)?;
            (sd.fine.mean, 3.0 * sd.fine.std_error + sd.allowance)
        };
        out.push((beta, pde, mean, band));
    }
    Ok(out)
}

fn main() -> Result<()> {
    for (beta, pde, mc, band) in run_example()? {
        println!("beta = {beta}: PDE {pde:.5}  MC {mc:.5}  |diff| {:.1e} (band {band:.1e})", (pde - mc).abs());
    }
    Ok(())
}
