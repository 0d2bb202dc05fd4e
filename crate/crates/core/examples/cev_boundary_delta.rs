// Boundary delta u_x(0, t) of a call in the square-root CEV model, with the
// extrapolation table behind the estimate.

use hopf_lab::boundary::{boundary_delta, standard_grids, suggested_xmax, DeltaOptions, Resolution};
use hopf_lab::error::Result;
use hopf_lab::models::{make_cev, payoff_library, PayoffParams};
use hopf_lab::oracles::cev_beta1_boundary_delta;
use hopf_lab::pde::{solve_1d, Scheme};

pub fn run_example() -> Result<Vec<(f64, f64, f64)>> {
    let (sigma, strike) = (2.0, 1.0);
    let model = make_cev(sigma, 1.0)?;
    let call = payoff_library("call", &PayoffParams::strike(strike))?;
    let xmax = suggested_xmax(strike, sigma, 1.0, 1.0);
    let (grid, tg) = standard_grids(&call, xmax, 1.0, Resolution { m: 801, steps: 400, grading: 2.0 })?;
    let sol = solve_1d(&model, &call, &grid, &tg, Scheme::implicit())?;
    let mut out = Vec::new();
    for t in [0.25, 0.5, 1.0] {
        let est = boundary_delta(&sol, t, &DeltaOptions::default())?;
        out.push((t, est.value, cev_beta1_boundary_delta(t, sigma, strike)?));
        if t == 1.0 {
            for (h, q) in est.spacings.iter().zip(&est.quotients) {
                println!("  spacing {h:.3e}  quotient {q:.8}");
            }
        }
    }
    Ok(out)
}

fn main() -> Result<()> {
    for (t, est, exact) in run_example()? {
        println!("t = {t}: u_x(0, t) = {est:.6}  exp(-2K/(sigma^2 t)) = {exact:.6}");
    }
    Ok(())
}
