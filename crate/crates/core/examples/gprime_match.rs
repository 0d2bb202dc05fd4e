// When a <= C x^2 the boundary delta keeps the payoff slope g'(0).

use hopf_lab::boundary::{check_gprime_match, standard_grids, Resolution};
use hopf_lab::error::Result;
use hopf_lab::models::{gbm, make_cev, payoff_library, PayoffParams};

pub fn run_example() -> Result<Vec<(f64, f64)>> {
    let sigma = 0.2;
    let payoff = payoff_library("call-plus-affine", &PayoffParams { strike: Some(1.0), slope: Some(2.0), ..Default::default() })?;
    let (grid, tg) = standard_grids(&payoff, 4.0, 1.0, Resolution { m: 401, steps: 200, grading: 2.0 })?;
    let report = check_gprime_match(&gbm(sigma)?, 0.5 * sigma * sigma, &payoff, &grid, &tg, &[0.25, 0.5, 1.0], 1e-3)?;
    // A CEV coefficient is not bounded by C x^2 near 0 and is refused.
    let refused = check_gprime_match(&make_cev(sigma, 1.0)?, 1.0, &payoff, &grid, &tg, &[1.0], 1e-3);
    println!("CEV(beta = 1) refused: {}", refused.is_err());
    Ok(report.rows.iter().map(|r| (r.t, r.estimate.value)).collect())
}

fn main() -> Result<()> {
    for (t, d) in run_example()? {
        println!("t = {t}: u_x(0, t) = {d:.10}  (g'(0) = 2)");
    }
    Ok(())
}
