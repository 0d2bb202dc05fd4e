// Boundary delta of a call across CEV exponents: positive below 2, zero at 2.

use hopf_lab::boundary::{hopf_sweep, Resolution};
use hopf_lab::error::Result;
use hopf_lab::models::{payoff_library, PayoffParams};

pub fn run_example() -> Result<Vec<(f64, f64, f64)>> {
    let call = payoff_library("call", &PayoffParams::strike(1.0))?;
    let rows = hopf_sweep(&[0.0, 0.5, 1.0, 1.5, 2.0], 2.0, &call, 1.0, Resolution { m: 401, steps: 200, grading: 2.0 })?;
    Ok(rows.into_iter().map(|r| (r.beta, r.estimate.value, r.estimate.residual)).collect())
}

fn main() -> Result<()> {
    println!("beta  delta      residual");
    for (beta, delta, residual) in run_example()? {
        println!("{beta:<5} {delta:<10.6} {residual:.1e}");
    }
    Ok(())
}
