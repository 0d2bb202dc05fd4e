// Sampled certificates: the barrier near x1 = 0 for CEV exponents, the
// supersolution for a <= C x^2, and the lower-order sharpness examples.

use hopf_lab::barrier::{auto_params, sharpness_residuals, verify_barrier_degenhopf, verify_supersolution_neghopf, NeghopfOptions, SearchOptions};
use hopf_lab::error::Result;
use hopf_lab::models::{gbm, make_cev, payoff_library, PayoffParams};

pub fn run_example() -> Result<Vec<(f64, f64, f64)>> {
    let sigma = 2.0;
    let c = 0.5 * sigma * sigma;
    let opts = SearchOptions { density: 60, ..Default::default() };
    let mut out = Vec::new();
    for beta in [0.0, 0.5, 1.0, 1.5] {
        let rep = verify_barrier_degenhopf(&make_cev(sigma, beta)?, &auto_params(beta, c)?, &opts)?;
        out.push((beta, rep.params.eta, rep.min_residual));
    }
    let call = payoff_library("call", &PayoffParams::strike(1.0))?;
    let sup = verify_supersolution_neghopf(1.0, Some(&gbm(2f64.sqrt())?), &call, 0.1, 2, &NeghopfOptions::default())?;
    println!("supersolution: t0 = {}  C1 = {:.4}  passed = {}", sup.t0, sup.c1, sup.passed());
    println!("sharpness residual: {:.1e}", sharpness_residuals().max_residual());
    Ok(out)
}

fn main() -> Result<()> {
    for (beta, eta, r) in run_example()? {
        println!("beta = {beta}: certified on x1 <= {eta:.3e}, min residual {r:.3e}");
    }
    Ok(())
}
