// Closed-form references: Black-Scholes, the CEV boundary delta, power
// claims and the exchange option.

use hopf_lab::error::Result;
use hopf_lab::oracles::{bs_call_delta, bs_call_price, cev_beta1_boundary_delta, margrabe_deltas, margrabe_price, norm_cdf, power_option_price};

pub fn run_example() -> Result<Vec<(&'static str, f64)>> {
    Ok(vec![
        ("Phi(-12)", norm_cdf(-12.0)),
        ("BS call x=1 t=1 sigma=0.2 K=1", bs_call_price(1.0, 1.0, 0.2, 1.0)),
        ("BS delta at x=1e-3", bs_call_delta(1e-3, 1.0, 0.2, 1.0)),
        ("CEV(1) u_x(0,1), sigma=2 K=1", cev_beta1_boundary_delta(1.0, 2.0, 1.0)?),
        ("power gamma=2 at x=1 t=1", power_option_price(1.0, 1.0, 2.0).value),
        ("exchange at (1,1), sigma=0.2", margrabe_price(1.0, 1.0, 1.0, 0.2, 0.2)),
        ("exchange u_x1 on x1=0", margrabe_deltas(0.0, 1.0, 1.0, 0.2, 0.2).0),
    ])
}

fn main() -> Result<()> {
    for (name, v) in run_example()? {
        println!("{name:<32} {v:.10e}");
    }
    Ok(())
}
