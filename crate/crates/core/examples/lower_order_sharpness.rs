// Lower-order terms that break the bounds: u = x^2/2 solves both systems
// while u_x(0, t) = 0, and the claimed bounds fail near 0.

use hopf_lab::barrier::{sharpness_drift_terms, sharpness_residuals};
use hopf_lab::error::Result;

pub fn run_example() -> Result<(f64, bool, usize)> {
    let rep = sharpness_residuals();
    let terms = sharpness_drift_terms(1.0, 1.0, 0.1);
    let points: Vec<Vec<f64>> = (1..=20).map(|k| vec![10f64.powi(-k)]).collect();
    let violations = terms.check_bounds(&points, &[0.5]);
    Ok((rep.max_residual(), rep.bounds_fail(), violations.len()))
}

fn main() -> Result<()> {
    let (residual, fail, violations) = run_example()?;
    println!("max residual of u = x^2/2: {residual:.1e}");
    println!("bounds fail for every (C, delta) tried: {fail}");
    println!("sampled violations of the drift bound (C = 1, delta = 0.1): {violations}");
    Ok(())
}
