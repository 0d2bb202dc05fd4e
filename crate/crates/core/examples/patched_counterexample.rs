// A coefficient patched at t0 so that u_x(0, t) = 0 before t0 and jumps up
// at t0.

use hopf_lab::boundary::build_patched_counterexample;
use hopf_lab::error::Result;
use hopf_lab::pde::{build_grid, TimeGrid};

pub fn run_example() -> Result<(f64, f64, f64, usize)> {
    let t0 = 0.5;
    let grid = build_grid(8.0, 401, 2.0)?;
    let tg = TimeGrid::uniform(1.0, 100)?;
    let ex = build_patched_counterexample(t0, &grid, &tg)?;
    let before = ex.curve.times.iter().zip(ex.curve.values()).filter(|(t, _)| **t < t0).map(|(_, v)| v.abs()).fold(0.0, f64::max);
    let after = ex.delta_at(t0 + 0.05).unwrap_or(f64::NAN);
    Ok((before, after, ex.max_exact_residual(), ex.curve.jumps.len()))
}

fn main() -> Result<()> {
    let (before, after, residual, jumps) = run_example()?;
    println!("max |u_x(0, t)| for t < t0: {before:.2e}");
    println!("u_x(0, t0 + 0.05): {after:.4}");
    println!("max |v_t - a v_xx| on the exact piece: {residual:.2e}");
    println!("jumps detected: {jumps}");
    Ok(())
}
