// Exchange option (x2 - x1)^+ on two assets, solved face-first: the faces
// x1 = 0 and x2 = 0 as 1D problems, then the interior.

use hopf_lab::boundary::{boundary_delta_on_nodes, DeltaOptions};
use hopf_lab::error::Result;
use hopf_lab::models::{make_cev_2d, payoff_library, CevSpec, PayoffParams};
use hopf_lab::oracles::margrabe_price;
use hopf_lab::pde::{solve_2d_with_faces, Grid1D, Scheme, TimeGrid};

pub fn run_example() -> Result<Vec<(f64, f64, f64, f64)>> {
    let payoff = payoff_library("exchange", &PayoffParams::default())?;
    let grid = Grid1D::with_node_at(4.0, 121, 2.0, 1.0)?;
    let tg = TimeGrid::uniform(1.0, 50)?;
    let j = grid.index_of(1.0).expect("anchored node");
    let mut out = Vec::new();
    for beta in [2.0, 1.0] {
        let sigma = if beta == 2.0 { 0.2 } else { 1.0 };
        let spec = CevSpec::new(sigma, beta)?;
        let sol = solve_2d_with_faces(&make_cev_2d(spec, spec)?, &payoff, &grid, &grid, &tg, Scheme::implicit(), &[1.0])?;
        let d1 = boundary_delta_on_nodes(grid.nodes(), &sol.line_x1(1.0, j).expect("recorded"), &DeltaOptions::default())?;
        let d2 = boundary_delta_on_nodes(grid.nodes(), &sol.line_x2(1.0, j).expect("recorded"), &DeltaOptions::default())?;
        out.push((beta, sol.value(1.0, j, j).expect("recorded"), d1.value, d2.value));
    }
    Ok(out)
}

fn main() -> Result<()> {
    println!("closed-form GBM price at (1, 1): {:.6}", margrabe_price(1.0, 1.0, 1.0, 0.2, 0.2));
    for (beta, price, d1, d2) in run_example()? {
        println!("beta = {beta}: u(1,1,1) = {price:.6}  u_x1(0,1,1) = {d1:.4}  u_x2(1,0,1) = {d2:.4}");
    }
    Ok(())
}
