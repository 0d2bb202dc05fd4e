// Check the structural hypotheses on a model: vanishing volatility at 0,
// positivity inside, and the growth bound.

use hopf_lab::error::Result;
use hopf_lab::models::{make_cev, validate_hypothesis, CoefficientTable, DiffusionModel, SampleGrid, Volatility};

pub fn run_example() -> Result<Vec<(String, bool)>> {
    let grid = SampleGrid::default_for(4.0, 1.0);
    let table = CoefficientTable::new(vec![0.0, 1.0, 2.0, 4.0], vec![0.0, 0.3, 0.5, 0.8])?;
    let models = [
        make_cev(2.0, 1.0)?,
        make_cev(0.2, 2.0)?,
        DiffusionModel::one_d(Volatility::Table(table), 1.0)?,
    ];
    Ok(models.iter().map(|m| (m.name(), validate_hypothesis(m, &grid).passed())).collect())
}

fn main() -> Result<()> {
    for (name, ok) in run_example()? {
        println!("{name}: hypotheses {}", if ok { "hold" } else { "fail" });
    }
    Ok(())
}
