// Run an experiment config from code, write its CSV report and index the
// output directory.

use hopf_lab::error::Result;
use hopf_lab::runner::{emit_summary, run, ExperimentConfig};

const CONFIG: &str = r#"
kind = "sweep"
name = "small_sweep"

[model]
sigma = 2.0

[payoff]
tag = "call"
strike = 1.0

[grid]
m = 201

[time]
T = 1.0
steps = 100

[params]
betas = [0.5, 1.0, 2.0]

[tolerances]
margin = 10.0
zero = 1e-3
"#;

pub fn run_example() -> Result<(i32, String)> {
    let cfg = ExperimentConfig::parse(CONFIG)?;
    let dir = std::env::temp_dir().join(format!("hopflab-example-{}", std::process::id()));
    let outcome = run(&cfg, &dir);
    let summary = emit_summary(&dir)?;
    std::fs::remove_dir_all(&dir)?;
    Ok((outcome.status.code(), summary))
}

fn main() -> Result<()> {
    let (status, summary) = run_example()?;
    println!("status {status}");
    print!("{summary}");
    Ok(())
}
