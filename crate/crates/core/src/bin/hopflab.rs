use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hopf_lab::runner::{
    combined_status, default_out_dir, emit_summary, evaluate_oracle, run, run_many, ExperimentConfig, ExperimentKind,
    GridBlock, ModelBlock, ParamsBlock, PayoffBlock, RunOutcome, TimeBlock, OUT_DIR_ENV, SUMMARY_FILE,
};

#[derive(Parser)]
#[command(name = "hopflab", version, about = "Boundary deltas of degenerate pricing equations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run experiment config files.
    Run {
        configs: Vec<PathBuf>,
        /// Output directory (default: $HOPFLAB_OUT or ./reports).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Evaluate a closed-form oracle, e.g. `oracle bs-call x=1 t=1 sigma=0.2 strike=1`.
    Oracle {
        name: String,
        params: Vec<String>,
    },
    /// Boundary delta of a call in a CEV model.
    Delta {
        #[arg(long, default_value_t = 2.0)]
        sigma: f64,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[arg(long, default_value_t = 1.0)]
        strike: f64,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long, default_value_t = 801)]
        m: usize,
        #[arg(long, default_value_t = 400)]
        steps: usize,
        /// Relative tolerance against the closed form, where one exists.
        #[arg(long, default_value_t = 0.02)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Boundary delta across CEV exponents.
    Sweep {
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.0, 0.5, 1.0, 1.5, 2.0])]
        betas: Vec<f64>,
        #[arg(long, default_value_t = 2.0)]
        sigma: f64,
        #[arg(long, default_value_t = 1.0)]
        strike: f64,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long, default_value_t = 801)]
        m: usize,
        #[arg(long, default_value_t = 400)]
        steps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Patched-coefficient example whose boundary delta jumps at t0.
    Counterexample {
        #[arg(long, default_value_t = 0.5)]
        t0: f64,
        #[arg(long, default_value_t = 8.0)]
        xmax: f64,
        #[arg(long, default_value_t = 801)]
        m: usize,
        #[arg(long, default_value_t = 200)]
        steps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Certify the barrier residual near x1 = 0.
    Barrier {
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[arg(long, default_value_t = 2.0)]
        sigma: f64,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        n: Option<u32>,
        /// Starting slab width (halved until the certificate passes).
        #[arg(long)]
        eta: Option<f64>,
        #[arg(long, default_value_t = 200)]
        density: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo price against the PDE price.
    Mc {
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[arg(long, default_value_t = 2.0)]
        sigma: f64,
        #[arg(long, default_value = "call")]
        payoff: String,
        #[arg(long, default_value_t = 1.0)]
        strike: f64,
        #[arg(long, default_value_t = 1.0)]
        x0: f64,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long, default_value_t = 100_000)]
        paths: usize,
        #[arg(long, default_value_t = 2048)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Index of the reports in a directory.
    Summary { dir: Option<PathBuf> },
}

fn base(kind: ExperimentKind, name: &str) -> ExperimentConfig {
    ExperimentConfig {
        kind,
        name: name.into(),
        seed: 0,
        output: None,
        model: None,
        payoff: None,
        grid: None,
        time: None,
        tolerances: BTreeMap::new(),
        params: ParamsBlock::default(),
    }
}

fn call(strike: f64) -> Option<PayoffBlock> {
    Some(PayoffBlock { tag: "call".into(), strike: Some(strike), ..Default::default() })
}

fn model(sigma: f64, beta: f64) -> Option<ModelBlock> {
    Some(ModelBlock { sigma, beta, second: None })
}

fn time(horizon: f64, steps: usize) -> Option<TimeBlock> {
    Some(TimeBlock { horizon, steps, theta: 1.0, dirichlet_far_field: false })
}

fn report(outcomes: &[RunOutcome]) -> ExitCode {
    for o in outcomes {
        match &o.path {
            Some(p) => println!("{} -> {}", o.message, p.display()),
            None => eprintln!("{}: error (status {}): {}", o.name, o.status.code(), o.message),
        }
    }
    ExitCode::from(combined_status(outcomes).code() as u8)
}

fn single(cfg: ExperimentConfig, out: Option<PathBuf>) -> ExitCode {
    report(&[run(&cfg, &out.unwrap_or_else(default_out_dir))])
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { configs, out, jobs } => {
            if configs.is_empty() {
                eprintln!("no config files given");
                return ExitCode::from(2);
            }
            report(&run_many(&configs, &out.unwrap_or_else(default_out_dir), jobs))
        }
        Command::Oracle { name, params } => {
            let mut kv = BTreeMap::new();
            for p in &params {
                let parsed = p.split_once('=').and_then(|(k, v)| v.parse::<f64>().ok().map(|v| (k.to_string(), v)));
                match parsed {
                    Some((k, v)) => {
                        kv.insert(k, v);
                    }
                    None => {
                        eprintln!("expected key=value, got `{p}`");
                        return ExitCode::from(2);
                    }
                }
            }
            match evaluate_oracle(&name, &kv) {
                Ok(values) => {
                    for (k, v) in values {
                        println!("{k} = {v}");
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("{e}");
                    ExitCode::from(2)
                }
            }
        }
        Command::Delta { sigma, beta, strike, t, m, steps, tol, out } => {
            let mut cfg = base(ExperimentKind::Delta, &format!("delta_sigma{sigma}_beta{beta}"));
            cfg.model = model(sigma, beta);
            cfg.payoff = call(strike);
            cfg.grid = Some(GridBlock { xmax: None, m, p: 2.0 });
            cfg.time = time(t, steps);
            cfg.tolerances.insert("delta_rel_error".into(), tol);
            single(cfg, out)
        }
        Command::Sweep { betas, sigma, strike, t, m, steps, out } => {
            let mut cfg = base(ExperimentKind::Sweep, &format!("sweep_sigma{sigma}"));
            cfg.model = model(sigma, 2.0);
            cfg.payoff = call(strike);
            cfg.grid = Some(GridBlock { xmax: None, m, p: 2.0 });
            cfg.time = time(t, steps);
            cfg.params.betas = betas;
            cfg.tolerances.insert("margin".into(), 10.0);
            cfg.tolerances.insert("zero".into(), 1e-3);
            single(cfg, out)
        }
        Command::Counterexample { t0, xmax, m, steps, out } => {
            let mut cfg = base(ExperimentKind::Counterexample, &format!("counterexample_t0_{t0}"));
            cfg.grid = Some(GridBlock { xmax: Some(xmax), m, p: 2.0 });
            cfg.time = time((2.0 * t0).max(t0 + 0.1), steps);
            cfg.params.t0 = Some(t0);
            cfg.tolerances.insert("before".into(), 1e-3);
            cfg.tolerances.insert("after_min".into(), 0.9);
            cfg.tolerances.insert("exact_residual".into(), 1e-8);
            single(cfg, out)
        }
        Command::Barrier { beta, sigma, epsilon, n, eta, density, out } => {
            let mut cfg = base(ExperimentKind::Barrier, &format!("barrier_beta{beta}"));
            cfg.model = model(sigma, beta);
            cfg.params.betas = vec![beta];
            cfg.params.epsilon = epsilon;
            cfg.params.n_exp = n;
            cfg.params.eta = eta;
            cfg.params.density = Some(density);
            cfg.tolerances.insert("residual".into(), 1e-12);
            single(cfg, out)
        }
        Command::Mc { beta, sigma, payoff, strike, x0, t, paths, steps, seed, out } => {
            let mut cfg = base(ExperimentKind::McCrosscheck, &format!("mc_beta{beta}_seed{seed}"));
            cfg.seed = seed;
            cfg.model = model(sigma, beta);
            cfg.payoff = Some(PayoffBlock { tag: payoff, strike: Some(strike), ..Default::default() });
            cfg.grid = Some(GridBlock { xmax: None, m: 801, p: 2.0 });
            cfg.time = Some(TimeBlock { horizon: t, steps: 400, theta: 0.5, dirichlet_far_field: false });
            cfg.params.x0 = Some(x0);
            cfg.params.paths = Some(paths);
            cfg.params.mc_steps = Some(steps);
            cfg.tolerances.insert("se_multiple".into(), 3.0);
            single(cfg, out)
        }
        Command::Summary { dir } => {
            let dir = dir.unwrap_or_else(default_out_dir);
            match emit_summary(&dir) {
                Ok(text) => {
                    print!("{text}");
                    if let Err(e) = std::fs::write(dir.join(SUMMARY_FILE), &text) {
                        eprintln!("cannot write summary: {e}");
                        return ExitCode::from(3);
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("cannot read {} (set {OUT_DIR_ENV} or pass a directory): {e}", dir.display());
                    ExitCode::from(2)
                }
            }
        }
    }
}
