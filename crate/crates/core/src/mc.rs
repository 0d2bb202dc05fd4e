//! Monte Carlo for the driftless absorbed diffusions.
//!
//! Paths run in batches of [`BATCH`]; batch `b` draws from ChaCha8 seeded
//! with `seed` on stream `b`, so results do not depend on thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{param, LabError, Result};
use crate::models::{CevSpec, Payoff};

pub const BATCH: usize = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathScheme {
    ExactGbm,
    EulerAbsorbed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathConfig {
    pub n_paths: usize,
    pub n_steps: usize,
    pub seed: u64,
    pub scheme: PathScheme,
    pub horizon: f64,
}

impl PathConfig {
    pub fn new(n_paths: usize, n_steps: usize, seed: u64, horizon: f64) -> Result<Self> {
        let cfg = Self { n_paths, n_steps, seed, scheme: PathScheme::EulerAbsorbed, horizon };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if self.n_paths == 0 || self.n_steps == 0 {
            return param("need at least one path and one step");
        }
        if !(self.horizon.is_finite() && self.horizon >= 0.0) {
            return param(format!("horizon must be >= 0, got {}", self.horizon));
        }
        Ok(())
    }

    fn batches(&self) -> Vec<(u64, usize)> {
        let n = self.n_paths.div_ceil(BATCH);
        (0..n).map(|b| (b as u64, BATCH.min(self.n_paths - b * BATCH))).collect()
    }

    fn rng(&self, batch: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(batch);
        rng
    }
}

/// Terminal values, `dim` coordinates per path.
#[derive(Debug, Clone, PartialEq)]
pub struct TerminalSamples {
    pub dim: usize,
    pub values: Vec<f64>,
    /// Paths with some coordinate absorbed at 0.
    pub absorbed: usize,
}

impl TerminalSamples {
    pub fn len(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn absorbed_fraction(&self) -> f64 {
        self.absorbed as f64 / self.len() as f64
    }

    pub fn mean(&self, coord: usize) -> f64 {
        (0..self.len()).map(|i| self.point(i)[coord]).sum::<f64>() / self.len() as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriceEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_paths: usize,
    pub absorbed_fraction: f64,
}

fn check_start(x0: f64, sigma: f64) -> Result<()> {
    if !(x0.is_finite() && x0 >= 0.0) {
        return param(format!("x0 must be >= 0, got {x0}"));
    }
    if !(sigma.is_finite() && sigma > 0.0) {
        return param(format!("sigma must be positive, got {sigma}"));
    }
    Ok(())
}

/// `X(T) = x0 exp(-sigma^2 T / 2 + sigma sqrt(T) Z)`.
pub fn simulate_gbm_exact(x0: f64, sigma: f64, horizon: f64, config: &PathConfig) -> Result<TerminalSamples> {
    check_start(x0, sigma)?;
    let cfg = PathConfig { horizon, ..*config };
    cfg.validate()?;
    let drift = -0.5 * sigma * sigma * horizon;
    let vol = sigma * horizon.sqrt();
    let chunks: Vec<Vec<f64>> = cfg
        .batches()
        .into_par_iter()
        .map(|(b, n)| {
            let mut rng = cfg.rng(b);
            (0..n)
                .map(|_| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    x0 * (drift + vol * z).exp()
                })
                .collect()
        })
        .collect();
    let values: Vec<f64> = chunks.concat();
    let absorbed = values.iter().filter(|&&v| v == 0.0).count();
    Ok(TerminalSamples { dim: 1, values, absorbed })
}

/// Two independent exact GBMs.
pub fn simulate_gbm_exact_2d(x0: [f64; 2], sigma: [f64; 2], horizon: f64, config: &PathConfig) -> Result<TerminalSamples> {
    for i in 0..2 {
        check_start(x0[i], sigma[i])?;
    }
    let cfg = PathConfig { horizon, ..*config };
    cfg.validate()?;
    let chunks: Vec<Vec<f64>> = cfg
        .batches()
        .into_par_iter()
        .map(|(b, n)| {
            let mut rng = cfg.rng(b);
            let mut out = Vec::with_capacity(2 * n);
            for _ in 0..n {
                for i in 0..2 {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    out.push(x0[i] * (-0.5 * sigma[i] * sigma[i] * horizon + sigma[i] * horizon.sqrt() * z).exp());
                }
            }
            out
        })
        .collect();
    let values: Vec<f64> = chunks.concat();
    let absorbed = values.chunks(2).filter(|p| p[0] == 0.0 || p[1] == 0.0).count();
    Ok(TerminalSamples { dim: 2, values, absorbed })
}

/// Euler with full truncation; a path reaching `x <= 0` is set to 0 and
/// stays there. When `coarse` is set, a second path driven by the summed
/// increments of consecutive step pairs runs alongside.
fn euler_batch(
    spec: CevSpec,
    x0: f64,
    cfg: &PathConfig,
    batch: (u64, usize),
    coarse: bool,
) -> (Vec<f64>, Vec<f64>) {
    let (b, n) = batch;
    let mut rng = cfg.rng(b);
    let dt = cfg.horizon / cfg.n_steps as f64;
    let sdt = dt.sqrt();
    let mut fine_out = Vec::with_capacity(n);
    let mut coarse_out = Vec::with_capacity(if coarse { n } else { 0 });
    let half = 0.5 * spec.beta;
    let vol = |x: f64| {
        if spec.beta == 1.0 {
            spec.sigma * x.sqrt()
        } else if spec.beta == 0.0 {
            spec.sigma
        } else {
            spec.sigma * x.powf(half)
        }
    };
    for _ in 0..n {
        let mut x = x0;
        let mut xc = x0;
        let mut pending = 0.0;
        for k in 0..cfg.n_steps {
            if x <= 0.0 && (!coarse || xc <= 0.0) {
                break;
            }
            let z: f64 = StandardNormal.sample(&mut rng);
            let dw = sdt * z;
            if x > 0.0 {
                x += vol(x) * dw;
                if x <= 0.0 {
                    x = 0.0;
                }
            }
            if coarse {
                pending += dw;
                if k % 2 == 1 {
                    if xc > 0.0 {
                        xc += vol(xc) * pending;
                        if xc <= 0.0 {
                            xc = 0.0;
                        }
                    }
                    pending = 0.0;
                }
            }
        }
        fine_out.push(x);
        if coarse {
            coarse_out.push(xc);
        }
    }
    (fine_out, coarse_out)
}

fn cev_paths(x0: f64, sigma: f64, beta: f64, horizon: f64, config: &PathConfig, coarse: bool) -> Result<(TerminalSamples, Option<TerminalSamples>)> {
    check_start(x0, sigma)?;
    if !(0.0..2.0).contains(&beta) {
        return param(format!("Euler paths need 0 <= beta < 2, got {beta}"));
    }
    let spec = CevSpec::new(sigma, beta)?;
    let cfg = PathConfig { horizon, scheme: PathScheme::EulerAbsorbed, ..*config };
    cfg.validate()?;
    if coarse && !cfg.n_steps.is_multiple_of(2) {
        return param("step doubling needs an even step count");
    }
    let parts: Vec<(Vec<f64>, Vec<f64>)> =
        cfg.batches().into_par_iter().map(|batch| euler_batch(spec, x0, &cfg, batch, coarse)).collect();
    let mut fine = Vec::with_capacity(cfg.n_paths);
    let mut crs = Vec::with_capacity(if coarse { cfg.n_paths } else { 0 });
    for (f, c) in parts {
        fine.extend(f);
        crs.extend(c);
    }
    let wrap = |values: Vec<f64>| {
        let absorbed = values.iter().filter(|&&v| v == 0.0).count();
        TerminalSamples { dim: 1, values, absorbed }
    };
    Ok((wrap(fine), coarse.then(|| wrap(crs))))
}

/// Absorbed CEV paths by Euler; `beta = 2` is routed to exact GBM sampling.
pub fn simulate_cev_euler_absorbed(x0: f64, sigma: f64, beta: f64, horizon: f64, config: &PathConfig) -> Result<TerminalSamples> {
    if beta == 2.0 {
        return simulate_gbm_exact(x0, sigma, horizon, config);
    }
    Ok(cev_paths(x0, sigma, beta, horizon, config, false)?.0)
}

/// Mean of the payoff with standard error `std / sqrt(n)`.
pub fn mc_price(payoff: &Payoff, samples: &TerminalSamples) -> Result<PriceEstimate> {
    if samples.is_empty() {
        return param("no samples");
    }
    if payoff.dim != samples.dim {
        return param(format!("payoff dimension {} does not match samples ({})", payoff.dim, samples.dim));
    }
    let n = samples.len();
    let mut vals = Vec::with_capacity(n);
    for i in 0..n {
        let v = payoff.eval(samples.point(i));
        if !v.is_finite() {
            return Err(LabError::NonFinitePayoff(i));
        }
        vals.push(v);
    }
    let mean = vals.iter().sum::<f64>() / n as f64;
    let var = if n > 1 { vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64 } else { 0.0 };
    Ok(PriceEstimate { mean, std_error: (var / n as f64).sqrt(), n_paths: n, absorbed_fraction: samples.absorbed_fraction() })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepDoubling {
    pub fine: PriceEstimate,
    pub coarse: PriceEstimate,
    /// `|fine - coarse|` on coupled paths.
    pub allowance: f64,
}

/// Prices with `n_steps` and `n_steps / 2` on the same Brownian paths.
pub fn step_doubling(payoff: &Payoff, x0: f64, sigma: f64, beta: f64, horizon: f64, config: &PathConfig) -> Result<StepDoubling> {
    let (fine, coarse) = cev_paths(x0, sigma, beta, horizon, config, true)?;
    let fine = mc_price(payoff, &fine)?;
    let coarse = mc_price(payoff, &coarse.expect("coarse paths requested"))?;
    Ok(StepDoubling { fine, coarse, allowance: (fine.mean - coarse.mean).abs() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{payoff_library, PayoffParams};

    fn cfg(n: usize, steps: usize) -> PathConfig {
        PathConfig::new(n, steps, 7, 1.0).unwrap()
    }

    #[test]
    fn zero_start_is_absorbed() {
        let s = simulate_gbm_exact(0.0, 0.2, 1.0, &cfg(1000, 1)).unwrap();
        assert!(s.values.iter().all(|&v| v == 0.0));
        let s = simulate_cev_euler_absorbed(0.0, 1.0, 1.0, 1.0, &cfg(1000, 16)).unwrap();
        assert!(s.values.iter().all(|&v| v == 0.0));
        assert_eq!(s.absorbed_fraction(), 1.0);
    }

    #[test]
    fn gbm_is_a_martingale() {
        let s = simulate_gbm_exact(1.0, 0.2, 1.0, &cfg(200_000, 1)).unwrap();
        let id = payoff_library("affine", &PayoffParams::default()).unwrap();
        let p = mc_price(&id, &s).unwrap();
        assert!((p.mean - 1.0).abs() < 3.0 * p.std_error, "{p:?}");
    }

    #[test]
    fn determinism_across_batches() {
        let c = cfg(3 * BATCH + 17, 32);
        let a = simulate_cev_euler_absorbed(1.0, 1.0, 1.0, 1.0, &c).unwrap();
        let b = simulate_cev_euler_absorbed(1.0, 1.0, 1.0, 1.0, &c).unwrap();
        assert_eq!(a, b);
        let d = simulate_cev_euler_absorbed(1.0, 1.0, 1.0, 1.0, &PathConfig { seed: 8, ..c }).unwrap();
        assert_ne!(a, d);
    }

    #[test]
    fn coupled_paths_agree_with_plain_paths() {
        let c = cfg(50_000, 64);
        let call = payoff_library("call", &PayoffParams::strike(1.0)).unwrap();
        let plain = mc_price(&call, &simulate_cev_euler_absorbed(1.0, 2.0, 1.0, 1.0, &c).unwrap()).unwrap();
        let sd = step_doubling(&call, 1.0, 2.0, 1.0, 1.0, &c).unwrap();
        assert!((plain.mean - sd.fine.mean).abs() < 4.0 * 2f64.sqrt() * plain.std_error);
        assert!(sd.allowance > 0.0 && sd.allowance < 0.05, "{sd:?}");
    }

    #[test]
    fn brownian_motion_absorption_near_reflection_value() {
        // P(min W < -1) = 2 Phi(-1) for unit-variance Brownian motion over [0, 1].
        let s = simulate_cev_euler_absorbed(1.0, 1.0, 0.0, 1.0, &cfg(100_000, 1000)).unwrap();
        let f = s.absorbed_fraction();
        let exact = 0.317_310_507_862_914_1;
        // Discrete monitoring misses crossings, biasing the fraction down.
        assert!(f > 0.0 && f < exact && exact - f < 0.03, "{f}");
    }

    #[test]
    fn rejects_bad_input() {
        assert!(PathConfig::new(0, 1, 1, 1.0).is_err());
        assert!(simulate_gbm_exact(-1.0, 0.2, 1.0, &cfg(10, 1)).is_err());
        assert!(simulate_cev_euler_absorbed(1.0, 0.0, 1.0, 1.0, &cfg(10, 1)).is_err());
        let bad = Payoff::custom("log", 1, 1.0, false, None, |x| x[0].ln());
        let s = simulate_gbm_exact(0.0, 0.2, 1.0, &cfg(10, 1)).unwrap();
        assert!(matches!(mc_price(&bad, &s), Err(LabError::NonFinitePayoff(0))));
    }
}
