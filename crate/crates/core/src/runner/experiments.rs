//! One function per experiment kind; each turns a validated config into a
//! [`Report`] without touching the file system.

use std::sync::Arc;

use rayon::prelude::*;

use super::config::{ExperimentConfig, ExperimentKind, ModelBlock, PayoffBlock};
use super::report::{num, Check, Cmp, Report};
use crate::barrier::{
    auto_params, choose_barrier_params, neghopf_t0, sharpness_residuals, verify_barrier_degenhopf,
    verify_supersolution_neghopf, BarrierParams, NeghopfOptions, SearchOptions,
};
use crate::boundary::{
    boundary_delta, boundary_delta_on_nodes, build_patched_counterexample, check_gprime_match, hopf_sweep,
    standard_grids, suggested_xmax, DeltaOptions, Resolution, Verdict,
};
use crate::error::{LabError, Result};
use crate::mc::{mc_price, simulate_gbm_exact, step_doubling, PathConfig};
use crate::models::{gbm, make_cev, make_cev_2d, payoff_library, CevSpec, Payoff, PayoffKind, PayoffParams};
use crate::oracles::{
    bs_call_price, cev_beta1_boundary_delta, margrabe_deltas, margrabe_price, power_option_boundary_delta,
    power_option_price, BoundaryDelta,
};
use crate::pde::{build_grid, refine_study, solve_1d, solve_2d_with_faces, Grid1D, Oracle, RefineProblem, Scheme, TimeGrid};

fn config_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(LabError::Config(msg.into()))
}

fn verdict_str(v: Verdict) -> &'static str {
    match v {
        Verdict::Finite => "finite",
        Verdict::Divergent => "divergent",
    }
}

pub fn execute(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    match cfg.kind {
        ExperimentKind::Price => price(cfg),
        ExperimentKind::Delta => delta(cfg),
        ExperimentKind::Sweep => sweep(cfg),
        ExperimentKind::GprimeCheck => gprime_check(cfg),
        ExperimentKind::Margrabe => margrabe(cfg),
        ExperimentKind::Counterexample => counterexample(cfg),
        ExperimentKind::Barrier => barrier(cfg),
        ExperimentKind::Sharpness => sharpness(cfg),
        ExperimentKind::McCrosscheck => mc_crosscheck(cfg),
        ExperimentKind::Refine => refine(cfg),
        ExperimentKind::Properties => properties(cfg),
    }
}

fn one_dimensional(m: &ModelBlock) -> Result<()> {
    if m.second.is_some() {
        return config_err("this kind needs a 1D model");
    }
    Ok(())
}

/// Truncation point from the config or from the strike and volatility.
fn xmax_for(cfg: &ExperimentConfig, payoff: &Payoff, sigma: f64, beta: f64, horizon: f64) -> Result<f64> {
    Ok(cfg.grid()?.xmax.unwrap_or_else(|| suggested_xmax(payoff.kink().unwrap_or(1.0), sigma, beta, horizon)))
}

fn resolution(cfg: &ExperimentConfig, level: usize) -> Result<Resolution> {
    let (g, t) = (cfg.grid()?, cfg.time()?);
    Ok(Resolution { m: ((g.m - 1) << level) + 1, steps: t.steps << level, grading: g.p })
}

/// Closed-form `u(x, t)` where one is available for the model/payoff pair.
fn price_oracle(model: &ModelBlock, payoff: &PayoffBlock) -> Option<Oracle> {
    let p = payoff.build().ok()?;
    let (sigma, beta) = (model.sigma, model.beta);
    match p.kind {
        PayoffKind::Affine { slope, intercept } => Some(Arc::new(move |x, _| slope * x + intercept)),
        PayoffKind::Call { strike } if beta == 2.0 => Some(Arc::new(move |x, t| bs_call_price(x, t, sigma, strike))),
        PayoffKind::CallPlusAffine { strike, slope } if beta == 2.0 => {
            Some(Arc::new(move |x, t| slope * x + bs_call_price(x, t, sigma, strike)))
        }
        // a = sigma^2 x^2 / 2 is a = x^2 on the clock sigma^2 t / 2.
        PayoffKind::Power { gamma } if beta == 2.0 => {
            Some(Arc::new(move |x, t| power_option_price(x, 0.5 * sigma * sigma * t, gamma).value))
        }
        _ => None,
    }
}

/// Closed-form `u_x(0, t)` where one is available.
fn delta_oracle(model: &ModelBlock, payoff: &Payoff, t: f64) -> Result<Option<BoundaryDelta>> {
    Ok(match payoff.kind {
        PayoffKind::Affine { slope, .. } => Some(BoundaryDelta::Finite(slope)),
        PayoffKind::Call { strike } if model.beta == 1.0 => {
            Some(BoundaryDelta::Finite(cev_beta1_boundary_delta(t, model.sigma, strike)?))
        }
        PayoffKind::Call { .. } if model.beta == 2.0 => Some(BoundaryDelta::Finite(0.0)),
        PayoffKind::CallPlusAffine { slope, .. } if model.beta == 2.0 => Some(BoundaryDelta::Finite(slope)),
        PayoffKind::Power { gamma } if model.beta == 2.0 => Some(power_option_boundary_delta(gamma)),
        _ => None,
    })
}

fn price(cfg: &ExperimentConfig) -> Result<Report> {
    let mb = cfg.model()?;
    one_dimensional(mb)?;
    let model = mb.build()?;
    let payoff = cfg.payoff()?.build()?;
    let oracle = match price_oracle(mb, cfg.payoff()?) {
        Some(o) => o,
        None => return config_err(format!("no closed-form price for {} under {}", payoff.name, model.name())),
    };
    let time = cfg.time()?;
    let xmax = xmax_for(cfg, &payoff, mb.sigma, mb.beta, time.horizon)?;
    let (grid, tg) = standard_grids(&payoff, xmax, time.horizon, resolution(cfg, 0)?)?;
    let sol = solve_1d(&model, &payoff, &grid, &tg, time.scheme())?;
    let eval_max = cfg.params.eval_max.unwrap_or(0.25 * xmax);

    let mut r = Report::new(&cfg.name, cfg.kind.as_str(), &["t", "x", "u", "exact", "rel_error"]);
    let mut worst = 0.0f64;
    for t in cfg.times()? {
        let k = tg.index_of(t).ok_or_else(|| LabError::Config(format!("time {t} is not a grid level")))?;
        let exact: Vec<(usize, f64)> = grid
            .nodes()
            .iter()
            .enumerate()
            .filter(|(_, &x)| x > 0.0 && x <= eval_max)
            .map(|(j, &x)| (j, oracle(x, t)))
            .collect();
        let scale = exact.iter().map(|e| e.1.abs()).fold(0.0, f64::max);
        for (j, e) in exact {
            let u = sol.value(k, j);
            let rel = (u - e).abs() / e.abs().max(1e-6 * scale);
            worst = worst.max(rel);
            r.row(vec![num(t), num(grid.nodes()[j]), num(u), num(e), num(rel)]);
        }
    }
    r.metric("max_rel_error", worst);
    r.check(Check::new("max_rel_error", worst, Cmp::Le, cfg.tol("rel_error")?));

    if let Some(gamma) = cfg.params.divergent_gamma {
        let p = payoff_library("power", &PayoffParams::gamma(gamma))?;
        let s = solve_1d(&model, &p, &grid, &tg, time.scheme())?;
        let est = boundary_delta(&s, time.horizon, &DeltaOptions::default())?;
        r.metric(format!("delta_gamma_{gamma}"), est.value);
        r.check(Check::flag(format!("gamma_{gamma}_divergent"), est.verdict == Verdict::Divergent));
    }
    Ok(r)
}

fn delta(cfg: &ExperimentConfig) -> Result<Report> {
    let mb = cfg.model()?;
    one_dimensional(mb)?;
    let model = mb.build()?;
    let payoff = cfg.payoff()?.build()?;
    let time = cfg.time()?;
    let abs_tol = cfg.tolerances.get("delta_error").copied();
    let rel_tol = cfg.tolerances.get("delta_rel_error").copied();
    if abs_tol.is_none() && rel_tol.is_none() {
        return config_err("delta needs `delta_error` (absolute) or `delta_rel_error` (relative)");
    }
    let xmax = xmax_for(cfg, &payoff, mb.sigma, mb.beta, time.horizon)?;
    let levels = cfg.params.refinements.unwrap_or(0) + 1;
    let times = cfg.times()?;

    let mut r = Report::new(
        &cfg.name,
        cfg.kind.as_str(),
        &["level", "m", "steps", "t", "delta", "residual", "verdict", "exact", "error"],
    );
    let per_level: Vec<Result<Vec<(f64, crate::boundary::DeltaEstimate)>>> = (0..levels)
        .into_par_iter()
        .map(|l| {
            let (grid, tg) = standard_grids(&payoff, xmax, time.horizon, resolution(cfg, l)?)?;
            let sol = solve_1d(&model, &payoff, &grid, &tg, time.scheme())?;
            times.iter().map(|&t| Ok((t, boundary_delta(&sol, t, &DeltaOptions::default())?))).collect()
        })
        .collect();
    let mut finest_errors = Vec::new();
    for (l, level) in per_level.into_iter().enumerate() {
        let res = resolution(cfg, l)?;
        let mut errs = Vec::new();
        for (t, est) in level? {
            let exact = delta_oracle(mb, &payoff, t)?;
            let error = match exact {
                Some(BoundaryDelta::Finite(e)) if est.verdict == Verdict::Finite => (est.value - e).abs(),
                Some(BoundaryDelta::Divergent) if est.verdict == Verdict::Divergent => 0.0,
                Some(_) => f64::INFINITY,
                None => f64::NAN,
            };
            let exact_s = match exact {
                Some(BoundaryDelta::Finite(e)) => num(e),
                Some(BoundaryDelta::Divergent) => "divergent".into(),
                None => String::new(),
            };
            r.row(vec![
                l.to_string(),
                res.m.to_string(),
                res.steps.to_string(),
                num(t),
                num(est.value),
                num(est.residual),
                verdict_str(est.verdict).into(),
                exact_s,
                num(error),
            ]);
            if l == levels - 1 {
                r.metric(format!("delta_t{t}"), est.value);
                match exact {
                    None => r.check(Check::flag(format!("t{t}_finite"), est.verdict == Verdict::Finite)),
                    Some(BoundaryDelta::Finite(e)) => {
                        if let Some(tol) = abs_tol {
                            r.check(Check::new(format!("abs_error_t{t}"), error, Cmp::Le, tol));
                        }
                        if let Some(tol) = rel_tol {
                            r.check(Check::new(format!("rel_error_t{t}"), error / e.abs(), Cmp::Le, tol));
                        }
                    }
                    Some(BoundaryDelta::Divergent) => r.check(Check::flag(format!("t{t}_divergent"), error == 0.0)),
                }
            }
            errs.push(error);
        }
        finest_errors.push(errs);
    }
    // Errors shrink (or stay at exactly zero) under each refinement.
    for l in 1..levels {
        for (k, &t) in times.iter().enumerate() {
            let (prev, cur) = (finest_errors[l - 1][k], finest_errors[l][k]);
            if prev.is_finite() && cur.is_finite() {
                let ok = cur < prev || (cur == 0.0 && prev == 0.0);
                r.check(Check::flag(format!("refinement_{l}_decreases_t{t}"), ok));
            }
        }
    }
    Ok(r)
}

fn sweep(cfg: &ExperimentConfig) -> Result<Report> {
    let mb = cfg.model()?;
    one_dimensional(mb)?;
    let payoff = cfg.payoff()?.build()?;
    let time = cfg.time()?;
    let betas = if cfg.params.betas.is_empty() { vec![0.0, 0.5, 1.0, 1.5] } else { cfg.params.betas.clone() };
    let rows = hopf_sweep(&betas, mb.sigma, &payoff, time.horizon, resolution(cfg, 0)?)?;
    let (margin, zero) = (cfg.tol("margin")?, cfg.tol("zero")?);
    let mut r = Report::new(&cfg.name, cfg.kind.as_str(), &["beta", "delta", "residual", "verdict"]);
    for row in rows {
        let e = &row.estimate;
        r.row(vec![num(row.beta), num(e.value), num(e.residual), verdict_str(e.verdict).into()]);
        r.metric(format!("delta_beta{}", row.beta), e.value);
        if row.beta < 2.0 {
            r.check(Check::new(format!("beta{}_delta", row.beta), e.value, Cmp::Gt, 0.0));
            r.check(Check::new(format!("beta{}_delta_over_residual", row.beta), e.value / e.residual, Cmp::Ge, margin));
        } else {
            r.check(Check::new(format!("beta{}_abs_delta", row.beta), e.value.abs(), Cmp::Le, zero));
        }
        r.check(Check::flag(format!("beta{}_finite", row.beta), e.verdict == Verdict::Finite));
    }
    Ok(r)
}

fn gprime_check(cfg: &ExperimentConfig) -> Result<Report> {
    let mb = cfg.model()?;
    one_dimensional(mb)?;
    let model = mb.build()?;
    let payoff = cfg.payoff()?.build()?;
    let time = cfg.time()?;
    let bound = cfg.params.bound.unwrap_or(0.5 * mb.sigma * mb.sigma);
    let xmax = xmax_for(cfg, &payoff, mb.sigma, mb.beta, time.horizon)?;
    let (grid, tg) = standard_grids(&payoff, xmax, time.horizon, resolution(cfg, 0)?)?;
    let tol = cfg.tol("delta_error")?;
    let rep = check_gprime_match(&model, bound, &payoff, &grid, &tg, &cfg.times()?, tol)?;
    let mut r = Report::new(&cfg.name, cfg.kind.as_str(), &["t", "delta", "gprime0", "error", "residual"]);
    for row in &rep.rows {
        r.row(vec![num(row.t), num(row.estimate.value), num(rep.gprime0), num(row.error), num(row.estimate.residual)]);
        r.metric(format!("delta_t{}", row.t), row.estimate.value);
        r.check(Check::new(format!("error_t{}", row.t), row.error, Cmp::Le, tol));
        r.check(Check::flag(format!("t{}_finite", row.t), row.estimate.verdict == Verdict::Finite));
    }
    Ok(r)
}

/// Deltas of the exchange option at `(0, x0)` in `x1` and at `(x0, 0)` in `x2`,
/// plus the price at `(x0, x0)`.
fn exchange_deltas(
    model: &crate::models::DiffusionModel,
    payoff: &Payoff,
    cfg: &ExperimentConfig,
    x0: f64,
) -> Result<(crate::boundary::DeltaEstimate, crate::boundary::DeltaEstimate, f64)> {
    let (g, time) = (cfg.grid()?, cfg.time()?);
    let grid = Grid1D::with_node_at(g.xmax.unwrap_or(4.0 * x0), g.m, g.p, x0)?;
    let tg = TimeGrid::uniform(time.horizon, time.steps)?;
    let t = time.horizon;
    let sol = solve_2d_with_faces(model, payoff, &grid, &grid, &tg, time.scheme(), &[t])?;
    let j = grid.index_of(x0).expect("grid anchored at x0");
    let opts = DeltaOptions::default();
    let missing = || LabError::Parameter("snapshot missing".into());
    let d1 = boundary_delta_on_nodes(grid.nodes(), &sol.line_x1(t, j).ok_or_else(missing)?, &opts)?;
    let d2 = boundary_delta_on_nodes(grid.nodes(), &sol.line_x2(t, j).ok_or_else(missing)?, &opts)?;
    Ok((d1, d2, sol.value(t, j, j).ok_or_else(missing)?))
}

fn margrabe(cfg: &ExperimentConfig) -> Result<Report> {
    let mb = cfg.model()?;
    let second = mb.second.ok_or_else(|| LabError::Config("margrabe needs [model.second]".into()))?;
    if mb.beta != 2.0 || second.beta != 2.0 {
        return config_err("the closed-form exchange price needs GBM coordinates (beta = 2)");
    }
    let model = mb.build()?;
    let payoff = cfg.payoff()?.build()?;
    if !matches!(payoff.kind, PayoffKind::Exchange) {
        return config_err("margrabe needs the exchange payoff");
    }
    let x0 = cfg.params.x0.unwrap_or(1.0);
    let t = cfg.time()?.horizon;
    let (d1, d2, p) = exchange_deltas(&model, &payoff, cfg, x0)?;
    let exact_p = margrabe_price(x0, x0, t, mb.sigma, second.sigma);
    let (e1, _) = margrabe_deltas(0.0, x0, t, mb.sigma, second.sigma);
    let (_, e2) = margrabe_deltas(x0, 0.0, t, mb.sigma, second.sigma);

    let mut r = Report::new(&cfg.name, cfg.kind.as_str(), &["model", "quantity", "value", "exact", "residual"]);
    r.row(vec!["gbm".into(), "price".into(), num(p), num(exact_p), String::new()]);
    r.row(vec!["gbm".into(), "delta_x1_at_x1=0".into(), num(d1.value), num(e1), num(d1.residual)]);
    r.row(vec!["gbm".into(), "delta_x2_at_x2=0".into(), num(d2.value), num(e2), num(d2.residual)]);
    r.metric("gbm_delta1", d1.value);
    r.metric("gbm_delta2", d2.value);
    r.metric("gbm_price", p);
    r.check(Check::new("price_rel_error", (p / exact_p - 1.0).abs(), Cmp::Le, cfg.tol("price_rel")?));
    r.check(Check::new("delta1_error", (d1.value - e1).abs(), Cmp::Le, cfg.tol("delta1")?));
    r.check(Check::new("delta2_error", (d2.value - e2).abs(), Cmp::Le, cfg.tol("delta2")?));

    if let Some(s) = cfg.params.cev_variant_sigma {
        let cev = make_cev_2d(CevSpec::new(s, 1.0)?, CevSpec::new(s, 1.0)?)?;
        let (c1, c2, cp) = exchange_deltas(&cev, &payoff, cfg, x0)?;
        r.row(vec!["cev1".into(), "price".into(), num(cp), String::new(), String::new()]);
        r.row(vec!["cev1".into(), "delta_x1_at_x1=0".into(), num(c1.value), String::new(), num(c1.residual)]);
        r.row(vec!["cev1".into(), "delta_x2_at_x2=0".into(), num(c2.value), String::new(), num(c2.residual)]);
        r.metric("cev1_delta1", c1.value);
        r.metric("cev1_delta2", c2.value);
        r.check(Check::new("cev1_delta1", c1.value, Cmp::Gt, -1.0 + cfg.tol("cev_delta1_gap")?));
        r.check(Check::new("cev1_delta2", c2.value, Cmp::Gt, cfg.tol("cev_delta2_min")?));
    }
    Ok(r)
}

fn counterexample(cfg: &ExperimentConfig) -> Result<Report> {
    let (g, time) = (cfg.grid()?, cfg.time()?);
    let t0 = cfg.params.t0.unwrap_or(0.5);
    let grid = build_grid(g.xmax.unwrap_or(8.0), g.m, g.p)?;
    let tg = TimeGrid::uniform(time.horizon, time.steps)?;
    let after_t = t0 + 0.05;
    if tg.index_of(after_t).is_none() {
        return config_err(format!("t0 + 0.05 = {after_t} must be a time level"));
    }
    let ex = build_patched_counterexample(t0, &grid, &tg)?;
    let mut r = Report::new(&cfg.name, cfg.kind.as_str(), &["t", "delta", "residual", "piece"]);
    let mut before = 0.0f64;
    for (t, e) in ex.curve.times.iter().zip(&ex.curve.estimates) {
        let piece = if *t < t0 { "v" } else { "w" };
        r.row(vec![num(*t), num(e.value), num(e.residual), piece.into()]);
        if *t >= 0.5 * t0 && *t < t0 {
            before = before.max(e.value.abs());
        }
    }
    let after = ex.delta_at(after_t).unwrap_or(f64::NAN);
    let resid = ex.max_exact_residual();
    r.metric("max_abs_delta_before_t0", before);
    r.metric("delta_after_t0", after);
    r.metric("exact_residual", resid);
    r.metric("c_const", ex.c_const);
    r.check(Check::new("max_abs_delta_before_t0", before, Cmp::Le, cfg.tol("before")?));
    r.check(Check::new("delta_at_t0_plus_0.05", after, Cmp::Ge, cfg.tol("after_min")?));
    r.check(Check::new("exact_residual", resid, Cmp::Le, cfg.tol("exact_residual")?));
    r.check(Check::flag("jumps_upward_only", ex.curve.upward_only() && !ex.curve.jumps.is_empty()));
    Ok(r)
}

fn barrier(cfg: &ExperimentConfig) -> Result<Report> {
    let mb = cfg.model()?;
    one_dimensional(mb)?;
    let c = mb.lower_constant();
    let betas = if cfg.params.betas.is_empty() { vec![mb.beta] } else { cfg.params.betas.clone() };
    let tol = cfg.tol("residual")?;
    let defaults = SearchOptions::default();
    let opts = SearchOptions {
        density: cfg.params.density.unwrap_or(defaults.density),
        eta_start: cfg.params.eta.unwrap_or(defaults.eta_start),
        max_halvings: cfg.params.max_halvings.unwrap_or(defaults.max_halvings),
        ..defaults
    };
    let mut r = Report::new(
        &cfg.name,
        cfg.kind.as_str(),
        &["certificate", "beta", "epsilon", "N", "eta", "t0", "min_residual", "samples", "passed"],
    );
    let reports: Vec<Result<_>> = betas
        .par_iter()
        .map(|&beta| {
            let model = make_cev(mb.sigma, beta)?;
            let params = match (cfg.params.epsilon, cfg.params.n_exp) {
                (None, None) => auto_params(beta, c)?,
                (eps, n) => {
                    let (e0, n0) = choose_barrier_params(beta).unwrap_or((0.25, 1));
                    BarrierParams {
                        beta,
                        c,
                        epsilon: eps.unwrap_or(e0),
                        n_exp: n.unwrap_or(n0),
                        eta: opts.eta_start,
                        point: vec![],
                        t0: 1.0,
                    }
                }
            };
            verify_barrier_degenhopf(&model, &params, &opts)
        })
        .collect();
    for rep in reports {
        let rep = rep?;
        let p = &rep.params;
        r.row(vec![
            "barrier".into(),
            num(p.beta),
            num(p.epsilon),
            p.n_exp.to_string(),
            num(p.eta),
            num(p.t0),
            num(rep.min_residual),
            rep.samples.to_string(),
            rep.passed.to_string(),
        ]);
        r.metric(format!("eta_beta{}", p.beta), p.eta);
        r.check(Check::new(format!("beta{}_min_residual", p.beta), rep.min_residual, Cmp::Ge, -tol));
        r.check(Check::flag(format!("beta{}_certified", p.beta), rep.passed));
    }

    if let Some(cn) = cfg.params.neghopf_c {
        let eps = cfg.params.neghopf_epsilon.unwrap_or(0.1);
        let n = cfg.params.neghopf_n.unwrap_or(2);
        let payoff = match &cfg.payoff {
            Some(p) => p.build()?,
            None => payoff_library("call", &PayoffParams::strike(1.0))?,
        };
        let model = gbm((2.0 * cn).sqrt())?;
        let rep = verify_supersolution_neghopf(cn, Some(&model), &payoff, eps, n, &NeghopfOptions::default())?;
        let expected = neghopf_t0(cn, n);
        r.row(vec![
            "supersolution".into(),
            "2".into(),
            num(eps),
            n.to_string(),
            String::new(),
            num(rep.t0),
            num(rep.min_residual),
            String::new(),
            rep.passed().to_string(),
        ]);
        r.metric("neghopf_t0", rep.t0);
        r.metric("neghopf_c1", rep.c1);
        r.check(Check::flag("supersolution_certified", rep.passed()));
        r.check(Check::flag("supersolution_t0_exact", rep.t0 == expected && expected == 1.0 / (2.0 * cn * ((n * n - n) as f64))));
    }
    if cfg.params.sharpness {
        sharpness_rows(&mut r, tol);
    }
    Ok(r)
}

fn sharpness_rows(r: &mut Report, tol: f64) {
    let rep = sharpness_residuals();
    for row in &rep.rows {
        r.row(vec![
            "sharpness".into(),
            num(row.beta),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
            num(row.drift_residual.max(row.reaction_residual)),
            rep.samples.to_string(),
            (row.drift_residual.max(row.reaction_residual) <= tol).to_string(),
        ]);
    }
    r.metric("sharpness_max_residual", rep.max_residual());
    r.check(Check::new("sharpness_max_residual", rep.max_residual(), Cmp::Le, tol));
    r.check(Check::flag("sharpness_bounds_fail", rep.bounds_fail()));
}

fn sharpness(cfg: &ExperimentConfig) -> Result<Report> {
    let mut r = Report::new(
        &cfg.name,
        cfg.kind.as_str(),
        &["certificate", "beta", "epsilon", "N", "eta", "t0", "min_residual", "samples", "passed"],
    );
    sharpness_rows(&mut r, cfg.tol("residual")?);
    Ok(r)
}

fn mc_crosscheck(cfg: &ExperimentConfig) -> Result<Report> {
    let payoff = cfg.payoff()?.build()?;
    if payoff.dim != 1 {
        return config_err("mc-crosscheck needs a 1D payoff");
    }
    let time = cfg.time()?;
    let x0 = cfg.params.x0.unwrap_or(1.0);
    let paths = cfg.params.paths.unwrap_or(1_000_000);
    let steps = cfg.params.mc_steps.unwrap_or(2048);
    let k = cfg.tol("se_multiple")?;
    let cases: Vec<(f64, f64)> = match &cfg.model {
        _ if !cfg.params.betas.is_empty() => cfg.params.betas.iter().copied().zip(cfg.params.sigmas.iter().copied()).collect(),
        Some(m) => vec![(m.beta, m.sigma)],
        None => return config_err("mc-crosscheck needs a [model] block or `betas`/`sigmas`"),
    };
    let mut r = Report::new(
        &cfg.name,
        cfg.kind.as_str(),
        &["beta", "sigma", "pde", "mc", "std_error", "allowance", "absorbed_fraction", "abs_diff"],
    );
    for (beta, sigma) in cases {
        let model = make_cev(sigma, beta)?;
        let xmax = xmax_for(cfg, &payoff, sigma, beta, time.horizon)?;
        let (grid, tg) = standard_grids(&payoff, xmax, time.horizon, resolution(cfg, 0)?)?;
        let sol = solve_1d(&model, &payoff, &grid, &tg, time.scheme())?;
        let pde = sol.interpolate(tg.steps(), x0);
        let pc = PathConfig::new(paths, steps, cfg.seed, time.horizon)?;
        let (est, allowance) = if beta == 2.0 {
            (mc_price(&payoff, &simulate_gbm_exact(x0, sigma, time.horizon, &pc)?)?, 0.0)
        } else {
            let sd = step_doubling(&payoff, x0, sigma, beta, time.horizon, &pc)?;
            (sd.fine, sd.allowance)
        };
        let diff = (pde - est.mean).abs();
        r.row(vec![
            num(beta),
            num(sigma),
            num(pde),
            num(est.mean),
            num(est.std_error),
            num(allowance),
            num(est.absorbed_fraction),
            num(diff),
        ]);
        r.metric(format!("mc_beta{beta}"), est.mean);
        r.metric(format!("pde_beta{beta}"), pde);
        r.check(Check::new(format!("beta{beta}_abs_diff"), diff, Cmp::Le, k * est.std_error + allowance));
    }
    Ok(r)
}

fn refine(cfg: &ExperimentConfig) -> Result<Report> {
    let mb = cfg.model()?;
    one_dimensional(mb)?;
    let payoff = cfg.payoff()?.build()?;
    let (g, time) = (cfg.grid()?, cfg.time()?);
    let problem = RefineProblem {
        model: mb.build()?,
        xmax: xmax_for(cfg, &payoff, mb.sigma, mb.beta, time.horizon)?,
        payoff,
        m0: g.m,
        grading: g.p,
        horizon: time.horizon,
        steps0: time.steps,
        scheme: time.scheme(),
        probes: vec![cfg.params.x0.unwrap_or(1.0)],
        oracle: price_oracle(mb, cfg.payoff()?),
        relative: false,
    };
    let levels = cfg.params.refinements.unwrap_or(2) + 1;
    let table = refine_study(&problem, levels)?;
    let mut r = Report::new(&cfg.name, cfg.kind.as_str(), &["level", "m", "steps", "value", "error_vs_oracle", "error_vs_finer", "order"]);
    for (l, lv) in table.levels.iter().enumerate() {
        let order = if l == 0 { String::new() } else { num(table.orders[l - 1]) };
        r.row(vec![
            l.to_string(),
            lv.m.to_string(),
            lv.steps.to_string(),
            num(lv.values[0]),
            lv.error_vs_oracle.map(num).unwrap_or_default(),
            lv.error_vs_finer.map(num).unwrap_or_default(),
            order,
        ]);
    }
    let order = table.observed_order().unwrap_or(f64::NAN);
    r.metric("observed_order", order);
    r.check(Check::new("observed_order", order, Cmp::Ge, cfg.tol("min_order")?));
    Ok(r)
}

/// Default parameters of the payoff tags in the property matrix.
fn matrix_payoff(tag: &str) -> Result<Payoff> {
    let p = match tag {
        "call" => PayoffParams::strike(1.0),
        "power" => PayoffParams::gamma(2.0),
        "affine" => PayoffParams { slope: Some(2.0), intercept: Some(3.0), ..Default::default() },
        "call-plus-affine" => PayoffParams { strike: Some(1.0), slope: Some(2.0), ..Default::default() },
        other => return config_err(format!("payoff `{other}` is not in the 1D property matrix")),
    };
    payoff_library(tag, &p)
}

/// Outcome of the structural checks for one model/payoff pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropertyOutcome {
    /// Largest `u1 - u2` for payoffs `g <= g + (x - 1/2)^+ / 2`.
    pub comparison: f64,
    /// Largest slope decrease between neighbouring cells (0 for nonconvex payoffs).
    pub convexity: f64,
    /// Largest decrease in time at a fixed node (0 for nonconvex payoffs).
    pub monotonicity: f64,
    /// Largest deviation from the payoff (affine payoffs only, else 0).
    pub affine: f64,
}

/// Structural checks on nodes `x <= window`; nodes beyond feel the truncation.
pub fn property_outcome(
    model: &crate::models::DiffusionModel,
    payoff: &Payoff,
    grid: &Grid1D,
    tg: &TimeGrid,
    window: f64,
) -> Result<PropertyOutcome> {
    let sol = solve_1d(model, payoff, grid, tg, Scheme::implicit())?;
    let g = payoff.clone();
    let upper = Payoff::custom("g+", 1, payoff.growth_degree, payoff.is_convex, None, move |x| {
        g.eval(x) + 0.5 * (x[0] - 0.5).max(0.0)
    });
    let sol_up = solve_1d(model, &upper, grid, tg, Scheme::implicit())?;
    let x = grid.nodes();
    let inner = x.iter().take_while(|&&v| v <= window).count().max(3).min(x.len());
    let mut out = PropertyOutcome { comparison: f64::NEG_INFINITY, convexity: 0.0, monotonicity: 0.0, affine: 0.0 };
    for k in 0..sol.levels() {
        let (u, w) = (sol.row(k), sol_up.row(k));
        for j in 0..inner {
            out.comparison = out.comparison.max(u[j] - w[j]);
        }
        if payoff.is_convex {
            for j in 1..inner - 1 {
                let left = (u[j] - u[j - 1]) / (x[j] - x[j - 1]);
                let right = (u[j + 1] - u[j]) / (x[j + 1] - x[j]);
                out.convexity = out.convexity.max(left - right);
            }
            if k > 0 {
                let prev = sol.row(k - 1);
                for j in 0..inner {
                    out.monotonicity = out.monotonicity.max(prev[j] - u[j]);
                }
            }
        }
        if matches!(payoff.kind, PayoffKind::Affine { .. }) {
            for j in 0..x.len() {
                out.affine = out.affine.max((u[j] - payoff.eval1(x[j])).abs());
            }
        }
    }
    Ok(out)
}

fn properties(cfg: &ExperimentConfig) -> Result<Report> {
    let (g, time) = (cfg.grid()?, cfg.time()?);
    let betas = if cfg.params.betas.is_empty() { vec![0.0, 0.5, 1.0, 1.5, 2.0] } else { cfg.params.betas.clone() };
    let sigmas = if cfg.params.sigmas.is_empty() { vec![1.0] } else { cfg.params.sigmas.clone() };
    let tags: Vec<String> = if cfg.params.payoffs.is_empty() {
        ["call", "power", "affine", "call-plus-affine"].iter().map(|s| s.to_string()).collect()
    } else {
        cfg.params.payoffs.clone()
    };
    let xmax = g.xmax.unwrap_or(8.0);
    let window = cfg.params.eval_max.unwrap_or(0.5 * xmax);
    let tg = TimeGrid::uniform(time.horizon, time.steps)?;
    let mut combos = Vec::new();
    for &s in &sigmas {
        for &b in &betas {
            for tag in &tags {
                combos.push((s, b, tag.clone()));
            }
        }
    }
    let outcomes: Vec<Result<PropertyOutcome>> = combos
        .par_iter()
        .map(|(s, b, tag)| {
            let payoff = matrix_payoff(tag)?;
            let grid = match payoff.kink() {
                Some(k) => Grid1D::with_node_at(xmax, g.m, g.p, k)?,
                None => build_grid(xmax, g.m, g.p)?,
            };
            property_outcome(&make_cev(*s, *b)?, &payoff, &grid, &tg, window)
        })
        .collect();
    let mut r = Report::new(
        &cfg.name,
        cfg.kind.as_str(),
        &["sigma", "beta", "payoff", "comparison", "convexity", "monotonicity", "affine"],
    );
    let mut worst = PropertyOutcome { comparison: f64::NEG_INFINITY, convexity: 0.0, monotonicity: 0.0, affine: 0.0 };
    for ((s, b, tag), o) in combos.iter().zip(outcomes) {
        let o = o?;
        r.row(vec![num(*s), num(*b), tag.clone(), num(o.comparison), num(o.convexity), num(o.monotonicity), num(o.affine)]);
        worst.comparison = worst.comparison.max(o.comparison);
        worst.convexity = worst.convexity.max(o.convexity);
        worst.monotonicity = worst.monotonicity.max(o.monotonicity);
        worst.affine = worst.affine.max(o.affine);
    }
    r.metric("combinations", combos.len() as f64);
    r.check(Check::new("combinations", combos.len() as f64, Cmp::Ge, 12.0));
    r.check(Check::new("comparison", worst.comparison, Cmp::Le, cfg.tol("comparison")?));
    r.check(Check::new("convexity", worst.convexity, Cmp::Le, cfg.tol("convexity")?));
    r.check(Check::new("monotonicity", worst.monotonicity, Cmp::Le, cfg.tol("monotonicity")?));
    r.check(Check::new("affine", worst.affine, Cmp::Le, cfg.tol("affine")?));
    Ok(r)
}
