//! Randomized invariants across the library.

use proptest::prelude::*;

use hopf_lab::barrier::{auto_params, choose_barrier_params, neghopf_t0, BarrierParams};
use hopf_lab::boundary::{boundary_delta_fn, check_transition, BumpTransition, DeltaOptions, Transition, Verdict};
use hopf_lab::mc::{simulate_cev_euler_absorbed, simulate_gbm_exact, PathConfig};
use hopf_lab::models::{make_cev, payoff_library, validate_hypothesis, PayoffParams, SampleGrid};
use hopf_lab::oracles::{bs_call_price, cev_beta1_boundary_delta, margrabe_price, norm_cdf, power_option_price};
use hopf_lab::pde::{build_grid, solve_1d, Scheme, TimeGrid};
use hopf_lab::runner::property_outcome;

fn pde_cases() -> ProptestConfig {
    ProptestConfig { cases: 24, failure_persistence: None, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 256, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn norm_cdf_symmetric_and_monotone(z in -30.0f64..30.0, dz in 0.0f64..5.0) {
        prop_assert!((norm_cdf(-z) - (1.0 - norm_cdf(z))).abs() <= 1e-15);
        prop_assert!(norm_cdf(z + dz) >= norm_cdf(z));
    }

    #[test]
    fn bs_call_within_no_arbitrage_bounds(x in 0.01f64..5.0, t in 0.01f64..3.0, sigma in 0.05f64..2.0, k in 0.1f64..3.0) {
        let c = bs_call_price(x, t, sigma, k);
        prop_assert!(c >= (x - k).max(0.0) - 1e-12 && c <= x + 1e-12);
        prop_assert!(bs_call_price(x, t * 1.5, sigma, k) >= c - 1e-12);
    }

    #[test]
    fn bs_call_convex_in_spot(x in 0.05f64..4.0, h in 1e-3f64..0.05, t in 0.05f64..2.0) {
        let c = |x| bs_call_price(x, t, 0.3, 1.0);
        prop_assert!(c(x - h.min(x)) - 2.0 * c(x) + c(x + h.min(x)) >= -1e-10);
    }

    #[test]
    fn margrabe_affine_shift_dominates_both(x1 in 0.1f64..3.0, x2 in 0.1f64..3.0, t in 0.05f64..2.0, s1 in 0.05f64..1.0, s2 in 0.05f64..1.0) {
        // (x2 - x1)^+ + x1 = max(x1, x2), and E max(X1, X2) >= max(x1, x2).
        let m = margrabe_price(x1, x2, t, s1, s2) + x1;
        prop_assert!(m >= x1.max(x2) - 1e-12);
        prop_assert!(m <= x1 + x2 + 1e-12);
    }

    #[test]
    fn cev_delta_in_unit_interval_and_increasing(t in 0.05f64..5.0, dt in 0.01f64..1.0, sigma in 0.5f64..3.0) {
        let a = cev_beta1_boundary_delta(t, sigma, 1.0).unwrap();
        let b = cev_beta1_boundary_delta(t + dt, sigma, 1.0).unwrap();
        prop_assert!(a > 0.0 && a < 1.0 && b > a);
    }

    #[test]
    fn power_price_solves_equation(x in 0.2f64..3.0, t in 0.0f64..1.0, gamma in 0.3f64..3.0) {
        // Exact derivatives: u_t = (gamma^2 - gamma) u and x^2 u_xx = gamma (gamma - 1) u.
        let u = power_option_price(x, t, gamma).value;
        let ut = (gamma * gamma - gamma) * u;
        let uxx = gamma * (gamma - 1.0) * u / (x * x);
        prop_assert!((ut - x * x * uxx).abs() <= 1e-9 * u.max(1.0));
        // Central differences agree with the closed form.
        let h = 1e-4;
        let p = |x: f64, t: f64| power_option_price(x, t, gamma).value;
        let fd = (p(x, t + h) - p(x, t - h)) / (2.0 * h) - x * x * (p(x + h, t) - 2.0 * u + p(x - h, t)) / (h * h);
        prop_assert!(fd.abs() <= 1e-5 * u.max(1.0));
    }

    #[test]
    fn cev_coefficient_meets_lower_bound_with_equality(sigma in 0.1f64..5.0, beta in 0.0f64..1.99, x in 0.0f64..10.0, t in 0.0f64..2.0) {
        let m = make_cev(sigma, beta).unwrap();
        let bound = 0.5 * sigma * sigma * x.powf(beta);
        prop_assert!((m.a(0, x, t) - bound).abs() <= 1e-12 * bound.max(1.0));
        prop_assert_eq!(m.alpha(0, 0.0, t), 0.0);
    }

    #[test]
    fn convex_payoffs_have_nonnegative_second_differences(x in 0.0f64..8.0, h in 1e-4f64..2.0, k in 0.2f64..3.0, gamma in 1.0f64..3.0) {
        for g in [
            payoff_library("call", &PayoffParams::strike(k)).unwrap(),
            payoff_library("power", &PayoffParams::gamma(gamma)).unwrap(),
        ] {
            prop_assert!(g.is_convex);
            let x = x + h;
            prop_assert!(g.eval1(x - h) - 2.0 * g.eval1(x) + g.eval1(x + h) >= -1e-12 * g.eval1(x + h).max(1.0));
        }
    }

    #[test]
    fn barrier_rule_and_boundary_point(beta in 0.0f64..1.99, c in 0.1f64..5.0) {
        let (eps, n) = choose_barrier_params(beta).unwrap();
        let p = auto_params(beta, c).unwrap();
        prop_assert!(p.rule_holds());
        prop_assert!(beta + eps - 1.0 < (n as f64 - 1.0) / n as f64);
        // N is the smallest admissible power of two.
        if n > 1 {
            let m = (n / 2) as f64;
            prop_assert!(beta + eps - 1.0 >= (m - 1.0) / m);
        }
        prop_assert_eq!(p.value(&[0.0], p.t0), 0.0);
        prop_assert_eq!(p.dx1(0.0), 1.0);
    }

    #[test]
    fn supersolution_step_formula(c in 0.1f64..10.0, k in 1u32..6) {
        let n = 1u32 << k;
        let t0 = neghopf_t0(c, n);
        prop_assert!((2.0 * c * ((n * n - n) as f64) * t0 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn transition_is_zero_then_linear(y in 0.0f64..4.0) {
        let h = BumpTransition::default();
        prop_assert!(h.h(y) >= 0.0 && h.dh(y) >= 0.0 && h.dh(y) <= 1.0);
        if y >= 1.0 {
            prop_assert!((h.dh(y) - 1.0).abs() < 1e-12);
        }
    }

    // Spacings shrink by 4, so quotients of x^gamma grow by 4^(1 - gamma);
    // the 1.5 ratio test resolves gamma < 1 - log_4 1.5 ~ 0.71.
    #[test]
    fn fractional_powers_have_divergent_boundary_delta(gamma in 0.05f64..0.7) {
        let est = boundary_delta_fn(|x| x.powf(gamma), &DeltaOptions::default()).unwrap();
        prop_assert_eq!(est.verdict, Verdict::Divergent);
    }

    #[test]
    fn cev_models_satisfy_hypotheses(sigma in 0.05f64..10.0, beta in 0.0f64..2.0) {
        let m = make_cev(sigma, beta).unwrap();
        prop_assert!(validate_hypothesis(&m, &SampleGrid::default_for(10.0, 1.0)).passed());
    }
}

proptest! {
    #![proptest_config(pde_cases())]

    #[test]
    fn solver_preserves_structure(sigma in 0.2f64..2.0, beta in 0.0f64..2.0, k in 0.5f64..2.0) {
        let model = make_cev(sigma, beta).unwrap();
        let call = payoff_library("call", &PayoffParams::strike(k)).unwrap();
        let grid = build_grid(8.0, 121, 2.0).unwrap();
        let tg = TimeGrid::uniform(0.5, 40).unwrap();
        let out = property_outcome(&model, &call, &grid, &tg, 4.0).unwrap();
        prop_assert!(out.comparison <= 1e-10, "comparison {}", out.comparison);
        prop_assert!(out.convexity <= 1e-8, "convexity {}", out.convexity);
        prop_assert!(out.monotonicity <= 1e-8, "monotonicity {}", out.monotonicity);
    }

    #[test]
    fn affine_payoffs_are_stationary(sigma in 0.2f64..3.0, beta in 0.0f64..2.0, slope in 0.0f64..3.0, intercept in 0.0f64..3.0) {
        let model = make_cev(sigma, beta).unwrap();
        let g = payoff_library("affine", &PayoffParams { slope: Some(slope), intercept: Some(intercept), ..Default::default() }).unwrap();
        let grid = build_grid(8.0, 81, 2.0).unwrap();
        let tg = TimeGrid::uniform(1.0, 20).unwrap();
        for scheme in [Scheme::implicit(), Scheme::crank_nicolson()] {
            let sol = solve_1d(&model, &g, &grid, &tg, scheme).unwrap();
            for (x, u) in grid.nodes().iter().zip(sol.final_row()) {
                prop_assert!((u - (slope * x + intercept)).abs() <= 1e-12 * (1.0 + slope * x + intercept));
            }
        }
    }

    #[test]
    fn gbm_mean_is_martingale(x0 in 0.5f64..2.0, sigma in 0.1f64..0.6, seed in 0u64..1000) {
        let cfg = PathConfig::new(20_000, 1, seed, 1.0).unwrap();
        let s = simulate_gbm_exact(x0, sigma, 1.0, &cfg).unwrap();
        let se = x0 * ((sigma * sigma).exp() - 1.0).sqrt() / (cfg.n_paths as f64).sqrt();
        prop_assert!((s.mean(0) - x0).abs() <= 4.0 * se);
    }

    #[test]
    fn simulation_is_deterministic(seed in 0u64..10_000, beta in 0.0f64..2.0) {
        let cfg = PathConfig::new(3000, 16, seed, 1.0).unwrap();
        let a = simulate_cev_euler_absorbed(1.0, 1.0, beta, 1.0, &cfg).unwrap();
        let b = simulate_cev_euler_absorbed(1.0, 1.0, beta, 1.0, &cfg).unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn default_transition_has_required_shape() {
    assert!(check_transition(&BumpTransition::default()).is_empty());
}

#[test]
fn illegal_barrier_parameters_break_the_rule() {
    let p = BarrierParams { beta: 1.5, c: 2.0, epsilon: 0.4, n_exp: 2, eta: 0.5, point: vec![], t0: 1.0 };
    assert!(!p.rule_holds());
}

#[test]
fn absorption_monotone_in_start_and_horizon() {
    // Common random numbers make the ordering hold pathwise up to the grid.
    let frac = |x0: f64, t: f64| {
        let cfg = PathConfig::new(20_000, 64, 11, t).unwrap();
        simulate_cev_euler_absorbed(x0, 1.0, 1.0, t, &cfg).unwrap().absorbed_fraction()
    };
    let xs = [0.25, 0.5, 1.0];
    let ts = [0.25, 0.5, 1.0];
    let table: Vec<Vec<f64>> = xs.iter().map(|&x| ts.iter().map(|&t| frac(x, t)).collect()).collect();
    for i in 0..3 {
        for j in 0..3 {
            if i + 1 < 3 {
                assert!(table[i + 1][j] <= table[i][j] + 0.01, "{table:?}");
            }
            if j + 1 < 3 {
                assert!(table[i][j + 1] >= table[i][j] - 0.01, "{table:?}");
            }
        }
    }
}

#[test]
fn euler_cev_mean_near_start() {
    let cfg = PathConfig::new(100_000, 256, 3, 1.0).unwrap();
    let s = simulate_cev_euler_absorbed(1.0, 1.0, 1.0, 1.0, &cfg).unwrap();
    // Var X(T) = sigma^2 x0 T for the driftless square-root process.
    let se = (1.0f64 / cfg.n_paths as f64).sqrt();
    assert!((s.mean(0) - 1.0).abs() <= 4.0 * se + 0.01, "{}", s.mean(0));
}
