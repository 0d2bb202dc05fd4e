//! Direct evaluation of the closed-form oracles by name.

use std::collections::BTreeMap;

use crate::error::{LabError, Result};
use crate::oracles::{
    bs_call_delta, bs_call_price, cev_beta1_boundary_delta, margrabe_deltas, margrabe_price, norm_cdf,
    power_option_boundary_delta, power_option_price, BoundaryDelta,
};

pub const ORACLE_NAMES: &[&str] =
    &["norm-cdf", "bs-call", "bs-delta", "cev1-delta", "power", "power-delta", "margrabe", "margrabe-deltas"];

/// Evaluates the named oracle with `key=value` parameters; missing keys are
/// errors, extra keys are ignored. Returns named outputs.
pub fn evaluate_oracle(name: &str, params: &BTreeMap<String, f64>) -> Result<Vec<(String, f64)>> {
    let get = |k: &str| {
        params.get(k).copied().ok_or_else(|| LabError::Parameter(format!("oracle `{name}` needs `{k}=<value>`")))
    };
    let one = |k: &str, v: f64| Ok(vec![(k.to_string(), v)]);
    match name {
        "norm-cdf" => one("phi", norm_cdf(get("z")?)),
        "bs-call" => one("price", bs_call_price(get("x")?, get("t")?, get("sigma")?, get("strike")?)),
        "bs-delta" => one("delta", bs_call_delta(get("x")?, get("t")?, get("sigma")?, get("strike")?)),
        "cev1-delta" => one("delta0", cev_beta1_boundary_delta(get("t")?, get("sigma")?, get("strike")?)?),
        "power" => one("price", power_option_price(get("x")?, get("t")?, get("gamma")?).value),
        "power-delta" => match power_option_boundary_delta(get("gamma")?) {
            BoundaryDelta::Finite(v) => one("delta0", v),
            BoundaryDelta::Divergent => one("delta0", f64::INFINITY),
        },
        "margrabe" => one("price", margrabe_price(get("x1")?, get("x2")?, get("t")?, get("sigma1")?, get("sigma2")?)),
        "margrabe-deltas" => {
            let (d1, d2) = margrabe_deltas(get("x1")?, get("x2")?, get("t")?, get("sigma1")?, get("sigma2")?);
            Ok(vec![("delta1".into(), d1), ("delta2".into(), d2)])
        }
        other => Err(LabError::Parameter(format!("unknown oracle `{other}`; known: {}", ORACLE_NAMES.join(", ")))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(kv: &[(&str, f64)]) -> BTreeMap<String, f64> {
        kv.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn evaluates_by_name() {
        let v = evaluate_oracle("bs-call", &p(&[("x", 1.0), ("t", 1.0), ("sigma", 0.2), ("strike", 1.0)])).unwrap();
        assert!((v[0].1 - 0.079_655_7).abs() < 1e-7);
        let v = evaluate_oracle("power-delta", &p(&[("gamma", 0.5)])).unwrap();
        assert!(v[0].1.is_infinite());
    }

    #[test]
    fn reports_missing_and_unknown() {
        assert!(evaluate_oracle("bs-call", &p(&[("x", 1.0)])).is_err());
        assert!(evaluate_oracle("digital", &p(&[])).is_err());
    }
}
