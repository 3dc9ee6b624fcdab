//! PAC-Bayes bound evaluators.
//!
//! Every evaluator takes empirical ingredients and returns a [`BoundReport`]
//! that records them next to the value, so a report can be re-checked
//! without the run that produced it.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

const KL_INV_MAX_ITER: usize = 200;

/// Named bound value plus every ingredient that went into it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub name: String,
    pub value: f64,
    pub ingredients: BTreeMap<String, f64>,
    pub valid: bool,
}

impl BoundReport {
    fn new(name: &str, value: f64, ingredients: &[(&str, f64)]) -> Self {
        Self {
            name: name.to_string(),
            value,
            ingredients: ingredients.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            valid: value.is_finite(),
        }
    }

    pub fn ingredient(&self, key: &str) -> Option<f64> {
        self.ingredients.get(key).copied()
    }
}

/// Binary KL divergence `kl(q‖p)` with `0·ln 0 = 0`.
pub fn kl_bernoulli(q: f64, p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&q) {
        return Err(invalid(format!("kl: q = {q} outside [0, 1]")));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid(format!("kl: p = {p} outside [0, 1]")));
    }
    if p == 0.0 || p == 1.0 {
        return if q == p {
            Ok(0.0)
        } else {
            Err(invalid(format!("kl: p = {p} on the boundary with q = {q}")))
        };
    }
    Ok(kl_interior(q, p))
}

#[inline]
fn kl_interior(q: f64, p: f64) -> f64 {
    let a = if q > 0.0 { q * (q / p).ln() } else { 0.0 };
    let b = if q < 1.0 { (1.0 - q) * ((1.0 - q) / (1.0 - p)).ln() } else { 0.0 };
    (a + b).max(0.0)
}

/// Largest `p ∈ [q, 1]` with `kl(q‖p) ≤ eps`, by bisection down to
/// adjacent floats.
pub fn kl_inverse_upper(q: f64, eps: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&q) {
        return Err(invalid(format!("kl inverse: q = {q} outside [0, 1]")));
    }
    if !(eps >= 0.0) {
        return Err(invalid(format!("kl inverse: eps = {eps} must be >= 0")));
    }
    if q == 1.0 || eps == f64::INFINITY {
        return Ok(1.0);
    }
    if eps == 0.0 {
        return Ok(q);
    }
    let (mut lo, mut hi) = (q, 1.0);
    for _ in 0..KL_INV_MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if kl_interior(q, mid) <= eps {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

fn check_unit(name: &str, x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(invalid(format!("{name} = {x} outside [0, 1]")))
    }
}

fn check_kl(kl: f64) -> Result<()> {
    if kl >= 0.0 && kl.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("kl_term = {kl} must be finite and >= 0")))
    }
}

fn check_m(name: &str, m: f64) -> Result<()> {
    if m >= 1.0 && m.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} = {m} must be >= 1")))
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta <= 1.0 {
        Ok(())
    } else {
        Err(invalid(format!("delta = {delta} outside (0, 1]")))
    }
}

fn check_positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} = {x} must be > 0")))
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda >= 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("lambda = {lambda} must be finite and >= 0")))
    }
}

/// `c/(1 − e^{−c})`, continuous at 0.
fn catoni_factor(c: f64) -> f64 {
    c / -(-c).exp_m1()
}

/// `2α/(1 − e^{−2α})`.
fn dis_catoni_factor(alpha: f64) -> f64 {
    catoni_factor(2.0 * alpha)
}

/// `kl⁻¹` of the disagreement mapped to `[0,1]` by `(d+1)/2`, mapped back.
fn dis_kl_inverse(emp_dis: f64, eps: f64) -> Result<f64> {
    Ok(2.0 * kl_inverse_upper(0.5 * (emp_dis + 1.0), eps)? - 1.0)
}

/// Seeger-type bound on the Gibbs risk.
pub fn seeger_bound(emp_risk: f64, kl_div: f64, m: f64, delta: f64) -> Result<BoundReport> {
    check_unit("empirical_risk", emp_risk)?;
    check_kl(kl_div)?;
    check_m("m", m)?;
    check_delta(delta)?;
    let eps = (kl_div + (2.0 * m.sqrt() / delta).ln()) / m;
    let value = kl_inverse_upper(emp_risk, eps)?;
    Ok(BoundReport::new(
        "seeger",
        value,
        &[("empirical_risk", emp_risk), ("kl_term", kl_div), ("m", m), ("delta", delta)],
    ))
}

/// McAllester-type bound on the Gibbs risk.
pub fn mcallester_bound(emp_risk: f64, kl_div: f64, m: f64, delta: f64) -> Result<BoundReport> {
    check_unit("empirical_risk", emp_risk)?;
    check_kl(kl_div)?;
    check_m("m", m)?;
    check_delta(delta)?;
    let value = emp_risk + ((kl_div + (2.0 * m.sqrt() / delta).ln()) / (2.0 * m)).sqrt();
    Ok(BoundReport::new(
        "mcallester",
        value,
        &[("empirical_risk", emp_risk), ("kl_term", kl_div), ("m", m), ("delta", delta)],
    ))
}

/// Catoni-type bound on the Gibbs risk for a fixed trade-off constant `c`.
pub fn catoni_bound(emp_risk: f64, kl_div: f64, m: f64, delta: f64, c: f64) -> Result<BoundReport> {
    check_unit("empirical_risk", emp_risk)?;
    check_kl(kl_div)?;
    check_m("m", m)?;
    check_delta(delta)?;
    check_positive("c", c)?;
    let value = catoni_factor(c) * (emp_risk + (kl_div + (1.0 / delta).ln()) / (m * c));
    Ok(BoundReport::new(
        "catoni",
        value,
        &[("empirical_risk", emp_risk), ("kl_term", kl_div), ("m", m), ("delta", delta), ("c", c)],
    ))
}

/// Seeger-type bound on the domain disagreement.
pub fn dis_seeger_bound(emp_dis: f64, kl_div: f64, m: f64, delta: f64) -> Result<BoundReport> {
    check_unit("empirical_dis", emp_dis)?;
    check_kl(kl_div)?;
    check_m("m", m)?;
    check_delta(delta)?;
    let eps = (2.0 * kl_div + (2.0 * m.sqrt() / delta).ln()) / m;
    let value = dis_kl_inverse(emp_dis, eps)?;
    Ok(BoundReport::new(
        "dis_seeger",
        value,
        &[("empirical_dis", emp_dis), ("kl_term", kl_div), ("m", m), ("delta", delta)],
    ))
}

/// McAllester-type bound on the domain disagreement.
pub fn dis_mcallester_bound(emp_dis: f64, kl_div: f64, m: f64, delta: f64) -> Result<BoundReport> {
    check_unit("empirical_dis", emp_dis)?;
    check_kl(kl_div)?;
    check_m("m", m)?;
    check_delta(delta)?;
    let value = emp_dis + 2.0 * ((2.0 * kl_div + (2.0 * m.sqrt() / delta).ln()) / (2.0 * m)).sqrt();
    Ok(BoundReport::new(
        "dis_mcallester",
        value,
        &[("empirical_dis", emp_dis), ("kl_term", kl_div), ("m", m), ("delta", delta)],
    ))
}

fn dis_catoni_value(emp_dis: f64, kl_div: f64, log_term: f64, m: f64, alpha: f64) -> f64 {
    dis_catoni_factor(alpha) * (emp_dis + (2.0 * kl_div + log_term) / (m * alpha) + 1.0) - 1.0
}

/// Catoni-type bound on the domain disagreement.
pub fn dis_catoni_bound(emp_dis: f64, kl_div: f64, m: f64, delta: f64, alpha: f64) -> Result<BoundReport> {
    check_unit("empirical_dis", emp_dis)?;
    check_kl(kl_div)?;
    check_m("m", m)?;
    check_delta(delta)?;
    check_positive("alpha", alpha)?;
    let value = dis_catoni_value(emp_dis, kl_div, (2.0 / delta).ln(), m, alpha);
    Ok(BoundReport::new(
        "dis_catoni",
        value,
        &[
            ("empirical_dis", emp_dis),
            ("kl_term", kl_div),
            ("m", m),
            ("delta", delta),
            ("alpha", alpha),
        ],
    ))
}

/// Disagreement bound for source and target samples of different sizes.
pub fn dis_unequal_bound(emp_dis: f64, kl_div: f64, m: f64, m_prime: f64, delta: f64) -> Result<BoundReport> {
    check_unit("empirical_dis", emp_dis)?;
    check_kl(kl_div)?;
    check_m("m", m)?;
    check_m("m_prime", m_prime)?;
    check_delta(delta)?;
    let term = |n: f64| ((2.0 * kl_div + (4.0 * n.sqrt() / delta).ln()) / (2.0 * n)).sqrt();
    let value = emp_dis + term(m) + term(m_prime);
    Ok(BoundReport::new(
        "dis_unequal",
        value,
        &[
            ("empirical_dis", emp_dis),
            ("kl_term", kl_div),
            ("m", m),
            ("m_prime", m_prime),
            ("delta", delta),
        ],
    ))
}

/// Target-risk bound combining Seeger-type bounds on risk and disagreement.
pub fn da_seeger_bound(emp_risk: f64, emp_dis: f64, kl_div: f64, m: f64, delta: f64, lambda: f64) -> Result<BoundReport> {
    check_unit("empirical_risk", emp_risk)?;
    check_unit("empirical_dis", emp_dis)?;
    check_kl(kl_div)?;
    check_m("m", m)?;
    check_delta(delta)?;
    check_lambda(lambda)?;
    let log_term = (4.0 * m.sqrt() / delta).ln();
    let sup_risk = kl_inverse_upper(emp_risk, (kl_div + log_term) / m)?;
    let sup_dis = dis_kl_inverse(emp_dis, (2.0 * kl_div + log_term) / m)?;
    let value = sup_risk + 0.5 * sup_dis + lambda;
    Ok(BoundReport::new(
        "da_seeger",
        value,
        &[
            ("empirical_risk", emp_risk),
            ("empirical_dis", emp_dis),
            ("kl_term", kl_div),
            ("m", m),
            ("delta", delta),
            ("lambda", lambda),
            ("risk_bound", sup_risk),
            ("dis_bound", sup_dis),
        ],
    ))
}

fn da_catoni_value(emp_risk: f64, emp_dis: f64, kl_div: f64, m: f64, delta: f64, c: f64, alpha: f64, lambda: f64) -> f64 {
    let cp = catoni_factor(c);
    let ap = dis_catoni_factor(alpha);
    cp * emp_risk + ap * 0.5 * emp_dis + (cp / c + ap / alpha) * (kl_div + (3.0 / delta).ln()) / m + lambda + 0.5 * (ap - 1.0)
}

#[allow(clippy::too_many_arguments)]
fn da_catoni_checked(
    name: &str,
    emp_risk: f64,
    emp_dis: f64,
    kl_div: f64,
    m: f64,
    delta: f64,
    c: f64,
    alpha: f64,
    lambda: f64,
) -> Result<BoundReport> {
    check_unit("empirical_risk", emp_risk)?;
    check_unit("empirical_dis", emp_dis)?;
    check_kl(kl_div)?;
    check_m("m", m)?;
    check_delta(delta)?;
    check_positive("c", c)?;
    check_positive("alpha", alpha)?;
    check_lambda(lambda)?;
    let value = da_catoni_value(emp_risk, emp_dis, kl_div, m, delta, c, alpha, lambda);
    Ok(BoundReport::new(
        name,
        value,
        &[
            ("empirical_risk", emp_risk),
            ("empirical_dis", emp_dis),
            ("kl_term", kl_div),
            ("m", m),
            ("delta", delta),
            ("c", c),
            ("alpha", alpha),
            ("lambda", lambda),
            ("c_prime", catoni_factor(c)),
            ("alpha_prime", dis_catoni_factor(alpha)),
        ],
    ))
}

/// Target-risk bound combining Catoni-type bounds on risk and disagreement.
#[allow(clippy::too_many_arguments)]
pub fn da_catoni_bound(
    emp_risk: f64,
    emp_dis: f64,
    kl_div: f64,
    m: f64,
    delta: f64,
    c: f64,
    alpha: f64,
    lambda: f64,
) -> Result<BoundReport> {
    da_catoni_checked("da_catoni", emp_risk, emp_dis, kl_div, m, delta, c, alpha, lambda)
}

/// Target-risk bound with separate sizes for the risk sample (`m1`), the
/// source sample of the disagreement (`m2`) and the target sample (`m_prime`).
#[allow(clippy::too_many_arguments)]
pub fn da_mcallester_bound(
    emp_risk: f64,
    emp_dis: f64,
    kl_div: f64,
    m1: f64,
    m2: f64,
    m_prime: f64,
    delta: f64,
    lambda: f64,
) -> Result<BoundReport> {
    check_unit("empirical_risk", emp_risk)?;
    check_unit("empirical_dis", emp_dis)?;
    check_kl(kl_div)?;
    check_m("m1", m1)?;
    check_m("m2", m2)?;
    check_m("m_prime", m_prime)?;
    check_delta(delta)?;
    check_lambda(lambda)?;
    let risk_term = ((kl_div + (4.0 * m1.sqrt() / delta).ln()) / (2.0 * m1)).sqrt();
    let dis_term = |n: f64| ((2.0 * kl_div + (8.0 * n.sqrt() / delta).ln()) / (8.0 * n)).sqrt();
    let value = emp_risk + 0.5 * emp_dis + lambda + risk_term + dis_term(m2) + dis_term(m_prime);
    Ok(BoundReport::new(
        "da_mcallester",
        value,
        &[
            ("empirical_risk", emp_risk),
            ("empirical_dis", emp_dis),
            ("kl_term", kl_div),
            ("m1", m1),
            ("m2", m2),
            ("m_prime", m_prime),
            ("delta", delta),
            ("lambda", lambda),
        ],
    ))
}

fn check_simplex(v: &[f64]) -> Result<()> {
    if v.is_empty() || v.iter().any(|&x| !(x >= 0.0)) || (v.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(invalid("source weights must be a probability vector"));
    }
    Ok(())
}

/// Multisource disagreement bound obtained from a union bound over the
/// `n` per-source disagreement bounds.
pub fn multi_dis_catoni_union(
    per_source_emp_dis: &[f64],
    v: &[f64],
    kl_div: f64,
    m: f64,
    delta: f64,
    alpha: f64,
) -> Result<BoundReport> {
    check_simplex(v)?;
    if per_source_emp_dis.len() != v.len() {
        return Err(invalid(format!(
            "{} per-source disagreements for {} weights",
            per_source_emp_dis.len(),
            v.len()
        )));
    }
    for &d in per_source_emp_dis {
        check_unit("empirical_dis", d)?;
    }
    check_kl(kl_div)?;
    check_m("m", m)?;
    check_delta(delta)?;
    check_positive("alpha", alpha)?;
    let n = v.len() as f64;
    let weighted: f64 = per_source_emp_dis.iter().zip(v).map(|(d, w)| d * w).sum();
    let value = dis_catoni_value(weighted, kl_div, (2.0 / delta).ln() + n.ln(), m, alpha);
    Ok(BoundReport::new(
        "multi_dis_catoni_union",
        value,
        &[
            ("empirical_dis", weighted),
            ("kl_term", kl_div),
            ("m", m),
            ("delta", delta),
            ("alpha", alpha),
            ("n_sources", n),
        ],
    ))
}

/// Multisource disagreement bound on the mixture disagreement directly.
pub fn multi_dis_catoni_direct(emp_dis_mixture: f64, kl_div: f64, m: f64, delta: f64, alpha: f64) -> Result<BoundReport> {
    let mut r = dis_catoni_bound(emp_dis_mixture, kl_div, m, delta, alpha)?;
    r.name = "multi_dis_catoni_direct".into();
    Ok(r)
}

/// Multisource target-risk bound with mixture ingredients.
#[allow(clippy::too_many_arguments)]
pub fn multi_da_catoni_bound(
    emp_risk_mixture: f64,
    emp_dis_mixture: f64,
    kl_div: f64,
    m: f64,
    delta: f64,
    c: f64,
    alpha: f64,
    lambda_v: f64,
) -> Result<BoundReport> {
    da_catoni_checked(
        "multi_da_catoni",
        emp_risk_mixture,
        emp_dis_mixture,
        kl_div,
        m,
        delta,
        c,
        alpha,
        lambda_v,
    )
}

/// Bound names accepted by [`evaluate`].
pub const BOUND_NAMES: &[&str] = &[
    "seeger",
    "mcallester",
    "catoni",
    "dis_seeger",
    "dis_mcallester",
    "dis_catoni",
    "dis_unequal",
    "da_seeger",
    "da_catoni",
    "da_mcallester",
    "multi_dis_catoni_union",
    "multi_dis_catoni_direct",
    "multi_da_catoni",
];

/// Ingredients for [`evaluate`]; fields a bound does not use are ignored,
/// fields it needs must be present.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundInputs {
    pub empirical_risk: Option<f64>,
    pub empirical_dis: Option<f64>,
    pub per_source_dis: Option<Vec<f64>>,
    pub source_weights: Option<Vec<f64>>,
    pub kl_term: Option<f64>,
    pub m: Option<f64>,
    pub m1: Option<f64>,
    pub m2: Option<f64>,
    pub m_prime: Option<f64>,
    pub delta: Option<f64>,
    pub c: Option<f64>,
    pub alpha: Option<f64>,
    pub lambda: Option<f64>,
}

fn need<T: Clone>(v: &Option<T>, key: &str, bound: &str) -> Result<T> {
    v.clone().ok_or_else(|| invalid(format!("bound `{bound}` needs `{key}`")))
}

/// Evaluates a bound by name. `lambda` defaults to 0.
pub fn evaluate(name: &str, x: &BoundInputs) -> Result<BoundReport> {
    let risk = || need(&x.empirical_risk, "empirical_risk", name);
    let dis = || need(&x.empirical_dis, "empirical_dis", name);
    let kl = || need(&x.kl_term, "kl_term", name);
    let m = || need(&x.m, "m", name);
    let delta = || need(&x.delta, "delta", name);
    let c = || need(&x.c, "c", name);
    let alpha = || need(&x.alpha, "alpha", name);
    let m_prime = || need(&x.m_prime, "m_prime", name);
    let lambda = x.lambda.unwrap_or(0.0);
    match name {
        "seeger" => seeger_bound(risk()?, kl()?, m()?, delta()?),
        "mcallester" => mcallester_bound(risk()?, kl()?, m()?, delta()?),
        "catoni" => catoni_bound(risk()?, kl()?, m()?, delta()?, c()?),
        "dis_seeger" => dis_seeger_bound(dis()?, kl()?, m()?, delta()?),
        "dis_mcallester" => dis_mcallester_bound(dis()?, kl()?, m()?, delta()?),
        "dis_catoni" => dis_catoni_bound(dis()?, kl()?, m()?, delta()?, alpha()?),
        "dis_unequal" => dis_unequal_bound(dis()?, kl()?, m()?, m_prime()?, delta()?),
        "da_seeger" => da_seeger_bound(risk()?, dis()?, kl()?, m()?, delta()?, lambda),
        "da_catoni" => da_catoni_bound(risk()?, dis()?, kl()?, m()?, delta()?, c()?, alpha()?, lambda),
        "da_mcallester" => da_mcallester_bound(
            risk()?,
            dis()?,
            kl()?,
            need(&x.m1, "m1", name)?,
            need(&x.m2, "m2", name)?,
            m_prime()?,
            delta()?,
            lambda,
        ),
        "multi_dis_catoni_union" => multi_dis_catoni_union(
            &need(&x.per_source_dis, "per_source_dis", name)?,
            &need(&x.source_weights, "source_weights", name)?,
            kl()?,
            m()?,
            delta()?,
            alpha()?,
        ),
        "multi_dis_catoni_direct" => multi_dis_catoni_direct(dis()?, kl()?, m()?, delta()?, alpha()?),
        "multi_da_catoni" => multi_da_catoni_bound(risk()?, dis()?, kl()?, m()?, delta()?, c()?, alpha()?, lambda),
        other => Err(invalid(format!(
            "unknown bound `{other}`; expected one of {}",
            BOUND_NAMES.join(", ")
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn kl_examples() {
        assert_eq!(kl_bernoulli(0.5, 0.5).unwrap(), 0.0);
        assert_abs_diff_eq!(kl_bernoulli(0.0, 0.5).unwrap(), std::f64::consts::LN_2, epsilon = 1e-15);
        assert_eq!(kl_bernoulli(1.0, 1.0).unwrap(), 0.0);
        assert!(kl_bernoulli(0.3, 0.0).is_err());
        assert!(kl_bernoulli(0.3, 1.0).is_err());
        assert!(kl_bernoulli(1.2, 0.5).is_err());
    }

    #[test]
    fn kl_inverse_examples() {
        assert_eq!(kl_inverse_upper(0.3, 0.0).unwrap(), 0.3);
        assert_eq!(kl_inverse_upper(1.0, 0.4).unwrap(), 1.0);
        // Grid-scan oracle at step 1e-6.
        let (q, eps) = (0.1, 0.05);
        let mut scan = q;
        let mut p = q;
        while p < 1.0 {
            if kl_bernoulli(q, p).unwrap() <= eps {
                scan = p;
            }
            p += 1e-6;
        }
        let inv = kl_inverse_upper(q, eps).unwrap();
        assert!((inv - scan).abs() <= 1e-6, "{inv} vs {scan}");
        // Huge eps: no interior solution below 1.
        assert!(kl_inverse_upper(0.2, 1e6).unwrap() > 1.0 - 1e-12);
    }

    #[test]
    fn kl_inverse_self_consistent() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let q: f64 = rng.gen_range(0.0..0.95);
            let eps: f64 = rng.gen_range(1e-6..1.0);
            let p = kl_inverse_upper(q, eps).unwrap();
            // Interior solutions only.
            if p < 1.0 - 1e-6 {
                assert!((kl_bernoulli(q, p).unwrap() - eps).abs() <= 1e-9, "q={q} eps={eps} p={p}");
            }
        }
    }

    #[test]
    fn seeger_structure_check() {
        let m = 1e6;
        let r = seeger_bound(0.0, 0.0, m, 1.0).unwrap();
        assert_eq!(r.value, kl_inverse_upper(0.0, (2.0 * m.sqrt()).ln() / m).unwrap());
        assert!(r.value < 1e-4);
        assert!(r.valid);
    }

    #[test]
    fn catoni_independent_value() {
        // emp 0.1, kl 10, m 1000, delta 0.05, c 1:
        // 1/(1 - e^-1) * (0.1 + (10 + ln 20)/1000)
        let r = catoni_bound(0.1, 10.0, 1000.0, 0.05, 1.0).unwrap();
        assert_abs_diff_eq!(r.value, 0.178_756_616_432_405_01, epsilon = 1e-12);
    }

    #[test]
    fn argument_errors() {
        assert!(seeger_bound(0.1, 1.0, 0.5, 0.1).is_err());
        assert!(mcallester_bound(0.1, 1.0, 10.0, 0.0).is_err());
        assert!(mcallester_bound(0.1, 1.0, 10.0, 1.5).is_err());
        assert!(catoni_bound(0.1, 1.0, 10.0, 0.1, 0.0).is_err());
        assert!(dis_catoni_bound(0.1, 1.0, 10.0, 0.1, -1.0).is_err());
        assert!(multi_dis_catoni_union(&[0.1, 0.2], &[0.5, 0.6], 1.0, 10.0, 0.1, 1.0).is_err());
        assert!(evaluate("nope", &BoundInputs::default()).is_err());
        assert!(evaluate("seeger", &BoundInputs::default()).is_err());
    }

    #[test]
    fn dis_unequal_vs_mcallester_analytic_gap() {
        let (d, kl, m, delta) = (0.1, 2.0, 500.0, 0.05);
        let unequal = dis_unequal_bound(d, kl, m, m, delta).unwrap().value;
        let mcal = dis_mcallester_bound(d, kl, m, delta).unwrap().value;
        let expected = 2.0 * ((2.0 * kl + (4.0 * m.sqrt() / delta).ln()) / (2.0 * m)).sqrt()
            - 2.0 * ((2.0 * kl + (2.0 * m.sqrt() / delta).ln()) / (2.0 * m)).sqrt();
        assert_abs_diff_eq!(unequal - mcal, expected, epsilon = 1e-14);
        assert!(unequal > mcal);
    }

    #[test]
    fn da_catoni_reduces_to_catoni_plus_offset() {
        let (r, kl, m, delta, c, alpha) = (0.12, 3.0, 2000.0, 0.05, 0.8, 0.6);
        let v = da_catoni_bound(r, 0.0, kl, m, delta, c, alpha, 0.0).unwrap().value;
        let cp = c / (1.0 - (-c).exp());
        let ap = 2.0 * alpha / (1.0 - (-2.0 * alpha).exp());
        let expected = cp * r + (cp / c + ap / alpha) * (kl + (3.0 / delta).ln()) / m + 0.5 * (ap - 1.0);
        assert_abs_diff_eq!(v, expected, epsilon = 1e-14);
        // Hand evaluation of the same ingredients.
        assert_abs_diff_eq!(v, 0.549_534_056_263_507_65, epsilon = 1e-9);
    }

    #[test]
    fn single_source_reductions() {
        let (d, kl, m, delta, alpha) = (0.07, 1.5, 400.0, 0.1, 0.3);
        let base = dis_catoni_bound(d, kl, m, delta, alpha).unwrap().value;
        assert_abs_diff_eq!(multi_dis_catoni_union(&[d], &[1.0], kl, m, delta, alpha).unwrap().value, base, epsilon = 1e-15);
        assert_eq!(multi_dis_catoni_direct(d, kl, m, delta, alpha).unwrap().value, base);
        let da = da_catoni_bound(0.1, d, kl, m, delta, 1.0, alpha, 0.02).unwrap().value;
        assert_eq!(multi_da_catoni_bound(0.1, d, kl, m, delta, 1.0, alpha, 0.02).unwrap().value, da);
    }

    #[test]
    fn report_json_round_trip() {
        let r = da_seeger_bound(0.123456789, 0.0517, 12.25, 300.0, 0.05, 0.0).unwrap();
        let text = serde_json::to_string(&r).unwrap();
        let back: BoundReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, r);
        assert!(text.contains("\"ingredients\""));
    }

    proptest! {
        #[test]
        fn pinsker(q in 0.0f64..=1.0, p in 1e-9f64..(1.0 - 1e-9)) {
            prop_assert!(2.0 * (q - p).powi(2) <= kl_bernoulli(q, p).unwrap() + 1e-15);
        }

        #[test]
        fn seeger_below_mcallester(r in 0.0f64..=1.0, kl in 0.0f64..50.0, m in 1.0f64..1e6, delta in 1e-4f64..=1.0) {
            let s = seeger_bound(r, kl, m, delta).unwrap().value;
            let mc = mcallester_bound(r, kl, m, delta).unwrap().value;
            prop_assert!(s <= mc + 1e-12);
            let ds = dis_seeger_bound(r, kl, m, delta).unwrap().value;
            let dm = dis_mcallester_bound(r, kl, m, delta).unwrap().value;
            prop_assert!(ds <= dm + 1e-12);
        }

        #[test]
        fn bounds_exceed_empirical(
            r in 0.0f64..=1.0, d in 0.0f64..=1.0, kl in 0.0f64..50.0,
            m in 1.0f64..1e6, mp in 1.0f64..1e6, delta in 1e-4f64..=1.0,
            c in 0.01f64..10.0, alpha in 0.01f64..10.0, lambda in 0.0f64..0.5,
        ) {
            prop_assert!(seeger_bound(r, kl, m, delta).unwrap().value >= r);
            prop_assert!(catoni_bound(r, kl, m, delta, c).unwrap().value >= r);
            prop_assert!(dis_seeger_bound(d, kl, m, delta).unwrap().value >= d - 1e-15);
            prop_assert!(dis_catoni_bound(d, kl, m, delta, alpha).unwrap().value >= d);
            prop_assert!(dis_unequal_bound(d, kl, m, mp, delta).unwrap().value >= d);
            prop_assert!(da_seeger_bound(r, d, kl, m, delta, lambda).unwrap().value >= r);
            prop_assert!(da_catoni_bound(r, d, kl, m, delta, c, alpha, lambda).unwrap().value >= r);
            prop_assert!(da_mcallester_bound(r, d, kl, m, mp, mp, delta, lambda).unwrap().value >= r);
        }

        #[test]
        fn da_catoni_monotone(
            r in 0.0f64..0.9, d in 0.0f64..0.9, kl in 0.0f64..20.0, lambda in 0.0f64..0.5,
            bump in 1e-6f64..0.1, which in 0usize..4,
        ) {
            let f = |r: f64, d: f64, kl: f64, l: f64| da_catoni_bound(r, d, kl, 500.0, 0.05, 1.0, 1.0, l).unwrap().value;
            let base = f(r, d, kl, lambda);
            let bumped = match which {
                0 => f(r + bump, d, kl, lambda),
                1 => f(r, d + bump, kl, lambda),
                2 => f(r, d, kl + bump, lambda),
                _ => f(r, d, kl, lambda + bump),
            };
            prop_assert!(bumped > base);
        }

        #[test]
        fn direct_below_union(
            ds in prop::collection::vec(0.0f64..0.5, 1..5),
            raw in prop::collection::vec(0.01f64..1.0, 5),
            kl in 0.0f64..10.0, m in 10.0f64..1e5,
        ) {
            // Per-source disagreements d_j = |t − s_j| from self-disagreements
            // s_j and t, so the mixture disagreement is |t − Σ v_j s_j|.
            let n = ds.len();
            let total: f64 = raw[..n].iter().sum();
            let v: Vec<f64> = raw[..n].iter().map(|x| x / total).collect();
            let t = 0.25;
            let dis: Vec<f64> = ds.iter().map(|s| (t - s).abs()).collect();
            let mix = (t - ds.iter().zip(&v).map(|(s, w)| s * w).sum::<f64>()).abs();
            let union = multi_dis_catoni_union(&dis, &v, kl, m, 0.05, 0.5).unwrap().value;
            let direct = multi_dis_catoni_direct(mix, kl, m, 0.05, 0.5).unwrap().value;
            prop_assert!(direct <= union + 1e-12);
        }
    }
}
