//! Exact quantities for explicit finite hypothesis classes.
//!
//! Instances are the indices `0..n_points` of a finite universe. A hypothesis
//! is its prediction table over that universe, a marginal is a probability
//! vector over it, and a labeled domain adds one label per point. Every
//! quantity here is a plain weighted enumeration, which makes this module the
//! reference the closed forms and the bounds are checked against.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::sample::Label;

const MASS_TOL: f64 = 1e-12;

fn check_probability(name: &str, p: &[f64]) -> Result<()> {
    if p.is_empty() {
        return Err(invalid(format!("{name} is empty")));
    }
    if p.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
        return Err(invalid(format!("{name} has a negative or non-finite entry")));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > MASS_TOL {
        return Err(invalid(format!("{name} sums to {total}, not 1")));
    }
    Ok(())
}

/// Finite hypothesis class stored as prediction tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisSet {
    tables: Vec<Vec<Label>>,
}

impl HypothesisSet {
    pub fn new(tables: Vec<Vec<Label>>) -> Result<Self> {
        let n = tables
            .first()
            .map(Vec::len)
            .ok_or_else(|| invalid("hypothesis set is empty"))?;
        if n == 0 {
            return Err(invalid("hypotheses must cover at least one point"));
        }
        if tables.iter().any(|t| t.len() != n) {
            return Err(Error::SizeMismatch("prediction tables differ in length".into()));
        }
        Ok(Self { tables })
    }

    pub fn len(&self) -> usize {
        self.tables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tables.is_empty()
    }

    pub fn n_points(&self) -> usize {
        self.tables[0].len()
    }

    pub fn table(&self, h: usize) -> &[Label] {
        &self.tables[h]
    }

    fn covers(&self, n: usize) -> Result<()> {
        if n != self.n_points() {
            return Err(Error::SizeMismatch(format!(
                "hypotheses cover {} points, distribution has {n}",
                self.n_points()
            )));
        }
        Ok(())
    }

    /// `R_D(h, h′)`: mass of the points where `h` and `h′` disagree.
    pub fn pair_disagreement(&self, h: usize, g: usize, marginal: &Marginal) -> f64 {
        self.tables[h]
            .iter()
            .zip(&self.tables[g])
            .zip(&marginal.mass)
            .filter(|((a, b), _)| a != b)
            .map(|(_, m)| m)
            .sum()
    }

    /// `R_P(h)`: mass of the points where `h` errs.
    pub fn risk(&self, h: usize, domain: &Domain) -> f64 {
        self.tables[h]
            .iter()
            .zip(&domain.labels)
            .zip(&domain.marginal.mass)
            .filter(|((a, y), _)| a != y)
            .map(|(_, m)| m)
            .sum()
    }
}

/// Probability vector over the point universe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Marginal {
    mass: Vec<f64>,
}

impl Marginal {
    pub fn new(mass: Vec<f64>) -> Result<Self> {
        check_probability("marginal", &mass)?;
        Ok(Self { mass })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        Self::new(vec![1.0 / n as f64; n])
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    /// `Σ_j v_j D_j`.
    pub fn mixture(parts: &[Marginal], weights: &[f64]) -> Result<Self> {
        check_probability("mixture weights", weights)?;
        if parts.len() != weights.len() {
            return Err(Error::SizeMismatch(format!(
                "{} marginals for {} weights",
                parts.len(),
                weights.len()
            )));
        }
        let n = parts[0].len();
        if parts.iter().any(|p| p.len() != n) {
            return Err(Error::SizeMismatch("marginals differ in support size".into()));
        }
        let mut mass = vec![0.0; n];
        for (p, &v) in parts.iter().zip(weights) {
            for (o, m) in mass.iter_mut().zip(&p.mass) {
                *o += v * m;
            }
        }
        // Renormalize away rounding so the result passes validation.
        let total: f64 = mass.iter().sum();
        mass.iter_mut().for_each(|m| *m /= total);
        Self::new(mass)
    }
}

/// Labeled distribution: a marginal plus a deterministic labeling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub marginal: Marginal,
    labels: Vec<Label>,
}

impl Domain {
    pub fn new(marginal: Marginal, labels: Vec<Label>) -> Result<Self> {
        if labels.len() != marginal.len() {
            return Err(Error::SizeMismatch(format!(
                "{} labels for {} points",
                labels.len(),
                marginal.len()
            )));
        }
        Ok(Self { marginal, labels })
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }
}

/// Posterior and prior over a finite hypothesis class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteVote {
    pub hypotheses: HypothesisSet,
    posterior: Vec<f64>,
    prior: Vec<f64>,
}

impl FiniteVote {
    pub fn new(hypotheses: HypothesisSet, posterior: Vec<f64>, prior: Vec<f64>) -> Result<Self> {
        check_probability("posterior", &posterior)?;
        check_probability("prior", &prior)?;
        if posterior.len() != hypotheses.len() || prior.len() != hypotheses.len() {
            return Err(Error::SizeMismatch(format!(
                "{} hypotheses, {} posterior weights, {} prior weights",
                hypotheses.len(),
                posterior.len(),
                prior.len()
            )));
        }
        Ok(Self {
            hypotheses,
            posterior,
            prior,
        })
    }

    /// Uniform prior.
    pub fn with_posterior(hypotheses: HypothesisSet, posterior: Vec<f64>) -> Result<Self> {
        let n = hypotheses.len();
        Self::new(hypotheses, posterior, vec![1.0 / n as f64; n])
    }

    pub fn posterior(&self) -> &[f64] {
        &self.posterior
    }

    pub fn prior(&self) -> &[f64] {
        &self.prior
    }

    /// `KL(ρ‖π)`, infinite when the posterior leaves the prior's support.
    pub fn kl(&self) -> f64 {
        self.posterior
            .iter()
            .zip(&self.prior)
            .filter(|(r, _)| **r > 0.0)
            .map(|(&r, &p)| if p > 0.0 { r * (r / p).ln() } else { f64::INFINITY })
            .sum()
    }

    /// Weighted vote on point `i`, ties to `+1`.
    pub fn majority(&self, i: usize) -> Label {
        let s: f64 = self
            .posterior
            .iter()
            .enumerate()
            .map(|(h, r)| r * self.hypotheses.table(h)[i].sign())
            .sum();
        Label::from_score(s)
    }

    fn pairs(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let h = self.posterior.len();
        (0..h).flat_map(move |a| (0..h).map(move |b| (a, b, self.posterior[a] * self.posterior[b])))
    }
}

/// `R_P(G_ρ) = Σ_h ρ(h) R_P(h)`.
pub fn exact_gibbs_risk(vote: &FiniteVote, domain: &Domain) -> Result<f64> {
    vote.hypotheses.covers(domain.marginal.len())?;
    Ok(vote
        .posterior
        .iter()
        .enumerate()
        .map(|(h, r)| r * vote.hypotheses.risk(h, domain))
        .sum())
}

/// `R_D(G_ρ, G_ρ)`, as a double sum over hypothesis pairs.
pub fn exact_disagreement(vote: &FiniteVote, marginal: &Marginal) -> Result<f64> {
    vote.hypotheses.covers(marginal.len())?;
    Ok(vote
        .pairs()
        .map(|(a, b, w)| w * vote.hypotheses.pair_disagreement(a, b, marginal))
        .sum())
}

/// `e_P(G_ρ, G_ρ)`: probability that two independent draws both err.
pub fn exact_joint_error(vote: &FiniteVote, domain: &Domain) -> Result<f64> {
    vote.hypotheses.covers(domain.marginal.len())?;
    let hs = &vote.hypotheses;
    Ok(vote
        .pairs()
        .map(|(a, b, w)| {
            let both: f64 = (0..hs.n_points())
                .filter(|&i| hs.table(a)[i] != domain.labels[i] && hs.table(b)[i] != domain.labels[i])
                .map(|i| domain.marginal.mass[i])
                .sum();
            w * both
        })
        .sum())
}

/// Risk of the weighted majority vote.
pub fn exact_majority_vote_risk(vote: &FiniteVote, domain: &Domain) -> Result<f64> {
    vote.hypotheses.covers(domain.marginal.len())?;
    Ok((0..domain.labels.len())
        .filter(|&i| vote.majority(i) != domain.labels[i])
        .map(|i| domain.marginal.mass[i])
        .sum())
}

/// Value of the C-bound, or why it does not apply.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum CBound {
    Value { value: f64 },
    /// Disagreement of at least one half: the denominator is not positive.
    DegenerateDisagreement { disagreement: f64 },
    /// Gibbs risk of at least one half: the bound needs a better-than-chance vote.
    GibbsRiskTooHigh { gibbs_risk: f64 },
}

impl CBound {
    pub fn value(&self) -> Option<f64> {
        match *self {
            CBound::Value { value } => Some(value),
            _ => None,
        }
    }
}

/// `1 − (1 − 2R(G))² / (1 − 2R(G,G))`.
pub fn c_bound(vote: &FiniteVote, domain: &Domain) -> Result<CBound> {
    let r = exact_gibbs_risk(vote, domain)?;
    let d = exact_disagreement(vote, &domain.marginal)?;
    if 1.0 - 2.0 * d <= 0.0 {
        return Ok(CBound::DegenerateDisagreement { disagreement: d });
    }
    if r >= 0.5 {
        return Ok(CBound::GibbsRiskTooHigh { gibbs_risk: r });
    }
    let num = 1.0 - 2.0 * r;
    Ok(CBound::Value {
        value: 1.0 - num * num / (1.0 - 2.0 * d),
    })
}

/// Half the HΔH-distance: the largest gap `|R_T(h,h′) − R_S(h,h′)|` over pairs.
pub fn h_delta_h_distance(hypotheses: &HypothesisSet, source: &Marginal, target: &Marginal) -> Result<f64> {
    hypotheses.covers(source.len())?;
    hypotheses.covers(target.len())?;
    let h = hypotheses.len();
    let mut best = 0.0f64;
    for a in 0..h {
        for b in a + 1..h {
            let gap = (hypotheses.pair_disagreement(a, b, target) - hypotheses.pair_disagreement(a, b, source)).abs();
            best = best.max(gap);
        }
    }
    Ok(best)
}

fn argmin_by(n: usize, f: impl Fn(usize) -> f64) -> (usize, f64) {
    let mut best = (0, f(0));
    for i in 1..n {
        let v = f(i);
        if v < best.1 {
            best = (i, v);
        }
    }
    best
}

/// Best joint hypothesis `h*` and `μ = R_S(h*) + R_T(h*)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BenDavidTerms {
    pub mu: f64,
    pub h_star: usize,
}

pub fn ben_david_terms(hypotheses: &HypothesisSet, source: &Domain, target: &Domain) -> Result<BenDavidTerms> {
    hypotheses.covers(source.labels.len())?;
    hypotheses.covers(target.labels.len())?;
    let (h_star, mu) = argmin_by(hypotheses.len(), |h| {
        hypotheses.risk(h, source) + hypotheses.risk(h, target)
    });
    Ok(BenDavidTerms { mu, h_star })
}

/// Per-domain best hypotheses and `ν = R_{D_S}(h_S*, h_T*)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MansourTerms {
    pub nu: f64,
    pub hs_star: usize,
    pub ht_star: usize,
}

pub fn mansour_terms(hypotheses: &HypothesisSet, source: &Domain, target: &Domain) -> Result<MansourTerms> {
    hypotheses.covers(source.labels.len())?;
    hypotheses.covers(target.labels.len())?;
    let (hs_star, _) = argmin_by(hypotheses.len(), |h| hypotheses.risk(h, source));
    let (ht_star, _) = argmin_by(hypotheses.len(), |h| hypotheses.risk(h, target));
    Ok(MansourTerms {
        nu: hypotheses.pair_disagreement(hs_star, ht_star, &source.marginal),
        hs_star,
        ht_star,
    })
}

/// `dis_ρ(D_S, D_T) = |R_T(G,G) − R_S(G,G)|`.
pub fn exact_dis_rho(vote: &FiniteVote, source: &Marginal, target: &Marginal) -> Result<f64> {
    Ok((exact_disagreement(vote, target)? - exact_disagreement(vote, source)?).abs())
}

/// `λ_ρ = |e_T(G,G) − e_S(G,G)|`.
pub fn exact_lambda(vote: &FiniteVote, source: &Domain, target: &Domain) -> Result<f64> {
    Ok((exact_joint_error(vote, target)? - exact_joint_error(vote, source)?).abs())
}

/// `|R_T(G,G) − Σ_j v_j R_{S_j}(G,G)|`.
pub fn exact_mixture_dis(vote: &FiniteVote, sources: &[Marginal], weights: &[f64], target: &Marginal) -> Result<f64> {
    check_probability("mixture weights", weights)?;
    if sources.len() != weights.len() {
        return Err(Error::SizeMismatch(format!(
            "{} sources for {} weights",
            sources.len(),
            weights.len()
        )));
    }
    let mut mix = 0.0;
    for (s, v) in sources.iter().zip(weights) {
        mix += v * exact_disagreement(vote, s)?;
    }
    Ok((exact_disagreement(vote, target)? - mix).abs())
}

/// `Σ_j v_j dis_ρ(D_{S_j}, D_T)`.
pub fn exact_weighted_dis(vote: &FiniteVote, sources: &[Marginal], weights: &[f64], target: &Marginal) -> Result<f64> {
    check_probability("mixture weights", weights)?;
    let mut total = 0.0;
    for (s, v) in sources.iter().zip(weights) {
        total += v * exact_dis_rho(vote, s, target)?;
    }
    Ok(total)
}

/// A random finite problem: a vote, a source and a target domain, and
/// extra source marginals for the multisource checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomInstance {
    pub vote: FiniteVote,
    pub source: Domain,
    pub target: Domain,
    pub extra_sources: Vec<Marginal>,
    pub mixture_weights: Vec<f64>,
}

fn random_simplex<R: Rng>(rng: &mut R, n: usize, sparse: bool) -> Vec<f64> {
    let mut w: Vec<f64> = (0..n)
        .map(|_| {
            // Occasionally zero out entries so point masses and gaps get exercised.
            if sparse && rng.gen_bool(0.2) {
                0.0
            } else {
                -rng.gen::<f64>().max(f64::MIN_POSITIVE).ln()
            }
        })
        .collect();
    if w.iter().all(|&x| x == 0.0) {
        w[rng.gen_range(0..n)] = 1.0;
    }
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    w
}

fn random_labels<R: Rng>(rng: &mut R, n: usize) -> Vec<Label> {
    (0..n)
        .map(|_| if rng.gen_bool(0.5) { Label::Positive } else { Label::Negative })
        .collect()
}

/// Draws a random instance with at most `max_hypotheses` hypotheses on at
/// most `max_points` points. The target labeling agrees with the source one
/// on a random subset of points, so labelings range from identical to
/// unrelated.
pub fn random_instance<R: Rng>(rng: &mut R, max_hypotheses: usize, max_points: usize) -> Result<RandomInstance> {
    if max_hypotheses == 0 || max_points == 0 {
        return Err(invalid("instance caps must be positive"));
    }
    let h = rng.gen_range(1..=max_hypotheses);
    let n = rng.gen_range(1..=max_points);
    let tables = (0..h).map(|_| random_labels(rng, n)).collect();
    let hyps = HypothesisSet::new(tables)?;
    let vote = FiniteVote::new(hyps, random_simplex(rng, h, true), random_simplex(rng, h, false))?;
    let source_labels = random_labels(rng, n);
    let flip_rate = rng.gen::<f64>();
    let target_labels = source_labels
        .iter()
        .map(|&y| if rng.gen_bool(flip_rate) { y.flip() } else { y })
        .collect();
    let source = Domain::new(Marginal::new(random_simplex(rng, n, true))?, source_labels)?;
    let target = Domain::new(Marginal::new(random_simplex(rng, n, true))?, target_labels)?;
    let k = rng.gen_range(1..=4);
    let extra_sources = (0..k)
        .map(|_| Marginal::new(random_simplex(rng, n, true)))
        .collect::<Result<Vec<_>>>()?;
    let mixture_weights = random_simplex(rng, k, true);
    Ok(RandomInstance {
        vote,
        source,
        target,
        extra_sources,
        mixture_weights,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use Label::{Negative as N, Positive as P};

    fn toy_domain() -> Domain {
        Domain::new(Marginal::new(vec![0.1, 0.2, 0.3, 0.4]).unwrap(), vec![P, N, P, N]).unwrap()
    }

    fn negated(t: &[Label]) -> Vec<Label> {
        t.iter().map(|l| l.flip()).collect()
    }

    #[test]
    fn point_mass_vote_is_plain_risk() {
        let hs = HypothesisSet::new(vec![vec![P, P, P, P], vec![N, N, P, P]]).unwrap();
        let vote = FiniteVote::with_posterior(hs, vec![0.0, 1.0]).unwrap();
        let d = toy_domain();
        assert_abs_diff_eq!(exact_gibbs_risk(&vote, &d).unwrap(), 0.1 + 0.4, epsilon = 1e-15);
        assert_eq!(exact_disagreement(&vote, &d.marginal).unwrap(), 0.0);
    }

    #[test]
    fn complementary_pair() {
        let h = vec![P, N, N, P];
        let hs = HypothesisSet::new(vec![h.clone(), negated(&h)]).unwrap();
        let vote = FiniteVote::with_posterior(hs, vec![0.5, 0.5]).unwrap();
        let d = toy_domain();
        assert_abs_diff_eq!(exact_gibbs_risk(&vote, &d).unwrap(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(exact_disagreement(&vote, &d.marginal).unwrap(), 0.5, epsilon = 1e-15);
        assert!(matches!(c_bound(&vote, &d).unwrap(), CBound::DegenerateDisagreement { .. }));
    }

    #[test]
    fn unanimous_correct_vote() {
        let d = toy_domain();
        let hs = HypothesisSet::new(vec![d.labels().to_vec(), d.labels().to_vec()]).unwrap();
        let vote = FiniteVote::with_posterior(hs, vec![0.3, 0.7]).unwrap();
        assert_eq!(exact_majority_vote_risk(&vote, &d).unwrap(), 0.0);
        assert_eq!(c_bound(&vote, &d).unwrap().value(), Some(0.0));
    }

    #[test]
    fn gibbs_risk_matches_direct_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let tables: Vec<Vec<Label>> = (0..4).map(|_| random_labels(&mut rng, 8)).collect();
        let hs = HypothesisSet::new(tables.clone()).unwrap();
        let rho = random_simplex(&mut rng, 4, false);
        let d = Domain::new(Marginal::new(random_simplex(&mut rng, 8, false)).unwrap(), random_labels(&mut rng, 8)).unwrap();
        let vote = FiniteVote::with_posterior(hs, rho.clone()).unwrap();
        let mut direct = 0.0;
        for h in 0..4 {
            for i in 0..8 {
                if tables[h][i] != d.labels()[i] {
                    direct += rho[h] * d.marginal.mass()[i];
                }
            }
        }
        assert_abs_diff_eq!(exact_gibbs_risk(&vote, &d).unwrap(), direct, epsilon = 1e-15);
    }

    #[test]
    fn identical_domains_collapse() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let inst = random_instance(&mut rng, 6, 10).unwrap();
        let s = &inst.source;
        assert_eq!(exact_dis_rho(&inst.vote, &s.marginal, &s.marginal).unwrap(), 0.0);
        assert_eq!(exact_lambda(&inst.vote, s, s).unwrap(), 0.0);
        assert_eq!(h_delta_h_distance(&inst.vote.hypotheses, &s.marginal, &s.marginal).unwrap(), 0.0);
        let bd = ben_david_terms(&inst.vote.hypotheses, s, s).unwrap();
        let ms = mansour_terms(&inst.vote.hypotheses, s, s).unwrap();
        assert_eq!(bd.h_star, ms.hs_star);
        assert_eq!(ms.hs_star, ms.ht_star);
        assert_eq!(ms.nu, 0.0);
    }

    #[test]
    fn single_hypothesis_has_no_divergence() {
        let hs = HypothesisSet::new(vec![vec![P, N, P]]).unwrap();
        let s = Marginal::new(vec![0.5, 0.5, 0.0]).unwrap();
        let t = Marginal::new(vec![0.0, 0.0, 1.0]).unwrap();
        assert_eq!(h_delta_h_distance(&hs, &s, &t).unwrap(), 0.0);
        let vote = FiniteVote::with_posterior(hs, vec![1.0]).unwrap();
        assert_eq!(exact_dis_rho(&vote, &s, &t).unwrap(), 0.0);
    }

    #[test]
    fn zero_error_hypothesis_gives_zero_mu() {
        let d = toy_domain();
        let hs = HypothesisSet::new(vec![vec![N, N, N, N], d.labels().to_vec()]).unwrap();
        let t = Domain::new(Marginal::uniform(4).unwrap(), d.labels().to_vec()).unwrap();
        let bd = ben_david_terms(&hs, &d, &t).unwrap();
        assert_eq!(bd.mu, 0.0);
        assert_eq!(bd.h_star, 1);
    }

    #[test]
    fn point_mass_mixture_is_single_source() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let inst = random_instance(&mut rng, 8, 12).unwrap();
        let k = inst.extra_sources.len();
        let t = &inst.target.marginal;
        for j in 0..k {
            let mut v = vec![0.0; k];
            v[j] = 1.0;
            assert_abs_diff_eq!(
                exact_mixture_dis(&inst.vote, &inst.extra_sources, &v, t).unwrap(),
                exact_dis_rho(&inst.vote, &inst.extra_sources[j], t).unwrap(),
                epsilon = 1e-15
            );
        }
    }

    #[test]
    fn validation_errors() {
        assert!(Marginal::new(vec![0.5, 0.6]).is_err());
        assert!(Marginal::new(vec![-0.1, 1.1]).is_err());
        assert!(HypothesisSet::new(vec![vec![P], vec![P, N]]).is_err());
        let hs = HypothesisSet::new(vec![vec![P, N]]).unwrap();
        assert!(FiniteVote::with_posterior(hs.clone(), vec![0.5, 0.5]).is_err());
        let vote = FiniteVote::with_posterior(hs, vec![1.0]).unwrap();
        assert!(exact_gibbs_risk(&vote, &toy_domain()).is_err());
    }

    #[test]
    fn random_instances_satisfy_theorems() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..200 {
            let inst = random_instance(&mut rng, 16, 64).unwrap();
            let (v, s, t) = (&inst.vote, &inst.source, &inst.target);
            let rs = exact_gibbs_risk(v, s).unwrap();
            let rt = exact_gibbs_risk(v, t).unwrap();
            let ds = exact_disagreement(v, &s.marginal).unwrap();
            let es = exact_joint_error(v, s).unwrap();
            assert!((rs - (0.5 * ds + es)).abs() <= 1e-12);
            let dis = exact_dis_rho(v, &s.marginal, &t.marginal).unwrap();
            let hdh = h_delta_h_distance(&v.hypotheses, &s.marginal, &t.marginal).unwrap();
            assert!(dis <= hdh + 1e-12);
            let lambda = exact_lambda(v, s, t).unwrap();
            assert!(rt <= rs + 0.5 * dis + lambda + 1e-12);
            assert!(exact_majority_vote_risk(v, s).unwrap() <= 2.0 * rs + 1e-12);
            if let Some(cb) = c_bound(v, s).unwrap().value() {
                assert!(exact_majority_vote_risk(v, s).unwrap() <= cb + 1e-12);
            }
            let bd = ben_david_terms(&v.hypotheses, s, t).unwrap();
            let ms = mansour_terms(&v.hypotheses, s, t).unwrap();
            let hs = &v.hypotheses;
            for h in 0..hs.len() {
                assert!(hs.risk(h, t) <= hs.risk(h, s) + hdh + bd.mu + 1e-12);
                let lhs = hs.risk(h, t) - hs.risk(ms.ht_star, t);
                assert!(lhs <= hs.pair_disagreement(ms.hs_star, h, &s.marginal) + hdh + ms.nu + 1e-12);
            }
            let mix = exact_mixture_dis(v, &inst.extra_sources, &inst.mixture_weights, &t.marginal).unwrap();
            let avg = exact_weighted_dis(v, &inst.extra_sources, &inst.mixture_weights, &t.marginal).unwrap();
            assert!(mix <= avg + 1e-12);
        }
    }
}
