//! Closed-form Gibbs quantities for the Gaussian posterior centred on a
//! model, and Monte-Carlo estimates of the same quantities.
//!
//! The functions accept any [`Scorer`], so a kernel expansion gets the same
//! treatment as a primal weight vector (its margins are taken in feature
//! space). The Monte-Carlo estimators draw explicit weight vectors and so
//! need a [`LinearModel`].

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::losses::{phi, phi_dis};
use crate::model::{LinearModel, Scorer};
use crate::sample::{FeatureVector, Label, LabeledSample, UnlabeledSample};

/// Smallest number of posterior draws accepted by the Monte-Carlo estimators.
pub const MIN_DRAWS: usize = 1000;

/// Normalized margins `y·score(x)/‖x‖` over a labeled sample.
pub fn labeled_margins<M: Scorer + ?Sized>(model: &M, sample: &LabeledSample) -> Result<Vec<f64>> {
    sample
        .iter()
        .map(|(x, y)| Ok(y.sign() * model.normalized_score(x)?))
        .collect()
}

/// Normalized margins `score(x)/‖x‖` over instances.
pub fn margins<M: Scorer + ?Sized>(model: &M, instances: &[FeatureVector]) -> Result<Vec<f64>> {
    instances.iter().map(|x| model.normalized_score(x)).collect()
}

fn mean(values: impl Iterator<Item = f64>, n: usize) -> f64 {
    values.sum::<f64>() / n as f64
}

/// Empirical Gibbs risk: mean of `phi` over labeled margins.
pub fn gibbs_risk<M: Scorer + ?Sized>(model: &M, sample: &LabeledSample) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::EmptySample("gibbs risk"));
    }
    let a = labeled_margins(model, sample)?;
    Ok(mean(a.iter().map(|&a| phi(a)), a.len()))
}

/// Expected disagreement of two independent posterior draws on the sample.
pub fn gibbs_self_disagreement<M: Scorer + ?Sized>(model: &M, sample: &UnlabeledSample) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::EmptySample("self-disagreement"));
    }
    let a = margins(model, sample.instances())?;
    Ok(mean(a.iter().map(|&a| phi_dis(a)), a.len()))
}

/// `|self-disagreement(S) − self-disagreement(T)|`.
pub fn domain_disagreement<M: Scorer + ?Sized>(
    model: &M,
    source: &UnlabeledSample,
    target: &UnlabeledSample,
) -> Result<f64> {
    Ok((gibbs_self_disagreement(model, source)? - gibbs_self_disagreement(model, target)?).abs())
}

/// Probability that two independent posterior draws both err.
pub fn gibbs_joint_error<M: Scorer + ?Sized>(model: &M, sample: &LabeledSample) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::EmptySample("joint error"));
    }
    let a = labeled_margins(model, sample)?;
    Ok(mean(
        a.iter().map(|&a| {
            let p = phi(a);
            p * p
        }),
        a.len(),
    ))
}

/// KL divergence from the posterior at `w` to the standard Gaussian prior.
pub fn kl_gaussian(model: &LinearModel) -> f64 {
    0.5 * model.weights.iter().map(|w| w * w).sum::<f64>()
}

/// Monte-Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_error: f64,
}

/// Which Gibbs quantity a Monte-Carlo run estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum McQuantity {
    Risk,
    SelfDisagreement,
    JointError,
}

struct PosteriorSampler<'a> {
    centre: &'a [f64],
    rng: ChaCha8Rng,
    buf: Vec<f64>,
}

impl<'a> PosteriorSampler<'a> {
    fn new(model: &'a LinearModel, seed: u64) -> Self {
        Self {
            centre: &model.weights,
            rng: ChaCha8Rng::seed_from_u64(seed),
            buf: vec![0.0; model.weights.len()],
        }
    }

    /// Draws `w + z` and returns the vote of that draw on every instance.
    fn draw_votes(&mut self, instances: &[FeatureVector], out: &mut [Label]) {
        for (b, c) in self.buf.iter_mut().zip(self.centre) {
            let z: f64 = StandardNormal.sample(&mut self.rng);
            *b = c + z;
        }
        for (o, x) in out.iter_mut().zip(instances) {
            *o = Label::from_score(x.dot_dense(&self.buf));
        }
    }
}

/// Estimates a Gibbs quantity by sampling weight vectors from the posterior.
///
/// Each trial draws one classifier (risk) or an independent pair
/// (disagreement, joint error) and scores it on the whole sample; the
/// estimate is the trial mean and the standard error its sample deviation
/// over `√n_draws`. Labels are ignored for the disagreement.
pub fn mc_estimate(
    model: &LinearModel,
    sample: &LabeledSample,
    quantity: McQuantity,
    n_draws: usize,
    seed: u64,
) -> Result<McEstimate> {
    if n_draws < MIN_DRAWS {
        return Err(invalid(format!("need at least {MIN_DRAWS} draws, got {n_draws}")));
    }
    if sample.is_empty() {
        return Err(Error::EmptySample("monte-carlo oracle"));
    }
    if sample.dim() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            found: sample.dim(),
        });
    }
    let xs = sample.instances();
    let ys = sample.labels();
    let m = xs.len() as f64;
    let mut sampler = PosteriorSampler::new(model, seed);
    let mut first = vec![Label::Positive; xs.len()];
    let mut second = vec![Label::Positive; xs.len()];
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..n_draws {
        sampler.draw_votes(xs, &mut first);
        let count = match quantity {
            McQuantity::Risk => first.iter().zip(ys).filter(|(h, y)| h != y).count(),
            McQuantity::SelfDisagreement => {
                sampler.draw_votes(xs, &mut second);
                first.iter().zip(&second).filter(|(h, g)| h != g).count()
            }
            McQuantity::JointError => {
                sampler.draw_votes(xs, &mut second);
                first
                    .iter()
                    .zip(&second)
                    .zip(ys)
                    .filter(|((h, g), y)| h != y && g != y)
                    .count()
            }
        };
        let v = count as f64 / m;
        sum += v;
        sum_sq += v * v;
    }
    let n = n_draws as f64;
    let estimate = sum / n;
    let var = ((sum_sq - n * estimate * estimate) / (n - 1.0)).max(0.0);
    Ok(McEstimate {
        estimate,
        std_error: (var / n).sqrt(),
    })
}

/// Monte-Carlo estimate of the Gibbs risk.
pub fn mc_gibbs_oracle(model: &LinearModel, sample: &LabeledSample, n_draws: usize, seed: u64) -> Result<McEstimate> {
    mc_estimate(model, sample, McQuantity::Risk, n_draws, seed)
}
