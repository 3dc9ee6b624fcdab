//! Self-check suites: closed forms against exact and Monte-Carlo oracles,
//! analytic gradients against finite differences, and bound consistency.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::bounds::{
    catoni_bound, dis_catoni_bound, dis_mcallester_bound, dis_seeger_bound, kl_bernoulli, kl_inverse_upper,
    mcallester_bound, seeger_bound,
};
use crate::error::{invalid, Error, Result};
use crate::exact_vote::{
    c_bound, exact_dis_rho, exact_disagreement, exact_gibbs_risk, exact_joint_error, exact_lambda,
    exact_majority_vote_risk, exact_mixture_dis, exact_weighted_dis, h_delta_h_distance, random_instance,
};
use crate::gibbs_linear::{gibbs_joint_error, gibbs_risk, gibbs_self_disagreement, mc_estimate, McQuantity};
use crate::kernel::{KernelMatrix, KernelSpec};
use crate::losses::{phi, phi_dis};
use crate::model::LinearModel;
use crate::optimize::{
    finite_difference_gradient, relative_gradient_error, Hyperparams, MultiPbdaPrimal, Objective, ObjectiveOptions,
    PbdaDual, PbdaPrimal, Pbgd3Dual, Pbgd3Primal,
};
use crate::sample::{FeatureVector, LabeledSample};

/// Slack allowed on exact identities and inequalities for rounding.
pub const EXACT_TOL: f64 = 1e-12;
/// Posterior draws per Monte-Carlo comparison.
pub const MC_DRAWS: usize = 100_000;
/// Allowed distance between closed form and Monte-Carlo, in standard errors.
pub const MC_SIGMAS: f64 = 3.0;
pub const GRADIENT_TOL: f64 = 1e-5;
pub const FD_STEP: f64 = 1e-5;
/// Points whose disagreement bracket is this close to zero are redrawn.
pub const KINK_EXCLUSION: f64 = 1e-3;
pub const KL_INVERSE_TOL: f64 = 1e-9;
/// Self-consistency targets keep their solution at most `1 − this`.
pub const KL_INVERSE_MARGIN: f64 = 1e-6;
/// Largest allowed gap between a Catoni-type bound and its empirical term at `m = 1e8`.
pub const SWEEP_FINAL_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Identities,
    FiniteVote,
    McGaussian,
    Gradients,
    BoundsConsistency,
}

impl Suite {
    pub const ALL: [Suite; 5] = [
        Suite::Identities,
        Suite::FiniteVote,
        Suite::McGaussian,
        Suite::Gradients,
        Suite::BoundsConsistency,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Identities => "identities",
            Suite::FiniteVote => "finite-vote",
            Suite::McGaussian => "mc-gaussian",
            Suite::Gradients => "gradients",
            Suite::BoundsConsistency => "bounds-consistency",
        }
    }

    /// Random instances (or points per objective) checked by default.
    pub fn default_trials(self) -> usize {
        match self {
            Suite::Identities => 1000,
            Suite::FiniteVote => 200,
            Suite::McGaussian => 20,
            Suite::Gradients => 100,
            Suite::BoundsConsistency => 1000,
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| invalid(format!("unknown suite `{s}`")))
    }
}

/// One named property checked over many cases. `worst` is the largest
/// observed value of the checked quantity, which fails above `tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub cases: usize,
    pub failures: usize,
    /// Cases where the property did not apply.
    pub skipped: usize,
    pub worst: f64,
    pub tolerance: f64,
}

impl Check {
    fn new(name: &str, tolerance: f64) -> Self {
        Self {
            name: name.to_string(),
            cases: 0,
            failures: 0,
            skipped: 0,
            worst: f64::NEG_INFINITY,
            tolerance,
        }
    }

    /// Records `measure`, failing when it exceeds the tolerance or is NaN.
    fn record(&mut self, measure: f64) {
        self.cases += 1;
        if measure.is_nan() || measure > self.tolerance {
            self.failures += 1;
        }
        if measure.is_nan() || measure > self.worst {
            self.worst = measure;
        }
    }

    /// Records a pass/fail outcome together with a reported value.
    fn record_outcome(&mut self, ok: bool, value: f64) {
        self.cases += 1;
        if !ok {
            self.failures += 1;
        }
        if value.is_nan() || value > self.worst {
            self.worst = value;
        }
    }

    fn skip(&mut self) {
        self.skipped += 1;
    }

    pub fn passed(&self) -> bool {
        self.failures == 0 && self.cases > 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub seed: u64,
    pub trials: usize,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl SuiteReport {
    fn new(suite: Suite, seed: u64, trials: usize, checks: Vec<Check>) -> Self {
        let passed = checks.iter().all(Check::passed);
        Self {
            suite,
            seed,
            trials,
            checks,
            passed,
        }
    }
}

/// Runs a suite with `trials` random cases (the suite default when `None`).
pub fn run_suite(suite: Suite, seed: u64, trials: Option<usize>) -> Result<SuiteReport> {
    let trials = trials.unwrap_or_else(|| suite.default_trials());
    if trials == 0 {
        return Err(invalid("trials must be >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let checks = match suite {
        Suite::Identities => identities(&mut rng, trials)?,
        Suite::FiniteVote => finite_vote(&mut rng, trials)?,
        Suite::McGaussian => mc_gaussian(&mut rng, trials)?,
        Suite::Gradients => gradients(&mut rng, trials)?,
        Suite::BoundsConsistency => bounds_consistency(&mut rng, trials)?,
    };
    Ok(SuiteReport::new(suite, seed, trials, checks))
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// A random weight vector and labeled sample in a few dimensions.
fn random_linear_pair(rng: &mut ChaCha8Rng) -> Result<(LinearModel, LabeledSample)> {
    let d = rng.gen_range(2..=5);
    let m = rng.gen_range(5..=30);
    let scale = rng.gen_range(0.2..3.0);
    let w: Vec<f64> = (0..d).map(|_| scale * normal(rng)).collect();
    let rows: Vec<Vec<f64>> = (0..m).map(|_| (0..d).map(|_| normal(rng)).collect()).collect();
    let labels: Vec<f64> = (0..m).map(|_| if rng.gen_bool(0.5) { 1.0 } else { -1.0 }).collect();
    Ok((LinearModel::new(w)?, LabeledSample::from_dense(rows, &labels)?))
}

fn identities(rng: &mut ChaCha8Rng, trials: usize) -> Result<Vec<Check>> {
    let mut per_example = Check::new("loss-decomposition", EXACT_TOL);
    let mut finite = Check::new("finite-vote-decomposition", EXACT_TOL);
    let mut gaussian = Check::new("gaussian-decomposition", EXACT_TOL);
    for _ in 0..trials {
        let a = 6.0 * normal(rng);
        per_example.record((phi(a) - (0.5 * phi_dis(a) + phi(a) * phi(a))).abs());

        let inst = random_instance(rng, 16, 64)?;
        let r = exact_gibbs_risk(&inst.vote, &inst.source)?;
        let d = exact_disagreement(&inst.vote, &inst.source.marginal)?;
        let e = exact_joint_error(&inst.vote, &inst.source)?;
        finite.record((r - (0.5 * d + e)).abs());

        let (model, sample) = random_linear_pair(rng)?;
        let r = gibbs_risk(&model, &sample)?;
        let d = gibbs_self_disagreement(&model, &sample.unlabeled())?;
        let e = gibbs_joint_error(&model, &sample)?;
        gaussian.record((r - (0.5 * d + e)).abs());
    }
    Ok(vec![per_example, finite, gaussian])
}

fn finite_vote(rng: &mut ChaCha8Rng, trials: usize) -> Result<Vec<Check>> {
    let mut dis_hdh = Check::new("dis-below-half-hdh", EXACT_TOL);
    let mut vote_gibbs = Check::new("majority-below-twice-gibbs", EXACT_TOL);
    let mut cb = Check::new("c-bound", EXACT_TOL);
    let mut da = Check::new("da-bound", EXACT_TOL);
    let mut multi = Check::new("multisource-mixture", EXACT_TOL);
    for _ in 0..trials {
        let inst = random_instance(rng, 16, 64)?;
        let (v, s, t) = (&inst.vote, &inst.source, &inst.target);
        let dis = exact_dis_rho(v, &s.marginal, &t.marginal)?;
        dis_hdh.record(dis - h_delta_h_distance(&v.hypotheses, &s.marginal, &t.marginal)?);
        let rs = exact_gibbs_risk(v, s)?;
        let vote_risk = exact_majority_vote_risk(v, s)?;
        vote_gibbs.record(vote_risk - 2.0 * rs);
        match c_bound(v, s)?.value() {
            Some(bound) => cb.record(vote_risk - bound),
            None => cb.skip(),
        }
        let rt = exact_gibbs_risk(v, t)?;
        da.record(rt - (rs + 0.5 * dis + exact_lambda(v, s, t)?));
        let mix = exact_mixture_dis(v, &inst.extra_sources, &inst.mixture_weights, &t.marginal)?;
        let avg = exact_weighted_dis(v, &inst.extra_sources, &inst.mixture_weights, &t.marginal)?;
        multi.record(mix - avg);
    }
    Ok(vec![dis_hdh, vote_gibbs, cb, da, multi])
}

fn mc_gaussian(rng: &mut ChaCha8Rng, trials: usize) -> Result<Vec<Check>> {
    let mut risk = Check::new("gibbs-risk", MC_SIGMAS);
    let mut dis = Check::new("self-disagreement", MC_SIGMAS);
    let mut joint = Check::new("joint-error", MC_SIGMAS);
    for _ in 0..trials {
        let (model, sample) = random_linear_pair(rng)?;
        let closed = [
            gibbs_risk(&model, &sample)?,
            gibbs_self_disagreement(&model, &sample.unlabeled())?,
            gibbs_joint_error(&model, &sample)?,
        ];
        let quantities = [McQuantity::Risk, McQuantity::SelfDisagreement, McQuantity::JointError];
        for ((check, q), c) in [&mut risk, &mut dis, &mut joint].into_iter().zip(quantities).zip(closed) {
            let est = mc_estimate(&model, &sample, q, MC_DRAWS, rng.gen())?;
            let gap = (est.estimate - c).abs();
            let sigmas = if est.std_error > 0.0 {
                gap / est.std_error
            } else if gap <= EXACT_TOL {
                0.0
            } else {
                f64::INFINITY
            };
            check.record(sigmas);
        }
    }
    Ok(vec![risk, dis, joint])
}

fn uniform_rows(rng: &mut ChaCha8Rng, m: usize, d: usize) -> Vec<Vec<f64>> {
    (0..m).map(|_| (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect()
}

fn random_labeled(rng: &mut ChaCha8Rng, m: usize, d: usize) -> Result<LabeledSample> {
    let labels: Vec<f64> = (0..m).map(|_| if rng.gen_bool(0.5) { 1.0 } else { -1.0 }).collect();
    LabeledSample::from_dense(uniform_rows(rng, m, d), &labels)
}

fn random_point(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-scale..scale)).collect()
}

fn random_hp(rng: &mut ChaCha8Rng) -> Result<Hyperparams> {
    Hyperparams::new(rng.gen_range(0.1..10.0), rng.gen_range(0.1..10.0))
}

fn random_kernel(rng: &mut ChaCha8Rng) -> KernelSpec {
    if rng.gen_bool(0.5) {
        KernelSpec::Linear
    } else {
        KernelSpec::Rbf {
            gamma: rng.gen_range(0.1..2.0),
        }
    }
}

fn gradient_error<F: Objective + ?Sized>(f: &F, x: &[f64]) -> f64 {
    let fd = finite_difference_gradient(f, x, FD_STEP);
    relative_gradient_error(&f.gradient(x), &fd, 1e-8)
}

/// Draws points until `trials` of them clear the kink, recording each.
fn kink_free<G>(check: &mut Check, trials: usize, mut draw: G) -> Result<()>
where
    G: FnMut() -> Result<Option<f64>>,
{
    let mut attempts = 0;
    while check.cases < trials {
        attempts += 1;
        if attempts > 100 * trials {
            return Err(Error::Numerical(format!(
                "{}: too many points near the kink ({} skipped)",
                check.name, check.skipped
            )));
        }
        match draw()? {
            Some(err) => check.record(err),
            None => check.skip(),
        }
    }
    Ok(())
}

fn gradients(rng: &mut ChaCha8Rng, trials: usize) -> Result<Vec<Check>> {
    let opts = ObjectiveOptions::default();
    let mut pbgd3 = Check::new("pbgd3-primal", GRADIENT_TOL);
    for _ in 0..trials {
        let (m, d) = (rng.gen_range(3..=12), rng.gen_range(1..=5));
        let s = random_labeled(rng, m, d)?;
        let w = random_point(rng, d, 2.0);
        let f = Pbgd3Primal::new(&s, rng.gen_range(0.1..10.0), opts)?;
        pbgd3.record(gradient_error(&f, &w));
    }

    let mut pbgd3_dual = Check::new("pbgd3-dual", GRADIENT_TOL);
    for _ in 0..trials {
        let (m, d) = (rng.gen_range(3..=12), rng.gen_range(1..=4));
        let s = random_labeled(rng, m, d)?;
        let k = KernelMatrix::compute(&random_kernel(rng), s.instances());
        let alpha = random_point(rng, m, 1.0);
        let f = Pbgd3Dual::new(&k, s.labels(), rng.gen_range(0.1..10.0), opts)?;
        pbgd3_dual.record(gradient_error(&f, &alpha));
    }

    let mut pbda = Check::new("pbda-primal", GRADIENT_TOL);
    kink_free(&mut pbda, trials, || {
        let (m, d) = (rng.gen_range(3..=12), rng.gen_range(1..=5));
        let s = random_labeled(rng, m, d)?;
        let t = random_labeled(rng, m, d)?.unlabeled();
        let w = random_point(rng, d, 2.0);
        let f = PbdaPrimal::new(&s, &t, random_hp(rng)?, opts)?;
        if crate::optimize::pbda_bracket(&w, &s, &t, opts)?.abs() <= KINK_EXCLUSION {
            return Ok(None);
        }
        Ok(Some(gradient_error(&f, &w)))
    })?;

    let mut pbda_dual = Check::new("pbda-dual", GRADIENT_TOL);
    kink_free(&mut pbda_dual, trials, || {
        let (m, d) = (rng.gen_range(3..=10), rng.gen_range(1..=4));
        let s = random_labeled(rng, m, d)?;
        let t = random_labeled(rng, m, d)?;
        let anchors: Vec<FeatureVector> = s.instances().iter().chain(t.instances()).cloned().collect();
        let k = KernelMatrix::compute(&random_kernel(rng), &anchors);
        let alpha = random_point(rng, 2 * m, 1.0);
        let f = PbdaDual::new(&k, s.labels(), random_hp(rng)?, opts)?;
        if f.bracket(&alpha).abs() <= KINK_EXCLUSION {
            return Ok(None);
        }
        Ok(Some(gradient_error(&f, &alpha)))
    })?;

    let mut multi = Check::new("multisource-primal", GRADIENT_TOL);
    kink_free(&mut multi, trials, || {
        let (m, d, n) = (rng.gen_range(3..=10), rng.gen_range(1..=4), rng.gen_range(1..=3));
        let sources = (0..n).map(|_| random_labeled(rng, m, d)).collect::<Result<Vec<_>>>()?;
        let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let v: Vec<f64> = raw.iter().map(|x| x / total).collect();
        let t = random_labeled(rng, m, d)?.unlabeled();
        let w = random_point(rng, d, 2.0);
        let f = MultiPbdaPrimal::new(&sources, &v, &t, random_hp(rng)?, opts)?;
        if f.bracket(&w).abs() <= KINK_EXCLUSION {
            return Ok(None);
        }
        Ok(Some(gradient_error(&f, &w)))
    })?;

    Ok(vec![pbgd3, pbgd3_dual, pbda, pbda_dual, multi])
}

/// Residues `bound(m) − empirical` for `m = 1e2, …, 1e8`; passes when they
/// strictly decrease and the last is below [`SWEEP_FINAL_TOL`].
fn sweep(check: &mut Check, bound: impl Fn(f64) -> Result<f64>) -> Result<()> {
    let mut prev = f64::INFINITY;
    for e in 2..=8 {
        let residue = bound(10f64.powi(e))?;
        let ok = residue < prev && residue >= 0.0 && (e < 8 || residue < SWEEP_FINAL_TOL);
        check.record_outcome(ok, residue);
        prev = residue;
    }
    Ok(())
}

fn bounds_consistency(rng: &mut ChaCha8Rng, trials: usize) -> Result<Vec<Check>> {
    let mut seeger_mc = Check::new("seeger-below-mcallester", EXACT_TOL);
    let mut dis_seeger_mc = Check::new("dis-seeger-below-dis-mcallester", EXACT_TOL);
    let mut seeger_emp = Check::new("seeger-above-empirical", 0.0);
    let mut kl_inv = Check::new("kl-inverse-self-consistency", KL_INVERSE_TOL);
    for _ in 0..trials {
        let emp = rng.gen_range(0.0..1.0);
        let kl = rng.gen_range(0.0..20.0);
        let m = 10f64.powf(rng.gen_range(1.0..6.0));
        let delta = rng.gen_range(0.001..0.5);
        let s = seeger_bound(emp, kl, m, delta)?.value;
        seeger_mc.record(s - mcallester_bound(emp, kl, m, delta)?.value);
        seeger_emp.record(emp - s);
        let emp_dis = rng.gen_range(0.0..1.0);
        dis_seeger_mc.record(dis_seeger_bound(emp_dis, kl, m, delta)?.value - dis_mcallester_bound(emp_dis, kl, m, delta)?.value);

        // Targets come from an interior point so a solution below 1 exists.
        let q = rng.gen_range(0.0..0.99);
        let p_true = rng.gen_range(q..1.0 - KL_INVERSE_MARGIN);
        let eps = kl_bernoulli(q, p_true)?;
        if eps > 0.0 {
            let p = kl_inverse_upper(q, eps)?;
            kl_inv.record((kl_bernoulli(q, p)? - eps).abs());
        } else {
            kl_inv.skip();
        }
    }

    // Fixed ingredients for the large-sample sweeps.
    let (emp, emp_dis, kl, delta) = (0.1, 0.05, 0.5, 0.1);
    let mut catoni = Check::new("catoni-sweep", SWEEP_FINAL_TOL);
    sweep(&mut catoni, |m| Ok(catoni_bound(emp, kl, m, delta, 1.0 / m.sqrt())?.value - emp))?;
    let mut dis_catoni = Check::new("dis-catoni-sweep", SWEEP_FINAL_TOL);
    sweep(&mut dis_catoni, |m| {
        Ok(dis_catoni_bound(emp_dis, kl, m, delta, 0.5 / m.sqrt())?.value - emp_dis)
    })?;

    Ok(vec![seeger_mc, dis_seeger_mc, seeger_emp, kl_inv, catoni, dis_catoni])
}
