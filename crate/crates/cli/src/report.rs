use std::path::PathBuf;

use clap::Args;
use pbda::benchmark::{run_benchmark, BenchmarkConfig};
use pbda::bounds::{evaluate, BoundInputs};
use pbda::gibbs_linear::{domain_disagreement, gibbs_risk};
use pbda::validation::Criterion;
use pbda::verify::{run_suite, Suite};
use pbda::TrainedModel;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::common::{emit, merge_config, read_samples, to_json, usage, write_text, CliResult};

/// Seed used by `verify` when none is given.
pub const DEFAULT_VERIFY_SEED: u64 = 20_240_601;

#[derive(Debug, Args, Serialize)]
pub struct BoundArgs {
    /// JSON file naming the bound and its ingredients; flags override it.
    #[arg(long, alias = "config")]
    #[serde(skip)]
    pub report_config: Option<PathBuf>,
    /// Bound name, e.g. seeger, catoni, dis_catoni, da_catoni.
    #[arg(long)]
    pub bound: Option<String>,
    /// Model whose empirical quantities fill in missing ingredients.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Labeled source sample for the model's empirical risk and `m`.
    #[arg(long)]
    pub source: Option<PathBuf>,
    /// Target sample for the domain disagreement and `m_prime`.
    #[arg(long)]
    pub target: Option<PathBuf>,
    #[arg(long)]
    pub empirical_risk: Option<f64>,
    #[arg(long)]
    pub empirical_dis: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub per_source_dis: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    pub source_weights: Vec<f64>,
    #[arg(long)]
    pub kl_term: Option<f64>,
    #[arg(long)]
    pub m: Option<f64>,
    #[arg(long)]
    pub m1: Option<f64>,
    #[arg(long)]
    pub m2: Option<f64>,
    #[arg(long)]
    pub m_prime: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct BoundConfig {
    pub bound: String,
    #[serde(default)]
    pub model: Option<PathBuf>,
    #[serde(default)]
    pub source: Option<PathBuf>,
    #[serde(default)]
    pub target: Option<PathBuf>,
    #[serde(default)]
    pub empirical_risk: Option<f64>,
    #[serde(default)]
    pub empirical_dis: Option<f64>,
    #[serde(default)]
    pub per_source_dis: Option<Vec<f64>>,
    #[serde(default)]
    pub source_weights: Option<Vec<f64>>,
    #[serde(default)]
    pub kl_term: Option<f64>,
    #[serde(default)]
    pub m: Option<f64>,
    #[serde(default)]
    pub m1: Option<f64>,
    #[serde(default)]
    pub m2: Option<f64>,
    #[serde(default)]
    pub m_prime: Option<f64>,
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default)]
    pub c: Option<f64>,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub lambda: Option<f64>,
}

impl BoundConfig {
    fn supplied(&self) -> BoundInputs {
        BoundInputs {
            empirical_risk: self.empirical_risk,
            empirical_dis: self.empirical_dis,
            per_source_dis: self.per_source_dis.clone(),
            source_weights: self.source_weights.clone(),
            kl_term: self.kl_term,
            m: self.m,
            m1: self.m1,
            m2: self.m2,
            m_prime: self.m_prime,
            delta: self.delta,
            c: self.c,
            alpha: self.alpha,
            lambda: self.lambda,
        }
    }

    /// Ingredients measured from the model and data; explicit values win.
    fn inputs(&self) -> CliResult<BoundInputs> {
        let mut x = self.supplied();
        let Some(model_path) = &self.model else {
            if self.source.is_some() || self.target.is_some() {
                return Err(usage("--source/--target need --model"));
            }
            return Ok(x);
        };
        let model = TrainedModel::load_json(model_path)?;
        x.kl_term.get_or_insert(model.kl_term());
        let mut paths: Vec<PathBuf> = self.source.iter().cloned().collect();
        paths.extend(self.target.iter().cloned());
        let mut samples = read_samples(&paths)?;
        if let Some(d) = model.input_dim() {
            for s in &mut samples {
                if s.dim() < d {
                    *s = s.widened(d)?;
                }
            }
        }
        let target = self.target.as_ref().map(|_| samples.pop().expect("target sample"));
        let source = self.source.as_ref().map(|_| samples.pop().expect("source sample"));
        if let Some(s) = &source {
            x.empirical_risk.get_or_insert(gibbs_risk(&model, s)?);
            x.m.get_or_insert(s.len() as f64);
        }
        if let Some(t) = &target {
            let s = source.as_ref().ok_or_else(|| usage("--target needs --source"))?;
            x.empirical_dis
                .get_or_insert(domain_disagreement(&model, &s.unlabeled(), &t.unlabeled())?);
            x.m_prime.get_or_insert(t.len() as f64);
        }
        Ok(x)
    }
}

pub fn bound(args: BoundArgs) -> CliResult<()> {
    let cfg: BoundConfig = merge_config(args.report_config.as_deref(), &args)?;
    let inputs = cfg.inputs()?;
    let report = evaluate(&cfg.bound, &inputs)?;
    emit(&cfg, json!({ "inputs": to_json(&inputs)?, "report": to_json(&report)? }))
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyArgs {
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// identities, finite-vote, mc-gaussian, gradients, bounds-consistency or all.
    #[arg(long)]
    pub suite: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Random cases per check; each suite has its own default.
    #[arg(long)]
    pub trials: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct VerifyConfig {
    #[serde(default = "all_suites")]
    pub suite: String,
    #[serde(default = "default_verify_seed")]
    pub seed: u64,
    #[serde(default)]
    pub trials: Option<usize>,
}

fn all_suites() -> String {
    "all".into()
}

fn default_verify_seed() -> u64 {
    DEFAULT_VERIFY_SEED
}

/// Runs the requested suites; `Ok(false)` when any check fails.
pub fn verify(args: VerifyArgs) -> CliResult<bool> {
    let cfg: VerifyConfig = merge_config(args.config.as_deref(), &args)?;
    let suites: Vec<Suite> = match cfg.suite.as_str() {
        "all" => Suite::ALL.to_vec(),
        name => vec![name.parse().map_err(|e: pbda::Error| usage(e.to_string()))?],
    };
    let reports = suites
        .iter()
        .map(|&s| run_suite(s, cfg.seed, cfg.trials))
        .collect::<pbda::Result<Vec<_>>>()?;
    let passed = reports.iter().all(|r| r.passed);
    for r in &reports {
        for c in &r.checks {
            eprintln!(
                "{} {}/{}: {} failures in {} cases, worst {:.3e} (tol {:.0e})",
                if c.passed() { "PASS" } else { "FAIL" },
                r.suite,
                c.name,
                c.failures,
                c.cases,
                c.worst,
                c.tolerance
            );
        }
    }
    emit(&cfg, json!({ "passed": passed, "suites": to_json(&reports)? }))?;
    Ok(passed)
}

#[derive(Debug, Args, Serialize)]
pub struct BenchmarkArgs {
    /// Benchmark config JSON; flags override its values.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Rotation angles in degrees, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub angles: Vec<f64>,
    #[arg(long)]
    pub repeats: Option<usize>,
    #[arg(long)]
    pub n_per_class: Option<usize>,
    #[arg(long)]
    pub test_per_class: Option<usize>,
    #[arg(long)]
    pub noise_sd: Option<f64>,
    #[arg(long)]
    pub folds: Option<usize>,
    /// Selection rule for PBDA.
    #[arg(long)]
    pub criterion: Option<Criterion>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Where to write the averaged error table (TSV).
    #[arg(long)]
    #[serde(skip)]
    pub table: Option<PathBuf>,
}

pub fn benchmark(args: BenchmarkArgs) -> CliResult<()> {
    let cfg: BenchmarkConfig = merge_config(args.config.as_deref(), &args)?;
    let report = run_benchmark(&cfg)?;
    let mut table = String::from("angle\tpbda_mean\tpbda_sd\tpbgd3_mean\tpbgd3_sd\n");
    for s in &report.summary {
        table.push_str(&format!(
            "{}\t{:.4}\t{:.4}\t{:.4}\t{:.4}\n",
            s.angle, s.pbda_mean, s.pbda_sd, s.pbgd3_mean, s.pbgd3_sd
        ));
    }
    match &args.table {
        Some(p) => write_text(p, &table)?,
        None => eprint!("{table}"),
    }
    emit(
        &cfg,
        json!({ "trials": to_json(&report.trials)?, "summary": to_json(&report.summary)? }),
    )
}
