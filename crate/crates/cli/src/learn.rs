use std::path::{Path, PathBuf};

use clap::Args;
use pbda::gibbs_linear::{domain_disagreement, gibbs_risk};
use pbda::optimize::{train_multi_pbda, train_pbda, train_pbgd3, Hyperparams, TrainOutcome};
use pbda::validation::{
    cell_trainer, grid_search, reverse_cv_risk, score_table_tsv, Criterion, FoldPlan, GridCell, GridSpec,
    PbdaTrainer, Pbgd3Trainer, Trainer,
};
use pbda::{KernelSpec, Scorer, TrainedModel};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::common::{
    emit, merge_config, one_or_many, read_domains, read_samples, to_json, usage, write_text, Algo, CliResult,
    KernelChoice, KnobArgs, Knobs,
};

fn one() -> f64 {
    1.0
}

fn default_folds() -> usize {
    5
}

#[derive(Debug, Args, Serialize)]
pub struct TrainArgs {
    /// JSON config; flags override its values.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub algo: Option<Algo>,
    /// Labeled source sample (svmlight). Repeat for pbda-multi.
    #[arg(long)]
    pub source: Vec<PathBuf>,
    /// Target sample (svmlight); its labels are ignored.
    #[arg(long)]
    pub target: Option<PathBuf>,
    /// Weight on the domain disagreement.
    #[arg(long = "A")]
    #[serde(rename = "A")]
    pub a: Option<f64>,
    /// Weight on the source risk.
    #[arg(long = "C")]
    #[serde(rename = "C")]
    pub c: Option<f64>,
    #[arg(long, value_enum)]
    pub kernel: Option<KernelChoice>,
    /// RBF width γ in exp(−γ‖x − x′‖²).
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Mixture weights for pbda-multi, comma separated; uniform by default.
    #[arg(long, value_delimiter = ',')]
    pub source_weights: Vec<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub knobs: KnobArgs,
    /// Where to write the model JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct TrainConfig {
    pub algo: Algo,
    #[serde(deserialize_with = "one_or_many")]
    pub source: Vec<PathBuf>,
    #[serde(default)]
    pub target: Option<PathBuf>,
    #[serde(rename = "A", default = "one")]
    pub a: f64,
    #[serde(rename = "C", default = "one")]
    pub c: f64,
    #[serde(default)]
    pub kernel: KernelChoice,
    #[serde(default = "one")]
    pub gamma: f64,
    #[serde(default)]
    pub source_weights: Vec<f64>,
    #[serde(flatten)]
    pub knobs: Knobs,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

fn single<'a, T>(items: &'a [T], what: &str) -> CliResult<&'a T> {
    match items {
        [x] => Ok(x),
        _ => Err(usage(format!("{what} takes exactly one source, got {}", items.len()))),
    }
}

pub fn train(args: TrainArgs) -> CliResult<()> {
    let cfg: TrainConfig = merge_config(args.config.as_deref(), &args)?;
    let settings = cfg.knobs.settings(cfg.kernel.spec(cfg.gamma)?)?;
    let hp = Hyperparams::new(cfg.c, cfg.a)?;
    let (sources, target) = read_domains(&cfg.source, cfg.target.as_deref())?;
    let need_target = || target.as_ref().ok_or_else(|| usage("--target is required for this algorithm"));

    let weights = if cfg.source_weights.is_empty() {
        vec![1.0 / sources.len() as f64; sources.len()]
    } else {
        cfg.source_weights.clone()
    };
    let outcome: TrainOutcome = match cfg.algo {
        Algo::Pbgd3 => train_pbgd3(single(&sources, "pbgd3")?, hp.c, &settings)?,
        Algo::Pbda => train_pbda(single(&sources, "pbda")?, need_target()?, hp, &settings)?,
        Algo::PbdaMulti => train_multi_pbda(&sources, &weights, need_target()?, hp, &settings)?,
    };
    let model = &outcome.model;
    if let Some(out) = &cfg.out {
        model.save_json(out)?;
    }

    let mut risk = 0.0;
    let mut error = 0.0;
    let mut per_source_dis = Vec::new();
    for (s, v) in sources.iter().zip(&weights) {
        risk += v * gibbs_risk(model, s)?;
        error += v * model.zero_one_error(s)?;
        if let Some(t) = &target {
            per_source_dis.push(domain_disagreement(model, &s.unlabeled(), t)?);
        }
    }
    let dis = (!per_source_dis.is_empty()).then(|| per_source_dis.iter().zip(&weights).map(|(d, v)| d * v).sum::<f64>());
    let mut body = json!({
        "objective": outcome.summary.value,
        "iterations": outcome.summary.iterations,
        "converged": outcome.converged(),
        "optimizer": to_json(&outcome.summary)?,
        "warm_start": to_json(&outcome.warm_start)?,
        "empirical_risk": risk,
        "empirical_dis": dis,
        "source_error": error,
        "kl_term": model.kl_term(),
        "model": cfg.out,
    });
    if sources.len() > 1 {
        body["per_source_dis"] = to_json(&per_source_dis)?;
        body["source_weights"] = to_json(&weights)?;
    }
    emit(&cfg, body)
}

#[derive(Debug, Args, Serialize)]
pub struct PredictArgs {
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Model JSON written by `train`.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Sample to label (svmlight).
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// File receiving one ±1 per line; predictions go into the JSON report
    /// when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct PredictConfig {
    pub model: PathBuf,
    pub data: PathBuf,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

pub fn predict(args: PredictArgs) -> CliResult<()> {
    let cfg: PredictConfig = merge_config(args.config.as_deref(), &args)?;
    let model = TrainedModel::load_json(&cfg.model)?;
    let mut data = read_samples(std::slice::from_ref(&cfg.data))?.pop().expect("one sample");
    if let Some(d) = model.input_dim() {
        if data.dim() < d {
            data = data.widened(d)?;
        }
    }
    let labels = model.predict_all(data.instances())?;
    let error = model.zero_one_error(&data)?;
    let mut body = json!({ "n": data.len(), "zero_one_error": error });
    match &cfg.out {
        Some(out) => {
            let text: String = labels.iter().map(|y| format!("{}\n", i8::from(*y))).collect();
            write_text(out, &text)?;
        }
        None => body["predictions"] = to_json(&labels)?,
    }
    emit(&cfg, body)
}

#[derive(Debug, Args, Serialize)]
pub struct ReverseCvArgs {
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub algo: Option<Algo>,
    #[arg(long)]
    pub source: Option<PathBuf>,
    #[arg(long)]
    pub target: Option<PathBuf>,
    #[arg(long = "A")]
    #[serde(rename = "A")]
    pub a: Option<f64>,
    #[arg(long = "C")]
    #[serde(rename = "C")]
    pub c: Option<f64>,
    #[arg(long, value_enum)]
    pub kernel: Option<KernelChoice>,
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Number of folds.
    #[arg(long)]
    pub k: Option<usize>,
    /// Seed of the fold shuffle.
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub knobs: KnobArgs,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ReverseCvConfig {
    pub algo: Algo,
    pub source: PathBuf,
    pub target: PathBuf,
    #[serde(rename = "A", default = "one")]
    pub a: f64,
    #[serde(rename = "C", default = "one")]
    pub c: f64,
    #[serde(default)]
    pub kernel: KernelChoice,
    #[serde(default = "one")]
    pub gamma: f64,
    #[serde(default = "default_folds")]
    pub k: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(flatten)]
    pub knobs: Knobs,
}

pub fn reverse_cv(args: ReverseCvArgs) -> CliResult<()> {
    let cfg: ReverseCvConfig = merge_config(args.config.as_deref(), &args)?;
    let settings = cfg.knobs.settings(cfg.kernel.spec(cfg.gamma)?)?;
    let hp = Hyperparams::new(cfg.c, cfg.a)?;
    let (sources, target) = read_domains(std::slice::from_ref(&cfg.source), Some(&cfg.target))?;
    let (source, target) = (&sources[0], target.expect("target sample"));
    let trainer: Box<dyn Trainer> = match cfg.algo {
        Algo::Pbgd3 => Box::new(Pbgd3Trainer { c: hp.c, settings }),
        Algo::Pbda => Box::new(PbdaTrainer { hp, settings }),
        Algo::PbdaMulti => return Err(usage("reverse-cv supports pbgd3 and pbda")),
    };
    let plan = FoldPlan::new(cfg.k, source.len(), target.len(), cfg.seed)?;
    let risk = reverse_cv_risk(&trainer, source, &target, &plan)?;
    eprintln!("reverse-cv risk: {risk}");
    emit(&cfg, json!({ "risk": risk, "folds": to_json(&plan)? }))
}

#[derive(Debug, Args, Serialize)]
pub struct GridSearchArgs {
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub algo: Option<Algo>,
    #[arg(long)]
    pub source: Option<PathBuf>,
    #[arg(long)]
    pub target: Option<PathBuf>,
    /// JSON file with `A_values`, `C_values` and `kernel_values`.
    #[arg(long)]
    pub grid_config: Option<PathBuf>,
    /// Kernel of the default 20 × 20 grid when no grid is given.
    #[arg(long, value_enum)]
    pub kernel: Option<KernelChoice>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub criterion: Option<Criterion>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Where to write the TSV score table; standard error when omitted.
    #[arg(long)]
    pub table: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub knobs: KnobArgs,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct GridSearchConfig {
    pub algo: Algo,
    pub source: PathBuf,
    pub target: PathBuf,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub grid_config: Option<PathBuf>,
    #[serde(default)]
    pub kernel: KernelChoice,
    #[serde(default = "one")]
    pub gamma: f64,
    #[serde(default = "default_criterion")]
    pub criterion: Criterion,
    #[serde(default = "default_folds")]
    pub k: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub table: Option<PathBuf>,
    #[serde(flatten)]
    pub knobs: Knobs,
}

fn default_criterion() -> Criterion {
    Criterion::Rcv
}

fn read_grid(path: &Path) -> CliResult<GridSpec> {
    let text =
        std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read grid {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| usage(format!("grid {}: {e}", path.display())))
}

impl GridSearchConfig {
    fn resolve_grid(&self) -> CliResult<GridSpec> {
        let mut grid = match (&self.grid_config, &self.grid) {
            (Some(_), Some(_)) => return Err(usage("give either `grid` or `grid_config`, not both")),
            (Some(p), None) => read_grid(p)?,
            (None, Some(g)) => g.clone(),
            (None, None) => GridSpec::default_for(self.kernel.spec(self.gamma)?.unwrap_or(KernelSpec::Linear)),
        };
        if self.algo == Algo::Pbgd3 {
            grid.a_values = vec![0.0];
        }
        grid.validate()?;
        Ok(grid)
    }
}

pub fn grid(args: GridSearchArgs) -> CliResult<()> {
    let cfg: GridSearchConfig = merge_config(args.config.as_deref(), &args)?;
    let grid = cfg.resolve_grid()?;
    let source_only = match cfg.algo {
        Algo::Pbgd3 => true,
        Algo::Pbda => false,
        Algo::PbdaMulti => return Err(usage("grid-search supports pbgd3 and pbda")),
    };
    let base = cfg.knobs.settings(None)?;
    let (sources, target) = read_domains(std::slice::from_ref(&cfg.source), Some(&cfg.target))?;
    let (source, target) = (&sources[0], target.expect("target sample"));
    let plan = FoldPlan::new(cfg.k, source.len(), target.len(), cfg.seed)?;
    let result = grid_search(
        |cell: &GridCell| cell_trainer(cell, source_only, base),
        source,
        &target,
        &grid,
        &plan,
        cfg.criterion,
    )?;
    let table = score_table_tsv(&result.rows);
    match &cfg.table {
        Some(p) => write_text(p, &table)?,
        None => eprint!("{table}"),
    }
    emit(
        &cfg,
        json!({
            "grid": to_json(&grid)?,
            "best": to_json(&result.best)?,
            "best_score": result.best_score,
            "criterion": to_json(&result.criterion)?,
            "rows": to_json(&result.rows)?,
        }),
    )
}
