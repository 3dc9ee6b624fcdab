//! k-fold cross-validation, reverse validation and grid search over (A, C, kernel).

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::sampling::shuffled_indices;
use crate::error::{invalid, Error, Result};
use crate::kernel::KernelSpec;
use crate::model::{Scorer, TrainedModel};
use crate::optimize::{train_pbda, train_pbgd3, Hyperparams, TrainSettings};
use crate::sample::{LabeledSample, UnlabeledSample};

/// Learns a model from a labeled source and an unlabeled target sample.
/// Source-only learners ignore the target.
pub trait Trainer: Sync {
    fn train(&self, source: &LabeledSample, target: &UnlabeledSample) -> Result<TrainedModel>;
}

impl<F> Trainer for F
where
    F: Fn(&LabeledSample, &UnlabeledSample) -> Result<TrainedModel> + Sync,
{
    fn train(&self, source: &LabeledSample, target: &UnlabeledSample) -> Result<TrainedModel> {
        self(source, target)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pbgd3Trainer {
    pub c: f64,
    pub settings: TrainSettings,
}

impl Trainer for Pbgd3Trainer {
    fn train(&self, source: &LabeledSample, _target: &UnlabeledSample) -> Result<TrainedModel> {
        Ok(train_pbgd3(source, self.c, &self.settings)?.model)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PbdaTrainer {
    pub hp: Hyperparams,
    pub settings: TrainSettings,
}

impl Trainer for PbdaTrainer {
    fn train(&self, source: &LabeledSample, target: &UnlabeledSample) -> Result<TrainedModel> {
        Ok(train_pbda(source, target, self.hp, &self.settings)?.model)
    }
}

/// Paired k-fold partitions of a source and a target sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    pub source_folds: Vec<Vec<usize>>,
    pub target_folds: Vec<Vec<usize>>,
    pub seed: u64,
}

fn contiguous_folds(perm: &[usize], k: usize) -> Vec<Vec<usize>> {
    let m = perm.len();
    (0..k).map(|i| perm[i * m / k..(i + 1) * m / k].to_vec()).collect()
}

fn check_partition(folds: &[Vec<usize>], n: usize, what: &str) -> Result<()> {
    let mut seen = vec![false; n];
    for fold in folds {
        if fold.is_empty() {
            return Err(invalid(format!("{what} fold is empty")));
        }
        for &i in fold {
            if i >= n || std::mem::replace(&mut seen[i], true) {
                return Err(invalid(format!("{what} folds are not a partition of 0..{n}")));
            }
        }
    }
    if seen.iter().any(|s| !s) {
        return Err(invalid(format!("{what} folds do not cover 0..{n}")));
    }
    Ok(())
}

fn complement(fold: &[usize], n: usize) -> Vec<usize> {
    let mut keep = vec![true; n];
    for &i in fold {
        keep[i] = false;
    }
    (0..n).filter(|&i| keep[i]).collect()
}

impl FoldPlan {
    /// Shuffles each index set with a seeded generator and cuts it into `k`
    /// contiguous runs whose sizes differ by at most one.
    pub fn new(k: usize, source_len: usize, target_len: usize, seed: u64) -> Result<Self> {
        if k < 2 {
            return Err(invalid(format!("k must be >= 2, got {k}")));
        }
        if source_len < k || target_len < k {
            return Err(invalid(format!(
                "k = {k} folds need at least k points per sample (source {source_len}, target {target_len})"
            )));
        }
        Ok(Self {
            k,
            source_folds: contiguous_folds(&shuffled_indices(source_len, seed), k),
            target_folds: contiguous_folds(&shuffled_indices(target_len, seed ^ 0x9e37_79b9_7f4a_7c15), k),
            seed,
        })
    }

    /// Checks that both fold lists partition their samples into `k` non-empty parts.
    pub fn validate(&self, source_len: usize, target_len: usize) -> Result<()> {
        if self.k < 2 || self.source_folds.len() != self.k || self.target_folds.len() != self.k {
            return Err(invalid(format!("fold plan must hold k >= 2 folds per sample (k = {})", self.k)));
        }
        check_partition(&self.source_folds, source_len, "source")?;
        check_partition(&self.target_folds, target_len, "target")
    }
}

/// Average held-out 0-1 error over the folds. The trainer sees the
/// retained target points as its unlabeled sample.
pub fn cv_risk(
    trainer: &dyn Trainer,
    source: &LabeledSample,
    target: &UnlabeledSample,
    plan: &FoldPlan,
) -> Result<f64> {
    plan.validate(source.len(), target.len())?;
    let mut total = 0.0;
    for (sf, tf) in plan.source_folds.iter().zip(&plan.target_folds) {
        let s_train = source.select(&complement(sf, source.len()));
        let t_train = target.select(&complement(tf, target.len()));
        let model = trainer.train(&s_train, &t_train)?;
        total += model.zero_one_error(&source.select(sf))?;
    }
    Ok(total / plan.k as f64)
}

/// Reverse validation: per fold, train on the retained data, self-label the
/// retained target points, train a reverse model with those as the labeled
/// sample and the retained source points as the unlabeled one, then score
/// the reverse model on the held-out source fold.
pub fn reverse_cv_risk(
    trainer: &dyn Trainer,
    source: &LabeledSample,
    target: &UnlabeledSample,
    plan: &FoldPlan,
) -> Result<f64> {
    plan.validate(source.len(), target.len())?;
    let mut total = 0.0;
    for (sf, tf) in plan.source_folds.iter().zip(&plan.target_folds) {
        let s_train = source.select(&complement(sf, source.len()));
        let t_train = target.select(&complement(tf, target.len()));
        let forward = trainer.train(&s_train, &t_train)?;
        let pseudo = t_train.with_labels(forward.predict_all(t_train.instances())?)?;
        let reverse = trainer.train(&pseudo, &s_train.unlabeled())?;
        total += reverse.zero_one_error(&source.select(sf))?;
    }
    Ok(total / plan.k as f64)
}

/// `n` points evenly spaced on a log scale from `lo` to `hi`.
pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.log10(), hi.log10());
            (0..n)
                .map(|i| 10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64))
                .collect()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(rename = "A_values")]
    pub a_values: Vec<f64>,
    #[serde(rename = "C_values")]
    pub c_values: Vec<f64>,
    pub kernel_values: Vec<KernelSpec>,
}

impl GridSpec {
    /// `n_a` log-spaced A in `[0.01, 1e6]` and `n_c` log-spaced C in `[1, 1e8]`.
    pub fn log_grid(n_a: usize, n_c: usize, kernels: Vec<KernelSpec>) -> Self {
        Self {
            a_values: log_space(0.01, 1e6, n_a),
            c_values: log_space(1.0, 1e8, n_c),
            kernel_values: kernels,
        }
    }

    /// The full 20 × 20 grid.
    pub fn default_for(kernel: KernelSpec) -> Self {
        Self::log_grid(20, 20, vec![kernel])
    }

    pub fn validate(&self) -> Result<()> {
        if self.a_values.is_empty() || self.c_values.is_empty() || self.kernel_values.is_empty() {
            return Err(invalid("grid lists must be non-empty"));
        }
        // A = 0 is allowed so a grid can include the source-only learner.
        if let Some(a) = self.a_values.iter().find(|a| !(**a >= 0.0 && a.is_finite())) {
            return Err(invalid(format!("A values must be finite and >= 0, got {a}")));
        }
        if let Some(c) = self.c_values.iter().find(|c| !(**c > 0.0 && c.is_finite())) {
            return Err(invalid(format!("C values must be finite and > 0, got {c}")));
        }
        self.kernel_values.iter().try_for_each(KernelSpec::validate)
    }

    /// Cells in grid order: kernel outermost, then A, then C.
    pub fn cells(&self) -> Vec<GridCell> {
        let mut out = Vec::with_capacity(self.a_values.len() * self.c_values.len() * self.kernel_values.len());
        for &kernel in &self.kernel_values {
            for &a in &self.a_values {
                for &c in &self.c_values {
                    out.push(GridCell { a, c, kernel });
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "C")]
    pub c: f64,
    pub kernel: KernelSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    Cv,
    Rcv,
    /// Unweighted mean of the cv and rcv scores.
    #[serde(alias = "mean_cv_rcv")]
    Mean,
}

impl std::str::FromStr for Criterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cv" => Ok(Criterion::Cv),
            "rcv" => Ok(Criterion::Rcv),
            "mean" | "mean_cv_rcv" => Ok(Criterion::Mean),
            _ => Err(invalid(format!("unknown criterion `{s}` (expected cv, rcv or mean)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRow {
    #[serde(flatten)]
    pub cell: GridCell,
    pub cv: Option<f64>,
    pub rcv: Option<f64>,
    /// `+∞` for failed cells.
    #[serde(with = "infinite_as_null")]
    pub criterion: f64,
    /// 1 for the selected cell.
    pub rank: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

mod infinite_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub best: GridCell,
    pub best_score: f64,
    pub criterion: Criterion,
    pub rows: Vec<ScoreRow>,
}

fn score_cell<T: Trainer>(
    trainer: &T,
    source: &LabeledSample,
    target: &UnlabeledSample,
    plan: &FoldPlan,
    criterion: Criterion,
) -> Result<(Option<f64>, Option<f64>, f64)> {
    let cv = match criterion {
        Criterion::Cv | Criterion::Mean => Some(cv_risk(trainer, source, target, plan)?),
        Criterion::Rcv => None,
    };
    let rcv = match criterion {
        Criterion::Rcv | Criterion::Mean => Some(reverse_cv_risk(trainer, source, target, plan)?),
        Criterion::Cv => None,
    };
    let score = match (cv, rcv) {
        (Some(a), Some(b)) => 0.5 * (a + b),
        (Some(a), None) | (None, Some(a)) => a,
        (None, None) => unreachable!("every criterion computes a score"),
    };
    Ok((cv, rcv, score))
}

/// Scores every cell (in parallel) and picks the minimum, breaking ties by
/// smaller A, then smaller C, then grid order. Cells whose training fails
/// score `+∞` and keep the error message. Fails only if every cell fails.
pub fn grid_search<F, T>(
    factory: F,
    source: &LabeledSample,
    target: &UnlabeledSample,
    grid: &GridSpec,
    plan: &FoldPlan,
    criterion: Criterion,
) -> Result<GridResult>
where
    F: Fn(&GridCell) -> T + Sync,
    T: Trainer,
{
    grid.validate()?;
    plan.validate(source.len(), target.len())?;
    let cells = grid.cells();
    let mut rows: Vec<ScoreRow> = cells
        .par_iter()
        .map(|cell| {
            let trainer = factory(cell);
            match score_cell(&trainer, source, target, plan, criterion) {
                Ok((cv, rcv, s)) if s.is_finite() => ScoreRow {
                    cell: *cell,
                    cv,
                    rcv,
                    criterion: s,
                    rank: 0,
                    error: None,
                },
                Ok((cv, rcv, s)) => ScoreRow {
                    cell: *cell,
                    cv,
                    rcv,
                    criterion: f64::INFINITY,
                    rank: 0,
                    error: Some(format!("non-finite score {s}")),
                },
                Err(e) => ScoreRow {
                    cell: *cell,
                    cv: None,
                    rcv: None,
                    criterion: f64::INFINITY,
                    rank: 0,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    let mut order: Vec<usize> = (0..rows.len()).collect();
    order.sort_by(|&i, &j| {
        let (a, b) = (&rows[i], &rows[j]);
        a.criterion
            .total_cmp(&b.criterion)
            .then(a.cell.a.total_cmp(&b.cell.a))
            .then(a.cell.c.total_cmp(&b.cell.c))
            .then(i.cmp(&j))
    });
    for (r, &i) in order.iter().enumerate() {
        rows[i].rank = r + 1;
    }
    let best = &rows[order[0]];
    if !best.criterion.is_finite() {
        return Err(Error::Numerical(format!(
            "every grid cell failed; first error: {}",
            best.error.as_deref().unwrap_or("unknown")
        )));
    }
    Ok(GridResult {
        best: best.cell,
        best_score: best.criterion,
        criterion,
        rows,
    })
}

/// Tab-separated score table with a header row, in grid order.
pub fn score_table_tsv(rows: &[ScoreRow]) -> String {
    fn opt(v: Option<f64>) -> String {
        v.map_or_else(|| "NA".to_string(), |x| x.to_string())
    }
    let mut out = String::from("A\tC\tkernel\tgamma\tcv\trcv\tcriterion\trank\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            r.cell.a,
            r.cell.c,
            r.cell.kernel.name(),
            opt(r.cell.kernel.gamma()),
            opt(r.cv),
            opt(r.rcv),
            if r.criterion.is_finite() { r.criterion.to_string() } else { "inf".to_string() },
            r.rank
        );
    }
    out
}

/// Trainer for one grid cell: PBGD3 when `source_only`, PBDA otherwise,
/// always in kernel form with the cell's kernel.
pub fn cell_trainer(cell: &GridCell, source_only: bool, base: TrainSettings) -> Box<dyn Trainer> {
    let settings = TrainSettings {
        kernel: Some(cell.kernel),
        ..base
    };
    if source_only {
        Box::new(Pbgd3Trainer { c: cell.c, settings })
    } else {
        Box::new(PbdaTrainer {
            hp: Hyperparams { a: cell.a, c: cell.c },
            settings,
        })
    }
}

impl Trainer for Box<dyn Trainer> {
    fn train(&self, source: &LabeledSample, target: &UnlabeledSample) -> Result<TrainedModel> {
        (**self).train(source, target)
    }
}
