//! Rotated-moons benchmark: PBDA tuned by reverse validation against PBGD3
//! tuned by cross-validation, averaged over repeats for each angle.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::moons::{gen_moons, MoonsConfig, ThetaMode};
use crate::error::{invalid, Result};
use crate::kernel::KernelSpec;
use crate::model::Scorer;
use crate::optimize::{train_pbda, train_pbgd3, Hyperparams, LineSearch, MinimizeSettings, TrainSettings};
use crate::sample::LabeledSample;
use crate::validation::{cell_trainer, grid_search, log_space, Criterion, FoldPlan, GridCell, GridSpec};

fn default_angles() -> Vec<f64> {
    vec![10.0, 20.0, 30.0, 40.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BenchmarkConfig {
    pub angles: Vec<f64>,
    pub repeats: usize,
    /// Per class, for the source and for the unlabeled target sample.
    pub n_per_class: usize,
    /// Per class, for the held-out target test set.
    pub test_per_class: usize,
    pub noise_sd: f64,
    pub kernel: KernelSpec,
    #[serde(rename = "A_values")]
    pub a_values: Vec<f64>,
    #[serde(rename = "C_values")]
    pub c_values: Vec<f64>,
    pub folds: usize,
    /// Selection rule for PBDA; PBGD3 always uses plain cross-validation.
    pub criterion: Criterion,
    pub seed: u64,
    pub minimize: MinimizeSettings,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        Self {
            angles: default_angles(),
            repeats: 10,
            n_per_class: 150,
            test_per_class: 500,
            noise_sd: 0.1,
            kernel: KernelSpec::Rbf { gamma: 5.0 },
            a_values: log_space(0.01, 1e6, 7),
            c_values: log_space(1.0, 1e8, 7),
            folds: 5,
            criterion: Criterion::Rcv,
            seed: 0,
            minimize: MinimizeSettings {
                max_iter: 100,
                line_search: LineSearch::WeakWolfe,
                ..MinimizeSettings::default()
            },
        }
    }
}

impl BenchmarkConfig {
    pub fn validate(&self) -> Result<()> {
        if self.angles.is_empty() || self.repeats == 0 {
            return Err(invalid("benchmark needs at least one angle and one repeat"));
        }
        if self.n_per_class == 0 || self.test_per_class == 0 {
            return Err(invalid("sample sizes must be >= 1"));
        }
        self.pbda_grid().validate()?;
        self.pbgd3_grid().validate()
    }

    pub fn pbda_grid(&self) -> GridSpec {
        GridSpec {
            a_values: self.a_values.clone(),
            c_values: self.c_values.clone(),
            kernel_values: vec![self.kernel],
        }
    }

    /// PBGD3 ignores A, so its grid has a single A entry.
    pub fn pbgd3_grid(&self) -> GridSpec {
        GridSpec {
            a_values: vec![0.0],
            c_values: self.c_values.clone(),
            kernel_values: vec![self.kernel],
        }
    }

    fn moons(&self, n_per_class: usize, degrees: f64, seed: u64) -> Result<LabeledSample> {
        gen_moons(&MoonsConfig {
            n_per_class,
            rotation_degrees: degrees,
            noise_sd: self.noise_sd,
            seed,
            theta: ThetaMode::Random,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub angle: f64,
    pub repeat: usize,
    pub pbda_error: f64,
    pub pbgd3_error: f64,
    pub pbda_params: GridCell,
    pub pbgd3_params: GridCell,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngleSummary {
    pub angle: f64,
    pub pbda_mean: f64,
    pub pbgd3_mean: f64,
    pub pbda_sd: f64,
    pub pbgd3_sd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub config: BenchmarkConfig,
    pub trials: Vec<TrialResult>,
    pub summary: Vec<AngleSummary>,
}

/// Seeds for the source, target and test clouds of one trial.
fn trial_seeds(base: u64, angle_index: usize, repeat: usize) -> [u64; 3] {
    let t = base
        .wrapping_mul(0x100_0000_01b3)
        .wrapping_add((angle_index as u64) << 32)
        .wrapping_add(repeat as u64 * 8);
    [t, t + 1, t + 2]
}

/// One angle and repeat: draws the data, tunes both learners and scores them
/// on the held-out test set.
pub fn run_trial(cfg: &BenchmarkConfig, angle_index: usize, repeat: usize) -> Result<TrialResult> {
    let angle = cfg.angles[angle_index];
    let [s_seed, t_seed, test_seed] = trial_seeds(cfg.seed, angle_index, repeat);
    let source = cfg.moons(cfg.n_per_class, 0.0, s_seed)?;
    let target = cfg.moons(cfg.n_per_class, angle, t_seed)?.unlabeled();
    let test = cfg.moons(cfg.test_per_class, angle, test_seed)?;
    let plan = FoldPlan::new(cfg.folds, source.len(), target.len(), s_seed)?;
    let base = TrainSettings {
        kernel: Some(cfg.kernel),
        minimize: cfg.minimize,
        ..TrainSettings::default()
    };

    let pbda_sel = grid_search(
        |cell: &GridCell| cell_trainer(cell, false, base),
        &source,
        &target,
        &cfg.pbda_grid(),
        &plan,
        cfg.criterion,
    )?;
    let pbgd3_sel = grid_search(
        |cell: &GridCell| cell_trainer(cell, true, base),
        &source,
        &target,
        &cfg.pbgd3_grid(),
        &plan,
        Criterion::Cv,
    )?;

    let best = pbda_sel.best;
    let pbda = train_pbda(&source, &target, Hyperparams { a: best.a, c: best.c }, &base)?;
    let pbgd3 = train_pbgd3(&source, pbgd3_sel.best.c, &base)?;
    Ok(TrialResult {
        angle,
        repeat,
        pbda_error: pbda.model.zero_one_error(&test)?,
        pbgd3_error: pbgd3.model.zero_one_error(&test)?,
        pbda_params: best,
        pbgd3_params: pbgd3_sel.best,
    })
}

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 {
        xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var.sqrt())
}

/// Runs every (angle, repeat) trial in parallel and averages per angle.
pub fn run_benchmark(cfg: &BenchmarkConfig) -> Result<BenchmarkReport> {
    cfg.validate()?;
    let jobs: Vec<(usize, usize)> = (0..cfg.angles.len())
        .flat_map(|a| (0..cfg.repeats).map(move |r| (a, r)))
        .collect();
    let trials = jobs
        .par_iter()
        .map(|&(a, r)| run_trial(cfg, a, r))
        .collect::<Result<Vec<_>>>()?;
    let summary = cfg
        .angles
        .iter()
        .map(|&angle| {
            let rows: Vec<&TrialResult> = trials.iter().filter(|t| t.angle == angle).collect();
            let (pbda_mean, pbda_sd) = mean_sd(&rows.iter().map(|t| t.pbda_error).collect::<Vec<_>>());
            let (pbgd3_mean, pbgd3_sd) = mean_sd(&rows.iter().map(|t| t.pbgd3_error).collect::<Vec<_>>());
            AngleSummary {
                angle,
                pbda_mean,
                pbgd3_mean,
                pbda_sd,
                pbgd3_sd,
            }
        })
        .collect();
    Ok(BenchmarkReport {
        config: cfg.clone(),
        trials,
        summary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> BenchmarkConfig {
        BenchmarkConfig {
            angles: vec![10.0],
            repeats: 2,
            n_per_class: 12,
            test_per_class: 50,
            a_values: vec![0.1, 10.0],
            c_values: vec![1.0, 100.0],
            folds: 3,
            ..BenchmarkConfig::default()
        }
    }

    #[test]
    fn tiny_run_is_deterministic() {
        let cfg = tiny();
        let a = run_benchmark(&cfg).unwrap();
        let b = run_benchmark(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.trials.len(), 2);
        assert_eq!(a.summary.len(), 1);
        for t in &a.trials {
            assert!((0.0..=1.0).contains(&t.pbda_error));
            assert!((0.0..=1.0).contains(&t.pbgd3_error));
        }
    }

    #[test]
    fn config_json_defaults() {
        let cfg: BenchmarkConfig = serde_json::from_str(r#"{"repeats": 3}"#).unwrap();
        assert_eq!(cfg.repeats, 3);
        assert_eq!(cfg.a_values.len(), 7);
        assert!(serde_json::from_str::<BenchmarkConfig>(r#"{"bogus": 3}"#).is_err());
        let bad = BenchmarkConfig {
            angles: vec![],
            ..BenchmarkConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn mean_sd_values() {
        let (m, s) = mean_sd(&[1.0, 2.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((s - 1.0).abs() < 1e-15);
    }
}
