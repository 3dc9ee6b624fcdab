//! Training drivers: build the objective, pick the starting point, minimize.

use serde::{Deserialize, Serialize};

use super::lbfgs::{minimize, MinimizeSettings, MinimizeSummary};
use super::objective::{Hyperparams, MultiPbdaPrimal, ObjectiveOptions, PbdaDual, PbdaPrimal, Pbgd3Dual, Pbgd3Primal};
use crate::error::{invalid, Error, Result};
use crate::kernel::{KernelMatrix, KernelSpec};
use crate::model::{DualModel, LinearModel, TrainedModel};
use crate::sample::{LabeledSample, UnlabeledSample};

/// Everything about a training run except the data and the trade-off weights.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainSettings {
    /// `None` trains an explicit weight vector; `Some` trains kernel
    /// coefficients over the training points.
    pub kernel: Option<KernelSpec>,
    pub minimize: MinimizeSettings,
    pub objective: ObjectiveOptions,
}

impl TrainSettings {
    pub fn primal() -> Self {
        Self::default()
    }

    pub fn dual(kernel: KernelSpec) -> Self {
        Self {
            kernel: Some(kernel),
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub model: TrainedModel,
    /// Final minimization run.
    pub summary: MinimizeSummary,
    /// The PBGD3 run used as a starting point, for PBDA.
    pub warm_start: Option<MinimizeSummary>,
}

impl TrainOutcome {
    pub fn converged(&self) -> bool {
        self.summary.converged && self.warm_start.is_none_or(|w| w.converged)
    }
}

fn kernel_of(settings: &TrainSettings) -> Result<Option<KernelSpec>> {
    if let Some(k) = settings.kernel {
        k.validate()?;
    }
    Ok(settings.kernel)
}

/// Minimizes the PBGD3 objective from the origin.
pub fn train_pbgd3(source: &LabeledSample, c: f64, settings: &TrainSettings) -> Result<TrainOutcome> {
    if source.is_empty() {
        return Err(Error::EmptySample("source sample"));
    }
    match kernel_of(settings)? {
        None => {
            let f = Pbgd3Primal::new(source, c, settings.objective)?;
            let r = minimize(&f, vec![0.0; source.dim()], &settings.minimize)?;
            Ok(TrainOutcome {
                model: TrainedModel::Primal(LinearModel::new(r.x)?),
                summary: r.summary,
                warm_start: None,
            })
        }
        Some(kernel) => {
            let k = KernelMatrix::compute(&kernel, source.instances());
            let (alpha, summary) = pbgd3_dual_run(&k, source, c, settings)?;
            Ok(TrainOutcome {
                model: TrainedModel::Dual(DualModel::new(alpha, source.instances().to_vec(), kernel)?),
                summary,
                warm_start: None,
            })
        }
    }
}

fn pbgd3_dual_run(
    k: &KernelMatrix,
    source: &LabeledSample,
    c: f64,
    settings: &TrainSettings,
) -> Result<(Vec<f64>, MinimizeSummary)> {
    let f = Pbgd3Dual::new(k, source.labels(), c, settings.objective)?;
    let r = minimize(&f, vec![0.0; k.size()], &settings.minimize)?;
    Ok((r.x, r.summary))
}

/// Solves PBGD3 first, then minimizes the PBDA objective from that solution.
/// With `A = 0` the PBGD3 solution is returned as is (with zero coefficients
/// on the target points in the kernel case).
pub fn train_pbda(
    source: &LabeledSample,
    target: &UnlabeledSample,
    hp: Hyperparams,
    settings: &TrainSettings,
) -> Result<TrainOutcome> {
    hp.validate()?;
    if source.is_empty() {
        return Err(Error::EmptySample("source sample"));
    }
    if target.is_empty() {
        return Err(Error::EmptySample("target sample"));
    }
    if source.dim() != target.dim() {
        return Err(Error::DimensionMismatch {
            expected: source.dim(),
            found: target.dim(),
        });
    }
    if source.len() != target.len() && !settings.objective.unequal_sizes {
        return Err(Error::SizeMismatch(format!(
            "source has {} points, target {}; enable unequal_sizes to allow this",
            source.len(),
            target.len()
        )));
    }
    match kernel_of(settings)? {
        None => {
            let warm = train_pbgd3(source, hp.c, settings)?;
            if hp.a == 0.0 {
                return Ok(warm);
            }
            let w0 = match warm.model {
                TrainedModel::Primal(ref m) => m.weights.clone(),
                TrainedModel::Dual(_) => unreachable!("primal warm start"),
            };
            let f = PbdaPrimal::new(source, target, hp, settings.objective)?;
            let r = minimize(&f, w0, &settings.minimize)?;
            Ok(TrainOutcome {
                model: TrainedModel::Primal(LinearModel::new(r.x)?),
                summary: r.summary,
                warm_start: Some(warm.summary),
            })
        }
        Some(kernel) => {
            let anchors: Vec<_> = source.instances().iter().chain(target.instances()).cloned().collect();
            let k = KernelMatrix::compute(&kernel, &anchors);
            let m = source.len();
            let k_src = k.submatrix(&(0..m).collect::<Vec<_>>());
            let (alpha_src, warm) = pbgd3_dual_run(&k_src, source, hp.c, settings)?;
            let mut alpha0 = alpha_src;
            alpha0.resize(anchors.len(), 0.0);
            if hp.a == 0.0 {
                return Ok(TrainOutcome {
                    model: TrainedModel::Dual(DualModel::new(alpha0, anchors, kernel)?),
                    summary: warm,
                    warm_start: None,
                });
            }
            let f = PbdaDual::new(&k, source.labels(), hp, settings.objective)?;
            let r = minimize(&f, alpha0, &settings.minimize)?;
            Ok(TrainOutcome {
                model: TrainedModel::Dual(DualModel::new(r.x, anchors, kernel)?),
                summary: r.summary,
                warm_start: Some(warm),
            })
        }
    }
}

/// Multisource PBDA in primal form, warm-started from PBGD3 on the
/// weighted union of the sources.
pub fn train_multi_pbda(
    sources: &[LabeledSample],
    v: &[f64],
    target: &UnlabeledSample,
    hp: Hyperparams,
    settings: &TrainSettings,
) -> Result<TrainOutcome> {
    if settings.kernel.is_some() {
        return Err(invalid("multisource training supports the primal form only"));
    }
    let f = MultiPbdaPrimal::new(sources, v, target, hp, settings.objective)?;
    // The A = 0 objective is convex; solve it first.
    let warm_obj = MultiPbdaPrimal::new(sources, v, target, Hyperparams { a: 0.0, ..hp }, settings.objective)?;
    let warm = minimize(&warm_obj, vec![0.0; target.dim()], &settings.minimize)?;
    if hp.a == 0.0 {
        return Ok(TrainOutcome {
            model: TrainedModel::Primal(LinearModel::new(warm.x)?),
            summary: warm.summary,
            warm_start: None,
        });
    }
    let r = minimize(&f, warm.x, &settings.minimize)?;
    Ok(TrainOutcome {
        model: TrainedModel::Primal(LinearModel::new(r.x)?),
        summary: r.summary,
        warm_start: Some(warm.summary),
    })
}
