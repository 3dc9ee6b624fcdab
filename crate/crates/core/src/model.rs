//! Trained models: primal weight vectors and kernel expansions.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::data::svmlight;
use crate::error::{invalid, Error, Result};
use crate::kernel::KernelSpec;
use crate::sample::{FeatureVector, Label, LabeledSample};

/// Anything that assigns a real score to a feature vector, defining the
/// majority vote `sign(score)` and the Gibbs quantities through the
/// normalized margin `score / ‖φ(x)‖`.
pub trait Scorer {
    fn score(&self, x: &FeatureVector) -> Result<f64>;

    /// Feature-space norm of `x`; zero for the zero vector.
    fn feature_norm(&self, x: &FeatureVector) -> f64;

    /// `score(x)/‖φ(x)‖`, with zero-norm instances mapped to margin 0.
    fn normalized_score(&self, x: &FeatureVector) -> Result<f64> {
        let s = self.score(x)?;
        let n = self.feature_norm(x);
        Ok(if n > 0.0 { s / n } else { 0.0 })
    }

    /// Majority-vote label; ties go to `+1`.
    fn predict(&self, x: &FeatureVector) -> Result<Label> {
        Ok(Label::from_score(self.score(x)?))
    }

    fn predict_all(&self, xs: &[FeatureVector]) -> Result<Vec<Label>> {
        xs.iter().map(|x| self.predict(x)).collect()
    }

    /// Majority-vote 0-1 error on a labeled sample.
    fn zero_one_error(&self, sample: &LabeledSample) -> Result<f64> {
        if sample.is_empty() {
            return Err(Error::EmptySample("zero-one error"));
        }
        let mut wrong = 0usize;
        for (x, y) in sample.iter() {
            if self.predict(x)? != y {
                wrong += 1;
            }
        }
        Ok(wrong as f64 / sample.len() as f64)
    }
}

/// Homogeneous linear classifier `sign(w·x)`; also the centre of the
/// Gaussian posterior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Vec<f64>,
}

impl LinearModel {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(invalid("weights must be finite"));
        }
        Ok(Self { weights })
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            weights: vec![0.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            weights: self.weights.iter().map(|w| c * w).collect(),
        }
    }

    pub(crate) fn check_dim(&self, x: &FeatureVector) -> Result<()> {
        if x.dim() != self.weights.len() {
            return Err(Error::DimensionMismatch {
                expected: self.weights.len(),
                found: x.dim(),
            });
        }
        Ok(())
    }
}

impl Scorer for LinearModel {
    fn score(&self, x: &FeatureVector) -> Result<f64> {
        self.check_dim(x)?;
        Ok(x.dot_dense(&self.weights))
    }

    fn feature_norm(&self, x: &FeatureVector) -> f64 {
        x.norm()
    }
}

/// Kernel expansion `Σ_j α_j k(a_j, ·)` over stored anchor points.
#[derive(Debug, Clone, PartialEq)]
pub struct DualModel {
    pub alphas: Vec<f64>,
    pub anchors: Vec<FeatureVector>,
    pub kernel: KernelSpec,
}

impl DualModel {
    pub fn new(alphas: Vec<f64>, anchors: Vec<FeatureVector>, kernel: KernelSpec) -> Result<Self> {
        if alphas.len() != anchors.len() {
            return Err(Error::SizeMismatch(format!(
                "{} coefficients for {} anchors",
                alphas.len(),
                anchors.len()
            )));
        }
        if alphas.iter().any(|a| !a.is_finite()) {
            return Err(invalid("dual coefficients must be finite"));
        }
        kernel.validate()?;
        if let Some(first) = anchors.first() {
            let d = first.dim();
            if let Some(bad) = anchors.iter().find(|a| a.dim() != d) {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: bad.dim(),
                });
            }
        }
        Ok(Self {
            alphas,
            anchors,
            kernel,
        })
    }

    pub fn input_dim(&self) -> Option<usize> {
        self.anchors.first().map(FeatureVector::dim)
    }
}

impl Scorer for DualModel {
    fn score(&self, x: &FeatureVector) -> Result<f64> {
        if let Some(d) = self.input_dim() {
            if d != x.dim() {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: x.dim(),
                });
            }
        }
        Ok(self
            .alphas
            .iter()
            .zip(&self.anchors)
            .fold(0.0, |acc, (a, z)| acc + a * self.kernel.eval(z, x)))
    }

    fn feature_norm(&self, x: &FeatureVector) -> f64 {
        self.kernel.self_eval(x).sqrt()
    }
}

/// Output of a training run.
#[derive(Debug, Clone, PartialEq)]
pub enum TrainedModel {
    Primal(LinearModel),
    Dual(DualModel),
}

impl Scorer for TrainedModel {
    fn score(&self, x: &FeatureVector) -> Result<f64> {
        match self {
            TrainedModel::Primal(m) => m.score(x),
            TrainedModel::Dual(m) => m.score(x),
        }
    }

    fn feature_norm(&self, x: &FeatureVector) -> f64 {
        match self {
            TrainedModel::Primal(m) => m.feature_norm(x),
            TrainedModel::Dual(m) => m.feature_norm(x),
        }
    }
}

/// Where a dual model's anchors live in its JSON form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AnchorsRef {
    Path(PathBuf),
    Inline(Vec<FeatureVector>),
}

/// On-disk model layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum ModelFile {
    Primal {
        weights: Vec<f64>,
    },
    Dual {
        alphas: Vec<f64>,
        kernel: KernelSpec,
        anchors_ref: AnchorsRef,
    },
}

impl TrainedModel {
    /// JSON layout with anchors stored inline.
    pub fn to_model_file(&self) -> ModelFile {
        match self {
            TrainedModel::Primal(m) => ModelFile::Primal {
                weights: m.weights.clone(),
            },
            TrainedModel::Dual(m) => ModelFile::Dual {
                alphas: m.alphas.clone(),
                kernel: m.kernel,
                anchors_ref: AnchorsRef::Inline(m.anchors.clone()),
            },
        }
    }

    /// Resolves a model file; relative anchor paths are taken from `base_dir`.
    pub fn from_model_file(file: ModelFile, base_dir: Option<&Path>) -> Result<Self> {
        match file {
            ModelFile::Primal { weights } => Ok(TrainedModel::Primal(LinearModel::new(weights)?)),
            ModelFile::Dual {
                alphas,
                kernel,
                anchors_ref,
            } => {
                let anchors = match anchors_ref {
                    AnchorsRef::Inline(a) => a,
                    AnchorsRef::Path(p) => {
                        let p = match base_dir {
                            Some(dir) if p.is_relative() => dir.join(p),
                            _ => p,
                        };
                        svmlight::read_svmlight(&p)?.instances().to_vec()
                    }
                };
                Ok(TrainedModel::Dual(DualModel::new(alphas, anchors, kernel)?))
            }
        }
    }

    pub fn save_json(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(&self.to_model_file())?;
        std::fs::write(path, text).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load_json(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let file: ModelFile = serde_json::from_str(&text)?;
        Self::from_model_file(file, path.parent())
    }

    /// Input dimension expected by the model, if known.
    pub fn input_dim(&self) -> Option<usize> {
        match self {
            TrainedModel::Primal(m) => Some(m.dim()),
            TrainedModel::Dual(m) => m.input_dim(),
        }
    }

    /// KL divergence from the prior: `½‖w‖²`, with `‖w‖² = αᵀKα` for a
    /// kernel expansion.
    pub fn kl_term(&self) -> f64 {
        match self {
            TrainedModel::Primal(m) => 0.5 * m.weights.iter().map(|w| w * w).sum::<f64>(),
            TrainedModel::Dual(m) => {
                let mut q = 0.0;
                for (ai, zi) in m.alphas.iter().zip(&m.anchors) {
                    for (aj, zj) in m.alphas.iter().zip(&m.anchors) {
                        q += ai * aj * m.kernel.eval(zi, zj);
                    }
                }
                0.5 * q.max(0.0)
            }
        }
    }

    /// Weight vector for primal models; `None` for kernel expansions.
    pub fn as_linear(&self) -> Option<&LinearModel> {
        match self {
            TrainedModel::Primal(m) => Some(m),
            TrainedModel::Dual(_) => None,
        }
    }
}
