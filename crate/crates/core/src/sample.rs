//! Feature vectors, labels and samples.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Binary label in `{−1, +1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "i8", try_from = "i8")]
pub enum Label {
    Negative,
    Positive,
}

impl Label {
    #[inline]
    pub fn sign(self) -> f64 {
        match self {
            Label::Negative => -1.0,
            Label::Positive => 1.0,
        }
    }

    /// Sign of a score; a zero score maps to `Positive`.
    #[inline]
    pub fn from_score(score: f64) -> Self {
        if score >= 0.0 {
            Label::Positive
        } else {
            Label::Negative
        }
    }

    /// Parses an exact `±1` value.
    pub fn from_value(value: f64) -> Result<Self> {
        if value == 1.0 {
            Ok(Label::Positive)
        } else if value == -1.0 {
            Ok(Label::Negative)
        } else {
            Err(invalid(format!("label must be -1 or +1, got {value}")))
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Label::Negative => Label::Positive,
            Label::Positive => Label::Negative,
        }
    }
}

impl From<Label> for i8 {
    fn from(label: Label) -> i8 {
        match label {
            Label::Negative => -1,
            Label::Positive => 1,
        }
    }
}

impl TryFrom<i8> for Label {
    type Error = Error;

    fn try_from(value: i8) -> Result<Self> {
        Label::from_value(f64::from(value))
    }
}

/// Sparse vector with strictly ascending 0-based indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSparse")]
pub struct SparseVector {
    dim: usize,
    indices: Vec<usize>,
    values: Vec<f64>,
}

#[derive(Deserialize)]
struct RawSparse {
    dim: usize,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl TryFrom<RawSparse> for SparseVector {
    type Error = Error;

    fn try_from(raw: RawSparse) -> Result<Self> {
        SparseVector::new(raw.dim, raw.indices, raw.values)
    }
}

impl SparseVector {
    pub fn new(dim: usize, indices: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if indices.len() != values.len() {
            return Err(invalid("sparse vector: indices and values differ in length"));
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("sparse vector: indices must be strictly ascending"));
        }
        if let Some(&last) = indices.last() {
            if last >= dim {
                return Err(invalid(format!(
                    "sparse vector: index {last} out of range for dimension {dim}"
                )));
            }
        }
        Ok(Self {
            dim,
            indices,
            values,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices.iter().copied().zip(self.values.iter().copied())
    }
}

/// A feature vector, stored densely or sparsely.
///
/// Dot products and norms on the sparse form only visit stored entries, in
/// ascending index order, so a dense vector and its sparse conversion produce
/// bit-identical results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FeatureVector {
    Dense(Vec<f64>),
    Sparse(SparseVector),
}

impl From<Vec<f64>> for FeatureVector {
    fn from(values: Vec<f64>) -> Self {
        FeatureVector::Dense(values)
    }
}

impl From<SparseVector> for FeatureVector {
    fn from(v: SparseVector) -> Self {
        FeatureVector::Sparse(v)
    }
}

impl FeatureVector {
    pub fn dim(&self) -> usize {
        match self {
            FeatureVector::Dense(v) => v.len(),
            FeatureVector::Sparse(s) => s.dim,
        }
    }

    /// Dot product with a dense weight vector of the same dimension.
    #[inline]
    pub fn dot_dense(&self, w: &[f64]) -> f64 {
        debug_assert_eq!(self.dim(), w.len());
        match self {
            FeatureVector::Dense(v) => v.iter().zip(w).fold(0.0, |acc, (x, w)| acc + x * w),
            FeatureVector::Sparse(s) => s.iter().fold(0.0, |acc, (i, x)| acc + x * w[i]),
        }
    }

    /// `out += scale * self`.
    #[inline]
    pub fn add_scaled_to(&self, scale: f64, out: &mut [f64]) {
        debug_assert_eq!(self.dim(), out.len());
        match self {
            FeatureVector::Dense(v) => {
                for (o, x) in out.iter_mut().zip(v) {
                    *o += scale * x;
                }
            }
            FeatureVector::Sparse(s) => {
                for (i, x) in s.iter() {
                    out[i] += scale * x;
                }
            }
        }
    }

    pub fn norm_squared(&self) -> f64 {
        match self {
            FeatureVector::Dense(v) => v.iter().fold(0.0, |acc, x| acc + x * x),
            FeatureVector::Sparse(s) => s.values.iter().fold(0.0, |acc, x| acc + x * x),
        }
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    /// Dot product between two feature vectors of equal dimension.
    pub fn dot(&self, other: &FeatureVector) -> f64 {
        match (self, other) {
            (FeatureVector::Dense(a), FeatureVector::Dense(b)) => {
                a.iter().zip(b).fold(0.0, |acc, (x, y)| acc + x * y)
            }
            (FeatureVector::Dense(a), b @ FeatureVector::Sparse(_)) => b.dot_dense(a),
            (a @ FeatureVector::Sparse(_), FeatureVector::Dense(b)) => a.dot_dense(b),
            (FeatureVector::Sparse(a), FeatureVector::Sparse(b)) => {
                let (mut i, mut j, mut acc) = (0, 0, 0.0);
                while i < a.indices.len() && j < b.indices.len() {
                    match a.indices[i].cmp(&b.indices[j]) {
                        std::cmp::Ordering::Less => i += 1,
                        std::cmp::Ordering::Greater => j += 1,
                        std::cmp::Ordering::Equal => {
                            acc += a.values[i] * b.values[j];
                            i += 1;
                            j += 1;
                        }
                    }
                }
                acc
            }
        }
    }

    /// Squared Euclidean distance.
    pub fn distance_squared(&self, other: &FeatureVector) -> f64 {
        match (self, other) {
            (FeatureVector::Dense(a), FeatureVector::Dense(b)) => a
                .iter()
                .zip(b)
                .fold(0.0, |acc, (x, y)| acc + (x - y) * (x - y)),
            _ => {
                let d = self.norm_squared() + other.norm_squared() - 2.0 * self.dot(other);
                d.max(0.0)
            }
        }
    }

    pub fn to_dense(&self) -> Vec<f64> {
        match self {
            FeatureVector::Dense(v) => v.clone(),
            FeatureVector::Sparse(s) => {
                let mut out = vec![0.0; s.dim];
                for (i, x) in s.iter() {
                    out[i] = x;
                }
                out
            }
        }
    }

    /// Sparse form keeping only non-zero entries.
    pub fn to_sparse(&self) -> SparseVector {
        match self {
            FeatureVector::Sparse(s) => s.clone(),
            FeatureVector::Dense(v) => {
                let (indices, values) = v
                    .iter()
                    .enumerate()
                    .filter(|(_, x)| **x != 0.0)
                    .map(|(i, x)| (i, *x))
                    .unzip();
                SparseVector {
                    dim: v.len(),
                    indices,
                    values,
                }
            }
        }
    }

    /// Same entries, viewed in a space of dimension `dim >= self.dim()`.
    pub fn widened(&self, dim: usize) -> Result<FeatureVector> {
        if dim < self.dim() {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: self.dim(),
            });
        }
        Ok(match self {
            FeatureVector::Dense(v) => {
                let mut v = v.clone();
                v.resize(dim, 0.0);
                FeatureVector::Dense(v)
            }
            FeatureVector::Sparse(s) => FeatureVector::Sparse(SparseVector {
                dim,
                indices: s.indices.clone(),
                values: s.values.clone(),
            }),
        })
    }

    pub fn is_finite(&self) -> bool {
        match self {
            FeatureVector::Dense(v) => v.iter().all(|x| x.is_finite()),
            FeatureVector::Sparse(s) => s.values.iter().all(|x| x.is_finite()),
        }
    }
}

fn check_instances(dim: usize, instances: &[FeatureVector]) -> Result<()> {
    for x in instances {
        if x.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: x.dim(),
            });
        }
        if !x.is_finite() {
            return Err(invalid("feature vectors must have finite entries"));
        }
    }
    Ok(())
}

/// Instances with `±1` labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSample {
    dim: usize,
    instances: Vec<FeatureVector>,
    labels: Vec<Label>,
}

impl LabeledSample {
    /// Builds a sample; the dimension is taken from the first instance.
    pub fn new(instances: Vec<FeatureVector>, labels: Vec<Label>) -> Result<Self> {
        let dim = instances.first().map_or(0, FeatureVector::dim);
        Self::with_dim(dim, instances, labels)
    }

    pub fn with_dim(dim: usize, instances: Vec<FeatureVector>, labels: Vec<Label>) -> Result<Self> {
        if instances.len() != labels.len() {
            return Err(Error::SizeMismatch(format!(
                "{} instances but {} labels",
                instances.len(),
                labels.len()
            )));
        }
        check_instances(dim, &instances)?;
        Ok(Self {
            dim,
            instances,
            labels,
        })
    }

    /// Convenience constructor from dense rows and `±1` values.
    pub fn from_dense(rows: Vec<Vec<f64>>, labels: &[f64]) -> Result<Self> {
        let labels = labels
            .iter()
            .map(|&y| Label::from_value(y))
            .collect::<Result<Vec<_>>>()?;
        Self::new(rows.into_iter().map(FeatureVector::Dense).collect(), labels)
    }

    pub fn empty(dim: usize) -> Self {
        Self {
            dim,
            instances: Vec::new(),
            labels: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn instances(&self) -> &[FeatureVector] {
        &self.instances
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn iter(&self) -> impl Iterator<Item = (&FeatureVector, Label)> + '_ {
        self.instances.iter().zip(self.labels.iter().copied())
    }

    pub fn unlabeled(&self) -> UnlabeledSample {
        UnlabeledSample {
            dim: self.dim,
            instances: self.instances.clone(),
        }
    }

    /// Sub-sample at the given positions (in the given order).
    pub fn select(&self, indices: &[usize]) -> Self {
        Self {
            dim: self.dim,
            instances: indices.iter().map(|&i| self.instances[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
        }
    }

    pub fn concat(&self, other: &LabeledSample) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        let mut out = self.clone();
        out.instances.extend(other.instances.iter().cloned());
        out.labels.extend(other.labels.iter().copied());
        Ok(out)
    }

    /// Same instances with every label flipped.
    pub fn flipped(&self) -> Self {
        Self {
            dim: self.dim,
            instances: self.instances.clone(),
            labels: self.labels.iter().map(|y| y.flip()).collect(),
        }
    }

    /// Re-expresses the sample in dimension `dim >= self.dim()`.
    pub fn widened(&self, dim: usize) -> Result<Self> {
        Ok(Self {
            dim,
            instances: self
                .instances
                .iter()
                .map(|x| x.widened(dim))
                .collect::<Result<_>>()?,
            labels: self.labels.clone(),
        })
    }
}

/// Instances without labels.
#[derive(Debug, Clone, PartialEq)]
pub struct UnlabeledSample {
    dim: usize,
    instances: Vec<FeatureVector>,
}

impl UnlabeledSample {
    pub fn new(instances: Vec<FeatureVector>) -> Result<Self> {
        let dim = instances.first().map_or(0, FeatureVector::dim);
        Self::with_dim(dim, instances)
    }

    pub fn with_dim(dim: usize, instances: Vec<FeatureVector>) -> Result<Self> {
        check_instances(dim, &instances)?;
        Ok(Self { dim, instances })
    }

    pub fn from_dense(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(rows.into_iter().map(FeatureVector::Dense).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn instances(&self) -> &[FeatureVector] {
        &self.instances
    }

    pub fn select(&self, indices: &[usize]) -> Self {
        Self {
            dim: self.dim,
            instances: indices.iter().map(|&i| self.instances[i].clone()).collect(),
        }
    }

    /// Attaches labels, e.g. for self-labeling.
    pub fn with_labels(&self, labels: Vec<Label>) -> Result<LabeledSample> {
        LabeledSample::with_dim(self.dim, self.instances.clone(), labels)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn label_parsing() {
        assert_eq!(Label::from_value(1.0).unwrap(), Label::Positive);
        assert_eq!(Label::from_value(-1.0).unwrap(), Label::Negative);
        assert!(Label::from_value(0.0).is_err());
        assert!(Label::from_value(2.0).is_err());
        assert_eq!(Label::from_score(0.0), Label::Positive);
        assert_eq!(Label::from_score(-0.0), Label::Positive);
    }

    #[test]
    fn sparse_rejects_bad_indices() {
        assert!(SparseVector::new(3, vec![1, 1], vec![1.0, 2.0]).is_err());
        assert!(SparseVector::new(3, vec![2, 1], vec![1.0, 2.0]).is_err());
        assert!(SparseVector::new(3, vec![3], vec![1.0]).is_err());
        assert!(SparseVector::new(3, vec![0], vec![]).is_err());
    }

    #[test]
    fn sample_validation() {
        let x = vec![FeatureVector::Dense(vec![1.0, 2.0]), FeatureVector::Dense(vec![1.0])];
        assert!(matches!(
            LabeledSample::new(x, vec![Label::Positive, Label::Negative]),
            Err(Error::DimensionMismatch { .. })
        ));
        let x = vec![FeatureVector::Dense(vec![1.0, 2.0])];
        assert!(LabeledSample::new(x.clone(), vec![]).is_err());
        assert!(UnlabeledSample::new(vec![FeatureVector::Dense(vec![f64::NAN])]).is_err());
    }

    #[test]
    fn sparse_sparse_dot() {
        let a = FeatureVector::Sparse(SparseVector::new(5, vec![0, 2, 4], vec![1.0, 2.0, 3.0]).unwrap());
        let b = FeatureVector::Sparse(SparseVector::new(5, vec![1, 2, 4], vec![5.0, 7.0, -1.0]).unwrap());
        assert_eq!(a.dot(&b), 11.0);
        assert_eq!(a.distance_squared(&a), 0.0);
    }

    fn dense_vec() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(
            prop_oneof![Just(0.0), -10.0f64..10.0, Just(-0.0)],
            1..12,
        )
    }

    proptest! {
        #[test]
        fn dense_and_sparse_agree_bitwise(x in dense_vec(), seed in 0u64..1000) {
            let w: Vec<f64> = (0..x.len()).map(|i| ((i as u64 * 31 + seed) % 17) as f64 - 8.5).collect();
            let dense = FeatureVector::Dense(x.clone());
            let sparse = FeatureVector::Sparse(dense.to_sparse());
            prop_assert_eq!(dense.dot_dense(&w).to_bits(), sparse.dot_dense(&w).to_bits());
            prop_assert_eq!(dense.norm_squared().to_bits(), sparse.norm_squared().to_bits());
            let back = FeatureVector::Dense(sparse.to_dense());
            prop_assert_eq!(back.dot_dense(&w).to_bits(), dense.dot_dense(&w).to_bits());
            let wv = FeatureVector::Dense(w.clone());
            prop_assert_eq!(sparse.dot(&wv).to_bits(), dense.dot(&wv).to_bits());
        }
    }
}
