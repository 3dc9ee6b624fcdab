//! Kernel functions and dense kernel matrices.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::sample::FeatureVector;

/// Kernel choice: `linear` is the plain dot product, `rbf` is
/// `exp(−γ‖x − x′‖²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum KernelSpec {
    Linear,
    Rbf { gamma: f64 },
}

impl KernelSpec {
    pub fn rbf(gamma: f64) -> Result<Self> {
        let k = KernelSpec::Rbf { gamma };
        k.validate()?;
        Ok(k)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            KernelSpec::Linear => Ok(()),
            KernelSpec::Rbf { gamma } if gamma > 0.0 && gamma.is_finite() => Ok(()),
            KernelSpec::Rbf { gamma } => Err(invalid(format!("rbf gamma must be > 0, got {gamma}"))),
        }
    }

    #[inline]
    pub fn eval(&self, a: &FeatureVector, b: &FeatureVector) -> f64 {
        match *self {
            KernelSpec::Linear => a.dot(b),
            KernelSpec::Rbf { gamma } => (-gamma * a.distance_squared(b)).exp(),
        }
    }

    /// `k(x, x)`, without computing a distance for the RBF case.
    #[inline]
    pub fn self_eval(&self, x: &FeatureVector) -> f64 {
        match self {
            KernelSpec::Linear => x.norm_squared(),
            KernelSpec::Rbf { .. } => 1.0,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            KernelSpec::Linear => "linear",
            KernelSpec::Rbf { .. } => "rbf",
        }
    }

    pub fn gamma(&self) -> Option<f64> {
        match *self {
            KernelSpec::Linear => None,
            KernelSpec::Rbf { gamma } => Some(gamma),
        }
    }
}

/// Dense symmetric kernel matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    n: usize,
    data: Vec<f64>,
}

impl KernelMatrix {
    /// Gram matrix of `points` under `kernel`.
    pub fn compute<'a, I>(kernel: &KernelSpec, points: I) -> Self
    where
        I: IntoIterator<Item = &'a FeatureVector>,
    {
        let points: Vec<&FeatureVector> = points.into_iter().collect();
        let n = points.len();
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let v = if i == j {
                    kernel.self_eval(points[i])
                } else {
                    kernel.eval(points[i], points[j])
                };
                data[i * n + j] = v;
                data[j * n + i] = v;
            }
        }
        Self { n, data }
    }

    /// Wraps an explicit matrix; checks squareness and symmetry.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(invalid("kernel matrix must be square"));
        }
        let data: Vec<f64> = rows.into_iter().flatten().collect();
        for i in 0..n {
            for j in 0..i {
                let (a, b) = (data[i * n + j], data[j * n + i]);
                if (a - b).abs() > 1e-12 * (1.0 + a.abs().max(b.abs())) {
                    return Err(invalid(format!("kernel matrix not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(Self { n, data })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    /// Principal sub-matrix on the given rows/columns, in order.
    pub fn submatrix(&self, idx: &[usize]) -> Self {
        let n = idx.len();
        let mut data = Vec::with_capacity(n * n);
        for &i in idx {
            let row = self.row(i);
            data.extend(idx.iter().map(|&j| row[j]));
        }
        Self { n, data }
    }

    /// `out = K x`, with a fixed summation order.
    pub fn matvec(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(out.len(), self.n);
        for (i, o) in out.iter_mut().enumerate() {
            *o = dot4(self.row(i), x);
        }
    }
}

/// Dot product with four interleaved accumulators.
#[inline]
pub(crate) fn dot4(a: &[f64], b: &[f64]) -> f64 {
    let chunks = a.len() / 4;
    let (mut s0, mut s1, mut s2, mut s3) = (0.0, 0.0, 0.0, 0.0);
    for c in 0..chunks {
        let k = 4 * c;
        s0 += a[k] * b[k];
        s1 += a[k + 1] * b[k + 1];
        s2 += a[k + 2] * b[k + 2];
        s3 += a[k + 3] * b[k + 3];
    }
    let mut tail = 0.0;
    for k in 4 * chunks..a.len() {
        tail += a[k] * b[k];
    }
    (s0 + s1) + (s2 + s3) + tail
}
