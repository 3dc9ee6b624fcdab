//! Two interleaving half-circles, optionally rotated about the origin.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::sample::{FeatureVector, Label, LabeledSample};

/// How the position along each moon is chosen.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ThetaMode {
    /// Uniform on `[0, π]`.
    #[default]
    Random,
    /// Evenly spaced on `[0, π]`; a single point sits at 0.
    Even,
}

fn default_noise() -> f64 {
    0.05
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MoonsConfig {
    pub n_per_class: usize,
    #[serde(default)]
    pub rotation_degrees: f64,
    #[serde(default = "default_noise")]
    pub noise_sd: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub theta: ThetaMode,
}

impl MoonsConfig {
    pub fn new(n_per_class: usize, rotation_degrees: f64, seed: u64) -> Self {
        Self {
            n_per_class,
            rotation_degrees,
            noise_sd: default_noise(),
            seed,
            theta: ThetaMode::Random,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_per_class == 0 {
            return Err(invalid("n_per_class must be >= 1"));
        }
        if !(self.noise_sd >= 0.0 && self.noise_sd.is_finite()) {
            return Err(invalid(format!("noise_sd must be >= 0, got {}", self.noise_sd)));
        }
        if !self.rotation_degrees.is_finite() {
            return Err(invalid("rotation_degrees must be finite"));
        }
        Ok(())
    }
}

/// Upper moon `(cos θ, sin θ)` labeled `+1` followed by lower moon
/// `(1 − cos θ, ½ − sin θ)` labeled `−1`, with Gaussian noise, then rotated
/// anticlockwise.
pub fn gen_moons(config: &MoonsConfig) -> Result<LabeledSample> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let noise = Normal::new(0.0, config.noise_sd).map_err(|e| invalid(e.to_string()))?;
    let n = config.n_per_class;
    let mut rows = Vec::with_capacity(2 * n);
    let mut labels = Vec::with_capacity(2 * n);
    for label in [Label::Positive, Label::Negative] {
        for i in 0..n {
            let theta = match config.theta {
                ThetaMode::Random => rng.gen_range(0.0..=PI),
                ThetaMode::Even if n == 1 => 0.0,
                ThetaMode::Even => PI * i as f64 / (n - 1) as f64,
            };
            let (x, y) = match label {
                Label::Positive => (theta.cos(), theta.sin()),
                Label::Negative => (1.0 - theta.cos(), 0.5 - theta.sin()),
            };
            rows.push(vec![x + noise.sample(&mut rng), y + noise.sample(&mut rng)]);
            labels.push(label);
        }
    }
    let base = LabeledSample::new(rows.into_iter().map(FeatureVector::Dense).collect(), labels)?;
    rotate(&base, config.rotation_degrees)
}

/// Rotates every 2-dimensional instance anticlockwise about the origin.
pub fn rotate(sample: &LabeledSample, degrees: f64) -> Result<LabeledSample> {
    if sample.dim() != 2 {
        return Err(invalid(format!("rotation needs 2-dimensional data, got {}", sample.dim())));
    }
    let (s, c) = degrees.to_radians().sin_cos();
    let rotated = sample
        .instances()
        .iter()
        .map(|x| {
            let v = x.to_dense();
            FeatureVector::Dense(vec![c * v[0] - s * v[1], s * v[0] + c * v[1]])
        })
        .collect();
    LabeledSample::new(rotated, sample.labels().to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn endpoints() {
        let cfg = MoonsConfig {
            n_per_class: 1,
            rotation_degrees: 0.0,
            noise_sd: 0.0,
            seed: 0,
            theta: ThetaMode::Even,
        };
        let s = gen_moons(&cfg).unwrap();
        assert_eq!(s.instances()[0], FeatureVector::Dense(vec![1.0, 0.0]));
        assert_eq!(s.labels()[0], Label::Positive);
        assert_eq!(s.instances()[1], FeatureVector::Dense(vec![0.0, 0.5]));
        assert_eq!(s.labels()[1], Label::Negative);
    }

    #[test]
    fn deterministic_per_seed() {
        let cfg = MoonsConfig::new(50, 30.0, 9);
        assert_eq!(gen_moons(&cfg).unwrap(), gen_moons(&cfg).unwrap());
        let other = MoonsConfig { seed: 10, ..cfg };
        assert_ne!(gen_moons(&cfg).unwrap(), gen_moons(&other).unwrap());
    }

    #[test]
    fn rotation_composes_and_preserves_norms() {
        let base = gen_moons(&MoonsConfig::new(40, 0.0, 3)).unwrap();
        let twice = rotate(&rotate(&base, 90.0).unwrap(), 90.0).unwrap();
        let once = rotate(&base, 180.0).unwrap();
        for (a, b) in twice.instances().iter().zip(once.instances()) {
            let (a, b) = (a.to_dense(), b.to_dense());
            assert_abs_diff_eq!(a[0], b[0], epsilon = 1e-12);
            assert_abs_diff_eq!(a[1], b[1], epsilon = 1e-12);
        }
        let r = rotate(&base, 37.0).unwrap();
        for (a, b) in r.instances().iter().zip(base.instances()) {
            assert_abs_diff_eq!(a.norm(), b.norm(), epsilon = 1e-12);
        }
        // A rotated config equals rotating the unrotated cloud.
        let direct = gen_moons(&MoonsConfig::new(40, 37.0, 3)).unwrap();
        assert_eq!(direct, r);
    }

    #[test]
    fn class_balance_and_labels() {
        let s = gen_moons(&MoonsConfig::new(150, 20.0, 1)).unwrap();
        assert_eq!(s.len(), 300);
        assert_eq!(s.labels().iter().filter(|&&y| y == Label::Positive).count(), 150);
    }

    #[test]
    fn config_json() {
        let cfg: MoonsConfig = serde_json::from_str(r#"{"n_per_class": 3, "seed": 4}"#).unwrap();
        assert_eq!(cfg.noise_sd, 0.05);
        assert_eq!(cfg.theta, ThetaMode::Random);
        assert!(serde_json::from_str::<MoonsConfig>(r#"{"n_per_class": 3, "bogus": 1}"#).is_err());
        assert!(gen_moons(&MoonsConfig::new(0, 0.0, 0)).is_err());
    }
}
