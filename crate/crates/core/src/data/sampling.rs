//! Seeded splitting and subsampling.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result};
use crate::sample::{LabeledSample, UnlabeledSample};

/// Anything that can be restricted to a subset of its rows.
pub trait Selectable: Sized {
    fn size(&self) -> usize;
    fn select_rows(&self, indices: &[usize]) -> Self;
}

impl Selectable for LabeledSample {
    fn size(&self) -> usize {
        self.len()
    }
    fn select_rows(&self, indices: &[usize]) -> Self {
        self.select(indices)
    }
}

impl Selectable for UnlabeledSample {
    fn size(&self) -> usize {
        self.len()
    }
    fn select_rows(&self, indices: &[usize]) -> Self {
        self.select(indices)
    }
}

/// A seeded permutation of `0..n`.
pub fn shuffled_indices(n: usize, seed: u64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    idx
}

/// Splits into `⌊fraction·m⌋` shuffled rows and the remainder.
pub fn split<S: Selectable>(sample: &S, fraction: f64, seed: u64) -> Result<(S, S)> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(invalid(format!("fraction must lie in [0, 1], got {fraction}")));
    }
    let m = sample.size();
    let cut = ((fraction * m as f64).floor() as usize).min(m);
    let idx = shuffled_indices(m, seed);
    Ok((sample.select_rows(&idx[..cut]), sample.select_rows(&idx[cut..])))
}

/// `n` rows drawn without replacement.
pub fn subsample<S: Selectable>(sample: &S, n: usize, seed: u64) -> Result<S> {
    if n > sample.size() {
        return Err(invalid(format!("cannot draw {n} rows from {}", sample.size())));
    }
    let idx = shuffled_indices(sample.size(), seed);
    Ok(sample.select_rows(&idx[..n]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::moons::{gen_moons, MoonsConfig};
    use proptest::prelude::*;

    fn toy() -> LabeledSample {
        gen_moons(&MoonsConfig::new(10, 0.0, 1)).unwrap()
    }

    #[test]
    fn full_fraction_takes_all() {
        let s = toy();
        let (a, b) = split(&s, 1.0, 3).unwrap();
        assert_eq!(a.len(), 20);
        assert!(b.is_empty());
        let (a, b) = split(&s, 0.0, 3).unwrap();
        assert!(a.is_empty());
        assert_eq!(b.len(), 20);
        assert!(split(&s, 1.5, 0).is_err());
    }

    #[test]
    fn reproducible() {
        let s = toy();
        assert_eq!(split(&s, 0.3, 7).unwrap(), split(&s, 0.3, 7).unwrap());
        assert_eq!(subsample(&s, 5, 2).unwrap(), subsample(&s, 5, 2).unwrap());
        assert!(subsample(&s, 21, 2).is_err());
        let u = s.unlabeled();
        assert_eq!(subsample(&u, 4, 1).unwrap().len(), 4);
    }

    proptest! {
        #[test]
        fn split_is_partition(m in 0usize..60, f in 0.0f64..=1.0, seed in any::<u64>()) {
            let idx = shuffled_indices(m, seed);
            let cut = (f * m as f64).floor() as usize;
            let mut all = idx.clone();
            all.sort_unstable();
            prop_assert_eq!(all, (0..m).collect::<Vec<_>>());
            let rows: Vec<Vec<f64>> = (0..m).map(|i| vec![i as f64]).collect();
            let s = UnlabeledSample::from_dense(rows).unwrap_or_else(|_| UnlabeledSample::with_dim(1, vec![]).unwrap());
            if m > 0 {
                let (a, b) = split(&s, f, seed).unwrap();
                prop_assert_eq!(a.len(), cut);
                prop_assert_eq!(b.len(), m - cut);
                let mut seen: Vec<f64> = a.instances().iter().chain(b.instances()).map(|x| x.to_dense()[0]).collect();
                seen.sort_by(f64::total_cmp);
                prop_assert_eq!(seen, (0..m).map(|i| i as f64).collect::<Vec<_>>());
            }
        }
    }
}
