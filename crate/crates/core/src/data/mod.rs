//! Synthetic moons, svmlight I/O and seeded sampling.

pub mod moons;
pub mod sampling;
pub mod svmlight;

pub use moons::{gen_moons, rotate, MoonsConfig, ThetaMode};
pub use sampling::{shuffled_indices, split, subsample, Selectable};
pub use svmlight::{format_svmlight, parse_svmlight, read_svmlight, read_svmlight_with_dim, write_svmlight};
