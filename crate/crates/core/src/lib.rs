//! PAC-Bayesian domain adaptation for linear classifiers.
//!
//! The posterior over linear classifiers is an isotropic Gaussian centred on a
//! weight vector `w`, the prior an isotropic Gaussian at the origin. Under that
//! choice the Gibbs risk, the expected pairwise disagreement and the expected
//! joint error all have closed forms in terms of the normal tail function, and
//! the KL term is `½‖w‖²`. This crate builds on those closed forms:
//!
//! * [`losses`]: the probit loss, its convex relaxation and the disagreement loss.
//! * [`gibbs_linear`]: closed-form Gibbs quantities plus a Monte-Carlo oracle.
//! * [`exact_vote`]: brute-force quantities over explicit finite hypothesis sets.
//! * [`bounds`]: supervised, disagreement, domain-adaptation and multisource bounds.
//! * [`optimize`]: PBGD3 and PBDA objectives (primal and kernel dual) and an L-BFGS driver.
//! * [`validation`]: k-fold and reverse cross-validation with grid search.
//! * [`data`]: rotated two-moons generation, svmlight I/O and seeded sampling.

pub mod benchmark;
pub mod bounds;
pub mod data;
pub mod error;
pub mod exact_vote;
pub mod gibbs_linear;
pub mod kernel;
pub mod losses;
pub mod model;
pub mod optimize;
pub mod sample;
pub mod validation;
pub mod verify;

pub use error::{Error, Result};
pub use kernel::KernelSpec;
pub use model::{DualModel, LinearModel, Scorer, TrainedModel};
pub use sample::{FeatureVector, Label, LabeledSample, UnlabeledSample};
