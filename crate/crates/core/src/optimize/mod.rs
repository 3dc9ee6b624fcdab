//! PBGD3 and PBDA objectives, the L-BFGS minimizer and the training drivers.

pub mod lbfgs;
pub mod objective;
pub mod train;

pub use lbfgs::{minimize, LineSearch, MinimizeResult, MinimizeSettings, MinimizeSummary, StopReason};
pub use objective::{
    finite_difference_gradient, multi_pbda_gradient, multi_pbda_objective, pbda_bracket, pbda_dual_gradient,
    pbda_dual_objective, pbda_gradient, pbda_objective, pbgd3_dual_gradient, pbgd3_dual_objective, pbgd3_gradient,
    pbgd3_objective, relative_gradient_error, Hyperparams, MultiPbdaPrimal, Objective, ObjectiveOptions, PbdaDual,
    PbdaPrimal, Pbgd3Dual, Pbgd3Primal, RiskLoss,
};
pub use train::{train_multi_pbda, train_pbda, train_pbgd3, TrainOutcome, TrainSettings};
