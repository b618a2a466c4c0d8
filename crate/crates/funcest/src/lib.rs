//! Direct estimation of linear functionals `theta = Sigma^-1 b` of
//! high-dimensional time-series precision matrices.
//!
//! The estimator minimizes `|eta|_1` subject to a sup-norm band
//! `|S_n eta - b_hat|_inf <= lambda` on the sample covariance, solved as a
//! linear program by a self-contained dense simplex. Around it sit linear
//! process simulators with exact second moments, flat-top tapered
//! autocovariance estimation, band-width selection by data splitting or
//! oracle validation, and the three applications: sparse minimum-variance
//! allocation, sparse one-step linear prediction, and regularized LDA.

pub mod classify;
pub mod covariance;
pub mod experiments;
pub mod functional;
pub mod numerics;
pub mod portfolio;
pub mod prediction;
pub mod process;
pub mod testing;
pub mod tuning;

pub use covariance::{CovarianceEstimate, MeanMode, TaperSpec, ToeplitzAutocov};
pub use functional::{
    DantzigConfig, EstimateStatus, FunctionalEstimate, RateSpec, SparsityClass, TailRegime,
};
pub use numerics::{DenseMatrix, LpProblem, LpSolution, LpStatus};
pub use process::{ArModel, InnovationDistribution, LinearProcessModel, SampleMatrix};
pub use tuning::{LambdaGrid, ValidationResult};
