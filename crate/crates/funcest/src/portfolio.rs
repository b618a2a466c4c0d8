//! Minimum-variance allocation at a target mean return, via the sparse
//! band-constrained functional estimate or a ridge-shrunk plug-in, plus the
//! rolling backtest tuned by out-of-sample information ratio.

use crate::covariance::{sample_covariance, MeanMode};
use crate::functional::{estimate_functional, DantzigConfig, EstimateStatus};
use crate::numerics::{dot, solve_linear_system, DenseMatrix, NumericsError};
use crate::process::SampleMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Allocations with |estimated mean gain| below this are rejected as
/// degenerate rather than sign-flipped.
const DELTA_DEGENERATE: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum PortfolioError {
    #[error("band-constrained estimation failed with status {0:?} at lambda = {1}")]
    EstimationFailed(EstimateStatus, f64),
    #[error("estimated mean gain {0:.3e} is too close to zero for a stable allocation")]
    DegenerateAllocation(f64),
    #[error("ridge solve failed: {0}")]
    RidgeSolve(#[from] NumericsError),
    #[error("insufficient data: need at least {needed} rows, have {have}")]
    InsufficientData { needed: usize, have: usize },
    #[error("no grid value produced weights for every validation period")]
    NoViableLambda,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AllocationMethod {
    Functional,
    Ridge,
}

impl AllocationMethod {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Functional => "functional",
            Self::Ridge => "ridge",
        }
    }
}

/// Allocation weights normalized to the target mean return:
/// `w' mu_hat = m` holds by construction.
#[derive(Debug, Clone)]
pub struct PortfolioWeights {
    pub w: Vec<f64>,
    pub m: f64,
    /// `delta_hat = x_bar' theta_hat`, the estimated mean gain of the
    /// unnormalized direction.
    pub delta_hat: f64,
    pub method: AllocationMethod,
}

/// Sparse allocation: solve the band-constrained program with `b_hat` equal
/// to the sample mean, then scale by the estimated mean gain.
pub fn estimate_weights_dantzig(
    x: &SampleMatrix,
    m: f64,
    lambda: f64,
) -> Result<PortfolioWeights, PortfolioError> {
    assert!(x.n >= 2, "need at least two observations");
    let mean = x.column_means();
    let cov = sample_covariance(x, &MeanMode::Estimated);
    let est = estimate_functional(&cov.matrix, &mean, &DantzigConfig::new(lambda));
    if est.status != EstimateStatus::Optimal {
        return Err(PortfolioError::EstimationFailed(est.status, lambda));
    }
    weights_from_direction(est.theta_hat, &mean, m, AllocationMethod::Functional)
}

/// Ridge allocation `w ~ (S + lambda I)^-1 x_bar`, rescaled to the target.
pub fn ridge_weights(
    x: &SampleMatrix,
    m: f64,
    lambda_ridge: f64,
) -> Result<PortfolioWeights, PortfolioError> {
    assert!(x.n >= 2, "need at least two observations");
    assert!(lambda_ridge > 0.0, "ridge penalty must be positive");
    let mean = x.column_means();
    let cov = sample_covariance(x, &MeanMode::Estimated);
    let mut shrunk = cov.matrix;
    for i in 0..shrunk.rows() {
        shrunk.set(i, i, shrunk.get(i, i) + lambda_ridge);
    }
    let direction = solve_linear_system(&shrunk, &mean)?;
    weights_from_direction(direction, &mean, m, AllocationMethod::Ridge)
}

fn weights_from_direction(
    direction: Vec<f64>,
    mean: &[f64],
    m: f64,
    method: AllocationMethod,
) -> Result<PortfolioWeights, PortfolioError> {
    let delta_hat = dot(mean, &direction);
    if delta_hat.abs() < DELTA_DEGENERATE {
        return Err(PortfolioError::DegenerateAllocation(delta_hat));
    }
    let w: Vec<f64> = direction.iter().map(|t| m * t / delta_hat).collect();
    Ok(PortfolioWeights { w, m, delta_hat, method })
}

/// Risk `R(w) = w' Sigma w` and the ratio against a reference allocation.
pub fn portfolio_risk_and_ratio(
    w: &[f64],
    w_star: &[f64],
    sigma: &DenseMatrix,
) -> (f64, f64) {
    let risk = quadratic_form(w, sigma);
    let risk_star = quadratic_form(w_star, sigma);
    (risk, risk / risk_star)
}

pub fn quadratic_form(w: &[f64], sigma: &DenseMatrix) -> f64 {
    assert_eq!(w.len(), sigma.rows());
    dot(w, &sigma.matvec(w))
}

/// Rolling-backtest configuration. The first `K (n_train + n_test)` rows are
/// the validation segment for selecting the method's tuning parameter by
/// information ratio; the backtest then walks the series re-estimating
/// weights from the trailing `window` rows and holding them for `hold` rows.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BacktestConfig {
    pub window: usize,
    pub hold: usize,
    pub k_periods: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub target_return: f64,
    pub functional_grid: Vec<f64>,
    pub ridge_grid: Vec<f64>,
}

impl BacktestConfig {
    /// 21 evenly spaced points on [0, hi].
    pub fn even_grid(hi: f64) -> Vec<f64> {
        (0..21).map(|i| hi * i as f64 / 20.0).collect()
    }

    /// Ridge penalties must be positive, so zero maps to the smallest
    /// positive grid point.
    pub fn ridge_grid_from(points: &[f64]) -> Vec<f64> {
        let smallest_positive =
            points.iter().copied().filter(|&v| v > 0.0).fold(f64::INFINITY, f64::min);
        let mut grid: Vec<f64> =
            points.iter().map(|&v| if v == 0.0 { smallest_positive } else { v }).collect();
        grid.dedup();
        grid
    }

    pub fn validate(&self) -> Result<(), PortfolioError> {
        if self.window < 2
            || self.hold < 1
            || self.k_periods < 1
            || self.n_train < 2
            || self.n_test < 2
            || self.functional_grid.is_empty()
            || self.ridge_grid.is_empty()
        {
            return Err(PortfolioError::InsufficientData { needed: 2, have: 0 });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BacktestWindow {
    pub start: usize,
    /// Total portfolio return over the hold period.
    pub realized_return: f64,
    /// `w' S_next w` with the hold-period sample covariance.
    pub realized_risk: f64,
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BacktestReport {
    pub method: AllocationMethod,
    pub lambda_selected: f64,
    pub information_ratio: f64,
    pub windows: Vec<BacktestWindow>,
    pub mean_return: f64,
    pub mean_risk: f64,
    pub skipped_windows: usize,
}

fn fit_weights(
    method: AllocationMethod,
    data: &SampleMatrix,
    m: f64,
    lambda: f64,
) -> Result<PortfolioWeights, PortfolioError> {
    match method {
        AllocationMethod::Functional => estimate_weights_dantzig(data, m, lambda),
        AllocationMethod::Ridge => ridge_weights(data, m, lambda),
    }
}

/// Mean out-of-sample return over volatility across the validation periods:
/// `K^-1 sum_k w_k' mu_test / sqrt(w_k' S_test w_k)`. Fails if any period
/// fails to produce weights at this grid value.
fn information_ratio(
    returns: &SampleMatrix,
    config: &BacktestConfig,
    method: AllocationMethod,
    lambda: f64,
) -> Option<f64> {
    let period = config.n_train + config.n_test;
    let mut acc = 0.0;
    for k in 0..config.k_periods {
        let start = k * period;
        let train = returns.slice_rows(start, start + config.n_train);
        let test = returns.slice_rows(start + config.n_train, start + period);
        let weights = fit_weights(method, &train, config.target_return, lambda).ok()?;
        let mu_test = test.column_means();
        let s_test = sample_covariance(&test, &MeanMode::Estimated);
        let vol = quadratic_form(&weights.w, &s_test.matrix).max(0.0).sqrt();
        if vol <= 0.0 {
            return None;
        }
        acc += dot(&weights.w, &mu_test) / vol;
    }
    Some(acc / config.k_periods as f64)
}

/// Tunes the method's parameter by information ratio on the leading
/// validation segment, then runs the rolling backtest over the whole series.
/// Hold windows whose estimation fails are skipped and counted.
pub fn backtest_information_ratio(
    returns: &SampleMatrix,
    config: &BacktestConfig,
    method: AllocationMethod,
) -> Result<BacktestReport, PortfolioError> {
    config.validate()?;
    let needed = (config.k_periods * (config.n_train + config.n_test))
        .max(config.window + config.hold);
    if returns.n < needed {
        return Err(PortfolioError::InsufficientData { needed, have: returns.n });
    }

    let grid = match method {
        AllocationMethod::Functional => config.functional_grid.clone(),
        AllocationMethod::Ridge => BacktestConfig::ridge_grid_from(&config.ridge_grid),
    };
    let scored: Vec<(f64, Option<f64>)> = grid
        .par_iter()
        .map(|&lambda| (lambda, information_ratio(returns, config, method, lambda)))
        .collect();
    // Ties break toward the larger parameter (the more regularized fit).
    let mut best: Option<(f64, f64)> = None;
    for (lambda, ir) in scored {
        if let Some(ir) = ir {
            if best.map_or(true, |(_, b)| ir >= b) {
                best = Some((lambda, ir));
            }
        }
    }
    let (lambda_selected, information_ratio) = best.ok_or(PortfolioError::NoViableLambda)?;

    let mut starts = Vec::new();
    let mut t = config.window;
    while t + config.hold <= returns.n {
        starts.push(t);
        t += config.hold;
    }
    let fitted: Vec<(usize, Option<BacktestWindow>)> = starts
        .par_iter()
        .map(|&start| {
            let train = returns.slice_rows(start - config.window, start);
            let holdout = returns.slice_rows(start, start + config.hold);
            let window = fit_weights(method, &train, config.target_return, lambda_selected)
                .ok()
                .map(|weights| {
                    let mut realized_return = 0.0;
                    for i in 0..holdout.n {
                        realized_return += dot(&weights.w, holdout.observation(i));
                    }
                    let s_next = sample_covariance(&holdout, &MeanMode::Estimated);
                    BacktestWindow {
                        start,
                        realized_return,
                        realized_risk: quadratic_form(&weights.w, &s_next.matrix),
                        weights: weights.w,
                    }
                });
            (start, window)
        })
        .collect();

    let mut windows = Vec::new();
    let mut skipped = 0usize;
    for (_, w) in fitted {
        match w {
            Some(w) => windows.push(w),
            None => skipped += 1,
        }
    }
    let count = windows.len().max(1) as f64;
    let mean_return = windows.iter().map(|w| w.realized_return).sum::<f64>() / count;
    let mean_risk = windows.iter().map(|w| w.realized_risk).sum::<f64>() / count;
    Ok(BacktestReport {
        method,
        lambda_selected,
        information_ratio,
        windows,
        mean_return,
        mean_risk,
        skipped_windows: skipped,
    })
}
