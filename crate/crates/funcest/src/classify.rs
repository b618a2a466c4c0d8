//! Two-class regularized linear discriminant analysis with the discriminant
//! direction estimated directly as a linear functional of the pooled
//! precision matrix, plus the diagonal (naive Bayes) baseline.

use crate::functional::{estimate_functional, DantzigConfig, EstimateStatus};
use crate::numerics::{dot, DenseMatrix};
use crate::process::SampleMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ClassifyError {
    #[error("direction estimation failed with status {0:?}")]
    DirectionFailed(EstimateStatus),
    #[error("feature {0} has zero pooled variance; the diagonal rule is undefined")]
    ZeroVariance(usize),
    #[error("test rows ({rows}) do not split into {labels} blocks of {window}")]
    BlockMismatch { rows: usize, labels: usize, window: usize },
    #[error("class samples must be nonempty and share the dimension")]
    BadTrainingData,
}

/// The two states being separated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    P,
    S,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RldaMode {
    /// Direction from the band-constrained functional estimate of
    /// `Sigma^-1 (mu_P - mu_S)` on the pooled covariance.
    Functional,
    /// Gaussian naive Bayes: direction from the diagonal of the pooled
    /// covariance only.
    Gnb,
}

#[derive(Debug, Clone)]
pub struct RldaModel {
    pub mu_p: Vec<f64>,
    pub mu_s: Vec<f64>,
    pub direction: Vec<f64>,
    /// log(n_S / n_P).
    pub log_prior: f64,
    pub mode: RldaMode,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassificationReport {
    pub accuracy: f64,
    /// confusion[actual][predicted], indexed P = 0, S = 1.
    pub confusion: [[usize; 2]; 2],
}

fn label_index(label: Label) -> usize {
    match label {
        Label::P => 0,
        Label::S => 1,
    }
}

/// Pooled covariance of class-centered residuals with divisor n_P + n_S.
pub fn pooled_covariance(train_p: &SampleMatrix, train_s: &SampleMatrix) -> DenseMatrix {
    let p = train_p.p;
    let mu_p = train_p.column_means();
    let mu_s = train_s.column_means();
    let n_total = train_p.n + train_s.n;
    let mut residuals = DenseMatrix::zeros(n_total, p);
    for i in 0..train_p.n {
        for (j, r) in residuals.row_mut(i).iter_mut().enumerate() {
            *r = train_p.data.get(i, j) - mu_p[j];
        }
    }
    for i in 0..train_s.n {
        for (j, r) in residuals.row_mut(train_p.n + i).iter_mut().enumerate() {
            *r = train_s.data.get(i, j) - mu_s[j];
        }
    }
    let mut cov = residuals.transpose().matmul(&residuals);
    cov.scale(1.0 / n_total as f64);
    cov.symmetrize();
    cov
}

/// Fits the discriminant from per-class training samples.
pub fn fit_rlda(
    train_p: &SampleMatrix,
    train_s: &SampleMatrix,
    lambda: f64,
    mode: RldaMode,
) -> Result<RldaModel, ClassifyError> {
    if train_p.n == 0 || train_s.n == 0 || train_p.p != train_s.p {
        return Err(ClassifyError::BadTrainingData);
    }
    let mu_p = train_p.column_means();
    let mu_s = train_s.column_means();
    let b: Vec<f64> = mu_p.iter().zip(&mu_s).map(|(a, c)| a - c).collect();
    let pooled = pooled_covariance(train_p, train_s);

    let direction = match mode {
        RldaMode::Functional => {
            let est = estimate_functional(&pooled, &b, &DantzigConfig::new(lambda));
            if est.status != EstimateStatus::Optimal {
                return Err(ClassifyError::DirectionFailed(est.status));
            }
            est.theta_hat
        }
        RldaMode::Gnb => {
            let mut dir = vec![0.0; b.len()];
            for (j, d) in dir.iter_mut().enumerate() {
                let var = pooled.get(j, j);
                if var <= 0.0 {
                    return Err(ClassifyError::ZeroVariance(j));
                }
                *d = b[j] / var;
            }
            dir
        }
    };

    let log_prior = (train_s.n as f64 / train_p.n as f64).ln();
    Ok(RldaModel { mu_p, mu_s, direction, log_prior, mode })
}

/// Discriminant score `-(z - mu_bar)' direction + log_prior` with
/// `mu_bar = (mu_P + mu_S)/2`; scores at or below zero classify as P.
pub fn classify_score(model: &RldaModel, z: &[f64]) -> (Label, f64) {
    assert_eq!(z.len(), model.direction.len());
    let mut centered = vec![0.0; z.len()];
    for (((c, zi), mp), ms) in centered.iter_mut().zip(z).zip(&model.mu_p).zip(&model.mu_s) {
        *c = zi - 0.5 * (mp + ms);
    }
    let score = -dot(&centered, &model.direction) + model.log_prior;
    let label = if score <= 0.0 { Label::P } else { Label::S };
    (label, score)
}

/// Averages each block of `window` consecutive test rows into one
/// observation, classifies it, and tabulates the confusion counts against
/// the per-block labels. `window = 1` is row-wise classification.
pub fn evaluate_accuracy(
    model: &RldaModel,
    test: &SampleMatrix,
    labels: &[Label],
    window: usize,
) -> Result<ClassificationReport, ClassifyError> {
    if window == 0 || test.n != labels.len() * window {
        return Err(ClassifyError::BlockMismatch {
            rows: test.n,
            labels: labels.len(),
            window,
        });
    }
    let mut confusion = [[0usize; 2]; 2];
    let mut correct = 0usize;
    for (blk, &actual) in labels.iter().enumerate() {
        let mut avg = vec![0.0f64; test.p];
        for i in (blk * window)..((blk + 1) * window) {
            for (a, v) in avg.iter_mut().zip(test.observation(i)) {
                *a += v;
            }
        }
        for a in &mut avg {
            *a /= window as f64;
        }
        let (predicted, _) = classify_score(model, &avg);
        confusion[label_index(actual)][label_index(predicted)] += 1;
        if predicted == actual {
            correct += 1;
        }
    }
    Ok(ClassificationReport { accuracy: correct as f64 / labels.len() as f64, confusion })
}

/// Per-feature scales that bring the pooled covariance to unit diagonal;
/// derived from training data only.
pub fn unit_diagonal_scales(
    train_p: &SampleMatrix,
    train_s: &SampleMatrix,
) -> Result<Vec<f64>, ClassifyError> {
    let pooled = pooled_covariance(train_p, train_s);
    (0..pooled.rows())
        .map(|j| {
            let var = pooled.get(j, j);
            if var <= 0.0 {
                Err(ClassifyError::ZeroVariance(j))
            } else {
                Ok(var.sqrt())
            }
        })
        .collect()
}

/// Divides every column by its scale.
pub fn apply_scales(sample: &SampleMatrix, scales: &[f64]) -> SampleMatrix {
    assert_eq!(sample.p, scales.len());
    let mut data = DenseMatrix::zeros(sample.n, sample.p);
    for i in 0..sample.n {
        for (j, v) in data.row_mut(i).iter_mut().enumerate() {
            *v = sample.data.get(i, j) / scales[j];
        }
    }
    SampleMatrix::new(data)
}
