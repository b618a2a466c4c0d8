//! Sample covariance, raw sample autocovariances, and the flat-top tapered
//! Toeplitz autocovariance matrix estimator.

use crate::numerics::DenseMatrix;
use crate::process::SampleMatrix;
use serde::{Deserialize, Serialize};

/// How observations are centered before forming the covariance.
#[derive(Debug, Clone, PartialEq)]
pub enum MeanMode {
    /// The mean is known to be zero; no centering.
    KnownZero,
    /// The mean is known; subtract it.
    Known(Vec<f64>),
    /// Subtract the sample mean.
    Estimated,
}

/// A p x p covariance estimate together with how it was produced.
#[derive(Debug, Clone)]
pub struct CovarianceEstimate {
    pub matrix: DenseMatrix,
    pub mean_mode: MeanMode,
    pub n: usize,
}

/// Sample covariance with divisor n.
///
/// Known mean: `n^-1 sum (x_i - mu)(x_i - mu)'`; estimated mean replaces mu
/// with the sample mean. The result is exactly symmetric.
pub fn sample_covariance(x: &SampleMatrix, mode: &MeanMode) -> CovarianceEstimate {
    let n = x.n;
    let p = x.p;
    match mode {
        MeanMode::Estimated => assert!(n >= 2, "estimated-mean covariance needs n >= 2"),
        _ => assert!(n >= 1),
    }
    let center: Option<Vec<f64>> = match mode {
        MeanMode::KnownZero => None,
        MeanMode::Known(mu) => {
            assert_eq!(mu.len(), p);
            Some(mu.clone())
        }
        MeanMode::Estimated => Some(x.column_means()),
    };

    let mut centered = DenseMatrix::zeros(n, p);
    for i in 0..n {
        let row = x.data.row(i);
        let out = centered.row_mut(i);
        match &center {
            None => out.copy_from_slice(row),
            Some(mu) => {
                for ((o, v), m) in out.iter_mut().zip(row).zip(mu) {
                    *o = v - m;
                }
            }
        }
    }

    let mut s = centered.transpose().matmul(&centered);
    s.scale(1.0 / n as f64);
    s.symmetrize();
    CovarianceEstimate { matrix: s, mean_mode: mode.clone(), n }
}

/// Raw lag-s sample autocovariance `n^-1 sum_{t=1}^{n-|s|} X_t X_{t+|s|}`
/// (divisor n, no mean centering; center the series first when the mean is
/// not zero).
pub fn sample_autocovariance(x: &[f64], s: usize) -> f64 {
    let n = x.len();
    assert!(s < n, "lag must be smaller than the series length");
    let mut acc = 0.0;
    for t in 0..(n - s) {
        acc += x[t] * x[t + s];
    }
    acc / n as f64
}

/// Flat-top taper: kappa(x) = 1 on [0, 1], a linear ramp `(c - x)/(c - 1)` on
/// (1, c], and 0 beyond c. With the default cutoff c = 2 the ramp is
/// `2 - x`, the usual trapezoid.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TaperSpec {
    /// Bandwidth l >= 1; lags up to l are untouched.
    pub l: usize,
    /// Cutoff multiple c > 1; lags beyond c*l are zeroed.
    pub c: f64,
}

impl TaperSpec {
    pub fn trapezoid(l: usize) -> Self {
        Self::with_cutoff(l, 2.0)
    }

    pub fn with_cutoff(l: usize, c: f64) -> Self {
        assert!(l >= 1, "bandwidth must be positive");
        assert!(c > 1.0, "cutoff must exceed 1");
        Self { l, c }
    }

    /// Taper weight at |x| (x is the lag divided by the bandwidth).
    pub fn kappa(&self, x: f64) -> f64 {
        let x = x.abs();
        if x <= 1.0 {
            1.0
        } else if x <= self.c {
            (self.c - x) / (self.c - 1.0)
        } else {
            0.0
        }
    }
}

/// Tapered autocovariance sequence; the implied matrix is symmetric Toeplitz
/// and is only materialized on demand.
#[derive(Debug, Clone)]
pub struct ToeplitzAutocov {
    /// gamma_hat_0 .. gamma_hat_{n-1}.
    pub gamma_hat: Vec<f64>,
    pub n: usize,
}

impl ToeplitzAutocov {
    /// Entry (j, k) of the implied matrix.
    pub fn entry(&self, j: usize, k: usize) -> f64 {
        self.gamma_hat[j.abs_diff(k)]
    }

    /// Materializes the full n x n Toeplitz matrix.
    pub fn to_matrix(&self) -> DenseMatrix {
        let n = self.n;
        let mut m = DenseMatrix::zeros(n, n);
        for j in 0..n {
            for k in 0..n {
                m.set(j, k, self.gamma_hat[j.abs_diff(k)]);
            }
        }
        m
    }

    /// Shifted first row `(gamma_hat_1, .., gamma_hat_n)`; the lag-n term is
    /// beyond the data and defined as 0.
    pub fn shifted_first_row(&self) -> Vec<f64> {
        let mut g: Vec<f64> = self.gamma_hat[1..].to_vec();
        g.push(0.0);
        g
    }
}

/// Applies the flat-top taper to the raw sample autocovariances:
/// `gamma_hat_s = kappa(|s|/l) * breve_gamma_s`.
pub fn flat_top_autocov_matrix(x: &[f64], taper: &TaperSpec) -> ToeplitzAutocov {
    let n = x.len();
    assert!(n >= 2, "need at least two observations");
    let cutoff = (taper.c * taper.l as f64).floor() as usize;
    let mut gamma_hat = vec![0.0f64; n];
    for (s, g) in gamma_hat.iter_mut().enumerate() {
        if s > cutoff {
            break; // kappa is zero from here on
        }
        let w = taper.kappa(s as f64 / taper.l as f64);
        if w != 0.0 {
            *g = w * sample_autocovariance(x, s);
        }
    }
    ToeplitzAutocov { gamma_hat, n }
}

/// Empirical bandwidth rule: the smallest l >= 1 such that the sample
/// autocorrelations at lags l+1..l+K_n all stay below
/// `2 sqrt(log10(n) / n)`, with `K_n = max(5, ceil(sqrt(log10 n)))`, capped
/// at n/4. A series with zero energy has all autocorrelations defined as 0
/// and selects l = 1.
pub fn select_bandwidth(x: &[f64]) -> usize {
    let n = x.len();
    assert!(n >= 20, "bandwidth rule needs n >= 20");
    let log10n = (n as f64).log10();
    let threshold = 2.0 * (log10n / n as f64).sqrt();
    let k_n = 5usize.max(log10n.sqrt().ceil() as usize);
    let cap = (n / 4).max(1);

    let g0 = sample_autocovariance(x, 0);
    let rho = |s: usize| -> f64 {
        if g0 == 0.0 || s >= n {
            0.0
        } else {
            sample_autocovariance(x, s) / g0
        }
    };

    'outer: for l in 1..=cap {
        for s in (l + 1)..=(l + k_n) {
            if rho(s).abs() >= threshold {
                continue 'outer;
            }
        }
        return l;
    }
    cap
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::{derive_seed, simulate_ar, ArModel, SampleMatrix};

    fn sample_from_rows(rows: &[Vec<f64>]) -> SampleMatrix {
        SampleMatrix::new(DenseMatrix::from_rows(rows))
    }

    #[test]
    fn known_zero_two_points() {
        let x = sample_from_rows(&[vec![1.0, 0.0], vec![-1.0, 0.0]]);
        let est = sample_covariance(&x, &MeanMode::KnownZero);
        assert_eq!(est.matrix, DenseMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 0.0]]));
    }

    #[test]
    fn constant_sample_estimated_mean() {
        let x = sample_from_rows(&vec![vec![3.0, -1.0]; 5]);
        let est = sample_covariance(&x, &MeanMode::Estimated);
        assert_eq!(est.matrix.max_abs(), 0.0);
    }

    #[test]
    fn covariance_matches_naive_triple_loop() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let n = 12;
        let p = 4;
        let mut data = DenseMatrix::zeros(n, p);
        for i in 0..n {
            for j in 0..p {
                data.set(i, j, rng.random::<f64>() * 2.0 - 1.0);
            }
        }
        let x = SampleMatrix::new(data);
        let est = sample_covariance(&x, &MeanMode::KnownZero);
        for a in 0..p {
            for b in 0..p {
                let mut s = 0.0;
                for i in 0..n {
                    s += x.data.get(i, a) * x.data.get(i, b);
                }
                s /= n as f64;
                assert!((est.matrix.get(a, b) - s).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn gaussian_iid_covariance_near_identity() {
        use crate::process::{draw_innovations, InnovationDistribution};
        let n = 10_000;
        let p = 3;
        let draws = draw_innovations(InnovationDistribution::Gaussian, n * p, 15);
        let x = SampleMatrix::new(DenseMatrix::from_vec(n, p, draws));
        let est = sample_covariance(&x, &MeanMode::KnownZero);
        let tol = 5.0 * (2.0f64 / n as f64).sqrt();
        assert!(est.matrix.max_abs_diff(&DenseMatrix::identity(p)) < tol);
    }

    #[test]
    fn autocovariance_hand_values() {
        assert!((sample_autocovariance(&[1.0, 1.0, 1.0, 1.0], 0) - 1.0).abs() < 1e-15);
        assert!((sample_autocovariance(&[1.0, -1.0, 1.0, -1.0], 1) + 0.75).abs() < 1e-15);
    }

    #[test]
    fn autocovariance_white_noise_vanishes() {
        use crate::process::{draw_innovations, InnovationDistribution};
        let n = 100_000;
        let x = draw_innovations(InnovationDistribution::Gaussian, n, 44);
        assert!(sample_autocovariance(&x, 3).abs() < 5.0 / (n as f64).sqrt());
    }

    #[test]
    fn taper_piecewise_values() {
        let taper = TaperSpec::trapezoid(4);
        // Flat top, ramp, cutoff checked on a grid.
        for i in 0..10_000 {
            let x = i as f64 * 3.0 / 10_000.0;
            let k = taper.kappa(x);
            if x <= 1.0 {
                assert_eq!(k, 1.0);
            } else if x <= 2.0 {
                assert!((k - (2.0 - x)).abs() < 1e-15);
                assert!(k.abs() < 1.0);
            } else {
                assert_eq!(k, 0.0);
            }
        }
    }

    #[test]
    fn flat_top_values_and_cutoff() {
        let x: Vec<f64> = (0..64).map(|i| ((i * 7919) % 17) as f64 - 8.0).collect();
        let taper = TaperSpec::trapezoid(4);
        let t = flat_top_autocov_matrix(&x, &taper);
        // s <= l: untouched.
        for s in 0..=4usize {
            assert!((t.gamma_hat[s] - sample_autocovariance(&x, s)).abs() < 1e-15);
        }
        // s = 1.5 l: halved by the trapezoid ramp.
        assert!((t.gamma_hat[6] - 0.5 * sample_autocovariance(&x, 6)).abs() < 1e-15);
        // s > 2l: zero.
        for s in 9..64 {
            assert_eq!(t.gamma_hat[s], 0.0);
        }
    }

    #[test]
    fn toeplitz_matrix_is_symmetric_toeplitz() {
        let x: Vec<f64> = (0..32).map(|i| (i as f64 * 0.7).sin()).collect();
        let t = flat_top_autocov_matrix(&x, &TaperSpec::trapezoid(3));
        let m = t.to_matrix();
        assert_eq!(m.asymmetry(), 0.0);
        for j in 1..32 {
            for k in 1..32 {
                assert_eq!(m.get(j, k), m.get(j - 1, k - 1));
            }
        }
        let b = t.shifted_first_row();
        assert_eq!(b.len(), 32);
        assert_eq!(b[31], 0.0);
        assert_eq!(b[0], t.gamma_hat[1]);
    }

    #[test]
    fn identity_model_covariance_error_shrinks_with_n() {
        use crate::numerics::DenseMatrix;
        use crate::process::{draw_innovations, InnovationDistribution};
        let p = 10;
        let eye = DenseMatrix::identity(p);
        let mut medians = Vec::new();
        for &n in &[100usize, 400, 1600] {
            let mut errs = Vec::new();
            for rep in 0..100u64 {
                let draws = draw_innovations(
                    InnovationDistribution::Gaussian,
                    n * p,
                    derive_seed(7000 + n as u64, rep),
                );
                let x = SampleMatrix::new(DenseMatrix::from_vec(n, p, draws));
                let est = sample_covariance(&x, &MeanMode::KnownZero);
                errs.push(est.matrix.max_abs_diff(&eye));
            }
            medians.push(crate::testing::median(&errs));
        }
        assert!(medians[1] < medians[0] && medians[2] < medians[1], "medians {medians:?}");
    }

    #[test]
    fn bandwidth_white_noise_small() {
        let mut hits = 0;
        for rep in 0..100 {
            let x = crate::process::draw_innovations(
                crate::process::InnovationDistribution::Gaussian,
                2000,
                derive_seed(500, rep),
            );
            if select_bandwidth(&x) <= 3 {
                hits += 1;
            }
        }
        assert!(hits >= 90, "white-noise bandwidth too large in {} of 100 runs", 100 - hits);
    }

    #[test]
    fn bandwidth_grows_with_dependence() {
        let model = ArModel::new(vec![-0.5], 1.0);
        let mut wn_ls = Vec::new();
        let mut ar_ls = Vec::new();
        for rep in 0..200 {
            let seed = derive_seed(900, rep);
            let ar = simulate_ar(&model, 2000, seed).unwrap();
            let wn = crate::process::draw_innovations(
                crate::process::InnovationDistribution::Gaussian,
                2000,
                seed,
            );
            ar_ls.push(select_bandwidth(&ar) as f64);
            wn_ls.push(select_bandwidth(&wn) as f64);
        }
        assert!(crate::testing::median(&ar_ls) > crate::testing::median(&wn_ls));
    }

    #[test]
    fn bandwidth_degenerate_series() {
        assert_eq!(select_bandwidth(&vec![0.0; 64]), 1);
    }
}
