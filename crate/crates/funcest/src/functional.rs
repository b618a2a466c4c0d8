//! Direct l1-minimizing estimation of linear functionals `theta = Sigma^-1 b`
//! under a sup-norm residual band, together with the theoretical rate
//! apparatus (smallness measure, approximate-sparsity classes, and the
//! dependence/tail-regime convergence rates).

use crate::numerics::{l1_norm, solve_lp, sup_norm, DenseMatrix, LpProblem, LpSolution, LpStatus};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RateError {
    #[error("dependence index beta must exceed 1/2 (got {0})")]
    BadBeta(f64),
    #[error("exponential regime requires alpha > 1/2 (got {0})")]
    BadAlpha(f64),
    #[error("polynomial regime requires q > 4 (got {0})")]
    BadMoment(f64),
}

/// Configuration for one band-constrained estimation call.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DantzigConfig {
    pub lambda: f64,
    pub lp_tol: f64,
    pub lp_max_iter: usize,
}

impl DantzigConfig {
    pub fn new(lambda: f64) -> Self {
        assert!(lambda >= 0.0, "band half-width must be nonnegative");
        Self { lambda, lp_tol: crate::numerics::DEFAULT_FEASIBILITY_TOL, lp_max_iter: 100_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateStatus {
    Optimal,
    /// The band is narrower than the attainable residual floor.
    Infeasible,
    SolverLimit,
}

/// Result of one estimation call. `theta_hat` is empty unless the status is
/// `Optimal`.
#[derive(Debug, Clone)]
pub struct FunctionalEstimate {
    pub theta_hat: Vec<f64>,
    pub lambda: f64,
    pub status: EstimateStatus,
    pub l1_norm: f64,
    pub lp_iterations: usize,
}

/// Builds the linear program equivalent to
/// `min |eta|_1  s.t.  |S eta - b_hat|_inf <= lambda`.
///
/// Variables are `(u, eta+, eta-)`, all nonnegative, with
/// `eta = eta+ - eta-`; the objective is `sum_j u_j`. The first 2p rows pin
/// `|eta_j| <= u_j` and the remaining 2p rows put each column residual
/// `s_k' eta - b_k` inside the band.
pub fn build_dantzig_lp(s: &DenseMatrix, b_hat: &[f64], lambda: f64) -> LpProblem {
    let p = b_hat.len();
    assert!(s.rows() == p && s.cols() == p, "covariance must be p x p with p = len(b_hat)");
    assert!(lambda >= 0.0, "band half-width must be nonnegative");
    assert!(b_hat.iter().all(|v| v.is_finite()) && lambda.is_finite());

    let d = 3 * p;
    let k = 4 * p;
    let mut a = DenseMatrix::zeros(k, d);
    let mut rhs = vec![0.0f64; k];

    for j in 0..p {
        // -eta_j <= u_j  =>  -u_j - eta+_j + eta-_j <= 0
        a.set(j, j, -1.0);
        a.set(j, p + j, -1.0);
        a.set(j, 2 * p + j, 1.0);
        // eta_j <= u_j  =>  -u_j + eta+_j - eta-_j <= 0
        a.set(p + j, j, -1.0);
        a.set(p + j, p + j, 1.0);
        a.set(p + j, 2 * p + j, -1.0);
    }
    for kcol in 0..p {
        let lo = 2 * p + kcol;
        let hi = 3 * p + kcol;
        for j in 0..p {
            let s_jk = s.get(j, kcol); // k-th column of S
            a.set(lo, p + j, -s_jk);
            a.set(lo, 2 * p + j, s_jk);
            a.set(hi, p + j, s_jk);
            a.set(hi, 2 * p + j, -s_jk);
        }
        rhs[lo] = lambda - b_hat[kcol];
        rhs[hi] = lambda + b_hat[kcol];
    }

    let mut objective = vec![0.0f64; d];
    for o in objective.iter_mut().take(p) {
        *o = 1.0;
    }
    LpProblem { objective, constraint_matrix: a, rhs }
}

/// Solves `theta_hat = argmin { |eta|_1 : |S eta - b_hat|_inf <= lambda }`.
///
/// When the band is infeasible the status says so explicitly rather than
/// silently relaxing lambda; silent relaxation would corrupt tuning curves.
pub fn estimate_functional(
    s: &DenseMatrix,
    b_hat: &[f64],
    config: &DantzigConfig,
) -> FunctionalEstimate {
    let p = b_hat.len();
    let problem = build_dantzig_lp(s, b_hat, config.lambda);
    let LpSolution { status, primal, iterations, .. } =
        solve_lp(&problem, config.lp_tol, config.lp_max_iter);

    match status {
        LpStatus::Optimal => {
            let theta_hat: Vec<f64> =
                (0..p).map(|j| primal[p + j] - primal[2 * p + j]).collect();
            debug_assert!(
                band_residual(s, &theta_hat, b_hat) <= config.lambda + 1e3 * config.lp_tol,
                "optimal vertex violates the residual band"
            );
            let l1 = l1_norm(&theta_hat);
            FunctionalEstimate {
                theta_hat,
                lambda: config.lambda,
                status: EstimateStatus::Optimal,
                l1_norm: l1,
                lp_iterations: iterations,
            }
        }
        LpStatus::Infeasible => FunctionalEstimate {
            theta_hat: Vec::new(),
            lambda: config.lambda,
            status: EstimateStatus::Infeasible,
            l1_norm: f64::NAN,
            lp_iterations: iterations,
        },
        // The objective sum(u) is bounded below by zero, so an unbounded
        // report can only be numerical breakdown; fold it into SolverLimit.
        LpStatus::Unbounded | LpStatus::IterationLimit => FunctionalEstimate {
            theta_hat: Vec::new(),
            lambda: config.lambda,
            status: EstimateStatus::SolverLimit,
            l1_norm: f64::NAN,
            lp_iterations: iterations,
        },
    }
}

/// Sup-norm residual `|S' eta - b|_inf` with the same column orientation as
/// the LP constraints.
pub fn band_residual(s: &DenseMatrix, eta: &[f64], b: &[f64]) -> f64 {
    let p = b.len();
    let mut worst = 0.0f64;
    for k in 0..p {
        let mut acc = 0.0;
        for j in 0..p {
            acc += s.get(j, k) * eta[j];
        }
        worst = worst.max((acc - b[k]).abs());
    }
    worst
}

/// Smallness measure `D(u) = sum_j min(|theta_j|, u)`.
pub fn smallness_d(theta: &[f64], u: f64) -> f64 {
    assert!(u >= 0.0);
    theta.iter().map(|t| t.abs().min(u)).sum()
}

/// Strong l^r-ball of approximately sparse vectors: entries bounded by `nu`
/// and l^r quasi-norm bounded by `m_p` (with 0^0 := 0, so r = 0 counts
/// nonzero entries).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SparsityClass {
    pub r: f64,
    pub nu: f64,
    pub m_p: f64,
}

impl SparsityClass {
    pub fn new(r: f64, nu: f64, m_p: f64) -> Self {
        assert!((0.0..1.0).contains(&r));
        assert!(nu > 0.0 && m_p > 0.0);
        Self { r, nu, m_p }
    }

    pub fn quasi_norm(&self, eta: &[f64]) -> f64 {
        eta.iter()
            .map(|v| {
                let a = v.abs();
                if a == 0.0 {
                    0.0
                } else if self.r == 0.0 {
                    1.0
                } else {
                    a.powf(self.r)
                }
            })
            .sum()
    }

    pub fn contains(&self, eta: &[f64]) -> bool {
        sup_norm(eta) <= self.nu && self.quasi_norm(eta) <= self.m_p
    }
}

/// Innovation tail regime for the rate formulas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum TailRegime {
    SubGaussian,
    Exponential { alpha: f64 },
    Polynomial { q: f64 },
}

/// Dependence/tail descriptor from which the theoretical in-probability rate
/// is computed.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RateSpec {
    pub regime: TailRegime,
    pub beta: f64,
    pub n: usize,
    pub p: usize,
    /// Convergence rate of the plug-in estimate of b; 0 when b is observed.
    pub r_b: f64,
}

impl RateSpec {
    /// `beta' = min(2 beta - 1, 1/2)`.
    pub fn beta_prime(&self) -> f64 {
        (2.0 * self.beta - 1.0).min(0.5)
    }
}

/// Regime-appropriate convergence rate J of the functional estimator.
///
/// Sub-Gaussian: u1, u1 v u2 or u2 as the dependence index crosses 1 and 3/4
/// (with the log-corrected boundary values at beta = 1 and 3/4); exponential:
/// `(log p)^(2 alpha + 2) n^(-beta')`; polynomial with q moments:
/// `u1 v u5` for beta >= 1 - 1/q and `u1 v u5 v u6` below, where
/// `u1 = sqrt(log p / n)`, `u2 = log p / n^(2 beta - 1)`,
/// `u5 = p^(4/q) / n^(1 - 2/q)`, `u6 = p^(2/q) / n^(2 beta - 1)`.
pub fn theoretical_rate_j(spec: &RateSpec) -> Result<f64, RateError> {
    if !(spec.beta > 0.5) {
        return Err(RateError::BadBeta(spec.beta));
    }
    let n = spec.n as f64;
    let logp = (spec.p as f64).ln();
    let logn = n.ln();
    let u1 = (logp / n).sqrt();
    let u2 = logp / n.powf(2.0 * spec.beta - 1.0);

    match spec.regime {
        TailRegime::SubGaussian => {
            let beta = spec.beta;
            Ok(if beta > 1.0 {
                u1
            } else if beta == 1.0 {
                u1.max(u2 * logn * logn)
            } else if beta > 0.75 {
                u1.max(u2)
            } else if beta == 0.75 {
                (u1 * logn.sqrt()).max(u2)
            } else {
                u2
            })
        }
        TailRegime::Exponential { alpha } => {
            if !(alpha > 0.5) {
                return Err(RateError::BadAlpha(alpha));
            }
            Ok(logp.powf(2.0 * alpha + 2.0) * n.powf(-spec.beta_prime()))
        }
        TailRegime::Polynomial { q } => {
            if !(q > 4.0) {
                return Err(RateError::BadMoment(q));
            }
            let p = spec.p as f64;
            let u5 = p.powf(4.0 / q) / n.powf(1.0 - 2.0 / q);
            if spec.beta >= 1.0 - 1.0 / q {
                Ok(u1.max(u5))
            } else {
                let u6 = p.powf(2.0 / q) / n.powf(2.0 * spec.beta - 1.0);
                Ok(u1.max(u5).max(u6))
            }
        }
    }
}

/// Diagnostic band-width suggestion `r_b + c1 * |theta|_1-bound * J`.
///
/// The multiplicative constants of the theory are existence constants, so
/// this is a shape, not a calibrated tuning rule; data-driven selection lives
/// in the tuning module.
pub fn recommend_lambda(
    spec: &RateSpec,
    theta_l1_bound: f64,
    c1: f64,
) -> Result<f64, RateError> {
    assert!(c1 > 0.0, "rate multiplier must be positive");
    Ok(spec.r_b + c1 * theta_l1_bound * theoretical_rate_j(spec)?)
}

/// Error norms `|theta_hat - theta|_w` for each requested w (use
/// `f64::INFINITY` for the sup norm).
pub fn error_norms(theta_hat: &[f64], theta: &[f64], w_list: &[f64]) -> Vec<f64> {
    assert_eq!(theta_hat.len(), theta.len());
    let delta: Vec<f64> = theta_hat.iter().zip(theta).map(|(a, b)| a - b).collect();
    w_list
        .iter()
        .map(|&w| {
            assert!(w >= 1.0, "norm order must be >= 1");
            if w.is_infinite() {
                sup_norm(&delta)
            } else if w == 1.0 {
                l1_norm(&delta)
            } else {
                delta.iter().map(|d| d.abs().powf(w)).sum::<f64>().powf(1.0 / w)
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::l2_norm;

    #[test]
    fn scalar_identity_case() {
        // p = 1, S = [1], b = (1), lambda = 0 -> u = 1, eta = 1.
        let s = DenseMatrix::identity(1);
        let est = estimate_functional(&s, &[1.0], &DantzigConfig::new(0.0));
        assert_eq!(est.status, EstimateStatus::Optimal);
        assert!((est.theta_hat[0] - 1.0).abs() < 1e-9);
        assert!((est.l1_norm - 1.0).abs() < 1e-9);
    }

    #[test]
    fn wide_band_gives_zero() {
        let s = DenseMatrix::identity(3);
        let b = vec![0.4, -0.2, 0.1];
        let est = estimate_functional(&s, &b, &DantzigConfig::new(0.5));
        assert_eq!(est.status, EstimateStatus::Optimal);
        assert!(est.l1_norm < 1e-9, "expected the zero vector, got {:?}", est.theta_hat);
    }

    #[test]
    fn identity_system_recovers_basis_vector() {
        let s = DenseMatrix::identity(4);
        let mut b = vec![0.0; 4];
        b[0] = 1.0;
        let est = estimate_functional(&s, &b, &DantzigConfig::new(0.0));
        assert_eq!(est.status, EstimateStatus::Optimal);
        assert!((est.theta_hat[0] - 1.0).abs() < 1e-9);
        for v in &est.theta_hat[1..] {
            assert!(v.abs() < 1e-9);
        }
    }

    #[test]
    fn matches_small_instance_vertex_oracle() {
        use crate::testing::dantzig_vertex_oracle;
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(71);
        for _ in 0..25 {
            let p = 3;
            let mut g = DenseMatrix::zeros(p, p);
            for i in 0..p {
                for j in 0..p {
                    g.set(i, j, rng.random::<f64>() * 2.0 - 1.0);
                }
            }
            let mut s = g.matmul_transpose(&g);
            for i in 0..p {
                s.set(i, i, s.get(i, i) + 0.5);
            }
            let b: Vec<f64> = (0..p).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
            let lambda = 0.05 + 0.3 * rng.random::<f64>();
            let est = estimate_functional(&s, &b, &DantzigConfig::new(lambda));
            let (_, oracle_obj) = dantzig_vertex_oracle(&s, &b, lambda).expect("feasible");
            assert_eq!(est.status, EstimateStatus::Optimal);
            assert!(
                (est.l1_norm - oracle_obj).abs() < 1e-8,
                "lp {} vs oracle {}",
                est.l1_norm,
                oracle_obj
            );
        }
    }

    #[test]
    fn infeasible_band_is_reported() {
        // S = 0 forces the residual to |b|_inf regardless of eta.
        let s = DenseMatrix::zeros(2, 2);
        let est = estimate_functional(&s, &[1.0, 0.0], &DantzigConfig::new(0.5));
        assert_eq!(est.status, EstimateStatus::Infeasible);
        assert!(est.theta_hat.is_empty());
    }

    #[test]
    fn l1_norm_monotone_in_lambda_and_band_respected() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(101);
        let p = 8;
        let mut g = DenseMatrix::zeros(p, p);
        for i in 0..p {
            for j in 0..p {
                g.set(i, j, rng.random::<f64>() - 0.5);
            }
        }
        let mut s = g.matmul_transpose(&g);
        for i in 0..p {
            s.set(i, i, s.get(i, i) + 1.0);
        }
        let b: Vec<f64> = (0..p).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
        let bmax = sup_norm(&b);
        let mut prev = f64::INFINITY;
        for step in 0..8 {
            let lambda = bmax * (step as f64 + 0.5) / 7.0;
            let est = estimate_functional(&s, &b, &DantzigConfig::new(lambda));
            assert_eq!(est.status, EstimateStatus::Optimal);
            assert!(band_residual(&s, &est.theta_hat, &b) <= lambda + 1e-7);
            assert!(est.l1_norm <= prev + 1e-9, "|theta|_1 not monotone");
            prev = est.l1_norm;
        }
        // lambda >= |b|_inf admits the zero vector.
        let est = estimate_functional(&s, &b, &DantzigConfig::new(bmax));
        assert!(est.l1_norm < 1e-9);
    }

    #[test]
    fn smallness_measure_values() {
        let theta = [1.0, 0.5, 0.0];
        assert!((smallness_d(&theta, 0.7) - 1.2).abs() < 1e-15);
        assert_eq!(smallness_d(&theta, 0.0), 0.0);
        let big = 10.0 * 1.0;
        assert!((smallness_d(&theta, big) - 1.5).abs() < 1e-15);
    }

    #[test]
    fn sparsity_class_membership_and_smallness_bound() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(61);
        // r = 0: D(u) <= M_p u^1 with C = 1.
        let class = SparsityClass::new(0.0, 1.0, 5.0);
        for _ in 0..50 {
            let mut theta = vec![0.0; 30];
            for _ in 0..5 {
                let idx = (rng.random::<u64>() % 30) as usize;
                theta[idx] = rng.random::<f64>() * 2.0 - 1.0;
            }
            assert!(class.contains(&theta));
            for step in 1..10 {
                let u = step as f64 * 0.1;
                assert!(smallness_d(&theta, u) <= class.m_p * u + 1e-12);
            }
        }
        // Counting nonzeros with 0^0 = 0.
        assert_eq!(class.quasi_norm(&[0.0, 0.5, -0.1]), 2.0);
    }

    #[test]
    fn rate_values_match_direct_evaluation() {
        let spec = RateSpec { regime: TailRegime::SubGaussian, beta: 2.0, n: 100, p: 100, r_b: 0.0 };
        let j = theoretical_rate_j(&spec).unwrap();
        assert!((j - (100.0f64.ln() / 100.0).sqrt()).abs() < 1e-15);
        assert!((j - 0.21460).abs() < 1e-4);

        let spec = RateSpec {
            regime: TailRegime::Exponential { alpha: 1.0 },
            beta: 2.0,
            n: 10_000,
            p: 100,
            r_b: 0.0,
        };
        let j = theoretical_rate_j(&spec).unwrap();
        assert!((j - 100.0f64.ln().powi(4) / 100.0).abs() < 1e-10);
        assert!((j - 4.498).abs() < 5e-3);
    }

    #[test]
    fn polynomial_rate_matches_componentwise_recomputation() {
        let spec = RateSpec {
            regime: TailRegime::Polynomial { q: 8.0 },
            beta: 0.55,
            n: 400,
            p: 120,
            r_b: 0.0,
        };
        let j = theoretical_rate_j(&spec).unwrap();
        let n = 400.0f64;
        let p = 120.0f64;
        let u1 = (p.ln() / n).sqrt();
        let u5 = p.powf(0.5) / n.powf(0.75);
        let u6 = p.powf(0.25) / n.powf(0.1);
        assert!((j - u1.max(u5).max(u6)).abs() < 1e-15);
    }

    #[test]
    fn rate_rejects_invalid_regimes() {
        let mut spec = RateSpec { regime: TailRegime::SubGaussian, beta: 0.5, n: 10, p: 10, r_b: 0.0 };
        assert!(theoretical_rate_j(&spec).is_err());
        spec.beta = 2.0;
        spec.regime = TailRegime::Exponential { alpha: 0.5 };
        assert!(theoretical_rate_j(&spec).is_err());
        spec.regime = TailRegime::Polynomial { q: 4.0 };
        assert!(theoretical_rate_j(&spec).is_err());
    }

    #[test]
    fn rate_is_continuous_and_decreasing_in_n() {
        for regime in [
            TailRegime::SubGaussian,
            TailRegime::Exponential { alpha: 1.0 },
            TailRegime::Polynomial { q: 6.0 },
        ] {
            for beta in [0.6, 0.8, 1.5] {
                let mut prev: Option<f64> = None;
                for n in (200..4000).step_by(10) {
                    let spec = RateSpec { regime, beta, n, p: 100, r_b: 0.0 };
                    let j = theoretical_rate_j(&spec).unwrap();
                    if let Some(p) = prev {
                        assert!(j <= p + 1e-15, "rate increased at n = {n}");
                        // Small grid steps move the rate by a small amount.
                        assert!((p - j) / p < 0.05, "rate jumped at n = {n}");
                    }
                    prev = Some(j);
                }
            }
        }
    }

    #[test]
    fn recommend_lambda_identities() {
        let spec = RateSpec { regime: TailRegime::SubGaussian, beta: 2.0, n: 100, p: 50, r_b: 0.0 };
        let j = theoretical_rate_j(&spec).unwrap();
        assert!((recommend_lambda(&spec, 1.0, 1.0).unwrap() - j).abs() < 1e-15);
        let with_rb = RateSpec { r_b: 0.3, ..spec };
        assert!((recommend_lambda(&with_rb, 0.0, 1.0).unwrap() - 0.3).abs() < 1e-15);
        let single = recommend_lambda(&spec, 2.0, 1.0).unwrap();
        let doubled = recommend_lambda(&spec, 2.0, 2.0).unwrap();
        assert!((doubled - 2.0 * single).abs() < 1e-12);
    }

    #[test]
    fn error_norm_values_and_interpolation() {
        let w = error_norms(&[3.0, 4.0], &[0.0, 0.0], &[2.0]);
        assert!((w[0] - 5.0).abs() < 1e-15);
        assert_eq!(error_norms(&[1.0, 2.0], &[1.0, 2.0], &[1.0, 2.0, f64::INFINITY]), vec![0.0; 3]);

        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(91);
        for _ in 0..50 {
            let delta: Vec<f64> = (0..20).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
            let zero = vec![0.0; 20];
            let norms = error_norms(&delta, &zero, &[1.5, 2.0, 4.0]);
            let linf = sup_norm(&delta);
            let l1 = l1_norm(&delta);
            for (w, norm) in [1.5, 2.0, 4.0].iter().zip(&norms) {
                let bound = linf.powf(1.0 - 1.0 / w) * l1.powf(1.0 / w);
                assert!(*norm <= bound + 1e-12, "interpolation violated at w = {w}");
            }
            assert!((norms[1] - l2_norm(&delta)).abs() < 1e-12);
        }
    }
}
