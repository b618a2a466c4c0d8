//! Vector and scalar linear-process simulators with exactly computable
//! second moments.
//!
//! A simulated model is a *finite* moving average: the truncation order is
//! part of the model, so [`true_autocovariance`] is exact for the process the
//! sampler actually generates. Tests can therefore compare Monte Carlo output
//! against closed-form moments with no truncation bias.

use crate::numerics::DenseMatrix;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, StudentT};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default moving-average truncation order for model construction.
pub const DEFAULT_TRUNCATION: usize = 2000;

/// Burn-in floor for autoregressive simulation.
const AR_BURN_IN_MIN: usize = 200;

/// Absolute value beyond which an AR path is declared unstable.
const AR_OVERFLOW_BOUND: f64 = 1e12;

#[derive(Debug, Error)]
pub enum ProcessError {
    #[error("autoregressive recursion diverged during burn-in (|X| > {bound:.1e} at step {step}); the model is unstable")]
    Unstable { step: usize, bound: f64 },
}

/// Innovation laws, each standardized to mean zero and unit variance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InnovationDistribution {
    /// Uniform on [-sqrt(3), sqrt(3)].
    Uniform,
    /// Standard normal.
    Gaussian,
    /// Double-exponential (Laplace) scaled to unit variance.
    DoubleExponential,
    /// Student-t with 3 degrees of freedom divided by sqrt(3)
    /// (Var(t_3) = 3, so the rescaling is forced).
    StudentT3,
}

impl InnovationDistribution {
    pub fn draw(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            Self::Uniform => {
                let root3 = 3.0f64.sqrt();
                rng.random::<f64>() * 2.0 * root3 - root3
            }
            Self::Gaussian => rng.sample(StandardNormal),
            Self::DoubleExponential => {
                // Inverse CDF of Laplace(0, b) with b = 1/sqrt(2) for unit variance.
                let u: f64 = rng.random::<f64>() - 0.5;
                let b = std::f64::consts::FRAC_1_SQRT_2;
                -b * u.signum() * (1.0 - 2.0 * u.abs()).ln()
            }
            Self::StudentT3 => {
                let t: f64 = StudentT::new(3.0).expect("valid dof").sample(rng);
                t / 3.0f64.sqrt()
            }
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "uniform" => Some(Self::Uniform),
            "gaussian" => Some(Self::Gaussian),
            "double_exponential" => Some(Self::DoubleExponential),
            "student_t3" => Some(Self::StudentT3),
            _ => None,
        }
    }
}

/// Finite-order truncation of a vector linear process
/// `x_i = mu + sum_m A_m xi_{i-m}` whose coefficient rows satisfy the decay
/// bound `max_j |A_{m,j.}| <= c0 (1 v m)^(-beta)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinearProcessModel {
    pub p: usize,
    #[serde(with = "serde_beta")]
    pub beta: f64,
    /// Truncation order M; `coefficients` holds A_0..A_M.
    pub truncation: usize,
    pub coefficients: Vec<DenseMatrix>,
    pub mean: Vec<f64>,
    pub innovation: InnovationDistribution,
    /// Effective decay constant: the smallest c0 for which the decay bound
    /// holds on the stored coefficients.
    pub c0: f64,
    /// Seed the coefficients were drawn from, kept for provenance.
    pub seed: u64,
}

/// `beta` may be infinite (i.i.d. convention), which plain JSON numbers
/// cannot carry.
mod serde_beta {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(beta: &f64, s: S) -> Result<S::Ok, S::Error> {
        if beta.is_finite() {
            beta.serialize(s)
        } else {
            "infinity".serialize(s)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Number(v) => Ok(v),
            Raw::Text(t) if t == "infinity" => Ok(f64::INFINITY),
            Raw::Text(t) => Err(serde::de::Error::custom(format!("invalid beta: {t:?}"))),
        }
    }
}

/// `n x p` sample; row i is the observation x_i.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampleMatrix {
    pub n: usize,
    pub p: usize,
    pub data: DenseMatrix,
}

impl SampleMatrix {
    pub fn new(data: DenseMatrix) -> Self {
        Self { n: data.rows(), p: data.cols(), data }
    }

    pub fn observation(&self, i: usize) -> &[f64] {
        self.data.row(i)
    }

    pub fn column_means(&self) -> Vec<f64> {
        let mut means = vec![0.0; self.p];
        for i in 0..self.n {
            for (m, v) in means.iter_mut().zip(self.data.row(i)) {
                *m += v;
            }
        }
        for m in &mut means {
            *m /= self.n as f64;
        }
        means
    }

    /// Vertical concatenation; panics on column mismatch.
    pub fn vstack(&self, other: &SampleMatrix) -> SampleMatrix {
        assert_eq!(self.p, other.p);
        let mut data = DenseMatrix::zeros(self.n + other.n, self.p);
        for i in 0..self.n {
            data.row_mut(i).copy_from_slice(self.data.row(i));
        }
        for i in 0..other.n {
            data.row_mut(self.n + i).copy_from_slice(other.data.row(i));
        }
        SampleMatrix::new(data)
    }

    /// Rows `lo..hi` as a new sample.
    pub fn slice_rows(&self, lo: usize, hi: usize) -> SampleMatrix {
        assert!(lo <= hi && hi <= self.n);
        let mut data = DenseMatrix::zeros(hi - lo, self.p);
        for i in lo..hi {
            data.row_mut(i - lo).copy_from_slice(self.data.row(i));
        }
        SampleMatrix::new(data)
    }
}

/// Scalar autoregression `X_i = sum_j coefficients[j-1] X_{i-j} + e_i` with
/// Gaussian innovations of standard deviation `noise_sd`. Stability is
/// enforced by the simulation guard rather than a root check.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ArModel {
    pub order: usize,
    pub coefficients: Vec<f64>,
    pub noise_sd: f64,
}

impl ArModel {
    pub fn new(coefficients: Vec<f64>, noise_sd: f64) -> Self {
        Self { order: coefficients.len(), coefficients, noise_sd }
    }
}

/// Splitmix64 step, used to derive independent seed streams from a base seed.
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    let mut z = base ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Builds a random coefficient model with the default truncation order.
///
/// Each `A_m` has i.i.d. N(0, 1/p) entries scaled by `(1 v m)^(-beta)`, after
/// which a `sparsify_frac` fraction of entries (drawn independently per lag)
/// is set to zero. `beta = infinity` is the i.i.d. convention: every `A_m`
/// with m >= 1 is zero.
pub fn build_model(
    p: usize,
    beta: f64,
    sparsify_frac: f64,
    innovation: InnovationDistribution,
    seed: u64,
) -> LinearProcessModel {
    build_model_truncated(p, beta, sparsify_frac, DEFAULT_TRUNCATION, innovation, seed)
}

/// [`build_model`] with an explicit truncation order.
pub fn build_model_truncated(
    p: usize,
    beta: f64,
    sparsify_frac: f64,
    truncation: usize,
    innovation: InnovationDistribution,
    seed: u64,
) -> LinearProcessModel {
    assert!(p >= 1, "dimension must be positive");
    assert!(beta > 0.5, "dependence index must exceed 1/2");
    assert!((0.0..1.0).contains(&sparsify_frac), "sparsify fraction must lie in [0, 1)");
    let truncation = truncation.max(1);

    let mut rng = seeded_rng(seed);
    let sd = (1.0 / p as f64).sqrt();
    let mut coefficients = Vec::with_capacity(truncation + 1);
    let mut c0 = 0.0f64;

    for m in 0..=truncation {
        let decay = if beta.is_infinite() {
            if m == 0 {
                1.0
            } else {
                0.0
            }
        } else {
            (1.0f64.max(m as f64)).powf(-beta)
        };
        let mut a = DenseMatrix::zeros(p, p);
        if decay > 0.0 {
            for i in 0..p {
                for j in 0..p {
                    let z: f64 = rng.sample(StandardNormal);
                    let keep = sparsify_frac == 0.0 || rng.random::<f64>() >= sparsify_frac;
                    if keep {
                        a.set(i, j, sd * z * decay);
                    }
                }
            }
            let norm_scale = if beta.is_infinite() { 1.0 } else { (1.0f64.max(m as f64)).powf(beta) };
            c0 = c0.max(max_row_norm(&a) * norm_scale);
        }
        coefficients.push(a);
    }

    LinearProcessModel {
        p,
        beta,
        truncation,
        coefficients,
        mean: vec![0.0; p],
        innovation,
        c0,
        seed,
    }
}

fn max_row_norm(a: &DenseMatrix) -> f64 {
    (0..a.rows())
        .map(|i| a.row(i).iter().map(|v| v * v).sum::<f64>().sqrt())
        .fold(0.0, f64::max)
}

/// Verifies the row-norm decay bound on the stored coefficients.
pub fn decay_bound_holds(model: &LinearProcessModel) -> bool {
    model.coefficients.iter().enumerate().all(|(m, a)| {
        let decay = if model.beta.is_infinite() {
            if m == 0 {
                1.0
            } else {
                0.0
            }
        } else {
            (1.0f64.max(m as f64)).powf(-model.beta)
        };
        max_row_norm(a) <= model.c0 * decay + 1e-12
    })
}

/// Draws an exactly stationary sample of length `n` from the truncated model.
///
/// A presample buffer of M innovation vectors initializes the moving average,
/// so every observation has the model's full marginal law.
pub fn simulate(model: &LinearProcessModel, n: usize, seed: u64) -> SampleMatrix {
    assert!(n >= 1);
    let p = model.p;
    let m_ord = model.truncation;
    let mut rng = seeded_rng(seed);

    // Innovation rows for xi_{1-M} .. xi_n (row t holds xi_{t+1-M}).
    let total = n + m_ord;
    let mut innovations = DenseMatrix::zeros(total, p);
    for t in 0..total {
        let row = innovations.row_mut(t);
        for v in row.iter_mut() {
            *v = model.innovation.draw(&mut rng);
        }
    }

    let mut x = DenseMatrix::zeros(n, p);
    for i in 0..n {
        x.row_mut(i).copy_from_slice(&model.mean);
    }
    // x_i += A_m xi_{i-m}; innovation index of xi_{i-m} is (i - m) + M - 1
    // for i = 1..n, i.e. rows (M - m)..(M - m + n).
    for (m, a) in model.coefficients.iter().enumerate() {
        if a.max_abs() == 0.0 {
            continue;
        }
        let base = m_ord - m;
        for i in 0..n {
            let xi = innovations.row(base + i);
            let out = x.row_mut(i);
            for (j, o) in out.iter_mut().enumerate() {
                let arow = a.row(j);
                let mut acc = 0.0;
                for (av, ev) in arow.iter().zip(xi) {
                    acc += av * ev;
                }
                *o += acc;
            }
        }
    }
    SampleMatrix::new(x)
}

/// Exact lag-k autocovariance of the truncated model:
/// `Sigma_k = sum_{m=0}^{M-k} A_m A_{m+k}'`.
pub fn true_autocovariance(model: &LinearProcessModel, k: usize) -> DenseMatrix {
    let p = model.p;
    let mut sigma = DenseMatrix::zeros(p, p);
    if k > model.truncation {
        return sigma;
    }
    for m in 0..=(model.truncation - k) {
        let a = &model.coefficients[m];
        let b = &model.coefficients[m + k];
        if a.max_abs() == 0.0 || b.max_abs() == 0.0 {
            continue;
        }
        let prod = a.matmul_transpose(b);
        sigma.add_assign_scaled(&prod, 1.0);
    }
    if k == 0 {
        sigma.symmetrize();
    }
    sigma
}

/// Simulates a scalar AR path with Gaussian noise, discarding a burn-in of
/// `max(10 * order, 200)` steps.
pub fn simulate_ar(model: &ArModel, n: usize, seed: u64) -> Result<Vec<f64>, ProcessError> {
    assert!(n >= 1);
    let order = model.order;
    let burn_in = (10 * order).max(AR_BURN_IN_MIN);
    let mut rng = seeded_rng(seed);

    let mut history = vec![0.0f64; order.max(1)];
    let mut out = Vec::with_capacity(n);
    for step in 0..(burn_in + n) {
        let mut x: f64 = rng.sample::<f64, _>(StandardNormal) * model.noise_sd;
        for (j, &c) in model.coefficients.iter().enumerate() {
            x += c * history[j];
        }
        if step < burn_in && x.abs() > AR_OVERFLOW_BOUND {
            return Err(ProcessError::Unstable { step, bound: AR_OVERFLOW_BOUND });
        }
        if order > 0 {
            history.rotate_right(1);
            history[0] = x;
        }
        if step >= burn_in {
            out.push(x);
        }
    }
    Ok(out)
}

/// i.i.d. draws from one of the standardized innovation laws.
pub fn draw_innovations(dist: InnovationDistribution, count: usize, seed: u64) -> Vec<f64> {
    assert!(count >= 1);
    let mut rng = seeded_rng(seed);
    (0..count).map(|_| dist.draw(&mut rng)).collect()
}
