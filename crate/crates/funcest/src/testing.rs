//! Brute-force oracles and small statistical helpers used by the test
//! suites. Nothing here is part of the library's production surface, and the
//! oracles deliberately avoid the solver paths they are used to check.

use crate::numerics::{solve_linear_system, DenseMatrix, LpProblem};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OracleOutcome {
    Optimal(f64),
    Infeasible,
}

/// Solves `min c'x, Ax <= b, x >= 0` by enumerating every basic solution of
/// the slack-augmented equality system `[A I] x' = b` and keeping the best
/// feasible one. Exponential in the problem size; intended for d <= 6,
/// k <= 12.
pub fn enumerate_lp_oracle(problem: &LpProblem) -> OracleOutcome {
    let d = problem.num_vars();
    let k = problem.num_constraints();
    let total = d + k;
    assert!(total <= 20, "oracle is exponential; keep instances tiny");

    let mut best: Option<f64> = None;
    let mut subset: Vec<usize> = (0..k).collect();

    loop {
        // Build the k x k basis matrix from the selected columns of [A I].
        let mut basis = DenseMatrix::zeros(k, k);
        for (pos, &col) in subset.iter().enumerate() {
            for i in 0..k {
                let v = if col < d {
                    problem.constraint_matrix.get(i, col)
                } else if col - d == i {
                    1.0
                } else {
                    0.0
                };
                basis.set(i, pos, v);
            }
        }
        if let Ok(xb) = solve_linear_system(&basis, &problem.rhs) {
            if xb.iter().all(|&v| v >= -1e-9) {
                let obj: f64 = subset
                    .iter()
                    .zip(&xb)
                    .filter(|(&col, _)| col < d)
                    .map(|(&col, &v)| problem.objective[col] * v)
                    .sum();
                best = Some(best.map_or(obj, |b: f64| b.min(obj)));
            }
        }
        if !next_combination(&mut subset, total) {
            break;
        }
    }

    match best {
        Some(obj) => OracleOutcome::Optimal(obj),
        None => OracleOutcome::Infeasible,
    }
}

/// Advances `subset` (strictly increasing indices) to the next k-combination
/// of `0..total`; returns false after the last one.
fn next_combination(subset: &mut [usize], total: usize) -> bool {
    let k = subset.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if subset[i] < total - k + i {
            subset[i] += 1;
            for j in (i + 1)..k {
                subset[j] = subset[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Brute-force minimizer of `|eta|_1` subject to `|S eta - b|_inf <= lambda`,
/// for tiny p. The minimum of a piecewise-linear convex objective over a
/// polytope is attained where p independent constraints from
/// `{s_k' eta = b_k +/- lambda} U {eta_j = 0}` are active, so enumerating all
/// such intersection points is exhaustive.
pub fn dantzig_vertex_oracle(s: &DenseMatrix, b: &[f64], lambda: f64) -> Option<(Vec<f64>, f64)> {
    let p = b.len();
    assert!(p <= 5, "oracle is exponential; keep instances tiny");
    assert!(s.rows() == p && s.cols() == p);

    // Hyperplane catalogue: (normal, offset). Band planes use the columns of
    // S to mirror the estimator's constraint orientation.
    let mut normals: Vec<Vec<f64>> = Vec::new();
    let mut offsets: Vec<f64> = Vec::new();
    for kcol in 0..p {
        let col = s.column(kcol);
        normals.push(col.clone());
        offsets.push(b[kcol] - lambda);
        normals.push(col);
        offsets.push(b[kcol] + lambda);
    }
    for j in 0..p {
        let mut e = vec![0.0; p];
        e[j] = 1.0;
        normals.push(e);
        offsets.push(0.0);
    }

    let total = normals.len();
    let mut subset: Vec<usize> = (0..p).collect();
    let mut best: Option<(Vec<f64>, f64)> = None;
    loop {
        let mut a = DenseMatrix::zeros(p, p);
        let mut rhs = vec![0.0; p];
        for (row, &idx) in subset.iter().enumerate() {
            for j in 0..p {
                a.set(row, j, normals[idx][j]);
            }
            rhs[row] = offsets[idx];
        }
        if let Ok(eta) = solve_linear_system(&a, &rhs) {
            let resid = s
                .transpose()
                .matvec(&eta)
                .iter()
                .zip(b)
                .fold(0.0f64, |m, (se, bi)| m.max((se - bi).abs()));
            if resid <= lambda + 1e-9 {
                let obj: f64 = eta.iter().map(|v| v.abs()).sum();
                if best.as_ref().map_or(true, |(_, bo)| obj < *bo) {
                    best = Some((eta, obj));
                }
            }
        }
        if !next_combination(&mut subset, total) {
            break;
        }
    }
    best
}

/// Upper-tail probability `P(Bin(n, 1/2) >= s)` for the paired sign test.
pub fn binomial_sign_test_pvalue(successes: usize, n: usize) -> f64 {
    let mut log_pmf = -(n as f64) * std::f64::consts::LN_2; // k = 0
    let mut tail = 0.0;
    for k in 0..=n {
        if k >= successes {
            tail += log_pmf.exp();
        }
        if k < n {
            log_pmf += ((n - k) as f64).ln() - ((k + 1) as f64).ln();
        }
    }
    tail.min(1.0)
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn sample_sd(xs: &[f64]) -> f64 {
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0)).sqrt()
}

pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn combinations_cover_all() {
        let mut subset = vec![0, 1];
        let mut count = 1;
        while next_combination(&mut subset, 5) {
            count += 1;
        }
        assert_eq!(count, 10); // C(5, 2)
    }

    #[test]
    fn sign_test_tail_values() {
        // P(X >= 0) = 1 and P(X >= n) = 2^-n.
        assert!((binomial_sign_test_pvalue(0, 10) - 1.0).abs() < 1e-12);
        assert!((binomial_sign_test_pvalue(10, 10) - 2f64.powi(-10)).abs() < 1e-15);
        // Symmetric midpoint: P(X >= 5) for n = 9 is exactly 1/2.
        assert!((binomial_sign_test_pvalue(5, 9) - 0.5).abs() < 1e-12);
    }
}
