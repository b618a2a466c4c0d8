//! Two-phase dense tableau simplex for problems of the form
//! `min c'x  s.t.  A x <= b,  x >= 0`.
//!
//! Pivot selection uses Dantzig pricing (most negative reduced cost) for
//! speed, falling back to Bland's rule after a run of degenerate pivots so
//! that termination is guaranteed on the highly degenerate programs produced
//! by the l1-minimization reformulation. All tie-breaks are index-based, so
//! the solver is a deterministic function of its input.

use super::{dot, l1_norm, DenseMatrix, PIVOT_THRESHOLD};

/// `min objective . x` subject to `constraint_matrix x <= rhs`, `x >= 0`.
#[derive(Debug, Clone)]
pub struct LpProblem {
    pub objective: Vec<f64>,
    pub constraint_matrix: DenseMatrix,
    pub rhs: Vec<f64>,
}

impl LpProblem {
    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.rhs.len()
    }

    fn validate(&self) {
        assert_eq!(
            self.constraint_matrix.cols(),
            self.objective.len(),
            "constraint matrix columns must match objective length"
        );
        assert_eq!(
            self.constraint_matrix.rows(),
            self.rhs.len(),
            "constraint matrix rows must match rhs length"
        );
        assert!(self.objective.iter().all(|v| v.is_finite()), "objective must be finite");
        assert!(self.rhs.iter().all(|v| v.is_finite()), "rhs must be finite");
        assert!(self.constraint_matrix.all_finite(), "constraint matrix must be finite");
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Values of the structural variables; empty unless `status == Optimal`.
    pub primal: Vec<f64>,
    /// Meaningful only when `status == Optimal`.
    pub objective_value: f64,
    pub iterations: usize,
}

impl LpSolution {
    fn non_optimal(status: LpStatus, iterations: usize) -> Self {
        Self { status, primal: Vec::new(), objective_value: f64::NAN, iterations }
    }
}

// Consecutive non-improving pivots tolerated before switching to Bland's rule.
const BLAND_TRIGGER: usize = 64;

struct Tableau {
    /// (rows + 1) x width, row-major; last row is the reduced-cost row and
    /// the last column is the rhs.
    data: Vec<f64>,
    rows: usize,
    width: usize,
    n_struct: usize,
    n_slack: usize,
    n_art: usize,
    basis: Vec<usize>,
    scratch: Vec<f64>,
    iterations: usize,
    tol: f64,
}

enum PhaseOutcome {
    Converged,
    Unbounded,
    IterationLimit,
}

impl Tableau {
    fn new(problem: &LpProblem, tol: f64) -> Self {
        let k = problem.num_constraints();
        let d = problem.num_vars();
        let n_art = problem.rhs.iter().filter(|&&b| b < 0.0).count();
        let width = d + k + n_art + 1;
        let mut data = vec![0.0f64; (k + 1) * width];
        let mut basis = vec![0usize; k];

        let mut art = d + k;
        for i in 0..k {
            let flip = problem.rhs[i] < 0.0;
            let sign = if flip { -1.0 } else { 1.0 };
            let row = &mut data[i * width..(i + 1) * width];
            for (j, &a) in problem.constraint_matrix.row(i).iter().enumerate() {
                row[j] = sign * a;
            }
            row[d + i] = sign; // slack
            row[width - 1] = sign * problem.rhs[i];
            if flip {
                row[art] = 1.0;
                basis[i] = art;
                art += 1;
            } else {
                basis[i] = d + i;
            }
        }

        Tableau {
            data,
            rows: k,
            width,
            n_struct: d,
            n_slack: k,
            n_art,
            basis,
            scratch: vec![0.0; width],
            iterations: 0,
            tol,
        }
    }

    #[inline]
    fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.width..(i + 1) * self.width]
    }

    fn rhs_of(&self, i: usize) -> f64 {
        self.data[i * self.width + self.width - 1]
    }

    fn objective(&self) -> f64 {
        -self.data[self.rows * self.width + self.width - 1]
    }

    /// Installs the reduced-cost row for the cost vector `costs` (indexed over
    /// all columns except the rhs) given the current basis.
    fn install_costs(&mut self, costs: &[f64]) {
        let w = self.width;
        {
            let cost_row = &mut self.data[self.rows * w..(self.rows + 1) * w];
            cost_row[..w - 1].copy_from_slice(costs);
            cost_row[w - 1] = 0.0;
        }
        for i in 0..self.rows {
            let cb = costs[self.basis[i]];
            if cb == 0.0 {
                continue;
            }
            let (body, cost_row) = self.data.split_at_mut(self.rows * w);
            let row = &body[i * w..(i + 1) * w];
            for (c, r) in cost_row.iter_mut().zip(row) {
                *c -= cb * r;
            }
        }
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let w = self.width;
        let pivot = self.data[pr * w + pc];
        // Normalize the pivot row into scratch, then write it back.
        {
            let row = &self.data[pr * w..(pr + 1) * w];
            for (s, &v) in self.scratch.iter_mut().zip(row) {
                *s = v / pivot;
            }
            self.scratch[pc] = 1.0;
            self.data[pr * w..(pr + 1) * w].copy_from_slice(&self.scratch);
        }
        for i in 0..=self.rows {
            if i == pr {
                continue;
            }
            let row = &mut self.data[i * w..(i + 1) * w];
            let factor = row[pc];
            if factor == 0.0 {
                continue;
            }
            for (a, &s) in row.iter_mut().zip(&self.scratch) {
                *a -= factor * s;
            }
            row[pc] = 0.0;
        }
        self.basis[pr] = pc;
        self.iterations += 1;
    }

    /// Chooses the entering column among `0..limit`, skipping artificials.
    fn entering(&self, limit: usize, bland: bool) -> Option<usize> {
        let cost_row = self.row(self.rows);
        if bland {
            cost_row[..limit].iter().position(|&c| c < -self.tol)
        } else {
            let mut best: Option<(usize, f64)> = None;
            for (j, &c) in cost_row[..limit].iter().enumerate() {
                if c < -self.tol && best.map_or(true, |(_, bc)| c < bc) {
                    best = Some((j, c));
                }
            }
            best.map(|(j, _)| j)
        }
    }

    /// Ratio test. In Bland mode this is the exact textbook rule with ties
    /// broken toward the smallest basis variable index, which is what the
    /// anti-cycling guarantee needs. Otherwise a two-pass rule first finds
    /// the tightest relaxed step (each basic variable may dip below zero by
    /// at most the feasibility tolerance) and then takes the largest pivot
    /// among rows within that step; preferring large pivots keeps the
    /// tableau from being corrupted by near-zero divisions on long
    /// degenerate runs.
    fn leaving(&self, pc: usize, bland: bool) -> Option<usize> {
        let w = self.width;
        if bland {
            let mut best: Option<(usize, f64)> = None;
            for i in 0..self.rows {
                let a = self.data[i * w + pc];
                if a <= PIVOT_THRESHOLD {
                    continue;
                }
                let ratio = self.rhs_of(i).max(0.0) / a;
                match best {
                    None => best = Some((i, ratio)),
                    Some((bi, br)) => {
                        if ratio < br - 1e-12
                            || (ratio <= br + 1e-12 && self.basis[i] < self.basis[bi])
                        {
                            best = Some((i, ratio));
                        }
                    }
                }
            }
            return best.map(|(i, _)| i);
        }

        // Pass one: the tightest step when every row is allowed to relax by
        // the feasibility tolerance.
        let mut step = f64::INFINITY;
        let mut any = false;
        for i in 0..self.rows {
            let a = self.data[i * w + pc];
            if a <= PIVOT_THRESHOLD {
                continue;
            }
            any = true;
            let rhs = self.rhs_of(i).max(0.0);
            step = step.min((rhs + self.tol) / a);
        }
        if !any {
            return None;
        }
        // Pass two: the largest pivot among rows whose exact ratio fits in
        // the relaxed step.
        let mut best: Option<(usize, f64)> = None;
        for i in 0..self.rows {
            let a = self.data[i * w + pc];
            if a <= PIVOT_THRESHOLD {
                continue;
            }
            let ratio = self.rhs_of(i).max(0.0) / a;
            if ratio <= step {
                match best {
                    None => best = Some((i, a)),
                    Some((bi, ba)) => {
                        if a > ba * (1.0 + 1e-12)
                            || ((a - ba).abs() <= ba * 1e-12 && self.basis[i] < self.basis[bi])
                        {
                            best = Some((i, a));
                        }
                    }
                }
            }
        }
        best.map(|(i, _)| i)
    }

    fn run_phase(&mut self, enter_limit: usize, max_iter: usize) -> PhaseOutcome {
        let mut bland = false;
        let mut stalled = 0usize;
        loop {
            if self.iterations >= max_iter {
                return PhaseOutcome::IterationLimit;
            }
            let Some(pc) = self.entering(enter_limit, bland) else {
                return PhaseOutcome::Converged;
            };
            let Some(pr) = self.leaving(pc, bland) else {
                return PhaseOutcome::Unbounded;
            };
            let before = self.objective();
            self.pivot(pr, pc);
            let improved = before - self.objective() > 1e-12 * (1.0 + before.abs());
            if improved {
                stalled = 0;
                bland = false;
            } else {
                stalled += 1;
                if stalled >= BLAND_TRIGGER {
                    bland = true;
                }
            }
        }
    }

    /// Pivots basic artificials out after phase one. Rows whose non-artificial
    /// entries are all numerically zero are redundant and left untouched (the
    /// artificial stays basic at value zero).
    fn drive_out_artificials(&mut self) {
        let art_start = self.n_struct + self.n_slack;
        for r in 0..self.rows {
            if self.basis[r] < art_start {
                continue;
            }
            let mut best: Option<(usize, f64)> = None;
            for (j, &v) in self.row(r)[..art_start].iter().enumerate() {
                let mag = v.abs();
                if mag > PIVOT_THRESHOLD && best.map_or(true, |(_, bm)| mag > bm) {
                    best = Some((j, mag));
                }
            }
            if let Some((j, _)) = best {
                self.pivot(r, j);
            }
        }
    }
}

/// Solves an [`LpProblem`] with the two-phase simplex method.
///
/// `tol` is the feasibility/optimality tolerance (reduced costs above `-tol`
/// count as nonnegative); `max_iter` bounds the total pivot count across both
/// phases and is reported as [`LpStatus::IterationLimit`] when exceeded.
pub fn solve_lp(problem: &LpProblem, tol: f64, max_iter: usize) -> LpSolution {
    problem.validate();
    assert!(tol > 0.0, "tolerance must be positive");

    let mut t = Tableau::new(problem, tol);
    let d = t.n_struct;
    let enter_limit = t.n_struct + t.n_slack;

    if t.n_art > 0 {
        let mut phase1_costs = vec![0.0f64; t.width - 1];
        for j in enter_limit..t.width - 1 {
            phase1_costs[j] = 1.0;
        }
        t.install_costs(&phase1_costs);
        match t.run_phase(enter_limit, max_iter) {
            PhaseOutcome::Converged => {}
            // Phase one minimizes a sum of nonnegative variables, so an
            // unbounded ray here means numerical breakdown.
            PhaseOutcome::Unbounded | PhaseOutcome::IterationLimit => {
                return LpSolution::non_optimal(LpStatus::IterationLimit, t.iterations);
            }
        }
        let infeas = t.objective();
        if infeas > tol * (1.0 + l1_norm(&problem.rhs)) {
            return LpSolution::non_optimal(LpStatus::Infeasible, t.iterations);
        }
        t.drive_out_artificials();
    }

    let mut phase2_costs = vec![0.0f64; t.width - 1];
    phase2_costs[..d].copy_from_slice(&problem.objective);
    t.install_costs(&phase2_costs);
    match t.run_phase(enter_limit, max_iter) {
        PhaseOutcome::Converged => {}
        PhaseOutcome::Unbounded => {
            return LpSolution::non_optimal(LpStatus::Unbounded, t.iterations);
        }
        PhaseOutcome::IterationLimit => {
            return LpSolution::non_optimal(LpStatus::IterationLimit, t.iterations);
        }
    }

    let mut x = vec![0.0f64; d];
    for (r, &b) in t.basis.iter().enumerate() {
        if b < d {
            x[b] = t.rhs_of(r);
        }
    }

    // Verify the claimed optimum against the original problem; accumulated
    // rounding across a long degenerate run can corrupt the tableau, and a
    // corrupted vertex must never be reported as optimal.
    let scale = 1.0 + problem.rhs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let check_tol = 1e-6 * scale;
    let feasible = x.iter().all(|&v| v >= -check_tol)
        && (0..problem.num_constraints()).all(|i| {
            let lhs = dot(problem.constraint_matrix.row(i), &x);
            lhs <= problem.rhs[i] + check_tol
        });
    if !feasible {
        return LpSolution::non_optimal(LpStatus::IterationLimit, t.iterations);
    }

    let objective_value = dot(&problem.objective, &x);
    LpSolution { status: LpStatus::Optimal, primal: x, objective_value, iterations: t.iterations }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp(c: Vec<f64>, a: Vec<Vec<f64>>, b: Vec<f64>) -> LpProblem {
        LpProblem { objective: c, constraint_matrix: DenseMatrix::from_rows(&a), rhs: b }
    }

    #[test]
    fn lower_bound_binds() {
        // min x1 s.t. x1 <= 3, x1 >= 0.
        let sol = solve_lp(&lp(vec![1.0], vec![vec![1.0]], vec![3.0]), 1e-9, 100);
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!(sol.objective_value.abs() < 1e-12);
        assert!(sol.primal[0].abs() < 1e-12);
    }

    #[test]
    fn simplex_face_optimum() {
        // min -x1 - x2 s.t. x1 + x2 <= 1.
        let sol = solve_lp(&lp(vec![-1.0, -1.0], vec![vec![1.0, 1.0]], vec![1.0]), 1e-9, 100);
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective_value + 1.0).abs() < 1e-12);
        assert!((sol.primal[0] + sol.primal[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn negative_rhs_needs_phase_one() {
        // min x1 + x2 s.t. -x1 - x2 <= -2 (i.e. x1 + x2 >= 2).
        let sol = solve_lp(&lp(vec![1.0, 1.0], vec![vec![-1.0, -1.0]], vec![-2.0]), 1e-9, 100);
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective_value - 2.0).abs() < 1e-10);
    }

    #[test]
    fn infeasible_detected() {
        // x1 <= 1 and x1 >= 2 cannot both hold.
        let sol = solve_lp(
            &lp(vec![1.0], vec![vec![1.0], vec![-1.0]], vec![1.0, -2.0]),
            1e-9,
            100,
        );
        assert_eq!(sol.status, LpStatus::Infeasible);
        assert!(sol.primal.is_empty());
    }

    #[test]
    fn unbounded_detected() {
        // min -x1 with no binding constraint on x1.
        let sol = solve_lp(&lp(vec![-1.0, 0.0], vec![vec![0.0, 1.0]], vec![1.0]), 1e-9, 100);
        assert_eq!(sol.status, LpStatus::Unbounded);
    }

    #[test]
    fn iteration_limit_reported() {
        let sol = solve_lp(&lp(vec![-1.0, -1.0], vec![vec![1.0, 1.0]], vec![1.0]), 1e-9, 0);
        assert_eq!(sol.status, LpStatus::IterationLimit);
    }

    #[test]
    fn deterministic_for_fixed_instance() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        for _ in 0..20 {
            let d = 4;
            let k = 6;
            let c: Vec<f64> = (0..d).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
            let a: Vec<Vec<f64>> = (0..k)
                .map(|_| (0..d).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect())
                .collect();
            let mut a = a;
            a.push(vec![1.0; d]); // bounding box keeps the problem bounded
            let mut b: Vec<f64> = (0..k).map(|_| rng.random::<f64>() * 2.0 - 0.5).collect();
            b.push(10.0);
            let p = lp(c, a, b);
            let s1 = solve_lp(&p, 1e-9, 10_000);
            let s2 = solve_lp(&p, 1e-9, 10_000);
            assert_eq!(s1.status, s2.status);
            assert_eq!(s1.primal, s2.primal);
            assert_eq!(s1.iterations, s2.iterations);
        }
    }

    #[test]
    fn matches_vertex_enumeration_on_random_instances() {
        use crate::testing::{enumerate_lp_oracle, OracleOutcome};
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let mut optimal_seen = 0;
        for _ in 0..20 {
            let d = 1 + (rng.random::<u64>() % 5) as usize;
            let k = 1 + (rng.random::<u64>() % 7) as usize;
            let c: Vec<f64> = (0..d).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
            let mut a: Vec<Vec<f64>> = (0..k)
                .map(|_| (0..d).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect())
                .collect();
            let mut b: Vec<f64> = (0..k).map(|_| rng.random::<f64>() * 2.0 - 0.5).collect();
            a.push(vec![1.0; d]);
            b.push(10.0 * d as f64);
            let p = lp(c, a, b);
            let sol = solve_lp(&p, 1e-9, 10_000);
            match enumerate_lp_oracle(&p) {
                OracleOutcome::Optimal(obj) => {
                    assert_eq!(sol.status, LpStatus::Optimal);
                    assert!(
                        (sol.objective_value - obj).abs() <= 1e-8,
                        "simplex {} vs oracle {}",
                        sol.objective_value,
                        obj
                    );
                    optimal_seen += 1;
                }
                OracleOutcome::Infeasible => assert_eq!(sol.status, LpStatus::Infeasible),
            }
        }
        assert!(optimal_seen >= 10, "random instances were mostly degenerate");
    }
}
