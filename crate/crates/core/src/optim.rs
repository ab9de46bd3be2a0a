//! Unconstrained minimization (L-BFGS with Armijo backtracking) and an
//! augmented Lagrangian wrapper for inequality constraints `g_j(x) <= 0`.
//!
//! The surrogate objectives involved are convex but not always smooth (the
//! hinge has kinks), so the inner solver also stops when progress stalls
//! rather than only on a small gradient.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{dot, norm};

/// A differentiable function of a parameter vector.
pub trait Objective {
    fn dim(&self) -> usize;
    /// Returns `f(x)` and writes the gradient into `grad`.
    fn eval(&self, x: &[f64], grad: &mut [f64]) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinimizeOptions {
    pub max_iters: usize,
    /// Stop once the gradient norm drops to this value.
    pub grad_tol: f64,
    /// Number of curvature pairs kept by L-BFGS.
    pub memory: usize,
    /// Consecutive iterations with negligible decrease before giving up.
    pub stall_iters: usize,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        MinimizeOptions { max_iters: 2_000, grad_tol: 1e-8, memory: 10, stall_iters: 5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MinimizeStatus {
    Converged,
    /// No measurable decrease; typical at a kink of a nonsmooth objective.
    Stalled,
    IterationLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub status: MinimizeStatus,
}

struct Pair {
    s: Vec<f64>,
    y: Vec<f64>,
    rho: f64,
}

fn two_loop(grad: &[f64], hist: &VecDeque<Pair>) -> Vec<f64> {
    let mut q = grad.to_vec();
    let mut alphas = vec![0.0; hist.len()];
    for (k, pair) in hist.iter().enumerate().rev() {
        let a = pair.rho * dot(&pair.s, &q);
        alphas[k] = a;
        for (qi, yi) in q.iter_mut().zip(&pair.y) {
            *qi -= a * yi;
        }
    }
    if let Some(last) = hist.back() {
        let gamma = dot(&last.s, &last.y) / dot(&last.y, &last.y);
        for qi in &mut q {
            *qi *= gamma;
        }
    }
    for (k, pair) in hist.iter().enumerate() {
        let b = pair.rho * dot(&pair.y, &q);
        for (qi, si) in q.iter_mut().zip(&pair.s) {
            *qi += (alphas[k] - b) * si;
        }
    }
    for qi in &mut q {
        *qi = -*qi;
    }
    q
}

/// Minimizes `obj` from `x0`.
///
/// Fails with [`Error::StepSizeFailure`] only when the objective is not
/// finite at the starting point.
pub fn minimize<O: Objective + ?Sized>(obj: &O, x0: Vec<f64>, opts: &MinimizeOptions) -> Result<Minimum> {
    let n = obj.dim();
    if x0.len() != n {
        return Err(Error::LengthMismatch { expected: n, found: x0.len() });
    }
    let mut x = x0;
    let mut g = vec![0.0; n];
    let mut f = obj.eval(&x, &mut g);
    if !f.is_finite() || g.iter().any(|v| !v.is_finite()) {
        return Err(Error::StepSizeFailure);
    }
    let mut hist: VecDeque<Pair> = VecDeque::with_capacity(opts.memory);
    let mut stalled = 0;
    let mut x_new = vec![0.0; n];
    let mut g_new = vec![0.0; n];

    for it in 0..opts.max_iters {
        let gnorm = norm(&g);
        if gnorm <= opts.grad_tol {
            return Ok(Minimum { x, value: f, grad_norm: gnorm, iterations: it, status: MinimizeStatus::Converged });
        }
        let mut d = two_loop(&g, &hist);
        let mut slope = dot(&d, &g);
        if !(slope < -1e-12 * norm(&d) * gnorm) {
            hist.clear();
            d = g.iter().map(|v| -v).collect();
            slope = -gnorm * gnorm;
        }
        let mut step = if hist.is_empty() { (1.0 / gnorm).min(1.0) } else { 1.0 };
        let mut f_new;
        loop {
            for i in 0..n {
                x_new[i] = x[i] + step * d[i];
            }
            f_new = obj.eval(&x_new, &mut g_new);
            if f_new.is_finite() && f_new <= f + 1e-4 * step * slope {
                break;
            }
            step *= 0.5;
            if step < 1e-20 {
                break;
            }
        }
        if !(f_new.is_finite() && f_new <= f + 1e-4 * step * slope) {
            if hist.is_empty() {
                return Ok(Minimum { x, value: f, grad_norm: gnorm, iterations: it, status: MinimizeStatus::Stalled });
            }
            // quasi-Newton model is stale; retry from steepest descent
            hist.clear();
            continue;
        }

        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * norm(&s) * norm(&y) && sy > 0.0 {
            if hist.len() == opts.memory.max(1) {
                hist.pop_front();
            }
            hist.push_back(Pair { s, y, rho: 1.0 / sy });
        }

        let decrease = f - f_new;
        if decrease <= 1e-15 * f.abs().max(1.0) {
            stalled += 1;
        } else {
            stalled = 0;
        }
        core::mem::swap(&mut x, &mut x_new);
        core::mem::swap(&mut g, &mut g_new);
        f = f_new;
        if stalled >= opts.stall_iters {
            let gnorm = norm(&g);
            return Ok(Minimum { x, value: f, grad_norm: gnorm, iterations: it + 1, status: MinimizeStatus::Stalled });
        }
    }
    let gnorm = norm(&g);
    let status = if gnorm <= opts.grad_tol { MinimizeStatus::Converged } else { MinimizeStatus::IterationLimit };
    Ok(Minimum { x, value: f, grad_norm: gnorm, iterations: opts.max_iters, status })
}

/// Objective plus inequality constraints `g_j(x) <= 0`.
pub trait ConstrainedProblem {
    fn dim(&self) -> usize;
    fn n_constraints(&self) -> usize;
    /// Objective value; writes its gradient into `grad`.
    fn objective(&self, x: &[f64], grad: &mut [f64]) -> f64;
    /// Writes the constraint values and, when `grads` is given, their
    /// gradients as a row-major `n_constraints x dim` matrix.
    fn constraints(&self, x: &[f64], values: &mut [f64], grads: Option<&mut [f64]>);
}

/// `f(x) + (1 / 2 rho) sum_j [max(0, lambda_j + rho g_j(x))^2 - lambda_j^2]`.
pub struct AugmentedObjective<'a, P: ?Sized> {
    pub problem: &'a P,
    pub multipliers: &'a [f64],
    pub penalty: f64,
}

impl<P: ConstrainedProblem + ?Sized> Objective for AugmentedObjective<'_, P> {
    fn dim(&self) -> usize {
        self.problem.dim()
    }

    fn eval(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        let n = self.problem.dim();
        let m = self.problem.n_constraints();
        let mut value = self.problem.objective(x, grad);
        if m == 0 {
            return value;
        }
        let mut gv = vec![0.0; m];
        let mut gj = vec![0.0; m * n];
        self.problem.constraints(x, &mut gv, Some(&mut gj));
        let rho = self.penalty;
        for j in 0..m {
            let lam = self.multipliers[j];
            let shifted = (lam + rho * gv[j]).max(0.0);
            value += (shifted * shifted - lam * lam) / (2.0 * rho);
            if shifted > 0.0 {
                for i in 0..n {
                    grad[i] += shifted * gj[j * n + i];
                }
            }
        }
        value
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AugmentedLagrangianOptions {
    pub max_outer: usize,
    pub inner: MinimizeOptions,
    /// Allowed constraint violation and complementary-slackness slack.
    pub feasibility_tol: f64,
    pub initial_penalty: f64,
    pub penalty_growth: f64,
    pub max_penalty: f64,
    /// Outer iterations at the maximal penalty without reducing the best
    /// violation before the problem is declared infeasible.
    pub infeasible_after: usize,
}

impl Default for AugmentedLagrangianOptions {
    fn default() -> Self {
        AugmentedLagrangianOptions {
            max_outer: 60,
            inner: MinimizeOptions::default(),
            feasibility_tol: 1e-4,
            initial_penalty: 10.0,
            penalty_growth: 10.0,
            max_penalty: 1e8,
            infeasible_after: 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlStatus {
    /// Feasible within tolerance with consistent multipliers.
    Converged,
    /// The violation stopped improving at the maximal penalty.
    Infeasible,
    IterationLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlResult {
    pub x: Vec<f64>,
    pub objective: f64,
    pub constraints: Vec<f64>,
    pub multipliers: Vec<f64>,
    pub penalty: f64,
    pub outer_iterations: usize,
    pub inner_iterations: usize,
    pub status: AlStatus,
    pub last_inner: MinimizeStatus,
}

impl AlResult {
    pub fn max_violation(&self) -> f64 {
        self.constraints.iter().fold(0.0_f64, |m, &g| m.max(g))
    }
}

/// Checks the approximate KKT sign conditions for a candidate point.
pub fn kkt_consistent(constraints: &[f64], multipliers: &[f64], tol: f64) -> bool {
    constraints
        .iter()
        .zip(multipliers)
        .all(|(&g, &lam)| g <= tol && lam >= 0.0 && (g.abs() <= tol || lam == 0.0))
}

/// Minimizes a constrained problem with the method of multipliers.
pub fn augmented_lagrangian<P: ConstrainedProblem + ?Sized>(
    problem: &P,
    x0: Vec<f64>,
    opts: &AugmentedLagrangianOptions,
) -> Result<AlResult> {
    if !(opts.feasibility_tol > 0.0 && opts.initial_penalty > 0.0 && opts.penalty_growth > 1.0) {
        return Err(Error::param("augmented_lagrangian", "tolerance, penalty and growth must be positive"));
    }
    let m = problem.n_constraints();
    let n = problem.dim();
    let mut lambda = vec![0.0; m];
    let mut rho = opts.initial_penalty;
    let mut x = x0;
    let mut gv = vec![0.0; m];
    let mut prev_violation = f64::INFINITY;
    let mut best: Option<(f64, Vec<f64>, Vec<f64>)> = None;
    let mut no_progress = 0;
    let mut inner_total = 0;

    let finish = |x: Vec<f64>, lambda: Vec<f64>, rho: f64, outer: usize, inner: usize, status, last| {
        let mut g = vec![0.0; m];
        problem.constraints(&x, &mut g, None);
        let mut scratch = vec![0.0; n];
        let objective = problem.objective(&x, &mut scratch);
        AlResult {
            x,
            objective,
            constraints: g,
            multipliers: lambda,
            penalty: rho,
            outer_iterations: outer,
            inner_iterations: inner,
            status,
            last_inner: last,
        }
    };

    let mut last_inner = MinimizeStatus::Converged;
    for outer in 1..=opts.max_outer {
        let aug = AugmentedObjective { problem, multipliers: &lambda, penalty: rho };
        let res = minimize(&aug, x, &opts.inner)?;
        inner_total += res.iterations;
        last_inner = res.status;
        x = res.x;
        problem.constraints(&x, &mut gv, None);
        let violation = gv.iter().fold(0.0_f64, |acc, &g| acc.max(g));
        for j in 0..m {
            lambda[j] = (lambda[j] + rho * gv[j]).max(0.0);
        }
        if m == 0 {
            return Ok(finish(x, lambda, rho, outer, inner_total, AlStatus::Converged, last_inner));
        }
        let inner_ok = res.status != MinimizeStatus::IterationLimit;
        if inner_ok && violation <= opts.feasibility_tol && kkt_consistent(&gv, &lambda, opts.feasibility_tol) {
            return Ok(finish(x, lambda, rho, outer, inner_total, AlStatus::Converged, last_inner));
        }

        let improved = match &best {
            Some((v, _, _)) => violation < v * (1.0 - 1e-3),
            None => true,
        };
        if improved {
            best = Some((violation, x.clone(), lambda.clone()));
            no_progress = 0;
        } else if rho >= opts.max_penalty {
            no_progress += 1;
        }
        if rho >= opts.max_penalty && no_progress >= opts.infeasible_after && violation > opts.feasibility_tol {
            let (_, bx, bl) = best.take().unwrap_or((violation, x.clone(), lambda.clone()));
            return Ok(finish(bx, bl, rho, outer, inner_total, AlStatus::Infeasible, last_inner));
        }
        if violation > 0.25 * prev_violation || violation > opts.feasibility_tol && outer == 1 {
            rho = (rho * opts.penalty_growth).min(opts.max_penalty);
        }
        prev_violation = violation;
    }
    Ok(finish(x, lambda, rho, opts.max_outer, inner_total, AlStatus::IterationLimit, last_inner))
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Quadratic {
        center: Vec<f64>,
        scales: Vec<f64>,
    }

    impl Objective for Quadratic {
        fn dim(&self) -> usize {
            self.center.len()
        }
        fn eval(&self, x: &[f64], grad: &mut [f64]) -> f64 {
            let mut v = 0.0;
            for i in 0..x.len() {
                let d = x[i] - self.center[i];
                v += 0.5 * self.scales[i] * d * d;
                grad[i] = self.scales[i] * d;
            }
            v
        }
    }

    struct Rosenbrock;

    impl Objective for Rosenbrock {
        fn dim(&self) -> usize {
            2
        }
        fn eval(&self, x: &[f64], grad: &mut [f64]) -> f64 {
            let (a, b) = (x[0], x[1]);
            grad[0] = -2.0 * (1.0 - a) - 400.0 * a * (b - a * a);
            grad[1] = 200.0 * (b - a * a);
            (1.0 - a) * (1.0 - a) + 100.0 * (b - a * a) * (b - a * a)
        }
    }

    #[test]
    fn lbfgs_solves_ill_conditioned_quadratic() {
        let q = Quadratic { center: vec![1.0, -2.0, 3.0], scales: vec![1.0, 100.0, 1e4] };
        let m = minimize(&q, vec![0.0; 3], &MinimizeOptions::default()).unwrap();
        assert_eq!(m.status, MinimizeStatus::Converged);
        for (a, b) in m.x.iter().zip(&q.center) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn lbfgs_solves_rosenbrock() {
        let m = minimize(&Rosenbrock, vec![-1.2, 1.0], &MinimizeOptions::default()).unwrap();
        assert!((m.x[0] - 1.0).abs() < 1e-6 && (m.x[1] - 1.0).abs() < 1e-6, "{:?}", m);
    }

    struct Abs;

    impl Objective for Abs {
        fn dim(&self) -> usize {
            1
        }
        fn eval(&self, x: &[f64], grad: &mut [f64]) -> f64 {
            grad[0] = if x[0] >= 0.0 { 1.0 } else { -1.0 };
            x[0].abs()
        }
    }

    #[test]
    fn nonsmooth_objective_stalls_near_kink() {
        let m = minimize(&Abs, vec![3.3], &MinimizeOptions::default()).unwrap();
        assert_ne!(m.status, MinimizeStatus::IterationLimit);
        assert!(m.x[0].abs() < 1e-6);
    }

    #[test]
    fn non_finite_start_is_an_error() {
        struct Bad;
        impl Objective for Bad {
            fn dim(&self) -> usize {
                1
            }
            fn eval(&self, _: &[f64], _: &mut [f64]) -> f64 {
                f64::NAN
            }
        }
        assert_eq!(minimize(&Bad, vec![0.0], &MinimizeOptions::default()).unwrap_err(), Error::StepSizeFailure);
    }

    /// min (x - 2)^2 + (y - 1)^2 subject to x + y <= 1 and a second constraint
    /// that is inactive at the optimum.
    struct Projection {
        inactive_bound: f64,
    }

    impl ConstrainedProblem for Projection {
        fn dim(&self) -> usize {
            2
        }
        fn n_constraints(&self) -> usize {
            2
        }
        fn objective(&self, x: &[f64], grad: &mut [f64]) -> f64 {
            grad[0] = 2.0 * (x[0] - 2.0);
            grad[1] = 2.0 * (x[1] - 1.0);
            (x[0] - 2.0).powi(2) + (x[1] - 1.0).powi(2)
        }
        fn constraints(&self, x: &[f64], values: &mut [f64], grads: Option<&mut [f64]>) {
            values[0] = x[0] + x[1] - 1.0;
            values[1] = -x[0] - self.inactive_bound;
            if let Some(g) = grads {
                g.copy_from_slice(&[1.0, 1.0, -1.0, 0.0]);
            }
        }
    }

    #[test]
    fn augmented_lagrangian_matches_projection() {
        let r = augmented_lagrangian(&Projection { inactive_bound: 5.0 }, vec![0.0, 0.0], &Default::default()).unwrap();
        assert_eq!(r.status, AlStatus::Converged);
        // projection of (2, 1) on x + y = 1 is (1, 0), multiplier 2
        assert!((r.x[0] - 1.0).abs() < 1e-3 && r.x[1].abs() < 1e-3, "{:?}", r.x);
        assert!((r.multipliers[0] - 2.0).abs() < 1e-2);
        assert_eq!(r.multipliers[1], 0.0);
        assert!(kkt_consistent(&r.constraints, &r.multipliers, 1e-4));
    }

    #[test]
    fn augmented_lagrangian_reports_infeasibility() {
        // x >= 5, y >= 0 and x + y <= 1 have no common point
        struct Infeasible;
        impl ConstrainedProblem for Infeasible {
            fn dim(&self) -> usize {
                2
            }
            fn n_constraints(&self) -> usize {
                3
            }
            fn objective(&self, x: &[f64], grad: &mut [f64]) -> f64 {
                grad[0] = 2.0 * x[0];
                grad[1] = 2.0 * x[1];
                x[0] * x[0] + x[1] * x[1]
            }
            fn constraints(&self, x: &[f64], values: &mut [f64], grads: Option<&mut [f64]>) {
                values[0] = x[0] + x[1] - 1.0;
                values[1] = 5.0 - x[0];
                values[2] = -x[1];
                if let Some(g) = grads {
                    g.copy_from_slice(&[1.0, 1.0, -1.0, 0.0, 0.0, -1.0]);
                }
            }
        }
        let r = augmented_lagrangian(&Infeasible, vec![0.0, 0.0], &Default::default()).unwrap();
        assert_eq!(r.status, AlStatus::Infeasible);
        assert!(r.max_violation() > 1.0);
    }
}
