//! Training of linear scoring functions `h(x) = w . x + b`: plain
//! surrogate-loss minimization, training under raw surrogate thresholds
//! (Formulation 1), training under thresholds refined through the
//! calibration transforms (Formulation 2), and a covariance-constrained
//! baseline. All constrained variants run the augmented Lagrangian from
//! [`crate::optim`].

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::fairness::{self, BoundsReport, FairnessBudget, Notion, RowWeights, Weighting};
use crate::math::{self, dot};
use crate::optim::{
    self, AlStatus, AugmentedLagrangianOptions, ConstrainedProblem, MinimizeOptions, MinimizeStatus, Objective,
};
use crate::surrogate::{PsiTransform, Side, Surrogate};

/// Linear scoring function with an explicit bias.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LinearModel {
    pub fn zeros(dim: usize) -> Self {
        LinearModel { weights: vec![0.0; dim], bias: 0.0 }
    }

    fn from_params(theta: &[f64]) -> Self {
        let (w, b) = theta.split_at(theta.len() - 1);
        LinearModel { weights: w.to_vec(), bias: b[0] }
    }

    fn params(&self) -> Vec<f64> {
        let mut v = self.weights.clone();
        v.push(self.bias);
        v
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn is_finite(&self) -> bool {
        self.bias.is_finite() && self.weights.iter().all(|w| w.is_finite())
    }

    pub fn score(&self, row: &[f64]) -> f64 {
        dot(&self.weights, row) + self.bias
    }

    pub fn scores(&self, data: &Dataset) -> Result<Vec<f64>> {
        if data.n_features() != self.dim() {
            return Err(Error::DimensionMismatch { model: self.dim(), data: data.n_features() });
        }
        Ok(data.rows().map(|r| self.score(r)).collect())
    }

    /// Scores and `sign(score)` labels, with `sign(0) = +1`.
    pub fn predict(&self, data: &Dataset) -> Result<(Vec<f64>, Vec<i8>)> {
        let scores = self.scores(data)?;
        let labels = scores.iter().map(|&h| fairness::sign(h)).collect();
        Ok((scores, labels))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Init {
    Zeros,
    /// Uniform weights in `[-0.1, 0.1]` drawn from the configured seed.
    SeededRandom,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Classification loss.
    pub phi: Surrogate,
    /// Convex surrogate for the upper constraint.
    pub kappa: Surrogate,
    /// Surrogate whose concave form drives the lower constraint.
    pub delta: Surrogate,
    pub budget: FairnessBudget,
    pub l2_penalty: f64,
    pub max_outer_iters: usize,
    pub max_inner_iters: usize,
    pub feasibility_tol: f64,
    pub objective_tol: f64,
    pub penalty_growth: f64,
    pub init: Init,
    pub seed: u64,
    /// Row weighting of Formulation 1 constraints.
    pub constraint_weighting: Weighting,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            phi: Surrogate::logistic(),
            kappa: Surrogate::hinge(),
            delta: Surrogate::hinge(),
            budget: FairnessBudget { notion: Notion::RiskDifference, c1: 0.05, c2: 0.05 },
            l2_penalty: 1e-4,
            max_outer_iters: 60,
            max_inner_iters: 2_000,
            feasibility_tol: 1e-6,
            objective_tol: 1e-8,
            penalty_growth: 10.0,
            init: Init::Zeros,
            seed: 0,
            constraint_weighting: Weighting::Indicator,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.feasibility_tol > 0.0 && self.objective_tol > 0.0) {
            return Err(Error::param("tolerance", "must be positive"));
        }
        if !(self.penalty_growth > 1.0) {
            return Err(Error::param("penalty_growth", "must exceed 1"));
        }
        if !(self.l2_penalty >= 0.0 && self.l2_penalty.is_finite()) {
            return Err(Error::param("l2_penalty", "must be finite and non-negative"));
        }
        if self.max_outer_iters == 0 || self.max_inner_iters == 0 {
            return Err(Error::param("iterations", "caps must be positive"));
        }
        Ok(())
    }

    fn inner_options(&self) -> MinimizeOptions {
        MinimizeOptions { max_iters: self.max_inner_iters, grad_tol: self.objective_tol, ..MinimizeOptions::default() }
    }

    fn al_options(&self) -> AugmentedLagrangianOptions {
        AugmentedLagrangianOptions {
            max_outer: self.max_outer_iters,
            inner: self.inner_options(),
            feasibility_tol: self.feasibility_tol,
            penalty_growth: self.penalty_growth,
            ..AugmentedLagrangianOptions::default()
        }
    }

    fn initial_model(&self, dim: usize) -> LinearModel {
        match self.init {
            Init::Zeros => LinearModel::zeros(dim),
            Init::SeededRandom => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                let weights = (0..dim).map(|_| rng.random_range(-0.1..=0.1)).collect();
                LinearModel { weights, bias: rng.random_range(-0.1..=0.1) }
            }
        }
    }
}

/// One inequality `g(theta) <= 0` on the scores of a linear model.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: &'static str,
    kind: ConstraintKind,
}

#[derive(Debug, Clone, PartialEq)]
enum ConstraintKind {
    /// `sign * sum_i [pos_i f(h_i) + neg_scale neg_i f(-h_i)] + constant`.
    Surrogate {
        weights: RowWeights,
        surrogate: Surrogate,
        side: Side,
        sign: f64,
        neg_scale: f64,
        constant: f64,
    },
    /// `sum_i coef_i h_i + constant`.
    Linear { coef: Vec<f64>, constant: f64 },
}

impl Constraint {
    /// Surrogate risk difference on `side` at most `bound`.
    pub fn surrogate_upper(name: &'static str, weights: RowWeights, surrogate: Surrogate, side: Side, bound: f64) -> Self {
        Constraint {
            name,
            kind: ConstraintKind::Surrogate { weights, surrogate, side, sign: 1.0, neg_scale: 1.0, constant: -1.0 - bound },
        }
    }

    /// Negated surrogate risk difference on `side` at most `bound`.
    pub fn surrogate_lower(name: &'static str, weights: RowWeights, surrogate: Surrogate, side: Side, bound: f64) -> Self {
        Constraint {
            name,
            kind: ConstraintKind::Surrogate { weights, surrogate, side, sign: -1.0, neg_scale: 1.0, constant: 1.0 - bound },
        }
    }

    /// Convex risk-ratio constraint, see [`fairness::rr_constraint_value`].
    pub fn risk_ratio(name: &'static str, weights: RowWeights, tau: f64, kappa: Surrogate) -> Self {
        Constraint {
            name,
            kind: ConstraintKind::Surrogate {
                weights,
                surrogate: kappa,
                side: Side::Convex,
                sign: 1.0,
                neg_scale: tau,
                constant: -tau,
            },
        }
    }

    pub fn linear(name: &'static str, coef: Vec<f64>, constant: f64) -> Self {
        Constraint { name, kind: ConstraintKind::Linear { coef, constant } }
    }

    /// Value at the given scores; when `grad` is given, writes the
    /// derivative with respect to each score.
    pub fn eval_scores(&self, scores: &[f64], grad: Option<&mut [f64]>) -> f64 {
        match &self.kind {
            ConstraintKind::Surrogate { weights, surrogate, side, sign, neg_scale, constant } => {
                let (pos, neg) = (weights.pos(), weights.neg());
                let mut total = 0.0;
                for (i, &h) in scores.iter().enumerate() {
                    total += pos[i] * surrogate.side_value(*side, h) + neg_scale * neg[i] * surrogate.side_value(*side, -h);
                }
                if let Some(g) = grad {
                    for (i, &h) in scores.iter().enumerate() {
                        g[i] = sign
                            * (pos[i] * surrogate.side_derivative(*side, h)
                                - neg_scale * neg[i] * surrogate.side_derivative(*side, -h));
                    }
                }
                sign * total + constant
            }
            ConstraintKind::Linear { coef, constant } => {
                if let Some(g) = grad {
                    g.copy_from_slice(coef);
                }
                dot(coef, scores) + constant
            }
        }
    }
}

/// Penalized surrogate loss of a linear model plus constraints on its scores.
pub struct LinearProblem<'a> {
    data: &'a Dataset,
    phi: Surrogate,
    l2: f64,
    constraints: Vec<Constraint>,
}

impl<'a> LinearProblem<'a> {
    pub fn new(data: &'a Dataset, phi: Surrogate, l2: f64) -> Self {
        LinearProblem { data, phi, l2, constraints: Vec::new() }
    }

    pub fn with_constraint(mut self, c: Constraint) -> Self {
        self.constraints.push(c);
        self
    }

    pub fn constraint_list(&self) -> &[Constraint] {
        &self.constraints
    }

    fn scores(&self, theta: &[f64]) -> Vec<f64> {
        let d = self.data.n_features();
        let (w, b) = theta.split_at(d);
        self.data.rows().map(|r| dot(w, r) + b[0]).collect()
    }

    /// Accumulates `sum_i c_i (x_i, 1)` into `out`.
    fn pull_back(&self, score_grad: &[f64], out: &mut [f64]) {
        let d = self.data.n_features();
        out.fill(0.0);
        for (row, &c) in self.data.rows().zip(score_grad) {
            if c != 0.0 {
                for j in 0..d {
                    out[j] += c * row[j];
                }
                out[d] += c;
            }
        }
    }
}

impl ConstrainedProblem for LinearProblem<'_> {
    fn dim(&self) -> usize {
        self.data.n_features() + 1
    }

    fn n_constraints(&self) -> usize {
        self.constraints.len()
    }

    fn objective(&self, theta: &[f64], grad: &mut [f64]) -> f64 {
        let n = self.data.n_rows() as f64;
        let scores = self.scores(theta);
        let labels = self.data.labels();
        let mut value = 0.0;
        let mut sg = vec![0.0; scores.len()];
        for (i, &h) in scores.iter().enumerate() {
            let y = f64::from(labels[i]);
            value += self.phi.loss(y * h);
            sg[i] = y * self.phi.loss_derivative(y * h) / n;
        }
        value /= n;
        self.pull_back(&sg, grad);
        let d = self.data.n_features();
        for j in 0..d {
            value += 0.5 * self.l2 * theta[j] * theta[j];
            grad[j] += self.l2 * theta[j];
        }
        value
    }

    fn constraints(&self, theta: &[f64], values: &mut [f64], grads: Option<&mut [f64]>) {
        let scores = self.scores(theta);
        match grads {
            None => {
                for (v, c) in values.iter_mut().zip(&self.constraints) {
                    *v = c.eval_scores(&scores, None);
                }
            }
            Some(grads) => {
                let dim = ConstrainedProblem::dim(self);
                let mut sg = vec![0.0; scores.len()];
                for (j, c) in self.constraints.iter().enumerate() {
                    values[j] = c.eval_scores(&scores, Some(&mut sg));
                    self.pull_back(&sg, &mut grads[j * dim..(j + 1) * dim]);
                }
            }
        }
    }
}

impl Objective for LinearProblem<'_> {
    fn dim(&self) -> usize {
        ConstrainedProblem::dim(self)
    }

    fn eval(&self, theta: &[f64], grad: &mut [f64]) -> f64 {
        self.objective(theta, grad)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrainStatus {
    /// Optimal within tolerance and, when constrained, feasible.
    Converged,
    /// The constraints could not be met; the model is the least-violating iterate.
    Infeasible,
    IterationLimit,
}

impl TrainStatus {
    pub fn name(self) -> &'static str {
        match self {
            TrainStatus::Converged => "converged",
            TrainStatus::Infeasible => "infeasible",
            TrainStatus::IterationLimit => "iteration-limit",
        }
    }
}

/// Final value and multiplier of one constraint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstraintReport {
    pub name: &'static str,
    /// `g(theta)`; non-positive when satisfied.
    pub value: f64,
    pub multiplier: f64,
}

/// Surrogate-scale thresholds derived from a true risk-difference budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefinedThresholds {
    /// `psi_kappa(c1 - RD-) + RD-_kappa`; `None` when `c1 >= RD+` makes the
    /// upper side hold for every classifier.
    pub upper: Option<f64>,
    /// `psi_delta(c2 + RD+) - RD+_delta`; `None` when `-c2 <= RD-`.
    pub lower: Option<f64>,
    /// A transform argument fell outside its domain and was clamped.
    pub psi_clamped: bool,
    /// No scoring function can meet both refined thresholds.
    pub unattainable: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub model: LinearModel,
    pub status: TrainStatus,
    /// Penalized objective.
    pub objective: f64,
    /// Unpenalized empirical phi-loss.
    pub loss: f64,
    pub constraints: Vec<ConstraintReport>,
    pub outer_iterations: usize,
    pub inner_iterations: usize,
    pub penalty: f64,
    pub thresholds: Option<RefinedThresholds>,
    pub bounds: Option<BoundsReport>,
}

impl TrainOutcome {
    pub fn is_converged(&self) -> bool {
        self.status == TrainStatus::Converged
    }

    /// Approximate KKT sign conditions at the returned iterate.
    pub fn kkt_holds(&self, tol: f64) -> bool {
        let g: Vec<f64> = self.constraints.iter().map(|c| c.value).collect();
        let l: Vec<f64> = self.constraints.iter().map(|c| c.multiplier).collect();
        optim::kkt_consistent(&g, &l, tol)
    }
}

fn run(problem: &LinearProblem<'_>, config: &SolverConfig) -> Result<TrainOutcome> {
    config.validate()?;
    let x0 = config.initial_model(problem.data.n_features()).params();
    let (x, status, objective, constraints, outer, inner, penalty) = if problem.constraints.is_empty() {
        let m = optim::minimize(problem, x0, &config.inner_options())?;
        let status = match m.status {
            MinimizeStatus::IterationLimit => TrainStatus::IterationLimit,
            _ => TrainStatus::Converged,
        };
        (m.x, status, m.value, Vec::new(), 0, m.iterations, 0.0)
    } else {
        let r = optim::augmented_lagrangian(problem, x0, &config.al_options())?;
        let status = match r.status {
            AlStatus::Converged => TrainStatus::Converged,
            AlStatus::Infeasible => TrainStatus::Infeasible,
            AlStatus::IterationLimit => TrainStatus::IterationLimit,
        };
        let reports = problem
            .constraints
            .iter()
            .zip(r.constraints.iter().zip(&r.multipliers))
            .map(|(c, (&value, &multiplier))| ConstraintReport { name: c.name, value, multiplier })
            .collect();
        (r.x, status, r.objective, reports, r.outer_iterations, r.inner_iterations, r.penalty)
    };
    let model = LinearModel::from_params(&x);
    if !model.is_finite() {
        return Err(Error::StepSizeFailure);
    }
    let scores = model.scores(problem.data)?;
    let loss = crate::surrogate::phi_loss(&scores, problem.data.labels(), &problem.phi)?;
    Ok(TrainOutcome {
        model,
        status,
        objective,
        loss,
        constraints,
        outer_iterations: outer,
        inner_iterations: inner,
        penalty,
        thresholds: None,
        bounds: None,
    })
}

/// Minimizes the penalized phi-loss.
pub fn train_unconstrained(data: &Dataset, config: &SolverConfig) -> Result<TrainOutcome> {
    run(&LinearProblem::new(data, config.phi, config.l2_penalty), config)
}

/// Surrogate-scale thresholds for Formulation 1; `None` leaves a side free.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurrogateThresholds {
    /// Bound on `RD_kappa(h)`.
    pub upper: Option<f64>,
    /// Bound on `-RD_delta(h)`.
    pub lower: Option<f64>,
}

/// Constraints for the configured notion with the given surrogate thresholds.
pub fn formulation1_constraints(
    data: &Dataset,
    config: &SolverConfig,
    thresholds: SurrogateThresholds,
    weighting: Weighting,
) -> Result<Vec<Constraint>> {
    let mut out = Vec::new();
    let mut push_pair = |w: RowWeights, upper: &'static str, lower: &'static str| {
        if let Some(b) = thresholds.upper {
            out.push(Constraint::surrogate_upper(upper, w.clone(), config.kappa, Side::Convex, b));
        }
        if let Some(b) = thresholds.lower {
            out.push(Constraint::surrogate_lower(lower, w, config.delta, Side::Concave, b));
        }
    };
    match config.budget.notion {
        Notion::RiskDifference => push_pair(RowWeights::for_dataset(data, weighting)?, "rd_kappa_upper", "rd_delta_lower"),
        Notion::EqualOpportunity => push_pair(
            RowWeights::conditional_on_label(data, 1, weighting)?,
            "eop_kappa_upper",
            "eop_delta_lower",
        ),
        Notion::EqualizedOdds => {
            push_pair(RowWeights::conditional_on_label(data, 1, weighting)?, "eo_pos_kappa_upper", "eo_pos_delta_lower");
            push_pair(RowWeights::conditional_on_label(data, -1, weighting)?, "eo_neg_kappa_upper", "eo_neg_delta_lower");
        }
        Notion::RiskRatio => {
            let w = RowWeights::for_dataset(data, weighting)?;
            let tau = config.budget.c1;
            out.push(Constraint::risk_ratio("rr_upper", w.clone(), tau, config.kappa));
            out.push(Constraint::risk_ratio("rr_mirrored", w.swapped(), tau, config.kappa));
        }
    }
    Ok(out)
}

/// Minimizes the phi-loss subject to `RD_kappa(h) <= upper` and
/// `-RD_delta(h) <= lower`, with rows weighted per
/// [`SolverConfig::constraint_weighting`].
pub fn train_formulation1(data: &Dataset, config: &SolverConfig, thresholds: SurrogateThresholds) -> Result<TrainOutcome> {
    let mut problem = LinearProblem::new(data, config.phi, config.l2_penalty);
    for c in formulation1_constraints(data, config, thresholds, config.constraint_weighting)? {
        problem = problem.with_constraint(c);
    }
    run(&problem, config)
}

/// Refined thresholds for a true risk-difference budget `[-c2, c1]`.
pub fn refined_thresholds(data: &Dataset, config: &SolverConfig) -> Result<RefinedThresholds> {
    let FairnessBudget { c1, c2, notion } = config.budget;
    if notion != Notion::RiskDifference {
        return Err(Error::param("notion", "refined thresholds are defined for the risk difference"));
    }
    let eta = data.require_eta()?;
    let p = data.group_rate();
    let ex = fairness::extreme_classifiers(eta, p)?;
    let sx = fairness::surrogate_extremes(eta, p, &config.kappa, &config.delta)?;
    let psi_k = PsiTransform::new(config.kappa, p, Side::Convex)?;
    let psi_d = PsiTransform::new(config.delta, p, Side::Concave)?;

    let mut clamped = false;
    let mut unattainable = c1 < ex.rd_minus || -c2 > ex.rd_plus;
    let (upper, psi_up) = if c1 >= ex.rd_plus {
        (None, f64::INFINITY)
    } else {
        let v = psi_k.eval(c1 - ex.rd_minus);
        clamped |= v.clamped;
        (Some(v.value + sx.rd_kappa_min), v.value)
    };
    let (lower, psi_lo) = if -c2 <= ex.rd_minus {
        (None, f64::INFINITY)
    } else {
        let v = psi_d.eval(c2 + ex.rd_plus);
        clamped |= v.clamped;
        (Some(v.value - sx.rd_delta_max), v.value)
    };

    if upper.is_some() && lower.is_some() {
        // RD_kappa(h) - RD_delta(h) is bounded below pointwise by
        // (pos + neg) min_alpha [kappa(alpha) - delta(alpha)]
        let floor = math::golden_section(
            |a| config.kappa.kappa(a) - config.delta.delta(a),
            -crate::surrogate::NUMERIC_BRACKET,
            crate::surrogate::NUMERIC_BRACKET,
            1e-10,
        )
        .value;
        let w = RowWeights::from_eta(eta, p)?;
        let mass: f64 = w.pos().iter().chain(w.neg()).sum();
        let needed = mass * floor - sx.rd_kappa_min + sx.rd_delta_max;
        unattainable |= needed > psi_up + psi_lo + 1e-12;
    }
    Ok(RefinedThresholds { upper, lower, psi_clamped: clamped, unattainable })
}

/// Trains under the refined thresholds so that the eta-weighted true risk
/// difference is certified to lie in `[-c2, c1]`. Constraints use eta
/// weighting, which is the measure the certificate refers to.
pub fn train_formulation2(data: &Dataset, config: &SolverConfig) -> Result<TrainOutcome> {
    let thresholds = refined_thresholds(data, config)?;
    let mut problem = LinearProblem::new(data, config.phi, config.l2_penalty);
    let st = SurrogateThresholds { upper: thresholds.upper, lower: thresholds.lower };
    for c in formulation1_constraints(data, config, st, Weighting::Estimated)? {
        problem = problem.with_constraint(c);
    }
    let mut out = run(&problem, config)?;
    let scores = out.model.scores(data)?;
    out.bounds = Some(fairness::rd_bounds(&scores, data, &config.kappa, &config.delta)?);
    out.thresholds = Some(thresholds);
    Ok(out)
}

/// Whether a Formulation 2 outcome certifies its budget, allowing the
/// constraint violation `feasibility_tol` to propagate through the inverse
/// transforms.
pub fn certifies_budget(out: &TrainOutcome, data: &Dataset, config: &SolverConfig) -> Result<bool> {
    let (Some(b), Some(t)) = (out.bounds, out.thresholds) else {
        return Ok(false);
    };
    let p = data.group_rate();
    let tol = config.feasibility_tol;
    let psi_k = PsiTransform::new(config.kappa, p, Side::Convex)?;
    let psi_d = PsiTransform::new(config.delta, p, Side::Concave)?;
    let upper_ok = match t.upper {
        None => true,
        Some(bound) => {
            let allowed = psi_k.inverse(bound - b.rd_kappa_min + tol).mu;
            b.upper_bound <= b.rd_minus + allowed + 1e-12
        }
    };
    let lower_ok = match t.lower {
        None => true,
        Some(bound) => {
            let allowed = psi_d.inverse(b.rd_delta_max + bound + tol).mu;
            b.lower_bound >= b.rd_plus - allowed - 1e-12
        }
    };
    Ok(upper_ok && lower_ok)
}

/// Decision-boundary covariance `(1/N) sum (s_i - p) h(x_i)` with `s_i` the
/// reference-group indicator.
pub fn boundary_covariance(scores: &[f64], data: &Dataset) -> f64 {
    let p = data.group_rate();
    let n = data.n_rows() as f64;
    scores.iter().zip(data.sensitive()).map(|(h, g)| (g.indicator() - p) * h).sum::<f64>() / n
}

/// Minimizes the phi-loss subject to `|cov(s, h)| <= threshold`.
pub fn train_covariance_baseline(data: &Dataset, config: &SolverConfig, threshold: f64) -> Result<TrainOutcome> {
    if !(threshold >= 0.0) {
        return Err(Error::param("cov_threshold", "must be non-negative"));
    }
    let mut problem = LinearProblem::new(data, config.phi, config.l2_penalty);
    if threshold.is_finite() {
        let p = data.group_rate();
        let n = data.n_rows() as f64;
        let coef: Vec<f64> = data.sensitive().iter().map(|g| (g.indicator() - p) / n).collect();
        let neg: Vec<f64> = coef.iter().map(|c| -c).collect();
        problem = problem
            .with_constraint(Constraint::linear("cov_upper", coef, -threshold))
            .with_constraint(Constraint::linear("cov_lower", neg, -threshold));
    }
    run(&problem, config)
}
