//! Budget sweeps producing fairness/accuracy trade-off tables.
//!
//! Runs execute in parallel but rows come back in grid order:
//! formulation, then budget, then fold.

use std::fmt;
use std::str::FromStr;

use fairbound_core::fairness::{self, FairnessBudget};
use fairbound_core::solver::{self, SurrogateThresholds};
use fairbound_core::surrogate::phi_loss;
use fairbound_core::{Dataset, SolverConfig, TrainOutcome};
use rayon::prelude::*;

use crate::report::fmt_num;

/// Version of the sweep CSV layout. New columns are only ever appended.
pub const SCHEMA_VERSION: u32 = 1;

pub const COLUMNS: [&str; 23] = [
    "schema_version",
    "formulation",
    "budget",
    "fold",
    "status",
    "unattainable",
    "objective",
    "train_phi_loss",
    "train_accuracy",
    "train_rd_groups",
    "train_rd_weighted",
    "test_phi_loss",
    "test_accuracy",
    "test_rd_groups",
    "test_rd_weighted",
    "rd_minus",
    "rd_plus",
    "lower_bound",
    "upper_bound",
    "certified",
    "outer_iterations",
    "train_rows",
    "error",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Formulation {
    /// Unconstrained loss minimization.
    Plain,
    /// Surrogate risk difference bounded by raw thresholds.
    F1,
    /// Surrogate thresholds refined so the true risk difference is certified.
    F2,
    /// Decision-boundary covariance constraint.
    Covariance,
}

impl Formulation {
    pub fn name(self) -> &'static str {
        match self {
            Formulation::Plain => "plain",
            Formulation::F1 => "f1",
            Formulation::F2 => "f2",
            Formulation::Covariance => "covariance",
        }
    }
}

impl fmt::Display for Formulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Formulation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "plain" => Ok(Formulation::Plain),
            "f1" => Ok(Formulation::F1),
            "f2" => Ok(Formulation::F2),
            "covariance" | "cov" => Ok(Formulation::Covariance),
            _ => Err(format!("unknown formulation '{s}' (expected plain, f1, f2 or covariance)")),
        }
    }
}

/// Trains one model. `config.budget` drives F1 and F2; `cov_threshold`
/// drives the covariance baseline.
pub fn train(
    data: &Dataset,
    formulation: Formulation,
    config: &SolverConfig,
    cov_threshold: f64,
) -> fairbound_core::Result<TrainOutcome> {
    match formulation {
        Formulation::Plain => solver::train_unconstrained(data, config),
        Formulation::F1 => {
            let t = SurrogateThresholds { upper: Some(config.budget.c1), lower: Some(config.budget.c2) };
            solver::train_formulation1(data, config, t)
        }
        Formulation::F2 => solver::train_formulation2(data, config),
        Formulation::Covariance => solver::train_covariance_baseline(data, config, cov_threshold),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan {
    pub formulations: Vec<Formulation>,
    /// Symmetric budgets `c1 = c2` for F1 and F2.
    pub grid: Vec<f64>,
    /// Covariance thresholds; `grid` is used when empty.
    pub cov_grid: Vec<f64>,
    /// Number of cross-validation folds; 1 trains and tests on all rows.
    pub folds: usize,
    pub seed: u64,
    pub config: SolverConfig,
}

/// Fit and held-out statistics of one sweep run.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub formulation: Formulation,
    /// Budget value, `NaN` for the plain formulation.
    pub budget: f64,
    pub fold: usize,
    pub status: String,
    pub unattainable: Option<bool>,
    pub objective: f64,
    pub train: FitStats,
    pub test: FitStats,
    pub rd_minus: f64,
    pub rd_plus: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub certified: Option<bool>,
    pub outer_iterations: usize,
    pub train_rows: usize,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitStats {
    pub phi_loss: f64,
    pub accuracy: f64,
    pub rd_groups: f64,
    pub rd_weighted: f64,
}

impl FitStats {
    const MISSING: FitStats =
        FitStats { phi_loss: f64::NAN, accuracy: f64::NAN, rd_groups: f64::NAN, rd_weighted: f64::NAN };

    fn compute(out: &TrainOutcome, data: &Dataset, config: &SolverConfig) -> fairbound_core::Result<Self> {
        let (scores, preds) = out.model.predict(data)?;
        let correct = preds.iter().zip(data.labels()).filter(|(a, b)| a == b).count();
        let rd_weighted = match data.eta() {
            Some(eta) => fairness::risk_difference_weighted(&scores, eta, data.group_rate())?,
            None => f64::NAN,
        };
        Ok(FitStats {
            phi_loss: phi_loss(&scores, data.labels(), &config.phi)?,
            accuracy: correct as f64 / data.n_rows() as f64,
            rd_groups: fairness::risk_difference(&preds, data.sensitive())?,
            rd_weighted,
        })
    }
}

impl SweepRow {
    fn failed(formulation: Formulation, budget: f64, fold: usize, train_rows: usize, err: String) -> Self {
        SweepRow {
            formulation,
            budget,
            fold,
            status: "error".into(),
            unattainable: None,
            objective: f64::NAN,
            train: FitStats::MISSING,
            test: FitStats::MISSING,
            rd_minus: f64::NAN,
            rd_plus: f64::NAN,
            lower_bound: f64::NAN,
            upper_bound: f64::NAN,
            certified: None,
            outer_iterations: 0,
            train_rows,
            error: Some(err),
        }
    }

    pub fn csv_record(&self) -> Vec<String> {
        let opt = |b: Option<bool>| b.map_or(String::new(), |b| b.to_string());
        vec![
            SCHEMA_VERSION.to_string(),
            self.formulation.name().into(),
            fmt_num(self.budget),
            self.fold.to_string(),
            self.status.clone(),
            opt(self.unattainable),
            fmt_num(self.objective),
            fmt_num(self.train.phi_loss),
            fmt_num(self.train.accuracy),
            fmt_num(self.train.rd_groups),
            fmt_num(self.train.rd_weighted),
            fmt_num(self.test.phi_loss),
            fmt_num(self.test.accuracy),
            fmt_num(self.test.rd_groups),
            fmt_num(self.test.rd_weighted),
            fmt_num(self.rd_minus),
            fmt_num(self.rd_plus),
            fmt_num(self.lower_bound),
            fmt_num(self.upper_bound),
            opt(self.certified),
            self.outer_iterations.to_string(),
            self.train_rows.to_string(),
            self.error.clone().unwrap_or_default(),
        ]
    }
}

struct Job {
    formulation: Formulation,
    budget: f64,
    fold: usize,
}

fn run_job(job: &Job, train_set: &Dataset, test_set: &Dataset, base: &SolverConfig) -> SweepRow {
    let attempt = || -> fairbound_core::Result<SweepRow> {
        let mut config = *base;
        let mut cov = f64::INFINITY;
        match job.formulation {
            Formulation::Plain => {}
            Formulation::Covariance => cov = job.budget,
            Formulation::F1 | Formulation::F2 => {
                config.budget = FairnessBudget::with_notion(base.budget.notion, job.budget, job.budget)?;
            }
        }
        let out = train(train_set, job.formulation, &config, cov)?;
        let scores = out.model.scores(train_set)?;
        let bounds = match out.bounds {
            Some(b) => b,
            None => fairness::rd_bounds(&scores, train_set, &config.kappa, &config.delta)?,
        };
        let certified = match job.formulation {
            Formulation::F2 => Some(out.is_converged() && solver::certifies_budget(&out, train_set, &config)?),
            _ => None,
        };
        Ok(SweepRow {
            formulation: job.formulation,
            budget: job.budget,
            fold: job.fold,
            status: out.status.name().into(),
            unattainable: out.thresholds.map(|t| t.unattainable),
            objective: out.objective,
            train: FitStats::compute(&out, train_set, &config)?,
            test: FitStats::compute(&out, test_set, &config)?,
            rd_minus: bounds.rd_minus,
            rd_plus: bounds.rd_plus,
            lower_bound: bounds.lower_bound,
            upper_bound: bounds.upper_bound,
            certified,
            outer_iterations: out.outer_iterations,
            train_rows: train_set.n_rows(),
            error: None,
        })
    };
    attempt().unwrap_or_else(|e| SweepRow::failed(job.formulation, job.budget, job.fold, train_set.n_rows(), e.to_string()))
}

/// Runs every (formulation, budget, fold) combination. `data` must carry
/// eta estimates. Failures of single runs are recorded in their rows.
pub fn run_sweep(data: &Dataset, plan: &SweepPlan) -> crate::error::Result<Vec<SweepRow>> {
    if plan.grid.is_empty() && plan.formulations.iter().any(|f| *f != Formulation::Plain) {
        return Err(crate::error::Error::Schema("the budget grid is empty".into()));
    }
    data.require_eta()?;
    plan.config.validate()?;
    let folds: Vec<(Dataset, Dataset)> = if plan.folds <= 1 {
        vec![(data.clone(), data.clone())]
    } else {
        data.split(plan.folds, plan.seed)?.folds.into_iter().map(|f| (f.train, f.test)).collect()
    };
    let mut jobs = Vec::new();
    for &formulation in &plan.formulations {
        let budgets: Vec<f64> = match formulation {
            Formulation::Plain => vec![f64::NAN],
            Formulation::Covariance if !plan.cov_grid.is_empty() => plan.cov_grid.clone(),
            _ => plan.grid.clone(),
        };
        for budget in budgets {
            for fold in 0..folds.len() {
                jobs.push(Job { formulation, budget, fold });
            }
        }
    }
    let config = SolverConfig { seed: plan.seed, ..plan.config };
    Ok(jobs
        .par_iter()
        .map(|job| {
            let (train_set, test_set) = &folds[job.fold];
            run_job(job, train_set, test_set, &config)
        })
        .collect())
}

/// Serializes rows with a header line.
pub fn to_csv(rows: &[SweepRow]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(COLUMNS).expect("writing to memory");
    for r in rows {
        w.write_record(r.csv_record()).expect("writing to memory");
    }
    w.into_inner().expect("writing to memory")
}
