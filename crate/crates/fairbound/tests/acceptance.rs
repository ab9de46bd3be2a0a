//! Acceptance suite. Each criterion prints one `PASS` or `FAIL` line with
//! the measured quantities; the process exits non-zero when any fails.
//!
//! Oracles are computed here from counts and direct minimization rather
//! than through the library routines under test.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use fairbound::adult::{load_adult, AdultOptions};
use fairbound::store;
use fairbound_core::fairness::{self, FairnessBudget, RowWeights};
use fairbound_core::optim::{AugmentedObjective, Objective};
use fairbound_core::solver::{self, Constraint, LinearProblem, SurrogateThresholds};
use fairbound_core::surrogate::{PsiTransform, Side};
use fairbound_core::synthetic::{self, BiasedFamily};
use fairbound_core::{Dataset, EtaEstimator, Group, Init, SolverConfig, Surrogate, TrainOutcome, TrainStatus};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Surrogate name, surrogate and its tabulated gap as a function of `(p, mu)`.
type TableForm = (&'static str, Surrogate, fn(f64, f64) -> f64);

/// Criterion name, time limit and body.
type Criterion<'a> = (&'static str, Duration, Box<dyn Fn() -> Verdict + 'a>);

struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Verdict { pass, detail: detail.into() }
    }
}

fn exact_eta(d: &Dataset) -> Dataset {
    d.estimate_eta(&EtaEstimator::group_frequency(0.0).with_clip(0.0)).unwrap()
}

fn weighted_rd(out: &TrainOutcome, d: &Dataset) -> f64 {
    let scores = out.model.scores(d).unwrap();
    fairness::risk_difference_weighted(&scores, d.eta().unwrap(), d.group_rate()).unwrap()
}

/// Positive-rate gap from raw counts.
fn count_rd(preds: &[i8], groups: &[Group]) -> f64 {
    let (mut rp, mut rn, mut qp, mut qn) = (0usize, 0usize, 0usize, 0usize);
    for (&y, g) in preds.iter().zip(groups) {
        match (g, y == 1) {
            (Group::Reference, true) => rp += 1,
            (Group::Reference, false) => rn += 1,
            (Group::Protected, true) => qp += 1,
            (Group::Protected, false) => qn += 1,
        }
    }
    rp as f64 / (rp + rn) as f64 - qp as f64 / (qp + qn) as f64
}

fn criterion_1() -> Verdict {
    let d = synthetic::students();
    let high: Vec<bool> = d.rows().map(|r| r[0] == 1.0).collect();
    let mut rds = Vec::new();
    for (accept_high, accept_low) in [(true, true), (true, false), (false, true), (false, false)] {
        let preds: Vec<i8> =
            high.iter().map(|&h| if (h && accept_high) || (!h && accept_low) { 1 } else { -1 }).collect();
        rds.push(fairness::risk_difference(&preds, d.sensitive()).unwrap());
    }
    let expected = [0.0, 0.03, -0.03, 0.0];
    let rd_ok = rds.iter().zip(expected).all(|(a, b)| (a - b).abs() <= 1e-12);
    let d = exact_eta(&d);
    let pass5 = fairness::constraint_free_check(&d, &FairnessBudget::symmetric(0.05).unwrap()).unwrap().pass;
    let pass1 = fairness::constraint_free_check(&d, &FairnessBudget::symmetric(0.01).unwrap()).unwrap().pass;
    Verdict::new(
        rd_ok && pass5 && !pass1,
        format!("RDs {rds:?}; check at 0.05 {}, at 0.01 {}", verdict(pass5), verdict(pass1)),
    )
}

fn criterion_2() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut violations = 0usize;
    let mut unattained = 0usize;
    let mut classifiers = 0u64;
    for _ in 0..200 {
        let n = rng.random_range(20..=400);
        let cells = rng.random_range(1..=16);
        let d = exact_eta(&synthetic::random_discrete(&mut rng, n, cells));
        let ex = fairness::extreme_classifiers(d.eta().unwrap(), d.group_rate()).unwrap();

        let mut keys: Vec<Vec<u64>> = d.rows().map(|r| r.iter().map(|v| v.to_bits()).collect()).collect();
        let all = keys.clone();
        keys.sort();
        keys.dedup();
        let cell_of: Vec<usize> = all.iter().map(|k| keys.binary_search(k).unwrap()).collect();
        let (n_ref, n_prot) = d.group_counts();
        // RD is linear in the per-cell decisions: each accepted cell adds
        // its share of s+ minus its share of s-
        let mut gain = vec![0.0; keys.len()];
        for (c, g) in cell_of.iter().zip(d.sensitive()) {
            gain[*c] += if g.is_reference() { 1.0 / n_ref as f64 } else { -1.0 / n_prot as f64 };
        }
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for mask in 0u32..(1 << keys.len()) {
            let rd: f64 = (0..keys.len()).filter(|c| mask >> c & 1 == 1).map(|c| gain[c]).sum();
            if rd < ex.rd_minus - 1e-12 || rd > ex.rd_plus + 1e-12 {
                violations += 1;
            }
            lo = lo.min(rd);
            hi = hi.max(rd);
            classifiers += 1;
        }
        let at_max = count_rd(&ex.f_max, d.sensitive());
        let at_min = count_rd(&ex.f_min, d.sensitive());
        if (hi - ex.rd_plus).abs() > 1e-12
            || (lo - ex.rd_minus).abs() > 1e-12
            || (at_max - ex.rd_plus).abs() > 1e-12
            || (at_min - ex.rd_minus).abs() > 1e-12
        {
            unattained += 1;
        }
    }
    Verdict::new(
        violations == 0 && unattained == 0,
        format!("{classifiers} classifiers on 200 datasets, {violations} violations, {unattained} extremes not attained"),
    )
}

/// Minimum of a unimodal function by golden-section search.
fn oracle_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2);
        }
    }
    f(lo).min(f(hi)).min(f1).min(f2)
}

/// `H°κ - H⁻κ` (or its concave counterpart) at `eta = p + p (1 - p) mu`,
/// from direct minimization of the conditional risk difference.
fn numeric_gap(s: &Surrogate, concave: bool, p: f64, mu: f64) -> f64 {
    // at mu = 1/p rounding can push eta just past 1
    let eta = (p + p * (1.0 - p) * mu).min(1.0);
    let (a, b) = (eta / p, (1.0 - eta) / (1.0 - p));
    if concave {
        let c = |x: f64| a * s.delta(x) + b * s.delta(-x) - 1.0;
        let h_plus = -oracle_min(|x| -c(x), -40.0, 40.0);
        // eta > p, so the disagreeing half-line is alpha <= 0
        let h_circ = -oracle_min(|x| -c(x), -40.0, 0.0);
        h_plus - h_circ
    } else {
        let c = |x: f64| a * s.kappa(x) + b * s.kappa(-x) - 1.0;
        oracle_min(c, 0.0, 40.0) - oracle_min(c, -40.0, 40.0)
    }
}

fn criterion_3() -> Verdict {
    let forms: [TableForm; 3] = [
        ("hinge", Surrogate::hinge(), |_, mu| mu),
        ("square", Surrogate::square(), |_, mu| mu * mu),
        ("exponential", Surrogate::exponential(), |p, mu| {
            ((1.0 + (1.0 - p) * mu).sqrt() - (1.0 - p * mu).sqrt()).powi(2)
        }),
    ];
    let mut parts = Vec::new();
    let mut pass = true;
    for (name, s, table) in forms {
        let mut worst: f64 = 0.0;
        let mut worst_inverse: f64 = 0.0;
        for p in [0.2, 0.5, 0.8] {
            for i in 1..=100 {
                let mu = i as f64 / 100.0 / p;
                for concave in [false, true] {
                    worst = worst.max((numeric_gap(&s, concave, p, mu) - table(p, mu)).abs());
                }
                for side in [Side::Convex, Side::Concave] {
                    let psi = PsiTransform::new(s, p, side).unwrap();
                    let v = psi.eval(mu.min(psi.mu_max())).value;
                    worst_inverse = worst_inverse.max((psi.eval(psi.inverse(v).mu).value - v).abs());
                }
            }
        }
        let ok = worst <= 1e-6 && worst_inverse <= 1e-8;
        pass &= ok;
        parts.push(format!("{name} {} (max gap error {worst:.2e}, inverse {worst_inverse:.2e})", verdict(ok)));
    }
    Verdict::new(pass, parts.join("; "))
}

fn criterion_4() -> Verdict {
    let pairs = [Surrogate::hinge(), Surrogate::square(), Surrogate::exponential()];
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut checks = 0usize;
    let mut violations = 0usize;
    let mut worst = f64::NEG_INFINITY;
    for k in 0..20 {
        let cfg = BiasedFamily { n: 400, beta: 0.1 + 0.05 * k as f64, p: 0.3 + 0.02 * k as f64, seed: 100 + k as u64 };
        let d = synthetic::biased_family(&cfg).unwrap().estimate_eta(&EtaEstimator::model(1e-3)).unwrap();
        let (eta, p) = (d.eta().unwrap(), d.group_rate());
        for _ in 0..1000 {
            let w: Vec<f64> = (0..d.n_features()).map(|_| rng.random_range(-3.0..3.0)).collect();
            let b = rng.random_range(-2.0..2.0);
            let h: Vec<f64> = d.rows().map(|r| r.iter().zip(&w).map(|(x, c)| x * c).sum::<f64>() + b).collect();
            let rd = fairness::risk_difference_weighted(&h, eta, p).unwrap();
            for s in &pairs {
                let bounds = fairness::rd_bounds(&h, &d, s, s).unwrap();
                let excess = (bounds.lower_bound - rd).max(rd - bounds.upper_bound);
                worst = worst.max(excess);
                if excess > 1e-9 {
                    violations += 1;
                }
                checks += 1;
            }
        }
    }
    Verdict::new(violations == 0, format!("{checks} checks, {violations} violations, worst excess {worst:.3e}"))
}

/// The headline family: one feature shifted by group membership.
fn headline_family() -> Dataset {
    synthetic::biased_family(&BiasedFamily { n: 2000, beta: 0.12, ..Default::default() })
        .unwrap()
        .estimate_eta(&EtaEstimator::model(1e-3))
        .unwrap()
}

const BUDGETS: [f64; 4] = [0.2, 0.1, 0.05, 0.02];

fn f2_run(d: &Dataset, c1: f64, c2: f64) -> TrainOutcome {
    let cfg = SolverConfig { budget: FairnessBudget::asymmetric(c1, c2).unwrap(), ..Default::default() };
    solver::train_formulation2(d, &cfg).unwrap()
}

fn criterion_5(d: &Dataset) -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    let mut last_loss = f64::NEG_INFINITY;
    for c in BUDGETS {
        let out = f2_run(d, c, c);
        let rd = weighted_rd(&out, d);
        let ok = out.status == TrainStatus::Converged && rd.abs() <= c + 1e-4 && out.loss >= last_loss - 1e-6;
        pass &= ok;
        last_loss = out.loss;
        let unattainable = out.thresholds.is_some_and(|t| t.unattainable);
        parts.push(format!(
            "c={c}: {} |RD|={:.4} loss={:.4}{}",
            out.status.name(),
            rd.abs(),
            out.loss,
            if unattainable { " (unattainable)" } else { "" }
        ));
    }
    let ex = fairness::extreme_classifiers(d.eta().unwrap(), d.group_rate()).unwrap();
    parts.push(format!("RD+={:.4}", ex.rd_plus));
    Verdict::new(pass, parts.join("; "))
}

/// Lowest baseline loss among runs at least as fair as `rd`.
fn baseline_loss_at(baseline: &[(f64, f64)], rd: f64) -> Option<f64> {
    baseline.iter().filter(|(r, _)| *r <= rd + 1e-9).map(|(_, l)| *l).min_by(f64::total_cmp)
}

fn covariance_curve(d: &Dataset) -> Vec<(f64, f64)> {
    let cfg = SolverConfig::default();
    let free = solver::train_covariance_baseline(d, &cfg, f64::INFINITY).unwrap();
    let cov0 = solver::boundary_covariance(&free.model.scores(d).unwrap(), d).abs();
    let mut curve = vec![(weighted_rd(&free, d).abs(), free.loss)];
    for i in 0..=40 {
        let t = cov0 * (1.0 - i as f64 / 40.0);
        let out = solver::train_covariance_baseline(d, &cfg, t).unwrap();
        if out.status == TrainStatus::Converged {
            curve.push((weighted_rd(&out, d).abs(), out.loss));
        }
    }
    curve
}

fn criterion_6(d: &Dataset) -> Verdict {
    let baseline = covariance_curve(d);
    let mut compared = 0;
    let mut pass = true;
    let mut parts = Vec::new();
    for c in BUDGETS {
        let out = f2_run(d, c, c);
        if out.status != TrainStatus::Converged {
            continue;
        }
        let rd = weighted_rd(&out, d).abs();
        if let Some(b) = baseline_loss_at(&baseline, rd) {
            compared += 1;
            let ok = out.loss <= b + 1e-3;
            pass &= ok;
            let constrained = out.thresholds.is_some_and(|t| t.upper.is_some() || t.lower.is_some());
            parts.push(format!(
                "c={c}: f2 loss {:.4} vs baseline {b:.4} at |RD| {rd:.4}{}",
                out.loss,
                if constrained { "" } else { " (no active constraint)" }
            ));
        }
    }
    // one-sided budgets keep the problem feasible below the unconstrained RD
    let mut diag = Vec::new();
    for c1 in [0.08, 0.06, 0.04] {
        let out = f2_run(d, c1, 2.0);
        let rd = weighted_rd(&out, d).abs();
        let b = baseline_loss_at(&baseline, rd).map_or("n/a".to_string(), |b| format!("{b:.4}"));
        diag.push(format!("c1={c1}: {} |RD| {rd:.4} loss {:.4} vs baseline {b}", out.status.name(), out.loss));
    }
    parts.push(format!("{compared} comparable points"));
    parts.push(format!("one-sided diagnostic [{}]", diag.join(", ")));
    Verdict::new(pass && compared > 0, parts.join("; "))
}

/// Gaussian naive Bayes on the encoded features, standing in for a
/// classifier trained outside this library.
struct NaiveBayes {
    prior: [f64; 2],
    mean: [Vec<f64>; 2],
    var: [Vec<f64>; 2],
}

impl NaiveBayes {
    fn fit(d: &Dataset) -> Self {
        let m = d.n_features();
        let mut count = [0.0; 2];
        let mut mean = [vec![0.0; m], vec![0.0; m]];
        let mut sq = [vec![0.0; m], vec![0.0; m]];
        for (row, &y) in d.rows().zip(d.labels()) {
            let c = usize::from(y == 1);
            count[c] += 1.0;
            for j in 0..m {
                mean[c][j] += row[j];
                sq[c][j] += row[j] * row[j];
            }
        }
        let mut var = [vec![0.0; m], vec![0.0; m]];
        for c in 0..2 {
            for j in 0..m {
                mean[c][j] /= count[c];
                var[c][j] = (sq[c][j] / count[c] - mean[c][j] * mean[c][j]).max(0.0) + 1e-3;
            }
        }
        let n = count[0] + count[1];
        NaiveBayes { prior: [count[0] / n, count[1] / n], mean, var }
    }

    fn predict(&self, d: &Dataset) -> Vec<i8> {
        d.rows()
            .map(|row| {
                let ll = |c: usize| {
                    self.prior[c].ln()
                        - row
                            .iter()
                            .enumerate()
                            .map(|(j, x)| {
                                let v = self.var[c][j];
                                0.5 * (v.ln() + (x - self.mean[c][j]).powi(2) / v)
                            })
                            .sum::<f64>()
                };
                if ll(1) > ll(0) {
                    1
                } else {
                    -1
                }
            })
            .collect()
    }
}

fn criterion_7() -> Verdict {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/adult");
    let files = [root.join("adult.data"), root.join("adult.test")];
    let loaded = match load_adult(&files, &AdultOptions::default()) {
        Ok(l) => l,
        Err(e) => return Verdict::new(false, format!("cannot load Adult: {e}")),
    };
    let data = loaded.dataset.estimate_eta(&EtaEstimator::model(1e-4)).unwrap();
    // ingest round trip
    let dir = tempfile::tempdir().unwrap();
    store::write_ingested(dir.path(), &data, &loaded.encoding, "adult", loaded.skipped_rows, "model").unwrap();
    let data = store::read_ingested(dir.path()).unwrap().dataset;

    let cfg = SolverConfig::default();
    let plan = data.split(5, 1).unwrap();
    let (mut inside, mut total) = (0, 0);
    let mut rds = Vec::new();
    for fold in &plan.folds {
        let out = solver::train_unconstrained(&fold.train, &cfg).unwrap();
        let test = &fold.test;
        let ex = fairness::extreme_classifiers(test.eta().unwrap(), test.group_rate()).unwrap();
        let lr = weighted_rd(&out, test);
        let nb_preds = NaiveBayes::fit(&fold.train).predict(test);
        let nb_scores: Vec<f64> = nb_preds.iter().map(|&y| f64::from(y)).collect();
        let nb = fairness::risk_difference_weighted(&nb_scores, test.eta().unwrap(), test.group_rate()).unwrap();
        for rd in [lr, nb] {
            total += 1;
            if rd >= ex.rd_minus - 1e-12 && rd <= ex.rd_plus + 1e-12 {
                inside += 1;
            }
        }
        rds.push(format!("{lr:.3}/{nb:.3}"));
    }
    let crit = fairness::constraint_free_check(&data, &FairnessBudget::symmetric(0.05).unwrap()).unwrap();
    Verdict::new(
        inside == total && !crit.pass && crit.rd_plus > 0.5,
        format!(
            "N={} p={:.4}; {inside}/{total} fold RDs inside bounds (LR/NB {}); check {} with RD+={:.3}",
            data.n_rows(),
            data.group_rate(),
            rds.join(" "),
            verdict(crit.pass),
            crit.rd_plus
        ),
    )
}

fn criterion_8() -> Verdict {
    let d = synthetic::biased_family(&BiasedFamily { n: 300, ..Default::default() })
        .unwrap()
        .estimate_eta(&EtaEstimator::model(1e-3))
        .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);

    // gradient check of the augmented objective
    let w = RowWeights::from_eta(d.eta().unwrap(), d.group_rate()).unwrap();
    let problem = LinearProblem::new(&d, Surrogate::logistic(), 1e-3)
        .with_constraint(Constraint::surrogate_upper("k", w.clone(), Surrogate::exponential(), Side::Convex, 0.4))
        .with_constraint(Constraint::surrogate_lower("d", w, Surrogate::square(), Side::Concave, 0.4));
    let dim = d.n_features() + 1;
    let mut worst_grad: f64 = 0.0;
    for _ in 0..100 {
        let theta: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.5..1.5)).collect();
        let lambda = [rng.random_range(0.0..2.0), rng.random_range(0.0..2.0)];
        let aug = AugmentedObjective { problem: &problem, multipliers: &lambda, penalty: rng.random_range(1.0..50.0) };
        let mut g = vec![0.0; dim];
        aug.eval(&theta, &mut g);
        let mut scratch = vec![0.0; dim];
        for i in 0..dim {
            let (mut a, mut b) = (theta.clone(), theta.clone());
            a[i] += 1e-5;
            b[i] -= 1e-5;
            let fd = (aug.eval(&a, &mut scratch) - aug.eval(&b, &mut scratch)) / 2e-5;
            worst_grad = worst_grad.max((fd - g[i]).abs() / g[i].abs().max(1.0));
        }
    }

    // two random initializations of a constrained run
    let base = SolverConfig { kappa: Surrogate::logistic(), delta: Surrogate::logistic(), ..Default::default() };
    let t = SurrogateThresholds { upper: Some(1.05), lower: Some(1.05) };
    let a = solver::train_formulation1(&d, &SolverConfig { init: Init::SeededRandom, seed: 1, ..base }, t).unwrap();
    let b = solver::train_formulation1(&d, &SolverConfig { init: Init::SeededRandom, seed: 2, ..base }, t).unwrap();
    let init_gap = (a.objective - b.objective).abs() / a.objective.abs().max(1e-12);

    // KKT at every converged constrained run
    let mut runs = vec![a, b];
    for bound in [1.2, 1.1, 1.02] {
        let t = SurrogateThresholds { upper: Some(bound), lower: Some(bound) };
        runs.push(solver::train_formulation1(&d, &SolverConfig::default(), t).unwrap());
    }
    for c1 in [0.25, 0.2] {
        let cfg = SolverConfig { budget: FairnessBudget::asymmetric(c1, 2.0).unwrap(), ..Default::default() };
        runs.push(solver::train_formulation2(&d, &cfg).unwrap());
    }
    for cov in [0.05, 0.01, 0.0] {
        runs.push(solver::train_covariance_baseline(&d, &SolverConfig::default(), cov).unwrap());
    }
    let converged: Vec<&TrainOutcome> = runs.iter().filter(|r| r.is_converged()).collect();
    let kkt_failures = converged.iter().filter(|r| !r.kkt_holds(SolverConfig::default().feasibility_tol)).count();

    let both_converged = runs[0].is_converged() && runs[1].is_converged();
    Verdict::new(
        worst_grad <= 1e-4 && init_gap <= 1e-4 && both_converged && kkt_failures == 0 && !converged.is_empty(),
        format!(
            "worst gradient error {worst_grad:.2e}; two-init objective gap {init_gap:.2e}; KKT holds in {}/{} converged runs",
            converged.len() - kkt_failures,
            converged.len()
        ),
    )
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn main() -> ExitCode {
    // `cargo test -- --list` and filters are not meaningful for this suite
    if std::env::args().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    let headline = headline_family();
    let criteria: Vec<Criterion> = vec![
        ("students fixture", Duration::from_secs(1), Box::new(criterion_1)),
        ("extreme classifiers by brute force", Duration::from_secs(30), Box::new(criterion_2)),
        ("calibration transforms", Duration::from_secs(10), Box::new(criterion_3)),
        ("bound validity", Duration::from_secs(120), Box::new(criterion_4)),
        ("guarantee chain", Duration::from_secs(300), Box::new(|| criterion_5(&headline))),
        ("dominance over covariance baseline", Duration::from_secs(300), Box::new(|| criterion_6(&headline))),
        ("Adult end to end", Duration::from_secs(180), Box::new(criterion_7)),
        ("solver numerics", Duration::from_secs(60), Box::new(criterion_8)),
    ];
    let mut failed = 0;
    for (i, (name, limit, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = run();
        let elapsed = start.elapsed();
        let pass = v.pass && elapsed < *limit;
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {}: {} {name} [{:.2}s of {}s]: {}",
            i + 1,
            verdict(pass),
            elapsed.as_secs_f64(),
            limit.as_secs(),
            v.detail
        );
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
