//! `fairbound` command-line front end.
//!
//! Exit status: 0 on success (PASS for `check`, converged for `train`),
//! 1 when `check` fails or `eval` finds a risk difference outside the
//! bounds, 2 on errors and usage errors, 3 when training does not converge
//! to a feasible point.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail};
use clap::{Args, Parser, Subcommand, ValueEnum};
use fairbound::adult::{self, AdultOptions, AdultVariant};
use fairbound::encoding::{self, Encoding, Schema};
use fairbound::eta::{self, EtaChoice};
use fairbound::model_io::ModelRecord;
use fairbound::report::{self, RunReport, Section};
use fairbound::store::{self, Manifest};
use fairbound::sweep::{self, Formulation, SweepPlan};
use fairbound_core::fairness::{self, FairnessBudget, Notion, Weighting};
use fairbound_core::synthetic::{self, BiasedFamily};
use fairbound_core::{Dataset, Init, LinearModel, SolverConfig, Surrogate, SurrogateKind, TrainStatus};

#[derive(Parser, Debug)]
#[command(name = "fairbound", version, about = "Fair classification with certified risk-difference bounds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Encode a dataset, estimate eta and write it with a manifest.
    Ingest {
        #[command(flatten)]
        data: DataArgs,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Constraint-free fairness check.
    Check {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        budget: BudgetArgs,
        /// Also write the report as JSON to this path.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Train a linear classifier.
    Train {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, value_parser = parse_formulation, default_value = "f2")]
        formulation: Formulation,
        #[command(flatten)]
        budget: BudgetArgs,
        /// Covariance threshold of the covariance baseline.
        #[arg(long)]
        cov: Option<f64>,
        #[command(flatten)]
        solver: SolverArgs,
        /// Output directory for `model.txt`, `report.txt` and `report.json`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Metrics and bounds for a trained model or external predictions.
    Eval {
        #[command(flatten)]
        data: DataArgs,
        /// Model record written by `train`.
        #[arg(long, conflicts_with = "predictions", required_unless_present = "predictions")]
        model: Option<PathBuf>,
        /// One prediction per line: `1`/`+1` for positive, `-1`/`0` for negative.
        #[arg(long)]
        predictions: Option<PathBuf>,
        #[command(flatten)]
        surrogates: SurrogateArgs,
        /// Also write the report as JSON to this path.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Train over a budget grid and write a CSV table.
    Sweep {
        #[command(flatten)]
        data: DataArgs,
        /// Comma-separated formulations.
        #[arg(long, value_delimiter = ',', value_parser = parse_formulation, default_value = "f2")]
        formulations: Vec<Formulation>,
        /// Comma-separated symmetric budgets for f1 and f2.
        #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
        grid: Vec<f64>,
        /// Comma-separated covariance thresholds; defaults to the budget grid.
        #[arg(long, value_delimiter = ',')]
        cov_grid: Vec<f64>,
        #[arg(long, default_value_t = 1)]
        folds: usize,
        #[arg(long, value_enum, default_value = "rd")]
        notion: NotionArg,
        #[command(flatten)]
        solver: SolverArgs,
        /// CSV output path; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug, Clone)]
struct DataArgs {
    /// Ingested directory, or a CSV file together with `--schema`.
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// TOML column mapping for a CSV `--dataset`.
    #[arg(long)]
    schema: Option<PathBuf>,
    /// Adult census file; repeat to concatenate `adult.data` and `adult.test`.
    #[arg(long)]
    adult: Vec<PathBuf>,
    /// Binarize numeric Adult columns and shuffle the sex column.
    #[arg(long, requires = "adult")]
    adult_star: bool,
    /// Built-in dataset.
    #[arg(long, value_enum)]
    fixture: Option<Fixture>,
    /// Group shift of the biased fixture.
    #[arg(long, default_value_t = 0.3)]
    beta: f64,
    /// Rows of the biased fixture.
    #[arg(long, default_value_t = 1000)]
    rows: usize,
    /// Seed for generated or shuffled data.
    #[arg(long, default_value_t = 7)]
    data_seed: u64,
    /// Eta estimator: freq, model or column:NAME.
    #[arg(long)]
    eta: Option<EtaChoice>,
    /// Eta estimates are clipped into `[clip, 1 - clip]`.
    #[arg(long, default_value_t = fairbound_core::dataset::DEFAULT_ETA_CLIP)]
    eta_clip: f64,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Fixture {
    Students,
    Biased,
}

#[derive(Args, Debug, Clone, Copy)]
struct BudgetArgs {
    /// Symmetric budget `c1 = c2`, or the ratio threshold for `--notion rr`.
    #[arg(long, conflicts_with_all = ["c1", "c2"])]
    tau: Option<f64>,
    /// Upper budget on the risk difference.
    #[arg(long)]
    c1: Option<f64>,
    /// Lower budget: the risk difference must be at least `-c2`.
    #[arg(long)]
    c2: Option<f64>,
    #[arg(long, value_enum, default_value = "rd")]
    notion: NotionArg,
}

impl BudgetArgs {
    fn is_set(&self) -> bool {
        self.tau.is_some() || self.c1.is_some() || self.c2.is_some()
    }

    fn budget(&self, default: f64) -> anyhow::Result<FairnessBudget> {
        let (c1, c2) = match (self.tau, self.c1, self.c2) {
            (Some(t), _, _) => (t, t),
            (None, None, None) => (default, default),
            (None, c1, c2) => (c1.unwrap_or(2.0), c2.unwrap_or(2.0)),
        };
        Ok(FairnessBudget::with_notion(self.notion.into(), c1, c2)?)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum NotionArg {
    Rd,
    Rr,
    Eo,
    Eop,
}

impl From<NotionArg> for Notion {
    fn from(n: NotionArg) -> Self {
        match n {
            NotionArg::Rd => Notion::RiskDifference,
            NotionArg::Rr => Notion::RiskRatio,
            NotionArg::Eo => Notion::EqualizedOdds,
            NotionArg::Eop => Notion::EqualOpportunity,
        }
    }
}

#[derive(Args, Debug, Clone, Copy)]
struct SurrogateArgs {
    /// Classification loss.
    #[arg(long, default_value = "logistic")]
    phi: SurrogateKind,
    /// Convex surrogate of the upper constraint.
    #[arg(long, default_value = "hinge")]
    kappa: SurrogateKind,
    /// Surrogate of the lower constraint; defaults to `--kappa`.
    #[arg(long)]
    delta: Option<SurrogateKind>,
}

#[derive(Args, Debug, Clone, Copy)]
struct SolverArgs {
    #[command(flatten)]
    surrogates: SurrogateArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "zeros")]
    init: InitArg,
    #[arg(long, default_value_t = 1e-4)]
    l2: f64,
    #[arg(long, default_value_t = 60)]
    max_outer: usize,
    #[arg(long, default_value_t = 1e-6)]
    feasibility_tol: f64,
    /// Row weights of f1 constraints.
    #[arg(long, value_enum, default_value = "indicator")]
    weighting: WeightingArg,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum InitArg {
    Zeros,
    Random,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum WeightingArg {
    Indicator,
    Estimated,
}

fn parse_formulation(s: &str) -> Result<Formulation, String> {
    s.parse()
}

impl SurrogateArgs {
    fn resolve(&self) -> (Surrogate, Surrogate, Surrogate) {
        let kappa = Surrogate::new(self.kappa);
        (Surrogate::new(self.phi), kappa, Surrogate::new(self.delta.unwrap_or(self.kappa)))
    }
}

impl SolverArgs {
    fn config(&self, budget: FairnessBudget) -> SolverConfig {
        let (phi, kappa, delta) = self.surrogates.resolve();
        SolverConfig {
            phi,
            kappa,
            delta,
            budget,
            l2_penalty: self.l2,
            max_outer_iters: self.max_outer,
            feasibility_tol: self.feasibility_tol,
            init: match self.init {
                InitArg::Zeros => Init::Zeros,
                InitArg::Random => Init::SeededRandom,
            },
            seed: self.seed,
            constraint_weighting: match self.weighting {
                WeightingArg::Indicator => Weighting::Indicator,
                WeightingArg::Estimated => Weighting::Estimated,
            },
            ..SolverConfig::default()
        }
    }
}

/// A dataset ready for use, with the manifest that identifies it.
struct Prepared {
    data: Dataset,
    manifest: Manifest,
    encoding: Option<Encoding>,
    warnings: Vec<String>,
}

impl Prepared {
    fn manifest_section(&self) -> Section {
        let mut s = Section::new("dataset");
        s.set("manifest_digest", self.manifest.digest());
        for (k, v) in self.manifest.entries() {
            s.set(k, v.as_str());
        }
        s
    }
}

/// Loads the selected source and attaches eta estimates. With `need_eta`,
/// data lacking both stored estimates and an `--eta` choice gets the
/// group-frequency estimator when every feature is discrete and a guidance
/// error otherwise.
fn prepare(args: &DataArgs, need_eta: bool) -> anyhow::Result<Prepared> {
    let sources = [args.dataset.is_some(), !args.adult.is_empty(), args.fixture.is_some()];
    match sources.iter().filter(|&&s| s).count() {
        0 => bail!("no data source: give --dataset, --adult or --fixture"),
        1 => {}
        _ => bail!("--dataset, --adult and --fixture are mutually exclusive"),
    }
    let mut warnings = Vec::new();
    let (data, encoding, eta_column, source, skipped) = if let Some(path) = &args.dataset {
        if path.is_dir() {
            let ing = store::read_ingested(path)?;
            let skipped = ing.manifest.get("skipped_rows").and_then(|v| v.parse().ok()).unwrap_or(0);
            let source = ing.manifest.get("source").unwrap_or("").to_string();
            (ing.dataset, ing.encoding, None, source, skipped)
        } else {
            let schema_path = args
                .schema
                .as_ref()
                .ok_or_else(|| anyhow!("{}: a CSV dataset needs --schema", path.display()))?;
            let schema = Schema::from_toml_file(schema_path)?;
            let loaded = encoding::load_csv(path, &schema)?;
            let source = path.display().to_string();
            (loaded.dataset, Some(loaded.encoding), loaded.eta_column, source, loaded.skipped_rows)
        }
    } else if !args.adult.is_empty() {
        let opts = AdultOptions {
            variant: if args.adult_star {
                AdultVariant::Binarized { shuffle_seed: args.data_seed }
            } else {
                AdultVariant::Raw
            },
            ..AdultOptions::default()
        };
        let loaded = adult::load_adult(&args.adult, &opts)?;
        let source = args.adult.iter().map(|p| p.display().to_string()).collect::<Vec<_>>().join(";");
        let source = if args.adult_star { format!("adult-star:{source}") } else { format!("adult:{source}") };
        (loaded.dataset, Some(loaded.encoding), None, source, loaded.skipped_rows)
    } else {
        match args.fixture.expect("checked above") {
            Fixture::Students => (synthetic::students(), None, None, "fixture:students".to_string(), 0),
            Fixture::Biased => {
                let cfg = BiasedFamily { n: args.rows, beta: args.beta, seed: args.data_seed, ..Default::default() };
                let source = format!("fixture:biased:beta={}:rows={}:seed={}", args.beta, args.rows, args.data_seed);
                (synthetic::biased_family(&cfg)?, None, None, source, 0)
            }
        }
    };
    if skipped > 0 {
        warnings.push(format!("{skipped} input rows skipped"));
    }
    if matches!(&args.eta, Some(EtaChoice::Column(_))) && eta_column.is_none() {
        bail!("--eta column:NAME needs a CSV dataset whose schema sets eta_col");
    }

    let choice = match (&args.eta, data.eta()) {
        (Some(c), _) => Some(c.clone()),
        (None, Some(_)) => None,
        (None, None) if need_eta => {
            let c = eta::default_choice(&data);
            if c != EtaChoice::Frequency {
                bail!(
                    "the dataset has continuous features and no eta estimates; \
                     pass --eta model (logistic group model) or --eta column:NAME"
                );
            }
            Some(c)
        }
        (None, None) => None,
    };
    let (data, method) = match choice {
        Some(c) => (eta::apply(&data, &c, eta_column.as_deref(), args.eta_clip)?, c.to_string()),
        None => {
            let stored = data.eta_source().map_or("none".to_string(), |s| s.name().to_string());
            (data, stored)
        }
    };
    let (manifest, _) = store::build_manifest(&data, &source, skipped, &method);
    Ok(Prepared { data, manifest, encoding, warnings })
}

fn write_reports(report: &RunReport, dir: Option<&Path>, json: Option<&Path>) -> anyhow::Result<()> {
    let json_text = serde_json::to_string_pretty(&report.to_json())? + "\n";
    if let Some(dir) = dir {
        store::write_atomic(&dir.join("report.txt"), report.to_text().as_bytes())?;
        store::write_atomic(&dir.join("report.json"), json_text.as_bytes())?;
    }
    if let Some(path) = json {
        store::write_atomic(path, json_text.as_bytes())?;
    }
    Ok(())
}

fn config_section(config: &SolverConfig, formulation: Option<Formulation>, cov: Option<f64>) -> Section {
    let mut s = Section::new("config");
    if let Some(f) = formulation {
        s.set("formulation", f.name());
    }
    s.set("phi", config.phi.kind().name())
        .set("kappa", config.kappa.kind().name())
        .set("delta", config.delta.kind().name())
        .set("notion", config.budget.notion.name())
        .set("c1", config.budget.c1)
        .set("c2", config.budget.c2)
        .set("cov", cov)
        .set("l2", config.l2_penalty)
        .set("max_outer_iters", config.max_outer_iters)
        .set("max_inner_iters", config.max_inner_iters)
        .set("feasibility_tol", config.feasibility_tol)
        .set("init", if config.init == Init::Zeros { "zeros" } else { "random" })
        .set("seed", config.seed)
        .set(
            "weighting",
            if config.constraint_weighting == Weighting::Indicator { "indicator" } else { "estimated" },
        );
    s
}

fn config_digest(config: &SolverConfig, formulation: Formulation, cov: Option<f64>) -> String {
    store::sha256_hex(format!("{formulation:?}|{cov:?}|{config:?}").as_bytes())
}

fn cmd_ingest(data: &DataArgs, out: &Path) -> anyhow::Result<ExitCode> {
    let prepared = prepare(data, false)?;
    let d = &prepared.data;
    let encoding = prepared.encoding.clone().unwrap_or(Encoding { columns: Vec::new() });
    let source = prepared.manifest.get("source").unwrap_or_default().to_string();
    let skipped = prepared.manifest.get("skipped_rows").and_then(|v| v.parse().ok()).unwrap_or(0);
    let method = prepared.manifest.get("eta_method").unwrap_or("none").to_string();
    let manifest = store::write_ingested(out, d, &encoding, &source, skipped, &method)?;
    print!("{}", manifest.to_text());
    if d.eta().is_none() {
        log::warn!("no eta estimates stored; pass --eta to later commands");
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_check(data: &DataArgs, budget: &BudgetArgs, json: Option<&Path>, argv: Vec<String>) -> anyhow::Result<ExitCode> {
    let started = Instant::now();
    let prepared = prepare(data, true)?;
    let budget = budget.budget(0.05)?;
    if budget.notion != Notion::RiskDifference {
        bail!("check is defined for the risk difference");
    }
    let crit = fairness::constraint_free_check(&prepared.data, &budget)?;
    let mut report = RunReport::new(argv);
    report.push(prepared.manifest_section());
    report.push(report::criterion_section(&crit));
    report.warnings.extend(prepared.warnings.iter().cloned());
    report.elapsed_seconds = started.elapsed().as_secs_f64();
    print!("{}", report.to_text());
    write_reports(&report, None, json)?;
    Ok(if crit.pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_train(
    data: &DataArgs,
    formulation: Formulation,
    budget: &BudgetArgs,
    cov: Option<f64>,
    solver: &SolverArgs,
    out: Option<&Path>,
    argv: Vec<String>,
) -> anyhow::Result<ExitCode> {
    let started = Instant::now();
    match formulation {
        Formulation::Plain if budget.is_set() || cov.is_some() => {
            return Err(UsageError("--formulation plain takes no budget flags (--tau, --c1, --c2, --cov)").into())
        }
        Formulation::Covariance if budget.is_set() => {
            return Err(UsageError("the covariance baseline takes --cov, not --tau/--c1/--c2").into())
        }
        Formulation::F1 | Formulation::F2 if cov.is_some() => {
            return Err(UsageError("--cov applies to --formulation covariance only").into())
        }
        _ => {}
    }
    let prepared = prepare(data, formulation == Formulation::F2 || solver.weighting == WeightingArg::Estimated)?;
    let d = &prepared.data;
    let config = solver.config(budget.budget(0.05)?);
    config.validate()?;
    let cov_threshold = cov.unwrap_or(f64::INFINITY);
    let out_model = sweep::train(d, formulation, &config, cov_threshold)?;

    let mut report = RunReport::new(argv);
    report.warnings.extend(prepared.warnings.iter().cloned());
    report.push(prepared.manifest_section());
    report.push(config_section(&config, Some(formulation), cov));

    let mut t = Section::new("training");
    t.set("status", out_model.status.name())
        .set("objective", out_model.objective)
        .set("phi_loss", out_model.loss)
        .set("outer_iterations", out_model.outer_iterations)
        .set("inner_iterations", out_model.inner_iterations)
        .set("penalty", out_model.penalty);
    for c in &out_model.constraints {
        t.set(&format!("{}_value", c.name), c.value);
        t.set(&format!("{}_multiplier", c.name), c.multiplier);
    }
    if let Some(th) = out_model.thresholds {
        t.set("refined_upper", th.upper).set("refined_lower", th.lower).set("unattainable", th.unattainable);
        if th.psi_clamped {
            report.warn("psi transform clamped at the end of its domain");
        }
        if th.unattainable {
            report.warn("the budget is unattainable under the chosen surrogates");
        }
    }
    if formulation == Formulation::F2 {
        t.set("certified", out_model.is_converged() && fairbound_core::solver::certifies_budget(&out_model, d, &config)?);
    }
    report.push(t);

    let (scores, preds) = out_model.model.predict(d)?;
    report.push(report::metrics_section(d, &preds, Some(&scores), &config.phi)?);
    if d.eta().is_some() {
        let b = match out_model.bounds {
            Some(b) => b,
            None => fairness::rd_bounds(&scores, d, &config.kappa, &config.delta)?,
        };
        report.push(report::bounds_section(&b));
        report.warnings.extend(report::bounds_warnings(&b));
    }
    report.elapsed_seconds = started.elapsed().as_secs_f64();

    if let Some(dir) = out {
        let record = ModelRecord {
            model: out_model.model.clone(),
            feature_names: d.feature_names().to_vec(),
            config_digest: config_digest(&config, formulation, cov),
        };
        store::write_atomic(&dir.join("model.txt"), record.to_text().as_bytes())?;
        write_reports(&report, Some(dir), None)?;
    }
    print!("{}", report.to_text());
    Ok(if out_model.status == TrainStatus::Converged { ExitCode::SUCCESS } else { ExitCode::from(3) })
}

fn read_predictions(path: &Path) -> anyhow::Result<Vec<i8>> {
    let text = std::fs::read_to_string(path).map_err(|e| anyhow!("{}: {e}", path.display()))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| match l.trim() {
            "1" | "+1" => Ok(1),
            "-1" | "0" => Ok(-1),
            other => Err(anyhow!("{}, line {}: '{other}' is not a prediction", path.display(), i + 1)),
        })
        .collect()
}

fn cmd_eval(
    data: &DataArgs,
    model: Option<&Path>,
    predictions: Option<&Path>,
    surrogates: &SurrogateArgs,
    json: Option<&Path>,
    argv: Vec<String>,
) -> anyhow::Result<ExitCode> {
    let started = Instant::now();
    let prepared = prepare(data, true)?;
    let d = &prepared.data;
    let (phi, kappa, delta) = surrogates.resolve();
    let (scores, preds, external) = match (model, predictions) {
        (Some(path), _) => {
            let rec = ModelRecord::read(path)?;
            if rec.feature_names != d.feature_names() {
                bail!("{}: model features do not match the dataset features", path.display());
            }
            let (s, p) = LinearModel::predict(&rec.model, d)?;
            (s, p, false)
        }
        (None, Some(path)) => {
            let p = read_predictions(path)?;
            if p.len() != d.n_rows() {
                bail!("{}: {} predictions for {} rows", path.display(), p.len(), d.n_rows());
            }
            (p.iter().map(|&y| f64::from(y)).collect(), p, true)
        }
        (None, None) => unreachable!("clap requires one of --model and --predictions"),
    };
    let mut report = RunReport::new(argv);
    report.warnings.extend(prepared.warnings.iter().cloned());
    report.push(prepared.manifest_section());
    report.push(report::metrics_section(d, &preds, (!external).then_some(&scores[..]), &phi)?);
    let b = fairness::rd_bounds(&scores, d, &kappa, &delta)?;
    report.push(report::bounds_section(&b));
    report.warnings.extend(report::bounds_warnings(&b));
    let eta = d.require_eta()?;
    let rd = fairness::risk_difference_weighted(&scores, eta, d.group_rate())?;
    let inside = b.rd_minus - 1e-12 <= rd && rd <= b.rd_plus + 1e-12;
    let mut c = Section::new("containment");
    c.set("rd_weighted", rd).set("rd_minus", b.rd_minus).set("rd_plus", b.rd_plus).set("inside", inside);
    report.push(c);
    report.elapsed_seconds = started.elapsed().as_secs_f64();
    print!("{}", report.to_text());
    write_reports(&report, None, json)?;
    Ok(if inside { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

#[allow(clippy::too_many_arguments)]
fn cmd_sweep(
    data: &DataArgs,
    formulations: &[Formulation],
    grid: &[f64],
    cov_grid: &[f64],
    folds: usize,
    notion: NotionArg,
    solver: &SolverArgs,
    out: Option<&Path>,
) -> anyhow::Result<ExitCode> {
    if grid.is_empty() {
        return Err(UsageError("the budget grid is empty").into());
    }
    let prepared = prepare(data, true)?;
    // placeholder budget; each run substitutes its grid value
    let budget = FairnessBudget::with_notion(notion.into(), 2.0, 2.0)?;
    let plan = SweepPlan {
        formulations: formulations.to_vec(),
        grid: grid.to_vec(),
        cov_grid: cov_grid.to_vec(),
        folds,
        seed: solver.seed,
        config: solver.config(budget),
    };
    let rows = sweep::run_sweep(&prepared.data, &plan)?;
    let bytes = sweep::to_csv(&rows);
    match out {
        Some(path) => store::write_atomic(path, &bytes)?,
        None => print!("{}", String::from_utf8_lossy(&bytes)),
    }
    for r in rows.iter().filter_map(|r| r.error.as_ref()) {
        log::warn!("run failed: {r}");
    }
    Ok(ExitCode::SUCCESS)
}

/// Misuse of flags that clap cannot express.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
struct UsageError(&'static str);

fn init_logging() {
    let level = match std::env::var("FAIRBOUND_LOG").as_deref() {
        Ok("quiet") => log::LevelFilter::Off,
        Ok("info") => log::LevelFilter::Info,
        Ok("debug") => log::LevelFilter::Debug,
        _ => log::LevelFilter::Warn,
    };
    env_logger::Builder::new().filter_level(level).format_timestamp(None).init();
}

fn main() -> ExitCode {
    init_logging();
    let argv: Vec<String> = std::env::args().collect();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Ingest { data, out } => cmd_ingest(data, out),
        Command::Check { data, budget, json } => cmd_check(data, budget, json.as_deref(), argv),
        Command::Train { data, formulation, budget, cov, solver, out } => {
            cmd_train(data, *formulation, budget, *cov, solver, out.as_deref(), argv)
        }
        Command::Eval { data, model, predictions, surrogates, json } => {
            cmd_eval(data, model.as_deref(), predictions.as_deref(), surrogates, json.as_deref(), argv)
        }
        Command::Sweep { data, formulations, grid, cov_grid, folds, notion, solver, out } => {
            cmd_sweep(data, formulations, grid, cov_grid, *folds, *notion, solver, out.as_deref())
        }
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            if e.is::<UsageError>() {
                eprintln!("usage error: {e}");
            } else {
                eprintln!("error: {e}");
            }
            ExitCode::from(2)
        }
    }
}
