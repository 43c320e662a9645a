use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use gradcobra::aggregate::{AggregatorModel, ZeroMassFallback};
use gradcobra::bandwidth::{GdConfig, GridConfig};
use gradcobra::bench::{run_benchmark, BenchmarkPlan, DataSource};
use gradcobra::learners::{self, build_prediction_matrix, predict_all, LearnerSpec};
use gradcobra::simulate::{rmse, simulate, split_data, InputDesign, SimDesign, SimModel, SplitPlan};
use gradcobra::tuning::{tune, Method, TuneConfig, TuneOutcome, Tuning};
use gradcobra::{io as csvio, persist, Error, Result};

/// Consensual regression aggregation: simulate data, tune and fit aggregates, benchmark.
#[derive(Parser)]
#[command(name = "gradcobra", version)]
struct Cli {
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output file (default: stdout).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a dataset from one of the ten benchmark models, as `y,x1,…,xd`.
    Simulate {
        #[command(flatten)]
        sim: SimArgs,
        /// Also fit this roster and write `<prefix>.train.csv` (prediction matrix)
        /// and `<prefix>.test.csv` (queries with y).
        #[arg(long)]
        split_prefix: Option<PathBuf>,
        #[arg(long, default_value = "knn:k=5,ridge:lambda=1,tree:max_depth=8:min_leaf=5")]
        roster: String,
    },
    /// Tune the bandwidth on a prediction matrix and save the fitted aggregate.
    Fit {
        #[arg(long)]
        predictions: PathBuf,
        #[command(flatten)]
        tune: TuneArgs,
        /// Prediction at queries with no kernel mass: zero or train-mean.
        #[arg(long, default_value = "zero")]
        fallback: String,
        /// Write the search trace as `iter,h,loss,grad`.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Predict query rows with a saved aggregate.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        queries: PathBuf,
    },
    /// Tune the bandwidth and report it without saving a model.
    Tune {
        #[arg(long)]
        predictions: PathBuf,
        #[command(flatten)]
        tune: TuneArgs,
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Replicated split/fit/tune/score runs; writes `method,replication,rmse,tune_ms,predict_ms`.
    Benchmark {
        #[command(flatten)]
        sim: SimArgs,
        /// Use a `y,x1,…,xd` dataset instead of simulating.
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long, default_value = "knn:k=5,ridge:lambda=1,tree:max_depth=8:min_leaf=5")]
        roster: String,
        /// Comma-separated methods, e.g. `gauss,epanechnikov@grid,cobra,kcobra`.
        #[arg(long, default_value = "gauss")]
        methods: String,
        #[arg(long, default_value_t = 10)]
        replications: usize,
        #[command(flatten)]
        tune: TuneArgs,
        /// Write per-method means and standard errors here.
        #[arg(long)]
        summary: Option<PathBuf>,
        /// Report every time column as 0 so that reports compare bitwise.
        #[arg(long)]
        no_timing: bool,
    },
}

#[derive(Args)]
struct SimArgs {
    #[arg(long, default_value = "1")]
    model: String,
    #[arg(long, default_value = "uncorrelated")]
    design: String,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
}

#[derive(Args)]
struct TuneArgs {
    /// Kernel token, e.g. `gauss`, `epanechnikov`, `cgauss:rho1=2`.
    #[arg(long, default_value = "gauss")]
    kernel: String,
    /// grid or gd (default: gd for gauss/exp4, grid otherwise).
    #[arg(long)]
    tune: Option<String>,
    /// Full method token; overrides --kernel/--tune (`cobra`, `kcobra`, `gauss@grid`).
    #[arg(long)]
    method: Option<String>,
    #[arg(long, default_value_t = 5)]
    kappa: usize,
    #[arg(long, default_value = "1e-100")]
    grid_min: f64,
    #[arg(long, default_value_t = 10.0)]
    grid_max: f64,
    #[arg(long, default_value_t = 500)]
    grid_count: usize,
    #[arg(long)]
    h0: Option<f64>,
    #[arg(long, default_value_t = 0.01)]
    lr: f64,
    #[arg(long, default_value = "1e-6")]
    tol: f64,
    #[arg(long, default_value_t = 500)]
    max_iter: usize,
}

impl TuneArgs {
    fn method(&self) -> Result<Method> {
        if let Some(m) = &self.method {
            return m.parse();
        }
        let kernel = self.kernel.parse()?;
        let method = match &self.tune {
            Some(t) => Method::Consensual { kernel, tuning: t.parse::<Tuning>()? },
            None => Method::consensual(kernel),
        };
        method.validate()?;
        Ok(method)
    }

    fn config(&self, seed: u64) -> TuneConfig {
        TuneConfig {
            kappa: self.kappa,
            seed,
            grid: GridConfig { h_min: self.grid_min, h_max: self.grid_max, count: self.grid_count },
            gd: GdConfig {
                h0: self.h0,
                lambda: self.lr,
                delta: self.tol,
                max_iter: self.max_iter,
                ..GdConfig::default()
            },
        }
    }
}

impl SimArgs {
    fn design(&self, seed: u64) -> Result<SimDesign> {
        let model: SimModel = self.model.parse()?;
        let design: InputDesign = self.design.parse()?;
        let (n0, d0) = model.default_size();
        Ok(SimDesign::new(model, design, seed).with_size(self.n.unwrap_or(n0), self.d.unwrap_or(d0)))
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn report_tuning(method: &Method, out: &TuneOutcome) {
    eprintln!(
        "{method}: h = {} ({}), cv loss = {}, evaluations = {}{}",
        out.rule.h(),
        match out.rule {
            gradcobra::aggregate::Rule::Consensual { bandwidth, .. } => bandwidth.parametrization.to_string(),
            gradcobra::aggregate::Rule::Cobra { alpha, .. } => format!("alpha = {alpha}"),
            gradcobra::aggregate::Rule::KernelCobra { .. } => "scale".into(),
        },
        out.loss,
        out.evaluations,
        if out.converged { "" } else { ", not converged" }
    );
}

fn run(cli: Cli) -> Result<()> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(Error::InvalidParameter("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Error::InvalidParameter(format!("cannot configure threads: {e}")))?;
    }
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Simulate { sim, split_prefix, roster } => {
            let design = sim.design(cli.seed)?;
            let data = simulate(&design)?;
            csvio::write_dataset(output(out)?, &data)?;
            if let Some(prefix) = split_prefix {
                let roster = LearnerSpec::parse_roster(roster)?;
                let split = split_data(&data, &SplitPlan::new(cli.seed))?;
                let fitted = roster
                    .iter()
                    .map(|s| learners::fit(s, &split.learn.x, &split.learn.y))
                    .collect::<Result<Vec<_>>>()?;
                let train = build_prediction_matrix(&fitted, &split.aggregate.x, &split.aggregate.y)?;
                let queries = predict_all(&fitted, &split.test.x)?;
                let with_ext = |ext: &str| PathBuf::from(format!("{}.{ext}", prefix.display()));
                csvio::write_prediction_matrix(create(&with_ext("train.csv"))?, &train)?;
                csvio::write_queries(create(&with_ext("test.csv"))?, train.learner_names(), &queries, Some(&split.test.y))?;
            }
        }
        Command::Fit { predictions, tune: args, fallback, trace } => {
            let out = out.ok_or_else(|| Error::InvalidParameter("fit needs --out <model.json>".into()))?;
            let fallback = match fallback.as_str() {
                "zero" => ZeroMassFallback::PaperZero,
                "train-mean" => ZeroMassFallback::TrainMean,
                other => return Err(Error::InvalidParameter(format!("unknown fallback `{other}`"))),
            };
            let method = args.method()?;
            let data = csvio::load_prediction_matrix(predictions)?;
            let tuned = tune(&data, &method, &args.config(cli.seed))?;
            report_tuning(&method, &tuned);
            if let Some(path) = trace {
                csvio::write_trace(create(path)?, &tuned.trace)?;
            }
            let model = AggregatorModel::fit(data, tuned.rule, fallback)?;
            persist::save(&model, out)?;
        }
        Command::Predict { model, queries } => {
            let model = persist::load(model)?;
            let (x, y) = csvio::load_queries(queries, model.predictions().learner_names())?;
            let pred = model.predict(&x)?;
            if let Some(y) = &y {
                eprintln!("rmse = {}", rmse(&pred.values, y.as_slice())?);
            }
            if pred.n_zero_mass() > 0 {
                log::warn!("{} queries received no kernel mass", pred.n_zero_mass());
            }
            csvio::write_predictions(output(out)?, &pred, y.as_ref())?;
        }
        Command::Tune { predictions, tune: args, trace } => {
            let method = args.method()?;
            let data = csvio::load_prediction_matrix(predictions)?;
            let tuned = tune(&data, &method, &args.config(cli.seed))?;
            report_tuning(&method, &tuned);
            if let Some(path) = trace {
                csvio::write_trace(create(path)?, &tuned.trace)?;
            }
            let mut w = csv::Writer::from_writer(output(out)?);
            w.write_record(["method", "h", "loss", "evaluations", "converged"])?;
            w.write_record([
                method.to_string(),
                tuned.rule.h().to_string(),
                tuned.loss.to_string(),
                tuned.evaluations.to_string(),
                tuned.converged.to_string(),
            ])?;
            w.flush()?;
        }
        Command::Benchmark { sim, data, roster, methods, replications, tune: args, summary, no_timing } => {
            let source = match data {
                Some(path) => DataSource::Loaded(csvio::load_dataset(path)?),
                None => DataSource::Simulated(sim.design(cli.seed)?),
            };
            let mut plan = BenchmarkPlan::new(source, Method::parse_list(methods)?);
            plan.roster = LearnerSpec::parse_roster(roster)?;
            plan.replications = *replications;
            plan.base_seed = cli.seed;
            plan.tune = args.config(cli.seed);
            plan.timing = !no_timing;
            let report = run_benchmark(&plan)?;
            report.write_rows(output(out)?)?;
            if let Some(path) = summary {
                report.write_summary(create(path)?)?;
            }
            for s in &report.summary {
                eprintln!("{:<24} rmse {:.4} ± {:.4} ({} runs)", s.method, s.mean_rmse, s.se_rmse, s.completed);
            }
            for f in &report.failures {
                eprintln!("replication {} {} failed: {}", f.replication, f.method, f.message);
            }
            if report.rows.is_empty() {
                return Err(Error::Numeric("every replication failed".into()));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
