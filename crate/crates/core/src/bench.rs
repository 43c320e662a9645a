//! Replicated train/aggregate/test experiments over simulated or loaded data.

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;

use crate::aggregate::{AggregatorModel, ZeroMassFallback};
use crate::error::{Error, Result};
use crate::learners::{self, build_prediction_matrix, roster_names, LearnerSpec};
use crate::simulate::{rmse, simulate, split_data, Dataset, SimDesign, SplitPlan};
use crate::tuning::{tune, Method, TuneConfig};

#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    /// Redrawn each replication with seed `base_seed + r`; the design's own seed is ignored.
    Simulated(SimDesign),
    /// A fixed dataset; only the split changes between replications.
    Loaded(Dataset),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkPlan {
    pub source: DataSource,
    pub roster: Vec<LearnerSpec>,
    pub methods: Vec<Method>,
    pub tune: TuneConfig,
    pub replications: usize,
    pub base_seed: u64,
    pub test_fraction: f64,
    pub dk_fraction: f64,
    /// Worker threads for the replication pool; `None` uses rayon's default.
    pub threads: Option<usize>,
    /// When false every time column is written as 0 so reports compare bitwise.
    pub timing: bool,
}

impl BenchmarkPlan {
    pub fn new(source: DataSource, methods: Vec<Method>) -> Self {
        BenchmarkPlan {
            source,
            roster: LearnerSpec::default_roster(),
            methods,
            tune: TuneConfig::default(),
            replications: 10,
            base_seed: 0,
            test_fraction: 0.2,
            dk_fraction: 0.5,
            threads: None,
            timing: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return Err(Error::invalid("benchmark needs at least one method"));
        }
        if self.replications == 0 {
            return Err(Error::invalid("benchmark needs at least one replication"));
        }
        if self.roster.is_empty() {
            return Err(Error::invalid("empty learner roster"));
        }
        self.roster.iter().try_for_each(LearnerSpec::validate)?;
        self.methods.iter().try_for_each(Method::validate)?;
        self.split_plan(0).validate()
    }

    pub fn replication_seed(&self, r: usize) -> u64 {
        self.base_seed.wrapping_add(r as u64)
    }

    fn split_plan(&self, r: usize) -> SplitPlan {
        SplitPlan {
            test_fraction: self.test_fraction,
            dk_fraction: self.dk_fraction,
            seed: self.replication_seed(r),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub method: String,
    pub replication: usize,
    pub rmse: f64,
    pub tune_ms: f64,
    pub predict_ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodSummary {
    pub method: String,
    pub completed: usize,
    pub mean_rmse: f64,
    /// Sample standard deviation over `√completed`; NaN with a single replication.
    pub se_rmse: f64,
    pub mean_tune_ms: f64,
    pub mean_predict_ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub replication: usize,
    /// Empty when the whole replication failed before any method ran.
    pub method: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkReport {
    /// Ordered by replication, then base learners, then methods in plan order.
    pub rows: Vec<ReportRow>,
    pub summary: Vec<MethodSummary>,
    pub failures: Vec<Failure>,
    pub replications: usize,
}

impl BenchmarkReport {
    pub fn is_complete(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn summary_for(&self, method: &str) -> Option<&MethodSummary> {
        self.summary.iter().find(|s| s.method == method)
    }

    /// `method,replication,rmse,tune_ms,predict_ms`.
    pub fn write_rows<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["method", "replication", "rmse", "tune_ms", "predict_ms"])?;
        for r in &self.rows {
            w.write_record([
                r.method.clone(),
                r.replication.to_string(),
                r.rmse.to_string(),
                r.tune_ms.to_string(),
                r.predict_ms.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// `method,completed,mean_rmse,se_rmse,mean_tune_ms,mean_predict_ms`.
    pub fn write_summary<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["method", "completed", "mean_rmse", "se_rmse", "mean_tune_ms", "mean_predict_ms"])?;
        for s in &self.summary {
            w.write_record([
                s.method.clone(),
                s.completed.to_string(),
                s.mean_rmse.to_string(),
                s.se_rmse.to_string(),
                s.mean_tune_ms.to_string(),
                s.mean_predict_ms.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn elapsed_ms(start: Instant, timing: bool) -> f64 {
    if timing {
        start.elapsed().as_secs_f64() * 1e3
    } else {
        0.0
    }
}

type ReplicationResult = (Vec<ReportRow>, Vec<Failure>);

/// One replication: draw or load, split, fit the roster, then tune and score every method.
pub fn run_replication(plan: &BenchmarkPlan, r: usize) -> Result<ReplicationResult> {
    let seed = plan.replication_seed(r);
    let data = match &plan.source {
        DataSource::Simulated(design) => simulate(&SimDesign { seed, ..*design })?,
        DataSource::Loaded(d) => d.clone(),
    };
    let split = split_data(&data, &plan.split_plan(r))?;
    let timing = plan.timing;
    let truth: Vec<f64> = split.test.y.iter().copied().collect();

    let mut rows = Vec::new();
    let mut fitted = Vec::with_capacity(plan.roster.len());
    let mut fit_ms = Vec::with_capacity(plan.roster.len());
    for spec in &plan.roster {
        let start = Instant::now();
        fitted.push(learners::fit(spec, &split.learn.x, &split.learn.y)?);
        fit_ms.push(elapsed_ms(start, timing));
    }
    let names = roster_names(&fitted);
    let mut test_columns = Vec::with_capacity(fitted.len());
    for ((learner, name), fit_time) in fitted.iter().zip(&names).zip(&fit_ms) {
        let start = Instant::now();
        let pred = learner.predict(&split.test.x)?;
        let predict_ms = elapsed_ms(start, timing);
        rows.push(ReportRow {
            method: name.clone(),
            replication: r,
            rmse: rmse(&pred, &truth)?,
            tune_ms: *fit_time,
            predict_ms,
        });
        test_columns.push(pred);
    }

    let train = build_prediction_matrix(&fitted, &split.aggregate.x, &split.aggregate.y)?;
    let queries = nalgebra::DMatrix::from_fn(truth.len(), fitted.len(), |i, m| test_columns[m][i]);
    let cfg = TuneConfig { seed, ..plan.tune.clone() };
    let mut failures = Vec::new();
    for method in &plan.methods {
        let name = method.to_string();
        let attempt = || -> Result<ReportRow> {
            let start = Instant::now();
            let tuned = tune(&train, method, &cfg)?;
            let tune_ms = elapsed_ms(start, timing);
            let start = Instant::now();
            let model = AggregatorModel::fit(train.clone(), tuned.rule, ZeroMassFallback::PaperZero)?;
            let pred = model.predict(&queries)?;
            let predict_ms = elapsed_ms(start, timing);
            Ok(ReportRow {
                method: name.clone(),
                replication: r,
                rmse: rmse(&pred.values, &truth)?,
                tune_ms,
                predict_ms,
            })
        };
        match attempt() {
            Ok(row) => rows.push(row),
            Err(e) => {
                log::warn!("replication {r}: {name} failed: {e}");
                failures.push(Failure { replication: r, method: name, message: e.to_string() });
            }
        }
    }
    Ok((rows, failures))
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Mean and standard error (`sd / √n`, sample sd) of `v`.
pub fn mean_and_se(v: &[f64]) -> (f64, f64) {
    let m = mean(v);
    if v.len() < 2 {
        return (m, f64::NAN);
    }
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() - 1) as f64;
    (m, (var / v.len() as f64).sqrt())
}

fn summarize(rows: &[ReportRow], order: &[String]) -> Vec<MethodSummary> {
    order
        .iter()
        .filter_map(|name| {
            let mine: Vec<&ReportRow> = rows.iter().filter(|r| &r.method == name).collect();
            if mine.is_empty() {
                return None;
            }
            let rmses: Vec<f64> = mine.iter().map(|r| r.rmse).collect();
            let (mean_rmse, se_rmse) = mean_and_se(&rmses);
            Some(MethodSummary {
                method: name.clone(),
                completed: mine.len(),
                mean_rmse,
                se_rmse,
                mean_tune_ms: mean(&mine.iter().map(|r| r.tune_ms).collect::<Vec<_>>()),
                mean_predict_ms: mean(&mine.iter().map(|r| r.predict_ms).collect::<Vec<_>>()),
            })
        })
        .collect()
}

/// Runs every replication, in parallel across replications, and assembles the report.
///
/// A failing replication or method is recorded in `failures` and left out of the summary.
pub fn run_benchmark(plan: &BenchmarkPlan) -> Result<BenchmarkReport> {
    plan.validate()?;
    let run = || -> Vec<Result<ReplicationResult>> {
        (0..plan.replications).into_par_iter().map(|r| run_replication(plan, r)).collect()
    };
    let results = match plan.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::invalid(format!("cannot build thread pool: {e}")))?
            .install(run),
        None => run(),
    };

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (r, res) in results.into_iter().enumerate() {
        match res {
            Ok((mut rr, mut ff)) => {
                rows.append(&mut rr);
                failures.append(&mut ff);
            }
            Err(e) => {
                log::warn!("replication {r} failed: {e}");
                failures.push(Failure { replication: r, method: String::new(), message: e.to_string() });
            }
        }
    }
    let mut order: Vec<String> = Vec::new();
    for row in &rows {
        if !order.contains(&row.method) {
            order.push(row.method.clone());
        }
    }
    Ok(BenchmarkReport {
        summary: summarize(&rows, &order),
        rows,
        failures,
        replications: plan.replications,
    })
}
