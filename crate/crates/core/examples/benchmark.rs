//! A small replicated benchmark, written as CSV to stdout.

use gradcobra::bandwidth::GridConfig;
use gradcobra::bench::{run_benchmark, BenchmarkPlan, DataSource};
use gradcobra::simulate::{InputDesign, SimDesign, SimModel};
use gradcobra::tuning::Method;

fn main() -> gradcobra::Result<()> {
    env_logger::init();
    let design = SimDesign::new(SimModel::new(4)?, InputDesign::Uncorrelated, 0).with_size(300, 10);
    let methods = Method::parse_list("gauss,exp4,epanechnikov,cobra,kcobra")?;
    let mut plan = BenchmarkPlan::new(DataSource::Simulated(design), methods);
    plan.replications = 5;
    plan.base_seed = 100;
    plan.tune.grid = GridConfig { h_min: 1e-3, h_max: 3.0, count: 150 };

    let report = run_benchmark(&plan)?;
    report.write_summary(std::io::stdout())?;
    if !report.is_complete() {
        eprintln!("{} failures", report.failures.len());
    }
    Ok(())
}
