//! Grid search for compact kernels and a comparison with gradient descent for the Gaussian.

use gradcobra::bandwidth::{CvPlan, CvProblem, GdConfig, GridConfig};
use gradcobra::kernel::{KernelFamily, KernelSpec};
use gradcobra::learners::{self, build_prediction_matrix, LearnerSpec};
use gradcobra::simulate::{simulate, split_data, InputDesign, SimDesign, SimModel, SplitPlan};
use std::time::Instant;

fn main() -> gradcobra::Result<()> {
    let design = SimDesign::new(SimModel::new(5)?, InputDesign::Uncorrelated, 3).with_size(400, 20);
    let data = simulate(&design)?;
    let split = split_data(&data, &SplitPlan::new(3))?;
    let fitted = LearnerSpec::default_roster()
        .iter()
        .map(|s| learners::fit(s, &split.learn.x, &split.learn.y))
        .collect::<gradcobra::Result<Vec<_>>>()?;
    let train = build_prediction_matrix(&fitted, &split.aggregate.x, &split.aggregate.y)?;
    let problem = CvProblem::new(&train, CvPlan::new(train.len(), 5, 0)?)?;
    let grid = GridConfig::default();

    for family in KernelFamily::ALL {
        let spec = KernelSpec::new(family);
        let start = Instant::now();
        let out = problem.grid_search(&spec, &grid)?;
        println!(
            "{:<14} grid h = {:<8.4} loss = {:.5}  ({:.0} ms)",
            spec.to_string(),
            out.h,
            out.loss,
            start.elapsed().as_secs_f64() * 1e3
        );
    }

    let start = Instant::now();
    let gd = problem.gradient_descent(&KernelSpec::gaussian(), &GdConfig::default())?;
    println!(
        "gauss          gd   h = {:<8.4} loss = {:.5}  ({:.0} ms, {} evaluations)",
        gd.h,
        gd.loss,
        start.elapsed().as_secs_f64() * 1e3,
        gd.evaluations
    );
    Ok(())
}
