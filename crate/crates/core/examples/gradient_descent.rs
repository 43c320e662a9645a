//! Gradient descent on the cross-validation loss, with its trace.

use gradcobra::bandwidth::{CvPlan, CvProblem, GdConfig, StepEvent};
use gradcobra::kernel::KernelSpec;
use gradcobra::learners::{self, build_prediction_matrix, LearnerSpec};
use gradcobra::simulate::{simulate, split_data, InputDesign, SimDesign, SimModel, SplitPlan};

fn main() -> gradcobra::Result<()> {
    let design = SimDesign::new(SimModel::new(3)?, InputDesign::Correlated, 11).with_size(300, 20);
    let data = simulate(&design)?;
    let split = split_data(&data, &SplitPlan::new(11))?;
    let fitted = LearnerSpec::default_roster()
        .iter()
        .map(|s| learners::fit(s, &split.learn.x, &split.learn.y))
        .collect::<gradcobra::Result<Vec<_>>>()?;
    let train = build_prediction_matrix(&fitted, &split.aggregate.x, &split.aggregate.y)?;

    let problem = CvProblem::new(&train, CvPlan::new(train.len(), 5, 0)?)?;
    let out = problem.gradient_descent(&KernelSpec::gaussian(), &GdConfig::default())?;

    for step in out.trace.iter().filter(|s| s.event != StepEvent::Init).take(15) {
        println!(
            "{:>3} {:<14} h = {:>10.4}  loss = {:.6}  grad = {:>11.3e}  lr = {:.3e}",
            step.iter, format!("{:?}", step.event), step.h, step.loss, step.grad, step.lambda
        );
    }
    println!(
        "h* = {:.4}, loss = {:.6}, converged = {}, evaluations = {}, learning-rate cuts = {}",
        out.h,
        out.loss,
        out.converged,
        out.evaluations,
        out.shrink_events()
    );
    Ok(())
}
