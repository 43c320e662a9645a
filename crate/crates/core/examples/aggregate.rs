//! Builds a prediction matrix from three learners and aggregates it with a fixed Gaussian bandwidth.

use gradcobra::aggregate::{AggregatorModel, Rule, ZeroMassFallback};
use gradcobra::kernel::{Bandwidth, KernelSpec};
use gradcobra::learners::{self, build_prediction_matrix, predict_all, LearnerSpec};
use gradcobra::simulate::{rmse, simulate, split_data, InputDesign, SimDesign, SimModel, SplitPlan};

fn main() -> gradcobra::Result<()> {
    let design = SimDesign::new(SimModel::new(1)?, InputDesign::Uncorrelated, 7).with_size(400, 10);
    let data = simulate(&design)?;
    let split = split_data(&data, &SplitPlan::new(7))?;

    let fitted = LearnerSpec::default_roster()
        .iter()
        .map(|s| learners::fit(s, &split.learn.x, &split.learn.y))
        .collect::<gradcobra::Result<Vec<_>>>()?;
    let train = build_prediction_matrix(&fitted, &split.aggregate.x, &split.aggregate.y)?;
    let queries = predict_all(&fitted, &split.test.x)?;
    let truth = split.test.y.as_slice();

    for (name, col) in train.learner_names().iter().zip(queries.column_iter()) {
        let pred: Vec<f64> = col.iter().copied().collect();
        println!("{name:<6} test rmse {:.4}", rmse(&pred, truth)?);
    }

    for h in [1.0, 30.0, 300.0] {
        let rule = Rule::consensual(KernelSpec::gaussian(), Bandwidth::inverse_scale(h));
        let model = AggregatorModel::fit(train.clone(), rule, ZeroMassFallback::PaperZero)?;
        let pred = model.predict(&queries)?;
        println!("gauss h={h:<5} test rmse {:.4}", rmse(&pred.values, truth)?);
    }

    // weights of one query over the stored rows
    let model = AggregatorModel::fit(
        train,
        Rule::consensual(KernelSpec::gaussian(), Bandwidth::inverse_scale(30.0)),
        ZeroMassFallback::PaperZero,
    )?;
    let q: Vec<f64> = queries.row(0).iter().copied().collect();
    let w = model.query_weights(&q)?;
    let mut top: Vec<(usize, f64)> = w.values.iter().copied().enumerate().collect();
    top.sort_by(|a, b| b.1.total_cmp(&a.1));
    println!("largest weights for query 0: {:?}", &top[..3]);
    Ok(())
}
