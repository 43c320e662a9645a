//! Classical COBRA and KernelCobra against the consensual Gaussian rule.

use gradcobra::aggregate::{AggregatorModel, ZeroMassFallback};
use gradcobra::bandwidth::GridConfig;
use gradcobra::learners::{self, build_prediction_matrix, predict_all, LearnerSpec};
use gradcobra::simulate::{rmse, simulate, split_data, InputDesign, SimDesign, SimModel, SplitPlan};
use gradcobra::tuning::{tune, Method, TuneConfig};

fn main() -> gradcobra::Result<()> {
    let design = SimDesign::new(SimModel::new(2)?, InputDesign::Uncorrelated, 21).with_size(500, 10);
    let data = simulate(&design)?;
    let split = split_data(&data, &SplitPlan::new(21))?;
    let roster = LearnerSpec::parse_roster("knn:k=5,knn:k=15,ridge:lambda=1,tree:max_depth=6:min_leaf=5")?;
    let fitted = roster
        .iter()
        .map(|s| learners::fit(s, &split.learn.x, &split.learn.y))
        .collect::<gradcobra::Result<Vec<_>>>()?;
    let train = build_prediction_matrix(&fitted, &split.aggregate.x, &split.aggregate.y)?;
    let queries = predict_all(&fitted, &split.test.x)?;

    let cfg = TuneConfig { grid: GridConfig { h_min: 1e-3, h_max: 2.0, count: 200 }, ..TuneConfig::default() };
    for method in Method::parse_list("cobra,kcobra,gauss")? {
        let tuned = tune(&train, &method, &cfg)?;
        let model = AggregatorModel::fit(train.clone(), tuned.rule, ZeroMassFallback::PaperZero)?;
        let pred = model.predict(&queries)?;
        println!(
            "{:<9} {:?}\n          test rmse {:.4}, zero-mass queries {}",
            method.to_string(),
            tuned.rule,
            rmse(&pred.values, split.test.y.as_slice())?,
            pred.n_zero_mass()
        );
    }
    Ok(())
}
