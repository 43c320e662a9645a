//! Tunes a model, saves it as JSON, reloads it and checks that predictions agree bit for bit.

use gradcobra::aggregate::{AggregatorModel, ZeroMassFallback};
use gradcobra::learners::{self, build_prediction_matrix, predict_all, LearnerSpec};
use gradcobra::persist;
use gradcobra::simulate::{simulate, split_data, InputDesign, SimDesign, SimModel, SplitPlan};
use gradcobra::tuning::{tune, Method, TuneConfig};

fn main() -> gradcobra::Result<()> {
    let data = simulate(&SimDesign::new(SimModel::new(1)?, InputDesign::Correlated, 4).with_size(300, 8))?;
    let split = split_data(&data, &SplitPlan::new(4))?;
    let fitted = LearnerSpec::default_roster()
        .iter()
        .map(|s| learners::fit(s, &split.learn.x, &split.learn.y))
        .collect::<gradcobra::Result<Vec<_>>>()?;
    let train = build_prediction_matrix(&fitted, &split.aggregate.x, &split.aggregate.y)?;
    let method: Method = "gauss".parse()?;
    let tuned = tune(&train, &method, &TuneConfig::default())?;
    let model = AggregatorModel::fit(train, tuned.rule, ZeroMassFallback::TrainMean)?;

    let path = std::env::temp_dir().join("gradcobra-example-model.json");
    persist::save(&model, &path)?;
    let back = persist::load(&path)?;

    let queries = predict_all(&fitted, &split.test.x)?;
    let (a, b) = (model.predict(&queries)?, back.predict(&queries)?);
    let identical = a.values.iter().zip(&b.values).all(|(x, y)| x.to_bits() == y.to_bits());
    println!("saved {} ({} bytes)", path.display(), std::fs::metadata(&path)?.len());
    println!("rule after reload: {:?}", back.rule());
    println!("predictions identical after reload: {identical}");
    std::fs::remove_file(&path)?;
    Ok(())
}
