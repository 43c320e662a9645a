use super::grid::{grid_search, GridConfig, GridOutcome};
use crate::aggregate::{AggregatorModel, ConsensusLevel, PredictionMatrix, Rule, ZeroMassFallback};
use crate::error::{Error, Result};

/// Mean squared error on `val_part` of the aggregate stored on `fit_part`.
///
/// Normalization is fitted on `fit_part`; zero-mass validation points predict 0.
pub fn holdout_error(fit_part: &PredictionMatrix, val_part: &PredictionMatrix, rule: &Rule) -> Result<f64> {
    if val_part.is_empty() {
        return Err(Error::invalid("empty validation part"));
    }
    let model = AggregatorModel::fit(fit_part.clone(), *rule, ZeroMassFallback::PaperZero)?;
    let pred = model.predict(val_part.rows())?;
    let sse: f64 = pred
        .values
        .iter()
        .zip(val_part.responses().iter())
        .map(|(g, y)| (g - y) * (g - y))
        .sum();
    Ok(sse / val_part.len() as f64)
}

/// `(α*, h*)` minimizing the hold-out loss of the classical rule over all
/// consensus levels and a bandwidth grid.
pub fn cobra_holdout_search(
    fit_part: &PredictionMatrix,
    val_part: &PredictionMatrix,
    grid: &GridConfig,
) -> Result<(f64, GridOutcome)> {
    let mut best: Option<(f64, GridOutcome)> = None;
    for level in ConsensusLevel::all(fit_part.n_learners()) {
        let alpha = level.alpha();
        let out = grid_search(grid, |h| holdout_error(fit_part, val_part, &Rule::Cobra { h, alpha }))?;
        if best.as_ref().map_or(true, |(_, b)| out.loss < b.loss) {
            best = Some((alpha, out));
        }
    }
    Ok(best.expect("at least one level"))
}
