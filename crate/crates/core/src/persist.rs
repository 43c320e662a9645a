//! Versioned JSON model files.
//!
//! A file holds everything [`AggregatorModel::predict`] needs: the rule with
//! its kernel token, parametrization and bandwidth, the zero-mass fallback,
//! the normalization, and the stored prediction matrix with responses.

use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::aggregate::{AggregatorModel, NormalizationParams, PredictionMatrix, Rule, ZeroMassFallback};
use crate::error::{Error, Result};
use crate::kernel::{Bandwidth, KernelSpec, Parametrization};

pub const FORMAT: &str = "gradcobra-model";
pub const VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum RuleFile {
    Consensual { kernel: String, parametrization: String, h: f64 },
    Cobra { h: f64, alpha: f64 },
    KernelCobra { h: f64 },
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    rule: RuleFile,
    fallback: String,
    normalization: NormalizationParams,
    learner_names: Vec<String>,
    rows: Vec<Vec<f64>>,
    responses: Vec<f64>,
}

#[derive(Deserialize)]
struct Header {
    format: Option<String>,
    version: Option<u32>,
}

fn parametrization_token(p: Parametrization) -> &'static str {
    match p {
        Parametrization::Scale => "scale",
        Parametrization::InverseScale => "inverse_scale",
    }
}

fn fallback_token(f: ZeroMassFallback) -> &'static str {
    match f {
        ZeroMassFallback::PaperZero => "zero",
        ZeroMassFallback::TrainMean => "train_mean",
    }
}

pub fn to_json(model: &AggregatorModel) -> Result<String> {
    let rule = match *model.rule() {
        Rule::Consensual { kernel, bandwidth } => RuleFile::Consensual {
            kernel: kernel.to_string(),
            parametrization: parametrization_token(bandwidth.parametrization).into(),
            h: bandwidth.h,
        },
        Rule::Cobra { h, alpha } => RuleFile::Cobra { h, alpha },
        Rule::KernelCobra { h } => RuleFile::KernelCobra { h },
    };
    let pm = model.predictions();
    let file = ModelFile {
        format: FORMAT.into(),
        version: VERSION,
        rule,
        fallback: fallback_token(model.fallback()).into(),
        normalization: model.normalization().clone(),
        learner_names: pm.learner_names().to_vec(),
        rows: pm.rows().row_iter().map(|r| r.iter().copied().collect()).collect(),
        responses: pm.responses().iter().copied().collect(),
    };
    Ok(serde_json::to_string_pretty(&file)?)
}

pub fn from_json(text: &str) -> Result<AggregatorModel> {
    let header: Header =
        serde_json::from_str(text).map_err(|e| Error::data(format!("not a model file: {e}")))?;
    if header.format.as_deref() != Some(FORMAT) {
        return Err(Error::data(format!("not a model file: expected format `{FORMAT}`")));
    }
    match header.version {
        Some(VERSION) => {}
        Some(found) => return Err(Error::Version { expected: VERSION, found }),
        None => return Err(Error::data("model file has no version")),
    }
    let file: ModelFile = serde_json::from_str(text).map_err(|e| Error::data(format!("malformed model file: {e}")))?;

    let rule = match file.rule {
        RuleFile::Consensual { kernel, parametrization, h } => {
            let kernel: KernelSpec = kernel.parse()?;
            let parametrization = match parametrization.as_str() {
                "scale" => Parametrization::Scale,
                "inverse_scale" => Parametrization::InverseScale,
                other => return Err(Error::data(format!("unknown parametrization `{other}`"))),
            };
            Rule::consensual(kernel, Bandwidth { h, parametrization })
        }
        RuleFile::Cobra { h, alpha } => Rule::Cobra { h, alpha },
        RuleFile::KernelCobra { h } => Rule::KernelCobra { h },
    };
    let fallback = match file.fallback.as_str() {
        "zero" => ZeroMassFallback::PaperZero,
        "train_mean" => ZeroMassFallback::TrainMean,
        other => return Err(Error::data(format!("unknown fallback `{other}`"))),
    };
    let m = file.learner_names.len();
    if let Some(bad) = file.rows.iter().find(|r| r.len() != m) {
        return Err(Error::Shape { context: "model file row length", expected: m, found: bad.len() });
    }
    let rows = DMatrix::from_fn(file.rows.len(), m, |i, j| file.rows[i][j]);
    let pm = PredictionMatrix::new(rows, DVector::from_vec(file.responses), file.learner_names)?;
    AggregatorModel::from_parts(pm, file.normalization, rule, fallback)
}

pub fn save(model: &AggregatorModel, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, to_json(model)?)?;
    Ok(())
}

pub fn load(path: impl AsRef<Path>) -> Result<AggregatorModel> {
    from_json(&fs::read_to_string(path)?)
}
