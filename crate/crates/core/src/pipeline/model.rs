use std::io::Write;

use serde::{Deserialize, Serialize};

use super::fit::FeaturePipeline;
use super::{label_columns, FeatureConfig, ModelConfig, PipelineError, PreparedUser};
use crate::corpus::{PsychTrait, TraitProfile};
use crate::ml::{fit_baseline, fit_holistic, ChainParams, HolisticModel};

pub const TRAINED_VERSION: u32 = 1;

/// Fitted features and chain ensemble, persisted as one JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub version: u32,
    pub features: FeaturePipeline,
    pub holistic: HolisticModel,
    pub baseline: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub handle: String,
    pub traits: TraitProfile,
}

/// Fits features and the chain ensemble on every labeled user.
pub fn train(users: &[PreparedUser], features: &FeatureConfig, model: &ModelConfig, seed: u64) -> Result<TrainedModel, PipelineError> {
    let refs: Vec<&PreparedUser> = users.iter().collect();
    let y = label_columns(&refs)?;
    let pipeline = FeaturePipeline::fit(&refs, &y, features)?;
    let block = pipeline.transform(&refs);
    let targets: Vec<&[f64]> = y.iter().map(Vec::as_slice).collect();
    let params = ChainParams { forest: model.forest.clone(), mode: model.mode };
    let holistic = fit_holistic(&pipeline.inputs(&block)?, &targets, model.n_chains, &params, seed)?;
    let baseline = y.iter().map(|col| fit_baseline(col).map(|b| b.mean)).collect::<Result<_, _>>()?;
    Ok(TrainedModel { version: TRAINED_VERSION, features: pipeline, holistic, baseline })
}

impl TrainedModel {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, PipelineError> {
        let m: TrainedModel = serde_json::from_str(text).map_err(|e| PipelineError::Format(e.to_string()))?;
        if m.version != TRAINED_VERSION {
            return Err(PipelineError::Format(format!("unsupported model version {}", m.version)));
        }
        let names = m.features.column_names();
        for chain in &m.holistic.chains {
            for (&t, inputs) in chain.ordering.iter().zip(&chain.inputs) {
                if !inputs.starts_with(&names[t.index()]) {
                    return Err(PipelineError::Format(format!("chain inputs for {t} disagree with the feature layout")));
                }
            }
        }
        Ok(m)
    }

    /// Errors unless `expected` matches the feature settings the model was trained with.
    pub fn check_layout(&self, expected: &FeatureConfig) -> Result<(), PipelineError> {
        let have = &self.features.config;
        if have == expected {
            return Ok(());
        }
        let mut diffs = Vec::new();
        if have.min_df != expected.min_df {
            diffs.push(format!("min_df {} vs {}", have.min_df, expected.min_df));
        }
        if have.top_k != expected.top_k {
            diffs.push(format!("top_k {} vs {}", have.top_k, expected.top_k));
        }
        for t in PsychTrait::ALL {
            if have.routes.get(t) != expected.routes.get(t) {
                diffs.push(format!("{t} route {} vs {}", have.routes.get(t), expected.routes.get(t)));
            }
        }
        Err(PipelineError::Layout(format!("model trained with {}", diffs.join(", "))))
    }
}

pub fn predict(model: &TrainedModel, users: &[PreparedUser]) -> Result<Vec<Prediction>, PipelineError> {
    let refs: Vec<&PreparedUser> = users.iter().collect();
    let block = model.features.transform(&refs);
    let pred = model.holistic.predict(&model.features.inputs(&block)?)?;
    Ok(refs
        .iter()
        .enumerate()
        .map(|(i, u)| {
            let mut values = [0.0; 7];
            for (v, col) in values.iter_mut().zip(&pred) {
                *v = col[i];
            }
            Prediction { handle: u.handle.clone(), traits: TraitProfile::new(values) }
        })
        .collect())
}

/// `user,<trait>...`.
pub fn write_prediction_csv<W: Write>(writer: W, preds: &[Prediction]) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["user"];
    header.extend(PsychTrait::ALL.iter().map(|t| t.name()));
    w.write_record(&header)?;
    for p in preds {
        let mut rec = vec![p.handle.clone()];
        rec.extend(p.traits.values().iter().map(|v| format!("{v:.6}")));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
