use std::io::Write;

use serde::{Deserialize, Serialize};

use super::fit::FeaturePipeline;
use super::{label_columns, FeatureConfig, ModelConfig, PipelineError, PreparedUser, Route};
use crate::corpus::PsychTrait;
use crate::ml::{
    fit_baseline, fit_holistic, fit_independent, k_fold, learning_curve_splits, mae, rmse, ChainParams,
    LearningCurvePoint,
};
use crate::rng::derive_seed;

const FOLD_STREAM: u64 = 0xF01D;
const MODEL_STREAM: u64 = 0x30DE;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalConfig {
    pub folds: usize,
    pub seed: u64,
    pub features: FeatureConfig,
    pub model: ModelConfig,
    /// Skip the forests and score only the mean predictor.
    pub baseline_only: bool,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            folds: 5,
            seed: 0,
            features: FeatureConfig::default(),
            model: ModelConfig::default(),
            baseline_only: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraitResult {
    #[serde(rename = "trait")]
    pub psych_trait: PsychTrait,
    pub route: Route,
    pub holistic_rmse: Option<f64>,
    pub independent_rmse: Option<f64>,
    pub baseline_rmse: f64,
    pub holistic_mae: Option<f64>,
    pub independent_mae: Option<f64>,
    pub baseline_mae: f64,
}

/// Out-of-fold scores: every user is predicted once, by the models of the
/// fold that held it out, and errors are computed over the pooled predictions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub n_users: usize,
    pub folds: usize,
    pub traits: Vec<TraitResult>,
    pub handles: Vec<String>,
    /// `[trait][user]`; empty for a baseline-only run.
    pub holistic: Vec<Vec<f64>>,
    pub independent: Vec<Vec<f64>>,
    pub baseline: Vec<Vec<f64>>,
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.collect();
    v.iter().sum::<f64>() / v.len() as f64
}

impl Evaluation {
    pub fn mean_holistic_rmse(&self) -> Option<f64> {
        self.traits.iter().map(|t| t.holistic_rmse).collect::<Option<Vec<_>>>().map(|v| mean(v.into_iter()))
    }

    pub fn mean_independent_rmse(&self) -> Option<f64> {
        self.traits.iter().map(|t| t.independent_rmse).collect::<Option<Vec<_>>>().map(|v| mean(v.into_iter()))
    }

    pub fn mean_baseline_rmse(&self) -> f64 {
        mean(self.traits.iter().map(|t| t.baseline_rmse))
    }
}

fn labeled(users: &[PreparedUser]) -> Result<Vec<&PreparedUser>, PipelineError> {
    let refs: Vec<&PreparedUser> = users.iter().collect();
    if let Some(u) = refs.iter().find(|u| u.label.is_none()) {
        return Err(PipelineError::Unlabeled(u.handle.clone()));
    }
    Ok(refs)
}

fn pick<'a>(users: &[&'a PreparedUser], idx: &[usize]) -> Vec<&'a PreparedUser> {
    idx.iter().map(|&i| users[i]).collect()
}

fn chain_params(m: &ModelConfig) -> ChainParams {
    ChainParams { forest: m.forest.clone(), mode: m.mode }
}

/// k-fold cross-validation of the chain ensemble, the independent forests
/// and the mean baseline, with features refitted inside every fold.
pub fn evaluate(users: &[PreparedUser], config: &EvalConfig) -> Result<Evaluation, PipelineError> {
    let refs = labeled(users)?;
    let n = refs.len();
    if n < config.folds.max(2) {
        return Err(PipelineError::TooFewUsers { needed: config.folds.max(2), got: n });
    }
    let folds = k_fold(n, config.folds, derive_seed(config.seed, FOLD_STREAM))?;
    let y = label_columns(&refs)?;
    let mut holistic = vec![vec![0.0; n]; 7];
    let mut independent = vec![vec![0.0; n]; 7];
    let mut baseline = vec![vec![0.0; n]; 7];
    let params = chain_params(&config.model);
    for (f, test) in folds.iter().enumerate() {
        let held: std::collections::BTreeSet<usize> = test.iter().copied().collect();
        let train: Vec<usize> = (0..n).filter(|i| !held.contains(i)).collect();
        let train_users = pick(&refs, &train);
        let test_users = pick(&refs, test);
        let y_train: Vec<Vec<f64>> = y.iter().map(|col| train.iter().map(|&i| col[i]).collect()).collect();
        for t in 0..7 {
            let b = fit_baseline(&y_train[t])?;
            for &i in test {
                baseline[t][i] = b.predict();
            }
        }
        if config.baseline_only {
            continue;
        }
        let pipeline = FeaturePipeline::fit(&train_users, &y_train, &config.features)?;
        let train_block = pipeline.transform(&train_users);
        let test_block = pipeline.transform(&test_users);
        let train_inputs = pipeline.inputs(&train_block)?;
        let test_inputs = pipeline.inputs(&test_block)?;
        let targets: Vec<&[f64]> = y_train.iter().map(Vec::as_slice).collect();
        let seed = derive_seed(config.seed, MODEL_STREAM + f as u64);
        let hm = fit_holistic(&train_inputs, &targets, config.model.n_chains, &params, seed)?;
        let im = fit_independent(&train_inputs, &targets, &config.model.forest, seed)?;
        for (dst, pred) in [(&mut holistic, hm.predict(&test_inputs)?), (&mut independent, im.predict(&test_inputs)?)] {
            for t in 0..7 {
                for (&i, &p) in test.iter().zip(&pred[t]) {
                    dst[t][i] = p;
                }
            }
        }
        log::info!("fold {}/{} done", f + 1, folds.len());
    }
    let mut traits = Vec::with_capacity(7);
    for t in PsychTrait::ALL {
        let k = t.index();
        let score = |pred: &[f64]| -> Result<(f64, f64), PipelineError> { Ok((rmse(&y[k], pred)?, mae(&y[k], pred)?)) };
        let (b_rmse, b_mae) = score(&baseline[k])?;
        let (h, i) = if config.baseline_only {
            (None, None)
        } else {
            (Some(score(&holistic[k])?), Some(score(&independent[k])?))
        };
        traits.push(TraitResult {
            psych_trait: t,
            route: config.features.routes.get(t),
            holistic_rmse: h.map(|s| s.0),
            independent_rmse: i.map(|s| s.0),
            baseline_rmse: b_rmse,
            holistic_mae: h.map(|s| s.1),
            independent_mae: i.map(|s| s.1),
            baseline_mae: b_mae,
        });
    }
    if config.baseline_only {
        holistic.clear();
        independent.clear();
    }
    Ok(Evaluation {
        n_users: n,
        folds: folds.len(),
        traits,
        handles: refs.iter().map(|u| u.handle.clone()).collect(),
        holistic,
        independent,
        baseline,
    })
}

/// Holistic RMSE on a fixed holdout for nested training subsets, with
/// features refitted on each subset.
pub fn learning_curve(
    users: &[PreparedUser],
    fractions: &[f64],
    test_fraction: f64,
    config: &EvalConfig,
) -> Result<Vec<LearningCurvePoint>, PipelineError> {
    let refs = labeled(users)?;
    let (test, subsets) = learning_curve_splits(refs.len(), fractions, test_fraction, config.seed)?;
    let test_users = pick(&refs, &test);
    let y_test = label_columns(&test_users)?;
    let params = chain_params(&config.model);
    let mut out = Vec::with_capacity(fractions.len());
    for (&fraction, train) in fractions.iter().zip(subsets) {
        let train_users = pick(&refs, &train);
        let y_train = label_columns(&train_users)?;
        let pipeline = FeaturePipeline::fit(&train_users, &y_train, &config.features)?;
        let train_block = pipeline.transform(&train_users);
        let test_block = pipeline.transform(&test_users);
        let targets: Vec<&[f64]> = y_train.iter().map(Vec::as_slice).collect();
        let model = fit_holistic(&pipeline.inputs(&train_block)?, &targets, config.model.n_chains, &params, config.seed)?;
        let pred = model.predict(&pipeline.inputs(&test_block)?)?;
        let mut total = 0.0;
        for (yt, p) in y_test.iter().zip(&pred) {
            total += rmse(yt, p)?;
        }
        out.push(LearningCurvePoint { fraction, n_train: train.len(), rmse: total / 7.0 });
    }
    Ok(out)
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| format!("{x:.6}"))
}

/// Per-trait table: `trait,feature_set,holistic_rmse,independent_rmse,baseline_rmse`,
/// or `trait,baseline_rmse` for a baseline-only run.
pub fn write_trait_report<W: Write>(writer: W, eval: &Evaluation) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(writer);
    let baseline_only = eval.holistic.is_empty();
    if baseline_only {
        w.write_record(["trait", "baseline_rmse"])?;
    } else {
        w.write_record(["trait", "feature_set", "holistic_rmse", "independent_rmse", "baseline_rmse"])?;
    }
    for t in &eval.traits {
        let b = format!("{:.6}", t.baseline_rmse);
        if baseline_only {
            w.write_record([t.psych_trait.name(), b.as_str()])?;
        } else {
            w.write_record([
                t.psych_trait.name(),
                t.route.as_str(),
                &cell(t.holistic_rmse),
                &cell(t.independent_rmse),
                &b,
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Model comparison: `model,mean_rmse,mean_mae`.
pub fn write_model_report<W: Write>(writer: W, eval: &Evaluation) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["model", "mean_rmse", "mean_mae"])?;
    if !eval.holistic.is_empty() {
        let hm_mae = mean(eval.traits.iter().filter_map(|t| t.holistic_mae));
        let im_mae = mean(eval.traits.iter().filter_map(|t| t.independent_mae));
        w.write_record(["independent", &cell(eval.mean_independent_rmse()), &format!("{im_mae:.6}")])?;
        w.write_record(["holistic", &cell(eval.mean_holistic_rmse()), &format!("{hm_mae:.6}")])?;
    }
    let b_mae = mean(eval.traits.iter().map(|t| t.baseline_mae));
    w.write_record(["baseline", &format!("{:.6}", eval.mean_baseline_rmse()), &format!("{b_mae:.6}")])?;
    w.flush()?;
    Ok(())
}

/// Out-of-fold predictions: `user,model,<trait>...`.
pub fn write_predictions<W: Write>(writer: W, eval: &Evaluation) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["user", "model"];
    header.extend(PsychTrait::ALL.iter().map(|t| t.name()));
    w.write_record(&header)?;
    for (name, preds) in [("holistic", &eval.holistic), ("independent", &eval.independent), ("baseline", &eval.baseline)] {
        if preds.is_empty() {
            continue;
        }
        for (i, handle) in eval.handles.iter().enumerate() {
            let mut rec = vec![handle.clone(), name.to_string()];
            rec.extend(preds.iter().map(|col| format!("{:.6}", col[i])));
            w.write_record(&rec)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// `fraction,n_train,rmse`.
pub fn write_learning_curve<W: Write>(writer: W, points: &[LearningCurvePoint]) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["fraction", "n_train", "rmse"])?;
    for p in points {
        w.write_record([format!("{:.2}", p.fraction), p.n_train.to_string(), format!("{:.6}", p.rmse)])?;
    }
    w.flush()?;
    Ok(())
}
