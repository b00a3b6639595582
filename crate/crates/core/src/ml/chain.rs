use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::forest::{fit_forest, ForestModel, ForestParams};
use super::MlError;
use crate::corpus::PsychTrait;
use crate::rng::{derive_seed, rng_from};

pub const MODEL_VERSION: u32 = 1;

const ORDERING_STREAM: u64 = 0x0D_E5;
const CHAIN_STREAM: u64 = 0xC4_A1;

/// What the chain feeds forward for preceding traits while training.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChainMode {
    /// True labels of preceding traits.
    #[default]
    TeacherForcing,
    /// The chain's own in-sample predictions.
    Predicted,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct ChainParams {
    pub forest: ForestParams,
    pub mode: ChainMode,
}

/// Routed feature columns for each trait, indexed by [`PsychTrait::index`].
#[derive(Debug, Clone)]
pub struct ChainInputs<'a> {
    pub columns: Vec<Vec<&'a [f64]>>,
    pub names: Vec<Vec<String>>,
}

impl<'a> ChainInputs<'a> {
    pub fn new(columns: Vec<Vec<&'a [f64]>>, names: Vec<Vec<String>>) -> Result<Self, MlError> {
        if columns.len() != 7 || names.len() != 7 {
            return Err(MlError::InvalidParams("chain inputs need one route per trait".into()));
        }
        for (c, n) in columns.iter().zip(&names) {
            if c.len() != n.len() {
                return Err(MlError::LengthMismatch(c.len(), n.len()));
            }
        }
        let inputs = ChainInputs { columns, names };
        let rows = inputs.n_rows();
        if let Some(bad) = inputs.columns.iter().flatten().find(|c| c.len() != rows) {
            return Err(MlError::LengthMismatch(bad.len(), rows));
        }
        Ok(inputs)
    }

    /// The same set of columns for every trait.
    pub fn shared(columns: Vec<&'a [f64]>, names: Vec<String>) -> Result<Self, MlError> {
        Self::new(vec![columns; 7], vec![names; 7])
    }

    pub fn n_rows(&self) -> usize {
        self.columns.iter().flatten().next().map_or(0, |c| c.len())
    }

    fn route(&self, t: PsychTrait) -> &[&'a [f64]] {
        &self.columns[t.index()]
    }
}

fn chain_input_name(t: PsychTrait) -> String {
    format!("chain:{}", t.name())
}

fn check_targets(targets: &[&[f64]], n: usize) -> Result<(), MlError> {
    if targets.len() != 7 {
        return Err(MlError::InvalidParams(format!("expected 7 target columns, got {}", targets.len())));
    }
    if let Some(bad) = targets.iter().find(|t| t.len() != n) {
        return Err(MlError::LengthMismatch(bad.len(), n));
    }
    Ok(())
}

fn check_ordering(ordering: &[PsychTrait]) -> Result<(), MlError> {
    let distinct: BTreeSet<usize> = ordering.iter().map(|t| t.index()).collect();
    if ordering.len() != 7 || distinct.len() != 7 {
        let names: Vec<&str> = ordering.iter().map(|t| t.name()).collect();
        return Err(MlError::BadOrdering(names.join(",")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainModel {
    pub ordering: Vec<PsychTrait>,
    /// Forest per chain position.
    pub forests: Vec<ForestModel>,
    /// Input column names per chain position: routed features, then preceding traits.
    pub inputs: Vec<Vec<String>>,
    pub mode: ChainMode,
    pub seed: u64,
}

/// Trains forests in chain order. The forest for trait `t` uses seed
/// `derive_seed(seed, t.index())`, matching [`fit_independent`] so that the
/// chain head equals the independent forest for its trait.
pub fn fit_chain(
    inputs: &ChainInputs,
    targets: &[&[f64]],
    ordering: &[PsychTrait],
    params: &ChainParams,
    seed: u64,
) -> Result<ChainModel, MlError> {
    check_ordering(ordering)?;
    let n = inputs.n_rows();
    check_targets(targets, n)?;
    let mut forests = Vec::with_capacity(7);
    let mut names = Vec::with_capacity(7);
    let mut fed: Vec<Vec<f64>> = Vec::with_capacity(7);
    for (pos, &t) in ordering.iter().enumerate() {
        let mut x: Vec<&[f64]> = inputs.route(t).to_vec();
        let mut input_names = inputs.names[t.index()].clone();
        for (prev, col) in ordering[..pos].iter().zip(&fed) {
            x.push(col);
            input_names.push(chain_input_name(*prev));
        }
        let forest = fit_forest(&x, targets[t.index()], &params.forest, derive_seed(seed, t.index() as u64))?;
        let forward = match params.mode {
            ChainMode::TeacherForcing => targets[t.index()].to_vec(),
            ChainMode::Predicted => forest.predict_columns(&x)?,
        };
        forests.push(forest);
        names.push(input_names);
        fed.push(forward);
    }
    Ok(ChainModel { ordering: ordering.to_vec(), forests, inputs: names, mode: params.mode, seed })
}

impl ChainModel {
    /// Predictions per trait in canonical order; preceding inputs are the chain's own predictions.
    pub fn predict(&self, inputs: &ChainInputs) -> Result<Vec<Vec<f64>>, MlError> {
        let mut out = vec![Vec::new(); 7];
        let mut fed: Vec<Vec<f64>> = Vec::with_capacity(7);
        for (&t, forest) in self.ordering.iter().zip(&self.forests) {
            let mut x: Vec<&[f64]> = inputs.route(t).to_vec();
            x.extend(fed.iter().map(Vec::as_slice));
            let pred = forest.predict_columns(&x)?;
            out[t.index()] = pred.clone();
            fed.push(pred);
        }
        Ok(out)
    }
}

/// One forest per trait on its routed features only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndependentModel {
    /// Canonical trait order.
    pub forests: Vec<ForestModel>,
    pub inputs: Vec<Vec<String>>,
    pub seed: u64,
}

pub fn fit_independent(
    inputs: &ChainInputs,
    targets: &[&[f64]],
    params: &ForestParams,
    seed: u64,
) -> Result<IndependentModel, MlError> {
    check_targets(targets, inputs.n_rows())?;
    let forests = PsychTrait::ALL
        .iter()
        .map(|&t| fit_forest(inputs.route(t), targets[t.index()], params, derive_seed(seed, t.index() as u64)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(IndependentModel { forests, inputs: inputs.names.clone(), seed })
}

impl IndependentModel {
    pub fn predict(&self, inputs: &ChainInputs) -> Result<Vec<Vec<f64>>, MlError> {
        PsychTrait::ALL.iter().zip(&self.forests).map(|(&t, f)| f.predict_columns(inputs.route(t))).collect()
    }
}

/// `n` distinct trait orderings drawn from a seeded stream of shuffles.
pub fn distinct_orderings(n: usize, seed: u64) -> Result<Vec<Vec<PsychTrait>>, MlError> {
    if n == 0 {
        return Err(MlError::InvalidParams("n_chains must be at least 1".into()));
    }
    if n > 5040 {
        return Err(MlError::TooManyChains(n));
    }
    let mut rng = rng_from(derive_seed(seed, ORDERING_STREAM));
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let mut order = PsychTrait::ALL.to_vec();
        order.shuffle(&mut rng);
        if seen.insert(order.clone()) {
            out.push(order);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolisticModel {
    pub version: u32,
    pub params: ChainParams,
    pub master_seed: u64,
    pub chains: Vec<ChainModel>,
}

/// Ensemble of `n_chains` chains with distinct orderings. Chain `i` trains
/// with seed `derive_seed(master_seed, CHAIN_STREAM + i)`.
pub fn fit_holistic(
    inputs: &ChainInputs,
    targets: &[&[f64]],
    n_chains: usize,
    params: &ChainParams,
    master_seed: u64,
) -> Result<HolisticModel, MlError> {
    let orderings = distinct_orderings(n_chains, master_seed)?;
    let chains = orderings
        .into_par_iter()
        .enumerate()
        .map(|(i, order)| fit_chain(inputs, targets, &order, params, derive_seed(master_seed, CHAIN_STREAM + i as u64)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(HolisticModel { version: MODEL_VERSION, params: params.clone(), master_seed, chains })
}

impl HolisticModel {
    /// Mean over chains per trait, clamped to `[0, 1]`; canonical trait order.
    pub fn predict(&self, inputs: &ChainInputs) -> Result<Vec<Vec<f64>>, MlError> {
        let n = inputs.n_rows();
        let mut sum = vec![vec![0.0; n]; 7];
        for chain in &self.chains {
            for (acc, pred) in sum.iter_mut().zip(chain.predict(inputs)?) {
                for (a, p) in acc.iter_mut().zip(pred) {
                    *a += p;
                }
            }
        }
        let k = self.chains.len() as f64;
        Ok(sum.into_iter().map(|col| col.into_iter().map(|s| (s / k).clamp(0.0, 1.0)).collect()).collect())
    }

    pub fn to_json(&self) -> Result<String, MlError> {
        serde_json::to_string(self).map_err(|e| MlError::Format(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self, MlError> {
        let model: HolisticModel = serde_json::from_str(text).map_err(|e| MlError::Format(e.to_string()))?;
        if model.version != MODEL_VERSION {
            return Err(MlError::Format(format!("unsupported model version {}", model.version)));
        }
        Ok(model)
    }
}
