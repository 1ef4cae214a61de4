use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::forest::{train_forest, ForestModel, ForestParams};
use super::knn::{train_knn, KnnModel, KnnParams};
use super::ordinal::{train_ordinal_logit_with, OrdinalLogitModel, OrdinalLogitParams};
use super::svm::{train_svm_with, SvmModel, SvmParams};
use super::tree::{train_tree_with, DecisionTree, TreeParams};
use crate::error::{Error, Result};
use crate::tabular::{Dataset, OrdinalLabel};

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelFamily {
    RandomForest,
    Knn,
    DecisionTree,
    OrdinalLogit,
    Svm,
}

impl ModelFamily {
    pub const ALL: [ModelFamily; 5] = [
        ModelFamily::RandomForest,
        ModelFamily::Knn,
        ModelFamily::DecisionTree,
        ModelFamily::OrdinalLogit,
        ModelFamily::Svm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelFamily::RandomForest => "random_forest",
            ModelFamily::Knn => "knn",
            ModelFamily::DecisionTree => "decision_tree",
            ModelFamily::OrdinalLogit => "ordinal_logit",
            ModelFamily::Svm => "svm",
        }
    }

    /// Distance and kernel learners see standardized features; trees are
    /// invariant to per-column affine maps and skip the step.
    pub fn needs_scaling(self) -> bool {
        matches!(self, ModelFamily::Knn | ModelFamily::OrdinalLogit | ModelFamily::Svm)
    }
}

impl fmt::Display for ModelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ModelFamily::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown model `{s}`")))
    }
}

/// A model family together with its hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ModelSpec {
    RandomForest(ForestParams),
    Knn(KnnParams),
    DecisionTree(TreeParams),
    OrdinalLogit(OrdinalLogitParams),
    Svm(SvmParams),
}

impl ModelSpec {
    pub fn default_for(family: ModelFamily) -> Self {
        match family {
            ModelFamily::RandomForest => ModelSpec::RandomForest(ForestParams::default()),
            ModelFamily::Knn => ModelSpec::Knn(KnnParams::default()),
            ModelFamily::DecisionTree => ModelSpec::DecisionTree(TreeParams::default()),
            ModelFamily::OrdinalLogit => ModelSpec::OrdinalLogit(OrdinalLogitParams::default()),
            ModelFamily::Svm => ModelSpec::Svm(SvmParams::default()),
        }
    }

    pub fn family(&self) -> ModelFamily {
        match self {
            ModelSpec::RandomForest(_) => ModelFamily::RandomForest,
            ModelSpec::Knn(_) => ModelFamily::Knn,
            ModelSpec::DecisionTree(_) => ModelFamily::DecisionTree,
            ModelSpec::OrdinalLogit(_) => ModelFamily::OrdinalLogit,
            ModelSpec::Svm(_) => ModelFamily::Svm,
        }
    }

    pub fn name(&self) -> &'static str {
        self.family().name()
    }

    /// Trains on `d`; `seed` only matters for the forest.
    pub fn fit(&self, d: &Dataset, seed: u64) -> Result<TrainedModel> {
        Ok(match self {
            ModelSpec::RandomForest(p) => TrainedModel::RandomForest(train_forest(d, p, seed)?),
            ModelSpec::Knn(p) => TrainedModel::Knn(train_knn(d, p.k)?),
            ModelSpec::DecisionTree(p) => TrainedModel::DecisionTree(train_tree_with(d, p)?),
            ModelSpec::OrdinalLogit(p) => TrainedModel::OrdinalLogit(train_ordinal_logit_with(d, p)?),
            ModelSpec::Svm(p) => TrainedModel::Svm(train_svm_with(d, p)?),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "model", rename_all = "snake_case")]
pub enum TrainedModel {
    RandomForest(ForestModel),
    Knn(KnnModel),
    DecisionTree(DecisionTree),
    OrdinalLogit(OrdinalLogitModel),
    Svm(SvmModel),
}

#[derive(Serialize, Deserialize)]
struct Persisted {
    format_version: u32,
    #[serde(flatten)]
    model: TrainedModel,
}

impl TrainedModel {
    pub fn family(&self) -> ModelFamily {
        match self {
            TrainedModel::RandomForest(_) => ModelFamily::RandomForest,
            TrainedModel::Knn(_) => ModelFamily::Knn,
            TrainedModel::DecisionTree(_) => ModelFamily::DecisionTree,
            TrainedModel::OrdinalLogit(_) => ModelFamily::OrdinalLogit,
            TrainedModel::Svm(_) => ModelFamily::Svm,
        }
    }

    pub fn predict(&self, row: &[f64]) -> Result<OrdinalLabel> {
        match self {
            TrainedModel::RandomForest(m) => m.predict(row),
            TrainedModel::Knn(m) => m.predict(row),
            TrainedModel::DecisionTree(m) => m.predict(row),
            TrainedModel::OrdinalLogit(m) => m.predict(row),
            TrainedModel::Svm(m) => m.predict(row),
        }
    }

    pub fn predict_all(&self, d: &Dataset) -> Result<Vec<OrdinalLabel>> {
        d.rows().iter().map(|r| self.predict(r)).collect()
    }

    /// Versioned JSON. Reals are written in shortest round-trip form, so a
    /// save/load cycle reproduces every value exactly.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&Persisted {
            format_version: MODEL_FORMAT_VERSION,
            model: self.clone(),
        })?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        match value.get("format_version").and_then(|v| v.as_u64()) {
            Some(v) if v == u64::from(MODEL_FORMAT_VERSION) => {}
            Some(v) => return Err(Error::Format(format!("unsupported model format version {v}"))),
            None => return Err(Error::Format("missing format_version".into())),
        }
        let p: Persisted = serde_json::from_value(value)?;
        Ok(p.model)
    }
}
