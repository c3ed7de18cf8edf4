//! Classifier families, evaluation, feature importance and grid search.
//!
//! Every family implements [`ModelFamily`] and is looked up by name in a
//! [`Registry`]; a fitted model is a boxed [`Classifier`].

mod forest;
mod gnb;
mod grid;
mod importance;
mod metrics;
mod model;
mod params;
mod svm;
mod tree;

use std::fmt;

pub use forest::{ForestParams, RandomForest, RfFamily};
pub use gnb::{GaussianNb, GnbFamily};
pub use grid::{cross_validate, grid_search, CvEntry, CvResult, CvSetup};
pub use importance::{gini_importance, permutation_importance, PermutationImportance};
pub use metrics::{evaluate, roc_auc_ovr, AucReport, ClassMetrics, EvalReport};
pub use model::{ModelMeta, TrainOptions, TrainedModel, MODEL_FORMAT, MODEL_VERSION};
pub use params::{combinations, parse_grid, parse_param, Grid, ParamValue, Params};
pub use svm::{BinaryMachine, Gamma, Kernel, Svm, SvmFamily};
pub use tree::{DecisionTree, DtFamily, Node, TreeParams};

use crate::dataset::DatasetError;

#[derive(Debug, thiserror::Error)]
pub enum MlError {
    #[error("unknown model family {0:?}")]
    UnknownFamily(String),
    #[error("bad parameter: {0}")]
    Param(String),
    #[error("empty training set")]
    EmptyTrainingSet,
    #[error("empty parameter grid")]
    EmptyGrid,
    #[error("malformed model: {0}")]
    Model(String),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}

/// A fitted model.
pub trait Classifier: Send + Sync + fmt::Debug {
    fn family(&self) -> &'static str;

    fn n_classes(&self) -> usize;

    /// One score per class for each row; larger means more likely.
    fn scores(&self, x: &[Vec<f64>]) -> Vec<Vec<f64>>;

    /// Highest-scoring class per row, lowest index on ties.
    fn predict(&self, x: &[Vec<f64>]) -> Vec<usize> {
        self.scores(x).iter().map(|s| argmax(s)).collect()
    }

    /// Fitted parameters as JSON, readable by the family's `load`.
    fn to_value(&self) -> serde_json::Value;

    /// Normalized impurity-decrease importance, for tree-based models.
    fn gini_importance(&self) -> Option<Vec<f64>> {
        None
    }
}

/// A trainable model family.
pub trait ModelFamily: Send + Sync {
    fn name(&self) -> &'static str;

    fn default_params(&self) -> Params;

    fn default_grid(&self) -> Grid;

    fn fit(
        &self,
        x: &[Vec<f64>],
        y: &[usize],
        n_classes: usize,
        params: &Params,
        seed: u64,
    ) -> Result<Box<dyn Classifier>, MlError>;

    fn load(&self, value: serde_json::Value) -> Result<Box<dyn Classifier>, MlError>;
}

pub struct Registry {
    families: Vec<Box<dyn ModelFamily>>,
}

impl Registry {
    pub fn empty() -> Self {
        Self { families: Vec::new() }
    }

    /// Naive Bayes, SVM, decision tree and random forest.
    pub fn builtin() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(GnbFamily));
        r.register(Box::new(SvmFamily));
        r.register(Box::new(DtFamily));
        r.register(Box::new(RfFamily));
        r
    }

    /// Adds a family, replacing any existing one with the same name.
    pub fn register(&mut self, family: Box<dyn ModelFamily>) {
        self.families.retain(|f| f.name() != family.name());
        self.families.push(family);
    }

    pub fn get(&self, name: &str) -> Result<&dyn ModelFamily, MlError> {
        self.families
            .iter()
            .find(|f| f.name() == name)
            .map(|f| f.as_ref())
            .ok_or_else(|| MlError::UnknownFamily(name.to_string()))
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.families.iter().map(|f| f.name()).collect()
    }
}

impl Default for Registry {
    fn default() -> Self {
        Self::builtin()
    }
}

pub(crate) fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, s) in v.iter().enumerate().skip(1) {
        if *s > v[best] {
            best = i;
        }
    }
    best
}

/// Index of the largest count, lowest index on ties.
pub fn argmax_counts(v: &[usize]) -> usize {
    let mut best = 0;
    for (i, c) in v.iter().enumerate() {
        if *c > v[best] {
            best = i;
        }
    }
    best
}

pub(crate) fn check_training_set(x: &[Vec<f64>], y: &[usize], n_classes: usize) -> Result<(), MlError> {
    if x.is_empty() {
        return Err(MlError::EmptyTrainingSet);
    }
    if x.len() != y.len() {
        return Err(MlError::Param(format!("{} rows but {} labels", x.len(), y.len())));
    }
    if let Some(bad) = y.iter().find(|&&c| c >= n_classes) {
        return Err(MlError::Param(format!("label {bad} out of range for {n_classes} classes")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_lookup() {
        let r = Registry::builtin();
        assert_eq!(r.names(), vec!["gnb", "svm", "dt", "rf"]);
        assert_eq!(r.get("rf").unwrap().name(), "rf");
        assert!(matches!(r.get("xgb"), Err(MlError::UnknownFamily(_))));
    }

    #[test]
    fn argmax_prefers_first() {
        assert_eq!(argmax(&[1.0, 3.0, 3.0]), 1);
        assert_eq!(argmax(&[f64::NEG_INFINITY, f64::NEG_INFINITY]), 0);
    }
}
