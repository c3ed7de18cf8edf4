use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::params::{get_bool, get_usize, grid_of, params_of, resolve};
use super::tree::{normalize, tree_params, DecisionTree, TreeParams};
use super::{check_training_set, Classifier, Grid, MlError, ModelFamily, ParamValue, Params};
use crate::seed::rng_for;

/// Bagged CART trees combined by majority vote.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub n_classes: usize,
    pub trees: Vec<DecisionTree>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForestParams {
    pub n_estimators: usize,
    pub tree: TreeParams,
    pub bootstrap: bool,
}

impl RandomForest {
    /// Tree `t` draws its bootstrap and its per-split feature subsets from
    /// streams derived from `(seed, t)`, so trees can grow in parallel.
    pub fn fit(x: &[Vec<f64>], y: &[usize], n_classes: usize, p: &ForestParams, seed: u64) -> Result<Self, MlError> {
        check_training_set(x, y, n_classes)?;
        let n = x.len();
        let trees = (0..p.n_estimators)
            .into_par_iter()
            .map(|t| {
                let idx: Vec<usize> = if p.bootstrap {
                    let mut rng = rng_for(seed, "rf-bootstrap", t as u64);
                    (0..n).map(|_| rng.gen_range(0..n)).collect()
                } else {
                    (0..n).collect()
                };
                DecisionTree::fit_rows(x, y, idx, n_classes, &p.tree, rng_for(seed, "rf-features", t as u64))
            })
            .collect();
        Ok(Self { n_classes, trees })
    }

    fn votes(&self, row: &[f64]) -> Vec<usize> {
        let mut v = vec![0; self.n_classes];
        self.trees.iter().for_each(|t| v[t.predict_row(row)] += 1);
        v
    }
}

impl Classifier for RandomForest {
    fn family(&self) -> &'static str {
        "rf"
    }

    fn n_classes(&self) -> usize {
        self.n_classes
    }

    /// Fraction of trees voting for each class.
    fn scores(&self, x: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let k = self.trees.len() as f64;
        x.iter()
            .map(|r| self.votes(r).into_iter().map(|v| v as f64 / k).collect())
            .collect()
    }

    fn to_value(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("model serializes")
    }

    fn gini_importance(&self) -> Option<Vec<f64>> {
        let d = self.trees.first()?.n_features;
        let mut total = vec![0.0; d];
        for t in &self.trees {
            total.iter_mut().zip(t.feature_gains()).for_each(|(a, g)| *a += g);
        }
        Some(normalize(total))
    }
}

fn max_features(p: &Params, d: usize) -> Result<Option<usize>, MlError> {
    match p.get("max_features") {
        Some(ParamValue::Str(s)) if s == "sqrt" => Ok(Some(((d as f64).sqrt().floor() as usize).max(1))),
        Some(ParamValue::Str(s)) if s == "all" => Ok(None),
        Some(ParamValue::None) => Ok(None),
        Some(ParamValue::Int(m)) if *m >= 1 => Ok(Some(*m as usize)),
        other => Err(MlError::Param(format!("max_features must be sqrt, all or a positive integer, got {other:?}"))),
    }
}

pub struct RfFamily;

impl ModelFamily for RfFamily {
    fn name(&self) -> &'static str {
        "rf"
    }

    fn default_params(&self) -> Params {
        params_of([
            ("n_estimators", ParamValue::Int(100)),
            ("max_depth", ParamValue::None),
            ("min_samples_split", ParamValue::Int(2)),
            ("min_samples_leaf", ParamValue::Int(1)),
            ("max_features", ParamValue::Str("sqrt".into())),
            ("bootstrap", ParamValue::Bool(true)),
        ])
    }

    fn default_grid(&self) -> Grid {
        use ParamValue::{Int, None};
        grid_of([
            ("n_estimators", vec![Int(100), Int(200)]),
            ("max_depth", vec![None, Int(5), Int(10), Int(20)]),
            ("min_samples_split", vec![Int(2), Int(5), Int(10)]),
        ])
    }

    fn fit(
        &self,
        x: &[Vec<f64>],
        y: &[usize],
        n_classes: usize,
        params: &Params,
        seed: u64,
    ) -> Result<Box<dyn Classifier>, MlError> {
        let p = resolve(self.default_params(), params, self.name())?;
        let d = x.first().map_or(0, Vec::len);
        let mut tree = tree_params(&p)?;
        tree.max_features = max_features(&p, d)?;
        let fp = ForestParams {
            n_estimators: get_usize(&p, "n_estimators", 1)?,
            tree,
            bootstrap: get_bool(&p, "bootstrap")?,
        };
        Ok(Box::new(RandomForest::fit(x, y, n_classes, &fp, seed)?))
    }

    fn load(&self, value: serde_json::Value) -> Result<Box<dyn Classifier>, MlError> {
        let m: RandomForest = serde_json::from_value(value).map_err(|e| MlError::Model(e.to_string()))?;
        Ok(Box::new(m))
    }
}
