//! Serialized, self-describing trained model.

use serde::{Deserialize, Serialize};

use super::{Classifier, MlError, Params, Registry};
use crate::dataset::{smote, FeatureEncoder, LabelCodec, Standardizer};
use crate::features::{FeatureRow, MODEL_FEATURES};
use crate::seed::derive_seed;

pub const MODEL_FORMAT: &str = "aisclass-model";
pub const MODEL_VERSION: u32 = 1;

/// Everything needed to turn a feature row into a prediction, apart from
/// the fitted parameters themselves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelMeta {
    pub format: String,
    pub version: u32,
    pub family: String,
    pub params: Params,
    pub seed: u64,
    pub smote: bool,
    pub feature_columns: Vec<String>,
    pub classes: LabelCodec,
    pub encoder: FeatureEncoder,
    pub standardizer: Standardizer,
    /// Whether `params` came from a grid search.
    #[serde(default)]
    pub tuned: bool,
    #[serde(default)]
    pub config_hash: String,
}

/// What to fit and how.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainOptions {
    pub family: String,
    pub params: Params,
    pub smote: bool,
    pub smote_k: usize,
    pub seed: u64,
    pub tuned: bool,
}

impl TrainOptions {
    pub fn new(family: &str) -> Self {
        Self {
            family: family.to_string(),
            params: Params::new(),
            smote: false,
            smote_k: 5,
            seed: 42,
            tuned: false,
        }
    }
}

#[derive(Debug)]
pub struct TrainedModel {
    pub meta: ModelMeta,
    pub classifier: Box<dyn Classifier>,
}

impl TrainedModel {
    /// Encodes and standardizes `rows`, optionally oversamples, and fits the
    /// family. Rows must already have been through `dataset::prepare`.
    pub fn train(registry: &Registry, rows: &[FeatureRow], opts: &TrainOptions) -> Result<Self, MlError> {
        let fam = registry.get(&opts.family)?;
        let classes = LabelCodec::ship_classes();
        let encoder = FeatureEncoder::fit(rows);
        let raw = encoder.encode(rows);
        let y = crate::dataset::labels(rows, &classes);
        let standardizer = Standardizer::fit(&raw);
        let mut x = standardizer.transform(&raw);
        let mut y = y;
        if opts.smote {
            let over = smote(&x, &y, opts.smote_k, derive_seed(opts.seed, "smote-train", 0))?;
            x = over.x;
            y = over.y;
        }
        let classifier = fam.fit(&x, &y, classes.len(), &opts.params, derive_seed(opts.seed, "fit", 0))?;
        Ok(Self {
            meta: ModelMeta {
                format: MODEL_FORMAT.to_string(),
                version: MODEL_VERSION,
                family: opts.family.clone(),
                params: opts.params.clone(),
                seed: opts.seed,
                smote: opts.smote,
                feature_columns: MODEL_FEATURES.iter().map(|s| s.to_string()).collect(),
                classes,
                encoder,
                standardizer,
                tuned: opts.tuned,
                config_hash: String::new(),
            },
            classifier,
        })
    }

    pub fn matrix(&self, rows: &[FeatureRow]) -> Vec<Vec<f64>> {
        self.meta.standardizer.transform(&self.meta.encoder.encode(rows))
    }

    pub fn predict_rows(&self, rows: &[FeatureRow]) -> Vec<usize> {
        self.classifier.predict(&self.matrix(rows))
    }

    pub fn scores_rows(&self, rows: &[FeatureRow]) -> Vec<Vec<f64>> {
        self.classifier.scores(&self.matrix(rows))
    }

    pub fn class_name(&self, code: usize) -> &str {
        self.meta.classes.decode(code).unwrap_or("Unknown")
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut doc = serde_json::to_value(&self.meta).expect("metadata serializes");
        doc["model"] = self.classifier.to_value();
        doc
    }

    pub fn from_json(registry: &Registry, mut doc: serde_json::Value) -> Result<Self, MlError> {
        let model = doc
            .as_object_mut()
            .and_then(|o| o.remove("model"))
            .ok_or_else(|| MlError::Model("missing \"model\" field".into()))?;
        let meta: ModelMeta = serde_json::from_value(doc).map_err(|e| MlError::Model(e.to_string()))?;
        if meta.format != MODEL_FORMAT {
            return Err(MlError::Model(format!("format {:?} is not {MODEL_FORMAT:?}", meta.format)));
        }
        if meta.version != MODEL_VERSION {
            return Err(MlError::Model(format!(
                "model version {} but this build reads version {MODEL_VERSION}",
                meta.version
            )));
        }
        if meta.feature_columns != MODEL_FEATURES {
            return Err(MlError::Model("model was trained on a different feature schema".into()));
        }
        let classifier = registry.get(&meta.family)?.load(model)?;
        Ok(Self { meta, classifier })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::testutil::row;

    fn rows() -> Vec<FeatureRow> {
        let types = ["Cargo", "Tanker", "HSC"];
        (0..60)
            .map(|i| {
                let t = types[i % 3];
                let sog = [12.0, 10.0, 30.0][i % 3] + (i as f64 * 0.37) % 2.0;
                let mut r = row(i as u64, Some(t), sog);
                r.length_m = [180.0, 240.0, 40.0][i % 3] + (i % 5) as f64;
                r
            })
            .collect()
    }

    #[test]
    fn json_round_trip_preserves_predictions() {
        let reg = Registry::builtin();
        let rows = rows();
        for fam in reg.names() {
            let m = TrainedModel::train(&reg, &rows, &TrainOptions { seed: 7, ..TrainOptions::new(fam) }).unwrap();
            let back = TrainedModel::from_json(&reg, m.to_json()).unwrap();
            assert_eq!(back.predict_rows(&rows), m.predict_rows(&rows), "{fam}");
            assert_eq!(back.to_json(), m.to_json());
        }
    }

    #[test]
    fn wrong_version_rejected() {
        let reg = Registry::builtin();
        let m = TrainedModel::train(&reg, &rows(), &TrainOptions { smote: true, ..TrainOptions::new("gnb") }).unwrap();
        let mut doc = m.to_json();
        doc["version"] = 99.into();
        assert!(matches!(TrainedModel::from_json(&reg, doc), Err(MlError::Model(_))));
    }
}
