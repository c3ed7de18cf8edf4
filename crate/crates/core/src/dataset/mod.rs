//! From feature rows to model matrices: class filtering, encoding, splits,
//! folds, scaling and oversampling.

mod codec;
mod folds;
mod scale;
mod smote;
mod split;

use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use codec::{LabelCodec, SHIP_CLASSES};
pub use folds::{stratified_kfold, FoldPlan};
pub use scale::Standardizer;
pub use smote::{smote, SmoteOutput};
pub use split::{grouped_split, SplitPlan};

use crate::features::{FeatureRow, MODEL_FEATURES};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum DatasetError {
    #[error("no usable rows")]
    Empty,
    #[error("test fraction {0} is outside (0, 1)")]
    BadFraction(f64),
    #[error("MMSI {mmsi} owns {rows} of {total} rows; no grouped split is possible")]
    DominantGroup { mmsi: u64, rows: usize, total: usize },
    #[error("fold count must be at least 2, got {0}")]
    BadFoldCount(usize),
    #[error("class {class} has {count} rows but {needed} folds were requested")]
    ClassTooSmall { class: usize, count: usize, needed: usize },
    #[error("SMOTE needs at least 2 rows in class {class}")]
    SmoteSingleton { class: usize },
    #[error("SMOTE neighbour count must be positive")]
    BadNeighbourCount,
}

/// Where oversampling happens relative to cross-validation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SmoteMode {
    /// Inside each fold's training portion only.
    Fold,
    /// Once over the whole training set, before folds are drawn.
    Paper,
    Off,
}

impl SmoteMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SmoteMode::Fold => "fold",
            SmoteMode::Paper => "paper",
            SmoteMode::Off => "off",
        }
    }
}

impl FromStr for SmoteMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fold" => Ok(SmoteMode::Fold),
            "paper" => Ok(SmoteMode::Paper),
            "off" | "none" => Ok(SmoteMode::Off),
            other => Err(format!("unknown SMOTE mode {other:?} (expected fold, paper or off)")),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrepareCounts {
    pub rows_in: usize,
    pub other_class: usize,
    pub missing_features: usize,
    pub rows_out: usize,
}

fn has_all_features(row: &FeatureRow) -> bool {
    row.cargo_type.is_some()
        && MODEL_FEATURES
            .iter()
            .filter_map(|f| row.numeric(f))
            .all(f64::is_finite)
}

/// Keep rows of the five modelled classes that have every model feature.
pub fn prepare(rows: Vec<FeatureRow>) -> Result<(Vec<FeatureRow>, PrepareCounts), DatasetError> {
    let classes = LabelCodec::ship_classes();
    let mut counts = PrepareCounts {
        rows_in: rows.len(),
        ..Default::default()
    };
    let kept: Vec<FeatureRow> = rows
        .into_iter()
        .filter(|r| {
            if !r.ship_type.as_deref().is_some_and(|t| classes.encode(t).is_some()) {
                counts.other_class += 1;
                false
            } else if !has_all_features(r) {
                counts.missing_features += 1;
                false
            } else {
                true
            }
        })
        .collect();
    counts.rows_out = kept.len();
    if kept.is_empty() {
        return Err(DatasetError::Empty);
    }
    Ok((kept, counts))
}

/// Maps feature rows to numeric vectors in `MODEL_FEATURES` order. The two
/// categorical columns are label-encoded; a category unseen at fit time gets
/// the code one past the last known one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureEncoder {
    pub cargo_types: LabelCodec,
    pub mobile_types: LabelCodec,
}

impl FeatureEncoder {
    pub fn fit(rows: &[FeatureRow]) -> Self {
        Self {
            cargo_types: LabelCodec::fit(rows.iter().filter_map(|r| r.cargo_type.as_deref())),
            mobile_types: LabelCodec::fit(rows.iter().map(|r| r.mobile_type.as_str())),
        }
    }

    fn code(codec: &LabelCodec, value: Option<&str>) -> f64 {
        value.and_then(|v| codec.encode(v)).unwrap_or(codec.len()) as f64
    }

    pub fn encode_row(&self, row: &FeatureRow) -> Vec<f64> {
        MODEL_FEATURES
            .iter()
            .map(|&f| match f {
                "cargo_type" => Self::code(&self.cargo_types, row.cargo_type.as_deref()),
                "mobile_type" => Self::code(&self.mobile_types, Some(&row.mobile_type)),
                other => row.numeric(other).expect("model feature is numeric"),
            })
            .collect()
    }

    pub fn encode(&self, rows: &[FeatureRow]) -> Vec<Vec<f64>> {
        rows.iter().map(|r| self.encode_row(r)).collect()
    }
}

/// Class codes for rows already passed through [`prepare`].
pub fn labels(rows: &[FeatureRow], codec: &LabelCodec) -> Vec<usize> {
    rows.iter()
        .map(|r| {
            r.ship_type
                .as_deref()
                .and_then(|t| codec.encode(t))
                .expect("prepared row has a known class")
        })
        .collect()
}

/// Rows at `idx`, cloned.
pub fn take<T: Clone>(items: &[T], idx: &[usize]) -> Vec<T> {
    idx.iter().map(|&i| items[i].clone()).collect()
}

#[cfg(test)]
pub(crate) mod testutil {
    use crate::features::FeatureRow;

    pub fn row(mmsi: u64, ship_type: Option<&str>, sog: f64) -> FeatureRow {
        FeatureRow {
            mmsi,
            trip_id: 0,
            trip_start: 0,
            trip_end: 3600,
            ship_type: ship_type.map(str::to_string),
            cargo_type: Some("No additional information".into()),
            callsign: None,
            name: None,
            destination: None,
            trip_duration_sec: 3600.0,
            n_positions: 20,
            trajectory_length_km: 10.0,
            endpoint_distance_km: 9.0,
            directness_ratio: 0.9,
            min_lat: 55.0,
            max_lat: 55.1,
            min_lon: 12.0,
            max_lon: 12.1,
            lat_span: 0.1,
            lon_span: 0.1,
            sog_min: sog,
            sog_max: sog,
            sog_mean: sog,
            sog_median: sog,
            sog_std: 0.0,
            cog_min: 90.0,
            cog_max: 90.0,
            cog_mean: 90.0,
            cog_median: 90.0,
            cog_std: 0.0,
            init_cos: 0.0,
            init_sin: 1.0,
            length_m: 100.0,
            width_m: 20.0,
            naive_perimeter: 240.0,
            naive_area: 2000.0,
            aspect_ratio: 5.0,
            shape_complexity: 7.2,
            bridge_position_ratio: 0.8,
            mobile_type: "Class A".into(),
            total_km2: 70.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::testutil::row;
    use super::*;

    #[test]
    fn prepare_filters_and_counts() {
        let mut no_cargo = row(3, Some("Cargo"), 12.0);
        no_cargo.cargo_type = None;
        let rows = vec![
            row(1, Some("Cargo"), 12.0),
            row(2, Some("Military"), 20.0),
            no_cargo,
            row(4, None, 8.0),
            row(5, Some("Tanker"), 11.0),
        ];
        let (kept, counts) = prepare(rows).unwrap();
        assert_eq!(kept.iter().map(|r| r.mmsi).collect::<Vec<_>>(), vec![1, 5]);
        assert_eq!(
            counts,
            PrepareCounts { rows_in: 5, other_class: 2, missing_features: 1, rows_out: 2 }
        );
        assert_eq!(prepare(vec![row(2, Some("Military"), 1.0)]), Err(DatasetError::Empty));
    }

    #[test]
    fn encoder_handles_unseen_categories() {
        let rows = vec![row(1, Some("Cargo"), 12.0), row(2, Some("HSC"), 30.0)];
        let enc = FeatureEncoder::fit(&rows);
        let x = enc.encode(&rows);
        assert_eq!(x[0].len(), MODEL_FEATURES.len());
        assert_eq!(x[0][0], 0.0);
        assert_eq!(x[1][14], 30.0);
        let mut other = row(3, Some("Cargo"), 1.0);
        other.cargo_type = Some("Hazardous category A".into());
        other.mobile_type = "Class B".into();
        let v = enc.encode_row(&other);
        assert_eq!((v[0], v[29]), (1.0, 1.0));
        assert_eq!(labels(&rows, &LabelCodec::ship_classes()), vec![0, 2]);
    }

    #[test]
    fn smote_mode_parses() {
        assert_eq!("Paper".parse::<SmoteMode>(), Ok(SmoteMode::Paper));
        assert!("both".parse::<SmoteMode>().is_err());
    }
}
