//! Run configuration: a plain `key = value` file whose values can be
//! overridden one by one.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::dataset::SmoteMode;
use crate::geo::{BoundingBox, PolygonRing};
use crate::ingest::CleaningRules;
use crate::ml::{parse_grid, Grid};
use crate::segmentation::SegmentationParams;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected key = value, got {text:?}")]
    Syntax { line: usize, text: String },
    #[error("unknown configuration key {0:?}")]
    UnknownKey(String),
    #[error("bad value {value:?} for {key}: {reason}")]
    BadValue { key: String, value: String, reason: String },
    #[error("cannot read {path}: {reason}")]
    Read { path: PathBuf, reason: String },
}

#[derive(Debug, Clone, PartialEq)]
pub enum AoiSource {
    /// The bundled Baltic polygon.
    Builtin,
    Disabled,
    File(PathBuf),
}

/// Every tunable of the pipeline, with defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub aoi: AoiSource,
    pub bbox: BoundingBox,
    pub max_sog: f64,
    pub drop_zero_sog: bool,
    pub segmentation: SegmentationParams,
    pub test_frac: f64,
    pub seed: u64,
    pub folds: usize,
    pub smote: SmoteMode,
    pub smote_k: usize,
    /// Grid overrides per model family, in `parse_grid` syntax.
    pub grids: BTreeMap<String, String>,
    pub permutation_repeats: usize,
    pub log_level: String,
    pub threads: Option<usize>,
    /// Default stage file locations (`path.cleaned = ...`).
    pub paths: BTreeMap<String, PathBuf>,
}

pub const PATH_KEYS: [(&str, &str); 9] = [
    ("cleaned", "cleaned.csv"),
    ("clean_report", "clean_report.json"),
    ("trajectories", "trajectories.csv"),
    ("features", "features.csv"),
    ("split", "split.json"),
    ("cv", "cv.json"),
    ("model", "model.json"),
    ("eval", "eval.json"),
    ("geojson", "trips.geojson"),
];

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            aoi: AoiSource::Builtin,
            bbox: BoundingBox::DENMARK,
            max_sog: 80.0,
            drop_zero_sog: true,
            segmentation: SegmentationParams::default(),
            test_frac: 0.2,
            seed: 42,
            folds: 5,
            smote: SmoteMode::Fold,
            smote_k: 5,
            grids: BTreeMap::new(),
            permutation_repeats: 10,
            log_level: "info".into(),
            threads: None,
            paths: PATH_KEYS.iter().map(|(k, v)| (k.to_string(), PathBuf::from(v))).collect(),
        }
    }
}

fn bad(key: &str, value: &str, reason: impl ToString) -> ConfigError {
    ConfigError::BadValue {
        key: key.to_string(),
        value: value.to_string(),
        reason: reason.to_string(),
    }
}

fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    value.parse::<T>().map_err(|e| bad(key, value, e))
}

fn positive(key: &str, value: &str) -> Result<f64, ConfigError> {
    let v: f64 = num(key, value)?;
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(bad(key, value, "must be a positive number"))
    }
}

fn boolean(key: &str, value: &str) -> Result<bool, ConfigError> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(bad(key, value, "expected true or false")),
    }
}

/// `minLon,minLat,maxLon,maxLat`.
pub fn parse_bbox(value: &str) -> Result<BoundingBox, String> {
    let v: Vec<f64> = value
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|e| e.to_string()))
        .collect::<Result<_, _>>()?;
    if v.len() != 4 {
        return Err(format!("expected 4 numbers, got {}", v.len()));
    }
    BoundingBox::new(v[1], v[0], v[3], v[2]).map_err(|e| e.to_string())
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let value = value.trim();
        let key = key.trim();
        let seg = &mut self.segmentation;
        match key {
            "aoi" => {
                self.aoi = match value {
                    "builtin" | "baltic" => AoiSource::Builtin,
                    "none" | "off" => AoiSource::Disabled,
                    path => AoiSource::File(PathBuf::from(path)),
                }
            }
            "bbox" => self.bbox = parse_bbox(value).map_err(|e| bad(key, value, e))?,
            "max_sog" => self.max_sog = positive(key, value)?,
            "drop_zero_sog" => self.drop_zero_sog = boolean(key, value)?,
            "stop_radius_m" => seg.stop_radius_m = positive(key, value)?,
            "stop_min_s" => seg.stop_min_duration_s = positive(key, value)? as i64,
            "min_trip_km" => seg.min_trip_length_km = positive(key, value)?,
            "min_trip_points" => seg.min_trip_points = num::<usize>(key, value)?.max(1),
            "test_frac" => {
                let f: f64 = num(key, value)?;
                if !(f > 0.0 && f < 1.0) {
                    return Err(bad(key, value, "must lie strictly between 0 and 1"));
                }
                self.test_frac = f;
            }
            "seed" => self.seed = num(key, value)?,
            "folds" => {
                self.folds = num(key, value)?;
                if self.folds < 2 {
                    return Err(bad(key, value, "need at least 2 folds"));
                }
            }
            "smote" => self.smote = value.parse().map_err(|e: String| bad(key, value, e))?,
            "smote_k" => {
                self.smote_k = num(key, value)?;
                if self.smote_k == 0 {
                    return Err(bad(key, value, "must be positive"));
                }
            }
            "permutation_repeats" => self.permutation_repeats = num::<usize>(key, value)?.max(1),
            "log_level" => {
                if !["error", "warn", "info", "debug", "trace", "off"].contains(&value) {
                    return Err(bad(key, value, "expected error, warn, info, debug, trace or off"));
                }
                self.log_level = value.to_string();
            }
            "threads" => {
                let t: usize = num(key, value)?;
                self.threads = (t > 0).then_some(t);
            }
            _ => {
                if let Some(family) = key.strip_prefix("grid.") {
                    parse_grid(value).map_err(|e| bad(key, value, e))?;
                    self.grids.insert(family.to_string(), value.to_string());
                } else if let Some(name) = key.strip_prefix("path.") {
                    if !PATH_KEYS.iter().any(|(k, _)| *k == name) {
                        return Err(ConfigError::UnknownKey(key.to_string()));
                    }
                    self.paths.insert(name.to_string(), PathBuf::from(value));
                } else {
                    return Err(ConfigError::UnknownKey(key.to_string()));
                }
            }
        }
        Ok(())
    }

    /// Parses `key = value` lines; `#` starts a comment.
    pub fn from_text(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: i + 1,
                text: raw.to_string(),
            })?;
            cfg.set(k, v)?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Read {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
        Self::from_text(&text)
    }

    /// The settings that influence stage outputs, one `key = value` per
    /// line in fixed order. Paths, threads and logging are left out.
    pub fn canonical_text(&self) -> String {
        let aoi = match &self.aoi {
            AoiSource::Builtin => "builtin".to_string(),
            AoiSource::Disabled => "none".to_string(),
            AoiSource::File(p) => p.display().to_string(),
        };
        let b = &self.bbox;
        let s = &self.segmentation;
        let mut lines = vec![
            format!("aoi = {aoi}"),
            format!("bbox = {},{},{},{}", b.min_lon, b.min_lat, b.max_lon, b.max_lat),
            format!("max_sog = {}", self.max_sog),
            format!("drop_zero_sog = {}", self.drop_zero_sog),
            format!("stop_radius_m = {}", s.stop_radius_m),
            format!("stop_min_s = {}", s.stop_min_duration_s),
            format!("min_trip_km = {}", s.min_trip_length_km),
            format!("min_trip_points = {}", s.min_trip_points),
            format!("test_frac = {}", self.test_frac),
            format!("seed = {}", self.seed),
            format!("folds = {}", self.folds),
            format!("smote = {}", self.smote.as_str()),
            format!("smote_k = {}", self.smote_k),
            format!("permutation_repeats = {}", self.permutation_repeats),
        ];
        lines.extend(self.grids.iter().map(|(k, v)| format!("grid.{k} = {v}")));
        lines.join("\n") + "\n"
    }

    /// First 16 hex digits of the SHA-256 of [`RunConfig::canonical_text`].
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical_text().as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    pub fn cleaning_rules(&self) -> Result<CleaningRules, ConfigError> {
        let aoi = match &self.aoi {
            AoiSource::Builtin => Some(PolygonRing::baltic_aoi()),
            AoiSource::Disabled => None,
            AoiSource::File(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Read {
                    path: path.clone(),
                    reason: e.to_string(),
                })?;
                Some(PolygonRing::parse(&text).map_err(|e| bad("aoi", &path.display().to_string(), e))?)
            }
        };
        Ok(CleaningRules {
            bbox: self.bbox,
            aoi,
            max_sog_knots: self.max_sog,
            drop_zero_sog: self.drop_zero_sog,
            ..CleaningRules::default()
        })
    }

    /// The configured grid for `family`, if overridden.
    pub fn grid(&self, family: &str) -> Option<Grid> {
        self.grids.get(family).map(|g| parse_grid(g).expect("validated when set"))
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.paths.get(name).cloned().unwrap_or_else(|| PathBuf::from(name))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_overrides() {
        let cfg = RunConfig::from_text(
            "# comment\nseed = 7\nsmote = paper\nbbox = 10,54,16,58\ngrid.rf = n_estimators=10;max_depth=none,5\npath.model = m.json\n",
        )
        .unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.smote, SmoteMode::Paper);
        assert_eq!((cfg.bbox.min_lon, cfg.bbox.max_lat), (10.0, 58.0));
        assert_eq!(cfg.grid("rf").unwrap().len(), 2);
        assert_eq!(cfg.path("model"), PathBuf::from("m.json"));
        assert_eq!(cfg.folds, 5);
        assert_eq!(cfg.segmentation, SegmentationParams::default());
    }

    #[test]
    fn errors() {
        assert!(matches!(RunConfig::from_text("seed 7"), Err(ConfigError::Syntax { line: 1, .. })));
        assert!(matches!(RunConfig::from_text("sed = 7"), Err(ConfigError::UnknownKey(_))));
        assert!(matches!(RunConfig::from_text("test_frac = 1.5"), Err(ConfigError::BadValue { .. })));
        assert!(matches!(RunConfig::from_text("smote = both"), Err(ConfigError::BadValue { .. })));
    }

    #[test]
    fn hash_tracks_relevant_settings_only() {
        let a = RunConfig::default();
        let mut b = a.clone();
        b.set("log_level", "debug").unwrap();
        b.set("path.cleaned", "x.csv").unwrap();
        assert_eq!(a.hash(), b.hash());
        b.set("seed", "1").unwrap();
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 16);
    }
}
