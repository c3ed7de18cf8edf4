//! Stage-level entry points: each reads its input files, runs one step of
//! the pipeline and writes its outputs.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::File;
use std::io::{BufReader, Read, Write};
use std::path::{Path, PathBuf};

use log::{info, warn};
use serde::{Deserialize, Serialize};

use crate::config::{ConfigError, RunConfig};
use crate::dataset::{self, grouped_split, prepare, take, DatasetError, LabelCodec, PrepareCounts, SmoteMode, SplitPlan};
use crate::features::{featurize, FeatureRow, SkipCounts, MODEL_FEATURES};
use crate::ingest::{
    fill_static, format_timestamp, to_cells, typify, AisRecord, CleaningReport, CleaningRules, Cleaner, Column,
    IngestError, RawReader,
};
use crate::ml::{
    evaluate, grid_search, permutation_importance, roc_auc_ovr, CvResult, CvSetup, EvalReport, Grid, MlError, Params,
    Registry, TrainOptions, TrainedModel,
};
use crate::segmentation::{group_tracks, segment_tracks, SegmentationError, SegmentationParams, SegmentationSummary, Trajectory};
use crate::stage::{self, Stage, StageError};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Stage(#[from] StageError),
    #[error("{path}: {source}")]
    Ingest { path: PathBuf, source: IngestError },
    #[error("{path}: columns differ from those of {first}")]
    SchemaMismatch { path: PathBuf, first: PathBuf },
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Ml(#[from] MlError),
    #[error(transparent)]
    Segmentation(#[from] SegmentationError),
    #[error("{0}")]
    Input(String),
}

impl PipelineError {
    /// 2 for invalid configuration, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_)
            | PipelineError::Segmentation(SegmentationError::NonPositive(_))
            | PipelineError::Ml(MlError::Param(_) | MlError::UnknownFamily(_) | MlError::EmptyGrid) => 2,
            _ => 1,
        }
    }
}

fn warn_on_hash(path: &Path, found: &str, cfg: &RunConfig) {
    if found != cfg.hash() {
        warn!(
            "{} was produced with configuration {found}; the current configuration is {}",
            path.display(),
            cfg.hash()
        );
    }
}

fn is_blank_file(path: &Path) -> Result<bool, PipelineError> {
    let mut f = File::open(path).map_err(|e| StageError::Io { path: path.to_path_buf(), source: e })?;
    let mut buf = [0u8; 4096];
    let n = f.read(&mut buf).map_err(|e| StageError::Io { path: path.to_path_buf(), source: e })?;
    Ok(buf[..n].iter().all(|b| b.is_ascii_whitespace()))
}

/// Reads, types, cleans and static-fills one or more raw files.
///
/// Rows dropped by the cleaning rules still lend their voyage data to the
/// vessel's surviving rows. Output is in timestamp order.
pub fn clean_files(inputs: &[PathBuf], rules: &CleaningRules) -> Result<(Vec<AisRecord>, CleaningReport), PipelineError> {
    let mut cleaner = Cleaner::new(rules.clone());
    let mut first: Option<(PathBuf, Vec<Column>)> = None;
    let mut rows: Vec<(AisRecord, bool)> = Vec::new();
    for path in inputs {
        if is_blank_file(path)? {
            info!("{}: empty, skipped", path.display());
            continue;
        }
        let file = File::open(path).map_err(|e| StageError::Io { path: path.clone(), source: e })?;
        let reader = RawReader::new(BufReader::new(file)).map_err(|source| PipelineError::Ingest {
            path: path.clone(),
            source,
        })?;
        let sig = reader.header().signature();
        match &first {
            None => first = Some((path.clone(), sig)),
            Some((p, s)) if *s != sig => {
                return Err(PipelineError::SchemaMismatch {
                    path: path.clone(),
                    first: p.clone(),
                })
            }
            Some(_) => {}
        }
        let mut bad_rows = 0usize;
        for item in reader {
            let rec = match item.and_then(|raw| typify(&raw)) {
                Ok(r) => r,
                Err(e) => {
                    if bad_rows < 5 {
                        warn!("{}: {e}", path.display());
                    }
                    bad_rows += 1;
                    cleaner.note_parse_error();
                    continue;
                }
            };
            let kept = cleaner.check(&rec).is_none();
            if kept || !rec.static_info.is_empty() {
                rows.push((rec, kept));
            }
        }
        if bad_rows > 0 {
            warn!("{}: {bad_rows} malformed rows", path.display());
        }
    }
    rows.sort_by_key(|(r, _)| (r.mmsi, r.timestamp));
    for track in rows.chunk_by_mut(|a, b| a.0.mmsi == b.0.mmsi) {
        let mut recs: Vec<AisRecord> = track.iter().map(|(r, _)| r.clone()).collect();
        fill_static(&mut recs);
        for (slot, filled) in track.iter_mut().zip(recs) {
            slot.0 = filled;
        }
    }
    let mut out: Vec<AisRecord> = rows.into_iter().filter(|(_, kept)| *kept).map(|(r, _)| r).collect();
    out.sort_by_key(|r| (r.timestamp, r.mmsi));
    Ok((out, cleaner.report()))
}

pub fn cmd_clean(
    inputs: &[PathBuf],
    out: &Path,
    report_out: Option<&Path>,
    cfg: &RunConfig,
) -> Result<CleaningReport, PipelineError> {
    let rules = cfg.cleaning_rules()?;
    let (records, report) = clean_files(inputs, &rules)?;
    stage::write_cleaned(out, &cfg.hash(), &records)?;
    if let Some(p) = report_out {
        stage::write_json(p, Stage::CleanReport, &cfg.hash(), &report)?;
    }
    info!(
        "clean: {} rows in, {} kept, {} dropped",
        report.rows_in,
        report.rows_out,
        report.dropped()
    );
    Ok(report)
}

pub fn segment_records(
    records: Vec<AisRecord>,
    params: &SegmentationParams,
) -> Result<(Vec<Trajectory>, SegmentationSummary), PipelineError> {
    params.validate()?;
    let tracks = group_tracks(records);
    Ok(segment_tracks(&tracks, params))
}

pub fn cmd_segment(
    input: &Path,
    out: &Path,
    summary_out: Option<&Path>,
    cfg: &RunConfig,
) -> Result<SegmentationSummary, PipelineError> {
    let (h, records) = stage::read_cleaned(input)?;
    warn_on_hash(input, &h.config_hash, cfg);
    let (trips, summary) = segment_records(records, &cfg.segmentation)?;
    stage::write_trajectories(out, &cfg.hash(), &trips)?;
    if let Some(p) = summary_out {
        stage::write_json(p, Stage::SegmentSummary, &cfg.hash(), &summary)?;
    }
    info!("segment: {} tracks, {} trips", summary.tracks, summary.trips);
    Ok(summary)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSummary {
    pub trips: u64,
    pub rows: u64,
    pub skipped: SkipCounts,
}

pub fn cmd_featurize(
    input: &Path,
    out: &Path,
    skips_out: Option<&Path>,
    cfg: &RunConfig,
) -> Result<FeatureSummary, PipelineError> {
    let (h, trips) = stage::read_trajectories(input)?;
    warn_on_hash(input, &h.config_hash, cfg);
    let (rows, skipped) = featurize(&trips, false);
    stage::write_features(out, &cfg.hash(), &rows)?;
    let summary = FeatureSummary {
        trips: trips.len() as u64,
        rows: rows.len() as u64,
        skipped,
    };
    if let Some(p) = skips_out {
        stage::write_json(p, Stage::FeatureSkips, &cfg.hash(), &summary)?;
    }
    info!("featurize: {} of {} trips have complete features", rows.len(), trips.len());
    Ok(summary)
}

/// The split plan file: the plan over prepared rows plus how they were
/// obtained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitDoc {
    pub prepare: PrepareCounts,
    pub plan: SplitPlan,
}

fn read_prepared(features: &Path, cfg: &RunConfig) -> Result<(Vec<FeatureRow>, PrepareCounts), PipelineError> {
    let (h, rows) = stage::read_features(features)?;
    warn_on_hash(features, &h.config_hash, cfg);
    Ok(prepare(rows)?)
}

pub fn cmd_split(features: &Path, out: &Path, cfg: &RunConfig) -> Result<SplitDoc, PipelineError> {
    let (rows, counts) = read_prepared(features, cfg)?;
    let mmsis: Vec<u64> = rows.iter().map(|r| r.mmsi).collect();
    let plan = grouped_split(&mmsis, cfg.test_frac, cfg.seed)?;
    let doc = SplitDoc { prepare: counts, plan };
    stage::write_json(out, Stage::Split, &cfg.hash(), &doc)?;
    info!(
        "split: {} train rows ({} vessels), {} test rows ({} vessels)",
        doc.plan.train_rows.len(),
        doc.plan.train_mmsis.len(),
        doc.plan.test_rows.len(),
        doc.plan.test_mmsis.len()
    );
    Ok(doc)
}

/// Prepared rows divided according to a split file.
pub struct SplitRows {
    pub train: Vec<FeatureRow>,
    pub test: Vec<FeatureRow>,
}

pub fn load_split(features: &Path, split: &Path, cfg: &RunConfig) -> Result<SplitRows, PipelineError> {
    let (rows, _) = read_prepared(features, cfg)?;
    let (h, doc): (_, SplitDoc) = stage::read_json(split, Stage::Split)?;
    warn_on_hash(split, &h.config_hash, cfg);
    let n = doc.plan.train_rows.len() + doc.plan.test_rows.len();
    if n != rows.len() || doc.plan.train_rows.iter().chain(&doc.plan.test_rows).any(|&i| i >= rows.len()) {
        return Err(PipelineError::Input(format!(
            "{} covers {n} rows but {} has {} usable rows; re-run split",
            split.display(),
            features.display(),
            rows.len()
        )));
    }
    Ok(SplitRows {
        train: take(&rows, &doc.plan.train_rows),
        test: take(&rows, &doc.plan.test_rows),
    })
}

pub fn cv_setup(cfg: &RunConfig) -> CvSetup {
    CvSetup {
        k: cfg.folds,
        seed: cfg.seed,
        smote: cfg.smote,
        smote_k: cfg.smote_k,
    }
}

/// Grid search on the training rows; writes the full result table.
pub fn cmd_tune(
    features: &Path,
    split: &Path,
    family: &str,
    out: &Path,
    cfg: &RunConfig,
    registry: &Registry,
) -> Result<CvResult, PipelineError> {
    let fam = registry.get(family)?;
    let grid: Grid = cfg.grid(family).unwrap_or_else(|| fam.default_grid());
    let data = load_split(features, split, cfg)?;
    let classes = LabelCodec::ship_classes();
    let encoder = dataset::FeatureEncoder::fit(&data.train);
    let x = encoder.encode(&data.train);
    let y = dataset::labels(&data.train, &classes);
    let result = grid_search(fam, &grid, &x, &y, classes.len(), &cv_setup(cfg))?;
    stage::write_json(out, Stage::Cv, &cfg.hash(), &result)?;
    let best = result.best_entry();
    info!(
        "tune {family}: best {} with CV accuracy {:.4} ± {:.4}",
        format_params(&best.params),
        best.mean,
        best.std
    );
    Ok(result)
}

pub fn format_params(p: &Params) -> String {
    if p.is_empty() {
        return "(defaults)".into();
    }
    p.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(" ")
}

/// Where training hyperparameters come from.
#[derive(Debug, Clone)]
pub enum ParamSource {
    Defaults,
    Given(Params),
    /// Best entry of a `tune` result file.
    Cv(PathBuf),
}

pub fn cmd_train(
    features: &Path,
    split: &Path,
    family: Option<&str>,
    params: &ParamSource,
    out: &Path,
    cfg: &RunConfig,
    registry: &Registry,
) -> Result<TrainedModel, PipelineError> {
    let (family, params, tuned) = match params {
        ParamSource::Defaults => (family.unwrap_or("rf").to_string(), Params::new(), false),
        ParamSource::Given(p) => (family.unwrap_or("rf").to_string(), p.clone(), false),
        ParamSource::Cv(path) => {
            let (_, cv): (_, CvResult) = stage::read_json(path, Stage::Cv)?;
            if let Some(f) = family.filter(|f| *f != cv.family) {
                return Err(PipelineError::Input(format!(
                    "{} holds a {} search but --model is {f}",
                    path.display(),
                    cv.family
                )));
            }
            let best = cv.best_entry().params.clone();
            (cv.family, best, true)
        }
    };
    let data = load_split(features, split, cfg)?;
    let opts = TrainOptions {
        family,
        params,
        smote: cfg.smote != SmoteMode::Off,
        smote_k: cfg.smote_k,
        seed: cfg.seed,
        tuned,
    };
    let mut model = TrainedModel::train(registry, &data.train, &opts)?;
    model.meta.config_hash = cfg.hash();
    write_model(out, &model)?;
    info!(
        "train: {} on {} rows ({}), SMOTE {}",
        opts.family,
        data.train.len(),
        format_params(&opts.params),
        if opts.smote { "on" } else { "off" }
    );
    Ok(model)
}

pub fn write_model(path: &Path, model: &TrainedModel) -> Result<(), PipelineError> {
    let mut w = stage::create(path)?;
    let io = |e: std::io::Error| StageError::Io { path: path.to_path_buf(), source: e };
    serde_json::to_writer_pretty(&mut w, &model.to_json()).map_err(|e| io(e.into()))?;
    writeln!(w).map_err(io)?;
    w.flush().map_err(io)?;
    Ok(())
}

pub fn read_model(path: &Path, registry: &Registry) -> Result<TrainedModel, PipelineError> {
    let text = std::fs::read_to_string(path).map_err(|e| StageError::Io { path: path.to_path_buf(), source: e })?;
    let doc: serde_json::Value = serde_json::from_str(&text).map_err(|e| StageError::Corrupt {
        path: path.to_path_buf(),
        line: e.line() as u64,
        reason: e.to_string(),
    })?;
    TrainedModel::from_json(registry, doc).map_err(|e| match e {
        MlError::Model(reason) => PipelineError::Stage(StageError::Corrupt {
            path: path.to_path_buf(),
            line: 0,
            reason,
        }),
        other => other.into(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceRow {
    pub feature: String,
    pub gini: Option<f64>,
    pub permutation_mean: f64,
    pub permutation_std: f64,
}

/// Test-set evaluation of one trained model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalDoc {
    pub family: String,
    pub tuned: bool,
    pub smote: bool,
    pub params: Params,
    pub classes: Vec<String>,
    pub report: EvalReport,
}

impl EvalDoc {
    pub fn model_name(&self) -> &str {
        match self.family.as_str() {
            "gnb" => "GaussianNB",
            "svm" => "SVM",
            "dt" => "Decision Tree",
            "rf" => "Random Forest",
            other => other,
        }
    }
}

pub fn cmd_evaluate(
    model_path: &Path,
    features: &Path,
    split: &Path,
    out: &Path,
    importance_out: Option<&Path>,
    cfg: &RunConfig,
    registry: &Registry,
) -> Result<EvalDoc, PipelineError> {
    let model = read_model(model_path, registry)?;
    let data = load_split(features, split, cfg)?;
    if data.test.is_empty() {
        return Err(PipelineError::Input("the test set is empty".into()));
    }
    let classes = &model.meta.classes;
    let truth = dataset::labels(&data.test, classes);
    let x = model.matrix(&data.test);
    let pred = model.classifier.predict(&x);
    let mut report = evaluate(&truth, &pred, classes.len());
    report.roc_auc = Some(roc_auc_ovr(&model.classifier.scores(&x), &truth, classes.len()));
    let doc = EvalDoc {
        family: model.meta.family.clone(),
        tuned: model.meta.tuned,
        smote: model.meta.smote,
        params: model.meta.params.clone(),
        classes: classes.classes().to_vec(),
        report,
    };
    stage::write_json(out, Stage::Eval, &cfg.hash(), &doc)?;
    if let Some(p) = importance_out {
        let gini = model.classifier.gini_importance();
        let perm = permutation_importance(model.classifier.as_ref(), &x, &truth, cfg.permutation_repeats, cfg.seed);
        let rows: Vec<ImportanceRow> = perm
            .iter()
            .map(|pi| ImportanceRow {
                feature: MODEL_FEATURES[pi.feature].to_string(),
                gini: gini.as_ref().map(|g| g[pi.feature]),
                permutation_mean: pi.mean,
                permutation_std: pi.std,
            })
            .collect();
        write_csv(p, &rows)?;
    }
    info!(
        "evaluate: {} accuracy {:.4}, macro F1 {:.4}",
        doc.model_name(),
        doc.report.accuracy,
        doc.report.macro_f1
    );
    Ok(doc)
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), PipelineError> {
    let w = stage::create(path)?;
    let mut csv = csv::Writer::from_writer(w);
    let io = |e: csv::Error| StageError::Io { path: path.to_path_buf(), source: e.into() };
    for r in rows {
        csv.serialize(r).map_err(io)?;
    }
    csv.flush().map_err(|e| StageError::Io { path: path.to_path_buf(), source: e })?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub model: String,
    pub tuning: String,
    pub smote: String,
    pub accuracy: String,
    pub precision: String,
    pub recall: String,
    pub f1: String,
}

fn pct(v: f64) -> String {
    format!("{:.2}", v * 100.0)
}

/// One row per evaluation file, in the order given; metrics in percent.
pub fn cmd_report(evals: &[PathBuf], out: &Path) -> Result<Vec<ReportRow>, PipelineError> {
    if evals.is_empty() {
        return Err(PipelineError::Input("report needs at least one evaluation file".into()));
    }
    let rows = evals
        .iter()
        .map(|p| {
            let (_, doc): (_, EvalDoc) = stage::read_json(p, Stage::Eval)?;
            Ok(ReportRow {
                model: doc.model_name().to_string(),
                tuning: if doc.tuned { "Tuned" } else { "Default" }.into(),
                smote: if doc.smote { "yes" } else { "no" }.into(),
                accuracy: pct(doc.report.accuracy),
                precision: pct(doc.report.macro_precision),
                recall: pct(doc.report.macro_recall),
                f1: pct(doc.report.macro_f1),
            })
        })
        .collect::<Result<Vec<_>, PipelineError>>()?;
    write_csv(out, &rows)?;
    Ok(rows)
}

fn mean_sog(t: &Trajectory) -> Option<f64> {
    let v: Vec<f64> = t.records.iter().filter_map(|r| r.sog_knots).collect();
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

/// Trips as a GeoJSON FeatureCollection of LineStrings.
pub fn trips_geojson(trips: &[Trajectory], predicted: &HashMap<u64, String>, cfg_hash: &str) -> serde_json::Value {
    let features: Vec<serde_json::Value> = trips
        .iter()
        .map(|t| {
            let coords: Vec<[f64; 2]> = t.records.iter().map(|r| [r.position.lon_deg, r.position.lat_deg]).collect();
            let truth = t.records.iter().find_map(|r| r.static_info.ship_type.clone());
            serde_json::json!({
                "type": "Feature",
                "geometry": { "type": "LineString", "coordinates": coords },
                "properties": {
                    "mmsi": t.mmsi,
                    "trip_id": t.trip_id,
                    "ship_type_true": truth,
                    "ship_type_pred": predicted.get(&t.trip_id),
                    "trip_start": format_timestamp(t.trip_start),
                    "trip_end": format_timestamp(t.trip_end),
                    "sog_mean": mean_sog(t),
                }
            })
        })
        .collect();
    let header = stage::StageHeader::new(Stage::Trips, cfg_hash);
    serde_json::json!({
        "type": "FeatureCollection",
        "schema": header.schema,
        "version": header.version,
        "config_hash": header.config_hash,
        "features": features,
    })
}

fn write_geojson(path: &Path, value: &serde_json::Value) -> Result<(), PipelineError> {
    let mut w = stage::create(path)?;
    let io = |e: std::io::Error| StageError::Io { path: path.to_path_buf(), source: e };
    serde_json::to_writer(&mut w, value).map_err(|e| io(e.into()))?;
    writeln!(w).map_err(io)?;
    w.flush().map_err(io)?;
    Ok(())
}

fn usable(row: &FeatureRow) -> bool {
    MODEL_FEATURES.iter().filter_map(|f| row.numeric(f)).all(f64::is_finite)
}

/// Predicted ship type per trip id, for every trip with usable features.
fn predict_trips(model: &TrainedModel, rows: &[FeatureRow]) -> HashMap<u64, usize> {
    let rows: Vec<FeatureRow> = rows.iter().filter(|r| usable(r)).cloned().collect();
    let pred = model.predict_rows(&rows);
    rows.iter().map(|r| r.trip_id).zip(pred).collect()
}

pub fn cmd_export_geojson(
    trajectories: &Path,
    out: &Path,
    model: Option<&Path>,
    cfg: &RunConfig,
    registry: &Registry,
) -> Result<usize, PipelineError> {
    let (h, trips) = stage::read_trajectories(trajectories)?;
    warn_on_hash(trajectories, &h.config_hash, cfg);
    let mut predicted = HashMap::new();
    if let Some(p) = model {
        let model = read_model(p, registry)?;
        let (rows, _) = featurize(&trips, false);
        predicted = predict_trips(&model, &rows)
            .into_iter()
            .map(|(trip, c)| (trip, model.class_name(c).to_string()))
            .collect();
    }
    write_geojson(out, &trips_geojson(&trips, &predicted, &cfg.hash()))?;
    Ok(trips.len())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackfillSummary {
    pub records: u64,
    pub trips: u64,
    /// Vessels with no ship type in any of their records.
    pub untyped_vessels: u64,
    pub classified_trips: u64,
    /// Predicted type per vessel.
    pub predictions: BTreeMap<u64, String>,
}

/// Classifies the trips of vessels that never report a ship type and
/// spreads the majority prediction to all of that vessel's records.
#[allow(clippy::too_many_arguments)]
pub fn cmd_backfill(
    model_path: &Path,
    inputs: &[PathBuf],
    out_csv: &Path,
    out_geojson: &Path,
    summary_out: Option<&Path>,
    cfg: &RunConfig,
    registry: &Registry,
) -> Result<BackfillSummary, PipelineError> {
    let model = read_model(model_path, registry)?;
    let (records, _) = clean_files(inputs, &cfg.cleaning_rules()?)?;
    let typed: HashSet<u64> = records
        .iter()
        .filter(|r| r.static_info.ship_type.is_some())
        .map(|r| r.mmsi)
        .collect();
    let untyped: HashSet<u64> = records.iter().map(|r| r.mmsi).filter(|m| !typed.contains(m)).collect();
    let (trips, _) = segment_records(records.clone(), &cfg.segmentation)?;
    let untyped_trips: Vec<Trajectory> = trips.iter().filter(|t| untyped.contains(&t.mmsi)).cloned().collect();
    let (rows, _) = featurize(&untyped_trips, false);
    let per_trip = predict_trips(&model, &rows);

    let n_classes = model.meta.classes.len();
    let mut votes: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
    for r in &rows {
        if let Some(&c) = per_trip.get(&r.trip_id) {
            votes.entry(r.mmsi).or_insert_with(|| vec![0; n_classes])[c] += 1;
        }
    }
    let predictions: BTreeMap<u64, String> = votes
        .iter()
        .map(|(m, v)| (*m, model.class_name(crate::ml::argmax_counts(v)).to_string()))
        .collect();
    if predictions.is_empty() {
        warn!("backfill: no classifiable trips among {} untyped vessels", untyped.len());
    }

    let w = stage::create(out_csv)?;
    let io = |e: std::io::Error| StageError::Io { path: out_csv.to_path_buf(), source: e };
    let mut w = w;
    writeln!(w, "{}", stage::StageHeader::new(Stage::Backfill, &cfg.hash()).line()).map_err(io)?;
    let mut csv = csv::Writer::from_writer(w);
    let cerr = |e: csv::Error| StageError::Io { path: out_csv.to_path_buf(), source: e.into() };
    let mut header: Vec<&str> = Column::ALL.iter().map(|c| c.canonical()).collect();
    header.push("ship_type_predicted");
    csv.write_record(&header).map_err(cerr)?;
    for r in &records {
        let mut cells = to_cells(r);
        let predicted = predictions.get(&r.mmsi);
        if let Some(t) = predicted {
            cells[Column::ShipType.index()] = t.clone();
        }
        cells.push(predicted.is_some().to_string());
        csv.write_record(&cells).map_err(cerr)?;
    }
    csv.flush().map_err(io)?;

    let trip_preds: HashMap<u64, String> = trips
        .iter()
        .filter_map(|t| predictions.get(&t.mmsi).map(|p| (t.trip_id, p.clone())))
        .collect();
    write_geojson(out_geojson, &trips_geojson(&trips, &trip_preds, &cfg.hash()))?;

    let summary = BackfillSummary {
        records: records.len() as u64,
        trips: trips.len() as u64,
        untyped_vessels: untyped.len() as u64,
        classified_trips: per_trip.len() as u64,
        predictions,
    };
    if let Some(p) = summary_out {
        stage::write_json(p, Stage::Backfill, &cfg.hash(), &summary)?;
    }
    info!(
        "backfill: {} of {} untyped vessels assigned a type",
        summary.predictions.len(),
        summary.untyped_vessels
    );
    Ok(summary)
}
