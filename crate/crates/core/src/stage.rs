//! On-disk formats of the pipeline stages.
//!
//! CSV stage files start with one comment line naming the stage, the format
//! version and the hash of the configuration that produced them; JSON
//! outputs carry the same three fields at top level.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::features::FeatureRow;
use crate::ingest::{to_cells, typify, AisRecord, Column, RawReader};
use crate::segmentation::Trajectory;

pub const STAGE_VERSION: u32 = 1;
const MAGIC: &str = "#aisclass";

#[derive(Debug, thiserror::Error)]
pub enum StageError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: no stage header line; expected a {expected} file")]
    MissingHeader { path: PathBuf, expected: &'static str },
    #[error("{path}: is a {found} file, expected {expected}")]
    WrongStage { path: PathBuf, expected: &'static str, found: String },
    #[error("{path}: {stage} format version {found}, but this build reads version {expected}")]
    Version { path: PathBuf, stage: String, expected: u32, found: u32 },
    #[error("{path}: line {line}: {reason}")]
    Corrupt { path: PathBuf, line: u64, reason: String },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> StageError + '_ {
    move |source| StageError::Io { path: path.to_path_buf(), source }
}

fn corrupt(path: &Path, line: u64, reason: impl ToString) -> StageError {
    StageError::Corrupt {
        path: path.to_path_buf(),
        line,
        reason: reason.to_string(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Cleaned,
    Trajectories,
    Features,
    Backfill,
    CleanReport,
    SegmentSummary,
    FeatureSkips,
    Split,
    Cv,
    Eval,
    Trips,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Cleaned => "cleaned",
            Stage::Trajectories => "trajectories",
            Stage::Features => "features",
            Stage::Backfill => "backfill",
            Stage::CleanReport => "clean-report",
            Stage::SegmentSummary => "segment-summary",
            Stage::FeatureSkips => "feature-skips",
            Stage::Split => "split",
            Stage::Cv => "cv",
            Stage::Eval => "eval",
            Stage::Trips => "trips",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageHeader {
    pub schema: String,
    pub version: u32,
    pub config_hash: String,
}

impl StageHeader {
    pub fn new(stage: Stage, config_hash: &str) -> Self {
        Self {
            schema: stage.name().to_string(),
            version: STAGE_VERSION,
            config_hash: config_hash.to_string(),
        }
    }

    pub fn line(&self) -> String {
        format!("{MAGIC} stage={} version={} config={}", self.schema, self.version, self.config_hash)
    }

    pub fn parse_line(line: &str) -> Option<Self> {
        let rest = line.trim().strip_prefix(MAGIC)?;
        let mut schema = None;
        let mut version = None;
        let mut config_hash = String::new();
        for part in rest.split_whitespace() {
            match part.split_once('=')? {
                ("stage", v) => schema = Some(v.to_string()),
                ("version", v) => version = v.parse().ok(),
                ("config", v) => config_hash = v.to_string(),
                _ => {}
            }
        }
        Some(Self {
            schema: schema?,
            version: version?,
            config_hash,
        })
    }

    fn check(&self, path: &Path, expected: Stage) -> Result<(), StageError> {
        if self.schema != expected.name() {
            return Err(StageError::WrongStage {
                path: path.to_path_buf(),
                expected: expected.name(),
                found: self.schema.clone(),
            });
        }
        if self.version != STAGE_VERSION {
            return Err(StageError::Version {
                path: path.to_path_buf(),
                stage: self.schema.clone(),
                expected: STAGE_VERSION,
                found: self.version,
            });
        }
        Ok(())
    }
}

pub(crate) fn create(path: &Path) -> Result<BufWriter<File>, StageError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io_err(path))?;
    }
    File::create(path).map(BufWriter::new).map_err(io_err(path))
}

/// Opens a CSV stage file and checks its header line.
fn open_csv(path: &Path, stage: Stage) -> Result<(StageHeader, BufReader<File>), StageError> {
    let mut r = BufReader::new(File::open(path).map_err(io_err(path))?);
    let mut first = String::new();
    r.read_line(&mut first).map_err(io_err(path))?;
    let header = StageHeader::parse_line(&first).ok_or(StageError::MissingHeader {
        path: path.to_path_buf(),
        expected: stage.name(),
    })?;
    header.check(path, stage)?;
    Ok((header, r))
}

fn record_header(with_trip: bool) -> Vec<&'static str> {
    let mut h: Vec<&str> = if with_trip { vec!["trip_id"] } else { Vec::new() };
    h.extend(Column::ALL.iter().map(|c| c.canonical()));
    h
}

fn write_record_csv<'a, I>(path: &Path, stage: Stage, hash: &str, rows: I, with_trip: bool) -> Result<(), StageError>
where
    I: IntoIterator<Item = (Option<u64>, &'a AisRecord)>,
{
    let mut w = create(path)?;
    writeln!(w, "{}", StageHeader::new(stage, hash).line()).map_err(io_err(path))?;
    let mut csv = csv::Writer::from_writer(w);
    let to_io = |e: csv::Error| io_err(path)(e.into());
    csv.write_record(record_header(with_trip)).map_err(to_io)?;
    for (trip, rec) in rows {
        let mut cells = Vec::with_capacity(27);
        if with_trip {
            cells.push(trip.unwrap_or(0).to_string());
        }
        cells.extend(to_cells(rec));
        csv.write_record(&cells).map_err(to_io)?;
    }
    csv.flush().map_err(io_err(path))
}

fn read_record_csv<R: Read>(path: &Path, r: R, with_trip: bool) -> Result<Vec<(Option<u64>, AisRecord)>, StageError> {
    let extras: &[&str] = if with_trip { &["trip_id"] } else { &[] };
    let reader = RawReader::with_extras(r, extras).map_err(|e| corrupt(path, 2, e))?;
    let mut out = Vec::new();
    for item in reader {
        let raw = item.map_err(|e| corrupt(path, e.line + 1, e.reason))?;
        let rec = typify(&raw).map_err(|e| corrupt(path, e.line + 1, e.reason))?;
        let trip = if with_trip {
            let cell = raw.extras[0].as_deref().unwrap_or("");
            Some(cell.parse::<u64>().map_err(|_| corrupt(path, raw.line + 1, format!("bad trip_id {cell:?}")))?)
        } else {
            None
        };
        out.push((trip, rec));
    }
    Ok(out)
}

pub fn write_cleaned(path: &Path, hash: &str, records: &[AisRecord]) -> Result<(), StageError> {
    write_record_csv(path, Stage::Cleaned, hash, records.iter().map(|r| (None, r)), false)
}

pub fn read_cleaned(path: &Path) -> Result<(StageHeader, Vec<AisRecord>), StageError> {
    let (h, r) = open_csv(path, Stage::Cleaned)?;
    let rows = read_record_csv(path, r, false)?;
    Ok((h, rows.into_iter().map(|(_, rec)| rec).collect()))
}

pub fn write_trajectories(path: &Path, hash: &str, trips: &[Trajectory]) -> Result<(), StageError> {
    let rows = trips.iter().flat_map(|t| t.records.iter().map(move |r| (Some(t.trip_id), r)));
    write_record_csv(path, Stage::Trajectories, hash, rows, true)
}

pub fn read_trajectories(path: &Path) -> Result<(StageHeader, Vec<Trajectory>), StageError> {
    let (h, r) = open_csv(path, Stage::Trajectories)?;
    let mut trips: Vec<Trajectory> = Vec::new();
    for (trip, rec) in read_record_csv(path, r, true)? {
        let id = trip.expect("trip column requested");
        match trips.last_mut() {
            Some(t) if t.trip_id == id => {
                t.trip_end = rec.timestamp;
                t.records.push(rec);
            }
            _ => trips.push(Trajectory {
                trip_id: id,
                mmsi: rec.mmsi,
                trip_start: rec.timestamp,
                trip_end: rec.timestamp,
                records: vec![rec],
            }),
        }
    }
    Ok((h, trips))
}

pub fn write_features(path: &Path, hash: &str, rows: &[FeatureRow]) -> Result<(), StageError> {
    let mut w = create(path)?;
    writeln!(w, "{}", StageHeader::new(Stage::Features, hash).line()).map_err(io_err(path))?;
    let mut csv = csv::Writer::from_writer(w);
    for r in rows {
        csv.serialize(r).map_err(|e| io_err(path)(e.into()))?;
    }
    if rows.is_empty() {
        // Keep the column header even for an empty table.
        let names: Vec<String> = feature_columns();
        csv.write_record(&names).map_err(|e| io_err(path)(e.into()))?;
    }
    csv.flush().map_err(io_err(path))
}

/// Column names of the feature table.
pub fn feature_columns() -> Vec<String> {
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        let probe = FeatureRow::default();
        w.serialize(&probe).expect("in-memory write");
        w.flush().expect("in-memory write");
    }
    let text = String::from_utf8(buf).expect("utf-8");
    text.lines().next().unwrap_or("").split(',').map(str::to_string).collect()
}

pub fn read_features(path: &Path) -> Result<(StageHeader, Vec<FeatureRow>), StageError> {
    let (h, r) = open_csv(path, Stage::Features)?;
    let mut csv = csv::Reader::from_reader(r);
    let mut rows = Vec::new();
    for (i, row) in csv.deserialize::<FeatureRow>().enumerate() {
        rows.push(row.map_err(|e| corrupt(path, i as u64 + 3, e))?);
    }
    Ok((h, rows))
}

#[derive(Debug, Serialize, Deserialize)]
struct Envelope<T> {
    #[serde(flatten)]
    header: StageHeader,
    #[serde(flatten)]
    body: T,
}

pub fn write_json<T: Serialize>(path: &Path, stage: Stage, hash: &str, body: &T) -> Result<(), StageError> {
    let env = Envelope {
        header: StageHeader::new(stage, hash),
        body,
    };
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, &env).map_err(|e| io_err(path)(e.into()))?;
    writeln!(w).map_err(io_err(path))?;
    w.flush().map_err(io_err(path))
}

pub fn read_json<T: DeserializeOwned>(path: &Path, stage: Stage) -> Result<(StageHeader, T), StageError> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| corrupt(path, e.line() as u64, e))?;
    let header: StageHeader = serde_json::from_value(value.clone()).map_err(|_| StageError::MissingHeader {
        path: path.to_path_buf(),
        expected: stage.name(),
    })?;
    header.check(path, stage)?;
    let body = serde_json::from_value(value).map_err(|e| corrupt(path, 0, e))?;
    Ok((header, body))
}
