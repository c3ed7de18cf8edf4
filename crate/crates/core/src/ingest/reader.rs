//! Streaming reader for decoded AIS CSV files.

use std::io::Read;

use super::record::{RawRecord, RowError};
use super::schema::{Column, HeaderMap};
use super::IngestError;

/// Iterator over the data rows of one CSV stream. Malformed rows come out as
/// `Err(RowError)` with their 1-based line number; the iterator keeps going.
pub struct RawReader<R: Read> {
    inner: csv::Reader<R>,
    header: HeaderMap,
    record: csv::StringRecord,
    done: bool,
}

impl<R: Read> RawReader<R> {
    pub fn new(input: R) -> Result<Self, IngestError> {
        Self::with_extras(input, &[])
    }

    /// Like [`RawReader::new`] but also carries the named extra columns.
    pub fn with_extras(input: R, extras: &[&str]) -> Result<Self, IngestError> {
        let mut inner = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .from_reader(input);
        let mut first = csv::StringRecord::new();
        if !inner.read_record(&mut first)? {
            return Err(IngestError::Schema {
                missing: Column::REQUIRED.iter().map(|c| c.canonical().to_string()).collect(),
            });
        }
        let cells: Vec<String> = first
            .iter()
            .map(|s| s.trim_start_matches('\u{feff}').to_string())
            .collect();
        let header = HeaderMap::resolve(&cells, extras).map_err(|missing| IngestError::Schema {
            missing: missing.iter().map(|c| c.canonical().to_string()).collect(),
        })?;
        Ok(Self {
            inner,
            header,
            record: csv::StringRecord::new(),
            done: false,
        })
    }

    pub fn header(&self) -> &HeaderMap {
        &self.header
    }
}

impl<R: Read> Iterator for RawReader<R> {
    type Item = Result<RawRecord, RowError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        loop {
            match self.inner.read_record(&mut self.record) {
                Ok(false) => return None,
                Ok(true) => {}
                Err(e) => {
                    let line = e.position().map(|p| p.line()).unwrap_or(0);
                    if matches!(e.kind(), csv::ErrorKind::Io(_)) {
                        self.done = true;
                    }
                    return Some(Err(RowError {
                        line,
                        reason: e.to_string(),
                    }));
                }
            }
            let line = self.record.position().map(|p| p.line()).unwrap_or(0);
            if self.record.len() == 1 && self.record.get(0).is_some_and(|s| s.trim().is_empty()) {
                continue;
            }
            if self.record.len() != self.header.width {
                return Some(Err(RowError {
                    line,
                    reason: format!(
                        "expected {} fields, found {}",
                        self.header.width,
                        self.record.len()
                    ),
                }));
            }
            let values = self
                .header
                .positions
                .iter()
                .map(|p| p.map(|i| self.record[i].to_string()).unwrap_or_default())
                .collect();
            let extras = self
                .header
                .extras
                .iter()
                .map(|p| p.map(|i| self.record[i].to_string()))
                .collect();
            return Some(Ok(RawRecord {
                line,
                values,
                extras,
            }));
        }
    }
}

/// Read a whole stream into memory: parsed rows plus row errors.
pub fn parse_csv<R: Read>(input: R) -> Result<(Vec<RawRecord>, Vec<RowError>), IngestError> {
    let mut rows = Vec::new();
    let mut errors = Vec::new();
    for item in RawReader::new(input)? {
        match item {
            Ok(r) => rows.push(r),
            Err(e) => errors.push(e),
        }
    }
    Ok((rows, errors))
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "# Timestamp,Type of mobile,MMSI,Latitude,Longitude,Navigational status,ROT,SOG,COG,Heading,IMO,Callsign,Name,Ship type,Cargo type,Width,Length,Type of position fixing device,Draught,Destination,ETA,Data source type,A,B,C,D";

    fn row(ts: &str, mmsi: u64) -> String {
        format!("{ts},Class A,{mmsi},55.2,14.9,Under way using engine,0,10.1,90.0,91,Unknown,OXAB2,SHIP,Cargo,,20,100,GPS,5.5,RONNE,,AIS,80,20,10,10")
    }

    #[test]
    fn well_formed_rows() {
        let text = format!(
            "{HEADER}\n{}\n{}\n{}\n",
            row("23/01/2025 00:00:01", 1),
            row("23/01/2025 00:00:02", 1),
            row("23/01/2025 00:00:03", 2)
        );
        let (rows, errors) = parse_csv(text.as_bytes()).unwrap();
        assert_eq!(rows.len(), 3);
        assert!(errors.is_empty());
        assert_eq!(rows[2].get(Column::Mmsi), "2");
        assert_eq!(rows[0].get(Column::Destination), "RONNE");
        assert_eq!(rows[0].line, 2);
    }

    #[test]
    fn short_row_is_reported_with_line() {
        let good = row("23/01/2025 00:00:01", 1);
        let short = good.rsplit_once(',').unwrap().0.to_string();
        let text = format!("{HEADER}\n{good}\n{short}\n{good}\n");
        let (rows, errors) = parse_csv(text.as_bytes()).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(errors.len(), 1);
        assert_eq!(errors[0].line, 3);
        assert!(errors[0].reason.contains("25"));
    }

    #[test]
    fn reordered_columns_match_by_name() {
        let text = "Longitude,MMSI,Timestamp,Latitude,SOG\n14.9,7,2025-01-23 00:00:01,55.2,3.5\n";
        let (rows, errors) = parse_csv(text.as_bytes()).unwrap();
        assert!(errors.is_empty());
        assert_eq!(rows[0].get(Column::Latitude), "55.2");
        assert_eq!(rows[0].get(Column::Sog), "3.5");
        assert_eq!(rows[0].get(Column::Cog), "");
    }

    #[test]
    fn missing_required_column_is_fatal() {
        let err = RawReader::new("Timestamp,MMSI,Latitude\n".as_bytes()).err().unwrap();
        match err {
            IngestError::Schema { missing } => assert_eq!(missing, vec!["longitude"]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn extras_are_carried() {
        let text = "timestamp,mmsi,latitude,longitude,trip_id\n2025-01-23 00:00:01,7,55,14,12\n";
        let rows: Vec<_> = RawReader::with_extras(text.as_bytes(), &["trip_id", "absent"])
            .unwrap()
            .collect::<Result<_, _>>()
            .unwrap();
        assert_eq!(rows[0].extras, vec![Some("12".to_string()), None]);
    }
}
