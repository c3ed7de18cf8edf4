//! Column names of the decoded AIS CSV and header matching.

use std::collections::HashMap;

/// The 26 raw columns, in the order they are written back out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Column {
    Timestamp,
    MobileType,
    Mmsi,
    Latitude,
    Longitude,
    NavStatus,
    Rot,
    Sog,
    Cog,
    Heading,
    Imo,
    Callsign,
    Name,
    ShipType,
    CargoType,
    Width,
    Length,
    PosFixDevice,
    Draught,
    Destination,
    Eta,
    DataSource,
    A,
    B,
    C,
    D,
}

impl Column {
    pub const ALL: [Column; 26] = [
        Column::Timestamp,
        Column::MobileType,
        Column::Mmsi,
        Column::Latitude,
        Column::Longitude,
        Column::NavStatus,
        Column::Rot,
        Column::Sog,
        Column::Cog,
        Column::Heading,
        Column::Imo,
        Column::Callsign,
        Column::Name,
        Column::ShipType,
        Column::CargoType,
        Column::Width,
        Column::Length,
        Column::PosFixDevice,
        Column::Draught,
        Column::Destination,
        Column::Eta,
        Column::DataSource,
        Column::A,
        Column::B,
        Column::C,
        Column::D,
    ];

    pub const REQUIRED: [Column; 4] = [
        Column::Timestamp,
        Column::Mmsi,
        Column::Latitude,
        Column::Longitude,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Name used when writing stage files.
    pub fn canonical(self) -> &'static str {
        match self {
            Column::Timestamp => "timestamp",
            Column::MobileType => "mobile_type",
            Column::Mmsi => "mmsi",
            Column::Latitude => "latitude",
            Column::Longitude => "longitude",
            Column::NavStatus => "nav_status",
            Column::Rot => "rot",
            Column::Sog => "sog",
            Column::Cog => "cog",
            Column::Heading => "heading",
            Column::Imo => "imo",
            Column::Callsign => "callsign",
            Column::Name => "name",
            Column::ShipType => "ship_type",
            Column::CargoType => "cargo_type",
            Column::Width => "width",
            Column::Length => "length",
            Column::PosFixDevice => "pos_fix_device",
            Column::Draught => "draught",
            Column::Destination => "destination",
            Column::Eta => "eta",
            Column::DataSource => "data_source",
            Column::A => "a",
            Column::B => "b",
            Column::C => "c",
            Column::D => "d",
        }
    }

    fn aliases(self) -> &'static [&'static str] {
        match self {
            Column::MobileType => &["typeofmobile", "mobiletype"],
            Column::NavStatus => &["navigationalstatus", "navstatus"],
            Column::PosFixDevice => &["typeofpositionfixingdevice", "posfixdevice"],
            Column::DataSource => &["datasourcetype", "datasource"],
            _ => &[],
        }
    }

    /// Match a header cell like `# Timestamp` or `Type of mobile`.
    pub fn from_header(name: &str) -> Option<Column> {
        let key = normalize(name);
        Column::ALL
            .into_iter()
            .find(|c| normalize(c.canonical()) == key || c.aliases().contains(&key.as_str()))
    }
}

pub(crate) fn normalize(name: &str) -> String {
    name.chars()
        .filter(|c| c.is_ascii_alphanumeric())
        .map(|c| c.to_ascii_lowercase())
        .collect()
}

/// Resolved positions of known columns within one file's header.
#[derive(Debug, Clone)]
pub struct HeaderMap {
    pub(crate) positions: [Option<usize>; 26],
    pub(crate) extras: Vec<Option<usize>>,
    pub(crate) width: usize,
}

impl HeaderMap {
    /// `extras` are additional column names to carry through (e.g. `trip_id`).
    pub fn resolve(header: &[String], extras: &[&str]) -> Result<HeaderMap, Vec<Column>> {
        let mut positions = [None; 26];
        for (i, cell) in header.iter().enumerate() {
            if let Some(col) = Column::from_header(cell) {
                positions[col.index()].get_or_insert(i);
            }
        }
        let missing: Vec<Column> = Column::REQUIRED
            .into_iter()
            .filter(|c| positions[c.index()].is_none())
            .collect();
        if !missing.is_empty() {
            return Err(missing);
        }
        let by_name: HashMap<String, usize> = header
            .iter()
            .enumerate()
            .map(|(i, h)| (normalize(h), i))
            .collect();
        let extras = extras
            .iter()
            .map(|e| by_name.get(&normalize(e)).copied())
            .collect();
        Ok(HeaderMap {
            positions,
            extras,
            width: header.len(),
        })
    }

    pub fn has(&self, col: Column) -> bool {
        self.positions[col.index()].is_some()
    }

    /// Set of matched columns, used to compare schemas across files.
    pub fn signature(&self) -> Vec<Column> {
        Column::ALL.into_iter().filter(|c| self.has(*c)).collect()
    }
}
