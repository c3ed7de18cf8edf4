use chrono::NaiveDateTime;
use serde::{Deserialize, Serialize};

use super::schema::Column;
use crate::features::VesselDims;
use crate::geo::GeoPoint;

/// One data row as text, aligned to [`Column::ALL`]. Columns absent from the
/// file are empty strings.
#[derive(Debug, Clone, PartialEq)]
pub struct RawRecord {
    pub line: u64,
    pub values: Vec<String>,
    /// Extra requested columns, in request order; `None` when the file lacks one.
    pub extras: Vec<Option<String>>,
}

impl RawRecord {
    pub fn get(&self, col: Column) -> &str {
        self.values[col.index()].as_str()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowError {
    pub line: u64,
    pub reason: String,
}

impl std::fmt::Display for RowError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "line {}: {}", self.line, self.reason)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NavStatus {
    UnderWayUsingEngine,
    AtAnchor,
    NotUnderCommand,
    RestrictedManeuverability,
    ConstrainedByDraught,
    Moored,
    Aground,
    EngagedInFishing,
    UnderWaySailing,
    TowingAstern,
    PushingAhead,
    AisSart,
    Reserved,
    Unknown,
}

impl NavStatus {
    const TABLE: [(NavStatus, &'static str); 14] = [
        (NavStatus::UnderWayUsingEngine, "Under way using engine"),
        (NavStatus::AtAnchor, "At anchor"),
        (NavStatus::NotUnderCommand, "Not under command"),
        (NavStatus::RestrictedManeuverability, "Restricted maneuverability"),
        (NavStatus::ConstrainedByDraught, "Constrained by her draught"),
        (NavStatus::Moored, "Moored"),
        (NavStatus::Aground, "Aground"),
        (NavStatus::EngagedInFishing, "Engaged in fishing"),
        (NavStatus::UnderWaySailing, "Under way sailing"),
        (NavStatus::TowingAstern, "Power-driven vessel towing astern"),
        (
            NavStatus::PushingAhead,
            "Power-driven vessel pushing ahead or towing alongside",
        ),
        (NavStatus::AisSart, "AIS-SART"),
        (NavStatus::Reserved, "Reserved for future use"),
        (NavStatus::Unknown, "Unknown value"),
    ];

    pub fn parse(s: &str) -> NavStatus {
        let key = super::schema::normalize(s);
        if key.starts_with("reserved") {
            return NavStatus::Reserved;
        }
        if key == "anchored" {
            return NavStatus::AtAnchor;
        }
        Self::TABLE
            .iter()
            .find(|(_, name)| super::schema::normalize(name) == key)
            .map(|(v, _)| *v)
            .unwrap_or(NavStatus::Unknown)
    }

    pub fn as_str(self) -> &'static str {
        Self::TABLE
            .iter()
            .find(|(v, _)| *v == self)
            .map(|(_, s)| *s)
            .unwrap_or("Unknown value")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MobileType {
    ClassA,
    ClassB,
    BaseStation,
    SarAirborne,
    AtoN,
    SarTransponder,
    Unknown,
}

impl MobileType {
    const TABLE: [(MobileType, &'static str); 7] = [
        (MobileType::ClassA, "Class A"),
        (MobileType::ClassB, "Class B"),
        (MobileType::BaseStation, "Base Station"),
        (MobileType::SarAirborne, "SAR airborne"),
        (MobileType::AtoN, "AtoN"),
        (MobileType::SarTransponder, "Search and rescue transponder"),
        (MobileType::Unknown, "Undefined"),
    ];

    pub fn parse(s: &str) -> MobileType {
        let key = super::schema::normalize(s);
        Self::TABLE
            .iter()
            .find(|(_, name)| super::schema::normalize(name) == key)
            .map(|(v, _)| *v)
            .unwrap_or(MobileType::Unknown)
    }

    pub fn as_str(self) -> &'static str {
        Self::TABLE
            .iter()
            .find(|(v, _)| *v == self)
            .map(|(_, s)| *s)
            .unwrap_or("Undefined")
    }
}

/// Vessel and voyage fields carried by static messages.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StaticInfo {
    pub imo: Option<String>,
    pub callsign: Option<String>,
    pub name: Option<String>,
    pub ship_type: Option<String>,
    pub cargo_type: Option<String>,
    pub width_m: Option<f64>,
    pub length_m: Option<f64>,
    pub draught_m: Option<f64>,
    pub destination: Option<String>,
    pub eta: Option<String>,
    pub dims: Option<VesselDims>,
}

impl StaticInfo {
    pub fn is_empty(&self) -> bool {
        *self == StaticInfo::default()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AisRecord {
    /// UTC seconds since the Unix epoch.
    pub timestamp: i64,
    pub mmsi: u64,
    pub position: GeoPoint,
    pub nav_status: NavStatus,
    pub sog_knots: Option<f64>,
    pub cog_deg: Option<f64>,
    pub heading_deg: Option<f64>,
    pub rot: Option<f64>,
    pub mobile_type: MobileType,
    pub static_info: StaticInfo,
}

const TIME_FORMATS: [&str; 2] = ["%d/%m/%Y %H:%M:%S", "%Y-%m-%d %H:%M:%S"];

/// Parse `dd/mm/yyyy HH:MM:SS` or `YYYY-MM-DD HH:MM:SS` as UTC seconds.
pub fn parse_timestamp(s: &str) -> Option<i64> {
    let s = s.trim();
    TIME_FORMATS
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(s, f).ok())
        .map(|dt| dt.and_utc().timestamp())
}

pub fn format_timestamp(ts: i64) -> String {
    chrono::DateTime::from_timestamp(ts, 0)
        .map(|dt| dt.format("%Y-%m-%d %H:%M:%S").to_string())
        .unwrap_or_default()
}

fn text(s: &str) -> Option<String> {
    let t = s.trim();
    (!t.is_empty()).then(|| t.to_string())
}

fn number(s: &str) -> Option<f64> {
    let t = s.trim();
    if t.is_empty() {
        return None;
    }
    t.parse::<f64>().ok().filter(|v| v.is_finite())
}

fn non_negative(s: &str) -> Option<f64> {
    number(s).filter(|v| *v >= 0.0)
}

fn angle(s: &str) -> Option<f64> {
    number(s).filter(|v| (0.0..360.0).contains(v))
}

/// Placeholder values the DMA export uses for "not reported".
fn reported(s: Option<String>) -> Option<String> {
    s.filter(|v| !matches!(v.to_ascii_lowercase().as_str(), "undefined" | "unknown"))
}

/// Convert a raw row into a typed record. Only timestamp, MMSI and position
/// failures reject the row; every other malformed field becomes missing.
pub fn typify(raw: &RawRecord) -> Result<AisRecord, RowError> {
    let err = |reason: String| RowError {
        line: raw.line,
        reason,
    };
    let ts_text = raw.get(Column::Timestamp);
    let timestamp = parse_timestamp(ts_text)
        .filter(|t| *t > 0)
        .ok_or_else(|| err(format!("unparseable timestamp {ts_text:?}")))?;
    let mmsi_text = raw.get(Column::Mmsi).trim();
    let mmsi: u64 = mmsi_text
        .parse()
        .ok()
        .filter(|m| *m > 0 && *m <= 999_999_999)
        .ok_or_else(|| err(format!("invalid MMSI {mmsi_text:?}")))?;
    let lat = number(raw.get(Column::Latitude))
        .ok_or_else(|| err(format!("invalid latitude {:?}", raw.get(Column::Latitude))))?;
    let lon = number(raw.get(Column::Longitude))
        .ok_or_else(|| err(format!("invalid longitude {:?}", raw.get(Column::Longitude))))?;
    let position = GeoPoint::new(lat, lon).map_err(|e| err(e.to_string()))?;

    let dims = match (
        non_negative(raw.get(Column::A)),
        non_negative(raw.get(Column::B)),
        non_negative(raw.get(Column::C)),
        non_negative(raw.get(Column::D)),
    ) {
        (Some(a_m), Some(b_m), Some(c_m), Some(d_m)) => Some(VesselDims { a_m, b_m, c_m, d_m }),
        _ => None,
    };
    let static_info = StaticInfo {
        imo: reported(text(raw.get(Column::Imo))),
        callsign: reported(text(raw.get(Column::Callsign))),
        name: text(raw.get(Column::Name)),
        ship_type: reported(text(raw.get(Column::ShipType))),
        cargo_type: reported(text(raw.get(Column::CargoType))),
        width_m: non_negative(raw.get(Column::Width)),
        length_m: non_negative(raw.get(Column::Length)),
        draught_m: non_negative(raw.get(Column::Draught)),
        destination: reported(text(raw.get(Column::Destination))),
        eta: text(raw.get(Column::Eta)),
        dims,
    };

    Ok(AisRecord {
        timestamp,
        mmsi,
        position,
        nav_status: NavStatus::parse(raw.get(Column::NavStatus)),
        sog_knots: non_negative(raw.get(Column::Sog)),
        cog_deg: angle(raw.get(Column::Cog)),
        heading_deg: angle(raw.get(Column::Heading)),
        rot: number(raw.get(Column::Rot)),
        mobile_type: MobileType::parse(raw.get(Column::MobileType)),
        static_info,
    })
}

/// Inverse of [`typify`] for stage files: one text cell per [`Column::ALL`].
pub fn to_cells(rec: &AisRecord) -> Vec<String> {
    let num = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    let txt = |v: &Option<String>| v.clone().unwrap_or_default();
    let s = &rec.static_info;
    let dim = |f: fn(&VesselDims) -> f64| num(s.dims.as_ref().map(f));
    Column::ALL
        .iter()
        .map(|c| match c {
            Column::Timestamp => format_timestamp(rec.timestamp),
            Column::MobileType => rec.mobile_type.as_str().to_string(),
            Column::Mmsi => rec.mmsi.to_string(),
            Column::Latitude => rec.position.lat_deg.to_string(),
            Column::Longitude => rec.position.lon_deg.to_string(),
            Column::NavStatus => rec.nav_status.as_str().to_string(),
            Column::Rot => num(rec.rot),
            Column::Sog => num(rec.sog_knots),
            Column::Cog => num(rec.cog_deg),
            Column::Heading => num(rec.heading_deg),
            Column::Imo => txt(&s.imo),
            Column::Callsign => txt(&s.callsign),
            Column::Name => txt(&s.name),
            Column::ShipType => txt(&s.ship_type),
            Column::CargoType => txt(&s.cargo_type),
            Column::Width => num(s.width_m),
            Column::Length => num(s.length_m),
            Column::PosFixDevice | Column::DataSource => String::new(),
            Column::Draught => num(s.draught_m),
            Column::Destination => txt(&s.destination),
            Column::Eta => txt(&s.eta),
            Column::A => dim(|d| d.a_m),
            Column::B => dim(|d| d.b_m),
            Column::C => dim(|d| d.c_m),
            Column::D => dim(|d| d.d_m),
        })
        .collect()
}
