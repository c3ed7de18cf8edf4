//! Per-trip feature extraction: vessel shape, kinematics and geo-temporal
//! extent.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geo::{bbox_area_km2, haversine_km, initial_bearing_deg, path_length_km, BoundingBox};
use crate::segmentation::Trajectory;

/// Distances from the AIS antenna to bow (A), stern (B), port (C) and
/// starboard (D), in metres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VesselDims {
    pub a_m: f64,
    pub b_m: f64,
    pub c_m: f64,
    pub d_m: f64,
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum SkipReason {
    #[error("vessel dimensions missing or degenerate")]
    MissingDims,
    #[error("no speed over ground reported")]
    MissingKinematics,
    #[error("ship type missing")]
    MissingShipType,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeFeatures {
    pub length_m: f64,
    pub width_m: f64,
    pub aspect_ratio: f64,
    pub naive_perimeter_m: f64,
    pub naive_area_m2: f64,
    pub shape_complexity: f64,
    pub bridge_position_ratio: f64,
}

pub fn shape_features(dims: &VesselDims) -> Result<ShapeFeatures, SkipReason> {
    let length = dims.a_m + dims.b_m;
    let width = dims.c_m + dims.d_m;
    if !(length > 0.0 && width > 0.0) || dims.a_m < 0.0 || dims.b_m < 0.0 || dims.c_m < 0.0 || dims.d_m < 0.0 {
        return Err(SkipReason::MissingDims);
    }
    let sum = length + width;
    Ok(ShapeFeatures {
        length_m: length,
        width_m: width,
        aspect_ratio: width / length,
        naive_perimeter_m: 2.0 * sum,
        naive_area_m2: length * width,
        shape_complexity: sum * sum / (length * width),
        bridge_position_ratio: dims.a_m / length,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub median: f64,
    /// Population standard deviation.
    pub std: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Option<Summary> {
        if values.is_empty() {
            return None;
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len();
        let mean = sorted.iter().sum::<f64>() / n as f64;
        let var = sorted.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
        let median = if n % 2 == 1 {
            sorted[n / 2]
        } else {
            (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
        };
        Some(Summary {
            min: sorted[0],
            max: sorted[n - 1],
            mean,
            median,
            std: var.sqrt(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KinematicFeatures {
    pub sog: Summary,
    pub cog: Summary,
    pub init_cos: f64,
    pub init_sin: f64,
}

/// Course per record: the reported COG, else the bearing towards the next
/// record (towards the last one from its predecessor). Records where neither
/// exists are skipped.
fn courses(traj: &Trajectory) -> Vec<f64> {
    let recs = &traj.records;
    let n = recs.len();
    (0..n)
        .filter_map(|i| {
            recs[i].cog_deg.or_else(|| {
                let (a, b) = if i + 1 < n { (i, i + 1) } else { (i.checked_sub(1)?, i) };
                initial_bearing_deg(recs[a].position, recs[b].position).ok()
            })
        })
        .collect()
}

pub fn kinematic_features(traj: &Trajectory) -> Result<KinematicFeatures, SkipReason> {
    let speeds: Vec<f64> = traj.records.iter().filter_map(|r| r.sog_knots).collect();
    let sog = Summary::of(&speeds).ok_or(SkipReason::MissingKinematics)?;
    let course = courses(traj);
    let cog = Summary::of(&course).ok_or(SkipReason::MissingKinematics)?;
    let init = course[0].to_radians();
    Ok(KinematicFeatures {
        sog,
        cog,
        init_cos: init.cos(),
        init_sin: init.sin(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeoTemporalFeatures {
    pub trip_duration_s: f64,
    pub n_positions: usize,
    pub trajectory_length_km: f64,
    pub endpoint_distance_km: f64,
    pub directness_ratio: f64,
    pub bbox: BoundingBox,
    pub total_km2: f64,
}

pub fn geotemporal_features(traj: &Trajectory) -> GeoTemporalFeatures {
    let pts = traj.positions();
    let length = path_length_km(&pts);
    let endpoint = match (pts.first(), pts.last()) {
        (Some(a), Some(b)) => haversine_km(*a, *b),
        _ => 0.0,
    };
    let bbox = BoundingBox::enclosing(&pts).expect("trajectory has records");
    let directness = if length > 0.0 {
        (endpoint / length).min(1.0)
    } else {
        0.0
    };
    GeoTemporalFeatures {
        trip_duration_s: (traj.trip_end - traj.trip_start) as f64,
        n_positions: pts.len(),
        trajectory_length_km: length,
        endpoint_distance_km: endpoint,
        directness_ratio: directness,
        bbox,
        total_km2: bbox_area_km2(&bbox),
    }
}

/// Model input columns, in table order. Two are categorical (`cargo_type`,
/// `mobile_type`) and get label-encoded; the rest are numeric.
pub const MODEL_FEATURES: [&str; 31] = [
    "cargo_type",
    "trip_duration_sec",
    "n_positions",
    "trajectory_length_km",
    "endpoint_distance_km",
    "directness_ratio",
    "min_lat",
    "max_lat",
    "min_lon",
    "max_lon",
    "lat_span",
    "lon_span",
    "sog_min",
    "sog_max",
    "sog_mean",
    "sog_median",
    "sog_std",
    "cog_min",
    "cog_max",
    "cog_mean",
    "cog_median",
    "cog_std",
    "init_cos",
    "init_sin",
    "naive_perimeter",
    "naive_area",
    "aspect_ratio",
    "shape_complexity",
    "bridge_position_ratio",
    "mobile_type",
    "total_km2",
];

mod ts_text {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(ts: &i64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&crate::ingest::format_timestamp(*ts))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<i64, D::Error> {
        let text = String::deserialize(d)?;
        crate::ingest::parse_timestamp(&text)
            .ok_or_else(|| serde::de::Error::custom(format!("bad timestamp {text:?}")))
    }
}

/// One trip's row in the feature table. Field order is the CSV column order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FeatureRow {
    pub mmsi: u64,
    pub trip_id: u64,
    #[serde(with = "ts_text")]
    pub trip_start: i64,
    #[serde(with = "ts_text")]
    pub trip_end: i64,
    pub ship_type: Option<String>,
    pub cargo_type: Option<String>,
    pub callsign: Option<String>,
    pub name: Option<String>,
    pub destination: Option<String>,
    pub trip_duration_sec: f64,
    pub n_positions: u64,
    pub trajectory_length_km: f64,
    pub endpoint_distance_km: f64,
    pub directness_ratio: f64,
    pub min_lat: f64,
    pub max_lat: f64,
    pub min_lon: f64,
    pub max_lon: f64,
    pub lat_span: f64,
    pub lon_span: f64,
    pub sog_min: f64,
    pub sog_max: f64,
    pub sog_mean: f64,
    pub sog_median: f64,
    pub sog_std: f64,
    pub cog_min: f64,
    pub cog_max: f64,
    pub cog_mean: f64,
    pub cog_median: f64,
    pub cog_std: f64,
    pub init_cos: f64,
    pub init_sin: f64,
    pub length_m: f64,
    pub width_m: f64,
    pub naive_perimeter: f64,
    pub naive_area: f64,
    pub aspect_ratio: f64,
    pub shape_complexity: f64,
    pub bridge_position_ratio: f64,
    pub mobile_type: String,
    pub total_km2: f64,
}

impl FeatureRow {
    /// Numeric value of a non-categorical model feature.
    pub fn numeric(&self, name: &str) -> Option<f64> {
        Some(match name {
            "trip_duration_sec" => self.trip_duration_sec,
            "n_positions" => self.n_positions as f64,
            "trajectory_length_km" => self.trajectory_length_km,
            "endpoint_distance_km" => self.endpoint_distance_km,
            "directness_ratio" => self.directness_ratio,
            "min_lat" => self.min_lat,
            "max_lat" => self.max_lat,
            "min_lon" => self.min_lon,
            "max_lon" => self.max_lon,
            "lat_span" => self.lat_span,
            "lon_span" => self.lon_span,
            "sog_min" => self.sog_min,
            "sog_max" => self.sog_max,
            "sog_mean" => self.sog_mean,
            "sog_median" => self.sog_median,
            "sog_std" => self.sog_std,
            "cog_min" => self.cog_min,
            "cog_max" => self.cog_max,
            "cog_mean" => self.cog_mean,
            "cog_median" => self.cog_median,
            "cog_std" => self.cog_std,
            "init_cos" => self.init_cos,
            "init_sin" => self.init_sin,
            "naive_perimeter" => self.naive_perimeter,
            "naive_area" => self.naive_area,
            "aspect_ratio" => self.aspect_ratio,
            "shape_complexity" => self.shape_complexity,
            "bridge_position_ratio" => self.bridge_position_ratio,
            "total_km2" => self.total_km2,
            "length_m" => self.length_m,
            "width_m" => self.width_m,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkipCounts {
    pub missing_dims: u64,
    pub missing_kinematics: u64,
    pub missing_ship_type: u64,
}

impl SkipCounts {
    pub fn record(&mut self, reason: SkipReason) {
        match reason {
            SkipReason::MissingDims => self.missing_dims += 1,
            SkipReason::MissingKinematics => self.missing_kinematics += 1,
            SkipReason::MissingShipType => self.missing_ship_type += 1,
        }
    }
}

fn first_static<T: Clone>(traj: &Trajectory, get: impl Fn(&crate::ingest::StaticInfo) -> &Option<T>) -> Option<T> {
    traj.records.iter().find_map(|r| get(&r.static_info).clone())
}

/// Build the feature row for one trip. With `require_ship_type` off, trips of
/// unknown type are kept (with `ship_type = None`) so they can be classified.
pub fn assemble(traj: &Trajectory, require_ship_type: bool) -> Result<FeatureRow, SkipReason> {
    let dims = first_static(traj, |s| &s.dims).ok_or(SkipReason::MissingDims)?;
    let shape = shape_features(&dims)?;
    let kin = kinematic_features(traj)?;
    let ship_type = first_static(traj, |s| &s.ship_type);
    if require_ship_type && ship_type.is_none() {
        return Err(SkipReason::MissingShipType);
    }
    let geo = geotemporal_features(traj);
    Ok(FeatureRow {
        mmsi: traj.mmsi,
        trip_id: traj.trip_id,
        trip_start: traj.trip_start,
        trip_end: traj.trip_end,
        ship_type,
        cargo_type: first_static(traj, |s| &s.cargo_type),
        callsign: first_static(traj, |s| &s.callsign),
        name: first_static(traj, |s| &s.name),
        destination: first_static(traj, |s| &s.destination),
        trip_duration_sec: geo.trip_duration_s,
        n_positions: geo.n_positions as u64,
        trajectory_length_km: geo.trajectory_length_km,
        endpoint_distance_km: geo.endpoint_distance_km,
        directness_ratio: geo.directness_ratio,
        min_lat: geo.bbox.min_lat,
        max_lat: geo.bbox.max_lat,
        min_lon: geo.bbox.min_lon,
        max_lon: geo.bbox.max_lon,
        lat_span: geo.bbox.lat_span(),
        lon_span: geo.bbox.lon_span(),
        sog_min: kin.sog.min,
        sog_max: kin.sog.max,
        sog_mean: kin.sog.mean,
        sog_median: kin.sog.median,
        sog_std: kin.sog.std,
        cog_min: kin.cog.min,
        cog_max: kin.cog.max,
        cog_mean: kin.cog.mean,
        cog_median: kin.cog.median,
        cog_std: kin.cog.std,
        init_cos: kin.init_cos,
        init_sin: kin.init_sin,
        length_m: shape.length_m,
        width_m: shape.width_m,
        naive_perimeter: shape.naive_perimeter_m,
        naive_area: shape.naive_area_m2,
        aspect_ratio: shape.aspect_ratio,
        shape_complexity: shape.shape_complexity,
        bridge_position_ratio: shape.bridge_position_ratio,
        mobile_type: traj.records[0].mobile_type.as_str().to_string(),
        total_km2: geo.total_km2,
    })
}

/// Assemble every trip, counting skips.
pub fn featurize(trips: &[Trajectory], require_ship_type: bool) -> (Vec<FeatureRow>, SkipCounts) {
    let mut counts = SkipCounts::default();
    let mut rows = Vec::with_capacity(trips.len());
    for t in trips {
        match assemble(t, require_ship_type) {
            Ok(r) => rows.push(r),
            Err(reason) => counts.record(reason),
        }
    }
    (rows, counts)
}
