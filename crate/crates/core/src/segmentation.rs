//! Splitting vessel tracks into trips at stationary intervals.
//!
//! A stop is a maximal run of consecutive records that all lie within
//! `stop_radius_m` of the run's first record and that spans at least
//! `stop_min_duration_s`. Stop records are discarded; the records between
//! stops form trips. A silent gap longer than the stop duration with real
//! displacement (the vessel left the area and came back) also splits a trip.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geo::{haversine_km, path_length_km, GeoPoint};
use crate::ingest::AisRecord;

#[derive(Debug, Error, PartialEq)]
pub enum SegmentationError {
    #[error("track mixes MMSIs {0} and {1}")]
    MixedMmsi(u64, u64),
    #[error("track timestamps not strictly increasing at index {0}")]
    Unsorted(usize),
    #[error("segmentation parameter {0} must be strictly positive")]
    NonPositive(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentationParams {
    pub stop_radius_m: f64,
    pub stop_min_duration_s: i64,
    pub min_trip_length_km: f64,
    pub min_trip_points: usize,
}

impl Default for SegmentationParams {
    fn default() -> Self {
        Self {
            stop_radius_m: 100.0,
            stop_min_duration_s: 3600,
            min_trip_length_km: 0.2,
            min_trip_points: 10,
        }
    }
}

impl SegmentationParams {
    pub fn validate(&self) -> Result<(), SegmentationError> {
        if self.stop_radius_m.is_nan() || self.stop_radius_m <= 0.0 {
            return Err(SegmentationError::NonPositive("stop_radius_m"));
        }
        if self.stop_min_duration_s <= 0 {
            return Err(SegmentationError::NonPositive("stop_min_duration_s"));
        }
        if self.min_trip_length_km.is_nan() || self.min_trip_length_km <= 0.0 {
            return Err(SegmentationError::NonPositive("min_trip_length_km"));
        }
        if self.min_trip_points == 0 {
            return Err(SegmentationError::NonPositive("min_trip_points"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Track {
    pub mmsi: u64,
    pub records: Vec<AisRecord>,
}

impl Track {
    pub fn new(mmsi: u64, records: Vec<AisRecord>) -> Result<Self, SegmentationError> {
        if let Some(r) = records.iter().find(|r| r.mmsi != mmsi) {
            return Err(SegmentationError::MixedMmsi(mmsi, r.mmsi));
        }
        if let Some(i) = records.windows(2).position(|w| w[0].timestamp >= w[1].timestamp) {
            return Err(SegmentationError::Unsorted(i + 1));
        }
        Ok(Self { mmsi, records })
    }

    pub fn positions(&self) -> Vec<GeoPoint> {
        self.records.iter().map(|r| r.position).collect()
    }
}

/// Group records into per-MMSI tracks sorted by time. Later records sharing a
/// timestamp with an earlier one are dropped.
pub fn group_tracks(mut records: Vec<AisRecord>) -> Vec<Track> {
    records.sort_by_key(|r| (r.mmsi, r.timestamp));
    records.dedup_by_key(|r| (r.mmsi, r.timestamp));
    let mut tracks: Vec<Track> = Vec::new();
    for rec in records {
        match tracks.last_mut() {
            Some(t) if t.mmsi == rec.mmsi => t.records.push(rec),
            _ => tracks.push(Track {
                mmsi: rec.mmsi,
                records: vec![rec],
            }),
        }
    }
    tracks
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StopInterval {
    pub start_index: usize,
    /// Inclusive.
    pub end_index: usize,
    pub duration_s: i64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub trip_id: u64,
    pub mmsi: u64,
    pub records: Vec<AisRecord>,
    pub trip_start: i64,
    pub trip_end: i64,
}

impl Trajectory {
    pub fn positions(&self) -> Vec<GeoPoint> {
        self.records.iter().map(|r| r.position).collect()
    }

    pub fn length_km(&self) -> f64 {
        path_length_km(&self.positions())
    }
}

pub fn detect_stops(track: &Track, params: &SegmentationParams) -> Vec<StopInterval> {
    let recs = &track.records;
    let radius_km = params.stop_radius_m / 1000.0;
    let mut stops = Vec::new();
    let mut i = 0;
    while i < recs.len() {
        let anchor = recs[i].position;
        let mut j = i + 1;
        while j < recs.len() && haversine_km(anchor, recs[j].position) <= radius_km {
            j += 1;
        }
        let duration_s = recs[j - 1].timestamp - recs[i].timestamp;
        if j - 1 > i && duration_s >= params.stop_min_duration_s {
            stops.push(StopInterval {
                start_index: i,
                end_index: j - 1,
                duration_s,
            });
            i = j;
        } else {
            i += 1;
        }
    }
    stops
}

/// Result of segmenting one track. `orphans` are indices of records that
/// ended up alone between two breaks and cannot form a trip.
#[derive(Debug, Clone, PartialEq)]
pub struct Segmented {
    pub trips: Vec<Trajectory>,
    pub orphans: Vec<usize>,
}

/// Cut a track into trips around the given stops. Trip ids are left at 0;
/// see [`assign_trip_ids`].
pub fn segment(track: &Track, stops: &[StopInterval], params: &SegmentationParams) -> Segmented {
    let recs = &track.records;
    let radius_km = params.stop_radius_m / 1000.0;
    let mut pieces: Vec<(usize, usize)> = Vec::new();
    let mut cursor = 0;
    let push_moving = |from: usize, to: usize, pieces: &mut Vec<(usize, usize)>| {
        // [from, to) is stop-free; split further on long silent gaps.
        let mut start = from;
        for k in from + 1..to {
            let gap = recs[k].timestamp - recs[k - 1].timestamp;
            let moved = haversine_km(recs[k - 1].position, recs[k].position) > radius_km;
            if gap > params.stop_min_duration_s && moved {
                pieces.push((start, k));
                start = k;
            }
        }
        if start < to {
            pieces.push((start, to));
        }
    };
    for s in stops {
        push_moving(cursor, s.start_index, &mut pieces);
        cursor = s.end_index + 1;
    }
    push_moving(cursor, recs.len(), &mut pieces);

    let mut out = Segmented {
        trips: Vec::new(),
        orphans: Vec::new(),
    };
    for (a, b) in pieces {
        if b - a < 2 {
            out.orphans.extend(a..b);
            continue;
        }
        let records = recs[a..b].to_vec();
        out.trips.push(Trajectory {
            trip_id: 0,
            mmsi: track.mmsi,
            trip_start: records[0].timestamp,
            trip_end: records[records.len() - 1].timestamp,
            records,
        });
    }
    out
}

/// Number trips 1.. in (MMSI, trip start) order.
pub fn assign_trip_ids(trips: &mut [Trajectory]) {
    trips.sort_by_key(|t| (t.mmsi, t.trip_start));
    for (i, t) in trips.iter_mut().enumerate() {
        t.trip_id = i as u64 + 1;
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentationSummary {
    pub tracks: u64,
    pub stops: u64,
    pub stop_records: u64,
    pub orphan_records: u64,
    pub trips_before_filter: u64,
    pub dropped_too_short: u64,
    pub dropped_too_few_points: u64,
    pub trips: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FilterCounts {
    pub too_short: u64,
    pub too_few_points: u64,
}

/// Drop trips shorter than `min_trip_length_km` or with fewer than
/// `min_trip_points` records. Length is checked first.
pub fn filter_trips(trips: Vec<Trajectory>, params: &SegmentationParams) -> (Vec<Trajectory>, FilterCounts) {
    let mut counts = FilterCounts::default();
    let kept = trips
        .into_iter()
        .filter(|t| {
            if t.length_km() < params.min_trip_length_km {
                counts.too_short += 1;
                false
            } else if t.records.len() < params.min_trip_points {
                counts.too_few_points += 1;
                false
            } else {
                true
            }
        })
        .collect();
    (kept, counts)
}

/// Segment every track in parallel, filter, and number the surviving trips.
pub fn segment_tracks(tracks: &[Track], params: &SegmentationParams) -> (Vec<Trajectory>, SegmentationSummary) {
    let per_track: Vec<(Segmented, Vec<StopInterval>)> = tracks
        .par_iter()
        .map(|t| {
            let stops = detect_stops(t, params);
            (segment(t, &stops, params), stops)
        })
        .collect();
    let mut summary = SegmentationSummary {
        tracks: tracks.len() as u64,
        ..Default::default()
    };
    let mut trips = Vec::new();
    for (seg, stops) in per_track {
        summary.stops += stops.len() as u64;
        summary.stop_records += stops
            .iter()
            .map(|s| (s.end_index - s.start_index + 1) as u64)
            .sum::<u64>();
        summary.orphan_records += seg.orphans.len() as u64;
        trips.extend(seg.trips);
    }
    summary.trips_before_filter = trips.len() as u64;
    let (mut kept, counts) = filter_trips(trips, params);
    summary.dropped_too_short = counts.too_short;
    summary.dropped_too_few_points = counts.too_few_points;
    summary.trips = kept.len() as u64;
    assign_trip_ids(&mut kept);
    (kept, summary)
}
