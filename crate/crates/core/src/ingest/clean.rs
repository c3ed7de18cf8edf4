//! Record-level cleaning rules with per-rule drop accounting.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::record::{AisRecord, MobileType, NavStatus};
use crate::geo::{point_in_polygon, BoundingBox, PolygonRing};

#[derive(Debug, Clone)]
pub struct CleaningRules {
    pub bbox: BoundingBox,
    /// Area of interest; `None` disables the polygon filter.
    pub aoi: Option<PolygonRing>,
    pub max_sog_knots: f64,
    pub drop_zero_sog: bool,
    pub allowed_mobile_types: Vec<MobileType>,
    pub dropped_nav_statuses: Vec<NavStatus>,
}

impl Default for CleaningRules {
    fn default() -> Self {
        Self {
            bbox: BoundingBox::DENMARK,
            aoi: Some(PolygonRing::baltic_aoi()),
            max_sog_knots: 80.0,
            drop_zero_sog: true,
            allowed_mobile_types: vec![MobileType::ClassA, MobileType::ClassB],
            dropped_nav_statuses: vec![
                NavStatus::Moored,
                NavStatus::AtAnchor,
                NavStatus::ConstrainedByDraught,
            ],
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleaningReport {
    pub rows_in: u64,
    pub rows_out: u64,
    pub parse_errors: u64,
    pub duplicates: u64,
    pub bad_bbox: u64,
    pub outside_aoi: u64,
    pub mobile_type_filtered: u64,
    pub nav_status_filtered: u64,
    pub sog_over_max: u64,
    pub sog_zero: u64,
}

impl CleaningReport {
    pub fn dropped(&self) -> u64 {
        self.parse_errors
            + self.duplicates
            + self.bad_bbox
            + self.outside_aoi
            + self.mobile_type_filtered
            + self.nav_status_filtered
            + self.sog_over_max
            + self.sog_zero
    }

    pub fn merge(&mut self, other: &CleaningReport) {
        self.rows_in += other.rows_in;
        self.rows_out += other.rows_out;
        self.parse_errors += other.parse_errors;
        self.duplicates += other.duplicates;
        self.bad_bbox += other.bad_bbox;
        self.outside_aoi += other.outside_aoi;
        self.mobile_type_filtered += other.mobile_type_filtered;
        self.nav_status_filtered += other.nav_status_filtered;
        self.sog_over_max += other.sog_over_max;
        self.sog_zero += other.sog_zero;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DropReason {
    Duplicate,
    BadBbox,
    OutsideAoi,
    MobileType,
    NavStatus,
    SogOverMax,
    SogZero,
}

/// Streaming cleaner. Rules run in a fixed order and the first failing rule
/// takes the drop.
#[derive(Debug)]
pub struct Cleaner {
    rules: CleaningRules,
    seen: HashSet<(u64, i64)>,
    report: CleaningReport,
}

impl Cleaner {
    pub fn new(rules: CleaningRules) -> Self {
        Self {
            rules,
            seen: HashSet::new(),
            report: CleaningReport::default(),
        }
    }

    pub fn note_parse_error(&mut self) {
        self.report.rows_in += 1;
        self.report.parse_errors += 1;
    }

    /// Returns `None` when the record is kept.
    pub fn check(&mut self, rec: &AisRecord) -> Option<DropReason> {
        self.report.rows_in += 1;
        let reason = self.first_failing_rule(rec);
        let r = &mut self.report;
        match reason {
            None => r.rows_out += 1,
            Some(DropReason::Duplicate) => r.duplicates += 1,
            Some(DropReason::BadBbox) => r.bad_bbox += 1,
            Some(DropReason::OutsideAoi) => r.outside_aoi += 1,
            Some(DropReason::MobileType) => r.mobile_type_filtered += 1,
            Some(DropReason::NavStatus) => r.nav_status_filtered += 1,
            Some(DropReason::SogOverMax) => r.sog_over_max += 1,
            Some(DropReason::SogZero) => r.sog_zero += 1,
        }
        reason
    }

    fn first_failing_rule(&mut self, rec: &AisRecord) -> Option<DropReason> {
        if !self.seen.insert((rec.mmsi, rec.timestamp)) {
            return Some(DropReason::Duplicate);
        }
        let rules = &self.rules;
        if !rules.bbox.contains(&rec.position) {
            return Some(DropReason::BadBbox);
        }
        if let Some(aoi) = &rules.aoi {
            if !point_in_polygon(rec.position, aoi) {
                return Some(DropReason::OutsideAoi);
            }
        }
        if !rules.allowed_mobile_types.contains(&rec.mobile_type) {
            return Some(DropReason::MobileType);
        }
        if rules.dropped_nav_statuses.contains(&rec.nav_status) {
            return Some(DropReason::NavStatus);
        }
        match rec.sog_knots {
            Some(s) if s > rules.max_sog_knots => Some(DropReason::SogOverMax),
            Some(s) if s == 0.0 && rules.drop_zero_sog => Some(DropReason::SogZero),
            _ => None,
        }
    }

    pub fn report(&self) -> CleaningReport {
        self.report
    }
}

pub fn clean(records: Vec<AisRecord>, rules: &CleaningRules) -> (Vec<AisRecord>, CleaningReport) {
    let mut cleaner = Cleaner::new(rules.clone());
    let kept = records
        .into_iter()
        .filter(|r| cleaner.check(r).is_none())
        .collect();
    (kept, cleaner.report())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::GeoPoint;
    use crate::ingest::StaticInfo;

    fn rec(mmsi: u64, ts: i64, lat: f64, lon: f64, sog: Option<f64>) -> AisRecord {
        AisRecord {
            timestamp: ts,
            mmsi,
            position: GeoPoint::new(lat, lon).unwrap(),
            nav_status: NavStatus::UnderWayUsingEngine,
            sog_knots: sog,
            cog_deg: None,
            heading_deg: None,
            rot: None,
            mobile_type: MobileType::ClassA,
            static_info: StaticInfo::default(),
        }
    }

    #[test]
    fn speed_outlier_dropped() {
        let (out, rep) = clean(vec![rec(1, 10, 55.5, 15.5, Some(102.3))], &CleaningRules::default());
        assert!(out.is_empty());
        assert_eq!(rep.sog_over_max, 1);
        assert_eq!(rep.rows_in, 1);
    }

    #[test]
    fn duplicate_key_drops_second() {
        let a = rec(1, 10, 55.5, 15.5, Some(10.0));
        let mut b = a.clone();
        b.sog_knots = Some(11.0);
        let (out, rep) = clean(vec![a.clone(), b], &CleaningRules::default());
        assert_eq!(out, vec![a]);
        assert_eq!(rep.duplicates, 1);
    }

    #[test]
    fn inside_bbox_outside_aoi() {
        let r = rec(1, 10, 56.5, 12.0, Some(10.0));
        assert!(CleaningRules::default().bbox.contains(&r.position));
        let (out, rep) = clean(vec![r], &CleaningRules::default());
        assert!(out.is_empty());
        assert_eq!(rep.outside_aoi, 1);
    }

    #[test]
    fn rule_order_and_counters() {
        let mut moored = rec(2, 1, 55.5, 15.5, Some(0.0));
        moored.nav_status = NavStatus::Moored;
        let mut heli = rec(3, 1, 55.5, 15.5, Some(90.0));
        heli.mobile_type = MobileType::SarAirborne;
        let far = rec(4, 1, 50.0, 15.5, Some(10.0));
        let stopped = rec(5, 1, 55.5, 15.5, Some(0.0));
        let unknown_speed = rec(6, 1, 55.5, 15.5, None);
        let (out, rep) = clean(
            vec![moored, heli, far, stopped, unknown_speed.clone()],
            &CleaningRules::default(),
        );
        assert_eq!(out, vec![unknown_speed]);
        assert_eq!(rep.nav_status_filtered, 1);
        assert_eq!(rep.mobile_type_filtered, 1);
        assert_eq!(rep.bad_bbox, 1);
        assert_eq!(rep.sog_zero, 1);
        assert_eq!(rep.rows_out, 1);
        assert_eq!(rep.rows_in - rep.rows_out, rep.dropped());
    }

    #[test]
    fn zero_sog_kept_when_disabled() {
        let rules = CleaningRules {
            drop_zero_sog: false,
            aoi: None,
            ..CleaningRules::default()
        };
        let (out, _) = clean(vec![rec(1, 1, 56.5, 12.0, Some(0.0))], &rules);
        assert_eq!(out.len(), 1);
    }
}
