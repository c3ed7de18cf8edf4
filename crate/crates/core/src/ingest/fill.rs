//! Propagation of static voyage fields along one vessel's track.

use super::record::{AisRecord, StaticInfo};

fn fill_field<T: Clone>(track: &mut [AisRecord], get: impl Fn(&mut StaticInfo) -> &mut Option<T>) {
    let mut last: Option<T> = None;
    let mut first_known: Option<T> = None;
    for rec in track.iter_mut() {
        let slot = get(&mut rec.static_info);
        match slot {
            Some(v) => {
                first_known.get_or_insert_with(|| v.clone());
                last = Some(v.clone());
            }
            None => *slot = last.clone(),
        }
    }
    // Records before the first static message take the nearest following one.
    if let Some(v) = first_known {
        for rec in track.iter_mut() {
            let slot = get(&mut rec.static_info);
            if slot.is_some() {
                break;
            }
            *slot = Some(v.clone());
        }
    }
}

/// Forward-fill then backward-fill every static field of a single-MMSI,
/// time-sorted track. Each field is filled independently; dimensions A-D move
/// together.
pub fn fill_static(track: &mut [AisRecord]) {
    debug_assert!(track.windows(2).all(|w| w[0].mmsi == w[1].mmsi && w[0].timestamp <= w[1].timestamp));
    fill_field(track, |s| &mut s.imo);
    fill_field(track, |s| &mut s.callsign);
    fill_field(track, |s| &mut s.name);
    fill_field(track, |s| &mut s.ship_type);
    fill_field(track, |s| &mut s.cargo_type);
    fill_field(track, |s| &mut s.width_m);
    fill_field(track, |s| &mut s.length_m);
    fill_field(track, |s| &mut s.draught_m);
    fill_field(track, |s| &mut s.destination);
    fill_field(track, |s| &mut s.eta);
    fill_field(track, |s| &mut s.dims);
}

/// Sort by (MMSI, timestamp) and fill each vessel's track.
pub fn fill_static_by_mmsi(records: &mut [AisRecord]) {
    records.sort_by_key(|r| (r.mmsi, r.timestamp));
    for track in records.chunk_by_mut(|a, b| a.mmsi == b.mmsi) {
        fill_static(track);
    }
}
