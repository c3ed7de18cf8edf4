//! Synthetic AIS days in the raw DMA layout, for tests and demos.
//!
//! Five vessel classes with distinct hull dimensions, speeds and movement
//! patterns sail between random ports inside the area of interest. Each
//! voyage is bracketed by a port stay long enough to register as a stop, so
//! every voyage becomes one trip. A handful of vessels never report their
//! ship type; their true class is returned separately.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::{DateTime, NaiveDate};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::geo::{haversine_km, initial_bearing_deg, point_in_polygon, GeoPoint, PolygonRing};
use crate::seed::rng_for;

const KNOT_KMH: f64 = 1.852;

pub const DMA_HEADER: [&str; 26] = [
    "# Timestamp",
    "Type of mobile",
    "MMSI",
    "Latitude",
    "Longitude",
    "Navigational status",
    "ROT",
    "SOG",
    "COG",
    "Heading",
    "IMO",
    "Callsign",
    "Name",
    "Ship type",
    "Cargo type",
    "Width",
    "Length",
    "Type of position fixing device",
    "Draught",
    "Destination",
    "ETA",
    "Data source type",
    "A",
    "B",
    "C",
    "D",
];

#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub seed: u64,
    /// First day, UTC midnight.
    pub start: NaiveDate,
    pub days: u32,
    pub interval_s: i64,
    /// Vessels of each class, in [`PROFILES`] order.
    pub vessels: [usize; 5],
    /// Vessels (beyond the above) whose ship type is never reported.
    pub typeless_vessels: usize,
    /// Add rows the cleaner must drop, plus one malformed row per file.
    pub noise: bool,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            start: NaiveDate::from_ymd_opt(2025, 1, 23).expect("valid date"),
            days: 2,
            interval_s: 120,
            vessels: [55, 22, 10, 6, 8],
            typeless_vessels: 3,
            noise: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Pattern {
    /// Random port to random port.
    Tramp,
    /// Back and forth between two fixed ports.
    Shuttle,
    /// Wander from a home port and return.
    Fishing,
}

/// Which group of ports a class calls at.
#[derive(Debug, Clone, Copy, PartialEq)]
enum PortKind {
    Commercial,
    Terminal,
    Ferry,
    Harbour,
}

#[derive(Debug, Clone, Copy)]
struct Profile {
    ship_type: &'static str,
    speed_kn: (f64, f64),
    length_m: (f64, f64),
    width_m: (f64, f64),
    /// Antenna distance from the bow as a fraction of length.
    bow_frac: (f64, f64),
    cargo_types: &'static [&'static str],
    class_b_share: f64,
    pattern: Pattern,
    ports: PortKind,
    voyages: usize,
    leg_km: (f64, f64),
}

const PROFILES: [Profile; 5] = [
    Profile {
        ship_type: "Cargo",
        speed_kn: (10.0, 13.5),
        length_m: (110.0, 200.0),
        width_m: (17.0, 29.0),
        bow_frac: (0.78, 0.9),
        cargo_types: &["No additional information", "No additional information", "Category Z", "Category Y"],
        class_b_share: 0.0,
        pattern: Pattern::Tramp,
        ports: PortKind::Commercial,
        voyages: 3,
        leg_km: (30.0, 250.0),
    },
    Profile {
        ship_type: "Tanker",
        speed_kn: (9.0, 12.5),
        length_m: (140.0, 250.0),
        width_m: (27.0, 44.0),
        bow_frac: (0.8, 0.92),
        cargo_types: &["Category X", "Category Y", "Category OS"],
        class_b_share: 0.0,
        pattern: Pattern::Tramp,
        ports: PortKind::Terminal,
        voyages: 3,
        leg_km: (30.0, 250.0),
    },
    Profile {
        ship_type: "Passenger",
        speed_kn: (16.5, 22.0),
        length_m: (70.0, 190.0),
        width_m: (14.0, 30.0),
        bow_frac: (0.25, 0.55),
        cargo_types: &["No additional information"],
        class_b_share: 0.0,
        pattern: Pattern::Shuttle,
        ports: PortKind::Ferry,
        voyages: 6,
        leg_km: (30.0, 70.0),
    },
    Profile {
        ship_type: "HSC",
        speed_kn: (25.0, 35.0),
        length_m: (25.0, 70.0),
        width_m: (8.0, 16.0),
        bow_frac: (0.5, 0.7),
        cargo_types: &["No additional information"],
        class_b_share: 0.0,
        pattern: Pattern::Shuttle,
        ports: PortKind::Ferry,
        voyages: 6,
        leg_km: (30.0, 70.0),
    },
    Profile {
        ship_type: "Fishing",
        speed_kn: (3.0, 6.0),
        length_m: (12.0, 35.0),
        width_m: (5.0, 9.0),
        bow_frac: (0.6, 0.8),
        cargo_types: &["No additional information"],
        class_b_share: 0.7,
        pattern: Pattern::Fishing,
        ports: PortKind::Harbour,
        voyages: 2,
        leg_km: (8.0, 25.0),
    },
];

/// Ship types the generator emits for labelled vessels.
pub fn synth_classes() -> Vec<&'static str> {
    PROFILES.iter().map(|p| p.ship_type).collect()
}

#[derive(Debug, Clone)]
struct Vessel {
    mmsi: u64,
    profile: Profile,
    report_type: bool,
    class_b: bool,
    a: f64,
    b: f64,
    c: f64,
    d: f64,
    cargo_type: &'static str,
    name: String,
}

/// One raw row: timestamp plus the 26 cells in [`DMA_HEADER`] order.
#[derive(Debug, Clone)]
pub struct SynthRow {
    pub timestamp: i64,
    pub cells: Vec<String>,
}

#[derive(Debug, Clone, Default)]
pub struct SynthData {
    /// Sorted by (timestamp, MMSI).
    pub rows: Vec<SynthRow>,
    /// True class of every generated vessel.
    pub truth: BTreeMap<u64, String>,
    /// Vessels that never report a ship type.
    pub typeless: Vec<u64>,
    /// Malformed lines, one per day when noise is on.
    pub malformed: Vec<(usize, String)>,
}

fn uniform(rng: &mut ChaCha8Rng, range: (f64, f64)) -> f64 {
    if range.0 >= range.1 {
        range.0
    } else {
        rng.gen_range(range.0..range.1)
    }
}

fn fmt_time(ts: i64) -> String {
    DateTime::from_timestamp(ts, 0)
        .map(|d| d.format("%d/%m/%Y %H:%M:%S").to_string())
        .unwrap_or_default()
}

fn round(v: f64, digits: i32) -> String {
    let f = 10f64.powi(digits);
    format!("{}", (v * f).round() / f)
}

/// Move `dist_km` from `p` along `bearing_deg` on a local flat-earth
/// approximation, which is plenty at these step sizes.
/// Closed-segment intersection in the (lon, lat) plane.
fn segments_meet(a: GeoPoint, b: GeoPoint, c: GeoPoint, d: GeoPoint) -> bool {
    let orient = |p: GeoPoint, q: GeoPoint, r: GeoPoint| {
        let v = (q.lon_deg - p.lon_deg) * (r.lat_deg - p.lat_deg) - (q.lat_deg - p.lat_deg) * (r.lon_deg - p.lon_deg);
        v.partial_cmp(&0.0).map_or(0, |o| o as i8)
    };
    let within = |p: GeoPoint, q: GeoPoint, r: GeoPoint| {
        r.lon_deg >= p.lon_deg.min(q.lon_deg)
            && r.lon_deg <= p.lon_deg.max(q.lon_deg)
            && r.lat_deg >= p.lat_deg.min(q.lat_deg)
            && r.lat_deg <= p.lat_deg.max(q.lat_deg)
    };
    let (o1, o2, o3, o4) = (orient(a, b, c), orient(a, b, d), orient(c, d, a), orient(c, d, b));
    if o1 != o2 && o3 != o4 && o1 * o2 <= 0 && o3 * o4 <= 0 {
        return true;
    }
    (o1 == 0 && within(a, b, c)) || (o2 == 0 && within(a, b, d)) || (o3 == 0 && within(c, d, a)) || (o4 == 0 && within(c, d, b))
}

fn step(p: GeoPoint, bearing_deg: f64, dist_km: f64) -> Option<GeoPoint> {
    let b = bearing_deg.to_radians();
    let dlat = dist_km * b.cos() / 111.195;
    let dlon = dist_km * b.sin() / (111.195 * p.lat_deg.to_radians().cos());
    GeoPoint::new(p.lat_deg + dlat, p.lon_deg + dlon).ok()
}

struct Sea {
    aoi: PolygonRing,
    commercial: Vec<GeoPoint>,
    terminals: Vec<GeoPoint>,
    ferry: Vec<GeoPoint>,
    harbours: Vec<GeoPoint>,
}

impl Sea {
    fn new(seed: u64) -> Self {
        let mut sea = Self {
            aoi: PolygonRing::baltic_aoi(),
            commercial: Vec::new(),
            terminals: Vec::new(),
            ferry: Vec::new(),
            harbours: Vec::new(),
        };
        let mut rng = rng_for(seed, "synth-ports", 0);
        sea.commercial = (0..8).map(|_| sea.random_point(&mut rng)).collect();
        sea.terminals = (0..4).map(|_| sea.random_point(&mut rng)).collect();
        sea.ferry = (0..5).map(|_| sea.random_point(&mut rng)).collect();
        sea.harbours = (0..3).map(|_| sea.random_point(&mut rng)).collect();
        sea
    }

    fn ports(&self, kind: PortKind) -> &[GeoPoint] {
        match kind {
            PortKind::Commercial => &self.commercial,
            PortKind::Terminal => &self.terminals,
            PortKind::Ferry => &self.ferry,
            PortKind::Harbour => &self.harbours,
        }
    }

    /// A port of `kind` within `range_km` with a clear straight leg, else
    /// a fresh destination in range.
    fn port_call(&self, rng: &mut ChaCha8Rng, from: GeoPoint, kind: PortKind, range_km: (f64, f64)) -> GeoPoint {
        let mut ports: Vec<GeoPoint> = self.ports(kind).to_vec();
        ports.shuffle(rng);
        ports
            .into_iter()
            .find(|p| {
                let d = haversine_km(from, *p);
                d >= range_km.0 && d <= range_km.1 && self.leg_clear(from, *p)
            })
            .unwrap_or_else(|| self.destination(rng, from, range_km))
    }

    /// A spot near `port` that can be reached from `from` in open water.
    fn berth(&self, rng: &mut ChaCha8Rng, port: GeoPoint, from: Option<GeoPoint>) -> GeoPoint {
        step(port, rng.gen_range(0.0..360.0), rng.gen_range(0.0..0.4))
            .filter(|p| self.inside(*p) && from.is_none_or(|f| self.leg_clear(f, *p)))
            .unwrap_or(port)
    }

    fn inside(&self, p: GeoPoint) -> bool {
        point_in_polygon(p, &self.aoi)
    }

    fn random_point(&self, rng: &mut ChaCha8Rng) -> GeoPoint {
        let b = self.aoi.bounding_box();
        loop {
            let p = GeoPoint::new(rng.gen_range(b.min_lat..b.max_lat), rng.gen_range(b.min_lon..b.max_lon))
                .expect("inside the box");
            if self.inside(p) {
                return p;
            }
        }
    }

    /// Walks the great-circle course `sail` will take in half-km steps,
    /// rejecting any step that crosses the area boundary.
    fn leg_clear(&self, a: GeoPoint, b: GeoPoint) -> bool {
        let mut p = a;
        loop {
            if !self.inside(p) {
                return false;
            }
            let next = if haversine_km(p, b) <= 0.5 {
                b
            } else {
                match initial_bearing_deg(p, b).ok().and_then(|h| step(p, h, 0.5)) {
                    Some(q) => q,
                    None => return false,
                }
            };
            if self.crosses_edge(p, next) {
                return false;
            }
            if next == b {
                return self.inside(b);
            }
            p = next;
        }
    }

    fn crosses_edge(&self, p: GeoPoint, q: GeoPoint) -> bool {
        let v = self.aoi.vertices();
        (0..v.len()).any(|i| segments_meet(p, q, v[i], v[(i + 1) % v.len()]))
    }

    /// A port at a distance within `range_km` of `from` reachable in a
    /// straight line without leaving the area.
    fn destination(&self, rng: &mut ChaCha8Rng, from: GeoPoint, range_km: (f64, f64)) -> GeoPoint {
        for _ in 0..2000 {
            let bearing = rng.gen_range(0.0..360.0);
            let dist = uniform(rng, range_km);
            if let Some(p) = step(from, bearing, dist) {
                if self.inside(p) && self.leg_clear(from, p) {
                    return p;
                }
            }
        }
        // Crowded corner: accept any clear port, however close.
        loop {
            let p = self.random_point(rng);
            if self.leg_clear(from, p) && haversine_km(from, p) > 5.0 {
                return p;
            }
        }
    }
}

struct Emitter<'a> {
    vessel: &'a Vessel,
    rng: ChaCha8Rng,
    t: i64,
    end: i64,
    interval: i64,
    rows: Vec<SynthRow>,
    /// Static fields are attached to roughly one row in this many.
    static_every: u32,
}

impl Emitter<'_> {
    fn done(&self) -> bool {
        self.t >= self.end
    }

    fn emit(&mut self, p: GeoPoint, status: &str, sog: f64, cog: Option<f64>) {
        if self.done() {
            return;
        }
        let v = self.vessel;
        let with_static = self.rows.is_empty() || self.rng.gen_ratio(1, self.static_every);
        let mut cells = vec![String::new(); 26];
        cells[0] = fmt_time(self.t);
        cells[1] = if v.class_b { "Class B" } else { "Class A" }.into();
        cells[2] = v.mmsi.to_string();
        cells[3] = round(p.lat_deg, 6);
        cells[4] = round(p.lon_deg, 6);
        cells[5] = status.into();
        cells[7] = round(sog, 1);
        if let Some(c) = cog {
            cells[8] = round(c, 1);
            cells[9] = format!("{}", c.round() as i64 % 360);
        }
        cells[17] = "GPS".into();
        cells[21] = "AIS".into();
        if with_static {
            cells[10] = if v.class_b { "Unknown".into() } else { format!("9{:06}", v.mmsi % 1_000_000) };
            cells[11] = format!("OU{}", v.mmsi % 10_000);
            cells[12] = v.name.clone();
            cells[13] = if v.report_type { v.profile.ship_type.into() } else { "Undefined".into() };
            cells[14] = v.cargo_type.into();
            cells[15] = round(v.c + v.d, 0);
            cells[16] = round(v.a + v.b, 0);
            cells[18] = round((v.c + v.d) / 4.0, 1);
            cells[22] = round(v.a, 0);
            cells[23] = round(v.b, 0);
            cells[24] = round(v.c, 0);
            cells[25] = round(v.d, 0);
        }
        self.rows.push(SynthRow {
            timestamp: self.t,
            cells,
        });
        self.t += self.interval + self.rng.gen_range(-5..=5);
    }

    /// Port stay: mostly slow drift reported as under way, with some moored
    /// rows at zero speed that the cleaner drops.
    fn dwell(&mut self, sea: &Sea, at: GeoPoint) {
        let until = self.t + self.rng.gen_range(4500..9000);
        let every = self.interval * 2;
        while self.t < until && !self.done() {
            let p = step(at, self.rng.gen_range(0.0..360.0), self.rng.gen_range(0.0..0.02))
                .filter(|q| sea.inside(*q))
                .unwrap_or(at);
            if self.rng.gen_bool(0.25) {
                self.emit(p, "Moored", 0.0, None);
            } else {
                let sog = self.rng.gen_range(0.1..0.4);
                let cog = self.rng.gen_range(0.0..360.0);
                self.emit(p, "Under way using engine", sog, Some(cog));
            }
            // Sparser reporting in port.
            self.t += every - self.interval;
        }
    }

    fn sail(&mut self, from: GeoPoint, to: GeoPoint, speed_kn: f64) -> GeoPoint {
        let mut p = from;
        while !self.done() {
            let remaining = haversine_km(p, to);
            let sog = speed_kn * self.rng.gen_range(0.92..1.08);
            let dist = sog * KNOT_KMH * self.interval as f64 / 3600.0;
            if remaining <= dist {
                return to;
            }
            let bearing = initial_bearing_deg(p, to).unwrap_or(0.0);
            let cog = (bearing + self.rng.gen_range(-3.0..3.0)).rem_euclid(360.0);
            p = step(p, bearing, dist).unwrap_or(p);
            let status = if self.vessel.profile.pattern == Pattern::Fishing {
                "Engaged in fishing"
            } else {
                "Under way using engine"
            };
            self.emit(p, status, sog, Some(cog));
        }
        p
    }

    fn fish(&mut self, sea: &Sea, home: GeoPoint, hours: f64) -> GeoPoint {
        let (lo, hi) = self.vessel.profile.speed_kn;
        let until = self.t + (hours * 3600.0) as i64;
        let mut p = home;
        let mut heading = self.rng.gen_range(0.0..360.0);
        while self.t < until && !self.done() {
            heading = (heading + self.rng.gen_range(-25.0..25.0f64)).rem_euclid(360.0);
            let sog = self.rng.gen_range(lo..hi);
            let dist = sog * KNOT_KMH * self.interval as f64 / 3600.0;
            // Stay where a straight run home is possible.
            let open = |q: &GeoPoint| sea.inside(*q) && sea.leg_clear(*q, home);
            let mut next = step(p, heading, dist).filter(open);
            if next.is_none() {
                heading = (heading + 180.0).rem_euclid(360.0);
                next = step(p, heading, dist).filter(open);
            }
            p = next.unwrap_or(p);
            self.emit(p, "Engaged in fishing", sog, Some(heading));
        }
        p
    }
}

fn make_vessel(rng: &mut ChaCha8Rng, mmsi: u64, profile: Profile, report_type: bool) -> Vessel {
    let length = uniform(rng, profile.length_m);
    let width = uniform(rng, profile.width_m);
    let a = (length * uniform(rng, profile.bow_frac)).round();
    let c = (width * rng.gen_range(0.4..0.6)).round();
    Vessel {
        mmsi,
        profile,
        report_type,
        class_b: rng.gen_bool(profile.class_b_share),
        a,
        b: length.round() - a,
        c,
        d: width.round() - c,
        cargo_type: profile.cargo_types.choose(rng).copied().unwrap_or("No additional information"),
        name: format!("{} {}", profile.ship_type.to_uppercase(), mmsi % 1000),
    }
}

fn voyage_rows(sea: &Sea, vessel: &Vessel, cfg: &SynthConfig, idx: u64, start: i64, end: i64) -> Vec<SynthRow> {
    let mut rng = rng_for(cfg.seed, "synth-route", idx);
    let p = vessel.profile;
    let home_port = *sea.ports(p.ports).choose(&mut rng).expect("ports exist");
    let home = sea.berth(&mut rng, home_port, None);
    let partner = sea.port_call(&mut rng, home, p.ports, p.leg_km);
    let speed = uniform(&mut rng, p.speed_kn);
    let mut em = Emitter {
        vessel,
        t: start + rng.gen_range(0..4 * 3600),
        rng: rng_for(cfg.seed, "synth-emit", idx),
        end,
        interval: cfg.interval_s,
        rows: Vec::new(),
        static_every: 12,
    };
    let mut here = home;
    em.dwell(sea, here);
    for leg in 0..p.voyages {
        if em.done() {
            break;
        }
        match p.pattern {
            Pattern::Tramp => {
                // Mostly own trade, sometimes the other commercial ports.
                let kind = match (p.ports, rng.gen_bool(0.8)) {
                    (k, true) => k,
                    (PortKind::Terminal, false) => PortKind::Commercial,
                    (_, false) => PortKind::Terminal,
                };
                let port = sea.port_call(&mut rng, here, kind, p.leg_km);
                let to = sea.berth(&mut rng, port, Some(here));
                here = em.sail(here, to, speed * rng.gen_range(0.9..1.1));
            }
            Pattern::Shuttle => {
                let to = if leg % 2 == 0 { partner } else { home };
                here = em.sail(here, to, speed * rng.gen_range(0.9..1.1));
            }
            Pattern::Fishing => {
                let out = em.fish(sea, here, rng.gen_range(5.0..9.0));
                here = em.sail(out, home, 8.0);
            }
        }
        em.dwell(sea, here);
    }
    em.rows
}

fn noise_rows(rng: &mut ChaCha8Rng, day_rows: &[SynthRow], day_start: i64) -> Vec<SynthRow> {
    let mut out = Vec::new();
    let Some(base) = day_rows.choose(rng) else {
        return out;
    };
    // Speed glitch.
    let mut r = base.clone();
    r.timestamp += 1;
    r.cells[0] = fmt_time(r.timestamp);
    r.cells[7] = "102.3".into();
    out.push(r);
    // Exact duplicate.
    out.push(day_rows.choose(rng).expect("non-empty").clone());
    // Shore and airborne stations.
    for (mmsi, mobile, lat, lon) in [
        (2_190_047u64, "Base Station", 55.1, 14.9),
        (111_219_501, "SAR airborne", 54.8, 13.9),
    ] {
        let ts = day_start + rng.gen_range(0..86_000);
        let mut cells = vec![String::new(); 26];
        cells[0] = fmt_time(ts);
        cells[1] = mobile.into();
        cells[2] = mmsi.to_string();
        cells[3] = lat.to_string();
        cells[4] = lon.to_string();
        cells[5] = "Unknown value".into();
        cells[7] = "0.5".into();
        out.push(SynthRow { timestamp: ts, cells });
    }
    // Position outside the national box, then one inside it but outside the area.
    for (lat, lon) in [(50.0, 14.0), (56.5, 12.0)] {
        let mut r = day_rows.choose(rng).expect("non-empty").clone();
        r.timestamp += 2;
        r.cells[0] = fmt_time(r.timestamp);
        r.cells[3] = lat.to_string();
        r.cells[4] = lon.to_string();
        out.push(r);
    }
    out
}

/// Generate the rows of every day, sorted by (timestamp, MMSI).
pub fn generate(cfg: &SynthConfig) -> SynthData {
    let sea = Sea::new(cfg.seed);
    let start = cfg.start.and_hms_opt(0, 0, 0).expect("midnight").and_utc().timestamp();
    let end = start + i64::from(cfg.days) * 86_400;
    let mut rng = rng_for(cfg.seed, "synth-fleet", 0);
    let mut vessels = Vec::new();
    let mut mmsi = 219_000_100u64;
    for (profile, &count) in PROFILES.iter().zip(&cfg.vessels) {
        for _ in 0..count {
            mmsi += rng.gen_range(1..50);
            vessels.push(make_vessel(&mut rng, mmsi, *profile, true));
        }
    }
    // Unlabelled vessels cycle through the common classes.
    for i in 0..cfg.typeless_vessels {
        mmsi += rng.gen_range(1..50);
        let profile = PROFILES[[0, 2, 4][i % 3]];
        vessels.push(make_vessel(&mut rng, mmsi, profile, false));
    }

    let mut data = SynthData::default();
    for (i, v) in vessels.iter().enumerate() {
        data.truth.insert(v.mmsi, v.profile.ship_type.to_string());
        if !v.report_type {
            data.typeless.push(v.mmsi);
        }
        data.rows.extend(voyage_rows(&sea, v, cfg, i as u64, start, end));
    }
    if cfg.noise {
        let mut extra = Vec::new();
        for day in 0..cfg.days {
            let d0 = start + i64::from(day) * 86_400;
            let day_rows: Vec<SynthRow> = data
                .rows
                .iter()
                .filter(|r| r.timestamp >= d0 && r.timestamp < d0 + 86_400 - 10)
                .cloned()
                .collect();
            let mut nrng = rng_for(cfg.seed, "synth-noise", u64::from(day));
            extra.extend(noise_rows(&mut nrng, &day_rows, d0));
            let short = day_rows.first().map(|r| r.cells[..25].join(",")).unwrap_or_default();
            data.malformed.push((day as usize, short));
        }
        data.rows.extend(extra);
    }
    data.rows.sort_by(|a, b| (a.timestamp, &a.cells[2]).cmp(&(b.timestamp, &b.cells[2])));
    data
}

/// Write one `aisdk-YYYY-MM-DD.csv` per day into `dir`.
pub fn write_days(data: &SynthData, cfg: &SynthConfig, dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let start = cfg.start.and_hms_opt(0, 0, 0).expect("midnight").and_utc().timestamp();
    let mut paths = Vec::new();
    for day in 0..cfg.days {
        let d0 = start + i64::from(day) * 86_400;
        let date = cfg.start + chrono::Days::new(u64::from(day));
        let path = dir.join(format!("aisdk-{}.csv", date.format("%Y-%m-%d")));
        let mut w = csv::WriterBuilder::new().flexible(true).from_path(&path)?;
        w.write_record(DMA_HEADER)?;
        let mut malformed = data.malformed.iter().filter(|(d, _)| *d == day as usize);
        let day_rows = data.rows.iter().filter(|r| r.timestamp >= d0 && r.timestamp < d0 + 86_400);
        for (k, r) in day_rows.enumerate() {
            w.write_record(&r.cells)?;
            if k == 10 {
                if let Some((_, line)) = malformed.next() {
                    w.write_record(line.split(','))?;
                }
            }
        }
        w.flush()?;
        paths.push(path);
    }
    Ok(paths)
}

/// Write the true class of every vessel as `mmsi,ship_type`.
pub fn write_truth(data: &SynthData, path: &Path) -> std::io::Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "mmsi,ship_type,reported")?;
    for (m, t) in &data.truth {
        writeln!(f, "{m},{t},{}", !data.typeless.contains(m))?;
    }
    f.flush()
}
