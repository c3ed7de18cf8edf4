//! Spherical geometry primitives: great-circle distance, bearings, bounding
//! boxes and polygon containment.
//!
//! The Earth is a sphere of radius [`EARTH_RADIUS_KM`]. Polygon containment
//! works on raw lon/lat as planar coordinates, which is fine for an area of
//! interest a few degrees across.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aoi::BALTIC_AOI_LON_LAT;

/// Mean Earth radius used by every distance computation.
pub const EARTH_RADIUS_KM: f64 = 6371.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeoError {
    #[error("latitude {0} outside [-90, 90]")]
    Latitude(f64),
    #[error("longitude {0} outside [-180, 180]")]
    Longitude(f64),
    #[error("bounding box has min > max ({0})")]
    InvertedBox(&'static str),
    #[error("polygon ring needs at least 3 distinct vertices, got {0}")]
    TooFewVertices(usize),
    #[error("polygon ring repeats vertex {0} consecutively")]
    RepeatedVertex(usize),
    #[error("bearing undefined between identical points")]
    UndefinedBearing,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    pub lat_deg: f64,
    pub lon_deg: f64,
}

impl GeoPoint {
    pub fn new(lat_deg: f64, lon_deg: f64) -> Result<Self, GeoError> {
        if !(-90.0..=90.0).contains(&lat_deg) {
            return Err(GeoError::Latitude(lat_deg));
        }
        if !(-180.0..=180.0).contains(&lon_deg) {
            return Err(GeoError::Longitude(lon_deg));
        }
        Ok(Self { lat_deg, lon_deg })
    }

    fn radians(&self) -> (f64, f64) {
        (self.lat_deg.to_radians(), self.lon_deg.to_radians())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub min_lat: f64,
    pub min_lon: f64,
    pub max_lat: f64,
    pub max_lon: f64,
}

impl BoundingBox {
    /// Box around Danish waters used to drop jammed or garbled positions.
    pub const DENMARK: BoundingBox = BoundingBox {
        min_lon: 4.25,
        min_lat: 53.61,
        max_lon: 19.54,
        max_lat: 61.89,
    };

    pub fn new(min_lat: f64, min_lon: f64, max_lat: f64, max_lon: f64) -> Result<Self, GeoError> {
        if min_lat > max_lat {
            return Err(GeoError::InvertedBox("latitude"));
        }
        if min_lon > max_lon {
            return Err(GeoError::InvertedBox("longitude"));
        }
        Ok(Self {
            min_lat,
            min_lon,
            max_lat,
            max_lon,
        })
    }

    /// Smallest box holding every point, `None` for an empty iterator.
    pub fn enclosing<'a, I>(points: I) -> Option<Self>
    where
        I: IntoIterator<Item = &'a GeoPoint>,
    {
        let mut it = points.into_iter();
        let first = it.next()?;
        let mut b = BoundingBox {
            min_lat: first.lat_deg,
            min_lon: first.lon_deg,
            max_lat: first.lat_deg,
            max_lon: first.lon_deg,
        };
        for p in it {
            b.min_lat = b.min_lat.min(p.lat_deg);
            b.max_lat = b.max_lat.max(p.lat_deg);
            b.min_lon = b.min_lon.min(p.lon_deg);
            b.max_lon = b.max_lon.max(p.lon_deg);
        }
        Some(b)
    }

    pub fn contains(&self, p: &GeoPoint) -> bool {
        p.lat_deg >= self.min_lat
            && p.lat_deg <= self.max_lat
            && p.lon_deg >= self.min_lon
            && p.lon_deg <= self.max_lon
    }

    pub fn lat_span(&self) -> f64 {
        self.max_lat - self.min_lat
    }

    pub fn lon_span(&self) -> f64 {
        self.max_lon - self.min_lon
    }
}

/// Closed polygon ring in lon/lat. The closing vertex is implied and stripped
/// on construction if given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolygonRing {
    vertices: Vec<GeoPoint>,
}

impl PolygonRing {
    pub fn new(mut vertices: Vec<GeoPoint>) -> Result<Self, GeoError> {
        if vertices.len() > 1 && vertices.first() == vertices.last() {
            vertices.pop();
        }
        for i in 1..vertices.len() {
            if vertices[i] == vertices[i - 1] {
                return Err(GeoError::RepeatedVertex(i));
            }
        }
        let mut distinct: Vec<(u64, u64)> = vertices
            .iter()
            .map(|v| (v.lat_deg.to_bits(), v.lon_deg.to_bits()))
            .collect();
        distinct.sort_unstable();
        distinct.dedup();
        if distinct.len() < 3 {
            return Err(GeoError::TooFewVertices(distinct.len()));
        }
        Ok(Self { vertices })
    }

    /// The Bornholm strait area of interest.
    pub fn baltic_aoi() -> Self {
        let vertices = BALTIC_AOI_LON_LAT
            .iter()
            .map(|&(lon, lat)| GeoPoint {
                lat_deg: lat,
                lon_deg: lon,
            })
            .collect();
        Self { vertices }
    }

    pub fn vertices(&self) -> &[GeoPoint] {
        &self.vertices
    }

    pub fn bounding_box(&self) -> BoundingBox {
        BoundingBox::enclosing(&self.vertices).expect("ring has vertices")
    }

    /// Parse either one "lon lat" pair per line (blank lines and `#` comments
    /// ignored) or a GeoJSON Polygon / Feature / bare coordinate ring.
    pub fn parse(text: &str) -> Result<Self, String> {
        let trimmed = text.trim_start();
        let pairs: Vec<(f64, f64)> = if trimmed.starts_with('{') || trimmed.starts_with('[') {
            let value: serde_json::Value =
                serde_json::from_str(text).map_err(|e| format!("invalid GeoJSON: {e}"))?;
            ring_from_json(&value).ok_or("no polygon ring found in GeoJSON")?
        } else {
            let mut out = Vec::new();
            for (n, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let mut it = line
                    .split(|c: char| c.is_whitespace() || c == ',')
                    .filter(|s| !s.is_empty());
                let (Some(lon), Some(lat), None) = (it.next(), it.next(), it.next()) else {
                    return Err(format!("line {}: expected \"lon lat\"", n + 1));
                };
                let lon: f64 = lon.parse().map_err(|_| format!("line {}: bad lon", n + 1))?;
                let lat: f64 = lat.parse().map_err(|_| format!("line {}: bad lat", n + 1))?;
                out.push((lon, lat));
            }
            out
        };
        let vertices = pairs
            .into_iter()
            .map(|(lon, lat)| GeoPoint::new(lat, lon))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| e.to_string())?;
        PolygonRing::new(vertices).map_err(|e| e.to_string())
    }
}

fn ring_from_json(v: &serde_json::Value) -> Option<Vec<(f64, f64)>> {
    use serde_json::Value;
    match v {
        Value::Object(map) => {
            if let Some(g) = map.get("geometry") {
                return ring_from_json(g);
            }
            if let Some(features) = map.get("features").and_then(Value::as_array) {
                return features.iter().find_map(ring_from_json);
            }
            map.get("coordinates").and_then(ring_from_json)
        }
        Value::Array(items) => {
            let as_pair = |item: &Value| -> Option<(f64, f64)> {
                let a = item.as_array()?;
                Some((a.first()?.as_f64()?, a.get(1)?.as_f64()?))
            };
            if let Some(pairs) = items.iter().map(as_pair).collect::<Option<Vec<_>>>() {
                if !pairs.is_empty() {
                    return Some(pairs);
                }
            }
            // Polygon coordinates are nested one level deeper: take the outer ring.
            items.first().and_then(ring_from_json)
        }
        _ => None,
    }
}

/// Great-circle distance in kilometres (haversine, atan2 form).
pub fn haversine_km(a: GeoPoint, b: GeoPoint) -> f64 {
    let (phi1, lambda1) = a.radians();
    let (phi2, lambda2) = b.radians();
    let dphi = phi2 - phi1;
    let dlambda = lambda2 - lambda1;
    let h = (dphi / 2.0).sin().powi(2) + phi1.cos() * phi2.cos() * (dlambda / 2.0).sin().powi(2);
    let h = h.clamp(0.0, 1.0);
    EARTH_RADIUS_KM * 2.0 * h.sqrt().atan2((1.0 - h).sqrt())
}

/// Sum of consecutive haversine legs; zero for fewer than two points.
pub fn path_length_km(points: &[GeoPoint]) -> f64 {
    points
        .windows(2)
        .map(|w| haversine_km(w[0], w[1]))
        .sum()
}

/// Forward azimuth from `a` to `b` in `[0, 360)`.
pub fn initial_bearing_deg(a: GeoPoint, b: GeoPoint) -> Result<f64, GeoError> {
    if a == b {
        return Err(GeoError::UndefinedBearing);
    }
    let (phi1, lambda1) = a.radians();
    let (phi2, lambda2) = b.radians();
    let dlambda = lambda2 - lambda1;
    let y = dlambda.sin() * phi2.cos();
    let x = phi1.cos() * phi2.sin() - phi1.sin() * phi2.cos() * dlambda.cos();
    let deg = y.atan2(x).to_degrees().rem_euclid(360.0);
    // rem_euclid can round up to exactly 360 for tiny negative inputs
    Ok(if deg >= 360.0 { 0.0 } else { deg })
}

/// Nonzero-winding containment in planar lon/lat. Points on an edge count as
/// inside.
pub fn point_in_polygon(p: GeoPoint, ring: &PolygonRing) -> bool {
    let (x, y) = (p.lon_deg, p.lat_deg);
    let v = ring.vertices();
    let n = v.len();
    let mut winding = 0i32;
    for i in 0..n {
        let (x1, y1) = (v[i].lon_deg, v[i].lat_deg);
        let (x2, y2) = (v[(i + 1) % n].lon_deg, v[(i + 1) % n].lat_deg);
        let cross = (x2 - x1) * (y - y1) - (x - x1) * (y2 - y1);
        if cross == 0.0
            && x >= x1.min(x2)
            && x <= x1.max(x2)
            && y >= y1.min(y2)
            && y <= y1.max(y2)
        {
            return true;
        }
        if y1 <= y {
            if y2 > y && cross > 0.0 {
                winding += 1;
            }
        } else if y2 <= y && cross < 0.0 {
            winding -= 1;
        }
    }
    winding != 0
}

/// Area of a lat/lon box as the product of its two mid-line edges.
pub fn bbox_area_km2(b: &BoundingBox) -> f64 {
    let mid_lat = (b.min_lat + b.max_lat) / 2.0;
    let mid_lon = (b.min_lon + b.max_lon) / 2.0;
    let width = haversine_km(
        GeoPoint {
            lat_deg: mid_lat,
            lon_deg: b.min_lon,
        },
        GeoPoint {
            lat_deg: mid_lat,
            lon_deg: b.max_lon,
        },
    );
    let height = haversine_km(
        GeoPoint {
            lat_deg: b.min_lat,
            lon_deg: mid_lon,
        },
        GeoPoint {
            lat_deg: b.max_lat,
            lon_deg: mid_lon,
        },
    );
    width * height
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn pt(lat: f64, lon: f64) -> GeoPoint {
        GeoPoint::new(lat, lon).unwrap()
    }

    // Spherical law of cosines, an independent route to the same distance.
    fn cosine_law_km(a: GeoPoint, b: GeoPoint) -> f64 {
        let (p1, l1) = (a.lat_deg.to_radians(), a.lon_deg.to_radians());
        let (p2, l2) = (b.lat_deg.to_radians(), b.lon_deg.to_radians());
        let c = p1.sin() * p2.sin() + p1.cos() * p2.cos() * (l2 - l1).cos();
        EARTH_RADIUS_KM * c.clamp(-1.0, 1.0).acos()
    }

    #[test]
    fn haversine_examples() {
        assert_eq!(haversine_km(pt(55.0, 14.0), pt(55.0, 14.0)), 0.0);
        let d = haversine_km(pt(55.0, 14.0), pt(55.0, 15.0));
        // frozen from the cosine-law oracle: 63.77824657469599
        assert_relative_eq!(d, 63.77824657469599, max_relative = 1e-6);
        assert_relative_eq!(d, cosine_law_km(pt(55.0, 14.0), pt(55.0, 15.0)), max_relative = 1e-6);
    }

    #[test]
    fn rejects_out_of_range() {
        assert_eq!(GeoPoint::new(91.2, 0.0), Err(GeoError::Latitude(91.2)));
        assert!(GeoPoint::new(0.0, -180.5).is_err());
        assert!(BoundingBox::new(2.0, 0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn path_length_cases() {
        let (a, b, c) = (pt(55.0, 14.0), pt(55.2, 14.3), pt(54.9, 14.8));
        assert_eq!(path_length_km(&[]), 0.0);
        assert_eq!(path_length_km(&[a]), 0.0);
        assert_eq!(path_length_km(&[a, b]), haversine_km(a, b));
        let brute: f64 = [(a, b), (b, c)].iter().map(|&(p, q)| cosine_law_km(p, q)).sum();
        assert_relative_eq!(path_length_km(&[a, b, c]), brute, max_relative = 1e-6);
    }

    #[test]
    fn bearings() {
        assert_eq!(initial_bearing_deg(pt(55.0, 14.0), pt(56.0, 14.0)).unwrap(), 0.0);
        assert_relative_eq!(initial_bearing_deg(pt(0.0, 0.0), pt(0.0, 1.0)).unwrap(), 90.0, epsilon = 1e-12);
        assert_relative_eq!(initial_bearing_deg(pt(0.0, 1.0), pt(0.0, 0.0)).unwrap(), 270.0, epsilon = 1e-12);
        assert_eq!(
            initial_bearing_deg(pt(1.0, 1.0), pt(1.0, 1.0)),
            Err(GeoError::UndefinedBearing)
        );
    }

    #[test]
    fn polygon_examples() {
        let square = PolygonRing::new(vec![pt(0.0, 0.0), pt(0.0, 1.0), pt(1.0, 1.0), pt(1.0, 0.0)]).unwrap();
        assert!(point_in_polygon(pt(0.5, 0.5), &square));
        assert!(point_in_polygon(pt(0.0, 0.5), &square), "edge counts as inside");
        assert!(point_in_polygon(pt(1.0, 1.0), &square), "vertex counts as inside");
        assert!(!point_in_polygon(pt(1.5, 0.5), &square));

        let aoi = PolygonRing::baltic_aoi();
        assert_eq!(aoi.vertices().len(), 79);
        assert!(!point_in_polygon(pt(0.0, 0.0), &aoi));
        assert!(!point_in_polygon(pt(56.5, 12.0), &aoi));
        // west Bornholm lies in the ring's cut-out (winding 0 per oracle)
        assert!(!point_in_polygon(pt(55.10, 14.70), &aoi));
        assert!(point_in_polygon(pt(55.5, 15.5), &aoi));
        assert!(point_in_polygon(pt(54.5, 14.0), &aoi));
    }

    #[test]
    fn ring_validation() {
        assert_eq!(
            PolygonRing::new(vec![pt(0.0, 0.0), pt(0.0, 1.0), pt(0.0, 0.0)]),
            Err(GeoError::TooFewVertices(2))
        );
        assert_eq!(
            PolygonRing::new(vec![pt(0.0, 0.0), pt(0.0, 1.0), pt(0.0, 1.0), pt(1.0, 1.0)]),
            Err(GeoError::RepeatedVertex(2))
        );
        let closed = PolygonRing::new(vec![pt(0.0, 0.0), pt(0.0, 1.0), pt(1.0, 1.0), pt(0.0, 0.0)]).unwrap();
        assert_eq!(closed.vertices().len(), 3);
    }

    #[test]
    fn parse_ring_formats() {
        let text = "# lon lat\n0 0\n1 0\n1 1\n0 1\n";
        let r = PolygonRing::parse(text).unwrap();
        assert_eq!(r.vertices().len(), 4);
        assert_eq!(r.vertices()[1].lon_deg, 1.0);
        let gj = r#"{"type":"Feature","geometry":{"type":"Polygon","coordinates":[[[0,0],[1,0],[1,1],[0,1],[0,0]]]}}"#;
        assert_eq!(PolygonRing::parse(gj).unwrap(), r);
        assert!(PolygonRing::parse("0 0\n1\n").is_err());
    }

    #[test]
    fn bbox_area_examples() {
        let b = BoundingBox::new(55.0, 14.0, 55.0, 14.0).unwrap();
        assert_eq!(bbox_area_km2(&b), 0.0);
        let b = BoundingBox::new(54.5, 14.0, 55.5, 15.0).unwrap();
        let width = cosine_law_km(pt(55.0, 14.0), pt(55.0, 15.0));
        let height = cosine_law_km(pt(54.5, 14.5), pt(55.5, 14.5));
        assert_relative_eq!(bbox_area_km2(&b), width * height, max_relative = 1e-6);
        // frozen oracle value 7091.817449397693
        assert_relative_eq!(bbox_area_km2(&b), 7091.817449397693, max_relative = 1e-9);
    }

    fn arb_point() -> impl Strategy<Value = GeoPoint> {
        (-89.0f64..89.0, -179.0f64..179.0).prop_map(|(lat, lon)| GeoPoint { lat_deg: lat, lon_deg: lon })
    }

    proptest! {
        #[test]
        fn haversine_symmetric_nonnegative(a in arb_point(), b in arb_point()) {
            let d = haversine_km(a, b);
            prop_assert!(d >= 0.0);
            prop_assert_eq!(d, haversine_km(b, a));
            prop_assert_eq!(haversine_km(a, a), 0.0);
        }

        #[test]
        fn triangle_inequality(a in arb_point(), b in arb_point(), c in arb_point()) {
            prop_assert!(haversine_km(a, c) <= haversine_km(a, b) + haversine_km(b, c) + 1e-9);
        }

        #[test]
        fn bearing_in_range(a in arb_point(), b in arb_point()) {
            if a != b {
                let brg = initial_bearing_deg(a, b).unwrap();
                prop_assert!((0.0..360.0).contains(&brg));
            }
        }

        #[test]
        fn path_reversal_invariant(pts in prop::collection::vec(arb_point(), 0..12)) {
            let fwd = path_length_km(&pts);
            let mut rev = pts.clone();
            rev.reverse();
            prop_assert!((fwd - path_length_km(&rev)).abs() <= 1e-9 * fwd.max(1.0));
        }

        #[test]
        fn area_monotone_in_lon(lat0 in 40.0f64..60.0, dlat in 0.0f64..2.0, lon0 in 0.0f64..20.0, w in 0.0f64..3.0, extra in 0.0f64..3.0) {
            let small = BoundingBox::new(lat0, lon0, lat0 + dlat, lon0 + w).unwrap();
            let big = BoundingBox::new(lat0, lon0, lat0 + dlat, lon0 + w + extra).unwrap();
            prop_assert!(bbox_area_km2(&big) >= bbox_area_km2(&small));
        }
    }
}
