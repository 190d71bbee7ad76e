//! Geographic primitives: points, bounding boxes, rings, and the
//! distance/bearing conventions used everywhere else in the crate.
//!
//! All coordinates are lon/lat in degrees. Distances are great-circle
//! kilometers on a sphere of radius 6371.0088 km.

use serde::{Deserialize, Serialize};

/// Mean Earth radius in kilometers.
pub const EARTH_RADIUS_KM: f64 = 6371.0088;

/// Kilometers per degree of latitude (and of longitude at the equator).
pub const KM_PER_DEG: f64 = EARTH_RADIUS_KM * std::f64::consts::PI / 180.0;

/// A lon/lat point in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    pub lon: f64,
    pub lat: f64,
}

impl GeoPoint {
    pub fn new(lon: f64, lat: f64) -> Self {
        Self { lon, lat }
    }

    /// True when lon is in [-180, 180] and lat is in [-90, 90].
    pub fn in_range(&self) -> bool {
        (-180.0..=180.0).contains(&self.lon) && (-90.0..=90.0).contains(&self.lat)
    }

    /// Great-circle distance to `other` in kilometers (haversine).
    pub fn distance_km(&self, other: &GeoPoint) -> f64 {
        let lat1 = self.lat.to_radians();
        let lat2 = other.lat.to_radians();
        let dlat = (other.lat - self.lat).to_radians();
        let dlon = (other.lon - self.lon).to_radians();

        let a = (dlat / 2.0).sin().powi(2)
            + lat1.cos() * lat2.cos() * (dlon / 2.0).sin().powi(2);
        let c = 2.0 * a.sqrt().atan2((1.0 - a).sqrt());
        EARTH_RADIUS_KM * c
    }

    /// Initial great-circle bearing from `self` to `other`, degrees in [0, 360).
    pub fn bearing_deg(&self, other: &GeoPoint) -> f64 {
        let lat1 = self.lat.to_radians();
        let lat2 = other.lat.to_radians();
        let dlon = (other.lon - self.lon).to_radians();

        let y = dlon.sin() * lat2.cos();
        let x = lat1.cos() * lat2.sin() - lat1.sin() * lat2.cos() * dlon.cos();
        (y.atan2(x).to_degrees() + 360.0) % 360.0
    }
}

/// Point reached by traveling `km` from `origin` along an initial
/// `bearing_deg` on the sphere.
pub fn destination(origin: &GeoPoint, bearing_deg: f64, km: f64) -> GeoPoint {
    let delta = km / EARTH_RADIUS_KM;
    let theta = bearing_deg.to_radians();
    let lat1 = origin.lat.to_radians();
    let lon1 = origin.lon.to_radians();
    let lat2 = (lat1.sin() * delta.cos() + lat1.cos() * delta.sin() * theta.cos()).asin();
    let lon2 = lon1
        + (theta.sin() * delta.sin() * lat1.cos()).atan2(delta.cos() - lat1.sin() * lat2.sin());
    GeoPoint::new(lon2.to_degrees(), lat2.to_degrees())
}

/// Smallest absolute angular separation between two bearings, degrees in [0, 180].
pub fn angular_separation_deg(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(360.0);
    if d > 180.0 {
        360.0 - d
    } else {
        d
    }
}

/// Axis-aligned lon/lat bounding box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub min_lon: f64,
    pub min_lat: f64,
    pub max_lon: f64,
    pub max_lat: f64,
}

impl BBox {
    pub fn new(min_lon: f64, min_lat: f64, max_lon: f64, max_lat: f64) -> Self {
        Self {
            min_lon,
            min_lat,
            max_lon,
            max_lat,
        }
    }

    /// Degenerate box at a single point.
    pub fn from_point(p: GeoPoint) -> Self {
        Self::new(p.lon, p.lat, p.lon, p.lat)
    }

    /// Bounding box of a vertex list; `None` when the list is empty.
    pub fn from_points<'a, I: IntoIterator<Item = &'a GeoPoint>>(points: I) -> Option<Self> {
        let mut it = points.into_iter();
        let first = it.next()?;
        let mut b = Self::from_point(*first);
        for p in it {
            b.min_lon = b.min_lon.min(p.lon);
            b.min_lat = b.min_lat.min(p.lat);
            b.max_lon = b.max_lon.max(p.lon);
            b.max_lat = b.max_lat.max(p.lat);
        }
        Some(b)
    }

    pub fn center(&self) -> GeoPoint {
        GeoPoint::new(
            (self.min_lon + self.max_lon) / 2.0,
            (self.min_lat + self.max_lat) / 2.0,
        )
    }

    pub fn contains_point(&self, p: &GeoPoint) -> bool {
        p.lon >= self.min_lon && p.lon <= self.max_lon && p.lat >= self.min_lat && p.lat <= self.max_lat
    }

    pub fn contains_box(&self, other: &BBox) -> bool {
        self.min_lon <= other.min_lon
            && self.min_lat <= other.min_lat
            && self.max_lon >= other.max_lon
            && self.max_lat >= other.max_lat
    }

    pub fn intersects(&self, other: &BBox) -> bool {
        self.min_lon <= other.max_lon
            && other.min_lon <= self.max_lon
            && self.min_lat <= other.max_lat
            && other.min_lat <= self.max_lat
    }

    pub fn union(&self, other: &BBox) -> BBox {
        BBox::new(
            self.min_lon.min(other.min_lon),
            self.min_lat.min(other.min_lat),
            self.max_lon.max(other.max_lon),
            self.max_lat.max(other.max_lat),
        )
    }

    /// Expand the box by `km` on every side. Longitude expansion uses the
    /// widest latitude of the box so the result always contains every point
    /// within `km` of the original box.
    pub fn buffer_km(&self, km: f64) -> BBox {
        if km <= 0.0 {
            return *self;
        }
        let dlat = km / KM_PER_DEG;
        let widest_lat = self.min_lat.abs().max(self.max_lat.abs()).min(89.0);
        let cos_lat = widest_lat.to_radians().cos().max(0.01);
        let dlon = km / (KM_PER_DEG * cos_lat);
        BBox::new(
            (self.min_lon - dlon).max(-180.0),
            (self.min_lat - dlat).max(-90.0),
            (self.max_lon + dlon).min(180.0),
            (self.max_lat + dlat).min(90.0),
        )
    }
}

/// A closed lon/lat ring (first vertex equals last, at least 4 vertices).
pub type Ring = Vec<GeoPoint>;

/// True when `ring` is closed and has at least 4 vertices.
pub fn ring_is_closed(ring: &[GeoPoint]) -> bool {
    ring.len() >= 4 && ring.first() == ring.last()
}

/// Planar shoelace centroid of a closed ring. Falls back to the vertex
/// mean for degenerate (zero-area) rings.
pub fn ring_centroid(ring: &[GeoPoint]) -> GeoPoint {
    let mut area2 = 0.0;
    let mut cx = 0.0;
    let mut cy = 0.0;
    for w in ring.windows(2) {
        let cross = w[0].lon * w[1].lat - w[1].lon * w[0].lat;
        area2 += cross;
        cx += (w[0].lon + w[1].lon) * cross;
        cy += (w[0].lat + w[1].lat) * cross;
    }
    if area2.abs() < 1e-12 {
        let n = (ring.len() - 1).max(1) as f64;
        let (sx, sy) = ring[..ring.len() - 1]
            .iter()
            .fold((0.0, 0.0), |(sx, sy), p| (sx + p.lon, sy + p.lat));
        return GeoPoint::new(sx / n, sy / n);
    }
    GeoPoint::new(cx / (3.0 * area2), cy / (3.0 * area2))
}

/// Even-odd ray-cast point-in-ring test on raw lon/lat coordinates.
pub fn point_in_ring(p: &GeoPoint, ring: &[GeoPoint]) -> bool {
    let mut inside = false;
    for w in ring.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let crosses = (a.lat > p.lat) != (b.lat > p.lat);
        if crosses {
            let t = (p.lat - a.lat) / (b.lat - a.lat);
            let x = a.lon + t * (b.lon - a.lon);
            if x > p.lon {
                inside = !inside;
            }
        }
    }
    inside
}

/// Distance in km from `p` to the boundary of the ring, 0 when `p` is
/// inside. Segment distances use a local equirectangular frame, which is
/// accurate at the city scales this engine works with.
pub fn distance_to_ring_km(p: &GeoPoint, ring: &[GeoPoint]) -> f64 {
    if point_in_ring(p, ring) {
        return 0.0;
    }
    let cos_lat = p.lat.to_radians().cos().max(0.01);
    let to_xy = |q: &GeoPoint| -> (f64, f64) {
        (
            (q.lon - p.lon) * KM_PER_DEG * cos_lat,
            (q.lat - p.lat) * KM_PER_DEG,
        )
    };
    let mut best = f64::INFINITY;
    for w in ring.windows(2) {
        let (ax, ay) = to_xy(&w[0]);
        let (bx, by) = to_xy(&w[1]);
        let (dx, dy) = (bx - ax, by - ay);
        let len2 = dx * dx + dy * dy;
        let t = if len2 <= f64::EPSILON {
            0.0
        } else {
            (-(ax * dx + ay * dy) / len2).clamp(0.0, 1.0)
        };
        let (qx, qy) = (ax + t * dx, ay + t * dy);
        best = best.min((qx * qx + qy * qy).sqrt());
    }
    best
}
