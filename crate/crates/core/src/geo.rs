//! Geographic and planar coordinates.
//!
//! All distance math runs in a local equirectangular projection centred on a
//! fixed origin (normally the road network centroid). At city scale the
//! projection is accurate to well under a metre, which is far below the
//! ±10 m GPS error of the sensors.

use std::fmt;

/// Mean Earth radius in metres.
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeoPoint {
    pub lat: f64,
    pub lon: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum GeoError {
    #[error("latitude out of range: {0}")]
    Latitude(f64),
    #[error("longitude out of range: {0}")]
    Longitude(f64),
}

impl GeoPoint {
    /// Validating constructor; NaN fails both range checks.
    pub fn new(lat: f64, lon: f64) -> Result<Self, GeoError> {
        if !(-90.0..=90.0).contains(&lat) {
            return Err(GeoError::Latitude(lat));
        }
        if !(-180.0..=180.0).contains(&lon) {
            return Err(GeoError::Longitude(lon));
        }
        Ok(Self { lat, lon })
    }
}

impl fmt::Display for GeoPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.lat, self.lon)
    }
}

/// Metres east (`x`) and north (`y`) of a projection origin.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PlanarPoint {
    pub x: f64,
    pub y: f64,
}

impl PlanarPoint {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &PlanarPoint) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        (dx * dx + dy * dy).sqrt()
    }
}

/// Equirectangular projection about a fixed origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    origin: GeoPoint,
    cos_lat0: f64,
}

impl Projection {
    pub fn new(origin: GeoPoint) -> Self {
        Self {
            origin,
            cos_lat0: origin.lat.to_radians().cos(),
        }
    }

    /// Projection centred on the arithmetic mean of `points`.
    ///
    /// Returns `None` for an empty iterator.
    pub fn centered_on<'a, I>(points: I) -> Option<Self>
    where
        I: IntoIterator<Item = &'a GeoPoint>,
    {
        let (mut lat, mut lon, mut n) = (0.0, 0.0, 0usize);
        for p in points {
            lat += p.lat;
            lon += p.lon;
            n += 1;
        }
        if n == 0 {
            return None;
        }
        Some(Self::new(GeoPoint {
            lat: lat / n as f64,
            lon: lon / n as f64,
        }))
    }

    pub fn origin(&self) -> GeoPoint {
        self.origin
    }

    pub fn project(&self, p: GeoPoint) -> PlanarPoint {
        PlanarPoint {
            x: EARTH_RADIUS_M * self.cos_lat0 * (p.lon - self.origin.lon).to_radians(),
            y: EARTH_RADIUS_M * (p.lat - self.origin.lat).to_radians(),
        }
    }

    pub fn unproject(&self, p: PlanarPoint) -> GeoPoint {
        GeoPoint {
            lat: self.origin.lat + (p.y / EARTH_RADIUS_M).to_degrees(),
            lon: self.origin.lon + (p.x / (EARTH_RADIUS_M * self.cos_lat0)).to_degrees(),
        }
    }
}

/// Free-function form of [`Projection::project`].
pub fn project(p: GeoPoint, origin: GeoPoint) -> PlanarPoint {
    Projection::new(origin).project(p)
}
