use std::fmt;
use std::str::FromStr;

use crate::geo::{GeoPoint, PlanarPoint, Projection};

use super::NetworkError;

/// Default cut length for road segmentation, metres.
pub const DEFAULT_SEGMENT_LEN_M: f64 = 50.0;

/// Remainders shorter than this after the last full cut are treated as
/// floating-point residue rather than a real segment.
const LENGTH_EPS_M: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RoadClass {
    Motorway,
    Primary,
    Secondary,
    Tertiary,
    Residential,
}

impl RoadClass {
    pub const ALL: [RoadClass; 5] = [
        RoadClass::Motorway,
        RoadClass::Primary,
        RoadClass::Secondary,
        RoadClass::Tertiary,
        RoadClass::Residential,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            RoadClass::Motorway => "motorway",
            RoadClass::Primary => "primary",
            RoadClass::Secondary => "secondary",
            RoadClass::Tertiary => "tertiary",
            RoadClass::Residential => "residential",
        }
    }
}

impl fmt::Display for RoadClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RoadClass {
    type Err = NetworkError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "motorway" => Ok(RoadClass::Motorway),
            "primary" => Ok(RoadClass::Primary),
            "secondary" => Ok(RoadClass::Secondary),
            "tertiary" => Ok(RoadClass::Tertiary),
            "residential" => Ok(RoadClass::Residential),
            other => Err(NetworkError::UnknownRoadClass(other.to_string())),
        }
    }
}

/// One input road: a class and a polyline in geographic coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct RoadPolyline {
    pub road_id: String,
    pub road_class: RoadClass,
    pub points: Vec<GeoPoint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoadSegment {
    pub segment_id: u32,
    pub road_class: RoadClass,
    pub polyline: Vec<PlanarPoint>,
    pub length_m: f64,
}

impl RoadSegment {
    pub fn distance_to(&self, p: PlanarPoint) -> f64 {
        point_polyline_distance(p, &self.polyline)
    }

    /// Point halfway along the segment by arc length.
    pub fn midpoint(&self) -> PlanarPoint {
        point_at(&self.polyline, self.length_m / 2.0)
    }

    /// Axis-aligned bounds as `(min, max)`.
    pub fn bounds(&self) -> (PlanarPoint, PlanarPoint) {
        let mut lo = PlanarPoint::new(f64::INFINITY, f64::INFINITY);
        let mut hi = PlanarPoint::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in &self.polyline {
            lo.x = lo.x.min(p.x);
            lo.y = lo.y.min(p.y);
            hi.x = hi.x.max(p.x);
            hi.y = hi.y.max(p.y);
        }
        (lo, hi)
    }
}

/// Euclidean distance from `p` to the closed line segment `a`–`b`.
pub fn point_segment_distance(p: PlanarPoint, a: PlanarPoint, b: PlanarPoint) -> f64 {
    let (vx, vy) = (b.x - a.x, b.y - a.y);
    let len2 = vx * vx + vy * vy;
    if len2 == 0.0 {
        return p.distance(&a);
    }
    let t = (((p.x - a.x) * vx + (p.y - a.y) * vy) / len2).clamp(0.0, 1.0);
    p.distance(&PlanarPoint::new(a.x + t * vx, a.y + t * vy))
}

/// Minimum distance from `p` to any piece of `line`.
pub fn point_polyline_distance(p: PlanarPoint, line: &[PlanarPoint]) -> f64 {
    match line {
        [] => f64::INFINITY,
        [only] => p.distance(only),
        _ => line
            .windows(2)
            .map(|w| point_segment_distance(p, w[0], w[1]))
            .fold(f64::INFINITY, f64::min),
    }
}

pub fn polyline_length(line: &[PlanarPoint]) -> f64 {
    line.windows(2).map(|w| w[0].distance(&w[1])).sum()
}

fn point_at(line: &[PlanarPoint], s: f64) -> PlanarPoint {
    let mut walked = 0.0;
    for w in line.windows(2) {
        let d = w[0].distance(&w[1]);
        if walked + d >= s && d > 0.0 {
            let t = (s - walked) / d;
            return lerp(w[0], w[1], t);
        }
        walked += d;
    }
    *line.last().expect("non-empty polyline")
}

fn lerp(a: PlanarPoint, b: PlanarPoint, t: f64) -> PlanarPoint {
    PlanarPoint::new(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y))
}

/// Cut a planar polyline into pieces of `target_len` by arc length.
///
/// The final piece carries whatever remains and may be shorter.
fn split_polyline(line: &[PlanarPoint], target_len: f64) -> Vec<Vec<PlanarPoint>> {
    let total = polyline_length(line);
    let pieces = ((total - LENGTH_EPS_M) / target_len).ceil().max(1.0) as usize;

    let mut out = Vec::with_capacity(pieces);
    let mut current = vec![line[0]];
    let mut next_cut = target_len;
    let mut walked = 0.0;

    for w in line.windows(2) {
        let (a, b) = (w[0], w[1]);
        let d = a.distance(&b);
        while out.len() + 1 < pieces && walked + d >= next_cut && d > 0.0 {
            let cut = lerp(a, b, (next_cut - walked) / d);
            current.push(cut);
            out.push(std::mem::replace(&mut current, vec![cut]));
            next_cut += target_len;
        }
        if current.last() != Some(&b) {
            current.push(b);
        }
        walked += d;
    }
    if current.len() == 1 {
        // Degenerate tail: the last cut landed on the final vertex.
        current.push(current[0]);
    }
    out.push(current);
    out
}

/// Split every road into segments of at most `target_len_m` metres.
///
/// Segment ids are dense, start at zero and follow input order.
pub fn build_segments(
    roads: &[RoadPolyline],
    target_len_m: f64,
    projection: &Projection,
) -> Result<Vec<RoadSegment>, NetworkError> {
    if !(target_len_m > 0.0 && target_len_m.is_finite()) {
        return Err(NetworkError::InvalidTargetLength(target_len_m));
    }
    let mut segments = Vec::new();
    for road in roads {
        if road.points.len() < 2 {
            return Err(NetworkError::TooFewPoints(road.road_id.clone()));
        }
        let planar: Vec<PlanarPoint> = road.points.iter().map(|p| projection.project(*p)).collect();
        let total = polyline_length(&planar);
        if !(total > 0.0) || !total.is_finite() {
            return Err(NetworkError::ZeroLength(road.road_id.clone()));
        }
        for piece in split_polyline(&planar, target_len_m) {
            let length_m = polyline_length(&piece);
            segments.push(RoadSegment {
                segment_id: u32::try_from(segments.len()).map_err(|_| NetworkError::TooManySegments)?,
                road_class: road.road_class,
                polyline: piece,
                length_m,
            });
        }
    }
    Ok(segments)
}
