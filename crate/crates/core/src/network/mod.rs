//! Road polylines, 50-m segmentation and nearest-segment lookup.

mod index;
pub mod io;
mod segment;

pub use index::{nearest_brute_force, Nearest, SegmentIndex, DEFAULT_CELL_SIZE_M};
pub use segment::{
    build_segments, point_polyline_distance, point_segment_distance, polyline_length, RoadClass,
    RoadPolyline, RoadSegment, DEFAULT_SEGMENT_LEN_M,
};

use crate::geo::GeoError;

/// Snap cutoff used when nothing else is configured, metres.
pub const DEFAULT_MAX_SNAP_M: f64 = 100.0;

#[derive(Debug, thiserror::Error)]
pub enum NetworkError {
    #[error("road {0} has fewer than two points")]
    TooFewPoints(String),
    #[error("road {0} has zero length")]
    ZeroLength(String),
    #[error("target segment length must be positive, got {0}")]
    InvalidTargetLength(f64),
    #[error("grid cell size must be positive, got {0}")]
    InvalidCellSize(f64),
    #[error("cannot index an empty segment list")]
    EmptyNetwork,
    #[error("segment ids must be dense from 0: position {position} holds id {found}")]
    NonDenseIds { position: usize, found: u32 },
    #[error("segment {0} has a non-finite coordinate")]
    NonFiniteCoordinate(u32),
    #[error("network extent too large for the grid")]
    GridTooLarge,
    #[error("more than u32::MAX segments")]
    TooManySegments,
    #[error("unknown road class `{0}`")]
    UnknownRoadClass(String),
    #[error("invalid WKT: {0}")]
    Wkt(String),
    #[error("invalid GeoJSON: {0}")]
    GeoJson(String),
    #[error("bad header: expected `{expected}`, found `{found}`")]
    Header { expected: String, found: String },
    #[error("line {line}: {reason}")]
    Row { line: u64, reason: String },
    #[error(transparent)]
    Geo(#[from] GeoError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
