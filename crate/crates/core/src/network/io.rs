//! Road and segment file formats.
//!
//! Roads arrive either as CSV (`road_id,road_class,wkt_linestring`) or as a
//! GeoJSON FeatureCollection of LineStrings carrying a `road_class`
//! property. Segments are written as CSV
//! (`segment_id,road_class,length_m,wkt_linestring`). WKT coordinates are
//! always `lon lat`.

use std::fmt::Write as _;
use std::io::{Read, Write};

use serde_json::Value;

use crate::geo::{GeoPoint, PlanarPoint, Projection};

use super::{NetworkError, RoadClass, RoadPolyline, RoadSegment};

pub const ROADS_CSV_HEADER: [&str; 3] = ["road_id", "road_class", "wkt_linestring"];
pub const SEGMENTS_CSV_HEADER: [&str; 4] = ["segment_id", "road_class", "length_m", "wkt_linestring"];

/// Parse `LINESTRING (lon lat, lon lat, ...)`.
pub fn parse_wkt_linestring(s: &str) -> Result<Vec<GeoPoint>, NetworkError> {
    let bad = |why: &str| NetworkError::Wkt(format!("{why}: {}", truncate(s, 60)));
    let t = s.trim();
    let keyword = "LINESTRING";
    if t.len() < keyword.len() || !t[..keyword.len()].eq_ignore_ascii_case(keyword) {
        return Err(bad("expected LINESTRING"));
    }
    let body = t[keyword.len()..].trim();
    let inner = body
        .strip_prefix('(')
        .and_then(|b| b.strip_suffix(')'))
        .ok_or_else(|| bad("unbalanced parentheses"))?;
    let mut points = Vec::new();
    for pair in inner.split(',') {
        let mut it = pair.split_whitespace();
        let (Some(lon), Some(lat), None) = (it.next(), it.next(), it.next()) else {
            return Err(bad("expected `lon lat` pairs"));
        };
        let lon: f64 = lon.parse().map_err(|_| bad("invalid longitude"))?;
        let lat: f64 = lat.parse().map_err(|_| bad("invalid latitude"))?;
        points.push(GeoPoint::new(lat, lon)?);
    }
    if points.len() < 2 {
        return Err(bad("fewer than two points"));
    }
    Ok(points)
}

pub fn format_wkt_linestring(points: &[GeoPoint]) -> String {
    let mut s = String::from("LINESTRING (");
    for (i, p) in points.iter().enumerate() {
        if i > 0 {
            s.push_str(", ");
        }
        let _ = write!(s, "{} {}", p.lon, p.lat);
    }
    s.push(')');
    s
}

fn truncate(s: &str, n: usize) -> &str {
    match s.char_indices().nth(n) {
        Some((i, _)) => &s[..i],
        None => s,
    }
}

fn check_header(found: &csv::ByteRecord, expected: &[&str]) -> Result<(), NetworkError> {
    let got: Vec<String> = found.iter().map(|f| String::from_utf8_lossy(f).trim().to_string()).collect();
    if got.len() != expected.len() || got.iter().zip(expected).any(|(g, e)| g != e) {
        return Err(NetworkError::Header {
            expected: expected.join(","),
            found: got.join(","),
        });
    }
    Ok(())
}

fn csv_reader<R: Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().has_headers(true).flexible(true).from_reader(r)
}

fn field(rec: &csv::ByteRecord, i: usize, line: u64) -> Result<&str, NetworkError> {
    let raw = rec.get(i).ok_or(NetworkError::Row { line, reason: format!("missing column {}", i + 1) })?;
    std::str::from_utf8(raw)
        .map(str::trim)
        .map_err(|_| NetworkError::Row { line, reason: "invalid UTF-8".into() })
}

/// Roads CSV. Any malformed row fails the whole file: a network with holes
/// would silently bias every downstream estimate.
pub fn read_roads_csv<R: Read>(r: R) -> Result<Vec<RoadPolyline>, NetworkError> {
    let mut rdr = csv_reader(r);
    check_header(rdr.byte_headers()?, &ROADS_CSV_HEADER)?;
    let mut roads = Vec::new();
    let mut rec = csv::ByteRecord::new();
    while rdr.read_byte_record(&mut rec)? {
        let line = rec.position().map_or(0, |p| p.line());
        let row = |e: NetworkError| NetworkError::Row { line, reason: e.to_string() };
        let road_id = field(&rec, 0, line)?.to_string();
        let road_class = field(&rec, 1, line)?.parse().map_err(row)?;
        let points = parse_wkt_linestring(field(&rec, 2, line)?).map_err(row)?;
        roads.push(RoadPolyline { road_id, road_class, points });
    }
    Ok(roads)
}

/// GeoJSON FeatureCollection of LineString features.
pub fn read_roads_geojson(bytes: &[u8]) -> Result<Vec<RoadPolyline>, NetworkError> {
    let doc: Value = serde_json::from_slice(bytes)?;
    let bad = |why: String| NetworkError::GeoJson(why);
    if doc.get("type").and_then(Value::as_str) != Some("FeatureCollection") {
        return Err(bad("top level must be a FeatureCollection".into()));
    }
    let features = doc
        .get("features")
        .and_then(Value::as_array)
        .ok_or_else(|| bad("missing `features` array".into()))?;
    let mut roads = Vec::with_capacity(features.len());
    for (i, f) in features.iter().enumerate() {
        let geom = f.get("geometry").ok_or_else(|| bad(format!("feature {i}: missing geometry")))?;
        if geom.get("type").and_then(Value::as_str) != Some("LineString") {
            return Err(bad(format!("feature {i}: geometry is not a LineString")));
        }
        let coords = geom
            .get("coordinates")
            .and_then(Value::as_array)
            .ok_or_else(|| bad(format!("feature {i}: missing coordinates")))?;
        let mut points = Vec::with_capacity(coords.len());
        for c in coords {
            let pos = c.as_array().filter(|a| a.len() >= 2);
            let (Some(lon), Some(lat)) = (
                pos.and_then(|a| a[0].as_f64()),
                pos.and_then(|a| a[1].as_f64()),
            ) else {
                return Err(bad(format!("feature {i}: invalid position")));
            };
            points.push(GeoPoint::new(lat, lon)?);
        }
        if points.len() < 2 {
            return Err(bad(format!("feature {i}: fewer than two points")));
        }
        let props = f.get("properties");
        let road_class = props
            .and_then(|p| p.get("road_class"))
            .and_then(Value::as_str)
            .ok_or_else(|| bad(format!("feature {i}: missing road_class")))?
            .parse()?;
        let road_id = match props.and_then(|p| p.get("road_id")).or_else(|| f.get("id")) {
            Some(Value::String(s)) => s.clone(),
            Some(Value::Number(n)) => n.to_string(),
            _ => i.to_string(),
        };
        roads.push(RoadPolyline { road_id, road_class, points });
    }
    Ok(roads)
}

/// Dispatch on content: a leading `{` means GeoJSON, anything else CSV.
pub fn read_roads(bytes: &[u8]) -> Result<Vec<RoadPolyline>, NetworkError> {
    let first = bytes.iter().find(|b| !b.is_ascii_whitespace());
    if first == Some(&b'{') {
        read_roads_geojson(bytes)
    } else {
        read_roads_csv(bytes)
    }
}

pub fn write_roads_csv<W: Write>(w: W, roads: &[RoadPolyline]) -> Result<(), NetworkError> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(ROADS_CSV_HEADER)?;
    for r in roads {
        wtr.write_record([r.road_id.as_str(), r.road_class.as_str(), &format_wkt_linestring(&r.points)])?;
    }
    wtr.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_segments_csv<W: Write>(
    w: W,
    segments: &[RoadSegment],
    projection: &Projection,
) -> Result<(), NetworkError> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(SEGMENTS_CSV_HEADER)?;
    for s in segments {
        let geo: Vec<GeoPoint> = s.polyline.iter().map(|p| projection.unproject(*p)).collect();
        wtr.write_record([
            s.segment_id.to_string(),
            s.road_class.to_string(),
            format!("{:.3}", s.length_m),
            format_wkt_linestring(&geo),
        ])?;
    }
    wtr.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Segment geometry as stored on disk, before projection.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentRecord {
    pub segment_id: u32,
    pub road_class: RoadClass,
    pub points: Vec<GeoPoint>,
}

pub fn read_segments_csv<R: Read>(r: R) -> Result<Vec<SegmentRecord>, NetworkError> {
    let mut rdr = csv_reader(r);
    check_header(rdr.byte_headers()?, &SEGMENTS_CSV_HEADER)?;
    let mut out = Vec::new();
    let mut rec = csv::ByteRecord::new();
    while rdr.read_byte_record(&mut rec)? {
        let line = rec.position().map_or(0, |p| p.line());
        let row = |reason: String| NetworkError::Row { line, reason };
        let segment_id = field(&rec, 0, line)?
            .parse()
            .map_err(|_| row("invalid segment_id".into()))?;
        let road_class = field(&rec, 1, line)?.parse().map_err(|e: NetworkError| row(e.to_string()))?;
        let points = parse_wkt_linestring(field(&rec, 3, line)?).map_err(|e| row(e.to_string()))?;
        out.push(SegmentRecord { segment_id, road_class, points });
    }
    Ok(out)
}

/// Project stored segments. Ids must be dense and in order.
pub fn segments_from_records(
    records: &[SegmentRecord],
    projection: &Projection,
) -> Result<Vec<RoadSegment>, NetworkError> {
    records
        .iter()
        .enumerate()
        .map(|(i, r)| {
            if r.segment_id as usize != i {
                return Err(NetworkError::NonDenseIds { position: i, found: r.segment_id });
            }
            let polyline: Vec<PlanarPoint> = r.points.iter().map(|p| projection.project(*p)).collect();
            Ok(RoadSegment {
                segment_id: r.segment_id,
                road_class: r.road_class,
                length_m: super::polyline_length(&polyline),
                polyline,
            })
        })
        .collect()
}
