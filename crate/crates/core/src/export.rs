//! GeoJSON output for map viewers.

use std::io::{self, Write};

use serde_json::{json, Map, Value};

use crate::geo::Projection;
use crate::hotspot::HotspotResult;
use crate::network::RoadSegment;
use crate::pollutant::Pollutant;
use crate::reduce::SegmentSummary;

fn line(seg: &RoadSegment, proj: &Projection) -> Value {
    let coords: Vec<Value> = seg
        .polyline
        .iter()
        .map(|p| {
            let g = proj.unproject(*p);
            json!([round7(g.lon), round7(g.lat)])
        })
        .collect();
    json!({ "type": "LineString", "coordinates": coords })
}

// ~1 cm; keeps files small without moving anything visibly.
fn round7(v: f64) -> f64 {
    (v * 1e7).round() / 1e7
}

fn number(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        Value::Null
    }
}

fn feature(geometry: Value, properties: Map<String, Value>) -> Value {
    json!({ "type": "Feature", "geometry": geometry, "properties": properties })
}

fn collection(features: Vec<Value>) -> Value {
    json!({ "type": "FeatureCollection", "features": features })
}

/// One feature per summarised segment, carrying its long-term medians.
pub fn summaries_geojson(segments: &[RoadSegment], proj: &Projection, summaries: &[SegmentSummary]) -> Value {
    let features = summaries
        .iter()
        .filter_map(|s| {
            let seg = segments.get(s.segment_id as usize)?;
            let mut props = Map::new();
            props.insert("segment_id".into(), json!(s.segment_id));
            props.insert("road_class".into(), json!(seg.road_class.as_str()));
            for p in Pollutant::ALL {
                props.insert(format!("{p}_median"), number(*s.median.get(p)));
            }
            props.insert("distinct_days".into(), json!(s.distinct_days));
            props.insert("hours_with_data".into(), json!(s.hours_with_data));
            Some(feature(line(seg, proj), props))
        })
        .collect();
    collection(features)
}

/// One feature per segment with at least one hotspot pollutant.
pub fn hotspots_geojson(segments: &[RoadSegment], proj: &Projection, results: &[HotspotResult]) -> Value {
    let features = results
        .iter()
        .filter(|r| r.any_hotspot())
        .filter_map(|r| {
            let seg = segments.get(r.segment_id as usize)?;
            let mut props = Map::new();
            props.insert("segment_id".into(), json!(r.segment_id));
            props.insert("valid_days".into(), json!(r.valid_days));
            for p in Pollutant::ALL {
                props.insert(format!("{p}_hotspot"), json!(r.is_hotspot.get(p)));
                let level = r.dominant.get(p).map(|l| json!(l.ordinal())).unwrap_or(Value::Null);
                props.insert(format!("{p}_level"), level);
            }
            Some(feature(line(seg, proj), props))
        })
        .collect();
    collection(features)
}

pub fn write_geojson<W: Write>(w: W, value: &Value) -> io::Result<()> {
    let mut w = io::BufWriter::new(w);
    serde_json::to_writer(&mut w, value)?;
    writeln!(w)?;
    w.flush()
}
