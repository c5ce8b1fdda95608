//! Agreement between mobile observations and fixed-site stations.
//!
//! Mobile samples inside a circular buffer around each station are reduced
//! to one median per local clock hour and paired with the station's hourly
//! value. Each `(station, pollutant)` series is then scored with the usual
//! air-quality model evaluation statistics, with the mobile series in the
//! "prediction" role and the station in the "observation" role.

mod io;
mod metrics;

use std::collections::BTreeMap;

use rayon::prelude::*;

pub use io::{parse_stations, write_metrics_csv, StationParse, METRICS_CSV_HEADER, STATIONS_CSV_HEADER};
pub use metrics::{compute_metrics, Bands, MetricReport};

use crate::geo::{GeoPoint, Projection};
use crate::ingest::Observation;
use crate::pollutant::{PerPollutant, Pollutant};
use crate::reduce::median_in_place;
use crate::time::local_hour_start;

pub const DEFAULT_BUFFER_RADIUS_M: f64 = 500.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CompareError {
    #[error("no pairs to score")]
    NoPairs,
    #[error("pairs from more than one station/pollutant passed to a single report")]
    MixedGroup,
    #[error("missing or malformed header: expected `{expected}`, found `{found}`")]
    Header { expected: String, found: String },
    #[error("{0}")]
    Csv(String),
}

impl From<csv::Error> for CompareError {
    fn from(e: csv::Error) -> Self {
        CompareError::Csv(e.to_string())
    }
}

/// One hourly record from a fixed monitoring station. Missing pollutants are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct StationRecord {
    pub station_id: String,
    pub location: GeoPoint,
    pub hour_start: i64,
    pub values: PerPollutant<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HourPair {
    pub station_id: String,
    pub hour_start: i64,
    pub pollutant: Pollutant,
    /// Median of mobile samples in the buffer during the hour.
    pub mobile: f64,
    pub fixed: f64,
    pub mobile_samples: u32,
}

/// Pair buffer-hour mobile medians with station hourly values.
///
/// A station's location is taken from its first record. Hours where either
/// side is missing are dropped. Output is sorted by station, pollutant, hour.
pub fn pair_buffer_hours(
    obs: &[Observation],
    stations: &[StationRecord],
    projection: &Projection,
    radius_m: f64,
    tz_offset_s: i64,
) -> Vec<HourPair> {
    let mut sites: BTreeMap<&str, GeoPoint> = BTreeMap::new();
    for r in stations {
        sites.entry(r.station_id.as_str()).or_insert(r.location);
    }
    let sites: Vec<(&str, crate::geo::PlanarPoint)> =
        sites.into_iter().map(|(id, loc)| (id, projection.project(loc))).collect();

    // (site, hour) -> samples, collected in parallel and merged in key order.
    type Buckets = BTreeMap<(usize, i64), Vec<[f64; 3]>>;
    let buckets: Buckets = obs
        .par_iter()
        .with_min_len(4096)
        .fold(Buckets::new, |mut acc, o| {
            let p = projection.project(o.location);
            for (i, (_, site)) in sites.iter().enumerate() {
                if p.distance(site) <= radius_m {
                    let hour = local_hour_start(o.timestamp, tz_offset_s);
                    acc.entry((i, hour)).or_default().push([o.no2, o.pm25, o.pm10]);
                }
            }
            acc
        })
        .reduce(Buckets::new, |mut a, b| {
            for (k, mut v) in b {
                a.entry(k).or_default().append(&mut v);
            }
            a
        });

    let mut fixed: BTreeMap<(usize, i64), &StationRecord> = BTreeMap::new();
    let site_of: BTreeMap<&str, usize> = sites.iter().enumerate().map(|(i, (id, _))| (*id, i)).collect();
    for r in stations {
        let key = (site_of[r.station_id.as_str()], local_hour_start(r.hour_start, tz_offset_s));
        fixed.entry(key).or_insert(r);
    }

    let mut pairs = Vec::new();
    for (&(site, hour), samples) in &buckets {
        let Some(rec) = fixed.get(&(site, hour)) else { continue };
        for (slot, p) in Pollutant::ALL.into_iter().enumerate() {
            let Some(f) = *rec.values.get(p) else { continue };
            let mut vals: Vec<f64> = samples.iter().map(|s| s[slot]).filter(|v| v.is_finite()).collect();
            let Some(m) = median_in_place(&mut vals) else { continue };
            pairs.push(HourPair {
                station_id: sites[site].0.to_string(),
                hour_start: hour,
                pollutant: p,
                mobile: m,
                fixed: f,
                mobile_samples: vals.len() as u32,
            });
        }
    }
    pairs.sort_by(|a, b| {
        (a.station_id.as_str(), a.pollutant, a.hour_start).cmp(&(b.station_id.as_str(), b.pollutant, b.hour_start))
    });
    pairs
}

/// Score every `(station, pollutant)` group in `pairs`.
pub fn compare_all(pairs: &[HourPair]) -> Vec<MetricReport> {
    let mut groups: BTreeMap<(&str, Pollutant), Vec<HourPair>> = BTreeMap::new();
    for p in pairs {
        groups.entry((p.station_id.as_str(), p.pollutant)).or_default().push(p.clone());
    }
    let groups: Vec<Vec<HourPair>> = groups.into_values().collect();
    groups
        .par_iter()
        .filter_map(|g| compute_metrics(g).ok())
        .collect()
}
