//! Snapping observations to segments and condensing them into median
//! hourly and long-term per-segment estimates.
//!
//! Medians are exact (selection over the full group). Grouping work is split
//! by segment, and every output is sorted by `(segment_id, hour_start)`, so
//! results do not depend on input order or on the size of the rayon pool the
//! caller installs.

mod io;

use std::collections::BTreeSet;

use rayon::prelude::*;

pub use io::{write_estimates_csv, write_summaries_csv, ESTIMATES_CSV_HEADER, SUMMARIES_CSV_HEADER};

use crate::geo::Projection;
use crate::ingest::Observation;
use crate::network::{Nearest, SegmentIndex};
use crate::pollutant::{PerPollutant, Pollutant};
use crate::time::{local_day, local_hour_start};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ReduceError {
    #[error("median of an empty set")]
    Empty,
    #[error("non-finite value in median input")]
    NonFinite,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SnappedObservation {
    pub segment_id: u32,
    pub snap_distance_m: f64,
    pub observation: Observation,
}

#[derive(Debug, Default)]
pub struct SnapOutcome {
    /// Snapped records in input order.
    pub snapped: Vec<SnappedObservation>,
    /// Records farther than the cutoff from every segment.
    pub rejected: usize,
}

/// Assign each observation to its nearest segment within `max_snap_m`.
pub fn snap_observations(
    obs: Vec<Observation>,
    index: &SegmentIndex,
    projection: &Projection,
    max_snap_m: f64,
) -> SnapOutcome {
    let hits: Vec<Option<Nearest>> = obs
        .par_iter()
        .with_min_len(4096)
        .map(|o| index.nearest(projection.project(o.location), max_snap_m))
        .collect();
    let mut out = SnapOutcome {
        snapped: Vec::with_capacity(hits.iter().filter(|h| h.is_some()).count()),
        rejected: 0,
    };
    for (observation, hit) in obs.into_iter().zip(hits) {
        match hit {
            Some(n) => out.snapped.push(SnappedObservation {
                segment_id: n.segment_id,
                snap_distance_m: n.distance_m,
                observation,
            }),
            None => out.rejected += 1,
        }
    }
    out
}

/// Median of a non-empty set; the mean of the two middle values for even sizes.
pub fn median(values: &[f64]) -> Result<f64, ReduceError> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(ReduceError::NonFinite);
    }
    let mut buf = values.to_vec();
    median_in_place(&mut buf).ok_or(ReduceError::Empty)
}

/// Selection-based median. Reorders `values`; `None` when empty.
pub(crate) fn median_in_place(values: &mut [f64]) -> Option<f64> {
    let n = values.len();
    if n == 0 {
        return None;
    }
    let mid = n / 2;
    let (lower, upper, _) = values.select_nth_unstable_by(mid, f64::total_cmp);
    if n % 2 == 1 {
        return Some(*upper);
    }
    let below = lower.iter().copied().max_by(f64::total_cmp)?;
    Some((below + *upper) / 2.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentHourEstimate {
    pub segment_id: u32,
    /// UTC epoch of the start of the local clock hour.
    pub hour_start: i64,
    pub median: PerPollutant<f64>,
    pub samples: PerPollutant<u32>,
}

#[derive(Clone, Copy)]
struct Keyed {
    segment_id: u32,
    hour_start: i64,
    values: [f64; 3],
}

/// Median per `(segment, local clock hour)`, sorted by that key.
pub fn aggregate_hourly(snapped: &[SnappedObservation], tz_offset_s: i64) -> Vec<SegmentHourEstimate> {
    let mut keyed: Vec<Keyed> = snapped
        .par_iter()
        .with_min_len(4096)
        .map(|s| Keyed {
            segment_id: s.segment_id,
            hour_start: local_hour_start(s.observation.timestamp, tz_offset_s),
            values: [s.observation.no2, s.observation.pm25, s.observation.pm10],
        })
        .collect();
    keyed.par_sort_unstable_by_key(|k| (k.segment_id, k.hour_start));

    let groups = group_bounds(&keyed, |a, b| a.segment_id == b.segment_id && a.hour_start == b.hour_start);
    groups
        .par_iter()
        .with_min_len(256)
        .map(|&(lo, hi)| {
            let group = &keyed[lo..hi];
            let mut buf = Vec::with_capacity(group.len());
            let per = PerPollutant::from_fn(|p| {
                let slot = pollutant_slot(p);
                buf.clear();
                buf.extend(group.iter().map(|k| k.values[slot]).filter(|v| v.is_finite()));
                (median_in_place(&mut buf), buf.len() as u32)
            });
            SegmentHourEstimate {
                segment_id: group[0].segment_id,
                hour_start: group[0].hour_start,
                median: per.map(|_, (m, _)| m.unwrap_or(f64::NAN)),
                samples: per.map(|_, (_, n)| *n),
            }
        })
        .collect()
}

fn pollutant_slot(p: Pollutant) -> usize {
    match p {
        Pollutant::No2 => 0,
        Pollutant::Pm25 => 1,
        Pollutant::Pm10 => 2,
    }
}

/// Half-open `[start, end)` runs of consecutive equal elements.
pub(crate) fn group_bounds<T>(items: &[T], same: impl Fn(&T, &T) -> bool) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=items.len() {
        if i == items.len() || !same(&items[start], &items[i]) {
            if i > start {
                out.push((start, i));
            }
            start = i;
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentSummary {
    pub segment_id: u32,
    /// Median of the segment's hourly medians.
    pub median: PerPollutant<f64>,
    pub distinct_days: u32,
    pub hours_with_data: u32,
}

/// One long-term estimate per segment: the median of its hourly medians.
pub fn summarize_segments(estimates: &[SegmentHourEstimate], tz_offset_s: i64) -> Vec<SegmentSummary> {
    let mut sorted: Vec<&SegmentHourEstimate> = estimates.iter().collect();
    sorted.sort_by_key(|e| (e.segment_id, e.hour_start));
    let groups = group_bounds(&sorted, |a, b| a.segment_id == b.segment_id);
    groups
        .par_iter()
        .map(|&(lo, hi)| {
            let group = &sorted[lo..hi];
            let median = PerPollutant::from_fn(|p| {
                let mut vals: Vec<f64> = group
                    .iter()
                    .filter(|e| *e.samples.get(p) > 0)
                    .map(|e| *e.median.get(p))
                    .collect();
                median_in_place(&mut vals).unwrap_or(f64::NAN)
            });
            let days: BTreeSet<i64> = group.iter().map(|e| local_day(e.hour_start, tz_offset_s)).collect();
            let mut hours: Vec<i64> = group.iter().map(|e| e.hour_start).collect();
            hours.dedup();
            SegmentSummary {
                segment_id: group[0].segment_id,
                median,
                distinct_days: days.len() as u32,
                hours_with_data: hours.len() as u32,
            }
        })
        .collect()
}
