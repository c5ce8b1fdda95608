//! Exposure-level classification and hotspot identification.
//!
//! For each segment, samples are ordered by time. Sample `j-1` counts as
//! valid when the next sample on the same segment arrives less than
//! `gap_s` (default 1800 s) later; the last sample therefore never counts.
//! Every valid sample increments the counter of its exposure level for each
//! pollutant. The dominant level is the counter argmax, with ties going to
//! the more severe level. A segment is a valid monitoring segment (VMS) when
//! its valid samples fall on at least `vms_days` distinct local days, and a
//! VMS whose dominant level is Unhealthy-for-Sensitive-Groups or worse is a
//! hotspot.

mod io;
mod levels;

use std::collections::BTreeSet;

use rayon::prelude::*;

pub use io::{write_hotspots_csv, HOTSPOTS_CSV_HEADER};
pub use levels::{get_level, Classified, ExposureLevel, LevelThresholds};

use crate::pollutant::{PerPollutant, Pollutant};
use crate::reduce::{group_bounds, SnappedObservation};
use crate::time::{local_day, DEFAULT_TZ_OFFSET_S};

pub const DEFAULT_GAP_S: i64 = 1800;
pub const DEFAULT_VMS_DAYS: u32 = 10;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HotspotError {
    #[error("invalid {pollutant} concentration {value}")]
    InvalidConcentration { pollutant: Pollutant, value: f64 },
    #[error("samples are not sorted by timestamp (position {0})")]
    Unsorted(usize),
    #[error("level thresholds for {0} must be positive and strictly increasing")]
    Thresholds(Pollutant),
}

/// What a valid sample adds to its level counter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CounterMode {
    /// One per valid sample.
    #[default]
    Samples,
    /// Seconds until the next sample on the segment.
    Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HotspotParams {
    pub gap_s: i64,
    pub vms_days: u32,
    pub tz_offset_s: i64,
    pub thresholds: LevelThresholds,
    pub counter_mode: CounterMode,
}

impl Default for HotspotParams {
    fn default() -> Self {
        Self {
            gap_s: DEFAULT_GAP_S,
            vms_days: DEFAULT_VMS_DAYS,
            tz_offset_s: DEFAULT_TZ_OFFSET_S,
            thresholds: LevelThresholds::default(),
            counter_mode: CounterMode::Samples,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub timestamp: i64,
    pub values: PerPollutant<f64>,
}

/// Per-level counters indexed by `ExposureLevel::index()`.
pub type LevelCounts = [u64; 4];

#[derive(Debug, Clone, PartialEq)]
pub struct HotspotResult {
    pub segment_id: u32,
    pub counts: PerPollutant<LevelCounts>,
    /// `None` when the segment has no valid samples.
    pub dominant: PerPollutant<Option<ExposureLevel>>,
    /// Valid samples above the top threshold, counted as Unhealthy.
    pub overflow: PerPollutant<u64>,
    pub valid_samples: u64,
    pub valid_days: u32,
    pub is_vms: bool,
    pub is_hotspot: PerPollutant<bool>,
}

impl HotspotResult {
    pub fn any_hotspot(&self) -> bool {
        Pollutant::ALL.iter().any(|p| *self.is_hotspot.get(*p))
    }
}

/// Validity mask for time-sorted samples: entry `j-1` is true iff
/// `t[j] - t[j-1] < gap_s`.
pub fn mark_valid(timestamps: &[i64], gap_s: i64) -> Result<Vec<bool>, HotspotError> {
    if let Some(i) = timestamps.windows(2).position(|w| w[1] < w[0]) {
        return Err(HotspotError::Unsorted(i + 1));
    }
    let mut mask = vec![false; timestamps.len()];
    for j in 1..timestamps.len() {
        mask[j - 1] = timestamps[j] - timestamps[j - 1] < gap_s;
    }
    Ok(mask)
}

/// Argmax over the four counters; ties resolve to the more severe level.
pub fn dominant_level(counts: &LevelCounts) -> Option<ExposureLevel> {
    let mut best: Option<(u64, ExposureLevel)> = None;
    for level in ExposureLevel::ALL {
        let c = counts[level.index()];
        if c > 0 && best.is_none_or(|(b, _)| c >= b) {
            best = Some((c, level));
        }
    }
    best.map(|(_, l)| l)
}

/// Run the counter/argmax procedure over one segment's time-sorted samples.
pub fn classify_segment(segment_id: u32, samples: &[Sample], params: &HotspotParams) -> Result<HotspotResult, HotspotError> {
    let ts: Vec<i64> = samples.iter().map(|s| s.timestamp).collect();
    let mask = mark_valid(&ts, params.gap_s)?;

    let mut counts = PerPollutant::<LevelCounts>::default();
    let mut overflow = PerPollutant::<u64>::default();
    let mut days = BTreeSet::new();
    let mut valid_samples = 0u64;
    for (j, s) in samples.iter().enumerate() {
        if !mask[j] {
            continue;
        }
        valid_samples += 1;
        days.insert(local_day(s.timestamp, params.tz_offset_s));
        let weight = match params.counter_mode {
            CounterMode::Samples => 1,
            CounterMode::Duration => (samples[j + 1].timestamp - s.timestamp) as u64,
        };
        for p in Pollutant::ALL {
            let c = params.thresholds.classify(p, *s.values.get(p))?;
            counts.get_mut(p)[c.level.index()] += weight;
            if c.overflow {
                *overflow.get_mut(p) += 1;
            }
        }
    }

    let valid_days = days.len() as u32;
    let is_vms = valid_samples > 0 && valid_days >= params.vms_days;
    let dominant = counts.map(|_, c| dominant_level(c));
    let is_hotspot = dominant.map(|_, d| is_vms && d.is_some_and(ExposureLevel::is_high));
    Ok(HotspotResult {
        segment_id,
        counts,
        dominant,
        overflow,
        valid_samples,
        valid_days,
        is_vms,
        is_hotspot,
    })
}

/// Classify every segment that received at least one snapped observation.
///
/// Output is sorted by segment id. Samples that share a timestamp are put in
/// a canonical order first so the validity mask does not depend on input order.
pub fn identify_hotspots(snapped: &[SnappedObservation], params: &HotspotParams) -> Result<Vec<HotspotResult>, HotspotError> {
    let mut rows: Vec<(u32, Sample)> = snapped
        .par_iter()
        .with_min_len(4096)
        .map(|s| {
            (
                s.segment_id,
                Sample {
                    timestamp: s.observation.timestamp,
                    values: s.observation.concentrations(),
                },
            )
        })
        .collect();
    rows.par_sort_unstable_by(|a, b| {
        a.0.cmp(&b.0)
            .then(a.1.timestamp.cmp(&b.1.timestamp))
            .then(a.1.values.no2.total_cmp(&b.1.values.no2))
            .then(a.1.values.pm25.total_cmp(&b.1.values.pm25))
            .then(a.1.values.pm10.total_cmp(&b.1.values.pm10))
    });
    let groups = group_bounds(&rows, |a, b| a.0 == b.0);
    groups
        .par_iter()
        .map(|&(lo, hi)| {
            let samples: Vec<Sample> = rows[lo..hi].iter().map(|r| r.1).collect();
            classify_segment(rows[lo].0, &samples, params)
        })
        .collect()
}
