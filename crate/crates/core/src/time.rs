//! Local clock binning for UTC epoch timestamps with a fixed offset.

/// UTC+8, the default study-area offset in seconds.
pub const DEFAULT_TZ_OFFSET_S: i64 = 8 * 3600;

pub const HOUR_S: i64 = 3600;
pub const DAY_S: i64 = 86_400;

/// UTC epoch of the start of the local clock hour containing `ts`.
pub fn local_hour_start(ts: i64, tz_offset_s: i64) -> i64 {
    (ts + tz_offset_s).div_euclid(HOUR_S) * HOUR_S - tz_offset_s
}

/// Local calendar day number (days since 1970-01-01 local).
pub fn local_day(ts: i64, tz_offset_s: i64) -> i64 {
    (ts + tz_offset_s).div_euclid(DAY_S)
}

/// Fractional local hour of day in `[0, 24)`.
pub fn local_hour_of_day(ts: i64, tz_offset_s: i64) -> f64 {
    (ts + tz_offset_s).rem_euclid(DAY_S) as f64 / HOUR_S as f64
}
