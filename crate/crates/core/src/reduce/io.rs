use std::io::{self, Write};

use super::{SegmentHourEstimate, SegmentSummary};

pub const ESTIMATES_CSV_HEADER: &str = "segment_id,hour_start,no2_ppb,pm25_ugm3,pm10_ugm3,n_no2,n_pm25,n_pm10";
pub const SUMMARIES_CSV_HEADER: &str = "segment_id,no2_ppb,pm25_ugm3,pm10_ugm3,distinct_days,hours_with_data";

pub(crate) fn fmt_value(v: f64) -> String {
    if v.is_finite() {
        format!("{v}")
    } else {
        String::new()
    }
}

pub fn write_estimates_csv<W: Write>(w: W, estimates: &[SegmentHourEstimate]) -> io::Result<()> {
    let mut w = io::BufWriter::new(w);
    writeln!(w, "{ESTIMATES_CSV_HEADER}")?;
    for e in estimates {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            e.segment_id,
            e.hour_start,
            fmt_value(e.median.no2),
            fmt_value(e.median.pm25),
            fmt_value(e.median.pm10),
            e.samples.no2,
            e.samples.pm25,
            e.samples.pm10
        )?;
    }
    w.flush()
}

pub fn write_summaries_csv<W: Write>(w: W, summaries: &[SegmentSummary]) -> io::Result<()> {
    let mut w = io::BufWriter::new(w);
    writeln!(w, "{SUMMARIES_CSV_HEADER}")?;
    for s in summaries {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            s.segment_id,
            fmt_value(s.median.no2),
            fmt_value(s.median.pm25),
            fmt_value(s.median.pm10),
            s.distinct_days,
            s.hours_with_data
        )?;
    }
    w.flush()
}
