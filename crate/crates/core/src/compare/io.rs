use std::io::{self, Read, Write};

use crate::geo::GeoPoint;
use crate::ingest::ParseReject;
use crate::pollutant::PerPollutant;

use super::{CompareError, MetricReport, StationRecord};

pub const STATIONS_CSV_HEADER: [&str; 7] =
    ["station_id", "lat", "lon", "hour_start", "no2_ppb", "pm25_ugm3", "pm10_ugm3"];

pub const METRICS_CSV_HEADER: &str = "station_id,pollutant,n_pairs,n_excluded_nonpositive,mean_mobile,mean_fixed,\
fb,nmse,vg,r,fac2,er_median_pct,er_q1_pct,er_q3_pct,fb_pass,nmse_pass,vg_pass,fac2_pass";

#[derive(Debug, Default)]
pub struct StationParse {
    pub records: Vec<StationRecord>,
    pub rejects: Vec<ParseReject>,
}

/// Parse the station CSV. Empty pollutant fields mean "not reported".
pub fn parse_stations<R: Read>(r: R) -> Result<StationParse, CompareError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(true).from_reader(r);
    let found: Vec<String> = rdr
        .byte_headers()?
        .iter()
        .map(|f| String::from_utf8_lossy(f).trim().to_string())
        .collect();
    if found != STATIONS_CSV_HEADER {
        return Err(CompareError::Header {
            expected: STATIONS_CSV_HEADER.join(","),
            found: found.join(","),
        });
    }
    let mut out = StationParse::default();
    let mut rec = csv::ByteRecord::new();
    while rdr.read_byte_record(&mut rec)? {
        let line = rec.position().map_or(0, |p| p.line());
        match decode(&rec) {
            Ok(r) => out.records.push(r),
            Err(reason) => out.rejects.push(ParseReject { line, reason }),
        }
    }
    Ok(out)
}

fn decode(rec: &csv::ByteRecord) -> Result<StationRecord, String> {
    if rec.len() != STATIONS_CSV_HEADER.len() {
        return Err(format!("expected {} columns, found {}", STATIONS_CSV_HEADER.len(), rec.len()));
    }
    let text = |i: usize| {
        std::str::from_utf8(&rec[i])
            .map(str::trim)
            .map_err(|_| format!("invalid UTF-8 in {}", STATIONS_CSV_HEADER[i]))
    };
    let number = |i: usize| -> Result<f64, String> {
        let t = text(i)?;
        t.parse().map_err(|_| format!("invalid {}: `{t}`", STATIONS_CSV_HEADER[i]))
    };
    let conc = |i: usize| -> Result<Option<f64>, String> {
        let t = text(i)?;
        if t.is_empty() {
            return Ok(None);
        }
        let v: f64 = t.parse().map_err(|_| format!("invalid {}: `{t}`", STATIONS_CSV_HEADER[i]))?;
        if !v.is_finite() || v < 0.0 {
            return Err(format!("{} must be finite and non-negative", STATIONS_CSV_HEADER[i]));
        }
        Ok(Some(v))
    };
    let station_id = text(0)?;
    if station_id.is_empty() {
        return Err("empty station_id".into());
    }
    let location = GeoPoint::new(number(1)?, number(2)?).map_err(|e| e.to_string())?;
    let hour_text = text(3)?;
    let hour_start: i64 = hour_text.parse().map_err(|_| format!("invalid hour_start: `{hour_text}`"))?;
    Ok(StationRecord {
        station_id: station_id.to_string(),
        location,
        hour_start,
        values: PerPollutant {
            no2: conc(4)?,
            pm25: conc(5)?,
            pm10: conc(6)?,
        },
    })
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x}")).unwrap_or_default()
}

fn flag(v: Option<bool>) -> &'static str {
    match v {
        Some(true) => "pass",
        Some(false) => "fail",
        None => "",
    }
}

pub fn write_metrics_csv<W: Write>(w: W, reports: &[MetricReport]) -> io::Result<()> {
    let mut w = io::BufWriter::new(w);
    writeln!(w, "{METRICS_CSV_HEADER}")?;
    for r in reports {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.station_id,
            r.pollutant,
            r.n_pairs,
            r.n_excluded_nonpositive,
            r.mean_mobile,
            r.mean_fixed,
            opt(r.fb),
            opt(r.nmse),
            opt(r.vg),
            opt(r.r),
            opt(r.fac2),
            opt(r.er_median),
            opt(r.er_q1),
            opt(r.er_q3),
            flag(r.fb_pass()),
            flag(r.nmse_pass()),
            flag(r.vg_pass()),
            flag(r.fac2_pass()),
        )?;
    }
    w.flush()
}
