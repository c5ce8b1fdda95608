use std::collections::HashMap;
use std::io::{Read, Write};
use std::sync::Arc;

use crate::geo::{GeoError, GeoPoint};

use super::{IngestError, Observation};

pub const OBSERVATIONS_CSV_HEADER: [&str; 9] = [
    "device_id",
    "timestamp",
    "lat",
    "lon",
    "no2_ppb",
    "pm25_ugm3",
    "pm10_ugm3",
    "temp_c",
    "rh_pct",
];

/// A data line that could not be turned into an [`Observation`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseReject {
    pub line: u64,
    pub reason: String,
}

#[derive(Debug, Default)]
pub struct Parsed {
    pub observations: Vec<Observation>,
    pub rejects: Vec<ParseReject>,
}

/// Streaming observation parser.
///
/// The header is validated on construction; afterwards every data line yields
/// exactly one `Ok(Observation)` or `Err(ParseReject)`. Device ids are
/// interned so millions of rows share a handful of allocations.
pub struct ObservationReader<R: Read> {
    rdr: csv::Reader<R>,
    record: csv::ByteRecord,
    devices: HashMap<Box<str>, Arc<str>>,
}

impl<R: Read> ObservationReader<R> {
    pub fn new(r: R) -> Result<Self, IngestError> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(true).from_reader(r);
        let header = rdr.byte_headers()?;
        let found: Vec<String> = header
            .iter()
            .map(|f| String::from_utf8_lossy(f).trim().trim_start_matches('\u{feff}').to_string())
            .collect();
        if found != OBSERVATIONS_CSV_HEADER {
            return Err(IngestError::Header {
                expected: OBSERVATIONS_CSV_HEADER.join(","),
                found: found.join(","),
            });
        }
        Ok(Self {
            rdr,
            record: csv::ByteRecord::new(),
            devices: HashMap::new(),
        })
    }

    /// `Ok(None)` at end of input; I/O failures are fatal.
    pub fn next_record(&mut self) -> Result<Option<Result<Observation, ParseReject>>, IngestError> {
        if !self.rdr.read_byte_record(&mut self.record)? {
            return Ok(None);
        }
        let line = self.record.position().map_or(0, |p| p.line());
        Ok(Some(self.decode().map_err(|reason| ParseReject { line, reason })))
    }

    fn decode(&mut self) -> Result<Observation, String> {
        let rec = &self.record;
        if rec.len() != OBSERVATIONS_CSV_HEADER.len() {
            return Err(format!(
                "expected {} columns, found {}",
                OBSERVATIONS_CSV_HEADER.len(),
                rec.len()
            ));
        }
        let text = |i: usize| -> Result<&str, String> {
            std::str::from_utf8(&rec[i])
                .map(str::trim)
                .map_err(|_| format!("invalid UTF-8 in {}", OBSERVATIONS_CSV_HEADER[i]))
        };
        let number = |i: usize| -> Result<f64, String> {
            let t = text(i)?;
            t.parse::<f64>()
                .map_err(|_| format!("invalid {}: `{}`", OBSERVATIONS_CSV_HEADER[i], t))
        };

        let device = text(0)?;
        if device.is_empty() {
            return Err("empty device_id".into());
        }
        let ts_text = text(1)?;
        let timestamp: i64 = ts_text
            .parse()
            .map_err(|_| format!("invalid timestamp: `{ts_text}`"))?;
        if timestamp <= 0 {
            return Err("timestamp must be positive".into());
        }
        let location = GeoPoint::new(number(2)?, number(3)?).map_err(|e| match e {
            GeoError::Latitude(_) => "latitude out of range".to_string(),
            GeoError::Longitude(_) => "longitude out of range".to_string(),
        })?;
        let (no2, pm25, pm10, temp, rh) = (number(4)?, number(5)?, number(6)?, number(7)?, number(8)?);

        let device_id = match self.devices.get(device) {
            Some(id) => Arc::clone(id),
            None => {
                let id: Arc<str> = Arc::from(device);
                self.devices.insert(device.into(), Arc::clone(&id));
                id
            }
        };
        Ok(Observation {
            device_id,
            timestamp,
            location,
            no2,
            pm25,
            pm10,
            temp,
            rh,
        })
    }
}

impl<R: Read> Iterator for ObservationReader<R> {
    type Item = Result<Result<Observation, ParseReject>, IngestError>;

    fn next(&mut self) -> Option<Self::Item> {
        self.next_record().transpose()
    }
}

/// Parse a whole observation CSV. Only a bad header or an I/O failure is
/// fatal; malformed lines become rejects and parsing continues.
pub fn parse_observations<R: Read>(r: R) -> Result<Parsed, IngestError> {
    let mut reader = ObservationReader::new(r)?;
    let mut parsed = Parsed::default();
    while let Some(item) = reader.next_record()? {
        match item {
            Ok(o) => parsed.observations.push(o),
            Err(rej) => parsed.rejects.push(rej),
        }
    }
    Ok(parsed)
}

pub fn write_observations_csv<W: Write>(w: W, obs: &[Observation]) -> Result<(), IngestError> {
    let mut w = std::io::BufWriter::new(w);
    writeln!(w, "{}", OBSERVATIONS_CSV_HEADER.join(","))?;
    for o in obs {
        writeln!(
            w,
            "{},{},{:.6},{:.6},{:.1},{:.1},{:.1},{:.2},{:.1}",
            o.device_id, o.timestamp, o.location.lat, o.location.lon, o.no2, o.pm25, o.pm10, o.temp, o.rh
        )?;
    }
    w.flush()?;
    Ok(())
}
