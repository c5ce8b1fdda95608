//! Sensor record parsing, plausibility QA and inter-device consistency.

mod deviation;
mod parse;
mod qa;

use std::sync::Arc;

pub use deviation::{inter_device_deviation, Deviation, DeviationError, DEVICE_DEVIATION_LIMIT_PCT};
pub use parse::{
    parse_observations, write_observations_csv, ObservationReader, ParseReject, Parsed,
    OBSERVATIONS_CSV_HEADER,
};
pub use qa::{qa_filter, qa_filter_with, QaBounds, QaOutcome, QaReport, QaRule};

use crate::geo::GeoPoint;
use crate::pollutant::{PerPollutant, Pollutant};

/// One timestamped, geolocated multi-pollutant reading from one vehicle.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub device_id: Arc<str>,
    /// UTC epoch seconds.
    pub timestamp: i64,
    pub location: GeoPoint,
    pub no2: f64,
    pub pm25: f64,
    pub pm10: f64,
    pub temp: f64,
    pub rh: f64,
}

impl Observation {
    pub fn concentration(&self, p: Pollutant) -> f64 {
        match p {
            Pollutant::No2 => self.no2,
            Pollutant::Pm25 => self.pm25,
            Pollutant::Pm10 => self.pm10,
        }
    }

    pub fn concentrations(&self) -> PerPollutant<f64> {
        PerPollutant {
            no2: self.no2,
            pm25: self.pm25,
            pm10: self.pm10,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("missing or malformed header: expected `{expected}`, found `{found}`")]
    Header { expected: String, found: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
