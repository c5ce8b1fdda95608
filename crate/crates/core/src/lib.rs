//! On-road air pollution mapping from taxi-mounted sensors.
//!
//! The pipeline snaps geolocated readings onto 50 m road segments, reduces
//! them to hourly medians, checks them against fixed monitoring stations and
//! flags segments whose typical exposure is high. A seeded generator builds
//! synthetic cities with known answers for testing.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod compare;
pub mod config;
pub mod export;
pub mod geo;
pub mod hotspot;
pub mod ingest;
pub mod network;
pub mod parallel;
pub mod pollutant;
pub mod reduce;
pub mod synth;
pub mod time;
