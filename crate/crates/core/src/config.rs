//! Flat `key = value` configuration files.
//!
//! `#` starts a comment. Keys may repeat only where a list makes sense
//! (`hotspot_zone`, `station`). Command-line flags override file values.

use std::path::PathBuf;

use crate::compare::DEFAULT_BUFFER_RADIUS_M;
use crate::geo::{GeoPoint, PlanarPoint};
use crate::hotspot::{CounterMode, DEFAULT_GAP_S, DEFAULT_VMS_DAYS};
use crate::network::{DEFAULT_MAX_SNAP_M, DEFAULT_SEGMENT_LEN_M};
use crate::pollutant::{PerPollutant, Pollutant};
use crate::synth::{HotspotZone, SynthConfig};
use crate::time::DEFAULT_TZ_OFFSET_S;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: invalid value for `{key}`: {reason}")]
    Value { line: usize, key: String, reason: String },
    #[error("line {line}: `{key}` given more than once")]
    Duplicate { line: usize, key: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    pub line: usize,
    pub key: String,
    pub value: String,
}

/// Split a config file into entries, in file order.
pub fn parse_entries(text: &str) -> Result<Vec<Entry>, ConfigError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (k, v) = body.split_once('=').ok_or(ConfigError::Syntax { line })?;
        let key = k.trim();
        if key.is_empty() || key.contains(char::is_whitespace) {
            return Err(ConfigError::Syntax { line });
        }
        out.push(Entry { line, key: key.to_string(), value: v.trim().to_string() });
    }
    Ok(out)
}

fn value_err(e: &Entry, reason: impl Into<String>) -> ConfigError {
    ConfigError::Value { line: e.line, key: e.key.clone(), reason: reason.into() }
}

fn num<T: std::str::FromStr>(e: &Entry) -> Result<T, ConfigError> {
    e.value.parse().map_err(|_| value_err(e, format!("`{}` is not a valid number", e.value)))
}

fn finite(e: &Entry) -> Result<f64, ConfigError> {
    let v: f64 = num(e)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(value_err(e, "must be finite"))
    }
}

fn floats(e: &Entry, n: usize) -> Result<Vec<f64>, ConfigError> {
    let parts: Vec<&str> = e.value.split(',').map(str::trim).collect();
    if parts.len() != n {
        return Err(value_err(e, format!("expected {n} comma-separated numbers")));
    }
    parts
        .iter()
        .map(|p| p.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| value_err(e, format!("`{p}` is not a valid number"))))
        .collect()
}

/// `"lat,lon"` into a validated point.
pub fn parse_origin(s: &str) -> Result<GeoPoint, String> {
    let (a, b) = s.split_once(',').ok_or("expected `lat,lon`")?;
    let lat: f64 = a.trim().parse().map_err(|_| format!("invalid latitude `{}`", a.trim()))?;
    let lon: f64 = b.trim().parse().map_err(|_| format!("invalid longitude `{}`", b.trim()))?;
    GeoPoint::new(lat, lon).map_err(|e| e.to_string())
}

fn reject_duplicates(entries: &[Entry], repeatable: &[&str]) -> Result<(), ConfigError> {
    let mut seen = std::collections::BTreeSet::new();
    for e in entries {
        if !repeatable.contains(&e.key.as_str()) && !seen.insert(e.key.as_str()) {
            return Err(ConfigError::Duplicate { line: e.line, key: e.key.clone() });
        }
    }
    Ok(())
}

/// Settings shared by the processing subcommands.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub roads: Option<PathBuf>,
    /// Previously written segment file; used instead of `roads` when set.
    pub segments: Option<PathBuf>,
    pub observations: Option<PathBuf>,
    pub stations: Option<PathBuf>,
    pub out_dir: PathBuf,
    /// Projection origin. `None` centres on the road network.
    pub origin: Option<GeoPoint>,
    pub target_len_m: f64,
    pub max_snap_m: f64,
    pub buffer_radius_m: f64,
    pub gap_s: i64,
    pub vms_days: u32,
    pub tz_offset_s: i64,
    /// Zero means one per core.
    pub workers: usize,
    pub counter_mode: CounterMode,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            roads: None,
            segments: None,
            observations: None,
            stations: None,
            out_dir: PathBuf::from("out"),
            origin: None,
            target_len_m: DEFAULT_SEGMENT_LEN_M,
            max_snap_m: DEFAULT_MAX_SNAP_M,
            buffer_radius_m: DEFAULT_BUFFER_RADIUS_M,
            gap_s: DEFAULT_GAP_S,
            vms_days: DEFAULT_VMS_DAYS,
            tz_offset_s: DEFAULT_TZ_OFFSET_S,
            workers: 0,
            counter_mode: CounterMode::Samples,
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let entries = parse_entries(text)?;
        reject_duplicates(&entries, &[])?;
        let mut cfg = Self::default();
        for e in &entries {
            cfg.apply(e)?;
        }
        Ok(cfg)
    }

    fn apply(&mut self, e: &Entry) -> Result<(), ConfigError> {
        let positive = |e: &Entry| -> Result<f64, ConfigError> {
            let v = finite(e)?;
            if v > 0.0 {
                Ok(v)
            } else {
                Err(value_err(e, "must be positive"))
            }
        };
        match e.key.as_str() {
            "roads" => self.roads = Some(PathBuf::from(&e.value)),
            "segments" => self.segments = Some(PathBuf::from(&e.value)),
            "observations" => self.observations = Some(PathBuf::from(&e.value)),
            "stations" => self.stations = Some(PathBuf::from(&e.value)),
            "out_dir" => self.out_dir = PathBuf::from(&e.value),
            "origin" => {
                self.origin = if e.value == "auto" {
                    None
                } else {
                    Some(parse_origin(&e.value).map_err(|r| value_err(e, r))?)
                }
            }
            "target_len_m" => self.target_len_m = positive(e)?,
            "max_snap_m" => self.max_snap_m = positive(e)?,
            "buffer_radius_m" => self.buffer_radius_m = positive(e)?,
            "gap_s" => {
                self.gap_s = num(e)?;
                if self.gap_s <= 0 {
                    return Err(value_err(e, "must be positive"));
                }
            }
            "vms_days" => self.vms_days = num(e)?,
            "tz_offset_s" => self.tz_offset_s = num(e)?,
            "workers" => self.workers = num(e)?,
            "counter_mode" => {
                self.counter_mode = match e.value.as_str() {
                    "samples" => CounterMode::Samples,
                    "duration" => CounterMode::Duration,
                    _ => return Err(value_err(e, "expected `samples` or `duration`")),
                }
            }
            _ => return Err(ConfigError::UnknownKey { line: e.line, key: e.key.clone() }),
        }
        Ok(())
    }
}

/// Parse a synthetic-world config. Unset keys keep `SynthConfig::default()`.
pub fn parse_synth_config(text: &str) -> Result<SynthConfig, ConfigError> {
    let entries = parse_entries(text)?;
    reject_duplicates(&entries, &["hotspot_zone", "station"])?;
    let mut cfg = SynthConfig::default();
    for e in &entries {
        apply_synth(&mut cfg, e)?;
    }
    cfg.validate().map_err(|err| {
        let line = entries.last().map_or(0, |e| e.line);
        ConfigError::Value { line, key: "(config)".into(), reason: err.to_string() }
    })?;
    Ok(cfg)
}

fn apply_synth(cfg: &mut SynthConfig, e: &Entry) -> Result<(), ConfigError> {
    match e.key.as_str() {
        "seed" => cfg.seed = num(e)?,
        "origin" => cfg.origin = parse_origin(&e.value).map_err(|r| value_err(e, r))?,
        "grid_rows" => cfg.grid_rows = num(e)?,
        "grid_cols" => cfg.grid_cols = num(e)?,
        "spacing_m" => cfg.spacing_m = finite(e)?,
        "n_taxis" => cfg.n_taxis = num(e)?,
        "start_epoch" => cfg.start_epoch = num(e)?,
        "duration_s" => cfg.duration_s = num(e)?,
        "sample_interval_s" => cfg.sample_interval_s = num(e)?,
        "speed_mps" => cfg.speed_mps = finite(e)?,
        "gps_sigma_m" => cfg.gps_sigma_m = finite(e)?,
        "tz_offset_s" => cfg.tz_offset_s = num(e)?,
        "target_len_m" => cfg.target_len_m = finite(e)?,
        "station_ambient_factor" => cfg.station_ambient_factor = finite(e)?,
        "hotspot_zone" => {
            let v = floats(e, 6)?;
            cfg.zones.push(HotspotZone {
                center: PlanarPoint::new(v[0], v[1]),
                radius_m: v[2],
                elevation: PerPollutant { no2: v[3], pm25: v[4], pm10: v[5] },
            });
        }
        "station" => {
            let v = floats(e, 2)?;
            cfg.stations.push(PlanarPoint::new(v[0], v[1]));
        }
        key => {
            let field = Pollutant::ALL.iter().find_map(|p| {
                let rest = key.strip_prefix(p.as_str())?.strip_prefix('_')?;
                Some((*p, rest))
            });
            let Some((p, which)) = field else {
                return Err(ConfigError::UnknownKey { line: e.line, key: e.key.clone() });
            };
            let f = cfg.field.get_mut(p);
            match which {
                "base" => f.base = finite(e)?,
                "amplitude" => f.amplitude = finite(e)?,
                "noise_sigma" => f.noise_sigma = finite(e)?,
                _ => return Err(ConfigError::UnknownKey { line: e.line, key: e.key.clone() }),
            }
        }
    }
    Ok(())
}
