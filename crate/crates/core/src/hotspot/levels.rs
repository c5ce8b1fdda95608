use std::fmt;

use crate::pollutant::{PerPollutant, Pollutant};

use super::HotspotError;

/// Four-tier exposure classification, ordered by severity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[repr(u8)]
pub enum ExposureLevel {
    Good = 1,
    Moderate = 2,
    UnhealthySensitive = 3,
    Unhealthy = 4,
}

impl ExposureLevel {
    pub const ALL: [ExposureLevel; 4] = [
        ExposureLevel::Good,
        ExposureLevel::Moderate,
        ExposureLevel::UnhealthySensitive,
        ExposureLevel::Unhealthy,
    ];

    pub fn ordinal(self) -> u8 {
        self as u8
    }

    pub fn index(self) -> usize {
        self as usize - 1
    }

    pub fn label(self) -> &'static str {
        match self {
            ExposureLevel::Good => "Good",
            ExposureLevel::Moderate => "Moderate",
            ExposureLevel::UnhealthySensitive => "Unhealthy for Sensitive Groups",
            ExposureLevel::Unhealthy => "Unhealthy",
        }
    }

    /// Levels that make a valid segment a hotspot.
    pub fn is_high(self) -> bool {
        self >= ExposureLevel::UnhealthySensitive
    }
}

impl fmt::Display for ExposureLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Level of one concentration, plus whether it ran past the top band.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Classified {
    pub level: ExposureLevel,
    pub overflow: bool,
}

/// Inclusive upper bounds of the four levels for each pollutant.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelThresholds {
    pub upper: PerPollutant<[f64; 4]>,
}

impl Default for LevelThresholds {
    /// U.S. EPA AQI breakpoints: NO₂ in ppb, PM in µg/m³.
    fn default() -> Self {
        Self {
            upper: PerPollutant {
                no2: [50.0, 100.0, 150.0, 200.0],
                pm25: [9.0, 35.4, 55.4, 125.4],
                pm10: [54.0, 154.0, 254.0, 354.0],
            },
        }
    }
}

impl LevelThresholds {
    pub fn new(upper: PerPollutant<[f64; 4]>) -> Result<Self, HotspotError> {
        for p in Pollutant::ALL {
            let b = upper.get(p);
            let increasing = b.windows(2).all(|w| w[0] < w[1]);
            if !increasing || !(b[0] > 0.0) || b.iter().any(|v| !v.is_finite()) {
                return Err(HotspotError::Thresholds(p));
            }
        }
        Ok(Self { upper })
    }

    pub fn classify(&self, pollutant: Pollutant, value: f64) -> Result<Classified, HotspotError> {
        if !value.is_finite() || value < 0.0 {
            return Err(HotspotError::InvalidConcentration { pollutant, value });
        }
        let bounds = self.upper.get(pollutant);
        let level = match bounds.iter().position(|&ub| value <= ub) {
            Some(0) => ExposureLevel::Good,
            Some(1) => ExposureLevel::Moderate,
            Some(2) => ExposureLevel::UnhealthySensitive,
            Some(_) => ExposureLevel::Unhealthy,
            None => {
                return Ok(Classified {
                    level: ExposureLevel::Unhealthy,
                    overflow: true,
                })
            }
        };
        Ok(Classified { level, overflow: false })
    }
}

/// Exposure level of `value` under the default thresholds.
pub fn get_level(value: f64, pollutant: Pollutant) -> Result<Classified, HotspotError> {
    LevelThresholds::default().classify(pollutant, value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use ExposureLevel::*;

    fn lvl(v: f64, p: Pollutant) -> ExposureLevel {
        get_level(v, p).unwrap().level
    }

    #[test]
    fn named_examples() {
        assert_eq!(lvl(50.0, Pollutant::No2), Good);
        assert_eq!(lvl(51.0, Pollutant::No2), Moderate);
        assert_eq!(lvl(35.5, Pollutant::Pm25), UnhealthySensitive);
        assert_eq!(lvl(0.0, Pollutant::Pm25), Good);
        let top = get_level(400.0, Pollutant::Pm10).unwrap();
        assert_eq!(top, Classified { level: Unhealthy, overflow: true });
        assert!(!get_level(354.0, Pollutant::Pm10).unwrap().overflow);
    }

    #[test]
    fn invalid_values() {
        assert!(get_level(-0.1, Pollutant::No2).is_err());
        assert!(get_level(f64::NAN, Pollutant::Pm25).is_err());
        assert!(get_level(f64::INFINITY, Pollutant::Pm10).is_err());
    }

    #[test]
    fn threshold_validation() {
        let mut t = LevelThresholds::default().upper;
        assert!(LevelThresholds::new(t).is_ok());
        t.pm25 = [9.0, 9.0, 55.4, 125.4];
        assert!(matches!(LevelThresholds::new(t), Err(HotspotError::Thresholds(Pollutant::Pm25))));
    }

    #[test]
    fn ordinals() {
        assert_eq!(ExposureLevel::ALL.map(|l| l.ordinal()), [1, 2, 3, 4]);
        assert!(Good < Moderate && Moderate < UnhealthySensitive && UnhealthySensitive < Unhealthy);
    }

    proptest! {
        #[test]
        fn monotone(a in 0.0f64..500.0, b in 0.0f64..500.0, k in 0usize..3) {
            let p = Pollutant::ALL[k];
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(lvl(lo, p) <= lvl(hi, p));
        }
    }
}
