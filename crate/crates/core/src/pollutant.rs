use std::fmt;
use std::str::FromStr;

/// The three pollutants the sensor boxes report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pollutant {
    /// Nitrogen dioxide, ppb.
    No2,
    /// Fine particulate matter, µg/m³.
    Pm25,
    /// Coarse particulate matter, µg/m³.
    Pm10,
}

impl Pollutant {
    pub const ALL: [Pollutant; 3] = [Pollutant::No2, Pollutant::Pm25, Pollutant::Pm10];

    pub fn as_str(&self) -> &'static str {
        match self {
            Pollutant::No2 => "no2",
            Pollutant::Pm25 => "pm25",
            Pollutant::Pm10 => "pm10",
        }
    }

    pub fn unit(&self) -> &'static str {
        match self {
            Pollutant::No2 => "ppb",
            Pollutant::Pm25 | Pollutant::Pm10 => "ug/m3",
        }
    }
}

impl fmt::Display for Pollutant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown pollutant `{0}`")]
pub struct UnknownPollutant(pub String);

impl FromStr for Pollutant {
    type Err = UnknownPollutant;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "no2" => Ok(Pollutant::No2),
            "pm25" | "pm2.5" => Ok(Pollutant::Pm25),
            "pm10" => Ok(Pollutant::Pm10),
            other => Err(UnknownPollutant(other.to_string())),
        }
    }
}

/// One value per pollutant.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PerPollutant<T> {
    pub no2: T,
    pub pm25: T,
    pub pm10: T,
}

impl<T> PerPollutant<T> {
    pub fn get(&self, p: Pollutant) -> &T {
        match p {
            Pollutant::No2 => &self.no2,
            Pollutant::Pm25 => &self.pm25,
            Pollutant::Pm10 => &self.pm10,
        }
    }

    pub fn get_mut(&mut self, p: Pollutant) -> &mut T {
        match p {
            Pollutant::No2 => &mut self.no2,
            Pollutant::Pm25 => &mut self.pm25,
            Pollutant::Pm10 => &mut self.pm10,
        }
    }

    pub fn from_fn(mut f: impl FnMut(Pollutant) -> T) -> Self {
        Self {
            no2: f(Pollutant::No2),
            pm25: f(Pollutant::Pm25),
            pm10: f(Pollutant::Pm10),
        }
    }

    pub fn map<U>(&self, mut f: impl FnMut(Pollutant, &T) -> U) -> PerPollutant<U> {
        PerPollutant {
            no2: f(Pollutant::No2, &self.no2),
            pm25: f(Pollutant::Pm25, &self.pm25),
            pm10: f(Pollutant::Pm10, &self.pm10),
        }
    }
}
