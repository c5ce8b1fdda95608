use std::collections::BTreeMap;
use std::fmt;

use super::Observation;

/// Plausibility rule that removed a record. Rules are checked in
/// declaration order and a record is charged to the first one it violates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum QaRule {
    NonFinite,
    NegativeConcentration,
    ConcentrationCeiling,
    Temperature,
    Humidity,
}

impl QaRule {
    pub fn as_str(&self) -> &'static str {
        match self {
            QaRule::NonFinite => "non_finite",
            QaRule::NegativeConcentration => "negative_concentration",
            QaRule::ConcentrationCeiling => "concentration_ceiling",
            QaRule::Temperature => "temperature_range",
            QaRule::Humidity => "humidity_range",
        }
    }
}

impl fmt::Display for QaRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Physical plausibility limits. Units: ppb for NO₂, µg/m³ for PM, °C, %RH.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QaBounds {
    pub max_concentration: f64,
    pub temp_c: (f64, f64),
    pub rh_pct: (f64, f64),
}

impl Default for QaBounds {
    fn default() -> Self {
        Self {
            max_concentration: 1000.0,
            temp_c: (-40.0, 60.0),
            rh_pct: (0.0, 100.0),
        }
    }
}

impl QaBounds {
    pub fn check(&self, o: &Observation) -> Option<QaRule> {
        let conc = [o.no2, o.pm25, o.pm10];
        if conc.iter().chain([&o.temp, &o.rh]).any(|v| !v.is_finite()) {
            return Some(QaRule::NonFinite);
        }
        if conc.iter().any(|&v| v < 0.0) {
            return Some(QaRule::NegativeConcentration);
        }
        if conc.iter().any(|&v| v > self.max_concentration) {
            return Some(QaRule::ConcentrationCeiling);
        }
        if !(self.temp_c.0..=self.temp_c.1).contains(&o.temp) {
            return Some(QaRule::Temperature);
        }
        if !(self.rh_pct.0..=self.rh_pct.1).contains(&o.rh) {
            return Some(QaRule::Humidity);
        }
        None
    }
}

/// Accounting for one ingestion run.
///
/// `accepted + rejected_total() + unparseable` always equals the number of
/// input records. Reports from disjoint partitions combine with [`merge`].
///
/// [`merge`]: QaReport::merge
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct QaReport {
    pub accepted: u64,
    pub rejected: BTreeMap<QaRule, u64>,
    pub unparseable: u64,
    /// Accepted records with PM₂.₅ above PM₁₀.
    pub flagged_inversions: u64,
    pub per_device_accepted: BTreeMap<String, u64>,
}

impl QaReport {
    pub fn rejected_total(&self) -> u64 {
        self.rejected.values().sum()
    }

    pub fn input_total(&self) -> u64 {
        self.accepted + self.rejected_total() + self.unparseable
    }

    pub fn record_unparseable(&mut self, n: u64) {
        self.unparseable += n;
    }

    pub fn merge(&mut self, other: &QaReport) {
        self.accepted += other.accepted;
        self.unparseable += other.unparseable;
        self.flagged_inversions += other.flagged_inversions;
        for (rule, n) in &other.rejected {
            *self.rejected.entry(*rule).or_default() += n;
        }
        for (dev, n) in &other.per_device_accepted {
            *self.per_device_accepted.entry(dev.clone()).or_default() += n;
        }
    }

    /// `key=value` lines, stable order.
    pub fn to_text(&self) -> String {
        let mut s = format!(
            "input={}\naccepted={}\nunparseable={}\nrejected={}\nflagged_pm_inversion={}\n",
            self.input_total(),
            self.accepted,
            self.unparseable,
            self.rejected_total(),
            self.flagged_inversions
        );
        for (rule, n) in &self.rejected {
            s.push_str(&format!("rejected.{rule}={n}\n"));
        }
        for (dev, n) in &self.per_device_accepted {
            s.push_str(&format!("device.{dev}={n}\n"));
        }
        s
    }
}

#[derive(Debug, Default)]
pub struct QaOutcome {
    pub accepted: Vec<Observation>,
    pub rejected: Vec<(Observation, QaRule)>,
    /// Positions in `accepted` whose PM₂.₅ exceeds PM₁₀. Kept, not dropped.
    pub flagged: Vec<usize>,
    pub report: QaReport,
}

pub fn qa_filter(obs: Vec<Observation>) -> QaOutcome {
    qa_filter_with(obs, &QaBounds::default())
}

pub fn qa_filter_with(obs: Vec<Observation>, bounds: &QaBounds) -> QaOutcome {
    let mut out = QaOutcome::default();
    for o in obs {
        match bounds.check(&o) {
            Some(rule) => {
                *out.report.rejected.entry(rule).or_default() += 1;
                out.rejected.push((o, rule));
            }
            None => {
                if o.pm25 > o.pm10 {
                    out.flagged.push(out.accepted.len());
                    out.report.flagged_inversions += 1;
                }
                out.report.accepted += 1;
                *out.report.per_device_accepted.entry(o.device_id.to_string()).or_default() += 1;
                out.accepted.push(o);
            }
        }
    }
    out
}
