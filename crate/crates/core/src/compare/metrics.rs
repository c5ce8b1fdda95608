use crate::pollutant::Pollutant;

use super::{CompareError, HourPair};

/// Acceptance bands for mobile-vs-fixed agreement.
pub struct Bands;

impl Bands {
    pub const FB_ABS_MAX: f64 = 0.5;
    pub const NMSE_MAX: f64 = 0.5;
    /// Geometric variance above this marks a notable discrepancy.
    pub const VG_MAX: f64 = 1.3;
    /// FAC2 below this marks a notable discrepancy.
    pub const FAC2_MIN: f64 = 0.8;
}

/// Agreement statistics for one station and one pollutant.
///
/// Metrics that are undefined for the data (zero means, zero variance, no
/// positive pairs) are `None` rather than a sentinel.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub station_id: String,
    pub pollutant: Pollutant,
    pub n_pairs: usize,
    /// Pairs with a non-positive value on either side, left out of VG.
    /// FAC2 and ER leave out pairs whose fixed value is non-positive.
    pub n_excluded_nonpositive: usize,
    pub mean_mobile: f64,
    pub mean_fixed: f64,
    pub fb: Option<f64>,
    pub nmse: Option<f64>,
    pub vg: Option<f64>,
    pub r: Option<f64>,
    pub fac2: Option<f64>,
    /// Median per-pair relative error, percent.
    pub er_median: Option<f64>,
    pub er_q1: Option<f64>,
    pub er_q3: Option<f64>,
}

impl MetricReport {
    pub fn fb_pass(&self) -> Option<bool> {
        self.fb.map(|v| v.abs() < Bands::FB_ABS_MAX)
    }

    pub fn nmse_pass(&self) -> Option<bool> {
        self.nmse.map(|v| v < Bands::NMSE_MAX)
    }

    pub fn vg_pass(&self) -> Option<bool> {
        self.vg.map(|v| v <= Bands::VG_MAX)
    }

    pub fn fac2_pass(&self) -> Option<bool> {
        self.fac2.map(|v| v >= Bands::FAC2_MIN)
    }
}

fn mean(v: impl ExactSizeIterator<Item = f64>) -> f64 {
    let n = v.len() as f64;
    v.sum::<f64>() / n
}

fn pearson(m: &[f64], f: &[f64], mm: f64, mf: f64) -> Option<f64> {
    if m.len() < 2 {
        return None;
    }
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in m.iter().zip(f) {
        let (dx, dy) = (a - mm, b - mf);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    Some(sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64))
}

/// Score one `(station, pollutant)` series of hour pairs.
pub fn compute_metrics(pairs: &[HourPair]) -> Result<MetricReport, CompareError> {
    let first = pairs.first().ok_or(CompareError::NoPairs)?;
    if pairs.iter().any(|p| p.station_id != first.station_id || p.pollutant != first.pollutant) {
        return Err(CompareError::MixedGroup);
    }
    let m: Vec<f64> = pairs.iter().map(|p| p.mobile).collect();
    let f: Vec<f64> = pairs.iter().map(|p| p.fixed).collect();
    let (mm, mf) = (mean(m.iter().copied()), mean(f.iter().copied()));

    let fb = (mm + mf != 0.0).then(|| 2.0 * (mm - mf) / (mm + mf));
    let nmse = (mm * mf != 0.0).then(|| mean(m.iter().zip(&f).map(|(a, b)| (a - b).powi(2))) / (mm * mf));

    let positive: Vec<(f64, f64)> = m.iter().zip(&f).filter(|(a, b)| **a > 0.0 && **b > 0.0).map(|(a, b)| (*a, *b)).collect();
    let vg = (!positive.is_empty()).then(|| mean(positive.iter().map(|(a, b)| (a.ln() - b.ln()).powi(2))).exp());

    let with_fixed: Vec<(f64, f64)> = m.iter().zip(&f).filter(|(_, b)| **b > 0.0).map(|(a, b)| (*a, *b)).collect();
    let fac2 = (!with_fixed.is_empty()).then(|| {
        let ok = with_fixed.iter().filter(|(a, b)| (0.5..=2.0).contains(&(a / b))).count();
        ok as f64 / with_fixed.len() as f64
    });
    let mut er: Vec<f64> = with_fixed.iter().map(|(a, b)| ((a - b) / b).abs() * 100.0).collect();
    er.sort_by(f64::total_cmp);

    Ok(MetricReport {
        station_id: first.station_id.clone(),
        pollutant: first.pollutant,
        n_pairs: pairs.len(),
        n_excluded_nonpositive: pairs.len() - positive.len(),
        mean_mobile: mm,
        mean_fixed: mf,
        fb,
        nmse,
        vg,
        r: pearson(&m, &f, mm, mf),
        fac2,
        er_median: quantile(&er, 0.5),
        er_q1: quantile(&er, 0.25),
        er_q3: quantile(&er, 0.75),
    })
}
