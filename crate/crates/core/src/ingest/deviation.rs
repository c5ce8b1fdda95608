/// Inter-device relative deviation above this fails the co-location check.
pub const DEVICE_DEVIATION_LIMIT_PCT: f64 = 15.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Deviation {
    pub percent: f64,
    pub pairs: usize,
}

impl Deviation {
    pub fn within_limit(&self) -> bool {
        self.percent < DEVICE_DEVIATION_LIMIT_PCT
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DeviationError {
    #[error("no co-located samples")]
    NoPairs,
    #[error("pairing window must be positive")]
    Window,
    #[error("non-positive or non-finite value in pair at t={0}")]
    NonPositive(i64),
}

/// Mean symmetric relative deviation between two co-located devices, in percent.
///
/// Both series are sorted by time and merged: the heads pair up when their
/// timestamps differ by less than `window_s`, otherwise the earlier head is
/// dropped. The procedure treats both inputs identically, so the result is
/// symmetric bit for bit.
pub fn inter_device_deviation(
    series_a: &[(i64, f64)],
    series_b: &[(i64, f64)],
    window_s: i64,
) -> Result<Deviation, DeviationError> {
    if window_s <= 0 {
        return Err(DeviationError::Window);
    }
    let mut a = series_a.to_vec();
    let mut b = series_b.to_vec();
    a.sort_by(|x, y| x.0.cmp(&y.0).then(x.1.total_cmp(&y.1)));
    b.sort_by(|x, y| x.0.cmp(&y.0).then(x.1.total_cmp(&y.1)));

    let (mut i, mut j) = (0, 0);
    let (mut sum, mut pairs) = (0.0, 0usize);
    while i < a.len() && j < b.len() {
        let ((ta, va), (tb, vb)) = (a[i], b[j]);
        if (ta - tb).abs() < window_s {
            if !(va > 0.0 && vb > 0.0 && va.is_finite() && vb.is_finite()) {
                return Err(DeviationError::NonPositive(ta.min(tb)));
            }
            sum += (va - vb).abs() / ((va + vb) / 2.0);
            pairs += 1;
            i += 1;
            j += 1;
        } else if ta < tb {
            i += 1;
        } else {
            j += 1;
        }
    }
    if pairs == 0 {
        return Err(DeviationError::NoPairs);
    }
    Ok(Deviation {
        percent: sum / pairs as f64 * 100.0,
        pairs,
    })
}
