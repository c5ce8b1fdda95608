use std::io::{self, Write};

use crate::pollutant::Pollutant;

use super::HotspotResult;

pub const HOTSPOTS_CSV_HEADER: &str =
    "segment_id,pollutant,dominant_level,n_good,n_moderate,n_usg,n_unhealthy,valid_days,is_vms,is_hotspot";

/// One row per `(segment, pollutant)`. `dominant_level` is the ordinal 1–4,
/// empty when the segment has no valid samples.
pub fn write_hotspots_csv<W: Write>(w: W, results: &[HotspotResult]) -> io::Result<()> {
    let mut w = io::BufWriter::new(w);
    writeln!(w, "{HOTSPOTS_CSV_HEADER}")?;
    for r in results {
        for p in Pollutant::ALL {
            let c = r.counts.get(p);
            let level = r.dominant.get(p).map(|l| l.ordinal().to_string()).unwrap_or_default();
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{}",
                r.segment_id,
                p,
                level,
                c[0],
                c[1],
                c[2],
                c[3],
                r.valid_days,
                r.is_vms,
                r.is_hotspot.get(p)
            )?;
        }
    }
    w.flush()
}
