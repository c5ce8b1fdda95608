#![no_main]

use libfuzzer_sys::fuzz_target;
use onroad_core::geo::Projection;
use onroad_core::network::io::{read_segments_csv, segments_from_records};
use onroad_core::network::SegmentIndex;

fuzz_target!(|data: &[u8]| {
    let Ok(records) = read_segments_csv(data) else { return };
    let Some(proj) = Projection::centered_on(records.iter().flat_map(|r| &r.points)) else { return };
    if let Ok(segments) = segments_from_records(&records, &proj) {
        let _ = SegmentIndex::build(segments);
    }
});
