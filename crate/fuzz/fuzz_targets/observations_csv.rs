#![no_main]

use libfuzzer_sys::fuzz_target;
use onroad_core::ingest::{parse_observations, qa_filter};

fuzz_target!(|data: &[u8]| {
    if let Ok(parsed) = parse_observations(data) {
        let n = parsed.observations.len() as u64;
        let qa = qa_filter(parsed.observations);
        assert_eq!(qa.report.accepted + qa.report.rejected_total(), n);
    }
});
