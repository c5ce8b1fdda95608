#![no_main]

use libfuzzer_sys::fuzz_target;
use onroad_core::compare::parse_stations;

fuzz_target!(|data: &[u8]| {
    let _ = parse_stations(data);
});
