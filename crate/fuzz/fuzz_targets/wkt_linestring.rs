#![no_main]

use libfuzzer_sys::fuzz_target;
use onroad_core::network::io::{format_wkt_linestring, parse_wkt_linestring};

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(points) = parse_wkt_linestring(s) {
        let again = parse_wkt_linestring(&format_wkt_linestring(&points)).expect("formatted WKT parses");
        assert_eq!(again, points);
    }
});
