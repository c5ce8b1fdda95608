#![no_main]

use libfuzzer_sys::fuzz_target;
use onroad_core::network::io::{read_roads, read_roads_geojson};

fuzz_target!(|data: &[u8]| {
    let _ = read_roads_geojson(data);
    let _ = read_roads(data);
});
