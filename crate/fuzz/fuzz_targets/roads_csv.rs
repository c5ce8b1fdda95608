#![no_main]

use libfuzzer_sys::fuzz_target;
use onroad_core::geo::Projection;
use onroad_core::network::build_segments;
use onroad_core::network::io::read_roads_csv;

fuzz_target!(|data: &[u8]| {
    if let Ok(roads) = read_roads_csv(data) {
        if let Some(proj) = Projection::centered_on(roads.iter().flat_map(|r| &r.points)) {
            let _ = build_segments(&roads, 50.0, &proj);
        }
    }
});
