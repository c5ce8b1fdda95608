#![no_main]

use libfuzzer_sys::fuzz_target;
use onroad_core::config::{parse_synth_config, RunConfig};

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    let _ = RunConfig::parse(s);
    let _ = parse_synth_config(s);
});
