#![no_main]

use std::path::Path;

use libfuzzer_sys::fuzz_target;
use rotwave_harness::config::{RawConfig, SimConfig};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = SimConfig::parse(text, Path::new(".")) {
        let _ = cfg.params.validate_kmax(cfg.grid.kmax());
    }
    if let Some((line, rest)) = text.split_once('\n') {
        if let Ok(mut raw) = RawConfig::parse(rest) {
            let _ = raw.set_override(line);
            let _ = SimConfig::from_raw(&mut raw, Path::new("."));
        }
    }
});
