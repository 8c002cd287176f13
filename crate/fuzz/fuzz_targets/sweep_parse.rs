#![no_main]

use std::path::Path;

use libfuzzer_sys::fuzz_target;
use rotwave_harness::config::SweepConfig;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(sweep) = SweepConfig::parse(text, Path::new(".")) {
            assert!(!sweep.eps0_list.is_empty() && !sweep.eps1_list.is_empty());
            assert!(sweep.eps0_list.windows(2).all(|w| w[0] < w[1]));
            assert!(sweep.eps1_list.windows(2).all(|w| w[0] < w[1]));
        }
    }
});
