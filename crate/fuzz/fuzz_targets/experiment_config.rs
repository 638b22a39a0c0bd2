#![no_main]
use libfuzzer_sys::fuzz_target;
use scz_lab::config::ExperimentConfig;
use std::path::Path;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = ExperimentConfig::from_json(text, Path::new(".")) {
        let again = ExperimentConfig::from_json(&cfg.to_json(), Path::new(".")).expect("re-read own JSON");
        assert_eq!(cfg, again);
    }
});
