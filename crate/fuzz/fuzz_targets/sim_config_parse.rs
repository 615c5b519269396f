#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(cfg) = rrs::sim::SimConfig::parse(text) {
            // A parsed config re-parses from its own rendering.
            let again = rrs::sim::SimConfig::parse(&cfg.to_text()).unwrap();
            assert_eq!(again, cfg);
        }
    }
});
