#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(ring) = rrs::scheme::Ring::decode(data) {
        assert_eq!(ring.encode().as_slice(), data);
    }
});
