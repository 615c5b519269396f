#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(p) = rrs::group::G1Point::decode(data) {
        assert_eq!(p.encode().as_slice(), data);
    }
});
