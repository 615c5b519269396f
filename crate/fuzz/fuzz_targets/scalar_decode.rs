#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = rrs::group::Scalar::decode(data) {
        // Canonicity: decode is a right inverse of encode.
        assert_eq!(s.encode().as_slice(), data);
    }
});
