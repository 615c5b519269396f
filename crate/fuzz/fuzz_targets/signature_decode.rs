#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(sig) = rrs::scheme::RingSignature::decode(data) {
        assert_eq!(sig.encode().as_slice(), data);
    }
});
