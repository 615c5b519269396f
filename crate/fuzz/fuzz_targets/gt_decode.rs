#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(e) = rrs::group::GtElement::decode(data) {
        assert_eq!(e.encode().as_slice(), data);
    }
});
