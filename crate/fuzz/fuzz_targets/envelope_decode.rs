#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Some(env) = rrs::vehicle::SignedEnvelope::decode(data) {
        assert_eq!(env.encode().as_slice(), data);
    }
});
