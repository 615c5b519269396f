#![no_main]
use libfuzzer_sys::fuzz_target;

// First 33 bytes play the private-key file, the rest the snapshot.
fuzz_target!(|data: &[u8]| {
    if data.len() < 33 {
        return;
    }
    let (key, snap) = data.split_at(33);
    if let Ok(state) = rrs::authority::TrcState::from_snapshot(snap, key) {
        assert_eq!(state.snapshot().as_slice(), snap);
    }
});
