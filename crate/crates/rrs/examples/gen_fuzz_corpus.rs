//! Writes one well-formed seed input per fuzz target into fuzz/corpus/.
//!
//!     cargo run -p rrs --example gen_fuzz_corpus

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rrs::authority::TrcState;
use rrs::scheme::{sign, Ring};
use rrs::vehicle::{EventCode, SafetyPayload, SignedEnvelope};
use std::fs;
use std::path::Path;

fn seed(dir: &Path, target: &str, name: &str, bytes: &[u8]) {
    let d = dir.join(target);
    fs::create_dir_all(&d).unwrap();
    fs::write(d.join(name), bytes).unwrap();
}

fn main() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus");
    let mut rng = ChaCha20Rng::seed_from_u64(0xc0bb5);

    let mut trc = TrcState::new(&mut rng);
    let keys: Vec<_> = (0..3)
        .map(|i| trc.register_vehicle(format!("corpus-{i}").as_bytes()).unwrap())
        .collect();
    let ring = Ring::new(keys.iter().map(|k| k.y).collect()).unwrap();
    let pi = ring.position(&keys[0].y).unwrap();

    let payload = SafetyPayload {
        position: (120.5, 77.25),
        speed: 13.0,
        heading: 45.0,
        timestamp_ms: 1500,
        event_code: EventCode::Routine,
    };
    let sig = sign(
        &ring,
        &keys[0],
        pi,
        &trc.keypair.y_trc,
        &payload.encode(),
        &mut rng,
    )
    .unwrap();
    let envelope = SignedEnvelope {
        ring: ring.clone(),
        signature: sig.clone(),
        payload,
        rl_epoch_seen: 0,
    };
    let broadcast = trc.revoke(&keys[2].y).unwrap();

    seed(&root, "scalar_decode", "scalar", &keys[0].x.encode());
    seed(&root, "point_decode", "point", &keys[1].y.encode());
    seed(
        &root,
        "gt_decode",
        "gt",
        &rrs::group::pairing(&keys[0].y, &trc.keypair.y_trc).encode(),
    );
    seed(&root, "ring_decode", "ring3", &ring.encode());
    seed(&root, "signature_decode", "sig3", &sig.encode());
    seed(&root, "envelope_decode", "env3", &envelope.encode());
    let mut snap_input = trc.private_key_bytes();
    snap_input.extend_from_slice(&trc.snapshot());
    seed(&root, "snapshot_decode", "snap3", &snap_input);
    seed(&root, "revocation_decode", "bcast", &broadcast.encode());
    seed(
        &root,
        "sim_config_parse",
        "default",
        rrs::sim::SimConfig::default().to_text().as_bytes(),
    );
    println!("corpus written under {}", root.display());
}
