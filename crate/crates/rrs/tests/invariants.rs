//! Property tests for the wire encodings: decode ∘ encode = id, and
//! decoding enforces canonical form.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rrs::group::{hash_to_scalar, G1Point, Scalar, SCALAR_LEN};
use rrs::scheme::Ring;
use rrs::vehicle::SafetyPayload;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn scalar_roundtrip(seed in any::<u64>()) {
        let mut r = ChaCha20Rng::seed_from_u64(seed);
        let s = Scalar::random(&mut r);
        let enc = s.encode();
        prop_assert_eq!(enc.len(), SCALAR_LEN);
        prop_assert_eq!(Scalar::decode(&enc).unwrap(), s);
    }

    #[test]
    fn hash_to_scalar_reencodes(tag in proptest::collection::vec(any::<u8>(), 0..16),
                                 input in proptest::collection::vec(any::<u8>(), 0..64)) {
        // The reduced output always survives an encode/decode cycle, i.e.
        // it is below the group order.
        let s = hash_to_scalar(&tag, &input);
        prop_assert_eq!(Scalar::decode(&s.encode()).unwrap(), s);
    }

    #[test]
    fn point_roundtrip(seed in any::<u64>()) {
        let mut r = ChaCha20Rng::seed_from_u64(seed);
        let p = G1Point::generator().mul(&Scalar::random(&mut r));
        prop_assert_eq!(G1Point::decode(&p.encode()).unwrap(), p);
    }

    #[test]
    fn point_decode_rejects_mutations(seed in any::<u64>(), at in 0usize..144, bit in 0u8..8) {
        let mut r = ChaCha20Rng::seed_from_u64(seed);
        let p = G1Point::generator().mul(&Scalar::random(&mut r));
        let mut enc = p.encode();
        enc[at] ^= 1 << bit;
        // Any single-bit corruption either fails to decode or decodes to a
        // point with a different (still canonical) encoding — never to the
        // original point.
        if let Ok(q) = G1Point::decode(&enc) {
            prop_assert_ne!(q, p);
            let reenc = q.encode();
            prop_assert_eq!(reenc.as_slice(), enc.as_slice());
        }
    }

    #[test]
    fn ring_canonical_roundtrip(seed in any::<u64>(), n in 1usize..6) {
        let mut r = ChaCha20Rng::seed_from_u64(seed);
        let members: Vec<G1Point> = (0..n)
            .map(|_| G1Point::generator().mul(&Scalar::random_nonzero(&mut r)))
            .collect();
        if let Ok(ring) = Ring::new(members) {
            let decoded = Ring::decode(&ring.encode()).unwrap();
            prop_assert_eq!(&decoded, &ring);
            // Canonical order: re-sorting changes nothing.
            let encs: Vec<_> = ring.members().iter().map(|m| m.encode()).collect();
            let sorted = { let mut s = encs.clone(); s.sort(); s };
            prop_assert_eq!(&encs, &sorted);
        }
    }

    #[test]
    fn payload_roundtrip(x in -1e6f64..1e6, y in -1e6f64..1e6,
                         speed in 0f64..120.0, heading in 0f64..360.0,
                         ts in any::<u64>(), code in 0u8..4) {
        let p = SafetyPayload {
            position: (x, y),
            speed,
            heading,
            timestamp_ms: ts,
            event_code: rrs::vehicle::EventCode::from_byte(code).unwrap(),
        };
        prop_assert!(p.validate().is_ok());
        let enc = p.encode();
        prop_assert_eq!(SafetyPayload::decode(&enc).unwrap(), p);
    }

    #[test]
    fn arbitrary_bytes_never_panic_decoders(bytes in proptest::collection::vec(any::<u8>(), 0..512)) {
        let _ = Scalar::decode(&bytes);
        let _ = G1Point::decode(&bytes);
        let _ = rrs::group::GtElement::decode(&bytes);
        let _ = Ring::decode(&bytes);
        let _ = rrs::scheme::RingSignature::decode(&bytes);
        let _ = SafetyPayload::decode(&bytes);
        let _ = rrs::vehicle::SignedEnvelope::decode(&bytes);
        let _ = rrs::authority::RevocationBroadcast::decode(&bytes);
        let _ = rrs::sim::SimConfig::parse(&String::from_utf8_lossy(&bytes));
    }
}
