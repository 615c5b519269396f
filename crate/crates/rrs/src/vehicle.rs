//! OBU-side protocol logic: key collection, ring selection at the chosen
//! anonymity level, safety-message construction and verification with
//! revocation-list filtering, and post-verification key-set refresh.

use crate::authority::{RevocationBroadcast, RevocationList};
use crate::group::G1Point;
use crate::scheme::{sign, verify, Ring, RingSignature, SchemeError, VehicleKeyPair};
use rand::seq::SliceRandom;
use rand::{CryptoRng, Rng, RngCore};

pub const ENVELOPE_VERSION: u8 = 0x01;
/// Fixed-width payload block: position x/y, speed, heading (f64 BE each),
/// timestamp (u64 BE), event code (1 byte).
pub const PAYLOAD_LEN: usize = 8 * 4 + 8 + 1;

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum VehicleError {
    #[error("key pool smaller than the requested anonymity level")]
    InsufficientKeys,
    #[error("invalid payload: {0}")]
    InvalidPayload(&'static str),
    #[error("scheme error: {0}")]
    Scheme(#[from] SchemeError),
}

/// Reason a received envelope was rejected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum RejectReason {
    RevokedRingMember,
    BadSignature,
    MalformedEnvelope,
}

impl std::fmt::Display for RejectReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            RejectReason::RevokedRingMember => "RevokedRingMember",
            RejectReason::BadSignature => "BadSignature",
            RejectReason::MalformedEnvelope => "MalformedEnvelope",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventCode {
    Routine = 0,
    Brake = 1,
    Hazard = 2,
    BogusTest = 3,
}

impl EventCode {
    pub fn from_byte(b: u8) -> Option<Self> {
        match b {
            0 => Some(EventCode::Routine),
            1 => Some(EventCode::Brake),
            2 => Some(EventCode::Hazard),
            3 => Some(EventCode::BogusTest),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SafetyPayload {
    /// Position in meters.
    pub position: (f64, f64),
    /// Speed in m/s, non-negative.
    pub speed: f64,
    /// Heading in degrees, [0, 360).
    pub heading: f64,
    pub timestamp_ms: u64,
    pub event_code: EventCode,
}

impl SafetyPayload {
    pub fn validate(&self) -> Result<(), VehicleError> {
        if !self.position.0.is_finite() || !self.position.1.is_finite() {
            return Err(VehicleError::InvalidPayload("non-finite position"));
        }
        if !(self.speed >= 0.0) || !self.speed.is_finite() {
            return Err(VehicleError::InvalidPayload("speed must be >= 0"));
        }
        if !(self.heading >= 0.0 && self.heading < 360.0) {
            return Err(VehicleError::InvalidPayload("heading must be in [0, 360)"));
        }
        Ok(())
    }

    /// Fixed-width big-endian block; this byte string is the message M that
    /// gets signed.
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(PAYLOAD_LEN);
        out.extend_from_slice(&self.position.0.to_be_bytes());
        out.extend_from_slice(&self.position.1.to_be_bytes());
        out.extend_from_slice(&self.speed.to_be_bytes());
        out.extend_from_slice(&self.heading.to_be_bytes());
        out.extend_from_slice(&self.timestamp_ms.to_be_bytes());
        out.push(self.event_code as u8);
        out
    }

    pub fn decode(bytes: &[u8]) -> Option<Self> {
        if bytes.len() != PAYLOAD_LEN {
            return None;
        }
        let f = |i: usize| f64::from_be_bytes(bytes[i * 8..(i + 1) * 8].try_into().unwrap());
        let payload = SafetyPayload {
            position: (f(0), f(1)),
            speed: f(2),
            heading: f(3),
            timestamp_ms: u64::from_be_bytes(bytes[32..40].try_into().unwrap()),
            event_code: EventCode::from_byte(bytes[40])?,
        };
        payload.validate().ok()?;
        Some(payload)
    }
}

/// Wire object exchanged between OBUs.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedEnvelope {
    pub ring: Ring,
    pub signature: RingSignature,
    pub payload: SafetyPayload,
    pub rl_epoch_seen: u32,
}

impl SignedEnvelope {
    /// A ring of size one reveals the signer to everyone.
    pub fn is_degenerate_anonymity(&self) -> bool {
        self.ring.len() == 1
    }

    /// version 0x01 || ring || signature || payload block || rl_epoch_seen (4B BE)
    pub fn encode(&self) -> Vec<u8> {
        let mut out = vec![ENVELOPE_VERSION];
        out.extend_from_slice(&self.ring.encode());
        out.extend_from_slice(&self.signature.encode());
        out.extend_from_slice(&self.payload.encode());
        out.extend_from_slice(&self.rl_epoch_seen.to_be_bytes());
        out
    }

    pub fn decode(bytes: &[u8]) -> Option<Self> {
        if bytes.len() < 1 || bytes[0] != ENVELOPE_VERSION {
            return None;
        }
        let (ring, rest) = Ring::decode_prefix(&bytes[1..]).ok()?;
        let (signature, rest) = RingSignature::decode_prefix(rest).ok()?;
        if rest.len() != PAYLOAD_LEN + 4 {
            return None;
        }
        let payload = SafetyPayload::decode(&rest[..PAYLOAD_LEN])?;
        let rl_epoch_seen = u32::from_be_bytes(rest[PAYLOAD_LEN..].try_into().unwrap());
        Some(SignedEnvelope {
            ring,
            signature,
            payload,
            rl_epoch_seen,
        })
    }
}

/// Per-vehicle protocol state.
#[derive(Debug, Clone)]
pub struct ObuState {
    pub keypair: VehicleKeyPair,
    /// Pseudo-identity ID_i; carried as inert metadata only.
    pub pseudo_id: Vec<u8>,
    /// Collected public keys, own key included, sorted by encoding.
    collected: Vec<G1Point>,
    pub rl: RevocationList,
    pub anonymity_level: usize,
    pub key_pool_cap: usize,
    /// Revoked keys offered for collection and ignored.
    pub ignored_revoked: u64,
    last_sent_timestamp: Option<u64>,
}

impl ObuState {
    pub fn new(
        keypair: VehicleKeyPair,
        pseudo_id: Vec<u8>,
        anonymity_level: usize,
        key_pool_cap: usize,
    ) -> Self {
        assert!(anonymity_level >= 1, "anonymity level must be at least 1");
        assert!(key_pool_cap >= 1, "key pool cap must be at least 1");
        let collected = vec![keypair.y];
        ObuState {
            keypair,
            pseudo_id,
            collected,
            rl: RevocationList::new(),
            anonymity_level,
            key_pool_cap,
            ignored_revoked: 0,
            last_sent_timestamp: None,
        }
    }

    pub fn pool_size(&self) -> usize {
        self.collected.len()
    }

    pub fn pool(&self) -> &[G1Point] {
        &self.collected
    }

    pub fn pool_contains(&self, y: &G1Point) -> bool {
        self.position(y).is_some()
    }

    fn position(&self, y: &G1Point) -> Option<usize> {
        self.collected
            .binary_search_by_key(&y.encode(), |p| p.encode())
            .ok()
    }

    /// Add an encountered key to the pool. Revoked keys are ignored (and
    /// counted); at capacity a uniformly random non-own key is evicted.
    pub fn collect_public_key<R: RngCore + CryptoRng>(&mut self, y: &G1Point, rng: &mut R) {
        if self.rl.contains(y) {
            self.ignored_revoked += 1;
            return;
        }
        let enc = y.encode();
        if self
            .collected
            .binary_search_by_key(&enc, |p| p.encode())
            .is_ok()
        {
            return;
        }
        if self.collected.len() >= self.key_pool_cap {
            let own = self.keypair.y;
            let candidates: Vec<usize> = (0..self.collected.len())
                .filter(|&i| self.collected[i] != own)
                .collect();
            let Some(&evict) = candidates.as_slice().choose(rng) else {
                return; // cap of one holding only the own key
            };
            self.collected.remove(evict);
        }
        if let Err(pos) = self.collected.binary_search_by_key(&enc, |p| p.encode()) {
            self.collected.insert(pos, *y);
        }
    }

    /// Ring of `anonymity_level` keys: own key plus a uniform sample of the
    /// rest of the pool, canonically sorted.
    pub fn select_ring<R: RngCore + CryptoRng>(
        &self,
        rng: &mut R,
    ) -> Result<(Ring, usize), VehicleError> {
        self.select_ring_with_level(self.anonymity_level, rng)
    }

    /// `select_ring` at an explicit level; the simulation's cold-start
    /// fallback signs at the largest feasible level.
    pub fn select_ring_with_level<R: RngCore + CryptoRng>(
        &self,
        level: usize,
        rng: &mut R,
    ) -> Result<(Ring, usize), VehicleError> {
        if level < 1 || self.pool_size() < level {
            return Err(VehicleError::InsufficientKeys);
        }
        let own = self.keypair.y;
        // Own key may itself be revoked; it is still included (the signer
        // cannot form a ring without it). Every decoy must be off the RL.
        let others: Vec<&G1Point> = self
            .collected
            .iter()
            .filter(|p| **p != own && !self.rl.contains(p))
            .collect();
        if others.len() + 1 < level {
            return Err(VehicleError::InsufficientKeys);
        }
        let mut members: Vec<G1Point> = others
            .choose_multiple(rng, level - 1)
            .map(|p| **p)
            .collect();
        members.push(own);
        let ring = Ring::new(members)?;
        let index = ring.position(&own).expect("own key is a ring member");
        Ok((ring, index))
    }

    pub fn build_safety_message<R: RngCore + CryptoRng>(
        &mut self,
        payload: &SafetyPayload,
        y_trc: &G1Point,
        rng: &mut R,
    ) -> Result<SignedEnvelope, VehicleError> {
        self.build_with_level(payload, self.anonymity_level, y_trc, rng)
    }

    pub fn build_with_level<R: RngCore + CryptoRng>(
        &mut self,
        payload: &SafetyPayload,
        level: usize,
        y_trc: &G1Point,
        rng: &mut R,
    ) -> Result<SignedEnvelope, VehicleError> {
        payload.validate()?;
        if let Some(last) = self.last_sent_timestamp {
            if payload.timestamp_ms < last {
                return Err(VehicleError::InvalidPayload(
                    "timestamp must be monotone per sender",
                ));
            }
        }
        let (ring, index) = self.select_ring_with_level(level, rng)?;
        let msg = payload.encode();
        let signature = sign(&ring, &self.keypair, index, y_trc, &msg, rng)?;
        self.last_sent_timestamp = Some(payload.timestamp_ms);
        Ok(SignedEnvelope {
            ring,
            signature,
            payload: *payload,
            rl_epoch_seen: self.rl.epoch,
        })
    }

    /// RL intersection check, then scheme verification. On accept the
    /// key-set refresh runs (a random subset of the ring is absorbed).
    pub fn verify_safety_message<R: RngCore + CryptoRng>(
        &mut self,
        envelope: &SignedEnvelope,
        y_trc: &G1Point,
        rng: &mut R,
    ) -> Result<(), RejectReason> {
        if envelope.payload.validate().is_err()
            || envelope.signature.ring_size() != envelope.ring.len()
        {
            return Err(RejectReason::MalformedEnvelope);
        }
        if envelope
            .ring
            .members()
            .iter()
            .any(|y| self.rl.contains(y))
        {
            return Err(RejectReason::RevokedRingMember);
        }
        let msg = envelope.payload.encode();
        match verify(&envelope.ring, y_trc, &msg, &envelope.signature) {
            Ok(true) => {
                self.absorb_ring_keys(&envelope.ring, rng);
                Ok(())
            }
            Ok(false) => Err(RejectReason::BadSignature),
            Err(_) => Err(RejectReason::MalformedEnvelope),
        }
    }

    /// Key-set refresh: each ring member is absorbed independently with
    /// probability 1/2.
    pub fn absorb_ring_keys<R: RngCore + CryptoRng>(&mut self, ring: &Ring, rng: &mut R) {
        for y in ring.members() {
            if rng.gen::<bool>() {
                self.collect_public_key(y, rng);
            }
        }
    }

    /// Merge a revocation broadcast. Stale epochs are ignored idempotently.
    pub fn apply_revocation(&mut self, broadcast: &RevocationBroadcast) {
        if broadcast.epoch <= self.rl.epoch {
            return;
        }
        self.rl.insert(&broadcast.y);
        self.rl.epoch = broadcast.epoch;
        if broadcast.y != self.keypair.y {
            if let Some(pos) = self.position(&broadcast.y) {
                self.collected.remove(pos);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::authority::TrcState;
    use crate::group::Scalar;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn rng(seed: u64) -> ChaCha20Rng {
        ChaCha20Rng::seed_from_u64(seed)
    }

    fn payload(ts: u64) -> SafetyPayload {
        SafetyPayload {
            position: (100.0, 250.0),
            speed: 15.5,
            heading: 45.0,
            timestamp_ms: ts,
            event_code: EventCode::Routine,
        }
    }

    fn obu_with_pool(trc: &mut TrcState, rid: &str, others: usize, seed: u64) -> ObuState {
        let mut r = rng(seed);
        let kp = trc.register_vehicle(rid.as_bytes()).unwrap();
        let mut obu = ObuState::new(kp, format!("pid-{rid}").into_bytes(), 1, 256);
        for i in 0..others {
            let other = trc
                .register_vehicle(format!("{rid}-peer{i}").as_bytes())
                .unwrap();
            obu.collect_public_key(&other.y, &mut r);
        }
        obu
    }

    #[test]
    fn collect_is_idempotent_and_skips_revoked() {
        let mut trc = TrcState::new(&mut rng(1));
        let mut obu = obu_with_pool(&mut trc, "a", 3, 2);
        let own = obu.keypair.y;
        let size = obu.pool_size();
        let mut r = rng(3);
        obu.collect_public_key(&own, &mut r);
        assert_eq!(obu.pool_size(), size);

        let revoked = trc.register_vehicle(b"bad").unwrap().y;
        let bcast = trc.revoke(&revoked).unwrap();
        obu.apply_revocation(&bcast);
        obu.collect_public_key(&revoked, &mut r);
        assert_eq!(obu.pool_size(), size);
        assert_eq!(obu.ignored_revoked, 1);
    }

    #[test]
    fn pool_eviction_at_cap() {
        let mut trc = TrcState::new(&mut rng(4));
        let kp = trc.register_vehicle(b"small").unwrap();
        let mut obu = ObuState::new(kp, vec![], 1, 4);
        let mut r = rng(5);
        for i in 0..10 {
            let y = trc.register_vehicle(format!("p{i}").as_bytes()).unwrap().y;
            obu.collect_public_key(&y, &mut r);
            assert!(obu.pool_size() <= 4);
            assert!(obu.pool_contains(&obu.keypair.y.clone()));
        }
        assert_eq!(obu.pool_size(), 4);
    }

    #[test]
    fn select_ring_levels() {
        let mut trc = TrcState::new(&mut rng(6));
        let mut obu = obu_with_pool(&mut trc, "b", 19, 7);
        let mut r = rng(8);

        obu.anonymity_level = 1;
        let (ring, idx) = obu.select_ring(&mut r).unwrap();
        assert_eq!(ring.len(), 1);
        assert_eq!(ring.members()[idx], obu.keypair.y);

        obu.anonymity_level = 5;
        let (ring, idx) = obu.select_ring(&mut r).unwrap();
        assert_eq!(ring.len(), 5);
        assert_eq!(ring.members()[idx], obu.keypair.y);

        obu.anonymity_level = 30;
        assert_eq!(
            obu.select_ring(&mut r).unwrap_err(),
            VehicleError::InsufficientKeys
        );
    }

    #[test]
    fn build_verify_two_party() {
        let mut trc = TrcState::new(&mut rng(9));
        let mut sender = obu_with_pool(&mut trc, "s", 7, 10);
        sender.anonymity_level = 4;
        let mut receiver = obu_with_pool(&mut trc, "r", 0, 11);
        let mut r = rng(12);
        let env = sender
            .build_safety_message(&payload(1000), &trc.keypair.y_trc, &mut r)
            .unwrap();
        assert!(!env.is_degenerate_anonymity());
        receiver
            .verify_safety_message(&env, &trc.keypair.y_trc, &mut r)
            .unwrap();
    }

    #[test]
    fn degenerate_level_flagged() {
        let mut trc = TrcState::new(&mut rng(13));
        let mut sender = obu_with_pool(&mut trc, "solo", 0, 14);
        let mut r = rng(15);
        let env = sender
            .build_safety_message(&payload(1), &trc.keypair.y_trc, &mut r)
            .unwrap();
        assert!(env.is_degenerate_anonymity());
    }

    #[test]
    fn invalid_payload_rejected_at_build() {
        let mut trc = TrcState::new(&mut rng(16));
        let mut sender = obu_with_pool(&mut trc, "v", 0, 17);
        let mut r = rng(18);
        let mut bad = payload(1);
        bad.speed = -1.0;
        assert!(matches!(
            sender.build_safety_message(&bad, &trc.keypair.y_trc, &mut r),
            Err(VehicleError::InvalidPayload(_))
        ));
        let mut bad = payload(1);
        bad.heading = 360.0;
        assert!(matches!(
            sender.build_safety_message(&bad, &trc.keypair.y_trc, &mut r),
            Err(VehicleError::InvalidPayload(_))
        ));
        sender
            .build_safety_message(&payload(10), &trc.keypair.y_trc, &mut r)
            .unwrap();
        assert!(matches!(
            sender.build_safety_message(&payload(5), &trc.keypair.y_trc, &mut r),
            Err(VehicleError::InvalidPayload(_))
        ));
    }

    #[test]
    fn revoked_decoy_causes_rejection() {
        let mut trc = TrcState::new(&mut rng(19));
        let mut sender = obu_with_pool(&mut trc, "x", 5, 20);
        sender.anonymity_level = 6;
        let mut receiver = obu_with_pool(&mut trc, "y", 0, 21);
        let mut r = rng(22);
        let env = sender
            .build_safety_message(&payload(1), &trc.keypair.y_trc, &mut r)
            .unwrap();
        // Revoke one decoy after the message was built.
        let decoy = *env
            .ring
            .members()
            .iter()
            .find(|m| **m != sender.keypair.y)
            .unwrap();
        let bcast = trc.revoke(&decoy).unwrap();
        receiver.apply_revocation(&bcast);
        assert_eq!(
            receiver.verify_safety_message(&env, &trc.keypair.y_trc, &mut r),
            Err(RejectReason::RevokedRingMember)
        );
    }

    #[test]
    fn truncated_envelope_malformed() {
        let mut trc = TrcState::new(&mut rng(23));
        let mut sender = obu_with_pool(&mut trc, "t", 3, 24);
        sender.anonymity_level = 2;
        let mut r = rng(25);
        let env = sender
            .build_safety_message(&payload(1), &trc.keypair.y_trc, &mut r)
            .unwrap();
        let bytes = env.encode();
        assert_eq!(SignedEnvelope::decode(&bytes).unwrap(), env);
        assert!(SignedEnvelope::decode(&bytes[..bytes.len() - 1]).is_none());
        // Structural mismatch inside a decoded envelope.
        let mut mangled = env.clone();
        mangled.signature.s_list.pop();
        let mut receiver = obu_with_pool(&mut trc, "u", 0, 26);
        assert_eq!(
            receiver.verify_safety_message(&mangled, &trc.keypair.y_trc, &mut r),
            Err(RejectReason::MalformedEnvelope)
        );
    }

    #[test]
    fn absorb_statistics() {
        let mut trc = TrcState::new(&mut rng(27));
        let mut sender = obu_with_pool(&mut trc, "stat", 7, 28);
        sender.anonymity_level = 8;
        let mut r = rng(29);
        let (ring, _) = sender.select_ring(&mut r).unwrap();
        let mut absorbed = vec![0u32; ring.len()];
        let trials = 1000u32;
        for t in 0..trials {
            let kp = crate::scheme::derive_vehicle_key(
                &trc.keypair.x_trc,
                format!("fresh{t}").as_bytes(),
            )
            .unwrap();
            let mut fresh = ObuState::new(kp, vec![], 1, 256);
            fresh.absorb_ring_keys(&ring, &mut r);
            for (i, y) in ring.members().iter().enumerate() {
                if fresh.pool_contains(y) {
                    absorbed[i] += 1;
                }
            }
        }
        // Binomial(1000, 1/2): 3 sigma ~ 47.4.
        for (i, &count) in absorbed.iter().enumerate() {
            assert!(
                (452..=548).contains(&count),
                "member {i} absorbed {count} times"
            );
        }
    }

    #[test]
    fn apply_revocation_idempotent_and_prunes() {
        let mut trc = TrcState::new(&mut rng(30));
        let mut obu = obu_with_pool(&mut trc, "z", 5, 31);
        let victim = obu
            .pool()
            .iter()
            .copied()
            .find(|y| *y != obu.keypair.y)
            .unwrap();
        let size = obu.pool_size();
        let bcast = trc.revoke(&victim).unwrap();
        obu.apply_revocation(&bcast);
        assert_eq!(obu.pool_size(), size - 1);
        assert!(!obu.pool_contains(&victim));
        let snapshot = obu.clone();
        obu.apply_revocation(&bcast);
        assert_eq!(obu.pool_size(), snapshot.pool_size());
        assert_eq!(obu.rl, snapshot.rl);

        // Post-revocation rings never include the revoked key.
        obu.anonymity_level = obu.pool_size();
        let mut r = rng(32);
        for _ in 0..100 {
            let (ring, _) = obu.select_ring(&mut r).unwrap();
            assert!(!ring.contains(&victim));
        }
    }

    #[test]
    fn payload_decode_rejects_bad_fields() {
        let p = payload(77);
        let mut bytes = p.encode();
        assert_eq!(SafetyPayload::decode(&bytes), Some(p));
        bytes[40] = 9; // unknown event code
        assert_eq!(SafetyPayload::decode(&bytes), None);
        let mut neg_speed = p;
        neg_speed.speed = -3.0;
        assert_eq!(SafetyPayload::decode(&neg_speed.encode()), None);
    }

    #[test]
    fn own_key_is_scalar_times_generator() {
        // Sanity anchor for the pool bootstrap.
        let mut trc = TrcState::new(&mut rng(33));
        let kp = trc.register_vehicle(b"anchor").unwrap();
        assert_eq!(kp.y, crate::group::G1Point::generator().mul(&kp.x));
        let _ = Scalar::one();
    }
}
