//! The Transportation Regulation Center: vehicle registration, dispute
//! tracing to a real identity, and revocation-list issuance.

use crate::group::{G1Point, GroupError, G1_LEN, SCALAR_LEN};
use crate::scheme::{derive_vehicle_key, trace, trc_keygen, SchemeError, TrcKeyPair, VehicleKeyPair};
use crate::vehicle::SignedEnvelope;
use crate::Scalar;
use rand::{CryptoRng, RngCore};

pub const SNAPSHOT_VERSION: u8 = 0x01;

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum AuthorityError {
    #[error("identity already registered")]
    DuplicateIdentity,
    #[error("key is not registered with this authority")]
    UnregisteredKey,
    #[error("key is already revoked")]
    AlreadyRevoked,
    #[error("scheme error: {0}")]
    Scheme(#[from] SchemeError),
    #[error("malformed snapshot: {0}")]
    Encoding(#[from] GroupError),
    #[error("snapshot is inconsistent with the private key")]
    KeyMismatch,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegistrationRecord {
    pub y: G1Point,
    pub rid: Vec<u8>,
}

/// Append-only set of revoked public keys, versioned by epoch.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RevocationList {
    pub epoch: u32,
    entries: Vec<[u8; G1_LEN]>, // sorted encodings
}

impl RevocationList {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, y: &G1Point) -> bool {
        self.entries.binary_search(&y.encode()).is_ok()
    }

    /// Insert a key; returns false when already present.
    pub fn insert(&mut self, y: &G1Point) -> bool {
        let enc = y.encode();
        match self.entries.binary_search(&enc) {
            Ok(_) => false,
            Err(pos) => {
                self.entries.insert(pos, enc);
                true
            }
        }
    }

    pub fn iter_encoded(&self) -> impl Iterator<Item = &[u8; G1_LEN]> {
        self.entries.iter()
    }
}

/// Revocation announcement handed to the simulation/transport layer.
/// Carries the real identity, exactly as the protocol broadcasts it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RevocationBroadcast {
    pub epoch: u32,
    pub y: G1Point,
    pub rid: Vec<u8>,
}

impl RevocationBroadcast {
    /// epoch (4-byte BE) || encode(y) || RID length (2-byte BE) || RID
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(4 + G1_LEN + 2 + self.rid.len());
        out.extend_from_slice(&self.epoch.to_be_bytes());
        out.extend_from_slice(&self.y.encode());
        out.extend_from_slice(&(self.rid.len() as u16).to_be_bytes());
        out.extend_from_slice(&self.rid);
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, GroupError> {
        if bytes.len() < 4 + G1_LEN + 2 {
            return Err(GroupError::WrongLength {
                expected: 4 + G1_LEN + 2,
                got: bytes.len(),
            });
        }
        let epoch = u32::from_be_bytes(bytes[..4].try_into().unwrap());
        let y = G1Point::decode(&bytes[4..4 + G1_LEN])?;
        let rid_len =
            u16::from_be_bytes(bytes[4 + G1_LEN..4 + G1_LEN + 2].try_into().unwrap()) as usize;
        let rest = &bytes[4 + G1_LEN + 2..];
        if rest.len() != rid_len {
            return Err(GroupError::WrongLength {
                expected: 4 + G1_LEN + 2 + rid_len,
                got: bytes.len(),
            });
        }
        Ok(RevocationBroadcast {
            epoch,
            y,
            rid: rest.to_vec(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchStrategy {
    Linear,
    Binary,
}

#[derive(Debug, Clone)]
pub struct TrcState {
    pub keypair: TrcKeyPair,
    /// Registration records kept sorted by encode(y) for binary search.
    records: Vec<RegistrationRecord>,
    pub rl: RevocationList,
}

impl TrcState {
    pub fn new<R: RngCore + CryptoRng>(rng: &mut R) -> Self {
        TrcState {
            keypair: trc_keygen(rng),
            records: Vec::new(),
            rl: RevocationList::new(),
        }
    }

    pub fn records(&self) -> &[RegistrationRecord] {
        &self.records
    }

    pub fn record_count(&self) -> usize {
        self.records.len()
    }

    /// Register a vehicle identity, derive its keypair, and store the
    /// (y_i, RID_i) record in sorted position.
    pub fn register_vehicle(&mut self, rid: &[u8]) -> Result<VehicleKeyPair, AuthorityError> {
        if self.records.iter().any(|r| r.rid == rid) {
            return Err(AuthorityError::DuplicateIdentity);
        }
        let kp = derive_vehicle_key(&self.keypair.x_trc, rid)?;
        let enc = kp.y.encode();
        match self.records.binary_search_by_key(&enc, |r| r.y.encode()) {
            // Same key for a different RID would be a hash collision.
            Ok(_) => Err(AuthorityError::DuplicateIdentity),
            Err(pos) => {
                self.records.insert(
                    pos,
                    RegistrationRecord {
                        y: kp.y,
                        rid: rid.to_vec(),
                    },
                );
                Ok(kp)
            }
        }
    }

    pub fn lookup_identity(&self, y: &G1Point, search: SearchStrategy) -> Option<&[u8]> {
        match search {
            SearchStrategy::Linear => self
                .records
                .iter()
                .find(|r| r.y == *y)
                .map(|r| r.rid.as_slice()),
            SearchStrategy::Binary => self
                .records
                .binary_search_by_key(&y.encode(), |r| r.y.encode())
                .ok()
                .map(|i| self.records[i].rid.as_slice()),
        }
    }

    /// Trace a disputed envelope to the registered identity of its signer.
    pub fn trace_to_identity(
        &self,
        envelope: &SignedEnvelope,
        search: SearchStrategy,
    ) -> Result<(G1Point, Vec<u8>), AuthorityError> {
        let msg = envelope.payload.encode();
        let pi = trace(
            &envelope.signature,
            &envelope.ring,
            &self.keypair.x_trc,
            &msg,
        )?;
        let y = envelope.ring.members()[pi];
        let rid = self
            .lookup_identity(&y, search)
            .ok_or(AuthorityError::UnregisteredKey)?;
        Ok((y, rid.to_vec()))
    }

    /// Revoke a registered key and produce the broadcast for all OBUs.
    pub fn revoke(&mut self, y: &G1Point) -> Result<RevocationBroadcast, AuthorityError> {
        let rid = self
            .lookup_identity(y, SearchStrategy::Binary)
            .ok_or(AuthorityError::UnregisteredKey)?
            .to_vec();
        if self.rl.contains(y) {
            return Err(AuthorityError::AlreadyRevoked);
        }
        self.rl.insert(y);
        self.rl.epoch += 1;
        Ok(RevocationBroadcast {
            epoch: self.rl.epoch,
            y: *y,
            rid,
        })
    }

    /// Public snapshot: version || encode(y_TRC) || record count (4B BE) ||
    /// records (encode(y) || RID len (2B BE) || RID) || RL epoch (4B BE) ||
    /// RL count (4B BE) || revoked keys. The private key is never included.
    pub fn snapshot(&self) -> Vec<u8> {
        let mut out = vec![SNAPSHOT_VERSION];
        out.extend_from_slice(&self.keypair.y_trc.encode());
        out.extend_from_slice(&(self.records.len() as u32).to_be_bytes());
        for r in &self.records {
            out.extend_from_slice(&r.y.encode());
            out.extend_from_slice(&(r.rid.len() as u16).to_be_bytes());
            out.extend_from_slice(&r.rid);
        }
        out.extend_from_slice(&self.rl.epoch.to_be_bytes());
        out.extend_from_slice(&(self.rl.len() as u32).to_be_bytes());
        for enc in self.rl.iter_encoded() {
            out.extend_from_slice(enc);
        }
        out
    }

    /// Private key file body: version || encode(x_TRC).
    pub fn private_key_bytes(&self) -> Vec<u8> {
        let mut out = vec![SNAPSHOT_VERSION];
        out.extend_from_slice(&self.keypair.x_trc.encode());
        out
    }

    pub fn from_snapshot(snapshot: &[u8], key_bytes: &[u8]) -> Result<Self, AuthorityError> {
        if key_bytes.len() != 1 + SCALAR_LEN || key_bytes[0] != SNAPSHOT_VERSION {
            return Err(GroupError::NonCanonicalEncoding.into());
        }
        let x_trc = Scalar::decode(&key_bytes[1..])?;

        let mut off = 0usize;
        let need = |off: usize, want: usize, total: usize| -> Result<(), GroupError> {
            if off + want > total {
                Err(GroupError::WrongLength {
                    expected: off + want,
                    got: total,
                })
            } else {
                Ok(())
            }
        };
        let total = snapshot.len();
        need(off, 1, total)?;
        if snapshot[0] != SNAPSHOT_VERSION {
            return Err(GroupError::NonCanonicalEncoding.into());
        }
        off += 1;
        need(off, G1_LEN, total)?;
        let y_trc = G1Point::decode(&snapshot[off..off + G1_LEN])?;
        off += G1_LEN;
        if y_trc != G1Point::generator().mul(&x_trc) {
            return Err(AuthorityError::KeyMismatch);
        }
        need(off, 4, total)?;
        let n_records = u32::from_be_bytes(snapshot[off..off + 4].try_into().unwrap()) as usize;
        off += 4;
        let mut records = Vec::with_capacity(n_records);
        for _ in 0..n_records {
            need(off, G1_LEN + 2, total)?;
            let y = G1Point::decode(&snapshot[off..off + G1_LEN])?;
            off += G1_LEN;
            let rid_len =
                u16::from_be_bytes(snapshot[off..off + 2].try_into().unwrap()) as usize;
            off += 2;
            need(off, rid_len, total)?;
            let rid = snapshot[off..off + rid_len].to_vec();
            off += rid_len;
            records.push(RegistrationRecord { y, rid });
        }
        if records
            .windows(2)
            .any(|w| w[0].y.encode() >= w[1].y.encode())
        {
            return Err(GroupError::NonCanonicalEncoding.into());
        }
        need(off, 8, total)?;
        let epoch = u32::from_be_bytes(snapshot[off..off + 4].try_into().unwrap());
        off += 4;
        let n_rl = u32::from_be_bytes(snapshot[off..off + 4].try_into().unwrap()) as usize;
        off += 4;
        let mut rl = RevocationList::new();
        for _ in 0..n_rl {
            need(off, G1_LEN, total)?;
            let y = G1Point::decode(&snapshot[off..off + G1_LEN])?;
            off += G1_LEN;
            if !rl.insert(&y) {
                return Err(GroupError::NonCanonicalEncoding.into());
            }
        }
        rl.epoch = epoch;
        if off != total {
            return Err(GroupError::WrongLength {
                expected: off,
                got: total,
            }
            .into());
        }
        Ok(TrcState {
            keypair: TrcKeyPair {
                x_trc,
                y_trc,
            },
            records,
            rl,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vehicle::{EventCode, ObuState, SafetyPayload};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn rng(seed: u64) -> ChaCha20Rng {
        ChaCha20Rng::seed_from_u64(seed)
    }

    #[test]
    fn register_and_lookup() {
        let mut trc = TrcState::new(&mut rng(1));
        let kp = trc.register_vehicle(b"plate:AAA").unwrap();
        assert_eq!(
            trc.lookup_identity(&kp.y, SearchStrategy::Linear),
            Some(b"plate:AAA".as_slice())
        );
        assert_eq!(
            trc.register_vehicle(b"plate:AAA"),
            Err(AuthorityError::DuplicateIdentity)
        );
    }

    #[test]
    fn bulk_registration_stays_sorted() {
        let mut trc = TrcState::new(&mut rng(2));
        let mut keys = vec![];
        for i in 0..1000 {
            keys.push((
                trc.register_vehicle(format!("v{i}").as_bytes()).unwrap(),
                format!("v{i}"),
            ));
        }
        let encs: Vec<_> = trc.records().iter().map(|r| r.y.encode()).collect();
        let mut sorted = encs.clone();
        sorted.sort();
        assert_eq!(encs, sorted);
        for (kp, rid) in &keys {
            assert_eq!(
                trc.lookup_identity(&kp.y, SearchStrategy::Binary),
                Some(rid.as_bytes())
            );
            assert_eq!(
                trc.lookup_identity(&kp.y, SearchStrategy::Linear),
                Some(rid.as_bytes())
            );
        }
    }

    fn build_envelope(trc: &TrcState, seed: u64, others: usize) -> (SignedEnvelope, Vec<u8>) {
        let mut r = rng(seed);
        let kp = derive_vehicle_key(&trc.keypair.x_trc, b"sender").unwrap();
        let mut obu = ObuState::new(kp, b"pseudo".to_vec(), 1 + others, 256);
        for i in 0..others {
            let other = derive_vehicle_key(&trc.keypair.x_trc, format!("o{i}").as_bytes()).unwrap();
            obu.collect_public_key(&other.y, &mut r);
        }
        let payload = SafetyPayload {
            position: (10.0, 20.0),
            speed: 13.0,
            heading: 90.0,
            timestamp_ms: 1000,
            event_code: EventCode::Routine,
        };
        let env = obu
            .build_safety_message(&payload, &trc.keypair.y_trc, &mut r)
            .unwrap();
        (env, b"sender".to_vec())
    }

    #[test]
    fn trace_to_identity_end_to_end() {
        let mut trc = TrcState::new(&mut rng(3));
        trc.register_vehicle(b"sender").unwrap();
        for i in 0..4 {
            trc.register_vehicle(format!("o{i}").as_bytes()).unwrap();
        }
        let (env, rid) = build_envelope(&trc, 4, 4);
        let (y, got) = trc
            .trace_to_identity(&env, SearchStrategy::Binary)
            .unwrap();
        assert_eq!(got, rid);
        let (y2, got2) = trc.trace_to_identity(&env, SearchStrategy::Linear).unwrap();
        assert_eq!((y, got), (y2, got2));
    }

    #[test]
    fn trace_unregistered_key() {
        // Envelope whose signer key was derived under this TRC but never
        // registered: trace succeeds, record lookup does not.
        let trc = TrcState::new(&mut rng(5));
        let (env, _) = build_envelope(&trc, 6, 2);
        assert_eq!(
            trc.trace_to_identity(&env, SearchStrategy::Binary),
            Err(AuthorityError::UnregisteredKey)
        );
    }

    #[test]
    fn revoke_semantics() {
        let mut trc = TrcState::new(&mut rng(7));
        let mut ys = vec![];
        for i in 0..5 {
            ys.push(trc.register_vehicle(format!("v{i}").as_bytes()).unwrap().y);
        }
        let b = trc.revoke(&ys[0]).unwrap();
        assert_eq!(b.epoch, 1);
        assert!(trc.rl.contains(&ys[0]));
        assert_eq!(trc.revoke(&ys[0]), Err(AuthorityError::AlreadyRevoked));
        for y in &ys[1..] {
            trc.revoke(y).unwrap();
        }
        assert_eq!(trc.rl.len(), 5);
        assert_eq!(trc.rl.epoch, 5);
        let stranger = G1Point::generator().mul(&Scalar::from_u64(99));
        assert_eq!(trc.revoke(&stranger), Err(AuthorityError::UnregisteredKey));
    }

    #[test]
    fn snapshot_roundtrip() {
        let mut trc = TrcState::new(&mut rng(8));
        for i in 0..7 {
            trc.register_vehicle(format!("car{i}").as_bytes()).unwrap();
        }
        let y = trc.records()[2].y;
        trc.revoke(&y).unwrap();
        let snap = trc.snapshot();
        let key = trc.private_key_bytes();
        let back = TrcState::from_snapshot(&snap, &key).unwrap();
        assert_eq!(back.records(), trc.records());
        assert_eq!(back.rl, trc.rl);
        assert_eq!(back.keypair.x_trc, trc.keypair.x_trc);
        // Wrong key is rejected.
        let other = TrcState::new(&mut rng(9));
        assert!(matches!(
            TrcState::from_snapshot(&snap, &other.private_key_bytes()),
            Err(AuthorityError::KeyMismatch)
        ));
        // Truncated snapshot is rejected.
        assert!(TrcState::from_snapshot(&snap[..snap.len() - 3], &key).is_err());
    }

    #[test]
    fn broadcast_wire_roundtrip() {
        let mut trc = TrcState::new(&mut rng(10));
        let y = trc.register_vehicle(b"bad-actor").unwrap().y;
        let b = trc.revoke(&y).unwrap();
        let bytes = b.encode();
        assert_eq!(RevocationBroadcast::decode(&bytes).unwrap(), b);
        assert!(RevocationBroadcast::decode(&bytes[..10]).is_err());
    }
}
