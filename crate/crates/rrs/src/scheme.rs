//! The revocable ring signature scheme: TRC keygen, vehicle key derivation,
//! sign, verify, trace.
//!
//! A signature on message M under ring S = {y_1..y_n} and tracing key y_TRC
//! is (R, E_TRC) plus the proof transcript (s, s_1..s_n, c_1..c_n) of
//!
//!   SPK{ x: E_TRC = e(R, y_TRC)^x  AND  OR_i y_i = x P }(M)
//!
//! where R = rP and E_TRC = e(y_pi, y_TRC)^r for the signer index pi. The
//! tracing authority recovers pi by testing E_TRC = e(y_i, R)^{x_TRC}.

use crate::group::{
    hash_to_scalar, pairing, G1Half, G1Point, GroupError, GtElement, Scalar, G1_LEN, GT_LEN,
    SCALAR_LEN,
};
use rand::{CryptoRng, RngCore};

pub const DOMAIN_CHALLENGE: &[u8] = b"rrs/v1/chal";
pub const DOMAIN_KEY_DERIVE: &[u8] = b"rrs/v1/keyderive";

/// Version byte of the signature wire layout.
pub const SIG_VERSION: u8 = 0x01;

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum SchemeError {
    #[error("vehicle identity must be non-empty")]
    EmptyIdentity,
    #[error("ring must contain at least one member")]
    EmptyRing,
    #[error("ring members must be distinct")]
    DuplicateRingMember,
    #[error("signer public key is not a ring member")]
    SignerNotInRing,
    #[error("signer index does not point at the signer's key")]
    IndexMismatch,
    #[error("signature transcript length does not match ring size")]
    LengthMismatch,
    #[error("signature failed verification")]
    InvalidSignature,
    #[error("no ring member matches the tracing equation")]
    NoSignerFound,
    #[error("malformed encoding: {0}")]
    Encoding(#[from] GroupError),
}

#[derive(Debug, Clone)]
pub struct TrcKeyPair {
    pub x_trc: Scalar,
    pub y_trc: G1Point,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VehicleKeyPair {
    pub x: Scalar,
    pub y: G1Point,
}

/// Ordered ring of distinct public keys, sorted ascending by canonical
/// encoding so signer and verifier hash identical byte streams.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ring {
    members: Vec<G1Point>,
}

impl Ring {
    pub fn new(mut members: Vec<G1Point>) -> Result<Self, SchemeError> {
        if members.is_empty() {
            return Err(SchemeError::EmptyRing);
        }
        members.sort_by_key(|p| p.encode());
        if members.windows(2).any(|w| w[0] == w[1]) {
            return Err(SchemeError::DuplicateRingMember);
        }
        Ok(Ring { members })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[G1Point] {
        &self.members
    }

    pub fn position(&self, key: &G1Point) -> Option<usize> {
        self.members
            .binary_search_by_key(&key.encode(), |p| p.encode())
            .ok()
    }

    pub fn contains(&self, key: &G1Point) -> bool {
        self.position(key).is_some()
    }

    /// n as 4-byte big-endian followed by the member encodings in order.
    /// Used both as hash framing and as the wire form.
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(4 + self.members.len() * G1_LEN);
        out.extend_from_slice(&(self.members.len() as u32).to_be_bytes());
        for m in &self.members {
            out.extend_from_slice(&m.encode());
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, SchemeError> {
        let (ring, rest) = Self::decode_prefix(bytes)?;
        if !rest.is_empty() {
            return Err(GroupError::WrongLength {
                expected: bytes.len() - rest.len(),
                got: bytes.len(),
            }
            .into());
        }
        Ok(ring)
    }

    /// Decode a ring from the front of `bytes`, returning the remainder.
    pub fn decode_prefix(bytes: &[u8]) -> Result<(Self, &[u8]), SchemeError> {
        if bytes.len() < 4 {
            return Err(GroupError::WrongLength {
                expected: 4,
                got: bytes.len(),
            }
            .into());
        }
        let n = u32::from_be_bytes(bytes[..4].try_into().unwrap()) as usize;
        let need = 4 + n * G1_LEN;
        if bytes.len() < need {
            return Err(GroupError::WrongLength {
                expected: need,
                got: bytes.len(),
            }
            .into());
        }
        let mut members = Vec::with_capacity(n);
        for i in 0..n {
            members.push(G1Point::decode(&bytes[4 + i * G1_LEN..4 + (i + 1) * G1_LEN])?);
        }
        // Wire rings must already be in canonical order with no duplicates.
        let ring = Ring::new(members)?;
        if ring.encode().as_slice() != &bytes[..need] {
            return Err(GroupError::NonCanonicalEncoding.into());
        }
        Ok((ring, &bytes[need..]))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RingSignature {
    pub r_point: G1Point,
    pub e_trc: GtElement,
    pub s: Scalar,
    pub s_list: Vec<Scalar>,
    pub c_list: Vec<Scalar>,
}

impl RingSignature {
    pub fn ring_size(&self) -> usize {
        self.s_list.len()
    }

    pub fn encoded_len(n: usize) -> usize {
        1 + 4 + G1_LEN + GT_LEN + SCALAR_LEN + 2 * n * SCALAR_LEN
    }

    /// version 0x01 || n (4-byte BE) || R || E_TRC || s || s_1..s_n || c_1..c_n
    pub fn encode(&self) -> Vec<u8> {
        let n = self.s_list.len();
        let mut out = Vec::with_capacity(Self::encoded_len(n));
        out.push(SIG_VERSION);
        out.extend_from_slice(&(n as u32).to_be_bytes());
        out.extend_from_slice(&self.r_point.encode());
        out.extend_from_slice(&self.e_trc.encode());
        out.extend_from_slice(&self.s.encode());
        for s in &self.s_list {
            out.extend_from_slice(&s.encode());
        }
        for c in &self.c_list {
            out.extend_from_slice(&c.encode());
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, SchemeError> {
        let (sig, rest) = Self::decode_prefix(bytes)?;
        if !rest.is_empty() {
            return Err(GroupError::WrongLength {
                expected: bytes.len() - rest.len(),
                got: bytes.len(),
            }
            .into());
        }
        Ok(sig)
    }

    pub fn decode_prefix(bytes: &[u8]) -> Result<(Self, &[u8]), SchemeError> {
        if bytes.len() < 5 {
            return Err(GroupError::WrongLength {
                expected: 5,
                got: bytes.len(),
            }
            .into());
        }
        if bytes[0] != SIG_VERSION {
            return Err(GroupError::NonCanonicalEncoding.into());
        }
        let n = u32::from_be_bytes(bytes[1..5].try_into().unwrap()) as usize;
        let need = Self::encoded_len(n);
        if bytes.len() < need {
            return Err(GroupError::WrongLength {
                expected: need,
                got: bytes.len(),
            }
            .into());
        }
        let mut off = 5;
        let r_point = G1Point::decode(&bytes[off..off + G1_LEN])?;
        off += G1_LEN;
        let e_trc = GtElement::decode(&bytes[off..off + GT_LEN])?;
        off += GT_LEN;
        let s = Scalar::decode(&bytes[off..off + SCALAR_LEN])?;
        off += SCALAR_LEN;
        let mut s_list = Vec::with_capacity(n);
        for _ in 0..n {
            s_list.push(Scalar::decode(&bytes[off..off + SCALAR_LEN])?);
            off += SCALAR_LEN;
        }
        let mut c_list = Vec::with_capacity(n);
        for _ in 0..n {
            c_list.push(Scalar::decode(&bytes[off..off + SCALAR_LEN])?);
            off += SCALAR_LEN;
        }
        Ok((
            RingSignature {
                r_point,
                e_trc,
                s,
                s_list,
                c_list,
            },
            &bytes[need..],
        ))
    }
}

/// Ephemeral signing values exposed for white-box algebra checks in tests.
#[derive(Debug, Clone)]
pub struct SigningNonces {
    pub l1: Scalar,
    pub l2: Scalar,
    pub c: Scalar,
    pub c_pi: Scalar,
}

pub fn trc_keygen<R: RngCore + CryptoRng>(rng: &mut R) -> TrcKeyPair {
    let x_trc = Scalar::random_nonzero(rng);
    let y_trc = G1Point::generator().mul(&x_trc);
    TrcKeyPair { x_trc, y_trc }
}

/// x_i = H(x_TRC, RID_i), y_i = x_i P.
pub fn derive_vehicle_key(x_trc: &Scalar, rid: &[u8]) -> Result<VehicleKeyPair, SchemeError> {
    if rid.is_empty() {
        return Err(SchemeError::EmptyIdentity);
    }
    let mut input = Vec::with_capacity(SCALAR_LEN + 8 + rid.len());
    input.extend_from_slice(&x_trc.encode());
    input.extend_from_slice(&(rid.len() as u64).to_be_bytes());
    input.extend_from_slice(rid);
    let x = hash_to_scalar(DOMAIN_KEY_DERIVE, &input);
    let y = G1Point::generator().mul(&x);
    Ok(VehicleKeyPair { x, y })
}

fn challenge(
    ring: &Ring,
    y_trc: &G1Point,
    r_point: &G1Point,
    e_trc: &GtElement,
    commitment: &GtElement,
    a_points: &[G1Half],
    msg: &[u8],
) -> Scalar {
    let mut input = ring.encode();
    input.extend_from_slice(&y_trc.encode());
    input.extend_from_slice(&r_point.encode());
    input.extend_from_slice(&e_trc.encode());
    input.extend_from_slice(&commitment.encode());
    for a in a_points {
        input.extend_from_slice(&a.encode());
    }
    input.extend_from_slice(&(msg.len() as u64).to_be_bytes());
    input.extend_from_slice(msg);
    hash_to_scalar(DOMAIN_CHALLENGE, &input)
}

pub fn sign<R: RngCore + CryptoRng>(
    ring: &Ring,
    signer: &VehicleKeyPair,
    signer_index: usize,
    y_trc: &G1Point,
    msg: &[u8],
    rng: &mut R,
) -> Result<RingSignature, SchemeError> {
    sign_with_nonces(ring, signer, signer_index, y_trc, msg, rng).map(|(sig, _)| sig)
}

/// `sign` variant that also returns the ephemeral values, for white-box
/// algebra tests. Production callers use `sign`.
pub fn sign_with_nonces<R: RngCore + CryptoRng>(
    ring: &Ring,
    signer: &VehicleKeyPair,
    signer_index: usize,
    y_trc: &G1Point,
    msg: &[u8],
    rng: &mut R,
) -> Result<(RingSignature, SigningNonces), SchemeError> {
    let n = ring.len();
    let pi = signer_index;
    match ring.position(&signer.y) {
        None => return Err(SchemeError::SignerNotInRing),
        Some(_) if pi >= n || ring.members()[pi] != signer.y => {
            return Err(SchemeError::IndexMismatch)
        }
        Some(_) => {}
    }

    let generator = G1Point::generator();
    let r = Scalar::random_nonzero(rng);
    let l1 = Scalar::random(rng);
    let l2 = Scalar::random(rng);

    let r_point = generator.mul(&r);
    // One pairing serves both E_TRC and the SPK(1a) commitment:
    // e(y_pi, y_TRC)^r = e(P, P)^{x_pi x_TRC r} = e(R, y_TRC)^{x_pi}.
    let e0 = pairing(&r_point, y_trc);
    let e_trc = e0.pow(&signer.x);
    let commitment = e0.pow(&l1);

    let mut s_list = vec![Scalar::zero(); n];
    let mut c_list = vec![Scalar::zero(); n];
    let mut a_points = Vec::with_capacity(n);
    // Commitments a_i only ever feed the challenge hash, so the mirrored
    // halves are skipped.
    for (i, y_i) in ring.members().iter().enumerate() {
        if i == pi {
            a_points.push(generator.mul_half(&l2));
        } else {
            s_list[i] = Scalar::random(rng);
            c_list[i] = Scalar::random(rng);
            a_points.push(generator.mul_half(&s_list[i]).add(&y_i.mul_half(&c_list[i])));
        }
    }

    let c = challenge(ring, y_trc, &r_point, &e_trc, &commitment, &a_points, msg);

    let s = l1 - c * signer.x;
    let mut c_pi = c;
    for (i, c_i) in c_list.iter().enumerate() {
        if i != pi {
            c_pi -= *c_i;
        }
    }
    c_list[pi] = c_pi;
    s_list[pi] = l2 - c_pi * signer.x;

    Ok((
        RingSignature {
            r_point,
            e_trc,
            s,
            s_list,
            c_list,
        },
        SigningNonces { l1, l2, c, c_pi },
    ))
}

/// Scheme-level verification of SPK(1). Returns Ok(true) on accept,
/// Ok(false) on reject; the revocation-list intersection check is the
/// vehicle layer's job.
pub fn verify(
    ring: &Ring,
    y_trc: &G1Point,
    msg: &[u8],
    sig: &RingSignature,
) -> Result<bool, SchemeError> {
    let n = ring.len();
    if sig.s_list.len() != n || sig.c_list.len() != n {
        return Err(SchemeError::LengthMismatch);
    }
    if sig.r_point.is_identity() {
        return Ok(false);
    }

    let generator = G1Point::generator();
    let mut c_sum = Scalar::zero();
    for c_i in &sig.c_list {
        c_sum += *c_i;
    }

    let e0 = pairing(&sig.r_point, y_trc);
    let commitment = e0.pow(&sig.s).mul(&sig.e_trc.pow(&c_sum));

    let a_points: Vec<G1Half> = ring
        .members()
        .iter()
        .zip(sig.s_list.iter().zip(sig.c_list.iter()))
        .map(|(y_i, (s_i, c_i))| generator.mul_half(s_i).add(&y_i.mul_half(c_i)))
        .collect();

    let expected = challenge(
        ring,
        y_trc,
        &sig.r_point,
        &sig.e_trc,
        &commitment,
        &a_points,
        msg,
    );
    Ok(c_sum == expected)
}

/// OBU fast tracing: find the unique i with E_TRC = e(y_i, R)^{x_TRC}.
/// Re-verifies the signature first. Returns the 0-based ring index.
pub fn trace(
    sig: &RingSignature,
    ring: &Ring,
    x_trc: &Scalar,
    msg: &[u8],
) -> Result<usize, SchemeError> {
    let y_trc = G1Point::generator().mul(x_trc);
    if !verify(ring, &y_trc, msg, sig)? {
        return Err(SchemeError::InvalidSignature);
    }
    for (i, y_i) in ring.members().iter().enumerate() {
        if pairing(y_i, &sig.r_point).pow(x_trc) == sig.e_trc {
            return Ok(i);
        }
    }
    Err(SchemeError::NoSignerFound)
}
