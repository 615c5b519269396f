//! Bilinear group substrate with a symmetric-pairing interface.
//!
//! The protocol algebra assumes a symmetric pairing e: G1 x G1 -> G2 over
//! groups of prime order q. BLS12-381 only offers the asymmetric
//! e: G1 x G2 -> GT, so every protocol point carries its mirror in both
//! source groups (same discrete log against the two fixed generators).
//! `pairing(a, b)` then maps to e(a.g1, b.g2), which is symmetric on the
//! span of the generators: e(aP, bP^) = e(P, P^)^{ab} = e(bP, aP^).
//!
//! Canonical encodings are fixed-length and strict: decoding re-encodes and
//! compares, so any sloppy-but-parseable byte string is rejected. A decoded
//! point additionally has its two halves checked for discrete-log
//! consistency with one pairing comparison.

use ark_bls12_381::{Bls12_381, Fr, G1Affine, G1Projective, G2Affine, G2Projective};
use ark_ec::pairing::{Pairing, PairingOutput};
use ark_ec::{AffineRepr, CurveGroup, Group};
use ark_ff::{BigInteger, PrimeField, Zero};
use ark_serialize::{CanonicalDeserialize, CanonicalSerialize};
use ark_std::UniformRand;
use rand::{CryptoRng, RngCore};
use sha2::{Digest, Sha256};
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

/// Byte length of a canonical scalar encoding (big-endian, fixed width).
pub const SCALAR_LEN: usize = 32;
/// Byte length of a canonical point encoding: compressed G1 mirror (48)
/// followed by compressed G2 mirror (96).
pub const G1_LEN: usize = 144;
/// Byte length of a canonical GT element encoding.
pub const GT_LEN: usize = 576;

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("wrong encoding length: expected {expected}, got {got}")]
    WrongLength { expected: usize, got: usize },
    #[error("non-canonical encoding")]
    NonCanonicalEncoding,
    #[error("element not in the prime-order subgroup")]
    NotInSubgroup,
    #[error("invalid group element")]
    InvalidElement,
}

/// Scalar in Z_q, q the order of the pairing groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Scalar(pub(crate) Fr);

impl Scalar {
    pub fn zero() -> Self {
        Scalar(Fr::zero())
    }

    pub fn one() -> Self {
        Scalar(Fr::from(1u64))
    }

    pub fn from_u64(v: u64) -> Self {
        Scalar(Fr::from(v))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    /// Uniform scalar in [0, q).
    pub fn random<R: RngCore + CryptoRng>(rng: &mut R) -> Self {
        Scalar(Fr::rand(rng))
    }

    /// Uniform nonzero scalar in [1, q).
    pub fn random_nonzero<R: RngCore + CryptoRng>(rng: &mut R) -> Self {
        loop {
            let s = Self::random(rng);
            if !s.is_zero() {
                return s;
            }
        }
    }

    pub fn encode(&self) -> [u8; SCALAR_LEN] {
        let bytes = self.0.into_bigint().to_bytes_be();
        let mut out = [0u8; SCALAR_LEN];
        out[SCALAR_LEN - bytes.len()..].copy_from_slice(&bytes);
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, GroupError> {
        if bytes.len() != SCALAR_LEN {
            return Err(GroupError::WrongLength {
                expected: SCALAR_LEN,
                got: bytes.len(),
            });
        }
        let reduced = Fr::from_be_bytes_mod_order(bytes);
        let s = Scalar(reduced);
        // Reject values >= q: reduction must be the identity.
        if s.encode() != bytes {
            return Err(GroupError::NonCanonicalEncoding);
        }
        Ok(s)
    }
}

impl Add for Scalar {
    type Output = Scalar;
    fn add(self, rhs: Scalar) -> Scalar {
        Scalar(self.0 + rhs.0)
    }
}

impl AddAssign for Scalar {
    fn add_assign(&mut self, rhs: Scalar) {
        self.0 += rhs.0;
    }
}

impl Sub for Scalar {
    type Output = Scalar;
    fn sub(self, rhs: Scalar) -> Scalar {
        Scalar(self.0 - rhs.0)
    }
}

impl SubAssign for Scalar {
    fn sub_assign(&mut self, rhs: Scalar) {
        self.0 -= rhs.0;
    }
}

impl Mul for Scalar {
    type Output = Scalar;
    fn mul(self, rhs: Scalar) -> Scalar {
        Scalar(self.0 * rhs.0)
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar(-self.0)
    }
}

/// Point of the symmetric group G1 as exposed to the protocol: the same
/// discrete log mirrored over both source groups of the underlying
/// asymmetric pairing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct G1Point {
    pub(crate) g1: G1Affine,
    pub(crate) g2: G2Affine,
}

impl G1Point {
    /// The fixed generator P.
    pub fn generator() -> Self {
        G1Point {
            g1: G1Affine::generator(),
            g2: G2Affine::generator(),
        }
    }

    pub fn identity() -> Self {
        G1Point {
            g1: G1Affine::identity(),
            g2: G2Affine::identity(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.g1.is_zero()
    }

    /// k * self. Counts as one point multiplication.
    pub fn mul(&self, k: &Scalar) -> G1Point {
        ops::bump_g1_muls(1);
        G1Point {
            g1: (self.g1 * k.0).into_affine(),
            g2: (self.g2 * k.0).into_affine(),
        }
    }

    pub fn add(&self, other: &G1Point) -> G1Point {
        G1Point {
            g1: (G1Projective::from(self.g1) + other.g1).into_affine(),
            g2: (G2Projective::from(self.g2) + other.g2).into_affine(),
        }
    }

    pub fn encode(&self) -> [u8; G1_LEN] {
        let mut out = [0u8; G1_LEN];
        self.g1
            .serialize_compressed(&mut out[..48])
            .expect("fixed-size buffer");
        self.g2
            .serialize_compressed(&mut out[48..])
            .expect("fixed-size buffer");
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, GroupError> {
        if bytes.len() != G1_LEN {
            return Err(GroupError::WrongLength {
                expected: G1_LEN,
                got: bytes.len(),
            });
        }
        let g1 = G1Affine::deserialize_compressed(&bytes[..48])
            .map_err(|_| GroupError::NotInSubgroup)?;
        let g2 = G2Affine::deserialize_compressed(&bytes[48..])
            .map_err(|_| GroupError::NotInSubgroup)?;
        let p = G1Point { g1, g2 };
        if p.encode().as_slice() != bytes {
            return Err(GroupError::NonCanonicalEncoding);
        }
        // The two mirrors must share a discrete log against the generators.
        let lhs = Bls12_381::pairing(g1, G2Affine::generator());
        let rhs = Bls12_381::pairing(G1Affine::generator(), g2);
        if lhs != rhs {
            return Err(GroupError::NonCanonicalEncoding);
        }
        Ok(p)
    }
}

/// Unmirrored half of a symmetric-group point. Commitments that are only
/// ever hashed (never paired or transmitted) are recomputed locally by
/// both sides, so maintaining the mirror for them would be pure overhead.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct G1Half(pub(crate) G1Affine);

impl G1Half {
    pub fn add(&self, other: &G1Half) -> G1Half {
        G1Half((G1Projective::from(self.0) + other.0).into_affine())
    }

    pub fn encode(&self) -> [u8; 48] {
        let mut out = [0u8; 48];
        self.0
            .serialize_compressed(&mut out[..])
            .expect("fixed-size buffer");
        out
    }
}

impl G1Point {
    /// k * self restricted to the unmirrored half. Still one point
    /// multiplication in the operation ledger.
    pub fn mul_half(&self, k: &Scalar) -> G1Half {
        ops::bump_g1_muls(1);
        G1Half((self.g1 * k.0).into_affine())
    }
}

/// Element of the pairing target group G2 (GT of the underlying curve).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GtElement(pub(crate) PairingOutput<Bls12_381>);

impl GtElement {
    pub fn one() -> Self {
        GtElement(PairingOutput::<Bls12_381>::zero())
    }

    pub fn is_one(&self) -> bool {
        self.0.is_zero()
    }

    /// self^k. Counts as one GT exponentiation. Goes through the group
    /// API so squarings take the cyclotomic fast path.
    pub fn pow(&self, k: &Scalar) -> GtElement {
        ops::bump_gt_exps(1);
        GtElement(self.0.mul_bigint(k.0.into_bigint()))
    }

    pub fn mul(&self, other: &GtElement) -> GtElement {
        GtElement(self.0 + other.0)
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(GT_LEN);
        self.0
            .serialize_compressed(&mut out)
            .expect("vec write cannot fail");
        debug_assert_eq!(out.len(), GT_LEN);
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, GroupError> {
        if bytes.len() != GT_LEN {
            return Err(GroupError::WrongLength {
                expected: GT_LEN,
                got: bytes.len(),
            });
        }
        let e = PairingOutput::<Bls12_381>::deserialize_compressed(bytes)
            .map_err(|_| GroupError::NotInSubgroup)?;
        let g = GtElement(e);
        if g.encode() != bytes {
            return Err(GroupError::NonCanonicalEncoding);
        }
        Ok(g)
    }
}

/// e(a, b) under the symmetric interface. Counts as one pairing.
pub fn pairing(a: &G1Point, b: &G1Point) -> GtElement {
    ops::bump_pairings(1);
    GtElement(Bls12_381::pairing(a.g1, b.g2))
}

/// Domain-separated hash to Z_q: SHA-256(tag || len(input) as u64 BE || input),
/// digest interpreted big-endian and reduced mod q.
pub fn hash_to_scalar(domain_tag: &[u8], input: &[u8]) -> Scalar {
    ops::bump_hashes(1);
    let mut h = Sha256::new();
    h.update(domain_tag);
    h.update((input.len() as u64).to_be_bytes());
    h.update(input);
    Scalar(Fr::from_be_bytes_mod_order(&h.finalize()))
}

/// Public parameters of the group provider.
#[derive(Debug, Clone)]
pub struct GroupParams {
    /// Big-endian bytes of the prime group order q.
    pub q_be: [u8; SCALAR_LEN],
    pub generator: G1Point,
    pub enc_len_g1: usize,
    pub enc_len_gt: usize,
    pub enc_len_scalar: usize,
}

impl GroupParams {
    pub fn standard() -> Self {
        let mut q_be = [0u8; SCALAR_LEN];
        let bytes = Fr::MODULUS.to_bytes_be();
        q_be[SCALAR_LEN - bytes.len()..].copy_from_slice(&bytes);
        GroupParams {
            q_be,
            generator: G1Point::generator(),
            enc_len_g1: G1_LEN,
            enc_len_gt: GT_LEN,
            enc_len_scalar: SCALAR_LEN,
        }
    }
}

/// Operation counters for the cost audits. Counts abstract symmetric-group
/// operations; a point multiplication updates both mirrors under the hood
/// but is ledgered as one multiplication.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OpCounter {
    pub n_pairings: u64,
    pub n_g1_muls: u64,
    pub n_gt_exps: u64,
    pub n_hashes: u64,
}

pub mod ops {
    //! Thread-local operation accounting. Each counting scope is confined
    //! to one thread.

    use super::OpCounter;
    use std::cell::Cell;

    thread_local! {
        static PAIRINGS: Cell<u64> = const { Cell::new(0) };
        static G1_MULS: Cell<u64> = const { Cell::new(0) };
        static GT_EXPS: Cell<u64> = const { Cell::new(0) };
        static HASHES: Cell<u64> = const { Cell::new(0) };
    }

    pub(super) fn bump_pairings(k: u64) {
        PAIRINGS.with(|c| c.set(c.get() + k));
    }
    pub(super) fn bump_g1_muls(k: u64) {
        G1_MULS.with(|c| c.set(c.get() + k));
    }
    pub(super) fn bump_gt_exps(k: u64) {
        GT_EXPS.with(|c| c.set(c.get() + k));
    }
    pub(super) fn bump_hashes(k: u64) {
        HASHES.with(|c| c.set(c.get() + k));
    }

    /// Reset all counters on the current thread.
    pub fn reset() {
        PAIRINGS.with(|c| c.set(0));
        G1_MULS.with(|c| c.set(0));
        GT_EXPS.with(|c| c.set(0));
        HASHES.with(|c| c.set(0));
    }

    /// Snapshot of the current thread's counters.
    pub fn snapshot() -> OpCounter {
        OpCounter {
            n_pairings: PAIRINGS.with(|c| c.get()),
            n_g1_muls: G1_MULS.with(|c| c.get()),
            n_gt_exps: GT_EXPS.with(|c| c.get()),
            n_hashes: HASHES.with(|c| c.get()),
        }
    }

    /// Run `f` in a fresh counting scope and report the operations it used.
    /// The surrounding scope's counts are restored on exit.
    pub fn counted<T>(f: impl FnOnce() -> T) -> (T, OpCounter) {
        let before = snapshot();
        reset();
        let out = f();
        let used = snapshot();
        reset();
        bump_pairings(before.n_pairings + used.n_pairings);
        bump_g1_muls(before.n_g1_muls + used.n_g1_muls);
        bump_gt_exps(before.n_gt_exps + used.n_gt_exps);
        bump_hashes(before.n_hashes + used.n_hashes);
        (out, used)
    }
}
