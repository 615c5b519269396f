//! Revocable ring signatures over bilinear pairings, and the conditional
//! privacy protocol for vehicular networks built on them: a tracing
//! authority (TRC), OBU-side message logic, a deterministic network
//! simulation, and the comparative cost models.

pub mod analysis;
pub mod authority;
pub mod group;
pub mod scheme;
pub mod sim;
pub mod vehicle;

pub use group::{pairing, G1Point, GroupError, GroupParams, GtElement, OpCounter, Scalar};
pub use scheme::{
    derive_vehicle_key, sign, trace, trc_keygen, verify, Ring, RingSignature, SchemeError,
    TrcKeyPair, VehicleKeyPair,
};
