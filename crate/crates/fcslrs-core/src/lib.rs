//! Constant-sized linkable ring signature (FCsLRS) over an RSA accumulator,
//! plus the threshold endorsement machinery built on top of it.
//!
//! The crate is organised bottom-up:
//!
//! - [`arith`] — safe primes, rigid moduli, sphere sampling, QR(N) generators,
//!   modular exponentiation. Everything above is built from these.
//! - [`accumulator`] — the collision-resistant accumulator with one-way domain:
//!   `f(u, x) = u^x mod N`, bulk accumulation, membership witnesses.
//! - [`scheme`] — the signature scheme proper: trusted setup, key generation,
//!   transaction tags, signing, verification and linking.
//! - [`endorsement`] — t-out-of-n endorsement policy evaluation and an
//!   in-memory simulation of the propose / endorse / validate / order flow.
//! - [`codec`] — bit-exact wire encodings for every record kind.
//! - [`keydb`] — the public-key database (enrollment flags, revocation).
//!
//! The crate is `no_std` + `alloc`; file I/O, the CLI and the benchmark
//! harness live in the companion `fcslrs-cli` crate. All randomized
//! operations take an injected `rand::Rng` so runs are reproducible.

#![cfg_attr(not(any(test, feature = "std")), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod accumulator;
pub mod arith;
pub mod codec;
pub mod endorsement;
pub mod keydb;
pub mod scheme;

pub use arith::ParamMode;
pub use scheme::{EndorserKeyPair, RingSignature, SystemParams, Tag};
