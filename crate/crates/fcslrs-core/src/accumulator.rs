//! Collision-resistant accumulator with one-way domain.
//!
//! The accumulator family is exponentiation modulo a rigid integer:
//! `f : QR(N) × Z_{N/4} → QR(N)`, `f(u, x) = u^x mod N`, which is
//! quasi-commutative: `f(f(u, x1), x2) = f(f(u, x2), x1)`. A set of public
//! keys accumulates to `v = f(u, {y_1, …, y_n})`; the membership witness for
//! `y_e` is the accumulation of every key except `y_e`, so that
//! `f(w_e, y_e) = v`.
//!
//! The one-way domain consists of primes of the form `x = 2·e1·e2 + 1` for
//! distinct primes `(e1, e2)`; [`check_domain_relation`] decides that
//! relation. Sphere membership of public keys is a statement of the domain
//! definition, not an operational precondition: honest keys sampled per the
//! scheme's key generation land outside `S(2^l, 2^mu)` for any parameter set
//! satisfying `l/2 > mu + 1`, so accumulation enforces primality and the
//! `Z_{N/4}` range, and full sphere strictness lives only in the relation
//! check under [`ParamMode::Secure`].

use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigUint;
use num_traits::One;
use rand::Rng;

use crate::arith::{self, ParamMode, Sphere};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AccumulatorError {
    /// Value lies outside `Z_{N/4}` or outside `[1, N)`.
    OutOfDomain(&'static str),
    /// Accumulated values must be prime.
    NotPrime,
    /// The same public key appears twice in an accumulation request.
    DuplicateMember,
    /// Witness requested for a key that is not in the ring.
    NotAMember,
}

impl fmt::Display for AccumulatorError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AccumulatorError::OutOfDomain(what) => write!(f, "value out of domain: {what}"),
            AccumulatorError::NotPrime => write!(f, "accumulator domain values must be prime"),
            AccumulatorError::DuplicateMember => write!(f, "duplicate member in accumulation"),
            AccumulatorError::NotAMember => write!(f, "subject key is not a ring member"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for AccumulatorError {}

/// Public accumulator parameters: the modulus, the base `u ∈ QR(N)` and the
/// two spheres of the one-way domain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AccumulatorParams {
    modulus: BigUint,
    base: BigUint,
    key_sphere: Sphere,
    half_sphere: Sphere,
    mode: ParamMode,
}

impl AccumulatorParams {
    /// `key_sphere = S(2^l, 2^mu)`, `half_sphere = S(2^(l/2), 2^mu)`.
    pub fn new(
        modulus: BigUint,
        base: BigUint,
        l: u32,
        mu: u32,
        mode: ParamMode,
    ) -> Result<Self, AccumulatorError> {
        if l % 2 != 0 {
            return Err(AccumulatorError::OutOfDomain("sphere parameter l must be even"));
        }
        let key_sphere =
            Sphere::new(l, mu).map_err(|_| AccumulatorError::OutOfDomain("key sphere"))?;
        let half_sphere =
            Sphere::new(l / 2, mu).map_err(|_| AccumulatorError::OutOfDomain("half sphere"))?;
        if base.is_one() || base >= modulus {
            return Err(AccumulatorError::OutOfDomain("accumulator base"));
        }
        Ok(AccumulatorParams { modulus, base, key_sphere, half_sphere, mode })
    }

    pub fn modulus(&self) -> &BigUint {
        &self.modulus
    }

    pub fn base(&self) -> &BigUint {
        &self.base
    }

    pub fn key_sphere(&self) -> &Sphere {
        &self.key_sphere
    }

    pub fn half_sphere(&self) -> &Sphere {
        &self.half_sphere
    }

    pub fn mode(&self) -> ParamMode {
        self.mode
    }

    /// `x ∈ Z_{N/4}`, i.e. `4x < N`.
    pub fn in_exponent_domain(&self, x: &BigUint) -> bool {
        (x << 2u32) < self.modulus
    }
}

/// Result of accumulating a set of public keys.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AccumulatedValue {
    v: BigUint,
    member_count: usize,
}

impl AccumulatedValue {
    pub fn from_parts(v: BigUint, member_count: usize) -> Self {
        AccumulatedValue { v, member_count }
    }

    pub fn value(&self) -> &BigUint {
        &self.v
    }

    pub fn member_count(&self) -> usize {
        self.member_count
    }
}

/// Membership witness: the accumulation of every ring key except the subject.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    w: BigUint,
    subject_pk: BigUint,
}

impl Witness {
    pub fn from_parts(w: BigUint, subject_pk: BigUint) -> Self {
        Witness { w, subject_pk }
    }

    pub fn value(&self) -> &BigUint {
        &self.w
    }

    pub fn subject_pk(&self) -> &BigUint {
        &self.subject_pk
    }

    /// `f(w, y) = v` — the membership relation this witness must satisfy.
    pub fn verifies(&self, params: &AccumulatorParams, v: &AccumulatedValue) -> bool {
        arith::mod_exp(&self.w, &self.subject_pk, params.modulus()) == *v.value()
    }
}

/// One accumulator step `f(base, x) = base^x mod N`, with the domain checks.
pub fn acc_eval(
    params: &AccumulatorParams,
    base: &BigUint,
    x: &BigUint,
) -> Result<BigUint, AccumulatorError> {
    if base < &BigUint::one() || base >= &params.modulus {
        return Err(AccumulatorError::OutOfDomain("base outside [1, N)"));
    }
    if !params.in_exponent_domain(x) {
        return Err(AccumulatorError::OutOfDomain("exponent outside Z_{N/4}"));
    }
    Ok(arith::mod_exp(base, x, &params.modulus))
}

fn check_member(params: &AccumulatorParams, pk: &BigUint) -> Result<(), AccumulatorError> {
    if !params.in_exponent_domain(pk) {
        return Err(AccumulatorError::OutOfDomain("public key outside Z_{N/4}"));
    }
    if !arith::is_prime_fixed_bases(pk) {
        return Err(AccumulatorError::NotPrime);
    }
    Ok(())
}

/// Sequential accumulation of `pks` starting from the base `u`. The empty
/// list accumulates to `u` itself; duplicates are rejected.
pub fn accumulate(
    params: &AccumulatorParams,
    pks: &[BigUint],
) -> Result<AccumulatedValue, AccumulatorError> {
    let mut sorted: Vec<&BigUint> = pks.iter().collect();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(AccumulatorError::DuplicateMember);
    }
    let mut v = params.base.clone();
    for pk in pks {
        check_member(params, pk)?;
        v = arith::mod_exp(&v, pk, &params.modulus);
    }
    Ok(AccumulatedValue { v, member_count: pks.len() })
}

/// Witness for `subject_pk` against the ring `pks`: accumulation of every
/// other key, so that `f(w, subject_pk)` reproduces the accumulated value.
pub fn gen_witness(
    params: &AccumulatorParams,
    pks: &[BigUint],
    subject_pk: &BigUint,
) -> Result<Witness, AccumulatorError> {
    if !pks.iter().any(|pk| pk == subject_pk) {
        return Err(AccumulatorError::NotAMember);
    }
    let rest: Vec<BigUint> = pks.iter().filter(|pk| *pk != subject_pk).cloned().collect();
    let acc = accumulate(params, &rest)?;
    Ok(Witness { w: acc.v, subject_pk: subject_pk.clone() })
}

/// Decides the one-way domain relation `pk = 2·e1·e2 + 1` for distinct primes
/// `(e1, e2)`. Under [`ParamMode::Secure`] the sphere clauses of the domain
/// are also enforced: `e2 ∈ S(2^(l/2), 2^mu)` and `pk ∈ S(2^l, 2^mu)`; toy
/// mode checks the arithmetic and primality only.
pub fn check_domain_relation<R: Rng>(
    params: &AccumulatorParams,
    pk: &BigUint,
    e1: &BigUint,
    e2: &BigUint,
    rounds: u32,
    rng: &mut R,
) -> bool {
    let two = BigUint::from(2u32);
    if *pk != &two * e1 * e2 + BigUint::one() {
        return false;
    }
    if e1 == e2 {
        return false;
    }
    if !arith::is_probable_prime(pk, rounds, rng)
        || !arith::is_probable_prime(e1, rounds, rng)
        || !arith::is_probable_prime(e2, rounds, rng)
    {
        return false;
    }
    if params.mode.is_secure() {
        if !params.half_sphere.contains(e2) {
            return false;
        }
        if !params.key_sphere.contains(pk) {
            return false;
        }
    }
    true
}
