//! The constant-sized linkable ring signature scheme: trusted setup, key
//! generation, transaction-scoped tags, signing, verification and linking.
//!
//! A signature is a Fiat–Shamir-transformed sigma protocol proving, against
//! an accumulated ring value `v`, knowledge of `(w, x, e1, e2)` with
//!
//! ```text
//! w^x = v (mod N)   ∧   x = 2·e1·e2 + 1   ∧   tag = g_tid^(e1 + e2)
//! ```
//!
//! without revealing which ring key `x` is. The transcript carries five
//! public values `T1..T5` binding the witness components, nine commitments
//! `u1..u9`, five integer responses and the tag. Linkability is
//! *transaction-oriented*: the base `g_tid = g^H(tid)` is derived from the
//! transaction id, so the deterministic tag `g_tid^(e1+e2)` collides exactly
//! when the same key signs the same transaction twice, and never across
//! distinct transactions.
//!
//! Signature size depends only on the modulus size: the serialized form is
//! fifteen group elements, three single-width and two double-width integer
//! responses, independent of the ring size. Neither signing nor verification
//! reads the ring member list; the ring enters only through `v` and the
//! signer's witness.

use alloc::vec::Vec;
use core::fmt;

use num_bigint::{BigUint, RandBigInt};
use num_traits::One;
use rand::Rng;
use sha3::digest::{ExtendableOutput, Update, XofReader};
use sha3::Shake128;

use crate::accumulator::{AccumulatedValue, AccumulatorError, AccumulatorParams, Witness};
use crate::arith::{self, ArithError, ParamMode};

/// Default bound slack for the single-width responses: honest values stay
/// below `2^(lambda + 129)` because the challenge is 128 bits.
pub const DEFAULT_SLACK_SINGLE: u32 = 129;
/// Default bound slack for the two double-width responses, which carry an
/// extra factor `r < N/4`: honest values stay below `2^(2·lambda + 130)`.
pub const DEFAULT_SLACK_DOUBLE: u32 = 130;

/// Challenge / derivation hash: 128-bit digests from the SHA-3 family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HashId {
    /// SHAKE128 with a 16-byte output.
    Shake128,
}

impl HashId {
    pub fn code(self) -> u8 {
        match self {
            HashId::Shake128 => 1,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            1 => Some(HashId::Shake128),
            _ => None,
        }
    }

    /// 128-bit digest of the concatenation of `parts`.
    pub fn digest128(self, parts: &[&[u8]]) -> [u8; 16] {
        match self {
            HashId::Shake128 => {
                let mut h = Shake128::default();
                for part in parts {
                    h.update(part);
                }
                let mut out = [0u8; 16];
                h.finalize_xof().read(&mut out);
                out
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SchemeError {
    InvalidParameters(&'static str),
    Arith(ArithError),
    Accumulator(AccumulatorError),
    /// Witness does not open the accumulated value for the signer's key.
    InvalidWitness(&'static str),
    EmptyTransactionId,
    /// `g_tid` degenerated to the identity.
    DegenerateContext,
    KeygenFailure,
}

impl fmt::Display for SchemeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SchemeError::InvalidParameters(what) => write!(f, "invalid parameters: {what}"),
            SchemeError::Arith(e) => write!(f, "{e}"),
            SchemeError::Accumulator(e) => write!(f, "{e}"),
            SchemeError::InvalidWitness(what) => write!(f, "invalid witness: {what}"),
            SchemeError::EmptyTransactionId => write!(f, "transaction id must be non-empty"),
            SchemeError::DegenerateContext => write!(f, "degenerate transaction context"),
            SchemeError::KeygenFailure => write!(f, "key generation exceeded its iteration cap"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for SchemeError {}

impl From<ArithError> for SchemeError {
    fn from(e: ArithError) -> Self {
        SchemeError::Arith(e)
    }
}

impl From<AccumulatorError> for SchemeError {
    fn from(e: AccumulatorError) -> Self {
        SchemeError::Accumulator(e)
    }
}

/// The six public generators derived from the accumulator base at setup.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Generators {
    pub g: BigUint,
    pub h: BigUint,
    pub t: BigUint,
    pub y: BigUint,
    pub s: BigUint,
    pub zeta: BigUint,
}

impl Generators {
    fn iter(&self) -> impl Iterator<Item = &BigUint> {
        [&self.g, &self.h, &self.t, &self.y, &self.s, &self.zeta].into_iter()
    }
}

/// Trusted-setup output: the public modulus, the accumulator base, six
/// generators of `QR(N)`, the security triple `(lambda, l, mu)` and the
/// challenge-hash identifier. The factorization and the discrete logs
/// relating the generators are destroyed at setup and never stored here.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystemParams {
    lambda: u32,
    l: u32,
    mu: u32,
    acc: AccumulatorParams,
    gens: Generators,
    hash: HashId,
    slack_single: u32,
    slack_double: u32,
}

impl SystemParams {
    /// Assembles parameters from raw fields, validating ranges, pairwise
    /// distinctness of the seven group elements and — in secure mode — the
    /// size constraints `lambda > l − 2` and `l/2 > mu + 1`.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        lambda: u32,
        l: u32,
        mu: u32,
        mode: ParamMode,
        hash: HashId,
        slack_single: u32,
        slack_double: u32,
        modulus: BigUint,
        base: BigUint,
        gens: Generators,
    ) -> Result<Self, SchemeError> {
        if lambda < 8 {
            return Err(SchemeError::InvalidParameters("modulus size must be at least 8 bits"));
        }
        if l < 4 || l % 2 != 0 {
            return Err(SchemeError::InvalidParameters("l must be even and at least 4"));
        }
        if modulus.bits() > lambda as u64 || modulus.bits() < 3 {
            return Err(SchemeError::InvalidParameters("modulus does not match lambda"));
        }
        if mode.is_secure() {
            if lambda < 1024 {
                return Err(SchemeError::InvalidParameters(
                    "secure mode requires a modulus of at least 1024 bits",
                ));
            }
            if lambda + 2 <= l {
                return Err(SchemeError::InvalidParameters("secure mode requires lambda > l - 2"));
            }
            if l / 2 <= mu + 1 {
                return Err(SchemeError::InvalidParameters("secure mode requires l/2 > mu + 1"));
            }
        }
        if slack_single == 0 || slack_single > 4096 || slack_double == 0 || slack_double > 4096 {
            return Err(SchemeError::InvalidParameters("response slack out of range"));
        }
        let acc = AccumulatorParams::new(modulus, base, l, mu, mode)
            .map_err(SchemeError::Accumulator)?;
        let one = BigUint::one();
        let elements: Vec<&BigUint> = core::iter::once(acc.base()).chain(gens.iter()).collect();
        for (i, e) in elements.iter().enumerate() {
            if **e <= one || **e >= *acc.modulus() {
                return Err(SchemeError::InvalidParameters("group element outside (1, N)"));
            }
            if elements[..i].iter().any(|prev| prev == e) {
                return Err(SchemeError::InvalidParameters("group elements must differ pairwise"));
            }
        }
        Ok(SystemParams { lambda, l, mu, acc, gens, hash, slack_single, slack_double })
    }

    pub fn lambda(&self) -> u32 {
        self.lambda
    }

    pub fn l(&self) -> u32 {
        self.l
    }

    pub fn mu(&self) -> u32 {
        self.mu
    }

    pub fn mode(&self) -> ParamMode {
        self.acc.mode()
    }

    pub fn hash(&self) -> HashId {
        self.hash
    }

    pub fn modulus(&self) -> &BigUint {
        self.acc.modulus()
    }

    pub fn base(&self) -> &BigUint {
        self.acc.base()
    }

    pub fn generators(&self) -> &Generators {
        &self.gens
    }

    pub fn accumulator(&self) -> &AccumulatorParams {
        &self.acc
    }

    pub fn slack_single(&self) -> u32 {
        self.slack_single
    }

    pub fn slack_double(&self) -> u32 {
        self.slack_double
    }

    /// Canonical byte width of one group element: `ceil(lambda / 8)`.
    pub fn element_width(&self) -> usize {
        element_width_bytes(self.lambda)
    }

    /// Verifier bound `2^(lambda + slack_single)` on the single-width
    /// responses.
    pub fn single_response_bound(&self) -> BigUint {
        BigUint::one() << (self.lambda + self.slack_single)
    }

    /// Verifier bound `2^(2·lambda + slack_double)` on the double-width
    /// responses.
    pub fn double_response_bound(&self) -> BigUint {
        BigUint::one() << (2 * self.lambda + self.slack_double)
    }
}

pub fn element_width_bytes(lambda: u32) -> usize {
    lambda.div_ceil(8) as usize
}

pub fn single_response_width_bytes(lambda: u32, slack_single: u32) -> usize {
    (lambda + slack_single).div_ceil(8) as usize
}

pub fn double_response_width_bytes(lambda: u32, slack_double: u32) -> usize {
    (2 * lambda + slack_double).div_ceil(8) as usize
}

/// Conventional dimensioning `(l, mu) = (lambda/2, lambda/4 − 2)`, which
/// satisfies both secure-mode inequalities for every `lambda ≥ 16` divisible
/// by four.
pub fn standard_dimensions(lambda: u32) -> Result<(u32, u32), SchemeError> {
    if lambda < 16 || lambda % 4 != 0 {
        return Err(SchemeError::InvalidParameters(
            "standard dimensioning needs lambda >= 16, divisible by 4",
        ));
    }
    Ok((lambda / 2, lambda / 4 - 2))
}

/// Trusted setup: generates a rigid modulus, finds a `QR(N)` generator `u`
/// via the gcd criterion, derives the six public generators as `u^{rd_i}`
/// for random `rd_i ∈ [2, p'q' − 1]`, then discards the factorization and
/// the derivation exponents.
pub fn init<R: Rng>(
    lambda: u32,
    l: u32,
    mu: u32,
    mode: ParamMode,
    rng: &mut R,
) -> Result<SystemParams, SchemeError> {
    validate_dimensions(lambda, l, mu, mode)?;
    let modulus = arith::gen_rigid_modulus(lambda, arith::DEFAULT_MR_ROUNDS, rng)?;
    init_from_modulus(lambda, l, mu, mode, modulus, rng)
}

/// Setup over a known safe-prime pair; used by tests that need fixed toy
/// moduli and by any caller that ran the prime generation out of band.
pub fn init_from_safe_primes<R: Rng>(
    p: arith::SafePrime,
    q: arith::SafePrime,
    l: u32,
    mu: u32,
    mode: ParamMode,
    rng: &mut R,
) -> Result<SystemParams, SchemeError> {
    let lambda = (p.bits() + q.bits()) as u32;
    validate_dimensions(lambda, l, mu, mode)?;
    let modulus = arith::RigidModulus::from_safe_primes(p, q)?;
    init_from_modulus(lambda, l, mu, mode, modulus, rng)
}

fn validate_dimensions(lambda: u32, l: u32, mu: u32, mode: ParamMode) -> Result<(), SchemeError> {
    if l < 4 || l % 2 != 0 || mu < 1 {
        return Err(SchemeError::InvalidParameters("need even l >= 4 and mu >= 1"));
    }
    if mode.is_secure() {
        if lambda < 1024 {
            return Err(SchemeError::InvalidParameters(
                "secure mode requires a modulus of at least 1024 bits",
            ));
        }
        if lambda + 2 <= l {
            return Err(SchemeError::InvalidParameters("secure mode requires lambda > l - 2"));
        }
        if l / 2 <= mu + 1 {
            return Err(SchemeError::InvalidParameters("secure mode requires l/2 > mu + 1"));
        }
    }
    Ok(())
}

fn init_from_modulus<R: Rng>(
    lambda: u32,
    l: u32,
    mu: u32,
    mode: ParamMode,
    modulus: arith::RigidModulus,
    rng: &mut R,
) -> Result<SystemParams, SchemeError> {
    let base = arith::find_qr_generator(&modulus, rng)?;
    let order = modulus.qr_order().ok_or(SchemeError::Arith(ArithError::TrapdoorRequired))?;
    if order <= BigUint::from(8u32) {
        return Err(SchemeError::InvalidParameters("group too small to derive six generators"));
    }
    let n = modulus.modulus().clone();
    let two = BigUint::from(2u32);
    for _ in 0..4096 {
        let mut derived: Vec<BigUint> = Vec::with_capacity(6);
        for _ in 0..6 {
            let rd = rng.gen_biguint_range(&two, &order);
            derived.push(arith::mod_exp(&base, &rd, &n));
        }
        let gens = Generators {
            g: derived[0].clone(),
            h: derived[1].clone(),
            t: derived[2].clone(),
            y: derived[3].clone(),
            s: derived[4].clone(),
            zeta: derived[5].clone(),
        };
        // from_parts re-validates distinctness; collisions just resample.
        match SystemParams::from_parts(
            lambda,
            l,
            mu,
            mode,
            HashId::Shake128,
            DEFAULT_SLACK_SINGLE,
            DEFAULT_SLACK_DOUBLE,
            n.clone(),
            base.clone(),
            gens,
        ) {
            Ok(params) => return Ok(params), // trapdoor dropped with `modulus`
            Err(SchemeError::InvalidParameters(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(SchemeError::Arith(ArithError::IterationCapExceeded("generator derivation")))
}

/// An endorser's key material: secret primes `(p, q)` and the public key
/// `y = 2·p·q + 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EndorserKeyPair {
    p: BigUint,
    q: BigUint,
    y: BigUint,
}

impl EndorserKeyPair {
    /// Validates the arithmetic identity, distinctness and primality of all
    /// three values, and that the public key is accumulable (`y ∈ Z_{N/4}`).
    pub fn from_parts<R: Rng>(
        p: BigUint,
        q: BigUint,
        params: &SystemParams,
        rounds: u32,
        rng: &mut R,
    ) -> Result<Self, SchemeError> {
        if p == q {
            return Err(SchemeError::InvalidParameters("secret primes must be distinct"));
        }
        let y = BigUint::from(2u32) * &p * &q + BigUint::one();
        if !params.acc.in_exponent_domain(&y) {
            return Err(SchemeError::InvalidParameters("public key outside Z_{N/4}"));
        }
        if !arith::is_probable_prime(&p, rounds, rng)
            || !arith::is_probable_prime(&q, rounds, rng)
            || !arith::is_probable_prime(&y, rounds, rng)
        {
            return Err(SchemeError::InvalidParameters("key components must be prime"));
        }
        Ok(EndorserKeyPair { p, q, y })
    }

    pub(crate) fn from_parts_unchecked(p: BigUint, q: BigUint, y: BigUint) -> Self {
        EndorserKeyPair { p, q, y }
    }

    pub fn secret_p(&self) -> &BigUint {
        &self.p
    }

    pub fn secret_q(&self) -> &BigUint {
        &self.q
    }

    pub fn public_key(&self) -> &BigUint {
        &self.y
    }
}

/// Key generation: samples `q` from the half sphere `S(2^(l/2), 2^mu)` and a
/// random `l/2`-bit prime `p ≠ q`, looping until `y = 2·p·q + 1` is itself
/// prime. Public keys land well outside `S(2^l, 2^mu)` for any parameter set
/// with `l/2 > mu + 1` (the sphere has width `2^(mu+1)` against a product
/// range of width `~2^l`), so that containment is not sampled for; it
/// remains a statement of the one-way-domain definition only.
pub fn keygen<R: Rng>(params: &SystemParams, rng: &mut R) -> Result<EndorserKeyPair, SchemeError> {
    keygen_with_certainty(params, arith::DEFAULT_MR_ROUNDS, rng)
}

/// [`keygen`] with a caller-chosen Miller–Rabin round count.
///
/// The search loop runs at reduced certainty; the accepted `(p, q, y)`
/// triple is re-tested at the full round count before it is returned.
pub fn keygen_with_certainty<R: Rng>(
    params: &SystemParams,
    rounds: u32,
    rng: &mut R,
) -> Result<EndorserKeyPair, SchemeError> {
    let half_l = params.l / 2;
    let search_rounds = rounds.min(2);
    let cap = 4096u64.max(512 * params.l as u64);
    for _ in 0..cap {
        let q = arith::sample_sphere_prime(params.acc.half_sphere(), search_rounds, rng)?;
        let p = arith::gen_prime(half_l, search_rounds, rng)?;
        if p == q {
            continue;
        }
        let y = BigUint::from(2u32) * &p * &q + BigUint::one();
        if !params.acc.in_exponent_domain(&y) {
            continue;
        }
        if !arith::is_probable_prime(&y, search_rounds, rng) {
            continue;
        }
        if arith::is_probable_prime(&p, rounds, rng)
            && arith::is_probable_prime(&q, rounds, rng)
            && arith::is_probable_prime(&y, rounds, rng)
        {
            return Ok(EndorserKeyPair { p, q, y });
        }
    }
    Err(SchemeError::KeygenFailure)
}

/// Per-transaction public data: the 128-bit digest of the transaction id
/// decoded as an exponent, and `g_tid = g^exponent mod N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransactionContext {
    tid: Vec<u8>,
    tx_exponent: BigUint,
    g_tid: BigUint,
}

impl TransactionContext {
    /// Rebuilds a context from an explicit exponent (test pinning).
    pub fn from_exponent(
        params: &SystemParams,
        tid: &[u8],
        tx_exponent: BigUint,
    ) -> Result<Self, SchemeError> {
        if tid.is_empty() {
            return Err(SchemeError::EmptyTransactionId);
        }
        let g_tid = arith::mod_exp(&params.gens.g, &tx_exponent, params.modulus());
        if g_tid.is_one() {
            return Err(SchemeError::DegenerateContext);
        }
        Ok(TransactionContext { tid: tid.to_vec(), tx_exponent, g_tid })
    }

    pub fn tid(&self) -> &[u8] {
        &self.tid
    }

    pub fn tx_exponent(&self) -> &BigUint {
        &self.tx_exponent
    }

    pub fn g_tid(&self) -> &BigUint {
        &self.g_tid
    }
}

/// Derives the transaction-scoped base `g_tid = g^H(tid) mod N`.
pub fn derive_gtid(params: &SystemParams, tid: &[u8]) -> Result<TransactionContext, SchemeError> {
    if tid.is_empty() {
        return Err(SchemeError::EmptyTransactionId);
    }
    let digest = params.hash.digest128(&[tid]);
    let tx_exponent = BigUint::from_bytes_be(&digest);
    if params.mode().is_secure() && !params.acc.in_exponent_domain(&tx_exponent) {
        // Cannot happen for lambda >= 1024 (the digest is 128 bits < N/4).
        return Err(SchemeError::DegenerateContext);
    }
    TransactionContext::from_exponent(params, tid, tx_exponent)
}

/// The linkability tag `g_tid^(p + q) mod N`, deterministic per
/// (signer, transaction).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tag(BigUint);

impl Tag {
    pub fn from_value(value: BigUint) -> Self {
        Tag(value)
    }

    pub fn value(&self) -> &BigUint {
        &self.0
    }
}

pub fn gen_tag(params: &SystemParams, ctx: &TransactionContext, key: &EndorserKeyPair) -> Tag {
    let sum = &key.p + &key.q;
    Tag(arith::mod_exp(&ctx.g_tid, &sum, params.modulus()))
}

/// The transmitted proof: five public values, nine commitments, five integer
/// responses and the tag. Serialized length is a function of the modulus
/// size only.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RingSignature {
    /// `T1..T5` — public values binding `r`, the key, its factors and the
    /// witness.
    pub t_vals: [BigUint; 5],
    /// `u1..u9` — the sigma-protocol commitments the challenge is bound to.
    pub u_vals: [BigUint; 9],
    /// `α̃1..α̃5` — responses computed over the integers; indexes 2 and 4 are
    /// double-width.
    pub responses: [BigUint; 5],
    pub tag: Tag,
}

/// Challenge `c = H(m ‖ u1 ‖ … ‖ u9)`, each commitment encoded big-endian in
/// exactly `ceil(lambda/8)` bytes.
pub fn challenge(params: &SystemParams, message: &[u8], u_vals: &[BigUint; 9]) -> BigUint {
    let width = params.element_width();
    let mut parts: Vec<Vec<u8>> = Vec::with_capacity(10);
    parts.push(message.to_vec());
    for u in u_vals {
        parts.push(pad_be(u, width));
    }
    let refs: Vec<&[u8]> = parts.iter().map(|p| p.as_slice()).collect();
    BigUint::from_bytes_be(&params.hash.digest128(&refs))
}

fn pad_be(value: &BigUint, width: usize) -> Vec<u8> {
    let bytes = value.to_bytes_be();
    debug_assert!(bytes.len() <= width);
    let mut out = alloc::vec![0u8; width];
    let start = width - bytes.len();
    out[start..].copy_from_slice(&bytes);
    out
}

/// Produces a ring signature on `message` for transaction `tid`.
///
/// Touches only the accumulated value, the signer's witness and key pair —
/// never the ring member list — so cost is independent of the ring size.
pub fn sign<R: Rng>(
    params: &SystemParams,
    v: &AccumulatedValue,
    witness: &Witness,
    key: &EndorserKeyPair,
    message: &[u8],
    tid: &[u8],
    rng: &mut R,
) -> Result<RingSignature, SchemeError> {
    if witness.subject_pk() != key.public_key() {
        return Err(SchemeError::InvalidWitness("witness subject is not the signing key"));
    }
    if !witness.verifies(&params.acc, v) {
        return Err(SchemeError::InvalidWitness("witness does not open the accumulated value"));
    }
    let ctx = derive_gtid(params, tid)?;
    let n = params.modulus();
    let g_tid = ctx.g_tid();
    let Generators { h, t, y, s, zeta, .. } = &params.gens;
    let (x, e1, e2) = (key.public_key(), &key.p, &key.q);
    let w = witness.value();

    let quarter: BigUint = n >> 2u32;
    let r = rng.gen_biguint_below(&quarter);
    let a1 = rng.gen_biguint_below(&quarter);
    let a2 = rng.gen_biguint_below(&quarter);
    let a3 = rng.gen_biguint_below(&quarter);

    let two_e1: BigUint = e1 << 1u32;
    let t_vals = [
        // T1 = g_tid^r
        arith::mod_exp(g_tid, &r, n),
        // T2 = h^r · ζ^(x + r)
        arith::mod_exp(h, &r, n) * arith::mod_exp(zeta, &(x + &r), n) % n,
        // T3 = s^r · g_tid^e2
        arith::mod_exp(s, &r, n) * arith::mod_exp(g_tid, e2, n) % n,
        // T4 = w · y^r
        w * arith::mod_exp(y, &r, n) % n,
        // T5 = t^r · g_tid^(2·e1)
        arith::mod_exp(t, &r, n) * arith::mod_exp(g_tid, &two_e1, n) % n,
    ];

    let u_vals = [
        arith::mod_exp(g_tid, &a1, n),           // u1 = g_tid^α1
        arith::mod_exp(zeta, &(&a1 + &a2), n),   // u2 = ζ^(α1 + α2)
        arith::mod_exp(h, &a1, n),               // u3 = h^α1
        arith::mod_exp(s, &a1, n),               // u4 = s^α1
        arith::mod_exp(g_tid, &a3, n),           // u5 = g_tid^α3
        arith::mod_exp(w, &a2, n),               // u6 = w^α2
        arith::mod_exp(g_tid, &(&two_e1 * &a3), n), // u7 = g_tid^(2·e1·α3)
        arith::mod_exp(t, &a1, n),               // u8 = t^α1
        arith::mod_exp(g_tid, &a2, n),           // u9 = g_tid^α2
    ];

    let c = challenge(params, message, &u_vals);

    // Responses over the integers; no modular reduction.
    let responses = [
        &a1 + &c * &r,                    // α̃1 = α1 + c·r
        &a2 + &c * x,                     // α̃2 = α2 + c·x
        &r * &a2 + &r * &c * x,           // α̃3 = r·α2 + r·c·x
        &a3 + &c * e2,                    // α̃4 = α3 + c·e2
        &r * &a3 + &r * &c * e2,          // α̃5 = r·α3 + r·c·e2
    ];

    let tag = gen_tag(params, &ctx, key);
    Ok(RingSignature { t_vals, u_vals, responses, tag })
}

/// Why a signature failed verification.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RejectReason {
    /// A group element is outside `[1, N)`.
    ElementOutOfRange,
    /// A response exceeds its width bound (index given).
    ResponseBound(usize),
    /// Transaction id was empty or produced a degenerate `g_tid`.
    BadContext,
    /// Verification congruence `i` (1-based) failed.
    Equation(u8),
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RejectReason::ElementOutOfRange => write!(f, "group element out of range"),
            RejectReason::ResponseBound(i) => write!(f, "response {} exceeds its bound", i + 1),
            RejectReason::BadContext => write!(f, "unusable transaction context"),
            RejectReason::Equation(i) => write!(f, "verification equation {i} failed"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerifyOutcome {
    Accept,
    Reject(RejectReason),
}

impl VerifyOutcome {
    pub fn is_accept(self) -> bool {
        matches!(self, VerifyOutcome::Accept)
    }
}

impl fmt::Display for VerifyOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VerifyOutcome::Accept => write!(f, "accept"),
            VerifyOutcome::Reject(r) => write!(f, "reject: {r}"),
        }
    }
}

/// Verifies a ring signature: structural checks, challenge recomputation and
/// the eight congruences tying the transcript together. All inputs are
/// untrusted; malformed values yield `Reject`, never a panic.
pub fn verify(
    params: &SystemParams,
    v: &AccumulatedValue,
    message: &[u8],
    tid: &[u8],
    sig: &RingSignature,
) -> VerifyOutcome {
    let n = params.modulus();
    let one = BigUint::one();

    let in_group = |e: &BigUint| *e >= one && e < n;
    if !sig.t_vals.iter().all(in_group)
        || !sig.u_vals.iter().all(in_group)
        || !in_group(sig.tag.value())
        || !in_group(v.value())
    {
        return VerifyOutcome::Reject(RejectReason::ElementOutOfRange);
    }
    let single_bound = params.single_response_bound();
    let double_bound = params.double_response_bound();
    for (i, resp) in sig.responses.iter().enumerate() {
        let bound = if i == 2 || i == 4 { &double_bound } else { &single_bound };
        if resp >= bound {
            return VerifyOutcome::Reject(RejectReason::ResponseBound(i));
        }
    }

    let ctx = match derive_gtid(params, tid) {
        Ok(ctx) => ctx,
        Err(_) => return VerifyOutcome::Reject(RejectReason::BadContext),
    };
    let g_tid = ctx.g_tid();
    let Generators { h, t, y, s, zeta, .. } = &params.gens;
    let c = challenge(params, message, &sig.u_vals);

    let [t1, t2, t3, t4, t5] = &sig.t_vals;
    let [u1, u2, u3, u4, u5, u6, u7, u8, u9] = &sig.u_vals;
    let [r1, r2, r3, r4, r5] = &sig.responses;
    let tag = sig.tag.value();

    // (1) g_tid^α̃1 = u1 · T1^c
    let lhs = arith::mod_exp(g_tid, r1, n);
    let rhs = u1 * arith::mod_exp(t1, &c, n) % n;
    if lhs != rhs {
        return VerifyOutcome::Reject(RejectReason::Equation(1));
    }

    // (2) ζ^(α̃2 + α̃1) · h^α̃1 = u2 · u3 · T2^c
    let lhs = arith::mod_exp(zeta, &(r2 + r1), n) * arith::mod_exp(h, r1, n) % n;
    let rhs = u2 * u3 % n * arith::mod_exp(t2, &c, n) % n;
    if lhs != rhs {
        return VerifyOutcome::Reject(RejectReason::Equation(2));
    }

    // (3) g_tid^α̃3 = T1^α̃2
    if arith::mod_exp(g_tid, r3, n) != arith::mod_exp(t1, r2, n) {
        return VerifyOutcome::Reject(RejectReason::Equation(3));
    }

    // (4) g_tid^α̃5 = T1^α̃4
    if arith::mod_exp(g_tid, r5, n) != arith::mod_exp(t1, r4, n) {
        return VerifyOutcome::Reject(RejectReason::Equation(4));
    }

    // (5) g_tid^α̃4 · s^α̃1 = T3^c · u4 · u5
    let lhs = arith::mod_exp(g_tid, r4, n) * arith::mod_exp(s, r1, n) % n;
    let rhs = arith::mod_exp(t3, &c, n) * u4 % n * u5 % n;
    if lhs != rhs {
        return VerifyOutcome::Reject(RejectReason::Equation(5));
    }

    // (6) u6 · v^c · y^α̃3 = T4^α̃2
    let lhs = u6 * arith::mod_exp(v.value(), &c, n) % n * arith::mod_exp(y, r3, n) % n;
    if lhs != arith::mod_exp(t4, r2, n) {
        return VerifyOutcome::Reject(RejectReason::Equation(6));
    }

    // (7) t^α̃5 · g_tid^α̃2 · u7 = T5^α̃4 · u9 · g_tid^c
    let lhs = arith::mod_exp(t, r5, n) * arith::mod_exp(g_tid, r2, n) % n * u7 % n;
    let rhs = arith::mod_exp(t5, r4, n) * u9 % n * arith::mod_exp(g_tid, &c, n) % n;
    if lhs != rhs {
        return VerifyOutcome::Reject(RejectReason::Equation(7));
    }

    // (8) ỹ^2c · s^2α̃1 · t^α̃1 = (T3² · T5)^c · u4² · u8
    let two_c: BigUint = &c << 1u32;
    let two_r1: BigUint = r1 << 1u32;
    let lhs = arith::mod_exp(tag, &two_c, n) * arith::mod_exp(s, &two_r1, n) % n
        * arith::mod_exp(t, r1, n)
        % n;
    let t3_sq_t5 = t3 * t3 % n * t5 % n;
    let rhs = arith::mod_exp(&t3_sq_t5, &c, n) * (u4 * u4 % n) % n * u8 % n;
    if lhs != rhs {
        return VerifyOutcome::Reject(RejectReason::Equation(8));
    }

    VerifyOutcome::Accept
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Linkage {
    Linked,
    Unlinked,
}

impl fmt::Display for Linkage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Linkage::Linked => write!(f, "linked"),
            Linkage::Unlinked => write!(f, "unlinked"),
        }
    }
}

/// Two valid signatures for the same transaction are linked exactly when
/// their tags coincide as group elements.
pub fn link(a: &RingSignature, b: &RingSignature) -> Linkage {
    if a.tag == b.tag {
        Linkage::Linked
    } else {
        Linkage::Unlinked
    }
}

/// Shared toy fixtures for this crate's tests.
#[cfg(test)]
pub(crate) mod tests_support {
    use super::*;
    use crate::accumulator;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    pub(crate) fn rng(seed: u64) -> ChaCha20Rng {
        ChaCha20Rng::seed_from_u64(seed)
    }

    /// Toy fixture over N = 1081 = 23·47 with pinned generators: powers of
    /// the full-order generator 4, exponents coprime to 253 and pairwise
    /// distinct so every derived element also has order 253.
    pub(crate) fn toy_params() -> SystemParams {
        let n = BigUint::from(1081u32);
        let base = BigUint::from(4u32);
        let exps = [2u32, 3, 5, 6, 7, 8];
        let vals: Vec<BigUint> =
            exps.iter().map(|e| arith::mod_exp(&base, &BigUint::from(*e), &n)).collect();
        let gens = Generators {
            g: vals[0].clone(),
            h: vals[1].clone(),
            t: vals[2].clone(),
            y: vals[3].clone(),
            s: vals[4].clone(),
            zeta: vals[5].clone(),
        };
        SystemParams::from_parts(
            11,
            8,
            2,
            ParamMode::Toy,
            HashId::Shake128,
            DEFAULT_SLACK_SINGLE,
            DEFAULT_SLACK_DOUBLE,
            n,
            base,
            gens,
        )
        .unwrap()
    }

    /// All key pairs over the small prime pool whose public key 2pq+1 is
    /// prime and accumulable mod 1081, found by enumeration.
    pub(crate) fn toy_keypairs(params: &SystemParams) -> Vec<EndorserKeyPair> {
        let pool = [3u32, 5, 7, 11, 13];
        let mut out = Vec::new();
        let mut r = rng(999);
        for (i, &p) in pool.iter().enumerate() {
            for &q in &pool[i + 1..] {
                if let Ok(kp) = EndorserKeyPair::from_parts(
                    BigUint::from(p),
                    BigUint::from(q),
                    params,
                    16,
                    &mut r,
                ) {
                    out.push(kp);
                }
            }
        }
        out
    }

    /// Toy params plus a 4-member ring and its accumulated value.
    pub(crate) fn toy_setup(
    ) -> (SystemParams, Vec<EndorserKeyPair>, Vec<BigUint>, AccumulatedValue) {
        let params = toy_params();
        let keys = toy_keypairs(&params);
        assert!(keys.len() >= 4, "toy pool must give at least 4 usable key pairs");
        let keys: Vec<EndorserKeyPair> = keys.into_iter().take(4).collect();
        let ring: Vec<BigUint> = keys.iter().map(|k| k.public_key().clone()).collect();
        let v = accumulator::accumulate(params.accumulator(), &ring).unwrap();
        (params, keys, ring, v)
    }
}
