//! Number-theoretic foundation: safe primes, rigid moduli, sphere sampling,
//! QR(N) generator discovery and modular exponentiation.
//!
//! Conventions used throughout the crate:
//!
//! - A *safe prime* is `p = 2p' + 1` with `p` and `p'` both odd primes
//!   (`p'` is the Sophie Germain half).
//! - A *rigid modulus* is `N = p·q` for distinct safe primes of equal bit
//!   length; the group of quadratic residues `QR(N)` then has order `p'·q'`.
//! - A *sphere* `S(2^l, 2^mu)` is the integer interval
//!   `[2^l − 2^mu + 1, 2^l + 2^mu − 1]`, cardinality `2^(mu+1) − 1`.
//!
//! All sampling takes a caller-supplied `Rng`, so tests can pin seeds.

use alloc::string::String;
use core::fmt;

use num_bigint::{BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::Rng;

/// Miller–Rabin rounds used when generating primes. Error probability per
/// composite is at most 4^-64 on top of the trial-division prescreen.
pub const DEFAULT_MR_ROUNDS: u32 = 64;

/// Trial-division table: all primes below 1024.
const SMALL_PRIMES: [u32; 172] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53,
    59, 61, 67, 71, 73, 79, 83, 89, 97, 101, 103, 107, 109, 113, 127, 131,
    137, 139, 149, 151, 157, 163, 167, 173, 179, 181, 191, 193, 197, 199, 211, 223,
    227, 229, 233, 239, 241, 251, 257, 263, 269, 271, 277, 281, 283, 293, 307, 311,
    313, 317, 331, 337, 347, 349, 353, 359, 367, 373, 379, 383, 389, 397, 401, 409,
    419, 421, 431, 433, 439, 443, 449, 457, 461, 463, 467, 479, 487, 491, 499, 503,
    509, 521, 523, 541, 547, 557, 563, 569, 571, 577, 587, 593, 599, 601, 607, 613,
    617, 619, 631, 641, 643, 647, 653, 659, 661, 673, 677, 683, 691, 701, 709, 719,
    727, 733, 739, 743, 751, 757, 761, 769, 773, 787, 797, 809, 811, 821, 823, 827,
    829, 839, 853, 857, 859, 863, 877, 881, 883, 887, 907, 911, 919, 929, 937, 941,
    947, 953, 967, 971, 977, 983, 991, 997, 1009, 1013, 1019, 1021,
];

/// Fixed Miller–Rabin bases used by [`is_prime_fixed_bases`]. Deterministically
/// correct below 3.3·10^24 and a strong filter above it.
const FIXED_MR_BASES: [u32; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Whether the full-strength parameter invariants are enforced or relaxed
/// so that desk-scale toy moduli can drive tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamMode {
    /// Full parameter constraints enforced at setup.
    Secure,
    /// Insecure test parameters: size floors and sphere constraints relaxed.
    Toy,
}

impl ParamMode {
    pub fn is_secure(self) -> bool {
        matches!(self, ParamMode::Secure)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ArithError {
    /// A rejection-sampling loop exhausted its iteration budget.
    IterationCapExceeded(&'static str),
    /// No prime was found inside the requested sphere.
    NoPrimeInSphere,
    /// A size or structural parameter is out of range.
    InvalidParameter(&'static str),
    /// The operation needs the factorization and the modulus has none.
    TrapdoorRequired,
}

impl fmt::Display for ArithError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ArithError::IterationCapExceeded(what) => {
                write!(f, "iteration cap exceeded while generating {what}")
            }
            ArithError::NoPrimeInSphere => write!(f, "no prime found in sphere"),
            ArithError::InvalidParameter(what) => write!(f, "invalid parameter: {what}"),
            ArithError::TrapdoorRequired => write!(f, "operation requires the modulus trapdoor"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for ArithError {}

/// A prime `p = 2·p_half + 1` whose half is itself an odd prime.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SafePrime {
    p: BigUint,
    p_half: BigUint,
}

impl SafePrime {
    /// Validates the safe-prime structure of `p`: `p = 2p' + 1` with `p` and
    /// `p'` both odd primes.
    pub fn from_value<R: Rng>(p: BigUint, rounds: u32, rng: &mut R) -> Result<Self, ArithError> {
        if p.bits() < 3 || p.is_even() {
            return Err(ArithError::InvalidParameter("safe prime must be odd and >= 7"));
        }
        let p_half: BigUint = (&p - 1u32) >> 1;
        if p_half.is_even() {
            return Err(ArithError::InvalidParameter("Sophie Germain half must be odd"));
        }
        if !is_probable_prime(&p, rounds, rng) || !is_probable_prime(&p_half, rounds, rng) {
            return Err(ArithError::InvalidParameter("value is not a safe prime"));
        }
        Ok(SafePrime { p, p_half })
    }

    pub fn value(&self) -> &BigUint {
        &self.p
    }

    /// The Sophie Germain half `p' = (p − 1) / 2`.
    pub fn half(&self) -> &BigUint {
        &self.p_half
    }

    pub fn bits(&self) -> u64 {
        self.p.bits()
    }
}

/// `N = p·q` for distinct safe primes. The factorization is kept only while
/// setup needs it and is never part of any serialized form.
#[derive(Debug, Clone)]
pub struct RigidModulus {
    n: BigUint,
    trapdoor: Option<(SafePrime, SafePrime)>,
}

impl RigidModulus {
    /// Assembles a modulus from two known safe primes (setup and toy fixtures).
    pub fn from_safe_primes(p: SafePrime, q: SafePrime) -> Result<Self, ArithError> {
        if p.value() == q.value() {
            return Err(ArithError::InvalidParameter("safe primes must be distinct"));
        }
        let n = p.value() * q.value();
        Ok(RigidModulus { n, trapdoor: Some((p, q)) })
    }

    pub fn modulus(&self) -> &BigUint {
        &self.n
    }

    pub fn trapdoor(&self) -> Option<(&SafePrime, &SafePrime)> {
        self.trapdoor.as_ref().map(|(p, q)| (p, q))
    }

    /// `|QR(N)| = p'·q'`; needs the trapdoor.
    pub fn qr_order(&self) -> Option<BigUint> {
        self.trapdoor.as_ref().map(|(p, q)| p.half() * q.half())
    }

    /// Drops the factorization, leaving only the public modulus.
    pub fn into_public(self) -> BigUint {
        self.n
    }
}

/// The integer interval `[2^l − 2^mu + 1, 2^l + 2^mu − 1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sphere {
    l: u32,
    mu: u32,
    lo: BigUint,
    hi: BigUint,
}

impl Sphere {
    pub fn new(l: u32, mu: u32) -> Result<Self, ArithError> {
        if mu < 1 || mu > l {
            return Err(ArithError::InvalidParameter("sphere requires 1 <= mu <= l"));
        }
        let center = BigUint::one() << l;
        let radius = BigUint::one() << mu;
        let lo = &center - &radius + 1u32;
        let hi = &center + &radius - 1u32;
        Ok(Sphere { l, mu, lo, hi })
    }

    pub fn l(&self) -> u32 {
        self.l
    }

    pub fn mu(&self) -> u32 {
        self.mu
    }

    pub fn lo(&self) -> &BigUint {
        &self.lo
    }

    pub fn hi(&self) -> &BigUint {
        &self.hi
    }

    pub fn contains(&self, x: &BigUint) -> bool {
        *x >= self.lo && *x <= self.hi
    }

    /// `2^(mu+1) − 1`.
    pub fn cardinality(&self) -> BigUint {
        (BigUint::one() << (self.mu + 1)) - 1u32
    }
}

impl fmt::Display for Sphere {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "S(2^{}, 2^{})", self.l, self.mu)
    }
}

/// Probabilistic primality: trial division by all primes below 1024, a base-2
/// Miller–Rabin round, then `rounds` rounds with random bases.
pub fn is_probable_prime<R: Rng>(n: &BigUint, rounds: u32, rng: &mut R) -> bool {
    match prescreen(n) {
        Prescreen::Prime => return true,
        Prescreen::Composite => return false,
        Prescreen::Unknown => {}
    }
    if !miller_rabin_round(n, &BigUint::from(2u32)) {
        return false;
    }
    let two = BigUint::from(2u32);
    let upper: BigUint = n - 1u32; // bases drawn from [2, n-2]
    for _ in 0..rounds {
        let base = rng.gen_biguint_range(&two, &upper);
        if !miller_rabin_round(n, &base) {
            return false;
        }
    }
    true
}

/// Deterministic variant with the fixed base set; used on validation paths
/// where plumbing an RNG through would buy nothing.
pub fn is_prime_fixed_bases(n: &BigUint) -> bool {
    match prescreen(n) {
        Prescreen::Prime => return true,
        Prescreen::Composite => return false,
        Prescreen::Unknown => {}
    }
    FIXED_MR_BASES
        .iter()
        .all(|b| miller_rabin_round(n, &BigUint::from(*b)))
}

enum Prescreen {
    Prime,
    Composite,
    Unknown,
}

fn prescreen(n: &BigUint) -> Prescreen {
    if n < &BigUint::from(2u32) {
        return Prescreen::Composite;
    }
    for &p in SMALL_PRIMES.iter() {
        let bp = BigUint::from(p);
        if *n == bp {
            return Prescreen::Prime;
        }
        if (n % &bp).is_zero() {
            return Prescreen::Composite;
        }
    }
    Prescreen::Unknown
}

/// One Miller–Rabin round for odd `n > 2` that has no small factors.
fn miller_rabin_round(n: &BigUint, base: &BigUint) -> bool {
    let one = BigUint::one();
    let n_minus_1: BigUint = n - &one;
    // n - 1 = d * 2^s, d odd
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d: BigUint = &n_minus_1 >> s;

    let mut x = base.modpow(&d, n);
    if x == one || x == n_minus_1 {
        return true;
    }
    for _ in 1..s {
        x = (&x * &x) % n;
        if x == n_minus_1 {
            return true;
        }
    }
    false
}

/// Random prime with exactly `bits` bits.
pub fn gen_prime<R: Rng>(bits: u32, rounds: u32, rng: &mut R) -> Result<BigUint, ArithError> {
    if bits < 2 {
        return Err(ArithError::InvalidParameter("prime needs at least 2 bits"));
    }
    if bits == 2 {
        // {2, 3}
        return Ok(BigUint::from(if rng.gen::<bool>() { 2u32 } else { 3u32 }));
    }
    let cap = 4096u64.max(256 * bits as u64);
    for _ in 0..cap {
        let mut c = rng.gen_biguint(bits as u64);
        c.set_bit(bits as u64 - 1, true);
        c.set_bit(0, true);
        if is_probable_prime(&c, rounds, rng) {
            return Ok(c);
        }
    }
    Err(ArithError::IterationCapExceeded("prime"))
}

/// Random safe prime with exactly `bits` bits: `p = 2·p' + 1`, both prime,
/// `p'` odd.
///
/// Searches windows of consecutive odd candidates for `p'`, keeping residues
/// modulo the small-prime table incrementally so only candidates where both
/// `p'` and `2p' + 1` survive trial division reach Miller–Rabin.
pub fn gen_safe_prime<R: Rng>(
    bits: u32,
    rounds: u32,
    rng: &mut R,
) -> Result<SafePrime, ArithError> {
    if bits < 3 {
        return Err(ArithError::InvalidParameter("safe prime needs at least 3 bits"));
    }
    let half_bits = bits - 1; // p' in [2^(bits-2), 2^(bits-1))
    let window: u64 = if bits < 32 { 1 } else { 1 << 14 };
    // Safety net far above the expected candidate count (~0.2·bits^2 odds).
    let max_windows = 64 + 64u64 * (bits as u64) * (bits as u64) / window.max(1);

    for _ in 0..max_windows {
        let mut h = rng.gen_biguint(half_bits as u64);
        h.set_bit(half_bits as u64 - 1, true);
        h.set_bit(0, true);

        // Residues of h modulo the table (skip 2: h is odd by construction).
        let mut residues: [u32; 172] = [0; 172];
        for (i, &p) in SMALL_PRIMES.iter().enumerate() {
            residues[i] = small_rem(&h, p);
        }

        let mut offset: u64 = 0;
        'scan: for _ in 0..window {
            let survives = SMALL_PRIMES.iter().enumerate().skip(1).all(|(i, &p)| {
                let r = (residues[i] + (2 * offset % p as u64) as u32) % p;
                // h ≡ 0 (mod p) or 2h+1 ≡ 0 (mod p) kills the pair, unless the
                // candidate *is* that small prime.
                (r != 0 && (2 * r + 1) % p != 0) || half_bits <= 10
            });
            if survives {
                let cand: BigUint = &h + BigUint::from(2 * offset);
                if cand.bits() != half_bits as u64 {
                    break 'scan; // stepped out of the bit range; resample
                }
                let p: BigUint = (&cand << 1) + 1u32;
                if is_probable_prime(&cand, rounds, rng) && is_probable_prime(&p, rounds, rng) {
                    return Ok(SafePrime { p, p_half: cand });
                }
            }
            offset += 1;
        }
    }
    Err(ArithError::IterationCapExceeded("safe prime"))
}

fn small_rem(n: &BigUint, p: u32) -> u32 {
    use num_traits::ToPrimitive;
    (n % BigUint::from(p)).to_u32().unwrap_or(0)
}

/// Rigid modulus `N = p·q` with distinct safe primes of `lambda / 2` bits each.
pub fn gen_rigid_modulus<R: Rng>(
    lambda: u32,
    rounds: u32,
    rng: &mut R,
) -> Result<RigidModulus, ArithError> {
    if lambda < 32 || lambda % 2 != 0 {
        return Err(ArithError::InvalidParameter("modulus size must be even and >= 32"));
    }
    let p = gen_safe_prime(lambda / 2, rounds, rng)?;
    for _ in 0..64 {
        let q = gen_safe_prime(lambda / 2, rounds, rng)?;
        if q.value() != p.value() {
            return RigidModulus::from_safe_primes(p, q);
        }
    }
    Err(ArithError::IterationCapExceeded("distinct safe prime pair"))
}

/// Generator of `QR(N)`: squares a random unit and accepts once
/// `gcd(u − 1, N) = 1` and `u != 1`. For `N` a product of distinct safe
/// primes, a quadratic residue `u` generates `QR(N)` exactly when
/// `gcd(u − 1, N) = 1`.
pub fn find_qr_generator<R: Rng>(
    modulus: &RigidModulus,
    rng: &mut R,
) -> Result<BigUint, ArithError> {
    if modulus.trapdoor().is_none() {
        // The gcd test itself is public, but the generator guarantee rests on
        // the safe-prime structure, which only the holder of the trapdoor has
        // verified.
        return Err(ArithError::TrapdoorRequired);
    }
    let n = modulus.modulus();
    let one = BigUint::one();
    let two = BigUint::from(2u32);
    for _ in 0..4096 {
        let a = rng.gen_biguint_range(&two, n);
        if a.gcd(n) != one {
            continue;
        }
        let u = (&a * &a) % n;
        if u == one {
            continue;
        }
        let u_minus_1: BigUint = &u - 1u32;
        if u_minus_1.gcd(n) == one {
            return Ok(u);
        }
    }
    Err(ArithError::IterationCapExceeded("QR(N) generator"))
}

/// Uniformly sampled prime from the sphere.
pub fn sample_sphere_prime<R: Rng>(
    sphere: &Sphere,
    rounds: u32,
    rng: &mut R,
) -> Result<BigUint, ArithError> {
    let upper: BigUint = sphere.hi() + 1u32;
    let cap = 256u64.max(128 * sphere.hi().bits());
    for _ in 0..cap {
        let c = rng.gen_biguint_range(sphere.lo(), &upper);
        if is_probable_prime(&c, rounds, rng) {
            return Ok(c);
        }
    }
    Err(ArithError::NoPrimeInSphere)
}

/// `base^exponent mod n`.
pub fn mod_exp(base: &BigUint, exponent: &BigUint, n: &BigUint) -> BigUint {
    debug_assert!(base < n, "base must already be reduced mod n");
    base.modpow(exponent, n)
}

/// Hex rendering used by displays and the CLI.
pub fn to_hex(n: &BigUint) -> String {
    n.to_str_radix(16)
}
