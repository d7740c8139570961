//! Bit-exact wire encodings for every record kind.
//!
//! Every record starts with a 4-byte magic tag and a 1-byte version. Two
//! field encodings are used:
//!
//! - *var-int*: a 4-byte big-endian length followed by the minimal (no
//!   leading zero) big-endian magnitude; zero encodes as length 0.
//! - *fixed-int*: exactly `width` big-endian bytes, left-padded with zeros.
//!
//! Signature records use fixed widths derived from the modulus size alone —
//! `ceil(lambda/8)` per group element, `ceil((lambda+slack)/8)` and
//! `ceil((2·lambda+slack)/8)` for single- and double-width responses — so a
//! serialized signature's length never depends on the ring size. Decoders
//! reject non-canonical var-ints, truncated input and trailing bytes; they
//! never read past a declared length and never panic on malformed input.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::accumulator::{AccumulatedValue, Witness};
use crate::arith::ParamMode;
use crate::endorsement::{ProposalResponse, ReadItem, TranProposal, WriteItem};
use crate::keydb::{Enrollment, KeyDatabase};
use crate::scheme::{
    double_response_width_bytes, element_width_bytes, single_response_width_bytes,
    EndorserKeyPair, Generators, HashId, RingSignature, SchemeError, SystemParams, Tag,
};

pub const FORMAT_VERSION: u8 = 1;

pub const MAGIC_PARAMS: [u8; 4] = *b"FCPM";
pub const MAGIC_KEYPAIR: [u8; 4] = *b"FCKP";
pub const MAGIC_ACCUMULATED: [u8; 4] = *b"FCAV";
pub const MAGIC_WITNESS: [u8; 4] = *b"FCWI";
pub const MAGIC_SIGNATURE: [u8; 4] = *b"FCSG";
pub const MAGIC_KEYDB: [u8; 4] = *b"FCDB";
pub const MAGIC_TRAN_PROPOSAL: [u8; 4] = *b"FCTP";
pub const MAGIC_RESPONSE: [u8; 4] = *b"FCPR";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CodecError {
    BadMagic { found: [u8; 4] },
    UnsupportedVersion(u8),
    /// Input ended before the field starting at `offset` was complete.
    Truncated { offset: usize },
    /// A var-int carried a leading zero byte.
    NonCanonical { offset: usize },
    /// A declared length exceeds the remaining input.
    BadLength { offset: usize },
    BadUtf8 { offset: usize },
    /// A value does not fit the fixed field width.
    FieldOverflow { what: &'static str },
    TrailingBytes { offset: usize },
    /// Structurally well-formed but semantically invalid record.
    Semantic(&'static str),
}

impl fmt::Display for CodecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CodecError::BadMagic { found } => write!(f, "bad magic {found:02x?}"),
            CodecError::UnsupportedVersion(v) => write!(f, "unsupported format version {v}"),
            CodecError::Truncated { offset } => write!(f, "truncated input at offset {offset}"),
            CodecError::NonCanonical { offset } => {
                write!(f, "non-canonical integer at offset {offset}")
            }
            CodecError::BadLength { offset } => write!(f, "bad length prefix at offset {offset}"),
            CodecError::BadUtf8 { offset } => write!(f, "invalid utf-8 at offset {offset}"),
            CodecError::FieldOverflow { what } => write!(f, "value too large for field: {what}"),
            CodecError::TrailingBytes { offset } => write!(f, "trailing bytes at offset {offset}"),
            CodecError::Semantic(what) => write!(f, "invalid record: {what}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for CodecError {}

fn semantic_from_scheme(e: SchemeError) -> CodecError {
    match e {
        SchemeError::InvalidParameters(what) | SchemeError::InvalidWitness(what) => {
            CodecError::Semantic(what)
        }
        _ => CodecError::Semantic("record failed validation"),
    }
}

// ---- writer helpers ----

fn put_u16(buf: &mut Vec<u8>, v: u16) {
    buf.extend_from_slice(&v.to_be_bytes());
}

fn put_u32(buf: &mut Vec<u8>, v: u32) {
    buf.extend_from_slice(&v.to_be_bytes());
}

fn put_u64(buf: &mut Vec<u8>, v: u64) {
    buf.extend_from_slice(&v.to_be_bytes());
}

fn put_var_uint(buf: &mut Vec<u8>, v: &BigUint) {
    if v.is_zero() {
        put_u32(buf, 0);
        return;
    }
    let bytes = v.to_bytes_be();
    put_u32(buf, bytes.len() as u32);
    buf.extend_from_slice(&bytes);
}

fn put_fixed_uint(
    buf: &mut Vec<u8>,
    v: &BigUint,
    width: usize,
    what: &'static str,
) -> Result<(), CodecError> {
    let bytes = v.to_bytes_be();
    let len = if v.is_zero() { 0 } else { bytes.len() };
    if len > width {
        return Err(CodecError::FieldOverflow { what });
    }
    buf.resize(buf.len() + (width - len), 0);
    if !v.is_zero() {
        buf.extend_from_slice(&bytes);
    }
    Ok(())
}

fn put_bytes(buf: &mut Vec<u8>, b: &[u8]) {
    put_u32(buf, b.len() as u32);
    buf.extend_from_slice(b);
}

fn put_str(buf: &mut Vec<u8>, s: &str) {
    put_bytes(buf, s.as_bytes());
}

// ---- reader ----

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(buf: &'a [u8]) -> Self {
        Reader { buf, pos: 0 }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], CodecError> {
        if self.buf.len() - self.pos < n {
            return Err(CodecError::Truncated { offset: self.pos });
        }
        let out = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    fn u8(&mut self) -> Result<u8, CodecError> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16, CodecError> {
        let b = self.take(2)?;
        Ok(u16::from_be_bytes([b[0], b[1]]))
    }

    fn u32(&mut self) -> Result<u32, CodecError> {
        let b = self.take(4)?;
        Ok(u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn u64(&mut self) -> Result<u64, CodecError> {
        let b = self.take(8)?;
        let mut arr = [0u8; 8];
        arr.copy_from_slice(b);
        Ok(u64::from_be_bytes(arr))
    }

    /// Length-prefixed slice, with the length validated against the
    /// remaining input before anything is allocated.
    fn len_prefixed(&mut self) -> Result<&'a [u8], CodecError> {
        let at = self.pos;
        let len = self.u32()? as usize;
        if self.buf.len() - self.pos < len {
            return Err(CodecError::BadLength { offset: at });
        }
        self.take(len)
    }

    fn var_uint(&mut self) -> Result<BigUint, CodecError> {
        let at = self.pos;
        let bytes = self.len_prefixed()?;
        if let Some(0) = bytes.first() {
            return Err(CodecError::NonCanonical { offset: at });
        }
        Ok(BigUint::from_bytes_be(bytes))
    }

    fn fixed_uint(&mut self, width: usize) -> Result<BigUint, CodecError> {
        Ok(BigUint::from_bytes_be(self.take(width)?))
    }

    fn string(&mut self) -> Result<String, CodecError> {
        let at = self.pos;
        let bytes = self.len_prefixed()?;
        core::str::from_utf8(bytes)
            .map(String::from)
            .map_err(|_| CodecError::BadUtf8 { offset: at })
    }

    fn header(&mut self, magic: [u8; 4]) -> Result<(), CodecError> {
        let found = self.take(4)?;
        if found != magic {
            let mut arr = [0u8; 4];
            arr.copy_from_slice(found);
            return Err(CodecError::BadMagic { found: arr });
        }
        let version = self.u8()?;
        if version != FORMAT_VERSION {
            return Err(CodecError::UnsupportedVersion(version));
        }
        Ok(())
    }

    fn finish(self) -> Result<(), CodecError> {
        if self.pos != self.buf.len() {
            return Err(CodecError::TrailingBytes { offset: self.pos });
        }
        Ok(())
    }
}

// ---- system parameters ----

pub fn encode_params(params: &SystemParams) -> Vec<u8> {
    let mut buf = Vec::new();
    buf.extend_from_slice(&MAGIC_PARAMS);
    buf.push(FORMAT_VERSION);
    put_u32(&mut buf, params.lambda());
    put_u32(&mut buf, params.l());
    put_u32(&mut buf, params.mu());
    buf.push(match params.mode() {
        ParamMode::Secure => 0,
        ParamMode::Toy => 1,
    });
    buf.push(params.hash().code());
    put_u16(&mut buf, params.slack_single() as u16);
    put_u16(&mut buf, params.slack_double() as u16);
    put_var_uint(&mut buf, params.modulus());
    put_var_uint(&mut buf, params.base());
    let g = params.generators();
    for el in [&g.g, &g.h, &g.t, &g.y, &g.s, &g.zeta] {
        put_var_uint(&mut buf, el);
    }
    buf
}

pub fn decode_params(bytes: &[u8]) -> Result<SystemParams, CodecError> {
    let mut r = Reader::new(bytes);
    r.header(MAGIC_PARAMS)?;
    let lambda = r.u32()?;
    let l = r.u32()?;
    let mu = r.u32()?;
    let mode = match r.u8()? {
        0 => ParamMode::Secure,
        1 => ParamMode::Toy,
        _ => return Err(CodecError::Semantic("unknown parameter mode")),
    };
    let hash = HashId::from_code(r.u8()?).ok_or(CodecError::Semantic("unknown hash id"))?;
    let slack_single = r.u16()? as u32;
    let slack_double = r.u16()? as u32;
    let modulus = r.var_uint()?;
    let base = r.var_uint()?;
    let gens = Generators {
        g: r.var_uint()?,
        h: r.var_uint()?,
        t: r.var_uint()?,
        y: r.var_uint()?,
        s: r.var_uint()?,
        zeta: r.var_uint()?,
    };
    r.finish()?;
    SystemParams::from_parts(
        lambda, l, mu, mode, hash, slack_single, slack_double, modulus, base, gens,
    )
    .map_err(semantic_from_scheme)
}

/// 128-bit digest binding a key database (or any other consumer) to one
/// parameter set.
pub fn params_digest(params: &SystemParams) -> [u8; 16] {
    params.hash().digest128(&[&encode_params(params)])
}

// ---- key pairs ----

pub fn encode_keypair(key: &EndorserKeyPair) -> Vec<u8> {
    let mut buf = Vec::new();
    buf.extend_from_slice(&MAGIC_KEYPAIR);
    buf.push(FORMAT_VERSION);
    put_var_uint(&mut buf, key.secret_p());
    put_var_uint(&mut buf, key.secret_q());
    put_var_uint(&mut buf, key.public_key());
    buf
}

/// Decodes a key pair, validating the arithmetic identity `y = 2pq + 1` and
/// distinctness of the secret primes. Primality is a generation-time
/// guarantee, not re-proved on every load.
pub fn decode_keypair(bytes: &[u8]) -> Result<EndorserKeyPair, CodecError> {
    let mut r = Reader::new(bytes);
    r.header(MAGIC_KEYPAIR)?;
    let p = r.var_uint()?;
    let q = r.var_uint()?;
    let y = r.var_uint()?;
    r.finish()?;
    if p == q {
        return Err(CodecError::Semantic("secret primes must be distinct"));
    }
    if y != BigUint::from(2u32) * &p * &q + BigUint::one() {
        return Err(CodecError::Semantic("public key does not match secret primes"));
    }
    Ok(EndorserKeyPair::from_parts_unchecked(p, q, y))
}

// ---- accumulated values & witnesses ----

pub fn encode_accumulated(v: &AccumulatedValue) -> Vec<u8> {
    let mut buf = Vec::new();
    buf.extend_from_slice(&MAGIC_ACCUMULATED);
    buf.push(FORMAT_VERSION);
    put_u32(&mut buf, v.member_count() as u32);
    put_var_uint(&mut buf, v.value());
    buf
}

pub fn decode_accumulated(bytes: &[u8]) -> Result<AccumulatedValue, CodecError> {
    let mut r = Reader::new(bytes);
    r.header(MAGIC_ACCUMULATED)?;
    let count = r.u32()? as usize;
    let v = r.var_uint()?;
    r.finish()?;
    Ok(AccumulatedValue::from_parts(v, count))
}

pub fn encode_witness(w: &Witness) -> Vec<u8> {
    let mut buf = Vec::new();
    buf.extend_from_slice(&MAGIC_WITNESS);
    buf.push(FORMAT_VERSION);
    put_var_uint(&mut buf, w.value());
    put_var_uint(&mut buf, w.subject_pk());
    buf
}

pub fn decode_witness(bytes: &[u8]) -> Result<Witness, CodecError> {
    let mut r = Reader::new(bytes);
    r.header(MAGIC_WITNESS)?;
    let w = r.var_uint()?;
    let subject = r.var_uint()?;
    r.finish()?;
    Ok(Witness::from_parts(w, subject))
}

// ---- signatures ----

/// Serialized signature length for a given modulus size and slack pair:
/// header + 15 group elements + 3 single-width + 2 double-width responses.
pub fn signature_encoded_len(lambda: u32, slack_single: u32, slack_double: u32) -> usize {
    let ew = element_width_bytes(lambda);
    let sw = single_response_width_bytes(lambda, slack_single);
    let dw = double_response_width_bytes(lambda, slack_double);
    4 + 1 + 4 + 2 + 2 + 15 * ew + 3 * sw + 2 * dw
}

pub fn encode_signature(
    params: &SystemParams,
    sig: &RingSignature,
) -> Result<Vec<u8>, CodecError> {
    let lambda = params.lambda();
    let (s1, s2) = (params.slack_single(), params.slack_double());
    let ew = element_width_bytes(lambda);
    let sw = single_response_width_bytes(lambda, s1);
    let dw = double_response_width_bytes(lambda, s2);

    let mut buf = Vec::with_capacity(signature_encoded_len(lambda, s1, s2));
    buf.extend_from_slice(&MAGIC_SIGNATURE);
    buf.push(FORMAT_VERSION);
    put_u32(&mut buf, lambda);
    put_u16(&mut buf, s1 as u16);
    put_u16(&mut buf, s2 as u16);
    put_fixed_uint(&mut buf, sig.tag.value(), ew, "tag")?;
    for t in sig.t_vals.iter() {
        put_fixed_uint(&mut buf, t, ew, "public value")?;
    }
    for u in sig.u_vals.iter() {
        put_fixed_uint(&mut buf, u, ew, "commitment")?;
    }
    for (i, resp) in sig.responses.iter().enumerate() {
        let width = if i == 2 || i == 4 { dw } else { sw };
        put_fixed_uint(&mut buf, resp, width, "response")?;
    }
    debug_assert_eq!(buf.len(), signature_encoded_len(lambda, s1, s2));
    Ok(buf)
}

pub fn decode_signature(bytes: &[u8]) -> Result<RingSignature, CodecError> {
    let mut r = Reader::new(bytes);
    r.header(MAGIC_SIGNATURE)?;
    let lambda = r.u32()?;
    let s1 = r.u16()? as u32;
    let s2 = r.u16()? as u32;
    if lambda < 8 || lambda > 65_536 || s1 == 0 || s2 == 0 {
        return Err(CodecError::Semantic("implausible signature geometry"));
    }
    let ew = element_width_bytes(lambda);
    let sw = single_response_width_bytes(lambda, s1);
    let dw = double_response_width_bytes(lambda, s2);
    let tag = Tag::from_value(r.fixed_uint(ew)?);
    let mut t_vals: [BigUint; 5] = Default::default();
    for t in t_vals.iter_mut() {
        *t = r.fixed_uint(ew)?;
    }
    let mut u_vals: [BigUint; 9] = Default::default();
    for u in u_vals.iter_mut() {
        *u = r.fixed_uint(ew)?;
    }
    let mut responses: [BigUint; 5] = Default::default();
    for (i, resp) in responses.iter_mut().enumerate() {
        let width = if i == 2 || i == 4 { dw } else { sw };
        *resp = r.fixed_uint(width)?;
    }
    r.finish()?;
    Ok(RingSignature { t_vals, u_vals, responses, tag })
}

// ---- key database ----

pub fn encode_key_database(db: &KeyDatabase) -> Vec<u8> {
    let mut buf = Vec::new();
    buf.extend_from_slice(&MAGIC_KEYDB);
    buf.push(FORMAT_VERSION);
    buf.extend_from_slice(db.params_digest());
    put_u32(&mut buf, db.entries().len() as u32);
    for entry in db.entries() {
        put_var_uint(&mut buf, &entry.pk);
        buf.push(match entry.status {
            Enrollment::Active => 0,
            Enrollment::Revoked => 1,
        });
        put_str(&mut buf, &entry.label);
    }
    buf
}

pub fn decode_key_database(bytes: &[u8]) -> Result<KeyDatabase, CodecError> {
    let mut r = Reader::new(bytes);
    r.header(MAGIC_KEYDB)?;
    let mut digest = [0u8; 16];
    digest.copy_from_slice(r.take(16)?);
    let count = r.u32()? as usize;
    let mut db = KeyDatabase::with_digest(digest);
    for _ in 0..count {
        let pk = r.var_uint()?;
        let status = match r.u8()? {
            0 => Enrollment::Active,
            1 => Enrollment::Revoked,
            _ => return Err(CodecError::Semantic("unknown enrollment flag")),
        };
        let label = r.string()?;
        db.insert_raw(pk, status, label)
            .map_err(|_| CodecError::Semantic("duplicate public key in database"))?;
    }
    r.finish()?;
    Ok(db)
}

// ---- endorsement messages ----

/// Canonical encoding of a transaction proposal; this byte string is also
/// the message the ring signature covers.
pub fn encode_tran_proposal(tp: &TranProposal) -> Vec<u8> {
    let mut buf = Vec::new();
    buf.extend_from_slice(&MAGIC_TRAN_PROPOSAL);
    buf.push(FORMAT_VERSION);
    put_bytes(&mut buf, &tp.tid);
    put_str(&mut buf, &tp.chaincode_id);
    put_bytes(&mut buf, &tp.tx_content_blob);
    put_u32(&mut buf, tp.readset.len() as u32);
    for item in &tp.readset {
        put_str(&mut buf, &item.key);
        put_u64(&mut buf, item.version);
    }
    put_u32(&mut buf, tp.writeset.len() as u32);
    for item in &tp.writeset {
        put_str(&mut buf, &item.key);
        put_bytes(&mut buf, &item.value);
    }
    buf
}

pub fn decode_tran_proposal(bytes: &[u8]) -> Result<TranProposal, CodecError> {
    let mut r = Reader::new(bytes);
    r.header(MAGIC_TRAN_PROPOSAL)?;
    let tid = r.len_prefixed()?.to_vec();
    let chaincode_id = r.string()?;
    let tx_content_blob = r.len_prefixed()?.to_vec();
    let read_count = r.u32()? as usize;
    let mut readset = Vec::new();
    for _ in 0..read_count {
        let key = r.string()?;
        let version = r.u64()?;
        readset.push(ReadItem { key, version });
    }
    let write_count = r.u32()? as usize;
    let mut writeset = Vec::new();
    for _ in 0..write_count {
        let key = r.string()?;
        let value = r.len_prefixed()?.to_vec();
        writeset.push(WriteItem { key, value });
    }
    r.finish()?;
    Ok(TranProposal { tid, chaincode_id, tx_content_blob, readset, writeset })
}

/// The identity-stripped endorsement reply: no field names the endorsing
/// peer. The tag rides both inside the signature and as a top-level field;
/// the decoder enforces their equality, and that the inner proposal carries
/// the response's tid.
pub fn encode_response(
    params: &SystemParams,
    resp: &ProposalResponse,
) -> Result<Vec<u8>, CodecError> {
    let mut buf = Vec::new();
    buf.extend_from_slice(&MAGIC_RESPONSE);
    buf.push(FORMAT_VERSION);
    put_bytes(&mut buf, &resp.tid);
    put_bytes(&mut buf, &encode_tran_proposal(&resp.tran_proposal));
    put_bytes(&mut buf, &encode_signature(params, &resp.signature)?);
    put_var_uint(&mut buf, resp.tag.value());
    Ok(buf)
}

pub fn decode_response(bytes: &[u8]) -> Result<ProposalResponse, CodecError> {
    let mut r = Reader::new(bytes);
    r.header(MAGIC_RESPONSE)?;
    let tid = r.len_prefixed()?.to_vec();
    let tp_bytes = r.len_prefixed()?;
    let tran_proposal = decode_tran_proposal(tp_bytes)?;
    let sig_bytes = r.len_prefixed()?;
    let signature = decode_signature(sig_bytes)?;
    let tag = Tag::from_value(r.var_uint()?);
    r.finish()?;
    if tran_proposal.tid != tid {
        return Err(CodecError::Semantic("proposal tid does not match response tid"));
    }
    if tag != signature.tag {
        return Err(CodecError::Semantic("response tag does not match signature tag"));
    }
    Ok(ProposalResponse { tid, tran_proposal, signature, tag })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheme::tests_support::{rng, toy_setup};
    use alloc::vec;
    use proptest::prelude::*;

    #[test]
    fn params_roundtrip() {
        let (params, _, _, _) = toy_setup();
        let bytes = encode_params(&params);
        let back = decode_params(&bytes).unwrap();
        assert_eq!(back, params);
        assert_eq!(encode_params(&back), bytes);
    }

    #[test]
    fn signature_roundtrip_and_fixed_len() {
        let (params, keys, ring, v) = toy_setup();
        let w = crate::accumulator::gen_witness(params.accumulator(), &ring, keys[0].public_key())
            .unwrap();
        let mut r = rng(50);
        let sig = crate::scheme::sign(&params, &v, &w, &keys[0], b"msg", b"tx", &mut r).unwrap();
        let bytes = encode_signature(&params, &sig).unwrap();
        assert_eq!(
            bytes.len(),
            signature_encoded_len(params.lambda(), params.slack_single(), params.slack_double())
        );
        let back = decode_signature(&bytes).unwrap();
        assert_eq!(back, sig);
        assert_eq!(encode_signature(&params, &back).unwrap(), bytes);
        assert!(crate::scheme::verify(&params, &v, b"msg", b"tx", &back).is_accept());
    }

    #[test]
    fn truncated_input_always_errors() {
        let (params, keys, ring, v) = toy_setup();
        let w = crate::accumulator::gen_witness(params.accumulator(), &ring, keys[1].public_key())
            .unwrap();
        let mut r = rng(51);
        let sig = crate::scheme::sign(&params, &v, &w, &keys[1], b"msg", b"tx", &mut r).unwrap();
        let encodings = vec![
            encode_params(&params),
            encode_signature(&params, &sig).unwrap(),
            encode_keypair(&keys[0]),
            encode_accumulated(&v),
            encode_witness(&w),
        ];
        for full in encodings {
            for cut in 0..full.len() {
                let slice = &full[..cut];
                let all_err = decode_params(slice).is_err()
                    && decode_signature(slice).is_err()
                    && decode_keypair(slice).is_err()
                    && decode_accumulated(slice).is_err()
                    && decode_witness(slice).is_err();
                assert!(all_err, "prefix of length {cut} decoded somewhere");
            }
        }
    }

    #[test]
    fn bad_magic_and_version() {
        let (params, ..) = toy_setup();
        let mut bytes = encode_params(&params);
        bytes[0] = b'X';
        assert!(matches!(decode_params(&bytes), Err(CodecError::BadMagic { .. })));
        let mut bytes = encode_params(&params);
        bytes[4] = 99;
        assert!(matches!(decode_params(&bytes), Err(CodecError::UnsupportedVersion(99))));
    }

    #[test]
    fn non_canonical_var_int_rejected() {
        let (params, ..) = toy_setup();
        let bytes = encode_params(&params);
        // The modulus var-int sits right after the 23-byte fixed header;
        // widen its length by one and prepend a zero byte.
        let mut tweaked = Vec::new();
        tweaked.extend_from_slice(&bytes[..23]);
        let n_len = u32::from_be_bytes([bytes[23], bytes[24], bytes[25], bytes[26]]);
        tweaked.extend_from_slice(&(n_len + 1).to_be_bytes());
        tweaked.push(0);
        tweaked.extend_from_slice(&bytes[27..]);
        assert!(matches!(decode_params(&tweaked), Err(CodecError::NonCanonical { .. })));
    }

    #[test]
    fn keypair_roundtrip_and_identity_check() {
        let (_, keys, _, _) = toy_setup();
        let bytes = encode_keypair(&keys[0]);
        assert_eq!(decode_keypair(&bytes).unwrap(), keys[0]);
        // Corrupt y so it no longer equals 2pq + 1.
        let mut bad = bytes.clone();
        let last = bad.len() - 1;
        bad[last] ^= 0x01;
        assert!(decode_keypair(&bad).is_err());
    }

    #[test]
    fn trailing_bytes_rejected() {
        let (_, keys, _, _) = toy_setup();
        let mut bytes = encode_keypair(&keys[0]);
        bytes.push(0);
        assert!(matches!(decode_keypair(&bytes), Err(CodecError::TrailingBytes { .. })));
    }

    #[test]
    fn response_roundtrip_and_binding_checks() {
        use crate::endorsement::{respond, stub_chaincode, EndorsementPolicy, TranProposal};
        let (params, keys, ring, _) = toy_setup();
        let policy = EndorsementPolicy::new(&params, ring, 1).unwrap();
        let tid = params.hash().digest128(&[b"payload"]).to_vec();
        let (readset, writeset) = stub_chaincode(params.hash(), b"payload");
        let tp = TranProposal {
            tid: tid.clone(),
            chaincode_id: alloc::string::String::from("cc"),
            tx_content_blob: b"payload".to_vec(),
            readset,
            writeset,
        };
        let mut r = rng(52);
        let resp = respond(&params, &policy, &keys[0], &tid, tp, &mut r).unwrap();
        let bytes = encode_response(&params, &resp).unwrap();
        let back = decode_response(&bytes).unwrap();
        assert_eq!(back, resp);
        assert_eq!(encode_response(&params, &back).unwrap(), bytes);

        // A response whose top-level tag disagrees with the signature's tag
        // must not decode.
        let mut forged = resp.clone();
        forged.tag = crate::scheme::Tag::from_value(num_bigint::BigUint::from(7u32));
        let bytes = encode_response(&params, &forged).unwrap();
        assert!(matches!(decode_response(&bytes), Err(CodecError::Semantic(_))));
    }

    #[test]
    fn tran_proposal_roundtrip() {
        use crate::endorsement::{ReadItem, TranProposal, WriteItem};
        let tp = TranProposal {
            tid: vec![1, 2, 3],
            chaincode_id: alloc::string::String::from("asset-transfer"),
            tx_content_blob: vec![9; 32],
            readset: vec![ReadItem { key: alloc::string::String::from("r:00"), version: 7 }],
            writeset: vec![WriteItem {
                key: alloc::string::String::from("w:ff"),
                value: vec![0xde, 0xad],
            }],
        };
        let bytes = encode_tran_proposal(&tp);
        assert_eq!(decode_tran_proposal(&bytes).unwrap(), tp);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]

        /// Round-trip identity for randomized witness/accumulated records.
        #[test]
        fn random_records_roundtrip(w in 1u64..u64::MAX, pk in 1u64..u64::MAX, count in 0u32..1000) {
            let wit = Witness::from_parts(BigUint::from(w), BigUint::from(pk));
            let bytes = encode_witness(&wit);
            prop_assert_eq!(decode_witness(&bytes).unwrap(), wit.clone());
            prop_assert_eq!(encode_witness(&decode_witness(&bytes).unwrap()), bytes);

            let acc = AccumulatedValue::from_parts(BigUint::from(w), count as usize);
            let bytes = encode_accumulated(&acc);
            prop_assert_eq!(decode_accumulated(&bytes).unwrap(), acc);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(2_000))]

        /// Arbitrary byte soup never panics and never becomes a record by luck.
        #[test]
        fn fuzz_decode_never_panics(bytes in proptest::collection::vec(any::<u8>(), 0..256)) {
            let _ = decode_params(&bytes);
            let _ = decode_signature(&bytes);
            let _ = decode_keypair(&bytes);
            let _ = decode_accumulated(&bytes);
            let _ = decode_witness(&bytes);
            let _ = decode_key_database(&bytes);
            let _ = decode_tran_proposal(&bytes);
            let _ = decode_response(&bytes);
        }
    }
}
