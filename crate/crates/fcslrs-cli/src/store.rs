//! File-backed persistence: thin I/O adapters over the wire codecs.
//!
//! Conventional layout produced by the CLI:
//!
//! ```text
//! params.bin        system parameters
//! keys.db           public-key database (enrollment flags, labels)
//! key_<i>.sk        endorser key pair (secret!)
//! v.bin             accumulated value
//! w_<i>.bin         membership witness
//! sig_<tid>_<i>.bin ring signature
//! transcript.json   endorsement flow transcript
//! ```

use std::fs;
use std::path::Path;

use fcslrs_core::accumulator::{AccumulatedValue, Witness};
use fcslrs_core::codec::{self, CodecError};
use fcslrs_core::endorsement::ProposalResponse;
use fcslrs_core::keydb::KeyDatabase;
use fcslrs_core::scheme::{EndorserKeyPair, RingSignature, SystemParams};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Codec {
        path: String,
        #[source]
        source: CodecError,
    },
}

pub type Result<T> = std::result::Result<T, StoreError>;

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|source| StoreError::Io { path: path.display().to_string(), source })
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes)
        .map_err(|source| StoreError::Io { path: path.display().to_string(), source })
}

fn codec_err(path: &Path) -> impl FnOnce(CodecError) -> StoreError + '_ {
    move |source| StoreError::Codec { path: path.display().to_string(), source }
}

pub fn save_params(path: &Path, params: &SystemParams) -> Result<()> {
    write(path, &codec::encode_params(params))
}

pub fn load_params(path: &Path) -> Result<SystemParams> {
    codec::decode_params(&read(path)?).map_err(codec_err(path))
}

pub fn save_keypair(path: &Path, key: &EndorserKeyPair) -> Result<()> {
    write(path, &codec::encode_keypair(key))
}

pub fn load_keypair(path: &Path) -> Result<EndorserKeyPair> {
    codec::decode_keypair(&read(path)?).map_err(codec_err(path))
}

pub fn save_key_database(path: &Path, db: &KeyDatabase) -> Result<()> {
    write(path, &codec::encode_key_database(db))
}

pub fn load_key_database(path: &Path) -> Result<KeyDatabase> {
    codec::decode_key_database(&read(path)?).map_err(codec_err(path))
}

pub fn save_accumulated(path: &Path, v: &AccumulatedValue) -> Result<()> {
    write(path, &codec::encode_accumulated(v))
}

pub fn load_accumulated(path: &Path) -> Result<AccumulatedValue> {
    codec::decode_accumulated(&read(path)?).map_err(codec_err(path))
}

pub fn save_witness(path: &Path, w: &Witness) -> Result<()> {
    write(path, &codec::encode_witness(w))
}

pub fn load_witness(path: &Path) -> Result<Witness> {
    codec::decode_witness(&read(path)?).map_err(codec_err(path))
}

pub fn save_signature(path: &Path, params: &SystemParams, sig: &RingSignature) -> Result<()> {
    let bytes = codec::encode_signature(params, sig).map_err(codec_err(path))?;
    write(path, &bytes)
}

pub fn load_signature(path: &Path) -> Result<RingSignature> {
    codec::decode_signature(&read(path)?).map_err(codec_err(path))
}

pub fn save_response(path: &Path, params: &SystemParams, resp: &ProposalResponse) -> Result<()> {
    let bytes = codec::encode_response(params, resp).map_err(codec_err(path))?;
    write(path, &bytes)
}

pub fn load_response(path: &Path) -> Result<ProposalResponse> {
    codec::decode_response(&read(path)?).map_err(codec_err(path))
}
