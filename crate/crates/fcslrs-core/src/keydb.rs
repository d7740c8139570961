//! Public-key database: the enrollment record every network entity can read.
//!
//! Entries carry an enrollment flag; revoked keys are excluded from
//! [`active_keys`](KeyDatabase::active_keys) and any consumer holding an
//! accumulated value must re-accumulate after the active set changes. The
//! database is bound to one parameter set through a digest of the encoded
//! parameters.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigUint;

use crate::codec;
use crate::scheme::SystemParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Enrollment {
    Active,
    Revoked,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DbEntry {
    pub pk: BigUint,
    pub status: Enrollment,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum KeyDbError {
    DuplicateKey,
    UnknownKey,
    /// Database was built against a different parameter set.
    ParamsMismatch,
}

impl fmt::Display for KeyDbError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KeyDbError::DuplicateKey => write!(f, "public key already enrolled"),
            KeyDbError::UnknownKey => write!(f, "public key not found"),
            KeyDbError::ParamsMismatch => write!(f, "database bound to different parameters"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for KeyDbError {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyDatabase {
    params_digest: [u8; 16],
    entries: Vec<DbEntry>,
}

impl KeyDatabase {
    pub fn new(params: &SystemParams) -> Self {
        KeyDatabase { params_digest: codec::params_digest(params), entries: Vec::new() }
    }

    pub fn with_digest(params_digest: [u8; 16]) -> Self {
        KeyDatabase { params_digest, entries: Vec::new() }
    }

    pub fn params_digest(&self) -> &[u8; 16] {
        &self.params_digest
    }

    pub fn entries(&self) -> &[DbEntry] {
        &self.entries
    }

    pub fn matches_params(&self, params: &SystemParams) -> bool {
        self.params_digest == codec::params_digest(params)
    }

    pub fn add(&mut self, pk: BigUint, label: impl Into<String>) -> Result<(), KeyDbError> {
        self.insert_raw(pk, Enrollment::Active, label.into())
    }

    pub(crate) fn insert_raw(
        &mut self,
        pk: BigUint,
        status: Enrollment,
        label: String,
    ) -> Result<(), KeyDbError> {
        if self.entries.iter().any(|e| e.pk == pk) {
            return Err(KeyDbError::DuplicateKey);
        }
        self.entries.push(DbEntry { pk, status, label });
        Ok(())
    }

    /// Flags a key revoked. Idempotent; unknown keys are an error.
    pub fn revoke(&mut self, pk: &BigUint) -> Result<(), KeyDbError> {
        let entry = self
            .entries
            .iter_mut()
            .find(|e| &e.pk == pk)
            .ok_or(KeyDbError::UnknownKey)?;
        entry.status = Enrollment::Revoked;
        Ok(())
    }

    /// The keys an accumulation may use, in enrollment order.
    pub fn active_keys(&self) -> Vec<BigUint> {
        self.entries
            .iter()
            .filter(|e| e.status == Enrollment::Active)
            .map(|e| e.pk.clone())
            .collect()
    }
}
