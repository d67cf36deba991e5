//! Encoding, repair and storage of entangled blocks.

mod entangle;
mod persist;
mod repair;
mod schedule;
mod store;
mod tamper;

use std::io;

use thiserror::Error;

use crate::lattice::{BlockId, ParamError};

pub use entangle::{Entangled, Entangler};
pub use persist::{load_store, save_store, Manifest, MANIFEST_FILE};
pub use repair::{Maintenance, Repair, RepairReport, RoundOrder, RoundStats, Unrecoverable, DEFAULT_MAX_ROUNDS};
pub use schedule::{schedule_writes, BucketWrite, Schedule, WritePolicy, WriteStep};
pub use store::BlockStore;
pub use tamper::tamper_set;

/// Default size of data and parity blocks in bytes.
pub const DEFAULT_BLOCK_SIZE: usize = 4096;

#[derive(Debug, Error)]
pub enum CodecError {
    #[error("block size mismatch: lattice uses {expected} bytes, got {got}")]
    BlockSize { expected: usize, got: usize },
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error("bad manifest: {0}")]
    Manifest(String),
    #[error("{id} does not belong to this store")]
    UnknownBlock { id: BlockId },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Contents of one data or parity block.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Payload(Vec<u8>);

impl Payload {
    pub fn zeroed(len: usize) -> Self {
        Payload(vec![0; len])
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn xor_assign(&mut self, other: &[u8]) {
        xor_into(&mut self.0, other);
    }
}

impl From<Vec<u8>> for Payload {
    fn from(bytes: Vec<u8>) -> Self {
        Payload(bytes)
    }
}

impl From<&[u8]> for Payload {
    fn from(bytes: &[u8]) -> Self {
        Payload(bytes.to_vec())
    }
}

impl std::fmt::Debug for Payload {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let head: Vec<String> = self.0.iter().take(8).map(|b| format!("{b:02x}")).collect();
        write!(f, "Payload({} bytes: {}", self.0.len(), head.join(""))?;
        if self.0.len() > 8 {
            f.write_str("..")?;
        }
        f.write_str(")")
    }
}

pub(crate) fn xor_into(dst: &mut [u8], src: &[u8]) {
    debug_assert_eq!(dst.len(), src.len());
    for (d, s) in dst.iter_mut().zip(src) {
        *d ^= s;
    }
}
