//! On-disk block store: a directory with a `key=value` manifest and one file
//! per available block under `blocks/`, named by the block key.

use std::fs;
use std::io::ErrorKind;
use std::path::Path;

use super::{BlockStore, CodecError};
use crate::lattice::{BlockId, CodeParams};

pub const MANIFEST_FILE: &str = "manifest.txt";
const BLOCKS_DIR: &str = "blocks";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Manifest {
    pub params: CodeParams,
    pub block_size: usize,
    /// Index of the last entangled data block.
    pub counter: u64,
    /// Length in bytes of the encoded input before zero padding.
    pub length: u64,
}

impl Manifest {
    pub fn render(&self) -> String {
        format!(
            "alpha={}\ns={}\np={}\nblock_size={}\ncounter={}\nlength={}\n",
            self.params.alpha(),
            self.params.s(),
            self.params.p(),
            self.block_size,
            self.counter,
            self.length
        )
    }

    pub fn parse(text: &str) -> Result<Self, CodecError> {
        let mut fields = [None::<u64>; 6];
        const KEYS: [&str; 6] = ["alpha", "s", "p", "block_size", "counter", "length"];
        for line in text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
        {
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CodecError::Manifest(format!("expected key=value, got {line:?}")))?;
            let Some(idx) = KEYS.iter().position(|k| *k == key.trim()) else {
                return Err(CodecError::Manifest(format!("unknown key {:?}", key.trim())));
            };
            let value = value
                .trim()
                .parse()
                .map_err(|_| CodecError::Manifest(format!("bad value for {}: {:?}", KEYS[idx], value.trim())))?;
            fields[idx] = Some(value);
        }
        let get = |idx: usize| fields[idx].ok_or_else(|| CodecError::Manifest(format!("missing {}", KEYS[idx])));
        let params = CodeParams::new(get(0)? as u32, get(1)? as u32, get(2)? as u32)?;
        Ok(Manifest {
            params,
            block_size: get(3)? as usize,
            counter: get(4)?,
            length: fields[5].unwrap_or(0),
        })
    }
}

/// Write every available block of `store` and the manifest into `dir`.
/// Blocks already on disk but unavailable in the store are left alone.
pub fn save_store(dir: &Path, store: &BlockStore, length: u64) -> Result<Manifest, CodecError> {
    let blocks = dir.join(BLOCKS_DIR);
    fs::create_dir_all(&blocks)?;
    let params = *store.params();
    for id in store.ids() {
        if let Some(bytes) = store.payload(&id) {
            fs::write(blocks.join(id.key(&params)), bytes)?;
        }
    }
    let manifest = Manifest {
        params,
        block_size: store.block_size(),
        counter: store.nodes(),
        length,
    };
    fs::write(dir.join(MANIFEST_FILE), manifest.render())?;
    Ok(manifest)
}

/// Load a store written by [`save_store`]. Missing block files come back as
/// unavailable blocks.
pub fn load_store(dir: &Path) -> Result<(Manifest, BlockStore), CodecError> {
    let manifest = Manifest::parse(&fs::read_to_string(dir.join(MANIFEST_FILE))?)?;
    let params = manifest.params;
    let mut store = BlockStore::empty_window(params, manifest.block_size, manifest.counter);
    let entries = match fs::read_dir(dir.join(BLOCKS_DIR)) {
        Ok(entries) => entries,
        Err(e) if e.kind() == ErrorKind::NotFound => return Ok((manifest, store)),
        Err(e) => return Err(e.into()),
    };
    for entry in entries {
        let entry = entry?;
        let name = entry.file_name();
        let Some(id) = name.to_str().and_then(|key| BlockId::parse_key(key, &params)) else {
            continue;
        };
        let Some(slot) = store.slot(&id) else {
            continue;
        };
        let bytes = fs::read(entry.path())?;
        if bytes.len() != manifest.block_size {
            return Err(CodecError::BlockSize {
                expected: manifest.block_size,
                got: bytes.len(),
            });
        }
        store.put_slot(slot, &bytes);
    }
    Ok((manifest, store))
}
