use super::{CodecError, Entangled};
use crate::lattice::{output_parity_index, BlockId, CodeParams};

const AVAILABLE: u8 = 1;
const REPAIRED: u8 = 2;

/// Payloads, availability, repair flags and locations for a window of the
/// lattice holding nodes `1..=nodes` and every parity they emitted.
///
/// Blocks are kept in dense slots: node `d_i` at `(i - 1) * (alpha + 1)`,
/// followed by its output parities in H, RH, LH order. A block size of zero
/// gives an availability-only store for simulation.
#[derive(Debug, Clone)]
pub struct BlockStore {
    params: CodeParams,
    block_size: usize,
    nodes: u64,
    bytes: Vec<u8>,
    flags: Vec<u8>,
    locations: Vec<u32>,
}

impl BlockStore {
    pub fn new(params: CodeParams, block_size: usize) -> Self {
        Self {
            params,
            block_size,
            nodes: 0,
            bytes: Vec::new(),
            flags: Vec::new(),
            locations: Vec::new(),
        }
    }

    /// A store of `nodes` zero-byte blocks, all available.
    pub fn availability_only(params: CodeParams, nodes: u64) -> Self {
        let slots = nodes as usize * params.blocks_per_node();
        Self {
            params,
            block_size: 0,
            nodes,
            bytes: Vec::new(),
            flags: vec![AVAILABLE; slots],
            locations: vec![0; slots],
        }
    }

    pub fn params(&self) -> &CodeParams {
        &self.params
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    /// Number of data blocks in the window.
    pub fn nodes(&self) -> u64 {
        self.nodes
    }

    /// Number of stored blocks, data and parity.
    pub fn len(&self) -> usize {
        self.flags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flags.is_empty()
    }

    /// Append the output of the entangler. Blocks must arrive in order.
    pub fn insert(&mut self, block: &Entangled) -> Result<(), CodecError> {
        if block.node != BlockId::Node(self.nodes + 1) {
            return Err(CodecError::UnknownBlock { id: block.node });
        }
        let sizes_ok =
            block.data.len() == self.block_size && block.parities.iter().all(|(_, p)| p.len() == self.block_size);
        if !sizes_ok {
            return Err(CodecError::BlockSize {
                expected: self.block_size,
                got: block.data.len(),
            });
        }
        self.nodes += 1;
        self.bytes.extend_from_slice(block.data.as_bytes());
        self.flags.push(AVAILABLE);
        self.locations.push(0);
        for (id, payload) in &block.parities {
            debug_assert_eq!(self.slot(id), Some(self.flags.len()));
            self.bytes.extend_from_slice(payload.as_bytes());
            self.flags.push(AVAILABLE);
            self.locations.push(0);
        }
        Ok(())
    }

    /// Slot of a block, or `None` when it lies outside the window.
    pub fn slot(&self, id: &BlockId) -> Option<usize> {
        let per = self.params.blocks_per_node();
        match *id {
            BlockId::Node(i) if (1..=self.nodes).contains(&i) => Some((i as usize - 1) * per),
            BlockId::Edge { from, to, class }
                if (1..=self.nodes).contains(&from)
                    && (class.index() as u32) < self.params.alpha()
                    && output_parity_index(from, class, &self.params) == to =>
            {
                Some((from as usize - 1) * per + 1 + class.index())
            }
            _ => None,
        }
    }

    /// Block stored in `slot`.
    pub fn block_at(&self, slot: usize) -> BlockId {
        let per = self.params.blocks_per_node();
        let i = (slot / per) as u64 + 1;
        match slot % per {
            0 => BlockId::Node(i),
            k => BlockId::edge(i, self.params.classes()[k - 1], &self.params),
        }
    }

    pub fn ids(&self) -> impl Iterator<Item = BlockId> + '_ {
        (0..self.len()).map(|slot| self.block_at(slot))
    }

    pub fn unavailable(&self) -> impl Iterator<Item = BlockId> + '_ {
        (0..self.len())
            .filter(|&slot| !self.slot_available(slot))
            .map(|slot| self.block_at(slot))
    }

    /// Blocks outside the window count as unavailable.
    pub fn is_available(&self, id: &BlockId) -> bool {
        self.slot(id).is_some_and(|slot| self.slot_available(slot))
    }

    pub fn is_repaired(&self, id: &BlockId) -> bool {
        self.slot(id).is_some_and(|slot| self.flags[slot] & REPAIRED != 0)
    }

    /// Payload of an available block.
    pub fn payload(&self, id: &BlockId) -> Option<&[u8]> {
        let slot = self.slot(id)?;
        self.slot_available(slot).then(|| self.slot_bytes(slot))
    }

    /// Mark a block unavailable and wipe its payload. Returns false when the
    /// block is not in the window.
    pub fn erase(&mut self, id: &BlockId) -> bool {
        match self.slot(id) {
            Some(slot) => {
                self.erase_slot(slot);
                true
            }
            None => false,
        }
    }

    pub fn location(&self, id: &BlockId) -> Option<u32> {
        self.slot(id).map(|slot| self.locations[slot])
    }

    pub fn set_location(&mut self, id: &BlockId, location: u32) -> bool {
        match self.slot(id) {
            Some(slot) => {
                self.locations[slot] = location;
                true
            }
            None => false,
        }
    }

    /// Locations of all blocks in slot order.
    pub fn locations(&self) -> &[u32] {
        &self.locations
    }

    /// Replace all locations at once; `locations` is in slot order.
    pub fn set_locations(&mut self, locations: Vec<u32>) {
        assert_eq!(locations.len(), self.len(), "one location per block");
        self.locations = locations;
    }

    /// Mark every block stored at one of the given locations unavailable.
    pub fn fail_locations(&mut self, failed: &[bool]) -> usize {
        let mut count = 0;
        for slot in 0..self.len() {
            if failed[self.locations[slot] as usize] {
                self.erase_slot(slot);
                count += 1;
            }
        }
        count
    }

    pub(crate) fn slot_available(&self, slot: usize) -> bool {
        self.flags[slot] & AVAILABLE != 0
    }

    pub(crate) fn slot_is_node(&self, slot: usize) -> bool {
        slot.is_multiple_of(self.params.blocks_per_node())
    }

    pub(crate) fn slot_bytes(&self, slot: usize) -> &[u8] {
        &self.bytes[slot * self.block_size..(slot + 1) * self.block_size]
    }

    pub(crate) fn erase_slot(&mut self, slot: usize) {
        self.flags[slot] &= !AVAILABLE;
        let bs = self.block_size;
        self.bytes[slot * bs..(slot + 1) * bs].fill(0);
    }

    pub(crate) fn restore_slot(&mut self, slot: usize, bytes: &[u8]) {
        let bs = self.block_size;
        self.bytes[slot * bs..(slot + 1) * bs].copy_from_slice(bytes);
        self.flags[slot] |= AVAILABLE | REPAIRED;
    }

    /// Load a payload read from disk. Used when rebuilding a persisted store.
    pub(crate) fn put_slot(&mut self, slot: usize, bytes: &[u8]) {
        let bs = self.block_size;
        self.bytes[slot * bs..(slot + 1) * bs].copy_from_slice(bytes);
        self.flags[slot] = AVAILABLE;
    }

    /// Window of `nodes` blocks with every block unavailable and zeroed.
    pub(crate) fn empty_window(params: CodeParams, block_size: usize, nodes: u64) -> Self {
        let slots = nodes as usize * params.blocks_per_node();
        Self {
            params,
            block_size,
            nodes,
            bytes: vec![0; slots * block_size],
            flags: vec![0; slots],
            locations: vec![0; slots],
        }
    }
}
