use std::collections::HashMap;

use super::{CodecError, Payload};
use crate::lattice::{input_edge, output_edge, strand_id_of, BlockId, CodeParams, StrandClass};

/// Output of entangling one data block: the node and its `alpha` parities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entangled {
    pub node: BlockId,
    pub data: Payload,
    /// New parities in H, RH, LH order.
    pub parities: Vec<(BlockId, Payload)>,
    /// Parity consumed on each strand; `None` where the virtual zero head was used.
    pub inputs: Vec<Option<BlockId>>,
}

/// Streaming encoder. Holds the counter of the last processed block and the
/// last parity of every strand.
#[derive(Debug, Clone)]
pub struct Entangler {
    params: CodeParams,
    block_size: usize,
    counter: u64,
    heads: HashMap<(StrandClass, u32), (BlockId, Payload)>,
}

impl Entangler {
    pub fn new(params: CodeParams, block_size: usize) -> Self {
        Self {
            params,
            block_size,
            counter: 0,
            heads: HashMap::new(),
        }
    }

    pub fn params(&self) -> &CodeParams {
        &self.params
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    /// Index of the last processed data block.
    pub fn counter(&self) -> u64 {
        self.counter
    }

    /// Number of strand heads currently held in memory.
    pub fn heads_len(&self) -> usize {
        self.heads.len()
    }

    /// The parity at the end of a strand, if the strand has started.
    pub fn head(&self, class: StrandClass, strand: u32) -> Option<&(BlockId, Payload)> {
        self.heads.get(&(class, strand))
    }

    pub fn entangle(&mut self, data: Payload) -> Result<Entangled, CodecError> {
        if data.len() != self.block_size {
            return Err(CodecError::BlockSize {
                expected: self.block_size,
                got: data.len(),
            });
        }
        let i = self.counter + 1;
        let mut parities = Vec::with_capacity(self.params.alpha() as usize);
        let mut inputs = Vec::with_capacity(self.params.alpha() as usize);
        for &class in self.params.classes() {
            let strand = strand_id_of(i, class, &self.params);
            let expected = input_edge(i, class, &self.params);
            let mut parity = data.clone();
            match self.heads.get(&(class, strand)) {
                Some((id, head)) => {
                    debug_assert_eq!(Some(*id), expected, "strand head out of step at d{i}");
                    parity.xor_assign(head.as_bytes());
                    inputs.push(Some(*id));
                }
                None => {
                    debug_assert!(expected.is_none(), "missing strand head for d{i} on {class}");
                    inputs.push(None);
                }
            }
            let id = output_edge(i, class, &self.params);
            self.heads.insert((class, strand), (id, parity.clone()));
            parities.push((id, parity));
        }
        self.counter = i;
        Ok(Entangled {
            node: BlockId::Node(i),
            data,
            parities,
            inputs,
        })
    }
}
