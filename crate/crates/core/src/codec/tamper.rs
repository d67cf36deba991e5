use std::collections::BTreeSet;

use crate::lattice::{output_parity_index, BlockId, CodeParams};

/// Parities an attacker must recompute to alter `d_i` undetected: on each of
/// the `alpha` strands through `d_i`, every parity emitted by a node from `i`
/// up to `window_end`.
pub fn tamper_set(i: u64, window_end: u64, params: &CodeParams) -> BTreeSet<BlockId> {
    let mut set = BTreeSet::new();
    for &class in params.classes() {
        let mut node = i;
        while node <= window_end {
            let id = BlockId::edge(node, class, params);
            set.insert(id);
            node = output_parity_index(node, class, params);
        }
    }
    set
}
