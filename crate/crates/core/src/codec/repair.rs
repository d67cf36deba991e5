use rayon::prelude::*;
use thiserror::Error;

use super::{xor_into, BlockStore, CodecError, Payload};
use crate::lattice::{output_parity_index, raw_input_index, BlockId, StrandClass};

/// Rounds allowed before `repair_all` gives up without reaching a fixpoint.
pub const DEFAULT_MAX_ROUNDS: usize = 100;

/// Below this many missing blocks a round runs on the calling thread.
const PARALLEL_THRESHOLD: usize = 4096;

/// No complete tuple is available for the block this round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("{block} cannot be repaired from the available blocks")]
pub struct Unrecoverable {
    pub block: BlockId,
}

/// Which unavailable blocks the global repair tries to restore.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Maintenance {
    /// Every unavailable block.
    Full,
    /// Data blocks, plus only those parities that lie on a run of missing
    /// parities touching a missing data block on its strand.
    Minimal,
}

/// How repairs made during a round become visible.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub enum RoundOrder {
    /// Every repair reads the blocks available when the round started; all
    /// results are published together at the end of the round.
    #[default]
    Snapshot,
    /// Missing blocks are visited in lattice order and each repair is usable
    /// by the blocks visited after it in the same round.
    Sequential,
}

/// A single-block repair: the XOR of at most two available blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Repair {
    pub block: BlockId,
    pub payload: Payload,
    pub class: StrandClass,
    /// Blocks read. A single source means the other input was a virtual zero head.
    pub sources: Vec<BlockId>,
}

impl Repair {
    pub fn reads(&self) -> usize {
        self.sources.len()
    }
}

/// Repair counts for one round of the global decoder.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RoundStats {
    pub data: usize,
    pub parity: usize,
    /// Repairs that read one block and a virtual zero head.
    pub single_reads: usize,
    /// Repairs that read two blocks.
    pub double_reads: usize,
}

impl RoundStats {
    pub fn total(&self) -> usize {
        self.data + self.parity
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RepairReport {
    /// One entry per round, including the final round that repaired nothing
    /// when a fixpoint was reached.
    pub rounds: Vec<RoundStats>,
    pub fixpoint: bool,
}

impl RepairReport {
    pub fn repaired(&self) -> usize {
        self.rounds.iter().map(RoundStats::total).sum()
    }

    pub fn data_repaired(&self) -> usize {
        self.rounds.iter().map(|r| r.data).sum()
    }

    /// Number of rounds needed to restore every recoverable data block.
    pub fn data_rounds(&self) -> usize {
        self.rounds.iter().rposition(|r| r.data > 0).map_or(0, |i| i + 1)
    }
}

#[derive(Debug, Clone, Copy)]
struct Plan {
    class: StrandClass,
    /// `None` stands for the virtual all-zero head parity.
    sources: [Option<usize>; 2],
}

impl BlockStore {
    fn node_slot(&self, i: u64) -> usize {
        (i as usize - 1) * self.params().blocks_per_node()
    }

    fn edge_slot(&self, from: u64, class: StrandClass) -> usize {
        self.node_slot(from) + 1 + class.index()
    }

    /// Slot of the input parity of `d_i`; `None` is the virtual head.
    fn input_slot(&self, i: u64, class: StrandClass) -> Option<usize> {
        let h = raw_input_index(i, class, self.params());
        (h >= 1).then(|| self.edge_slot(h as u64, class))
    }

    fn source_ok(&self, source: Option<usize>) -> bool {
        source.is_none_or(|slot| self.slot_available(slot))
    }

    fn plan_node(&self, i: u64) -> Option<Plan> {
        let params = *self.params();
        params.classes().iter().find_map(|&class| {
            let input = self.input_slot(i, class);
            let output = Some(self.edge_slot(i, class));
            (self.source_ok(input) && self.source_ok(output)).then_some(Plan {
                class,
                sources: [input, output],
            })
        })
    }

    fn plan_edge(&self, from: u64, class: StrandClass) -> Option<Plan> {
        let left_node = Some(self.node_slot(from));
        let left_edge = self.input_slot(from, class);
        if self.source_ok(left_node) && self.source_ok(left_edge) {
            return Some(Plan {
                class,
                sources: [left_edge, left_node],
            });
        }
        let to = output_parity_index(from, class, self.params());
        if to > self.nodes() {
            return None;
        }
        let right_node = Some(self.node_slot(to));
        let right_edge = Some(self.edge_slot(to, class));
        (self.source_ok(right_node) && self.source_ok(right_edge)).then_some(Plan {
            class,
            sources: [right_node, right_edge],
        })
    }

    fn plan_slot(&self, slot: usize) -> Option<Plan> {
        let per = self.params().blocks_per_node();
        let i = (slot / per) as u64 + 1;
        match slot % per {
            0 => self.plan_node(i),
            k => self.plan_edge(i, self.params().classes()[k - 1]),
        }
    }

    fn execute(&self, plan: &Plan) -> Payload {
        let mut payload = Payload::zeroed(self.block_size());
        for slot in plan.sources.iter().flatten() {
            payload.xor_assign(self.slot_bytes(*slot));
        }
        payload
    }

    fn apply(&mut self, slot: usize, plan: &Plan, buffer: &mut [u8]) {
        buffer.fill(0);
        for source in plan.sources.iter().flatten() {
            xor_into(buffer, self.slot_bytes(*source));
        }
        self.restore_slot(slot, buffer);
    }

    fn to_repair(&self, slot: usize, plan: &Plan) -> Repair {
        Repair {
            block: self.block_at(slot),
            payload: self.execute(plan),
            class: plan.class,
            sources: plan.sources.iter().flatten().map(|&s| self.block_at(s)).collect(),
        }
    }

    /// Rebuild a data block from the first complete pp-tuple, trying strand
    /// classes in H, RH, LH order. The store is not modified.
    pub fn repair_node(&self, i: u64) -> Result<Repair, Unrecoverable> {
        let block = BlockId::Node(i);
        if !(1..=self.nodes()).contains(&i) {
            return Err(Unrecoverable { block });
        }
        let slot = self.node_slot(i);
        self.plan_node(i)
            .map(|plan| self.to_repair(slot, &plan))
            .ok_or(Unrecoverable { block })
    }

    /// Rebuild a parity from the dp-tuple at its lower end, falling back to
    /// the one at its upper end. The store is not modified.
    pub fn repair_edge(&self, id: &BlockId) -> Result<Repair, Unrecoverable> {
        let unrecoverable = Unrecoverable { block: *id };
        let BlockId::Edge { from, class, .. } = *id else {
            return Err(unrecoverable);
        };
        let slot = self.slot(id).ok_or(unrecoverable)?;
        self.plan_edge(from, class)
            .map(|plan| self.to_repair(slot, &plan))
            .ok_or(unrecoverable)
    }

    /// Repair any block.
    pub fn repair_block(&self, id: &BlockId) -> Result<Repair, Unrecoverable> {
        match *id {
            BlockId::Node(i) => self.repair_node(i),
            BlockId::Edge { .. } => self.repair_edge(id),
        }
    }

    /// Store the payload of a repair and mark the block available again.
    pub fn apply_repair(&mut self, repair: &Repair) -> Result<(), CodecError> {
        let slot = self
            .slot(&repair.block)
            .ok_or(CodecError::UnknownBlock { id: repair.block })?;
        if repair.payload.len() != self.block_size() {
            return Err(CodecError::BlockSize {
                expected: self.block_size(),
                got: repair.payload.len(),
            });
        }
        self.restore_slot(slot, repair.payload.as_bytes());
        Ok(())
    }

    /// Available data blocks none of whose incident parities is available.
    /// Virtual strand heads do not count as redundancy.
    pub fn unprotected_nodes(&self) -> impl Iterator<Item = u64> + '_ {
        let params = *self.params();
        (1..=self.nodes()).filter(move |&i| {
            self.slot_available(self.node_slot(i))
                && params.classes().iter().all(|&class| {
                    !self.slot_available(self.edge_slot(i, class))
                        && !self.input_slot(i, class).is_some_and(|slot| self.slot_available(slot))
                })
        })
    }

    /// Flag missing parities that minimal maintenance may restore: runs of
    /// missing parities along a strand that reach a missing data block.
    fn needed_parities(&self, missing: &[usize]) -> Vec<bool> {
        let params = *self.params();
        let mut needed = vec![false; self.len()];
        for &slot in missing.iter().filter(|&&s| self.slot_is_node(s)) {
            let start = (slot / params.blocks_per_node()) as u64 + 1;
            for &class in params.classes() {
                let mut node = start;
                loop {
                    let edge = self.edge_slot(node, class);
                    if self.slot_available(edge) || needed[edge] {
                        break;
                    }
                    needed[edge] = true;
                    let to = output_parity_index(node, class, &params);
                    if to > self.nodes() || !self.slot_available(self.node_slot(to)) {
                        break;
                    }
                    node = to;
                }
                let mut node = start;
                while let Some(edge) = self.input_slot(node, class) {
                    if self.slot_available(edge) || needed[edge] {
                        break;
                    }
                    needed[edge] = true;
                    let from = raw_input_index(node, class, &params) as u64;
                    if !self.slot_available(self.node_slot(from)) {
                        break;
                    }
                    node = from;
                }
            }
        }
        needed
    }

    /// Iterative global repair. Each round repairs every block it can from the
    /// blocks available when the round started, then publishes all results at
    /// once. Stops after a round that repairs nothing, or after `max_rounds`.
    pub fn repair_all(&mut self, mode: Maintenance, max_rounds: usize) -> RepairReport {
        self.repair_all_ordered(mode, RoundOrder::Snapshot, max_rounds)
    }

    /// [`BlockStore::repair_all`] with a choice of round semantics.
    pub fn repair_all_ordered(&mut self, mode: Maintenance, order: RoundOrder, max_rounds: usize) -> RepairReport {
        let mut missing: Vec<usize> = (0..self.len()).filter(|&s| !self.slot_available(s)).collect();
        let mut report = RepairReport::default();
        while report.rounds.len() < max_rounds {
            let candidates: Vec<usize> = match mode {
                Maintenance::Full => missing.clone(),
                Maintenance::Minimal => {
                    let needed = self.needed_parities(&missing);
                    missing
                        .iter()
                        .copied()
                        .filter(|&s| self.slot_is_node(s) || needed[s])
                        .collect()
                }
            };
            let mut buffer = vec![0u8; self.block_size()];
            let plans: Vec<(usize, Plan)> = match order {
                RoundOrder::Snapshot => {
                    let this = &*self;
                    let attempt = |&slot: &usize| this.plan_slot(slot).map(|plan| (slot, plan));
                    let plans: Vec<(usize, Plan)> = if candidates.len() >= PARALLEL_THRESHOLD {
                        candidates.par_iter().filter_map(attempt).collect()
                    } else {
                        candidates.iter().filter_map(attempt).collect()
                    };
                    // Sources were available at the start of the round and
                    // targets were not, so writing in place never feeds this round.
                    for (slot, plan) in &plans {
                        self.apply(*slot, plan, &mut buffer);
                    }
                    plans
                }
                RoundOrder::Sequential => {
                    let mut plans = Vec::new();
                    for &slot in &candidates {
                        if let Some(plan) = self.plan_slot(slot) {
                            self.apply(slot, &plan, &mut buffer);
                            plans.push((slot, plan));
                        }
                    }
                    plans
                }
            };

            let mut stats = RoundStats::default();
            for (slot, plan) in &plans {
                if self.slot_is_node(*slot) {
                    stats.data += 1;
                } else {
                    stats.parity += 1;
                }
                match plan.sources.iter().flatten().count() {
                    1 => stats.single_reads += 1,
                    _ => stats.double_reads += 1,
                }
            }
            report.rounds.push(stats);
            if plans.is_empty() {
                report.fixpoint = true;
                break;
            }
            missing.retain(|&s| !self.slot_available(s));
        }
        report
    }
}
