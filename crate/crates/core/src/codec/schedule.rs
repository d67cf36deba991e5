//! Sealed-bucket write scheduling.
//!
//! Blocks are written one lattice column (`s` data blocks) at a time: every
//! input of a column comes from earlier columns, so a column is the largest
//! batch that can be entangled in parallel. The writer keeps in memory only
//! the parities produced by the previous batch. With `s = p` these are exactly
//! the inputs of the next batch; with `p > s` the helical wrap-around inputs of
//! rim nodes are older and have to be fetched back from storage.

use crate::lattice::{input_edge, output_edge, BlockId, CodeParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WritePolicy {
    /// Fetch old inputs before the batch and seal every bucket at once.
    FullWrite,
    /// Write each bucket with the parities computable from memory now and
    /// complete it in the next batch once the old inputs are fetched.
    PartialWrite,
}

/// Parities written for one data block in one batch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BucketWrite {
    pub node: u64,
    /// Includes the data block itself on the first write of the bucket.
    pub with_data: bool,
    pub parities: Vec<BlockId>,
    /// True once the data block and all `alpha` parities are persisted.
    pub sealed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WriteStep {
    pub buckets: Vec<BucketWrite>,
    /// Parities read back from storage before this step.
    pub fetched: Vec<BlockId>,
    /// Parities held in memory for the next step.
    pub memory_parities: usize,
}

impl WriteStep {
    pub fn sealed(&self) -> usize {
        self.buckets.iter().filter(|b| b.sealed).count()
    }

    pub fn partial(&self) -> usize {
        self.buckets.iter().filter(|b| !b.sealed).count()
    }

    /// True when every bucket first written in this step is sealed in it.
    pub fn is_full_write(&self) -> bool {
        self.buckets.iter().filter(|b| b.with_data).all(|b| b.sealed)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    pub steps: Vec<WriteStep>,
}

impl Schedule {
    pub fn total_fetches(&self) -> usize {
        self.steps.iter().map(|s| s.fetched.len()).sum()
    }

    pub fn peak_memory(&self) -> usize {
        self.steps.iter().map(|s| s.memory_parities).max().unwrap_or(0)
    }

    /// Nodes whose bucket was first written unsealed.
    pub fn partially_written(&self) -> Vec<u64> {
        self.steps
            .iter()
            .flat_map(|s| s.buckets.iter())
            .filter(|b| b.with_data && !b.sealed)
            .map(|b| b.node)
            .collect()
    }
}

fn column(i: u64, s: u64) -> u64 {
    (i - 1) / s
}

/// Schedule the writes of `count` data blocks appended to an empty lattice.
pub fn schedule_writes(count: u64, params: &CodeParams, policy: WritePolicy) -> Schedule {
    let s = params.s() as u64;
    let mut steps: Vec<WriteStep> = Vec::new();
    let mut deferred: Vec<BucketWrite> = Vec::new();
    let mut first = 1;
    while first <= count || !deferred.is_empty() {
        let last = (first + s - 1).min(count);
        let mut step = WriteStep {
            buckets: std::mem::take(&mut deferred),
            fetched: Vec::new(),
            memory_parities: 0,
        };
        // deferred parities were fetched at the end of the previous step
        for i in first..=last {
            let mut now = Vec::new();
            let mut later = Vec::new();
            for &class in params.classes() {
                let out = output_edge(i, class, params);
                match input_edge(i, class, params) {
                    Some(input) if column(input.min_index(), s) + 1 < column(i, s) => {
                        step.fetched.push(input);
                        later.push(out);
                    }
                    _ => now.push(out),
                }
            }
            step.memory_parities += params.alpha() as usize;
            match policy {
                WritePolicy::FullWrite => {
                    now.extend(later);
                    now.sort();
                    step.buckets.push(BucketWrite {
                        node: i,
                        with_data: true,
                        parities: now,
                        sealed: true,
                    });
                }
                WritePolicy::PartialWrite => {
                    let sealed = later.is_empty();
                    step.buckets.push(BucketWrite {
                        node: i,
                        with_data: true,
                        parities: now,
                        sealed,
                    });
                    if !sealed {
                        deferred.push(BucketWrite {
                            node: i,
                            with_data: false,
                            parities: later,
                            sealed: true,
                        });
                    }
                }
            }
        }
        if policy == WritePolicy::PartialWrite {
            // the fetch overlaps the write of this batch
            step.memory_parities += step.fetched.len();
        }
        steps.push(step);
        first = last + 1;
    }
    Schedule { steps }
}
