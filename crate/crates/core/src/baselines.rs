//! Availability-level models of Reed-Solomon stripes and n-way replication.
//!
//! No field arithmetic is done: an RS(k,m) stripe is decodable exactly when
//! at least `k` of its `k + m` blocks are available, which is all the
//! simulation metrics depend on.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::codec::Maintenance;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BaselineError {
    #[error("invalid RS({k},{m}): k must be at least 1")]
    InvalidRs { k: u32, m: u32 },
    #[error("replication needs at least one copy")]
    NoReplicas,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RsCode {
    k: u32,
    m: u32,
}

impl RsCode {
    pub fn new(k: u32, m: u32) -> Result<Self, BaselineError> {
        if k == 0 {
            return Err(BaselineError::InvalidRs { k, m });
        }
        Ok(Self { k, m })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn stripe_len(&self) -> usize {
        (self.k + self.m) as usize
    }

    /// Additional storage as a percentage of the data size.
    pub fn overhead_percent(&self) -> f64 {
        self.m as f64 * 100.0 / self.k as f64
    }

    /// Blocks read to repair a single failure.
    pub fn single_failure_reads(&self) -> u32 {
        self.k
    }
}

impl fmt::Display for RsCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RS({},{})", self.k, self.m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Replication {
    copies: u32,
}

impl Replication {
    pub fn new(copies: u32) -> Result<Self, BaselineError> {
        if copies == 0 {
            return Err(BaselineError::NoReplicas);
        }
        Ok(Self { copies })
    }

    pub fn copies(&self) -> u32 {
        self.copies
    }

    pub fn overhead_percent(&self) -> f64 {
        (self.copies - 1) as f64 * 100.0
    }
}

impl fmt::Display for Replication {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-way", self.copies)
    }
}

/// One stripe, with the global indices of its blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RsStripe {
    pub id: u64,
    /// Global data block indices, 0-based.
    pub data: Vec<u64>,
    /// Slots of the placed blocks, data first.
    pub slots: Vec<usize>,
    /// Virtual zero data blocks filling the last stripe. Always available.
    pub padding: u32,
}

/// Stripe layout of a run of data blocks. Blocks of stripe `t` occupy
/// consecutive slots: real data blocks first, then the `m` parities. Padding
/// blocks are virtual and have no slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RsLayout {
    code: RsCode,
    data_blocks: u64,
}

pub fn rs_layout(data_blocks: u64, code: RsCode) -> RsLayout {
    RsLayout { code, data_blocks }
}

impl RsLayout {
    pub fn code(&self) -> RsCode {
        self.code
    }

    pub fn data_blocks(&self) -> u64 {
        self.data_blocks
    }

    pub fn stripes(&self) -> u64 {
        self.data_blocks.div_ceil(self.code.k as u64)
    }

    pub fn parity_blocks(&self) -> u64 {
        self.stripes() * self.code.m as u64
    }

    /// Data plus parity blocks, padding excluded.
    pub fn placed_blocks(&self) -> usize {
        (self.data_blocks + self.parity_blocks()) as usize
    }

    fn real_data(&self, t: u64) -> u32 {
        let k = self.code.k as u64;
        (self.data_blocks - t * k).min(k) as u32
    }

    /// First slot and number of placed blocks of stripe `t`.
    pub fn stripe_span(&self, t: u64) -> (usize, usize) {
        let start = t as usize * self.code.stripe_len();
        (start, (self.real_data(t) + self.code.m) as usize)
    }

    pub fn stripe(&self, t: u64) -> RsStripe {
        let (start, len) = self.stripe_span(t);
        let real = self.real_data(t);
        let first = t * self.code.k as u64;
        RsStripe {
            id: t,
            data: (first..first + real as u64).collect(),
            slots: (start..start + len).collect(),
            padding: self.code.k - real,
        }
    }
}

/// Result of repairing one scheme after a disaster.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Outcome {
    /// Data blocks stored at failed locations.
    pub unavailable_data: u64,
    pub recovered_data: u64,
    pub lost_data: u64,
    /// Available data blocks left without any live redundancy after repair.
    pub vulnerable_data: u64,
    /// Recovered data blocks repaired as single failures: by two-block XOR
    /// in the first round for AE, in stripes with one missing block for RS,
    /// always for replication.
    pub single_failures: u64,
    pub repaired_parities: u64,
    /// Blocks read per repaired block, mapped to the number of such repairs.
    pub reads: BTreeMap<u32, u64>,
}

impl Outcome {
    pub fn single_failure_fraction(&self) -> f64 {
        if self.recovered_data == 0 {
            0.0
        } else {
            self.single_failures as f64 / self.recovered_data as f64
        }
    }

    fn charge(&mut self, reads: u32, count: u64) {
        if count > 0 {
            *self.reads.entry(reads).or_default() += count;
        }
    }
}

/// Repair every stripe of `layout` given per-slot availability.
///
/// A stripe with at least `k` available blocks is decoded and its missing
/// data blocks are recovered; otherwise they are lost. Available data in a
/// damaged stripe is not counted as lost. Under minimal maintenance only
/// stripes that lost a data block are rewritten, so stripes that lost only
/// parities stay degraded. A data block is vulnerable when its stripe ends
/// with `k` or fewer available blocks.
pub fn rs_repair(layout: &RsLayout, available: &[bool], mode: Maintenance) -> Outcome {
    assert_eq!(available.len(), layout.placed_blocks(), "one flag per placed block");
    let code = layout.code;
    let k = code.k as usize;
    let mut out = Outcome::default();
    for t in 0..layout.stripes() {
        let (start, len) = layout.stripe_span(t);
        let real = len - code.m as usize;
        let flags = &available[start..start + len];
        let missing_data = flags[..real].iter().filter(|a| !**a).count();
        let missing_parity = flags[real..].iter().filter(|a| !**a).count();
        let padding = k - real;
        let live = len - missing_data - missing_parity + padding;
        out.unavailable_data += missing_data as u64;
        let after = if live >= k {
            out.recovered_data += missing_data as u64;
            if missing_data + missing_parity == 1 {
                out.single_failures += missing_data as u64;
            }
            let rewrite = missing_data > 0 || mode == Maintenance::Full;
            if rewrite {
                out.repaired_parities += missing_parity as u64;
                out.charge(code.k, (missing_data + missing_parity) as u64);
                code.stripe_len()
            } else {
                live
            }
        } else {
            out.lost_data += missing_data as u64;
            live
        };
        if after <= k {
            out.vulnerable_data += (real - missing_data) as u64;
        }
    }
    out
}

/// Repair `data_blocks` replicated blocks. Copy `r` of block `b` sits in slot
/// `b * copies + r`, and copy 0 is the primary.
///
/// A block whose primary is down is recovered from any surviving copy and
/// lost when no copy survives. Minimal maintenance restores only the primary;
/// full maintenance restores every copy. A block is vulnerable when it ends
/// with a single available copy.
pub fn replication_repair(scheme: Replication, data_blocks: u64, available: &[bool], mode: Maintenance) -> Outcome {
    let n = scheme.copies as usize;
    assert_eq!(available.len(), data_blocks as usize * n, "one flag per copy");
    let mut out = Outcome::default();
    for copies in available.chunks_exact(n) {
        let live = copies.iter().filter(|a| **a).count();
        if live == 0 {
            out.unavailable_data += 1;
            out.lost_data += 1;
            continue;
        }
        let mut after = live;
        if !copies[0] {
            out.unavailable_data += 1;
            out.recovered_data += 1;
            out.single_failures += 1;
            out.charge(1, 1);
            after += 1;
        }
        if mode == Maintenance::Full {
            out.repaired_parities += (n - after) as u64;
            out.charge(1, (n - after) as u64);
            after = n;
        }
        if after == 1 {
            out.vulnerable_data += 1;
        }
    }
    out
}
