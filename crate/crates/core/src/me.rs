//! Exhaustive search for minimal erasure patterns.
//!
//! An erasure pattern defeats the decoder exactly when it contains a stopping
//! set: a set of blocks in which every pp-tuple of every erased node and both
//! dp-tuples of every erased parity hold at least one erased block. A minimal
//! erasure is therefore a stopping set with at least one node and no proper
//! subset that still loses data. The search grows such sets from an anchor
//! node by repeatedly picking an unsatisfied tuple and branching on which of
//! its blocks to erase, forbidding earlier choices in later branches so every
//! set is produced once.

use std::io::Write;
use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;
use thiserror::Error;

use crate::codec::{BlockStore, Maintenance, DEFAULT_MAX_ROUNDS};
use crate::lattice::{output_parity_index, raw_input_index, BlockId, CodeParams};

/// Largest window, in data blocks, the search accepts.
pub const MAX_WINDOW: u64 = 60;
/// Largest pattern size the search accepts.
pub const MAX_PATTERN: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MeError {
    #[error("search budget of {budget} steps exhausted ({} patterns found so far)", partial.len())]
    BudgetExceeded { budget: u64, partial: Vec<ErasurePattern> },
    #[error("window of {0} data blocks exceeds the limit of {MAX_WINDOW}")]
    WindowTooLarge(u64),
    #[error("pattern size {0} exceeds the limit of {MAX_PATTERN}")]
    PatternTooLarge(usize),
}

/// A set of erased blocks, kept sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ErasurePattern {
    blocks: Vec<BlockId>,
}

impl ErasurePattern {
    pub fn new(mut blocks: Vec<BlockId>) -> Self {
        blocks.sort();
        blocks.dedup();
        Self { blocks }
    }

    pub fn blocks(&self) -> &[BlockId] {
        &self.blocks
    }

    /// Number of data blocks, `x`.
    pub fn data_loss(&self) -> usize {
        self.blocks.iter().filter(|b| b.is_node()).count()
    }

    /// Number of blocks, `y`.
    pub fn size(&self) -> usize {
        self.blocks.len()
    }

    pub fn translate(&self, delta: i64) -> Self {
        Self::new(self.blocks.iter().map(|b| b.translate(delta)).collect())
    }

    pub fn without(&self, index: usize) -> Self {
        let mut blocks = self.blocks.clone();
        blocks.remove(index);
        Self { blocks }
    }

    /// Shift along the lattice by a multiple of `s` so the smallest index
    /// lands in `[base, base + s)`.
    pub fn canonical(&self, params: &CodeParams, base: u64) -> Self {
        let Some(min) = self.blocks.iter().map(BlockId::min_index).min() else {
            return self.clone();
        };
        let s = params.s() as i64;
        let offset = (min as i64 - base as i64).rem_euclid(s);
        self.translate(base as i64 + offset - min as i64)
    }

    /// Space-separated block keys.
    pub fn render(&self, params: &CodeParams) -> String {
        self.blocks.iter().map(|b| b.key(params)).collect::<Vec<_>>().join(" ")
    }
}

/// Run the global decoder on a lattice with `pattern` erased and report
/// whether every erased data block comes back. Blocks outside the pattern,
/// including every block beyond its span, are available.
pub fn is_recoverable(pattern: &ErasurePattern, params: &CodeParams) -> bool {
    let Some(max) = pattern.blocks.iter().map(BlockId::max_index).max() else {
        return true;
    };
    let reach = params.s() as u64 * params.p().max(1) as u64 + params.s() as u64 + 1;
    let mut store = BlockStore::availability_only(*params, max + reach);
    for block in &pattern.blocks {
        assert!(store.erase(block), "{block} is not a block of {params}");
    }
    store.repair_all(Maintenance::Full, DEFAULT_MAX_ROUNDS);
    pattern
        .blocks
        .iter()
        .filter(|b| b.is_node())
        .all(|b| store.is_available(b))
}

/// Every member is needed: dropping any one of them lets the decoder
/// recover all data.
pub fn is_irreducible(pattern: &ErasurePattern, params: &CodeParams) -> bool {
    !is_recoverable(pattern, params) && (0..pattern.size()).all(|k| is_recoverable(&pattern.without(k), params))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchLimits {
    /// Data blocks spanned by a pattern, counted from its first data block.
    pub window: u64,
    pub max_size: usize,
    /// Search steps allowed across all anchors.
    pub budget: u64,
}

impl Default for SearchLimits {
    fn default() -> Self {
        Self {
            window: MAX_WINDOW,
            max_size: MAX_PATTERN,
            budget: 200_000_000,
        }
    }
}

impl SearchLimits {
    fn check(&self) -> Result<(), MeError> {
        if self.window > MAX_WINDOW {
            return Err(MeError::WindowTooLarge(self.window));
        }
        if self.max_size > MAX_PATTERN {
            return Err(MeError::PatternTooLarge(self.max_size));
        }
        Ok(())
    }
}

/// All minimal erasures with exactly `x` data blocks and at most
/// `limits.max_size` blocks, one per translation class, sorted by size.
pub fn enumerate_me(params: &CodeParams, x: usize, limits: &SearchLimits) -> Result<Vec<ErasurePattern>, MeError> {
    limits.check()?;
    run(params, x, limits, false)
}

/// Smallest minimal erasure with `x` data blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinMe {
    pub size: usize,
    /// Translation classes of minimal erasures of that size.
    pub count: usize,
    pub example: ErasurePattern,
}

/// `|ME(x)|`, or `None` when no minimal erasure fits in the limits.
pub fn min_me_size(params: &CodeParams, x: usize, limits: &SearchLimits) -> Result<Option<MinMe>, MeError> {
    limits.check()?;
    let patterns = run(params, x, limits, true)?;
    Ok(patterns.first().map(|first| MinMe {
        size: first.size(),
        count: patterns.iter().filter(|p| p.size() == first.size()).count(),
        example: first.clone(),
    }))
}

fn run(
    params: &CodeParams,
    x: usize,
    limits: &SearchLimits,
    minimum_only: bool,
) -> Result<Vec<ErasurePattern>, MeError> {
    if x == 0 {
        return Ok(Vec::new());
    }
    let s = params.s() as u64;
    // Far enough from the lattice head that no tuple meets a virtual head.
    let base = s * (params.p() as u64 + 2) + 1;
    let steps = AtomicU64::new(0);
    let results: Vec<(Vec<ErasurePattern>, bool)> = (0..s)
        .into_par_iter()
        .map(|r| {
            let window = Window::new(*params, base + r, limits.window);
            let mut search = Search {
                w: &window,
                x,
                bound: limits.max_size,
                minimum_only,
                erased: vec![false; window.len()],
                forbidden: vec![false; window.len()],
                members: Vec::new(),
                nodes: 0,
                found: Vec::new(),
                steps: &steps,
                budget: limits.budget,
                exhausted: false,
            };
            search.push(window.node(window.lo).expect("anchor in window"));
            search.dfs();
            (search.found, search.exhausted)
        })
        .collect();
    let exhausted = results.iter().any(|(_, e)| *e);
    let mut patterns: Vec<ErasurePattern> = results.into_iter().flat_map(|(p, _)| p).collect();
    if minimum_only {
        if let Some(best) = patterns.iter().map(ErasurePattern::size).min() {
            patterns.retain(|p| p.size() == best);
        }
    }
    patterns.sort_by(|a, b| a.size().cmp(&b.size()).then_with(|| a.blocks.cmp(&b.blocks)));
    if exhausted {
        return Err(MeError::BudgetExceeded {
            budget: limits.budget,
            partial: patterns,
        });
    }
    Ok(patterns)
}

/// Blocks of data nodes `lo..=hi` and the parities they emit towards nodes
/// inside the window. Anything else is treated as available.
struct Window {
    params: CodeParams,
    lo: u64,
    hi: u64,
    per: usize,
}

/// A repair tuple: two blocks, `None` meaning available outside the window.
type Tuple = [Option<usize>; 2];

impl Window {
    fn new(params: CodeParams, lo: u64, nodes: u64) -> Self {
        Self {
            params,
            lo,
            hi: lo + nodes.max(1) - 1,
            per: params.blocks_per_node(),
        }
    }

    fn len(&self) -> usize {
        (self.hi - self.lo + 1) as usize * self.per
    }

    fn node(&self, i: u64) -> Option<usize> {
        (self.lo..=self.hi)
            .contains(&i)
            .then(|| (i - self.lo) as usize * self.per)
    }

    fn edge(&self, from: u64, k: usize) -> Option<usize> {
        let class = self.params.classes()[k];
        let to = output_parity_index(from, class, &self.params);
        if from < self.lo || to > self.hi {
            return None;
        }
        Some((from - self.lo) as usize * self.per + 1 + k)
    }

    fn input(&self, i: u64, k: usize) -> Option<usize> {
        let h = raw_input_index(i, self.params.classes()[k], &self.params);
        if h < 1 {
            return None;
        }
        self.edge(h as u64, k)
    }

    fn block(&self, slot: usize) -> BlockId {
        let i = self.lo + (slot / self.per) as u64;
        match slot % self.per {
            0 => BlockId::Node(i),
            k => BlockId::edge(i, self.params.classes()[k - 1], &self.params),
        }
    }

    /// Tuples that can each repair the block in `slot`.
    fn tuples(&self, slot: usize, out: &mut Vec<Tuple>) {
        out.clear();
        let i = self.lo + (slot / self.per) as u64;
        match slot % self.per {
            0 => {
                for k in 0..self.params.classes().len() {
                    out.push([self.input(i, k), self.edge(i, k)]);
                }
            }
            e => {
                let k = e - 1;
                out.push([self.node(i), self.input(i, k)]);
                let to = output_parity_index(i, self.params.classes()[k], &self.params);
                out.push([self.node(to), self.edge(to, k)]);
            }
        }
    }
}

struct Search<'a> {
    w: &'a Window,
    x: usize,
    bound: usize,
    minimum_only: bool,
    erased: Vec<bool>,
    forbidden: Vec<bool>,
    members: Vec<usize>,
    nodes: usize,
    found: Vec<ErasurePattern>,
    steps: &'a AtomicU64,
    budget: u64,
    exhausted: bool,
}

impl Search<'_> {
    fn push(&mut self, slot: usize) {
        self.erased[slot] = true;
        self.members.push(slot);
        if slot.is_multiple_of(self.w.per) {
            self.nodes += 1;
        }
    }

    fn pop(&mut self) {
        let slot = self.members.pop().expect("non-empty");
        self.erased[slot] = false;
        if slot.is_multiple_of(self.w.per) {
            self.nodes -= 1;
        }
    }

    fn allowed(&self, slot: usize) -> bool {
        if self.forbidden[slot] || self.erased[slot] {
            return false;
        }
        if slot.is_multiple_of(self.w.per) {
            // the anchor is the first node of the pattern
            self.nodes < self.x && slot > 0
        } else {
            true
        }
    }

    /// The unsatisfied tuple with the fewest ways to satisfy it. `Err` when
    /// some tuple cannot be satisfied; `Ok(None)` when all are satisfied.
    fn pick(&self) -> Result<Option<Vec<usize>>, ()> {
        let mut tuples = Vec::with_capacity(3);
        let mut best: Option<Vec<usize>> = None;
        for &slot in &self.members {
            self.w.tuples(slot, &mut tuples);
            for tuple in &tuples {
                if tuple.iter().flatten().any(|&b| self.erased[b]) {
                    continue;
                }
                let options: Vec<usize> = tuple.iter().flatten().copied().filter(|&b| self.allowed(b)).collect();
                if options.is_empty() {
                    return Err(());
                }
                if best.as_ref().is_none_or(|b| options.len() < b.len()) {
                    best = Some(options);
                }
            }
        }
        Ok(best)
    }

    fn dfs(&mut self) {
        if self.exhausted {
            return;
        }
        if self.steps.fetch_add(1, Ordering::Relaxed) >= self.budget {
            self.exhausted = true;
            return;
        }
        let options = match self.pick() {
            Err(()) => return,
            Ok(None) => {
                self.accept();
                return;
            }
            Ok(Some(options)) => options,
        };
        if self.members.len() >= self.bound {
            return;
        }
        let mut banned = Vec::new();
        for slot in options {
            self.push(slot);
            self.dfs();
            self.pop();
            self.forbidden[slot] = true;
            banned.push(slot);
        }
        for slot in banned {
            self.forbidden[slot] = false;
        }
    }

    fn accept(&mut self) {
        if self.nodes != self.x || !self.irreducible() {
            return;
        }
        let pattern = ErasurePattern::new(self.members.iter().map(|&s| self.w.block(s)).collect());
        if self.minimum_only {
            if self.members.len() < self.bound {
                self.found.clear();
            }
            self.bound = self.members.len();
        }
        self.found.push(pattern);
    }

    /// The current set is a stopping set; check that dropping any member
    /// lets the decoder recover every data block.
    fn irreducible(&self) -> bool {
        let mut set = self.erased.clone();
        let mut tuples = Vec::with_capacity(3);
        for &m in &self.members {
            set[m] = false;
            let mut residual: Vec<usize> = self.members.iter().copied().filter(|&b| b != m).collect();
            loop {
                let before = residual.len();
                residual.retain(|&b| {
                    self.w.tuples(b, &mut tuples);
                    let repairable = tuples.iter().any(|t| t.iter().flatten().all(|&o| !set[o]));
                    !repairable
                });
                // publish repairs at the end of the round
                for &b in &self.members {
                    set[b] = b != m && residual.contains(&b);
                }
                if residual.len() == before {
                    break;
                }
            }
            let lost = residual.iter().any(|&b| b % self.w.per == 0);
            for &b in &self.members {
                set[b] = true;
            }
            if lost {
                return false;
            }
        }
        true
    }
}

/// Write a CSV table of `|ME(x)|` results.
pub fn write_csv<W: Write>(rows: &[MeRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "params",
        "x",
        "min_size",
        "pattern_count",
        "example_pattern",
        "complete_flag",
    ])?;
    for row in rows {
        let (size, count, example) = match &row.result {
            Some(me) => (
                me.size.to_string(),
                me.count.to_string(),
                me.example.render(&row.params),
            ),
            None => (String::new(), "0".to_string(), String::new()),
        };
        w.write_record([
            row.params.to_string(),
            row.x.to_string(),
            size,
            count,
            example,
            row.complete.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeRow {
    pub params: CodeParams,
    pub x: usize,
    pub result: Option<MinMe>,
    /// False when the budget ran out; `result` then holds the best found.
    pub complete: bool,
}

/// Run [`min_me_size`] and fold a budget overrun into an incomplete row.
pub fn me_row(params: &CodeParams, x: usize, limits: &SearchLimits) -> Result<MeRow, MeError> {
    match min_me_size(params, x, limits) {
        Ok(result) => Ok(MeRow {
            params: *params,
            x,
            result,
            complete: true,
        }),
        Err(MeError::BudgetExceeded { partial, .. }) => {
            let result = partial.first().map(|first| MinMe {
                size: first.size(),
                count: partial.iter().filter(|p| p.size() == first.size()).count(),
                example: first.clone(),
            });
            Ok(MeRow {
                params: *params,
                x,
                result,
                complete: false,
            })
        }
        Err(e) => Err(e),
    }
}
