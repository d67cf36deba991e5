//! Independent reference models used by the integration tests. Nothing here
//! calls the crate's index rules or decoder.
#![allow(dead_code)]

use std::collections::BTreeSet;

use aecode::codec::{BlockStore, Entangled, Entangler, Payload};
use aecode::lattice::{BlockId, CodeParams, StrandClass};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn ae(alpha: u32, s: u32, p: u32) -> CodeParams {
    CodeParams::new(alpha, s, p).unwrap()
}

/// Every valid parameter set with alpha in 1..=3 and s, p up to `max`.
pub fn all_params(max: u32) -> Vec<CodeParams> {
    let mut out = vec![CodeParams::single()];
    for alpha in 2..=3 {
        for s in 1..=max {
            for p in s..=max {
                out.push(ae(alpha, s, p));
            }
        }
    }
    out
}

fn coords(i: u64, s: u64) -> (i64, i64) {
    (((i - 1) / s + 1) as i64, ((i - 1) % s + 1) as i64)
}

fn index(column: i64, row: i64, s: u64) -> Option<u64> {
    (column >= 1).then(|| ((column - 1) * s as i64 + row) as u64)
}

/// Next node on the strand through `d_i`, stepping one column right on the
/// cylinder and wrapping helices around the rim with a `p - s` column shift.
pub fn geo_next(i: u64, class: StrandClass, params: &CodeParams) -> u64 {
    let (s, shift) = (params.s() as u64, params.p() as i64 - params.s() as i64);
    let (c, r) = coords(i, s);
    let s_i = s as i64;
    let (c2, r2) = match class {
        StrandClass::H => (c + 1, r),
        StrandClass::RH if r < s_i => (c + 1, r + 1),
        StrandClass::RH => (c + 1 + shift, 1),
        StrandClass::LH if r > 1 => (c + 1, r - 1),
        StrandClass::LH => (c + 1 + shift, s_i),
    };
    index(c2, r2, s).unwrap()
}

/// Previous node on the strand, or `None` at the strand head.
pub fn geo_prev(i: u64, class: StrandClass, params: &CodeParams) -> Option<u64> {
    let (s, shift) = (params.s() as u64, params.p() as i64 - params.s() as i64);
    let (c, r) = coords(i, s);
    let s_i = s as i64;
    let (c2, r2) = match class {
        StrandClass::H => (c - 1, r),
        StrandClass::RH if r > 1 => (c - 1, r - 1),
        StrandClass::RH => (c - 1 - shift, s_i),
        StrandClass::LH if r < s_i => (c - 1, r + 1),
        StrandClass::LH => (c - 1 - shift, 1),
    };
    index(c2, r2, s)
}

pub fn edge(from: u64, to: u64, class: StrandClass) -> BlockId {
    BlockId::Edge { from, to, class }
}

/// Blocks of a lattice with nodes `1..=n`, as the reference model sees it.
pub fn model_blocks(n: u64, params: &CodeParams) -> Vec<BlockId> {
    let mut out = Vec::new();
    for i in 1..=n {
        out.push(BlockId::Node(i));
        for &class in params.classes() {
            out.push(edge(i, geo_next(i, class, params), class));
        }
    }
    out
}

/// Fixpoint of pairwise XOR repair over a lattice of `n` nodes. Returns the
/// blocks that stay missing.
pub fn peel(n: u64, params: &CodeParams, erased: &BTreeSet<BlockId>) -> BTreeSet<BlockId> {
    let mut missing = erased.clone();
    let up = |id: &BlockId, missing: &BTreeSet<BlockId>| -> bool {
        match *id {
            BlockId::Node(i) => (1..=n).contains(&i) && !missing.contains(id),
            BlockId::Edge { from, .. } => (1..=n).contains(&from) && !missing.contains(id),
        }
    };
    // input parity of a node, `None` meaning the zero head
    let input = |i: u64, class| geo_prev(i, class, params).map(|h| edge(h, i, class));
    loop {
        let mut fixed = Vec::new();
        for id in &missing {
            let ok = match *id {
                BlockId::Node(i) => params.classes().iter().any(|&class| {
                    let out = edge(i, geo_next(i, class, params), class);
                    input(i, class).is_none_or(|e| up(&e, &missing)) && up(&out, &missing)
                }),
                BlockId::Edge { from, to, class } => {
                    let lower =
                        up(&BlockId::Node(from), &missing) && input(from, class).is_none_or(|e| up(&e, &missing));
                    let upper =
                        up(&BlockId::Node(to), &missing) && up(&edge(to, geo_next(to, class, params), class), &missing);
                    lower || upper
                }
            };
            if ok {
                fixed.push(*id);
            }
        }
        if fixed.is_empty() {
            return missing;
        }
        for id in fixed {
            missing.remove(&id);
        }
    }
}

/// Entangle `n` random blocks and return the filled store with the encoder output.
pub fn random_store(params: CodeParams, n: u64, block_size: usize, seed: u64) -> (BlockStore, Vec<Entangled>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut enc = Entangler::new(params, block_size);
    let mut store = BlockStore::new(params, block_size);
    let mut all = Vec::new();
    for _ in 0..n {
        let mut bytes = vec![0u8; block_size];
        rng.fill_bytes(&mut bytes);
        let out = enc.entangle(Payload::from(bytes)).unwrap();
        store.insert(&out).unwrap();
        all.push(out);
    }
    (store, all)
}

/// Original payload of any block produced by the encoder.
pub fn original<'a>(blocks: &'a [Entangled], id: &BlockId) -> &'a [u8] {
    let i = id.min_index() as usize;
    let out = &blocks[i - 1];
    match id {
        BlockId::Node(_) => out.data.as_bytes(),
        _ => out.parities.iter().find(|(p, _)| p == id).unwrap().1.as_bytes(),
    }
}
