use std::fs;

use aecode::codec::{load_store, save_store, BlockStore, Entangler, Payload, DEFAULT_MAX_ROUNDS};
use aecode::BlockId;
use anyhow::{bail, Context, Result};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{EncodeArgs, RepairArgs};

pub fn encode(args: EncodeArgs) -> Result<()> {
    let params = args.code.params()?;
    if args.block_size == 0 {
        bail!("block size must be positive");
    }
    let bytes = match (&args.input, args.synthetic) {
        (Some(path), None) => fs::read(path).with_context(|| format!("reading {}", path.display()))?,
        (None, Some(n)) => {
            let mut bytes = vec![0u8; n as usize * args.block_size];
            ChaCha8Rng::seed_from_u64(args.seed).fill_bytes(&mut bytes);
            bytes
        }
        _ => bail!("give either --input or --synthetic"),
    };
    let mut enc = Entangler::new(params, args.block_size);
    let mut store = BlockStore::new(params, args.block_size);
    for chunk in bytes.chunks(args.block_size) {
        let mut block = chunk.to_vec();
        block.resize(args.block_size, 0);
        store.insert(&enc.entangle(Payload::from(block))?)?;
    }
    let manifest = save_store(&args.out, &store, bytes.len() as u64)
        .with_context(|| format!("writing store {}", args.out.display()))?;
    let parities = store.len() as u64 - store.nodes();
    println!("code       {params}");
    println!(
        "data       {} blocks of {} bytes",
        manifest.counter, manifest.block_size
    );
    println!("parities   {parities}");
    println!("overhead   {}%", params.overhead_percent());
    println!("store      {}", args.out.display());
    Ok(())
}

pub fn repair(args: RepairArgs) -> Result<()> {
    let (manifest, mut store) =
        load_store(&args.store).with_context(|| format!("loading store {}", args.store.display()))?;
    let missing = store.unavailable().count();
    let report = store.repair_all(args.maintenance.into(), DEFAULT_MAX_ROUNDS);
    save_store(&args.store, &store, manifest.length)?;
    let lost: Vec<BlockId> = store.unavailable().filter(BlockId::is_node).collect();
    println!("missing    {missing} blocks");
    println!(
        "repaired   {} blocks ({} data) in {} rounds",
        report.repaired(),
        report.data_repaired(),
        report.data_rounds()
    );
    println!("still out  {}", store.unavailable().count());
    if !lost.is_empty() {
        let names: Vec<String> = lost.iter().take(10).map(ToString::to_string).collect();
        bail!("{} data blocks are unrecoverable: {}", lost.len(), names.join(" "));
    }
    if let Some(out) = &args.out {
        let mut bytes = Vec::with_capacity(manifest.counter as usize * manifest.block_size);
        for i in 1..=store.nodes() {
            bytes.extend_from_slice(store.payload(&BlockId::Node(i)).expect("all data repaired"));
        }
        bytes.truncate(manifest.length as usize);
        fs::write(out, &bytes).with_context(|| format!("writing {}", out.display()))?;
        println!("decoded    {} bytes to {}", bytes.len(), out.display());
    }
    Ok(())
}
