use std::fs::File;
use std::io::{self, BufWriter, Write};

use aecode::me::{me_row, write_csv, SearchLimits};
use aecode::CodeParams;
use anyhow::{bail, Context, Result};

use crate::AnalyzeArgs;

pub fn analyze(args: AnalyzeArgs) -> Result<()> {
    let mut codes: Vec<CodeParams> = Vec::new();
    if args.code.is_set() {
        codes.push(args.code.params()?);
    }
    for code in &args.grid {
        codes.push(code.parse()?);
    }
    if codes.is_empty() {
        bail!("no code given: use --code, --alpha/--s/--p or --grid");
    }
    let limits = SearchLimits {
        window: args.window,
        max_size: args.max_size,
        budget: args.budget,
    };
    let mut rows = Vec::new();
    for params in &codes {
        for &x in &args.x {
            let row = me_row(params, x, &limits)?;
            let size = row.result.as_ref().map_or("none".to_string(), |r| r.size.to_string());
            let note = if row.complete { "" } else { " (budget exhausted)" };
            eprintln!("{params} x={x}: |ME| = {size}{note}");
            rows.push(row);
        }
    }
    let out: Box<dyn Write> = match &args.out {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).with_context(|| format!("creating {}", path.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    };
    write_csv(&rows, out)?;
    Ok(())
}
