use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;

use aecode::sim::{self, summarize, sweep, SummaryRow, SweepConfig};
use aecode::Scheme;
use anyhow::{bail, Context, Result};

use crate::SimulateArgs;

type Metric = fn(&SummaryRow) -> (f64, f64);

fn schemes(args: &SimulateArgs) -> Result<Vec<Scheme>> {
    let mut schemes = Vec::new();
    if args.code.is_set() {
        schemes.push(Scheme::Ae(args.code.params()?));
    }
    if let Some(rs) = &args.rs {
        schemes.push(format!("RS({rs})").parse()?);
    }
    if let Some(n) = args.replicas {
        schemes.push(format!("{n}-way").parse()?);
    }
    for name in &args.scheme {
        schemes.push(name.parse()?);
    }
    if schemes.is_empty() {
        schemes = Scheme::evaluation_set();
        for n in 2..=4 {
            schemes.push(format!("{n}-way").parse()?);
        }
    }
    Ok(schemes)
}

pub fn simulate(args: SimulateArgs) -> Result<()> {
    let schemes = schemes(&args)?;
    if let Some(bad) = args.fractions.iter().find(|f| !(0.0..=100.0).contains(*f)) {
        bail!("fraction {bad}% outside 0..100");
    }
    let fractions: Vec<f64> = args.fractions.iter().map(|f| f / 100.0).collect();
    if args.seeds.is_empty() {
        bail!("need at least one seed");
    }
    let config = SweepConfig {
        data_blocks: if args.full_scale {
            sim::FULL_BLOCKS
        } else {
            args.blocks
        },
        locations: args.locations,
        maintenance: args.maintenance.into(),
        order: args.rounds.into(),
    };
    let rows = sweep(&schemes, &fractions, &args.seeds, config)?;
    if let Some(path) = &args.out {
        let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        sim::write_csv(&rows, BufWriter::new(file), args.timings)?;
    }
    let summary = summarize(&rows);
    println!(
        "{} data blocks, {} locations, {} seeds, {:?} maintenance\n",
        config.data_blocks,
        config.locations,
        args.seeds.len(),
        config.maintenance
    );
    let tables: [(&str, &str, Metric, bool); 4] = [
        (
            "data loss (data blocks not repaired)",
            "data_loss",
            |r| r.data_loss,
            false,
        ),
        (
            "vulnerable data (data blocks without live redundancy)",
            "vulnerable",
            |r| r.vulnerable,
            false,
        ),
        (
            "single-failure repairs / data repaired",
            "sf_fraction",
            |r| r.sf_fraction,
            false,
        ),
        ("rounds to repair all data blocks", "rounds", |r| r.rounds, true),
    ];
    for (title, file, metric, ae_only) in tables {
        let shown: Vec<Scheme> = schemes
            .iter()
            .copied()
            .filter(|s| !ae_only || matches!(s, Scheme::Ae(_)))
            .collect();
        if shown.is_empty() {
            continue;
        }
        print!("{}", table(title, &shown, &fractions, &summary, metric));
        if let Some(dir) = &args.data_dir {
            write_dat(dir, file, &shown, &fractions, &summary, metric)?;
        }
    }
    Ok(())
}

fn lookup(summary: &[SummaryRow], scheme: Scheme, fraction: f64) -> &SummaryRow {
    summary
        .iter()
        .find(|r| r.scheme == scheme && r.fraction == fraction)
        .expect("every scheme and fraction was simulated")
}

fn table(title: &str, schemes: &[Scheme], fractions: &[f64], summary: &[SummaryRow], metric: Metric) -> String {
    let mut out = format!("{title}\n{:<12}", "scheme");
    for f in fractions {
        let _ = write!(out, "{:>20}", format!("{:.0}%", f * 100.0));
    }
    out.push('\n');
    for &scheme in schemes {
        let _ = write!(out, "{:<12}", scheme.to_string());
        for &f in fractions {
            let (mean, sd) = metric(lookup(summary, scheme, f));
            let cell = if mean.abs() < 10.0 {
                format!("{mean:.3} ±{sd:.3}")
            } else {
                format!("{mean:.1} ±{sd:.1}")
            };
            let _ = write!(out, "{cell:>20}");
        }
        out.push('\n');
    }
    out.push('\n');
    out
}

/// Whitespace-separated table: the failed percentage, then mean and standard
/// deviation for each scheme.
fn write_dat(
    dir: &Path,
    name: &str,
    schemes: &[Scheme],
    fractions: &[f64],
    summary: &[SummaryRow],
    metric: Metric,
) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut text = String::from("# percent");
    for s in schemes {
        let _ = write!(text, " {s} {s}_sd");
    }
    text.push('\n');
    for &f in fractions {
        let _ = write!(text, "{:.0}", f * 100.0);
        for &s in schemes {
            let (mean, sd) = metric(lookup(summary, s, f));
            let _ = write!(text, " {mean:.6} {sd:.6}");
        }
        text.push('\n');
    }
    let path = dir.join(format!("{name}.dat"));
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}
