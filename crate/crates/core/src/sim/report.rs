use std::io::Write;

use rayon::prelude::*;

use super::{mean_stdev, run_scenario, Scenario, ScenarioMetrics, Scheme, SimError};
use crate::codec::{Maintenance, RoundOrder};

pub const CSV_HEADER: [&str; 14] = [
    "scheme",
    "alpha",
    "s",
    "p",
    "k",
    "m",
    "n_locations",
    "fraction",
    "seed",
    "data_loss",
    "vulnerable",
    "sf_fraction",
    "rounds",
    "wall_time_ms",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SweepConfig {
    pub data_blocks: u64,
    pub locations: u32,
    pub maintenance: Maintenance,
    pub order: RoundOrder,
}

/// Run the cross product of schemes, fractions and seeds. Rows come back in
/// scheme, fraction, seed order whatever the thread count.
pub fn sweep(
    schemes: &[Scheme],
    fractions: &[f64],
    seeds: &[u64],
    config: SweepConfig,
) -> Result<Vec<ScenarioMetrics>, SimError> {
    let mut scenarios = Vec::with_capacity(schemes.len() * fractions.len() * seeds.len());
    for &scheme in schemes {
        for &fraction in fractions {
            for &seed in seeds {
                scenarios.push(Scenario {
                    scheme,
                    data_blocks: config.data_blocks,
                    locations: config.locations,
                    fraction,
                    seed,
                    maintenance: config.maintenance,
                    order: config.order,
                });
            }
        }
    }
    scenarios.par_iter().map(run_scenario).collect()
}

/// Write one CSV row per scenario. Wall times are left empty unless
/// `timings` is set, so that reruns with the same seeds give identical files.
pub fn write_csv<W: Write>(rows: &[ScenarioMetrics], out: W, timings: bool) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for row in rows {
        let sc = &row.scenario;
        let (ae, km) = match sc.scheme {
            Scheme::Ae(p) => (
                [p.alpha().to_string(), p.s().to_string(), p.p().to_string()],
                [String::new(), String::new()],
            ),
            Scheme::Rs(c) => (Default::default(), [c.k().to_string(), c.m().to_string()]),
            Scheme::Replication(r) => (Default::default(), ["1".to_string(), (r.copies() - 1).to_string()]),
        };
        let wall = if timings {
            row.wall_time_ms.to_string()
        } else {
            String::new()
        };
        w.write_record([
            sc.scheme.to_string(),
            ae[0].clone(),
            ae[1].clone(),
            ae[2].clone(),
            km[0].clone(),
            km[1].clone(),
            sc.locations.to_string(),
            format!("{:.2}", sc.fraction),
            sc.seed.to_string(),
            row.data_loss().to_string(),
            row.vulnerable().to_string(),
            format!("{:.6}", row.sf_fraction()),
            row.data_rounds.to_string(),
            wall,
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Mean and standard deviation over seeds for one scheme and fraction.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub scheme: Scheme,
    pub fraction: f64,
    pub seeds: usize,
    pub data_loss: (f64, f64),
    pub vulnerable: (f64, f64),
    pub sf_fraction: (f64, f64),
    pub rounds: (f64, f64),
}

/// Group rows by scheme and fraction, keeping first-seen order.
pub fn summarize(rows: &[ScenarioMetrics]) -> Vec<SummaryRow> {
    let mut keys: Vec<(Scheme, f64)> = Vec::new();
    for row in rows {
        let key = (row.scenario.scheme, row.scenario.fraction);
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.into_iter()
        .map(|(scheme, fraction)| {
            let group: Vec<&ScenarioMetrics> = rows
                .iter()
                .filter(|r| r.scenario.scheme == scheme && r.scenario.fraction == fraction)
                .collect();
            let stat = |f: &dyn Fn(&ScenarioMetrics) -> f64| mean_stdev(group.iter().map(|r| f(r)));
            SummaryRow {
                scheme,
                fraction,
                seeds: group.len(),
                data_loss: stat(&|r| r.data_loss() as f64),
                vulnerable: stat(&|r| r.vulnerable() as f64),
                sf_fraction: stat(&|r| r.sf_fraction()),
                rounds: stat(&|r| r.data_rounds as f64),
            }
        })
        .collect()
}
