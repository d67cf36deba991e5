//! Disaster-recovery simulation: random placement of every encoded block over
//! `n` locations, failure of a fraction of the locations, and repair with the
//! scheme's own decoder.

mod placement;
mod report;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use thiserror::Error;

use crate::baselines::{self, BaselineError, Outcome, Replication, RsCode};
use crate::codec::{BlockStore, Maintenance, RoundOrder, RoundStats, DEFAULT_MAX_ROUNDS};
use crate::lattice::{CodeParams, ParamError};

pub use placement::{mean_stdev, place, Disaster, Placement, DISASTER_STREAM, PLACEMENT_STREAM};
pub use report::{summarize, sweep, write_csv, SummaryRow, SweepConfig, CSV_HEADER};

/// Data blocks per scenario at desk scale.
pub const DESK_BLOCKS: u64 = 100_000;
/// Data blocks per scenario at the full evaluation scale.
pub const FULL_BLOCKS: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("need at least 2 locations, got {0}")]
    TooFewLocations(u32),
    #[error("failure fraction {0} outside [0, 1]")]
    BadFraction(f64),
    #[error("unknown scheme {0:?}")]
    UnknownScheme(String),
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error(transparent)]
    Baseline(#[from] BaselineError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    Ae(CodeParams),
    Rs(RsCode),
    Replication(Replication),
}

impl Scheme {
    /// Encoded blocks placed for `data_blocks` data blocks.
    pub fn placed_blocks(&self, data_blocks: u64) -> usize {
        match self {
            Scheme::Ae(params) => data_blocks as usize * params.blocks_per_node(),
            Scheme::Rs(code) => baselines::rs_layout(data_blocks, *code).placed_blocks(),
            Scheme::Replication(r) => data_blocks as usize * r.copies() as usize,
        }
    }

    pub fn overhead_percent(&self) -> f64 {
        match self {
            Scheme::Ae(params) => params.overhead_percent() as f64,
            Scheme::Rs(code) => code.overhead_percent(),
            Scheme::Replication(r) => r.overhead_percent(),
        }
    }

    /// Blocks read to repair one isolated failure.
    pub fn single_failure_reads(&self) -> u32 {
        match self {
            Scheme::Ae(_) => 2,
            Scheme::Rs(code) => code.single_failure_reads(),
            Scheme::Replication(_) => 1,
        }
    }

    /// The seven schemes compared in the evaluation, in table order.
    pub fn evaluation_set() -> Vec<Scheme> {
        [
            "RS(10,4)",
            "RS(8,2)",
            "RS(5,5)",
            "RS(4,12)",
            "AE(1,-,-)",
            "AE(2,2,5)",
            "AE(3,2,5)",
        ]
        .iter()
        .map(|s| s.parse().expect("valid scheme"))
        .collect()
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scheme::Ae(params) => params.fmt(f),
            Scheme::Rs(code) => code.fmt(f),
            Scheme::Replication(r) => r.fmt(f),
        }
    }
}

impl FromStr for Scheme {
    type Err = SimError;

    /// Accepts `AE(3,2,5)`, `RS(10,4)` and `3-way` (or `rep3`).
    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let t = text.trim();
        let unknown = || SimError::UnknownScheme(text.to_string());
        if t.starts_with("AE(") || t.starts_with("ae(") {
            return Ok(Scheme::Ae(t.parse()?));
        }
        if let Some(inner) = t
            .strip_prefix("RS(")
            .or_else(|| t.strip_prefix("rs("))
            .and_then(|r| r.strip_suffix(')'))
        {
            let (k, m) = inner.split_once(',').ok_or_else(unknown)?;
            let k = k.trim().parse().map_err(|_| unknown())?;
            let m = m.trim().parse().map_err(|_| unknown())?;
            return Ok(Scheme::Rs(RsCode::new(k, m)?));
        }
        let copies = t
            .strip_suffix("-way")
            .or_else(|| t.strip_prefix("rep"))
            .ok_or_else(unknown)?;
        let copies = copies.parse().map_err(|_| unknown())?;
        Ok(Scheme::Replication(Replication::new(copies)?))
    }
}

/// One disaster: a scheme, a data volume, a location count, a failed fraction
/// and a seed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    pub scheme: Scheme,
    pub data_blocks: u64,
    pub locations: u32,
    pub fraction: f64,
    pub seed: u64,
    pub maintenance: Maintenance,
    /// Round semantics of the AE decoder.
    pub order: RoundOrder,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioMetrics {
    pub scenario: Scenario,
    pub outcome: Outcome,
    /// Per-round repair counts of the AE decoder; a single round for the
    /// baselines when anything was repaired.
    pub rounds: Vec<RoundStats>,
    /// Rounds needed until the last data block was repaired.
    pub data_rounds: usize,
    pub wall_time_ms: u128,
}

impl ScenarioMetrics {
    pub fn data_loss(&self) -> u64 {
        self.outcome.lost_data
    }

    pub fn vulnerable(&self) -> u64 {
        self.outcome.vulnerable_data
    }

    pub fn sf_fraction(&self) -> f64 {
        self.outcome.single_failure_fraction()
    }
}

pub fn run_scenario(scenario: &Scenario) -> Result<ScenarioMetrics, SimError> {
    let start = Instant::now();
    let blocks = scenario.scheme.placed_blocks(scenario.data_blocks);
    let placement = place(blocks, scenario.locations, scenario.seed)?;
    let disaster = Disaster::inject(scenario.locations, scenario.fraction, scenario.seed)?;
    let (outcome, rounds) = match scenario.scheme {
        Scheme::Ae(params) => run_ae(params, scenario, placement, &disaster),
        Scheme::Rs(code) => {
            let layout = baselines::rs_layout(scenario.data_blocks, code);
            let available = disaster.availability(placement.locations());
            let outcome = baselines::rs_repair(&layout, &available, scenario.maintenance);
            let rounds = baseline_rounds(&outcome);
            (outcome, rounds)
        }
        Scheme::Replication(r) => {
            let available = disaster.availability(placement.locations());
            let outcome = baselines::replication_repair(r, scenario.data_blocks, &available, scenario.maintenance);
            let rounds = baseline_rounds(&outcome);
            (outcome, rounds)
        }
    };
    let data_rounds = rounds.iter().rposition(|r| r.data > 0).map_or(0, |i| i + 1);
    Ok(ScenarioMetrics {
        scenario: *scenario,
        outcome,
        rounds,
        data_rounds,
        wall_time_ms: start.elapsed().as_millis(),
    })
}

fn run_ae(
    params: CodeParams,
    scenario: &Scenario,
    placement: Placement,
    disaster: &Disaster,
) -> (Outcome, Vec<RoundStats>) {
    let mut store = BlockStore::availability_only(params, scenario.data_blocks);
    store.set_locations(placement.into_locations());
    store.fail_locations(&disaster.failed);
    let missing_data = |store: &BlockStore| store.unavailable().filter(|id| id.is_node()).count() as u64;
    let unavailable_data = missing_data(&store);
    let report = store.repair_all_ordered(scenario.maintenance, scenario.order, DEFAULT_MAX_ROUNDS);
    let mut rounds = report.rounds;
    if rounds.last().is_some_and(|r| r.total() == 0) {
        rounds.pop();
    }
    let single_reads: usize = rounds.iter().map(|r| r.single_reads).sum();
    let double_reads: usize = rounds.iter().map(|r| r.double_reads).sum();
    let mut outcome = Outcome {
        unavailable_data,
        recovered_data: rounds.iter().map(|r| r.data as u64).sum(),
        lost_data: missing_data(&store),
        vulnerable_data: store.unprotected_nodes().count() as u64,
        single_failures: rounds.first().map_or(0, |r| r.data as u64),
        repaired_parities: rounds.iter().map(|r| r.parity as u64).sum(),
        ..Outcome::default()
    };
    for (reads, count) in [(1, single_reads), (2, double_reads)] {
        if count > 0 {
            outcome.reads.insert(reads, count as u64);
        }
    }
    (outcome, rounds)
}

fn baseline_rounds(outcome: &Outcome) -> Vec<RoundStats> {
    if outcome.recovered_data + outcome.repaired_parities == 0 {
        return Vec::new();
    }
    vec![RoundStats {
        data: outcome.recovered_data as usize,
        parity: outcome.repaired_parities as usize,
        ..RoundStats::default()
    }]
}
