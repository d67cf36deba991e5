use std::collections::BTreeMap;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::SimError;
use crate::baselines::RsLayout;

/// ChaCha stream used for block placement.
pub const PLACEMENT_STREAM: u64 = 0;
/// ChaCha stream used for choosing failed locations.
pub const DISASTER_STREAM: u64 = 1;

pub(crate) fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Independent uniform location for every block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Placement {
    locations: Vec<u32>,
    n: u32,
    seed: u64,
}

pub fn place(blocks: usize, n: u32, seed: u64) -> Result<Placement, SimError> {
    if n < 2 {
        return Err(SimError::TooFewLocations(n));
    }
    let mut rng = rng(seed, PLACEMENT_STREAM);
    let locations = (0..blocks).map(|_| rng.gen_range(0..n)).collect();
    Ok(Placement { locations, n, seed })
}

impl Placement {
    pub fn locations(&self) -> &[u32] {
        &self.locations
    }

    pub fn into_locations(self) -> Vec<u32> {
        self.locations
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn counts(&self) -> Vec<u64> {
        let mut counts = vec![0u64; self.n as usize];
        for &loc in &self.locations {
            counts[loc as usize] += 1;
        }
        counts
    }

    /// Mean and sample standard deviation of the blocks per location.
    pub fn count_stats(&self) -> (f64, f64) {
        mean_stdev(self.counts().iter().map(|&c| c as f64))
    }

    /// Number of stripes whose placed blocks landed on `d` distinct
    /// locations, keyed by `d`.
    pub fn stripe_spread(&self, layout: &RsLayout) -> BTreeMap<usize, u64> {
        let mut histogram = BTreeMap::new();
        let mut seen: Vec<u32> = Vec::new();
        for t in 0..layout.stripes() {
            let (start, len) = layout.stripe_span(t);
            seen.clear();
            seen.extend_from_slice(&self.locations[start..start + len]);
            seen.sort_unstable();
            seen.dedup();
            *histogram.entry(seen.len()).or_default() += 1;
        }
        histogram
    }
}

/// A set of failed locations.
#[derive(Debug, Clone, PartialEq)]
pub struct Disaster {
    pub failed: Vec<bool>,
    pub fraction: f64,
}

impl Disaster {
    /// Fail `round(fraction * n)` locations chosen uniformly.
    pub fn inject(n: u32, fraction: f64, seed: u64) -> Result<Self, SimError> {
        if !(0.0..=1.0).contains(&fraction) {
            return Err(SimError::BadFraction(fraction));
        }
        let count = (fraction * n as f64).round() as usize;
        let mut failed = vec![false; n as usize];
        for loc in index::sample(&mut rng(seed, DISASTER_STREAM), n as usize, count) {
            failed[loc] = true;
        }
        Ok(Self { failed, fraction })
    }

    pub fn failed_count(&self) -> usize {
        self.failed.iter().filter(|f| **f).count()
    }

    /// Availability of each block under this disaster.
    pub fn availability(&self, locations: &[u32]) -> Vec<bool> {
        locations.iter().map(|&loc| !self.failed[loc as usize]).collect()
    }
}

/// Mean and sample standard deviation; zero deviation for fewer than two values.
pub fn mean_stdev(values: impl IntoIterator<Item = f64>) -> (f64, f64) {
    let values: Vec<f64> = values.into_iter().collect();
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}
