use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Fixed-width readout of a classical register: bit `i` is the `i`-th
/// character from the right.
pub fn bitstring(value: u64, width: usize) -> String {
    (0..width).rev().map(|i| if (value >> i) & 1 == 1 { '1' } else { '0' }).collect()
}

pub fn parse_bitstring(s: &str) -> Option<u64> {
    if s.is_empty() {
        return Some(0);
    }
    u64::from_str_radix(s, 2).ok()
}

/// Shot histogram over fixed-width bitstrings.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub num_bits: usize,
    pub shots: u64,
    pub counts: BTreeMap<String, u64>,
}

impl Counts {
    pub fn new(num_bits: usize) -> Self {
        Self { num_bits, shots: 0, counts: BTreeMap::new() }
    }

    pub fn from_outcomes(num_bits: usize, outcomes: impl IntoIterator<Item = u64>) -> Self {
        let mut c = Self::new(num_bits);
        for o in outcomes {
            c.record(o, 1);
        }
        c
    }

    pub fn record(&mut self, value: u64, n: u64) {
        *self.counts.entry(bitstring(value, self.num_bits)).or_insert(0) += n;
        self.shots += n;
    }

    pub fn get(&self, key: &str) -> u64 {
        self.counts.get(key).copied().unwrap_or(0)
    }

    /// Associative merge, used to reduce per-worker histograms.
    pub fn merge(mut self, other: &Counts) -> Counts {
        assert_eq!(self.num_bits, other.num_bits, "merging counts of different widths");
        for (k, v) in &other.counts {
            *self.counts.entry(k.clone()).or_insert(0) += v;
        }
        self.shots += other.shots;
        self
    }

    pub fn normalized(&self) -> BTreeMap<String, f64> {
        let total = self.shots.max(1) as f64;
        self.counts.iter().map(|(k, &v)| (k.clone(), v as f64 / total)).collect()
    }

    pub fn is_consistent(&self) -> bool {
        self.counts.values().sum::<u64>() == self.shots && self.counts.keys().all(|k| k.len() == self.num_bits)
    }
}

/// Exact outcome distribution over fixed-width bitstrings.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ExactDistribution {
    pub num_bits: usize,
    pub probs: BTreeMap<String, f64>,
}

impl ExactDistribution {
    pub fn new(num_bits: usize) -> Self {
        Self { num_bits, probs: BTreeMap::new() }
    }

    pub fn point_mass(num_bits: usize, value: u64) -> Self {
        let mut d = Self::new(num_bits);
        d.add(value, 1.0);
        d
    }

    pub fn add(&mut self, value: u64, p: f64) {
        *self.probs.entry(bitstring(value, self.num_bits)).or_insert(0.0) += p;
    }

    pub fn get(&self, key: &str) -> f64 {
        self.probs.get(key).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.probs.values().sum()
    }

    /// Drop entries below `eps`.
    pub fn pruned(mut self, eps: f64) -> Self {
        self.probs.retain(|_, p| *p > eps);
        self
    }

    /// Most likely outcome (first in key order on ties).
    pub fn mode(&self) -> Option<(&str, f64)> {
        self.probs
            .iter()
            .fold(None, |best: Option<(&str, f64)>, (k, &p)| match best {
                Some((_, bp)) if bp >= p => best,
                _ => Some((k.as_str(), p)),
            })
    }

    pub fn total_variation(&self, other: &ExactDistribution) -> f64 {
        let mut keys: Vec<&String> = self.probs.keys().chain(other.probs.keys()).collect();
        keys.sort();
        keys.dedup();
        0.5 * keys.iter().map(|k| (self.get(k) - other.get(k)).abs()).sum::<f64>()
    }

    pub fn is_valid(&self, tol: f64) -> bool {
        self.probs.values().all(|&p| p >= 0.0) && (self.total() - 1.0).abs() <= tol
    }
}
