use alloc::collections::BTreeMap;
use alloc::string::String;

use num_traits::Float;
use serde::{Deserialize, Serialize};

/// Running mean and variance (Welford) with the pairwise merge of Chan et al.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStats {
    pub n: u64,
    pub mean: f64,
    /// Sum of squared deviations from the mean.
    pub m2: f64,
    /// Named auxiliary quantities (higher moments, counts, fractions).
    pub extra: BTreeMap<String, f64>,
}

impl Default for EnsembleStats {
    fn default() -> Self {
        EnsembleStats {
            n: 0,
            mean: 0.0,
            m2: 0.0,
            extra: BTreeMap::new(),
        }
    }
}

impl EnsembleStats {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_values<I: IntoIterator<Item = f64>>(values: I) -> Self {
        let mut s = Self::new();
        for v in values {
            s.push(v);
        }
        s
    }

    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    /// Combine with the statistics of a disjoint sample. Auxiliary entries
    /// are not merged.
    pub fn merge(&mut self, other: &EnsembleStats) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            self.n = other.n;
            self.mean = other.mean;
            self.m2 = other.m2;
            return;
        }
        let (na, nb) = (self.n as f64, other.n as f64);
        let n = na + nb;
        let delta = other.mean - self.mean;
        self.mean += delta * nb / n;
        self.m2 += other.m2 + delta * delta * na * nb / n;
        self.n += other.n;
    }

    /// Sample variance (denominator `n − 1`).
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            return f64::NAN;
        }
        self.m2 / (self.n - 1) as f64
    }

    pub fn sd(&self) -> f64 {
        self.variance().sqrt()
    }

    /// Standard error of the mean, `sd / √n`.
    pub fn se(&self) -> f64 {
        self.sd() / (self.n as f64).sqrt()
    }

    pub fn with_extra(mut self, key: &str, value: f64) -> Self {
        self.extra.insert(key.into(), value);
        self
    }
}
