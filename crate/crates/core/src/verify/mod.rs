//! Monte Carlo and deterministic checks of the analytic identities.
//!
//! Ensembles are run through an [`Executor`], which only has to return
//! per-member results in index order; statistics are then merged
//! sequentially, so the numbers do not depend on how members were scheduled.
//! Member `i` of an ensemble with base seed `s` uses seed `s + i`
//! (wrapping), which makes any single path replayable on its own.

mod hitting;
mod martingale;
mod metric;
mod oracles;
mod stats;
mod theorem;

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

pub use crate::special::{gamma, hyp2f1};
pub use hitting::{hitting_probability_formula, hitting_probability_mc, race_adaptive, HittingOptions};
pub use martingale::{
    martingale_observable, martingale_test, normalized_increments, qv_ensemble, qv_test, MartingaleOptions, QvResult,
    TimeChange,
};
pub use metric::{coefficient_identity_check, metric_equivalence_test, random_states, MetricTestOptions};
pub use oracles::{sc_oracle_suite, turning_and_straightness};
pub use stats::EnsembleStats;
pub use theorem::{theorem_rate_check, RateCheck};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Inconclusive,
    Fail,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::Inconclusive => 2,
        }
    }

    pub fn from_bool(ok: bool) -> Status {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    /// The worse of two outcomes; a failure outranks an inconclusive run.
    pub fn and(self, other: Status) -> Status {
        self.max(other)
    }
}

/// One gated quantity: passes iff `|value − target| ≤ threshold`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub target: f64,
    pub se: Option<f64>,
    pub threshold: f64,
    pub status: Status,
}

impl Check {
    pub fn new(name: &str, value: f64, target: f64, threshold: f64) -> Check {
        let ok = (value - target).abs() <= threshold;
        Check {
            name: name.into(),
            value,
            target,
            se: None,
            threshold,
            status: Status::from_bool(ok),
        }
    }

    /// Gate `|value − target| ≤ k · se`.
    pub fn within_se(name: &str, value: f64, target: f64, se: f64, k: f64) -> Check {
        let mut c = Check::new(name, value, target, k * se);
        c.se = Some(se);
        c
    }

    /// Gate `value ≤ bound`.
    pub fn at_most(name: &str, value: f64, bound: f64) -> Check {
        Check {
            name: name.into(),
            value,
            target: 0.0,
            se: None,
            threshold: bound,
            status: Status::from_bool(value <= bound),
        }
    }

    pub fn inconclusive(mut self) -> Check {
        if self.status == Status::Pass {
            self.status = Status::Inconclusive;
        }
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub test: String,
    pub status: Status,
    /// Ensemble size (paths or sample points).
    pub n: u64,
    /// Headline estimate with its standard error and gate.
    pub estimate: f64,
    pub se: Option<f64>,
    pub threshold: f64,
    pub base_seed: Option<u64>,
    pub checks: Vec<Check>,
    pub notes: BTreeMap<String, f64>,
}

impl VerifyReport {
    /// Report whose headline is the first check and whose status is the
    /// worst of all checks.
    pub fn from_checks(test: &str, n: u64, base_seed: Option<u64>, checks: Vec<Check>) -> VerifyReport {
        let status = checks.iter().fold(Status::Pass, |s, c| s.and(c.status));
        let head = checks.first();
        VerifyReport {
            test: test.into(),
            status,
            n,
            estimate: head.map_or(f64::NAN, |c| c.value),
            se: head.and_then(|c| c.se),
            threshold: head.map_or(f64::NAN, |c| c.threshold),
            base_seed,
            checks,
            notes: BTreeMap::new(),
        }
    }

    pub fn note(mut self, key: &str, value: f64) -> Self {
        self.notes.insert(key.into(), value);
        self
    }

    /// Force the status to inconclusive unless something already failed.
    pub fn mark_inconclusive(&mut self) {
        if self.status == Status::Pass {
            self.status = Status::Inconclusive;
        }
    }
}

/// Runs independent ensemble members.
pub trait Executor: Sync {
    /// Evaluate `job(0), …, job(count − 1)` and return them in index order.
    fn map_indexed<T, F>(&self, count: usize, job: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync;
}

/// Single-threaded executor.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn map_indexed<T, F>(&self, count: usize, job: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync,
    {
        (0..count).map(job).collect()
    }
}

/// Seed of ensemble member `index`.
pub fn member_seed(base: u64, index: usize) -> u64 {
    base.wrapping_add(index as u64)
}
