//! Which of `(−∞, −y)` and `(x, ∞)` plain SLE_κ reaches first, κ > 4.
//!
//! With `a = 2/κ` and `s = (y/x) / (y/x + 1)`,
//!
//! ```text
//! p = Γ(2 − 4a) / (Γ(2 − 2a) Γ(1 − 2a)) · s^{1−2a} · ₂F₁(2a, 1 − 2a; 2 − 2a; s)
//! ```
//!
//! is the probability that `x` is swallowed before `−y`, i.e. that the
//! curve reaches `(x, ∞)` first: for `y ≫ x` it tends to 1. The Monte Carlo
//! estimate is reported for the same event, with the complementary
//! fraction alongside.

use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::{member_seed, Check, Executor, Status, VerifyReport};
use crate::error::{Error, Result};
use crate::loewner::{BoundaryRace, Segment, SwallowOrder};
use crate::noise::{BrownianSource, SeededNoise};
use crate::special::{gamma, hyp2f1};

pub fn hitting_probability_formula(kappa: f64, x: f64, y: f64) -> Result<f64> {
    if !(kappa > 4.0) || !kappa.is_finite() {
        return Err(Error::KappaOutOfRange(kappa));
    }
    if !(x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite()) {
        return Err(Error::InvalidArgument("x and y must be positive".into()));
    }
    let a = 2.0 / kappa;
    let r = y / x;
    let s = r / (r + 1.0);
    let prefactor = gamma(2.0 - 4.0 * a) / (gamma(2.0 - 2.0 * a) * gamma(1.0 - 2.0 * a));
    Ok(prefactor * s.powf(1.0 - 2.0 * a) * hyp2f1(2.0 * a, 1.0 - 2.0 * a, 2.0 - 2.0 * a, s)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HittingOptions {
    /// Capacity-time horizon of each path.
    pub t_max: f64,
    /// Step size while the nearer point is at its initial distance.
    pub dt: f64,
    /// A point counts as swallowed once `|g − W|` falls below this fraction
    /// of `g(x) − g(−y)`.
    pub stop_ratio: f64,
    /// Largest undecided fraction before the run is inconclusive.
    pub undecided_limit: f64,
    pub se_gate: f64,
}

impl Default for HittingOptions {
    fn default() -> Self {
        HittingOptions {
            t_max: 1e4,
            dt: 1e-3,
            stop_ratio: 1e-6,
            undecided_limit: 0.01,
            se_gate: 3.0,
        }
    }
}

/// One swallowing race on a plain driver generated on the fly.
///
/// The race is scale invariant, so the step follows the distance `m` from
/// the driver to the nearer of the two flowed points: `h = dt (m / m_0)²`.
/// Every step then resolves the same relative geometry, close encounters
/// are followed down to `stop_ratio`, and long excursions cost only a
/// logarithmic number of steps.
pub fn race_adaptive(kappa: f64, x: f64, y: f64, seed: u64, opts: &HittingOptions) -> SwallowOrder {
    let mut noise = SeededNoise::new(seed);
    let m0 = x.min(y);
    let mut race = BoundaryRace::new(x, y);
    let (mut t, mut w) = (0.0, 0.0);
    let mut k = 0u64;
    while t < opts.t_max {
        let m = (race.right - w).min(w - race.left);
        let h = (opts.dt * (m / m0).powi(2)).min(opts.t_max - t);
        let w1 = w + (kappa * h).sqrt() * noise.step_normal(k);
        k += 1;
        let seg = Segment {
            t0: t,
            t1: t + h,
            w0: w,
            w1,
        };
        if let Some(order) = race.advance(&seg, opts.stop_ratio * (race.right - race.left)) {
            return order;
        }
        t += h;
        w = w1;
    }
    SwallowOrder::Neither
}

/// Monte Carlo estimate of the probability that `x` is swallowed first,
/// gated against the formula.
pub fn hitting_probability_mc<E: Executor>(
    kappa: f64,
    x: f64,
    y: f64,
    n: usize,
    seed: u64,
    opts: &HittingOptions,
    exec: &E,
) -> Result<VerifyReport> {
    let formula = hitting_probability_formula(kappa, x, y)?;
    let orders = exec.map_indexed(n, |i| race_adaptive(kappa, x, y, member_seed(seed, i), opts));
    let (mut right, mut left) = (0usize, 0usize);
    for o in &orders {
        match o {
            SwallowOrder::RightFirst { .. } => right += 1,
            SwallowOrder::LeftFirst { .. } => left += 1,
            SwallowOrder::Neither => {}
        }
    }
    let decided = (right + left) as f64;
    let p = right as f64 / decided;
    let se = (p * (1.0 - p) / decided).sqrt();
    let undecided = 1.0 - decided / n as f64;
    let mut undecided_check = Check::at_most("undecided fraction", undecided, opts.undecided_limit);
    if undecided_check.status != Status::Pass {
        undecided_check.status = Status::Inconclusive;
    }
    let checks = alloc::vec![
        Check::within_se("P(x swallowed first)", p, formula, se, opts.se_gate),
        undecided_check,
    ];
    Ok(VerifyReport::from_checks("hitting-mc", n as u64, Some(seed), checks)
        .note("formula", formula)
        .note("p_left_first", left as f64 / decided)
        .note("right_first", right as f64)
        .note("left_first", left as f64))
}
