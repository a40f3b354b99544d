//! Metric Brownian motion against the SLE(κ, ρ) system.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{member_seed, Check, EnsembleStats, Executor, Status, VerifyReport};
use crate::driving::{
    metric_coefficients, rescale_to_rho_time, rho_coefficients, simulate_driver_with, simulate_metric_driver_with,
    DriverOptions, MetricOptions,
};
use crate::error::Result;
use crate::geometry::PrevertexConfig;
use crate::noise::SeededNoise;
use crate::scmap::{QuadratureSettings, ScFamily};

/// Random states `(W, Z)` with the sign pattern of `cfg`: the prevertices
/// are rescaled by a common random factor and jittered by up to a tenth of
/// the smallest gap, and `W` is drawn from the middle 80% of the gap around 0.
pub fn random_states(cfg: &PrevertexConfig, count: usize, seed: u64) -> Vec<(f64, Vec<f64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z0 = cfg.prevertices();
    let mut pts = z0.to_vec();
    pts.push(0.0);
    pts.sort_by(f64::total_cmp);
    let gap = pts.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    (0..count)
        .map(|_| {
            let scale: f64 = rng.random_range(0.5..2.0);
            let z: Vec<f64> = z0
                .iter()
                .map(|&zk| scale * zk + 0.1 * scale * gap * rng.random_range(-1.0..1.0))
                .collect();
            let left = z.iter().copied().rev().find(|&v| v < 0.0).unwrap_or(-1.0);
            let right = z.iter().copied().find(|&v| v > 0.0).unwrap_or(1.0);
            let u: f64 = rng.random_range(0.1..0.9);
            (left + u * (right - left), z)
        })
        .collect()
}

/// Largest residual between the time-changed metric coefficients and the
/// SLE(κ, ρ) coefficients over the given states.
pub fn coefficient_identity_check(cfg: &PrevertexConfig, states: &[(f64, Vec<f64>)], drift_sign: f64) -> Result<f64> {
    let family = ScFamily::new(cfg.betas(), QuadratureSettings::default())?;
    let mut worst: f64 = 0.0;
    for (w, z) in states {
        let (metric, rate) = metric_coefficients(&family, cfg.kappa(), *w, z, drift_sign)?;
        let target = rho_coefficients(cfg, *w, z);
        worst = worst.max(metric.time_changed(rate).residual(&target));
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricTestOptions {
    pub drift_sign: f64,
    /// Shared by both simulators; `None` means `10 √(κ dt)`.
    pub collision_tol: Option<f64>,
    /// Metric step; `None` means `κ m₀² dt` with `m₀ = |SC'(0)|` at time 0.
    pub ds: Option<f64>,
    /// Metric-time cap; `None` means `50 κ m₀² t`.
    pub s_max: Option<f64>,
    /// Number of random states for the coefficient identity.
    pub states: usize,
    pub se_gate: f64,
}

impl Default for MetricTestOptions {
    fn default() -> Self {
        MetricTestOptions {
            drift_sign: 1.0,
            collision_tol: None,
            ds: None,
            s_max: None,
            states: 100,
            se_gate: 3.0,
        }
    }
}

/// (i) coefficient identity at random states; (ii) first four moments of
/// `W` at capacity time `t` (stopped at `σ`) from the SLE(κ, ρ) stepper and
/// from the time-changed metric system, as a two-sample comparison.
///
/// Member `i` uses seed `seed + i` for the SLE(κ, ρ) path and
/// `seed + n + i` for the metric path.
pub fn metric_equivalence_test<E: Executor>(
    cfg: &PrevertexConfig,
    t: f64,
    dt: f64,
    n: usize,
    seed: u64,
    opts: &MetricTestOptions,
    exec: &E,
) -> Result<VerifyReport> {
    let kappa = cfg.kappa();
    let states = random_states(cfg, opts.states, seed);
    let identity = coefficient_identity_check(cfg, &states, opts.drift_sign)?;

    let tol = opts.collision_tol.unwrap_or_else(|| 10.0 * (kappa * dt).sqrt());
    let m0 = ScFamily::new(cfg.betas(), QuadratureSettings::default())?
        .evaluator(cfg.prevertices())
        .sc_deriv(num_complex::Complex64::new(0.0, 0.0))?
        .norm();
    let rate = kappa * m0 * m0;
    let ds = opts.ds.unwrap_or(rate * dt);
    let s_max = opts.s_max.unwrap_or(50.0 * rate * t);
    let cap_opts = DriverOptions {
        collision_tol: Some(tol),
        track_correction: false,
        ..DriverOptions::default()
    };
    let met_opts = MetricOptions {
        collision_tol: Some(tol),
        clock_limit: Some(t),
        ..MetricOptions::default()
    };
    let samples = exec.map_indexed(n, |i| -> Result<(f64, Option<f64>)> {
        let s1 = member_seed(seed, i);
        let cap = simulate_driver_with(cfg, t, dt, s1, &mut SeededNoise::new(s1), &cap_opts)?;
        let w_cap = cap.states[cap.states.len() - 1].w;
        let s2 = member_seed(seed, n + i);
        let met = simulate_metric_driver_with(cfg, s_max, ds, s2, opts.drift_sign, &mut SeededNoise::new(s2), &met_opts)?;
        let resc = rescale_to_rho_time(&met)?;
        let w_met = if resc.end_time() >= t {
            Some(resc.driver_at(t)?)
        } else if resc.sigma.is_some() {
            Some(resc.states[resc.states.len() - 1].w)
        } else {
            None
        };
        Ok((w_cap, w_met))
    });
    let mut cap_moments = vec![EnsembleStats::new(); 4];
    let mut met_moments = vec![EnsembleStats::new(); 4];
    let mut short = 0usize;
    for s in samples {
        let (a, b) = s?;
        for (k, st) in cap_moments.iter_mut().enumerate() {
            st.push(a.powi(k as i32 + 1));
        }
        match b {
            Some(b) => {
                for (k, st) in met_moments.iter_mut().enumerate() {
                    st.push(b.powi(k as i32 + 1));
                }
            }
            None => short += 1,
        }
    }
    let mut checks = vec![Check::at_most("coefficient identity residual", identity, 1e-12)];
    for k in 0..4 {
        let (a, b) = (&cap_moments[k], &met_moments[k]);
        let se = (a.se().powi(2) + b.se().powi(2)).sqrt();
        let name = ["E[W]", "E[W^2]", "E[W^3]", "E[W^4]"][k];
        checks.push(Check::within_se(name, b.mean, a.mean, se, opts.se_gate));
    }
    let short_fraction = short as f64 / n as f64;
    let mut short_check = Check::at_most("metric paths short of t", short_fraction, 0.01);
    if short_check.status != Status::Pass {
        short_check.status = Status::Inconclusive;
    }
    checks.push(short_check);
    let mut report = VerifyReport::from_checks("metric-equivalence", n as u64, Some(seed), checks);
    report.notes.insert("t".into(), t);
    report.notes.insert("kappa_t".into(), kappa * t);
    Ok(report)
}
