//! `U_t = f_t(W_t)` as a martingale and its clock `A_t`.
//!
//! With the normalization `a = 1` the side of the polygon through the
//! basepoint need not be horizontal: on the prevertex gap around 0 the
//! derivative `SC'` has a fixed phase, and so do `SC_t(W_t)` and the rate
//! of `D_t`. The statistics below use the real coordinate of `U` along that
//! direction; `A_t` is accordingly `κ ∫ |SC'|²`.

use alloc::vec::Vec;

use num_complex::Complex64;
use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::{member_seed, Check, EnsembleStats, Executor, VerifyReport};
use crate::driving::{simulate_driver_with, DriverOptions, DrivingPath};
use crate::error::{Error, Result};
use crate::geometry::PrevertexConfig;
use crate::noise::SeededNoise;
use crate::scmap::{CorrectedMap, ScFamily};

type C = Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MartingaleOptions {
    pub driver: DriverOptions,
    /// Largest fraction of paths with `σ ≤ T` before the run is inconclusive.
    pub attrition_limit: f64,
    /// Gate multiplier on the standard error.
    pub se_gate: f64,
}

impl Default for MartingaleOptions {
    fn default() -> Self {
        MartingaleOptions {
            driver: DriverOptions::default(),
            attrition_limit: 0.2,
            se_gate: 3.5,
        }
    }
}

fn family_of(path: &DrivingPath) -> Result<Option<ScFamily>> {
    if !path.tracks_correction {
        return Err(Error::InvalidArgument("path does not carry the drift correction".into()));
    }
    match &path.config {
        Some(cfg) => Ok(Some(ScFamily::new(cfg.betas(), path_quadrature())?)),
        None => Ok(None),
    }
}

fn path_quadrature() -> crate::scmap::QuadratureSettings {
    crate::scmap::QuadratureSettings::default()
}

/// Unit direction of the base side of the polygon.
fn base_phase(path: &DrivingPath, family: Option<&ScFamily>) -> C {
    match (family, path.states.first()) {
        (Some(f), Some(s)) => f.evaluator(&s.z).base_phase(),
        _ => C::new(1.0, 0.0),
    }
}

/// `U_t = f_t(W_t)` at every recorded time.
pub fn martingale_observable(path: &DrivingPath) -> Result<Vec<C>> {
    let family = family_of(path)?;
    path.states
        .iter()
        .map(|s| match &family {
            Some(f) => CorrectedMap {
                evaluator: f.evaluator(&s.z),
                correction: s.correction,
            }
            .eval(C::new(s.w, 0.0)),
            None => Ok(C::new(s.w, 0.0)),
        })
        .collect()
}

/// `U` projected on the base direction, together with the largest
/// perpendicular component seen.
fn projected_observable(path: &DrivingPath) -> Result<(Vec<f64>, f64)> {
    let family = family_of(path)?;
    let phase = base_phase(path, family.as_ref()).conj();
    let u = martingale_observable(path)?;
    let off = u.iter().map(|v| (v * phase).im.abs()).fold(0.0, f64::max);
    Ok((u.iter().map(|v| (v * phase).re).collect(), off))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QvResult {
    /// `Σ (ΔU)²` over the grid.
    pub realized: f64,
    /// `A_T`.
    pub clock: f64,
    /// `|realized − clock| / clock`.
    pub relative_error: f64,
}

/// Realized quadratic variation of `U` against the clock `A_T`.
pub fn qv_test(path: &DrivingPath) -> Result<QvResult> {
    let (u, _) = projected_observable(path)?;
    let realized: f64 = u.windows(2).map(|p| (p[1] - p[0]).powi(2)).sum();
    let clock = path.states.last().map_or(0.0, |s| s.clock);
    Ok(QvResult {
        realized,
        clock,
        relative_error: (realized - clock).abs() / clock,
    })
}

/// The clock `A_t` on the grid and its inverse `τ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeChange {
    pub times: Vec<f64>,
    pub clock: Vec<f64>,
}

fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> Option<f64> {
    if xs.is_empty() || x < xs[0] || x > xs[xs.len() - 1] {
        return None;
    }
    let i = xs.partition_point(|&v| v <= x);
    if i == 0 {
        return Some(ys[0]);
    }
    if i == xs.len() {
        return Some(ys[xs.len() - 1]);
    }
    let s = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
    Some(ys[i - 1] + s * (ys[i] - ys[i - 1]))
}

impl TimeChange {
    pub fn new(path: &DrivingPath) -> Result<Self> {
        let times = path.times();
        let clock: Vec<f64> = path.states.iter().map(|s| s.clock).collect();
        for (i, w) in clock.windows(2).enumerate() {
            if !(w[1] > w[0]) {
                return Err(Error::NonMonotoneClock { index: i + 1 });
            }
        }
        Ok(TimeChange { times, clock })
    }

    pub fn clock_at(&self, t: f64) -> Option<f64> {
        interpolate(&self.times, &self.clock, t)
    }

    /// `τ(a)`, the time at which the clock reads `a`.
    pub fn tau(&self, a: f64) -> Option<f64> {
        interpolate(&self.clock, &self.times, a)
    }

    pub fn total(&self) -> f64 {
        self.clock.last().copied().unwrap_or(0.0)
    }
}

/// Increments of `U_{τ(·)}` over `intervals` equal clock intervals covering
/// `[0, A_T]`, divided by the square root of the interval length.
pub fn normalized_increments(path: &DrivingPath, intervals: usize) -> Result<Vec<f64>> {
    if intervals == 0 {
        return Err(Error::InvalidArgument("need at least one interval".into()));
    }
    let tc = TimeChange::new(path)?;
    let (u, _) = projected_observable(path)?;
    let da = tc.total() / intervals as f64;
    let u_at = |a: f64| -> f64 {
        let t = tc.tau(a.min(tc.total())).unwrap_or(tc.times[tc.times.len() - 1]);
        interpolate(&tc.times, &u, t).unwrap_or(u[u.len() - 1])
    };
    let mut prev = u_at(0.0);
    let mut out = Vec::with_capacity(intervals);
    for j in 1..=intervals {
        let next = u_at(j as f64 * da);
        out.push((next - prev) / da.sqrt());
        prev = next;
    }
    Ok(out)
}

/// Mean of `U_T` over surviving paths against `U_0 = 0`.
pub fn martingale_test<E: Executor>(
    cfg: &PrevertexConfig,
    t_end: f64,
    dt: f64,
    n: usize,
    seed: u64,
    opts: &MartingaleOptions,
    exec: &E,
) -> Result<VerifyReport> {
    let family = ScFamily::new(cfg.betas(), opts.driver.quadrature)?;
    let phase = family.evaluator(cfg.prevertices()).base_phase().conj();
    let outcomes = exec.map_indexed(n, |i| -> Result<Option<C>> {
        let s = member_seed(seed, i);
        let path = simulate_driver_with(cfg, t_end, dt, s, &mut SeededNoise::new(s), &opts.driver)?;
        if path.sigma.is_some() {
            return Ok(None);
        }
        let last = &path.states[path.states.len() - 1];
        let map = CorrectedMap {
            evaluator: family.evaluator(&last.z),
            correction: last.correction,
        };
        Ok(Some(map.eval(C::new(last.w, 0.0))? * phase))
    });
    let mut stats = EnsembleStats::new();
    let mut off_axis: f64 = 0.0;
    let mut lost = 0usize;
    for outcome in outcomes {
        match outcome? {
            Some(u) => {
                stats.push(u.re);
                off_axis = off_axis.max(u.im.abs());
            }
            None => lost += 1,
        }
    }
    let attrition = lost as f64 / n as f64;
    let mut mean_check = if stats.n >= 2 {
        Check::within_se("mean U_T", stats.mean, 0.0, stats.se(), opts.se_gate)
    } else {
        Check::new("mean U_T", f64::NAN, 0.0, f64::NAN)
    };
    let mut attrition_check = Check::at_most("attrition", attrition, opts.attrition_limit);
    // the surviving sample is biased, so neither verdict on the mean stands
    if attrition_check.status != super::Status::Pass {
        attrition_check.status = super::Status::Inconclusive;
        mean_check.status = super::Status::Inconclusive;
    }
    Ok(
        VerifyReport::from_checks("martingale", n as u64, Some(seed), alloc::vec![mean_check, attrition_check])
            .note("survivors", stats.n as f64)
            .note("sd", stats.sd())
            .note("max_off_axis", off_axis),
    )
}

/// Quadratic variation over an ensemble: the median relative error of
/// `Σ(ΔU)²` against `A_T`, and the mean square of the normalized
/// `τ`-increments against 1.
pub fn qv_ensemble<E: Executor>(
    cfg: &PrevertexConfig,
    t_end: f64,
    dt: f64,
    n: usize,
    seed: u64,
    intervals: usize,
    opts: &MartingaleOptions,
    exec: &E,
) -> Result<VerifyReport> {
    let results = exec.map_indexed(n, |i| -> Result<(QvResult, Vec<f64>)> {
        let s = member_seed(seed, i);
        let path = simulate_driver_with(cfg, t_end, dt, s, &mut SeededNoise::new(s), &opts.driver)?;
        Ok((qv_test(&path)?, normalized_increments(&path, intervals)?))
    });
    let mut errors = Vec::with_capacity(n);
    let mut squares = EnsembleStats::new();
    for r in results {
        let (qv, incs) = r?;
        errors.push(qv.relative_error);
        for x in incs {
            squares.push(x * x);
        }
    }
    errors.sort_by(f64::total_cmp);
    let median = if errors.is_empty() {
        f64::NAN
    } else if errors.len() % 2 == 1 {
        errors[errors.len() / 2]
    } else {
        0.5 * (errors[errors.len() / 2 - 1] + errors[errors.len() / 2])
    };
    let checks = alloc::vec![
        Check::at_most("median relative QV error", median, 0.05),
        Check::within_se("mean square of normalized increments", squares.mean, 1.0, squares.se(), 3.0),
    ];
    Ok(VerifyReport::from_checks("qv", n as u64, Some(seed), checks)
        .note("max relative QV error", errors.last().copied().unwrap_or(f64::NAN))
        .note("increments", squares.n as f64))
}
