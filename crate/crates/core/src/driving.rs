//! The SLE(κ, ρ) driver / force-point system
//!
//! ```text
//! dW   = √κ dB + Σ_k ρ_k / (W − Z^k) dt,    W_0 = 0
//! dZ^k = 2 / (Z^k − W) dt,                  Z^k_0 = z_k
//! ```
//!
//! integrated by Euler–Maruyama on a fixed nominal grid. A nominal step is
//! halved (with a Brownian-bridge split of its increment) whenever it would
//! move `W` by more than half its distance to the nearest force point. The
//! stepper also accumulates the drift correction `D_t` and the clock `A_t`
//! by the trapezoid rule over the refined substeps.
//!
//! The metric variant runs the same system in the time of a Brownian motion
//! measured with the pull-back metric `|f'|`, then maps back through its
//! clock.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::PrevertexConfig;
use crate::noise::{BrownianSource, SeededNoise};
use crate::scmap::{QuadratureSettings, ScFamily};

type C = Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TimeParam {
    /// Half-plane capacity time, the time of the Loewner equation.
    Capacity,
    /// Time of the metric Brownian motion, before the time change.
    Metric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DrivingState {
    pub t: f64,
    pub w: f64,
    pub z: Vec<f64>,
    /// `D_t = ∫_0^t (∂_s SC_s)(W_s) ds`.
    pub correction: C,
    /// `A_t = κ ∫_0^t |SC'_s(W_s)|² ds`.
    pub clock: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DrivingPath {
    /// Force-point configuration; `None` for a plain SLE driver.
    pub config: Option<PrevertexConfig>,
    pub kappa: f64,
    pub states: Vec<DrivingState>,
    pub sigma: Option<f64>,
    pub seed: u64,
    /// Nominal step. For a path rescaled out of metric time the grid is
    /// irregular and this is its mean spacing.
    pub dt: f64,
    pub collision_tol: f64,
    pub time_param: TimeParam,
    /// Whether `correction` holds the accumulated `D_t`.
    pub tracks_correction: bool,
}

impl DrivingPath {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn end_time(&self) -> f64 {
        self.states.last().map_or(0.0, |s| s.t)
    }

    pub fn times(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.t).collect()
    }

    pub fn driver(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.w).collect()
    }

    pub fn force_point_count(&self) -> usize {
        self.states.first().map_or(0, |s| s.z.len())
    }

    /// Grid index whose time is within a quarter step of `t`.
    pub fn index_of_time(&self, t: f64) -> Option<usize> {
        let tol = 0.25 * self.dt;
        let i = self.states.partition_point(|s| s.t < t - tol);
        self.states
            .get(i)
            .filter(|s| (s.t - t).abs() <= tol)
            .map(|_| i)
    }

    /// Driver at time `t`, linear between grid points.
    pub fn driver_at(&self, t: f64) -> Result<f64> {
        let end = self.end_time();
        if !(0.0..=end).contains(&t) {
            return Err(Error::TimeOutOfRange { t, end });
        }
        let i = self.states.partition_point(|s| s.t <= t);
        if i == 0 {
            return Ok(self.states[0].w);
        }
        if i >= self.states.len() {
            return Ok(self.states[self.states.len() - 1].w);
        }
        let (a, b) = (&self.states[i - 1], &self.states[i]);
        let s = (t - a.t) / (b.t - a.t);
        Ok(a.w + s * (b.w - a.w))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriverOptions {
    /// Collision tolerance; `None` means `10 √(κ dt)`.
    pub collision_tol: Option<f64>,
    /// Maximum number of halvings of one nominal step.
    pub max_refine_depth: u32,
    /// Accumulate `D_t` (one quadrature per substep). The clock is always kept.
    pub track_correction: bool,
    pub quadrature: QuadratureSettings,
}

impl Default for DriverOptions {
    fn default() -> Self {
        DriverOptions {
            collision_tol: None,
            max_refine_depth: 16,
            track_correction: true,
            quadrature: QuadratureSettings::default(),
        }
    }
}

impl DriverOptions {
    pub fn tolerance(&self, kappa: f64, dt: f64) -> f64 {
        self.collision_tol.unwrap_or_else(|| 10.0 * (kappa * dt).sqrt())
    }
}

fn min_distance(w: f64, z: &[f64]) -> f64 {
    z.iter().map(|&zk| (zk - w).abs()).fold(f64::INFINITY, f64::min)
}

fn step_count(t_end: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidArgument(alloc::format!("step must be positive, got {dt}")));
    }
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidArgument(alloc::format!(
            "time horizon must be positive, got {t_end}"
        )));
    }
    Ok((t_end / dt - 1e-9).ceil().max(1.0) as usize)
}

/// First grid time at which the driver is within the path's collision
/// tolerance of a force point, or the recorded crossing time if the driver
/// jumped over one.
pub fn collision_time(path: &DrivingPath) -> Option<f64> {
    path.states
        .iter()
        .find(|s| min_distance(s.w, &s.z) < path.collision_tol)
        .map(|s| s.t)
        .or(path.sigma)
}

/// One plain Euler–Maruyama step of `(W, Z)`. `D` and `A` are carried over
/// unchanged; the full stepper in [`simulate_driver`] maintains them.
pub fn step_driver(
    state: &DrivingState,
    cfg: &PrevertexConfig,
    dt: f64,
    db: f64,
    collision_tol: f64,
) -> Result<DrivingState> {
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(alloc::format!("step must be positive, got {dt}")));
    }
    if min_distance(state.w, &state.z) <= collision_tol {
        return Err(Error::Collision { t: state.t });
    }
    let w = state.w;
    let drift: f64 = cfg
        .rhos()
        .iter()
        .zip(&state.z)
        .map(|(rho, zk)| rho / (w - zk))
        .sum();
    Ok(DrivingState {
        t: state.t + dt,
        w: w + cfg.kappa().sqrt() * db + drift * dt,
        z: state.z.iter().map(|&zk| zk + 2.0 / (zk - w) * dt).collect(),
        correction: state.correction,
        clock: state.clock,
    })
}

/// Drift and squared diffusion of the driver, and drifts of the force
/// points, at one state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SdeCoefficients {
    pub driver_drift: f64,
    pub driver_variance: f64,
    pub force_drift: Vec<f64>,
}

impl SdeCoefficients {
    /// Coefficients after the time change `dt = rate · ds`.
    pub fn time_changed(&self, rate: f64) -> SdeCoefficients {
        SdeCoefficients {
            driver_drift: self.driver_drift * rate,
            driver_variance: self.driver_variance * rate,
            force_drift: self.force_drift.iter().map(|v| v * rate).collect(),
        }
    }

    /// Largest of the relative coefficient differences `|a − b| / max(1, |b|)`.
    pub fn residual(&self, other: &SdeCoefficients) -> f64 {
        let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1.0);
        self.force_drift
            .iter()
            .zip(&other.force_drift)
            .map(|(&a, &b)| rel(a, b))
            .fold(
                rel(self.driver_drift, other.driver_drift)
                    .max(rel(self.driver_variance, other.driver_variance)),
                f64::max,
            )
    }
}

/// Coefficients of the SLE(κ, ρ) system at `(w, z)`.
pub fn rho_coefficients(cfg: &PrevertexConfig, w: f64, z: &[f64]) -> SdeCoefficients {
    SdeCoefficients {
        driver_drift: cfg.rhos().iter().zip(z).map(|(rho, zk)| rho / (w - zk)).sum(),
        driver_variance: cfg.kappa(),
        force_drift: z.iter().map(|&zk| 2.0 / (zk - w)).collect(),
    }
}

/// Coefficients of the metric system at `(w, z)` together with the rate
/// `ds/dt = κ |f'(w)|²` of metric time against capacity time.
pub fn metric_coefficients(
    family: &ScFamily,
    kappa: f64,
    w: f64,
    z: &[f64],
    drift_sign: f64,
) -> Result<(SdeCoefficients, f64)> {
    let m2 = metric_factor(family, w, z, 0.0)?.powi(2);
    let pull: f64 = family.betas().iter().zip(z).map(|(b, zk)| b / (w - zk)).sum();
    let coeffs = SdeCoefficients {
        driver_drift: drift_sign * pull / (2.0 * m2),
        driver_variance: 1.0 / m2,
        force_drift: z.iter().map(|&zk| 2.0 / (kappa * m2 * (zk - w))).collect(),
    };
    Ok((coeffs, kappa * m2))
}

fn metric_factor(family: &ScFamily, w: f64, z: &[f64], t: f64) -> Result<f64> {
    let m = family
        .evaluator(z)
        .sc_deriv(C::new(w, 0.0))
        .map_err(|_| Error::DegenerateMetric { t, value: f64::INFINITY })?
        .norm();
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::DegenerateMetric { t, value: m });
    }
    Ok(m)
}

/// Driver simulation with the default options and seeded noise.
pub fn simulate_driver(cfg: &PrevertexConfig, t_end: f64, dt: f64, seed: u64) -> Result<DrivingPath> {
    simulate_driver_with(
        cfg,
        t_end,
        dt,
        seed,
        &mut SeededNoise::new(seed),
        &DriverOptions::default(),
    )
}

struct Live {
    t: f64,
    /// Cumulative Brownian increment.
    b: f64,
    /// `∫ Σ ρ_k / (W − Z^k) dt`; kept apart so that `W = √κ b + drift`
    /// reduces to `√κ b` exactly when every ρ vanishes.
    drift: f64,
    z: Vec<f64>,
    d: C,
    a: f64,
    rate: C,
    speed: f64,
}

struct Rates<'a> {
    family: &'a ScFamily,
    kappa: f64,
    track: bool,
}

impl Rates<'_> {
    fn at(&self, w: f64, z: &[f64]) -> Result<(C, f64)> {
        let ev = self.family.evaluator(z);
        let speed = self.kappa * ev.sc_deriv(C::new(w, 0.0))?.norm_sqr();
        let rate = if self.track {
            let zdot: Vec<f64> = z.iter().map(|&zk| 2.0 / (zk - w)).collect();
            ev.drift_correction_rate(w, &zdot)?
        } else {
            C::new(0.0, 0.0)
        };
        Ok((rate, speed))
    }
}

fn crossed(w: f64, z: &[f64], right: &[bool]) -> bool {
    z.iter().zip(right).any(|(&zk, &r)| if r { zk <= w } else { zk >= w })
}

/// Driver simulation on `{0, dt, 2dt, …}` up to `min(t_end, σ)` with an
/// explicit noise source.
pub fn simulate_driver_with<N: BrownianSource>(
    cfg: &PrevertexConfig,
    t_end: f64,
    dt: f64,
    seed: u64,
    noise: &mut N,
    opts: &DriverOptions,
) -> Result<DrivingPath> {
    let steps = step_count(t_end, dt)?;
    let kappa = cfg.kappa();
    let sk = kappa.sqrt();
    let root_dt = dt.sqrt();
    let tol = opts.tolerance(kappa, dt);
    let rhos = cfg.rhos();
    let family = ScFamily::new(cfg.betas(), opts.quadrature)?;
    let rates = Rates {
        family: &family,
        kappa,
        track: opts.track_correction,
    };
    let right: Vec<bool> = cfg.prevertices().iter().map(|&z| z > 0.0).collect();

    let z0 = cfg.prevertices().to_vec();
    let (rate0, speed0) = rates.at(0.0, &z0)?;
    let mut live = Live {
        t: 0.0,
        b: 0.0,
        drift: 0.0,
        z: z0,
        d: C::new(0.0, 0.0),
        a: 0.0,
        rate: rate0,
        speed: speed0,
    };
    let record = |live: &Live| DrivingState {
        t: live.t,
        w: sk * live.b + live.drift,
        z: live.z.clone(),
        correction: live.d,
        clock: live.a,
    };
    let mut states = Vec::with_capacity(steps + 1);
    states.push(record(&live));
    let mut sigma = None;
    if min_distance(0.0, &live.z) < tol {
        sigma = Some(0.0);
    }
    let mut b_nominal = 0.0;
    let mut stack: Vec<(f64, f64, u32)> = Vec::new();
    'steps: for k in 0..steps {
        if sigma.is_some() {
            break;
        }
        let db_step = root_dt * noise.step_normal(k as u64);
        stack.clear();
        stack.push((dt, db_step, 0));
        while let Some((h, db, depth)) = stack.pop() {
            let w = sk * live.b + live.drift;
            let drift: f64 = rhos.iter().zip(&live.z).map(|(rho, zk)| rho / (w - zk)).sum();
            if (sk * db + drift * h).abs() > 0.5 * min_distance(w, &live.z) && depth < opts.max_refine_depth {
                let first = 0.5 * db + (0.25 * h).sqrt() * noise.bridge_normal(k as u64);
                stack.push((0.5 * h, db - first, depth + 1));
                stack.push((0.5 * h, first, depth + 1));
                continue;
            }
            for zk in live.z.iter_mut() {
                *zk += 2.0 / (*zk - w) * h;
            }
            live.b += db;
            live.drift += drift * h;
            live.t += h;
            let w_new = sk * live.b + live.drift;
            if crossed(w_new, &live.z, &right) {
                sigma = Some(live.t);
                break 'steps;
            }
            let Ok((rate, speed)) = rates.at(w_new, &live.z) else {
                sigma = Some(live.t);
                break 'steps;
            };
            live.d += (live.rate + rate) * (0.5 * h);
            live.a += 0.5 * h * (live.speed + speed);
            live.rate = rate;
            live.speed = speed;
        }
        b_nominal += db_step;
        live.b = b_nominal;
        live.t = (k + 1) as f64 * dt;
        states.push(record(&live));
        let w = sk * live.b + live.drift;
        if min_distance(w, &live.z) < tol {
            sigma = Some(live.t);
        }
    }
    Ok(DrivingPath {
        config: Some(cfg.clone()),
        kappa,
        states,
        sigma,
        seed,
        dt,
        collision_tol: tol,
        time_param: TimeParam::Capacity,
        tracks_correction: opts.track_correction,
    })
}

/// Plain SLE driver `W = √κ B` without force points.
pub fn simulate_plain(kappa: f64, t_end: f64, dt: f64, seed: u64) -> Result<DrivingPath> {
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::InvalidKappa(kappa));
    }
    let steps = step_count(t_end, dt)?;
    let sk = kappa.sqrt();
    let states = crate::noise::brownian_path(seed, dt, steps)
        .into_iter()
        .enumerate()
        .map(|(k, b)| DrivingState {
            t: k as f64 * dt,
            w: sk * b,
            z: Vec::new(),
            correction: C::new(0.0, 0.0),
            clock: kappa * k as f64 * dt,
        })
        .collect();
    Ok(DrivingPath {
        config: None,
        kappa,
        states,
        sigma: None,
        seed,
        dt,
        collision_tol: 0.0,
        time_param: TimeParam::Capacity,
        tracks_correction: true,
    })
}

/// Path for a prescribed deterministic driver `W(t)`. Force points, `D_t`
/// and `A_t` are integrated together by classical RK4 on the nominal grid,
/// so the quadratures are Simpson-accurate.
pub fn from_driver_fn<F: Fn(f64) -> f64>(
    cfg: &PrevertexConfig,
    t_end: f64,
    dt: f64,
    driver: F,
    opts: &DriverOptions,
) -> Result<DrivingPath> {
    let steps = step_count(t_end, dt)?;
    let kappa = cfg.kappa();
    let tol = opts.tolerance(kappa, dt);
    let family = ScFamily::new(cfg.betas(), opts.quadrature)?;
    let rates = Rates {
        family: &family,
        kappa,
        track: opts.track_correction,
    };
    let n = cfg.len();
    // y = (Z_1..Z_n, Re D, Im D, A)
    let field = |t: f64, y: &[f64]| -> Result<Vec<f64>> {
        let w = driver(t);
        let z = &y[..n];
        let (rate, speed) = rates.at(w, z)?;
        let mut dy: Vec<f64> = z.iter().map(|&zk| 2.0 / (zk - w)).collect();
        dy.extend_from_slice(&[rate.re, rate.im, speed]);
        Ok(dy)
    };
    let axpy = |y: &[f64], k: &[f64], h: f64| -> Vec<f64> { y.iter().zip(k).map(|(a, b)| a + h * b).collect() };
    let state_of = |t: f64, y: &[f64]| DrivingState {
        t,
        w: driver(t),
        z: y[..n].to_vec(),
        correction: C::new(y[n], y[n + 1]),
        clock: y[n + 2],
    };

    let mut y: Vec<f64> = cfg.prevertices().to_vec();
    y.extend_from_slice(&[0.0, 0.0, 0.0]);
    let mut states = vec![state_of(0.0, &y)];
    let mut sigma = None;
    if min_distance(driver(0.0), cfg.prevertices()) < tol {
        sigma = Some(0.0);
    }
    for k in 0..steps {
        if sigma.is_some() {
            break;
        }
        let t = k as f64 * dt;
        let stages = (|| -> Result<Vec<f64>> {
            let k1 = field(t, &y)?;
            let k2 = field(t + 0.5 * dt, &axpy(&y, &k1, 0.5 * dt))?;
            let k3 = field(t + 0.5 * dt, &axpy(&y, &k2, 0.5 * dt))?;
            let k4 = field(t + dt, &axpy(&y, &k3, dt))?;
            Ok((0..y.len())
                .map(|i| y[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
                .collect())
        })();
        let t_next = (k + 1) as f64 * dt;
        match stages {
            Ok(next) => y = next,
            Err(_) => {
                sigma = Some(t_next);
                break;
            }
        }
        states.push(state_of(t_next, &y));
        if min_distance(driver(t_next), &y[..n]) < tol {
            sigma = Some(t_next);
        }
    }
    Ok(DrivingPath {
        config: Some(cfg.clone()),
        kappa,
        states,
        sigma,
        seed: 0,
        dt,
        collision_tol: tol,
        time_param: TimeParam::Capacity,
        tracks_correction: opts.track_correction,
    })
}

/// Plain driver path `W(t)` sampled on the nominal grid, no force points.
pub fn plain_from_driver_fn<F: Fn(f64) -> f64>(kappa: f64, t_end: f64, dt: f64, driver: F) -> Result<DrivingPath> {
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::InvalidKappa(kappa));
    }
    let steps = step_count(t_end, dt)?;
    let states = (0..=steps)
        .map(|k| {
            let t = k as f64 * dt;
            DrivingState {
                t,
                w: driver(t),
                z: Vec::new(),
                correction: C::new(0.0, 0.0),
                clock: kappa * t,
            }
        })
        .collect();
    Ok(DrivingPath {
        config: None,
        kappa,
        states,
        sigma: None,
        seed: 0,
        dt,
        collision_tol: 0.0,
        time_param: TimeParam::Capacity,
        tracks_correction: true,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricOptions {
    /// Collision tolerance; `None` means `10 √(κ ds)`.
    pub collision_tol: Option<f64>,
    pub max_refine_depth: u32,
    /// Stop once the clock reaches this capacity time.
    pub clock_limit: Option<f64>,
    pub quadrature: QuadratureSettings,
}

impl Default for MetricOptions {
    fn default() -> Self {
        MetricOptions {
            collision_tol: None,
            max_refine_depth: 16,
            clock_limit: None,
            quadrature: QuadratureSettings::default(),
        }
    }
}

/// The metric system in metric time `s`:
///
/// ```text
/// dW   = dB / m + drift_sign · (1 / (2 m²)) Σ_j β_j / (W − Z^j) ds
/// dZ^k = 2 / (κ m² (Z^k − W)) ds,        m = |f'_s(W)|
/// ```
///
/// The capacity clock `∫ ds / (κ m²)` is accumulated with the left-point rule, which
/// makes every substep correspond exactly to one Euler–Maruyama step of the
/// capacity-time system.
pub fn simulate_metric_driver(
    cfg: &PrevertexConfig,
    s_end: f64,
    ds: f64,
    seed: u64,
    drift_sign: f64,
) -> Result<DrivingPath> {
    simulate_metric_driver_with(
        cfg,
        s_end,
        ds,
        seed,
        drift_sign,
        &mut SeededNoise::new(seed),
        &MetricOptions::default(),
    )
}

pub fn simulate_metric_driver_with<N: BrownianSource>(
    cfg: &PrevertexConfig,
    s_end: f64,
    ds: f64,
    seed: u64,
    drift_sign: f64,
    noise: &mut N,
    opts: &MetricOptions,
) -> Result<DrivingPath> {
    if drift_sign != 1.0 && drift_sign != -1.0 {
        return Err(Error::InvalidArgument(alloc::format!(
            "drift sign must be +1 or -1, got {drift_sign}"
        )));
    }
    let steps = step_count(s_end, ds)?;
    let kappa = cfg.kappa();
    let tol = opts.collision_tol.unwrap_or_else(|| 10.0 * (kappa * ds).sqrt());
    let family = ScFamily::new(cfg.betas(), opts.quadrature)?;
    let betas = cfg.betas();
    let root = ds.sqrt();
    let right: Vec<bool> = cfg.prevertices().iter().map(|&z| z > 0.0).collect();

    let mut s = 0.0;
    let mut w = 0.0;
    let mut z = cfg.prevertices().to_vec();
    let mut clock = 0.0;
    let mut states = Vec::with_capacity(steps + 1);
    states.push(DrivingState {
        t: 0.0,
        w,
        z: z.clone(),
        correction: C::new(0.0, 0.0),
        clock,
    });
    let mut sigma = None;
    if min_distance(0.0, &z) < tol {
        sigma = Some(0.0);
    }
    let mut stack: Vec<(f64, f64, u32)> = Vec::new();
    'steps: for k in 0..steps {
        if sigma.is_some() {
            break;
        }
        let db_step = root * noise.step_normal(k as u64);
        stack.clear();
        stack.push((ds, db_step, 0));
        while let Some((h, db, depth)) = stack.pop() {
            let m = metric_factor(&family, w, &z, s)?;
            let m2 = m * m;
            let pull: f64 = betas.iter().zip(&z).map(|(b, zk)| b / (w - zk)).sum();
            let dw = db / m + drift_sign * pull / (2.0 * m2) * h;
            if dw.abs() > 0.5 * min_distance(w, &z) && depth < opts.max_refine_depth {
                let first = 0.5 * db + (0.25 * h).sqrt() * noise.bridge_normal(k as u64);
                stack.push((0.5 * h, db - first, depth + 1));
                stack.push((0.5 * h, first, depth + 1));
                continue;
            }
            for zk in z.iter_mut() {
                *zk += 2.0 / (kappa * m2 * (*zk - w)) * h;
            }
            clock += h / (kappa * m2);
            w += dw;
            s += h;
            if crossed(w, &z, &right) {
                sigma = Some(s);
                break 'steps;
            }
        }
        s = (k + 1) as f64 * ds;
        states.push(DrivingState {
            t: s,
            w,
            z: z.clone(),
            correction: C::new(0.0, 0.0),
            clock,
        });
        if min_distance(w, &z) < tol {
            sigma = Some(s);
        } else if opts.clock_limit.is_some_and(|limit| clock >= limit) {
            break;
        }
    }
    Ok(DrivingPath {
        config: Some(cfg.clone()),
        kappa,
        states,
        sigma,
        seed,
        dt: ds,
        collision_tol: tol,
        time_param: TimeParam::Metric,
        tracks_correction: false,
    })
}

/// Reparameterize a metric-time path by its clock. The new `clock` column is
/// `κ ∫ |SC'(W)|² dt` in the new time (trapezoid rule) and a collision time
/// is carried over through the clock.
pub fn rescale_to_rho_time(path: &DrivingPath) -> Result<DrivingPath> {
    if path.time_param != TimeParam::Metric {
        return Err(Error::InvalidArgument("path is not in metric time".into()));
    }
    for (i, pair) in path.states.windows(2).enumerate() {
        if !(pair[1].clock > pair[0].clock) {
            return Err(Error::NonMonotoneClock { index: i + 1 });
        }
    }
    let family = match &path.config {
        Some(cfg) => Some(ScFamily::new(cfg.betas(), QuadratureSettings::default())?),
        None => None,
    };
    let speed = |s: &DrivingState| -> Result<f64> {
        match &family {
            Some(f) => Ok(path.kappa * metric_factor(f, s.w, &s.z, s.t)?.powi(2)),
            None => Ok(path.kappa),
        }
    };
    let mut states = Vec::with_capacity(path.states.len());
    let mut acc = 0.0;
    let mut prev: Option<(f64, f64)> = None;
    for s in &path.states {
        let t = s.clock;
        let v = speed(s)?;
        if let Some((t0, v0)) = prev {
            acc += 0.5 * (t - t0) * (v + v0);
        }
        prev = Some((t, v));
        states.push(DrivingState {
            t,
            w: s.w,
            z: s.z.clone(),
            correction: C::new(0.0, 0.0),
            clock: acc,
        });
    }
    // a collision strictly between grid points maps through the clock
    // interpolated on its metric-time interval
    let sigma = path.sigma.map(|sig| {
        let i = path.states.partition_point(|s| s.t < sig);
        match (i.checked_sub(1).and_then(|j| path.states.get(j)), path.states.get(i)) {
            (_, Some(s)) if s.t == sig => s.clock,
            (Some(a), Some(b)) => a.clock + (sig - a.t) / (b.t - a.t) * (b.clock - a.clock),
            (Some(a), None) => a.clock,
            _ => 0.0,
        }
    });
    let end = states.last().map_or(0.0, |s| s.t);
    let dt = if states.len() > 1 { end / (states.len() - 1) as f64 } else { path.dt };
    Ok(DrivingPath {
        config: path.config.clone(),
        kappa: path.kappa,
        states,
        sigma,
        seed: path.seed,
        dt,
        collision_tol: path.collision_tol,
        time_param: TimeParam::Capacity,
        tracks_correction: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(z: &[f64], b: &[f64], kappa: f64) -> PrevertexConfig {
        PrevertexConfig::new(z.to_vec(), b.to_vec(), kappa).unwrap()
    }

    fn state(w: f64, z: &[f64]) -> DrivingState {
        DrivingState {
            t: 0.0,
            w,
            z: z.to_vec(),
            correction: C::new(0.0, 0.0),
            clock: 0.0,
        }
    }

    #[test]
    fn single_step_substitution() {
        // rho = 1 means beta = 2 / kappa
        let c = cfg(&[2.0], &[0.5], 4.0);
        let next = step_driver(&state(0.0, &[2.0]), &c, 0.01, 0.0, 0.0).unwrap();
        assert!((next.w + 0.005).abs() < 1e-15);
        assert!((next.z[0] - 2.01).abs() < 1e-15);
        assert!((next.t - 0.01).abs() < 1e-15);
    }

    #[test]
    fn zero_rho_step_is_pure_noise() {
        let c = cfg(&[-1.0, 3.0], &[0.0, 0.0], 2.0);
        let next = step_driver(&state(0.3, &[-1.0, 3.0]), &c, 0.1, 0.25, 0.0).unwrap();
        assert_eq!(next.w, 0.3 + 2f64.sqrt() * 0.25);
    }

    #[test]
    fn symmetric_drift_vanishes() {
        let c = cfg(&[-1.0, 1.0], &[0.3, 0.3], 3.0);
        let next = step_driver(&state(0.0, &[-1.0, 1.0]), &c, 0.1, 0.0, 0.0).unwrap();
        assert_eq!(next.w, 0.0);
    }

    #[test]
    fn step_refuses_inside_tolerance() {
        let c = cfg(&[1.0], &[0.5], 4.0);
        assert_eq!(
            step_driver(&state(0.95, &[1.0]), &c, 0.01, 0.0, 0.1),
            Err(Error::Collision { t: 0.0 })
        );
    }

    #[test]
    fn zero_rho_driver_is_scaled_brownian_path() {
        let c = cfg(&[-1.0, 2.0], &[0.0, 0.0], 3.0);
        let path = simulate_driver(&c, 0.05, 1e-3, 9).unwrap();
        let raw = crate::noise::brownian_path(9, 1e-3, path.len() - 1);
        for (s, b) in path.states.iter().zip(&raw) {
            assert_eq!(s.w, 3f64.sqrt() * b);
        }
    }

    #[test]
    fn injected_collision_is_found() {
        let c = cfg(&[1.0], &[0.0], 1.0);
        let mut path = plain_from_driver_fn(1.0, 1.0, 0.25, |_| 0.0).unwrap();
        path.config = Some(c);
        path.collision_tol = 1e-9;
        for (i, s) in path.states.iter_mut().enumerate() {
            s.z = vec![if i >= 3 { 0.0 } else { 1.0 }];
        }
        assert_eq!(collision_time(&path), Some(0.75));
    }

    #[test]
    fn clock_is_increasing_and_correction_starts_at_zero() {
        let c = cfg(&[-1.0, 1.5], &[0.4, 0.6], 2.0);
        let path = simulate_driver(&c, 0.02, 1e-3, 3).unwrap();
        assert_eq!(path.states[0].correction, C::new(0.0, 0.0));
        for pair in path.states.windows(2) {
            assert!(pair[1].clock > pair[0].clock);
        }
    }

    #[test]
    fn flat_metric_clock_is_s_over_kappa() {
        let c = cfg(&[-1.0, 1.0], &[0.0, 0.0], 4.0);
        let path = simulate_metric_driver(&c, 0.01, 1e-3, 5, 1.0).unwrap();
        for s in &path.states {
            assert!((s.clock - s.t / 4.0).abs() < 1e-12);
        }
        let raw = crate::noise::brownian_path(5, 1e-3, path.len() - 1);
        for (s, b) in path.states.iter().zip(&raw) {
            assert_eq!(s.w, *b);
        }
        let rescaled = rescale_to_rho_time(&path).unwrap();
        assert!((rescaled.end_time() - 0.0025).abs() < 1e-12);
        for s in &rescaled.states {
            assert!((s.clock - 4.0 * s.t).abs() < 1e-12);
        }
    }

    #[test]
    fn metric_drift_vanishes_for_symmetric_config() {
        let c = cfg(&[-1.0, 1.0], &[0.5, 0.5], 4.0);
        let fam = ScFamily::new(c.betas(), QuadratureSettings::default()).unwrap();
        for sign in [1.0, -1.0] {
            let (co, _) = metric_coefficients(&fam, 4.0, 0.0, &[-1.0, 1.0], sign).unwrap();
            assert_eq!(co.driver_drift, 0.0);
        }
    }

    #[test]
    fn driver_interpolation() {
        let path = plain_from_driver_fn(2.0, 1.0, 0.5, |t| 2.0 * t).unwrap();
        assert!((path.driver_at(0.25).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(path.index_of_time(0.5), Some(1));
        assert_eq!(path.index_of_time(0.3), None);
        assert!(path.driver_at(1.5).is_err());
    }
}
