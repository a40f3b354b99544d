//! Chordal Loewner flow `∂_t g_t(z) = 2 / (g_t(z) − W_t)` for a sampled
//! driver, swallowing races on the real line, and the slit-composition
//! approximation of the trace.

use alloc::vec::Vec;

use num_complex::Complex64;
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::driving::DrivingPath;
use crate::error::{Error, Result};

type C = Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FlowOptions {
    /// Swallow threshold on `|g − W|`; `None` means `√(4 dt)`.
    pub swallow_tol: Option<f64>,
}

impl FlowOptions {
    pub fn tolerance(&self, dt: f64) -> f64 {
        self.swallow_tol.unwrap_or_else(|| (4.0 * dt).sqrt())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowResult {
    pub point: C,
    /// Grid times reached before swallowing (or the end of the path).
    pub times: Vec<f64>,
    pub values: Vec<C>,
    /// `g_t'(z)` at the same times.
    pub derivatives: Vec<C>,
    pub swallow_time: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "order", rename_all = "kebab-case")]
pub enum SwallowOrder {
    /// `−y` is swallowed first: the curve hits `(−∞, −y)` first.
    LeftFirst { t: f64 },
    /// `x` is swallowed first: the curve hits `(x, ∞)` first.
    RightFirst { t: f64 },
    Neither,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSample {
    pub times: Vec<f64>,
    pub points: Vec<C>,
}

/// Driver linear on `[t0, t1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub t0: f64,
    pub t1: f64,
    pub w0: f64,
    pub w1: f64,
}

impl Segment {
    #[inline]
    fn slope(&self) -> f64 {
        (self.w1 - self.w0) / (self.t1 - self.t0)
    }

    #[inline]
    fn at(&self, t: f64) -> f64 {
        self.w0 + (t - self.t0) * self.slope()
    }

    /// Substep keeping `|Δg| ≤ 0.1 |g − W|` and the driver's own motion
    /// within a tenth of the distance.
    #[inline]
    fn substep(&self, t: f64, d: f64) -> f64 {
        let v = self.slope().abs();
        let mut h = (self.t1 - t).min(0.05 * d * d);
        if v > 0.0 {
            h = h.min(0.1 * d / v);
        }
        h
    }
}

/// Flow `(g, g')` across one driver segment by RK4. Returns the swallow
/// time if `|g − W|` drops below `eps`.
pub fn advance_point(g: &mut C, gp: &mut C, seg: &Segment, eps: f64) -> Option<f64> {
    let field = |t: f64, g: C, gp: C| {
        let inv = (g - seg.at(t)).inv();
        (inv * 2.0, -gp * inv * inv * 2.0)
    };
    let mut t = seg.t0;
    while t < seg.t1 {
        let d = (*g - seg.at(t)).norm();
        if d < eps {
            return Some(t);
        }
        let h = seg.substep(t, d);
        let (k1, l1) = field(t, *g, *gp);
        let (k2, l2) = field(t + 0.5 * h, *g + k1 * (0.5 * h), *gp + l1 * (0.5 * h));
        let (k3, l3) = field(t + 0.5 * h, *g + k2 * (0.5 * h), *gp + l2 * (0.5 * h));
        let (k4, l4) = field(t + h, *g + k3 * h, *gp + l3 * h);
        *g += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        *gp += (l1 + l2 * 2.0 + l3 * 2.0 + l4) * (h / 6.0);
        t = if seg.t1 - t <= h { seg.t1 } else { t + h };
    }
    if (*g - seg.w1).norm() < eps {
        return Some(seg.t1);
    }
    None
}

/// Real-axis version of [`advance_point`] without the derivative.
pub fn advance_real(x: &mut f64, seg: &Segment, eps: f64) -> Option<f64> {
    let field = |t: f64, x: f64| 2.0 / (x - seg.at(t));
    let mut t = seg.t0;
    while t < seg.t1 {
        let d = (*x - seg.at(t)).abs();
        if d < eps {
            return Some(t);
        }
        let h = seg.substep(t, d);
        let k1 = field(t, *x);
        let k2 = field(t + 0.5 * h, *x + 0.5 * h * k1);
        let k3 = field(t + 0.5 * h, *x + 0.5 * h * k2);
        let k4 = field(t + h, *x + h * k3);
        *x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t = if seg.t1 - t <= h { seg.t1 } else { t + h };
    }
    if (*x - seg.w1).abs() < eps {
        return Some(seg.t1);
    }
    None
}

fn segments(path: &DrivingPath) -> impl Iterator<Item = Segment> + '_ {
    path.states.windows(2).map(|p| Segment {
        t0: p[0].t,
        t1: p[1].t,
        w0: p[0].w,
        w1: p[1].w,
    })
}

/// Flow `z` (closed upper half-plane) along the whole path, with the driver
/// linear between grid points.
pub fn flow_point(path: &DrivingPath, z: C, opts: &FlowOptions) -> Result<FlowResult> {
    if z.im < 0.0 || !z.is_finite() {
        return Err(Error::InvalidArgument(alloc::format!(
            "{z} is not in the closed upper half-plane"
        )));
    }
    let first = path
        .states
        .first()
        .ok_or_else(|| Error::InvalidArgument("empty path".into()))?;
    let mut res = FlowResult {
        point: z,
        times: alloc::vec![first.t],
        values: alloc::vec![z],
        derivatives: alloc::vec![C::new(1.0, 0.0)],
        swallow_time: None,
    };
    if z == C::new(first.w, 0.0) {
        res.swallow_time = Some(first.t);
        return Ok(res);
    }
    let eps = opts.tolerance(path.dt);
    let (mut g, mut gp) = (z, C::new(1.0, 0.0));
    for seg in segments(path) {
        if let Some(t) = advance_point(&mut g, &mut gp, &seg, eps) {
            res.swallow_time = Some(t);
            break;
        }
        res.times.push(seg.t1);
        res.values.push(g);
        res.derivatives.push(gp);
    }
    Ok(res)
}

/// Two boundary points `−y < W < x` flowed in lockstep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryRace {
    pub left: f64,
    pub right: f64,
}

impl BoundaryRace {
    pub fn new(x: f64, y: f64) -> Self {
        BoundaryRace { left: -y, right: x }
    }

    /// Advance both points over one segment; `Some` once either is swallowed.
    pub fn advance(&mut self, seg: &Segment, eps: f64) -> Option<SwallowOrder> {
        let tl = advance_real(&mut self.left, seg, eps);
        let tr = advance_real(&mut self.right, seg, eps);
        match (tl, tr) {
            (None, None) => None,
            (Some(t), None) => Some(SwallowOrder::LeftFirst { t }),
            (None, Some(t)) => Some(SwallowOrder::RightFirst { t }),
            (Some(a), Some(b)) if b < a => Some(SwallowOrder::RightFirst { t: b }),
            (Some(a), Some(_)) => Some(SwallowOrder::LeftFirst { t: a }),
        }
    }
}

/// Which of `−y` and `x` the path swallows first.
pub fn swallow_order(path: &DrivingPath, x: f64, y: f64, opts: &FlowOptions) -> Result<SwallowOrder> {
    if !(x > 0.0 && y > 0.0) {
        return Err(Error::InvalidArgument("race points must be positive".into()));
    }
    let eps = opts.tolerance(path.dt);
    let mut race = BoundaryRace::new(x, y);
    for seg in segments(path) {
        if let Some(order) = race.advance(&seg, eps) {
            return Ok(order);
        }
    }
    Ok(SwallowOrder::Neither)
}

/// Trace approximation: the driver is held at `W_j` on `[t_j, t_{j+1})`, so
/// `γ(t_k) = h_0^{-1} ∘ … ∘ h_{k−1}^{-1}(W_{k−1})` with
/// `h_j^{-1}(w) = W_j + √((w − W_j)² − 4 (t_{j+1} − t_j))` on the root in the
/// upper half-plane. Emits indices `0, s, 2s, …` and the last index.
pub fn compute_trace(path: &DrivingPath, stride: usize) -> Result<TraceSample> {
    if path.states.is_empty() {
        return Err(Error::InvalidArgument("empty path".into()));
    }
    if stride == 0 {
        return Err(Error::InvalidArgument("stride must be positive".into()));
    }
    let last = path.states.len() - 1;
    let mut indices: Vec<usize> = (0..=last).step_by(stride).collect();
    if indices.last() != Some(&last) {
        indices.push(last);
    }
    let mut times = Vec::with_capacity(indices.len());
    let mut points = Vec::with_capacity(indices.len());
    for k in indices {
        times.push(path.states[k].t);
        if k == 0 {
            points.push(C::new(path.states[0].w, 0.0));
            continue;
        }
        let mut w = C::new(path.states[k - 1].w, 0.0);
        for j in (0..k).rev() {
            let wj = path.states[j].w;
            let dt = path.states[j + 1].t - path.states[j].t;
            let u = w - wj;
            let mut r = (u * u - 4.0 * dt).sqrt();
            if r.im < 0.0 || (r.im == 0.0 && r.re * u.re < 0.0) {
                r = -r;
            }
            w = r + wj;
            if !w.is_finite() {
                return Err(Error::BranchFailure { step: j });
            }
        }
        points.push(w);
    }
    Ok(TraceSample { times, points })
}
