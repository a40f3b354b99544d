//! Rate identity behind the Loewner evolution in polygons, in half-plane
//! form: with `L(t) = log(SC_t'(g_t(w)) g_t'(w))`,
//!
//! ```text
//! dL/dt = −2 / (g − W)² + (2 / (g − W)) Σ_l β_l / (Z^l − W).
//! ```
//!
//! `L` only sees `W` through continuous functions, so a central difference
//! of `L` converges even across the kinks of a piecewise-linear driver.

use alloc::vec::Vec;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::driving::DrivingPath;
use crate::error::{Error, Result};
use crate::loewner::{advance_point, FlowOptions, Segment};

type C = Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateCheck {
    pub t: f64,
    pub w: C,
    pub h: f64,
    /// `(L(t + h) − L(t − h)) / 2h`.
    pub fd_rate: C,
    pub bracket: C,
    /// `|fd_rate − bracket| / max(1, |bracket|)`.
    pub residual: f64,
}

#[derive(Clone)]
struct Local {
    g: C,
    gp: C,
    z: Vec<f64>,
}

/// RK4 for `(g, g', Z)` from `seg.t0` over a signed duration `span`, driver
/// linear on `seg`.
fn integrate_local(start: &Local, seg: &Segment, span: f64, substeps: usize) -> Local {
    let slope = (seg.w1 - seg.w0) / (seg.t1 - seg.t0);
    let driver = |t: f64| seg.w0 + (t - seg.t0) * slope;
    let field = |t: f64, s: &Local| -> Local {
        let w = driver(t);
        let inv = (s.g - w).inv();
        Local {
            g: inv * 2.0,
            gp: -s.gp * inv * inv * 2.0,
            z: s.z.iter().map(|&zk| 2.0 / (zk - w)).collect(),
        }
    };
    let axpy = |s: &Local, k: &Local, h: f64| Local {
        g: s.g + k.g * h,
        gp: s.gp + k.gp * h,
        z: s.z.iter().zip(&k.z).map(|(a, b)| a + h * b).collect(),
    };
    let h = span / substeps as f64;
    let mut s = start.clone();
    let mut t = seg.t0;
    for _ in 0..substeps {
        let k1 = field(t, &s);
        let k2 = field(t + 0.5 * h, &axpy(&s, &k1, 0.5 * h));
        let k3 = field(t + 0.5 * h, &axpy(&s, &k2, 0.5 * h));
        let k4 = field(t + h, &axpy(&s, &k3, h));
        s = Local {
            g: s.g + (k1.g + k2.g * 2.0 + k3.g * 2.0 + k4.g) * (h / 6.0),
            gp: s.gp + (k1.gp + k2.gp * 2.0 + k3.gp * 2.0 + k4.gp) * (h / 6.0),
            z: (0..s.z.len())
                .map(|i| s.z[i] + h / 6.0 * (k1.z[i] + 2.0 * k2.z[i] + 2.0 * k3.z[i] + k4.z[i]))
                .collect(),
        };
        t += h;
    }
    s
}

/// Central-difference check of the rate identity at grid time `t` for the
/// point `w`. The stencil `[t − h, t + h]` must fit inside the two grid
/// steps around `t`; `(g, g')` are flowed up to `t` along the path and the
/// force points are taken from the path at `t`.
pub fn theorem_rate_check(path: &DrivingPath, w: C, t: f64, h: f64) -> Result<RateCheck> {
    let end = path.end_time();
    let i = path.index_of_time(t).ok_or(Error::TimeOutOfRange { t, end })?;
    if i == 0 || i + 1 >= path.states.len() {
        return Err(Error::TimeOutOfRange { t, end });
    }
    let (prev, here, next) = (&path.states[i - 1], &path.states[i], &path.states[i + 1]);
    if !(h > 0.0 && h <= here.t - prev.t && h <= next.t - here.t) {
        return Err(Error::InvalidArgument(alloc::format!(
            "stencil half-width {h} does not fit the grid around t = {t}"
        )));
    }
    if path.sigma.is_some_and(|s| here.t + h >= s) {
        return Err(Error::Collision { t: here.t + h });
    }
    if w.im < 0.0 {
        return Err(Error::InvalidArgument("point below the real axis".into()));
    }
    let betas: Vec<f64> = path.config.as_ref().map_or_else(Vec::new, |c| c.betas().to_vec());

    let eps = FlowOptions::default().tolerance(path.dt);
    let (mut g, mut gp) = (w, C::new(1.0, 0.0));
    for k in 0..i {
        let seg = Segment {
            t0: path.states[k].t,
            t1: path.states[k + 1].t,
            w0: path.states[k].w,
            w1: path.states[k + 1].w,
        };
        if let Some(ts) = advance_point(&mut g, &mut gp, &seg, eps) {
            return Err(Error::Swallowed { t: ts });
        }
    }
    let centre = Local {
        g,
        gp,
        z: here.z.clone(),
    };
    let forward_seg = Segment {
        t0: here.t,
        t1: next.t,
        w0: here.w,
        w1: next.w,
    };
    let backward_seg = Segment {
        t0: here.t,
        t1: prev.t,
        w0: here.w,
        w1: prev.w,
    };
    let plus = integrate_local(&centre, &forward_seg, h, 4);
    let minus = integrate_local(&centre, &backward_seg, -h, 4);
    for s in [&plus, &minus] {
        if (s.g - here.w).norm() < eps {
            return Err(Error::Swallowed { t: here.t });
        }
    }

    // L(t+h) − L(t−h) as logarithms of ratios close to 1
    let mut diff = (plus.gp / minus.gp).ln();
    for (k, beta) in betas.iter().enumerate() {
        diff -= ((plus.g - plus.z[k]) / (minus.g - minus.z[k])).ln() * *beta;
    }
    let fd_rate = diff / (2.0 * h);

    let u = (g - here.w).inv();
    let pull: f64 = betas
        .iter()
        .zip(&here.z)
        .map(|(b, zk)| b / (zk - here.w))
        .sum();
    let bracket = -u * u * 2.0 + u * (2.0 * pull);
    Ok(RateCheck {
        t: here.t,
        w,
        h,
        fd_rate,
        bracket,
        residual: (fd_rate - bracket).norm() / bracket.norm().max(1.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::driving::plain_from_driver_fn;

    #[test]
    fn flat_constant_driver() {
        let path = plain_from_driver_fn(2.0, 0.5, 1e-3, |_| 0.0).unwrap();
        let check = theorem_rate_check(&path, C::new(0.4, 0.8), 0.25, 1e-4).unwrap();
        assert!(check.residual < 1e-6, "{check:?}");
    }

    #[test]
    fn stencil_must_fit() {
        let path = plain_from_driver_fn(2.0, 0.5, 1e-3, |_| 0.0).unwrap();
        assert!(theorem_rate_check(&path, C::new(0.4, 0.8), 0.25, 2e-3).is_err());
        assert!(theorem_rate_check(&path, C::new(0.4, 0.8), 0.0, 1e-4).is_err());
    }
}
