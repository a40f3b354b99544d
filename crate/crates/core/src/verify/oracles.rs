//! Deterministic checks of the Schwarz–Christoffel evaluator.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
use num_traits::Float;

use super::{Check, VerifyReport};
use crate::error::Result;
use crate::geometry::PrevertexConfig;
use crate::scmap::{QuadratureSettings, ScEvaluator, ScFamily};

type C = Complex64;

fn wrap_angle(x: f64) -> f64 {
    x - 2.0 * PI * ((x + PI) / (2.0 * PI)).floor()
}

/// Sample points on every side of the real line: nine interior points of
/// each bounded gap and three points on each unbounded ray.
fn side_samples(z: &[f64]) -> Vec<Vec<f64>> {
    let mut sides = Vec::new();
    let first = z[0];
    let last = z[z.len() - 1];
    let reach = 1.0 + first.abs().max(last.abs());
    sides.push([10.0, 1.0, 0.1].iter().map(|d| first - d * reach).collect());
    for pair in z.windows(2) {
        sides.push((1..10).map(|j| pair[0] + 0.1 * j as f64 * (pair[1] - pair[0])).collect());
    }
    sides.push([0.1, 1.0, 10.0].iter().map(|d| last + d * reach).collect());
    sides
}

/// Largest deviation of `arg SC'` from its value at the first sample of
/// each side, and largest error of the jump of `arg SC'` across each
/// prevertex against `β_k π` (mod 2π).
pub fn turning_and_straightness(ev: &ScEvaluator<'_>) -> Result<(f64, f64)> {
    let z = ev.prevertices();
    let mut straight: f64 = 0.0;
    for side in side_samples(z) {
        let reference = ev.sc_deriv(C::new(side[0], 0.0))?;
        for &x in &side[1..] {
            let d = ev.sc_deriv(C::new(x, 0.0))?;
            straight = straight.max((d / reference).arg().abs());
        }
    }
    let mut turning: f64 = 0.0;
    let mut pts = z.to_vec();
    pts.push(0.0);
    pts.sort_by(f64::total_cmp);
    let gap = pts.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    let delta = 1e-7 * gap;
    for (&zk, &beta) in z.iter().zip(ev.betas()) {
        let left = ev.sc_deriv(C::new(zk - delta, 0.0))?;
        let right = ev.sc_deriv(C::new(zk + delta, 0.0))?;
        let jump = (right / left).arg();
        turning = turning.max(wrap_angle(jump - beta * PI).abs());
    }
    Ok((straight, turning))
}

/// `z³/3 − z` oracle points: five on the real line (two of them corners)
/// and fifteen in the open upper half-plane.
pub(crate) fn cubic_points() -> Vec<C> {
    let mut pts = vec![
        C::new(-1.0, 0.0),
        C::new(1.0, 0.0),
        C::new(2.0, 0.0),
        C::new(-2.5, 0.0),
        C::new(0.5, 0.0),
    ];
    for j in 0..15 {
        let r = 0.3 + 0.25 * j as f64;
        let theta = PI * (j as f64 + 0.5) / 15.0;
        pts.push(C::from_polar(r, theta));
    }
    pts
}

/// Closed-form oracles (cubic, arcsine) plus straightness, turning, path
/// independence and a Richardson derivative check on `cfg`.
pub fn sc_oracle_suite(cfg: &PrevertexConfig) -> Result<VerifyReport> {
    let settings = QuadratureSettings::default();

    let cubic_family = ScFamily::new(&[-1.0, -1.0], settings)?;
    let cubic_z = [-1.0, 1.0];
    let cubic = cubic_family.evaluator(&cubic_z);
    let mut cubic_err: f64 = 0.0;
    for p in cubic_points() {
        let exact = p * p * p / 3.0 - p;
        cubic_err = cubic_err.max((cubic.sc_eval(p)? - exact).norm());
    }

    let arc_family = ScFamily::new(&[0.5, 0.5], settings)?;
    let arc_z = [-1.0, 1.0];
    let arc = arc_family.evaluator(&arc_z);
    let side = (arc.sc_eval(C::new(1.0, 0.0))? - arc.sc_eval(C::new(-1.0, 0.0))?).norm();

    let family = ScFamily::new(cfg.betas(), settings)?;
    let ev = family.evaluator(cfg.prevertices());
    let (straight, turning) = turning_and_straightness(&ev)?;

    let h = ev.lift_height();
    let span = 1.0 + cfg.prevertices().iter().fold(0.0f64, |m, z| m.max(z.abs()));
    let targets = [
        C::new(0.3 * span, 0.5 * h),
        C::new(-0.7 * span, 2.0 * h),
        C::new(0.1 * span, 3.0 * span),
    ];
    let mut path_err: f64 = 0.0;
    let mut deriv_err: f64 = 0.0;
    for &p in &targets {
        let direct = ev.sc_eval(p)?;
        let detour = ev.sc_eval_along(&[
            C::new(0.0, 0.0),
            C::new(-span, 2.0 * span),
            C::new(span, 2.5 * span),
            p,
        ])?;
        path_err = path_err.max((direct - detour).norm() / direct.norm().max(1.0));

        let q = |step: f64| -> Result<C> {
            let s = C::new(step, 0.0);
            Ok((ev.sc_eval(p + s)? - ev.sc_eval(p - s)?) / (2.0 * step))
        };
        let step = 0.05 * p.im.min(h);
        let extrapolated = (q(0.5 * step)? * 4.0 - q(step)?) / 3.0;
        let exact = ev.sc_deriv(p)?;
        deriv_err = deriv_err.max((extrapolated - exact).norm() / exact.norm());
    }

    let checks = vec![
        Check::at_most("cubic oracle max error", cubic_err, 1e-10),
        Check::new("arcsine side length", side, PI, 1e-8),
        Check::at_most("side straightness (rad)", straight, 1e-8),
        Check::at_most("turning angle error (rad)", turning, 1e-6),
        Check::at_most("path independence (rel)", path_err, 1e-8),
        Check::at_most("Richardson derivative (rel)", deriv_err, 1e-6),
    ];
    Ok(VerifyReport::from_checks("sc-oracles", 20, None, checks))
}
