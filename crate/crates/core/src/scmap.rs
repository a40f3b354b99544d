//! Time-dependent Schwarz–Christoffel maps.
//!
//! `SC(z) = ∫_0^z ∏ (ζ − z_k)^{−β_k} dζ` with each power taken on the branch
//! analytic in the upper half-plane, `arg(ζ − z_k) ∈ [0, π]`. Integrals are
//! computed along polylines in the closed upper half-plane with compound
//! Gauss rules: Gauss–Legendre on regular pieces, Gauss–Jacobi on a final
//! piece ending at a prevertex. No piece may be longer than twice its
//! distance to the nearest prevertex that is not its own endpoint.
//!
//! The normalization `f^{-1} = a SC + b` is fixed to `a = 1, b = 0`, so all
//! outputs are in raw SC coordinates.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::driving::DrivingPath;
use crate::error::{Error, Result};
use crate::geometry::{Corner, PolygonSnapshot};
use crate::quadrature::GaussRule;

type C = Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSettings {
    /// Nodes per Gauss rule.
    pub order: usize,
    /// Maximum number of quadrature pieces for one integral.
    pub subdivision_limit: usize,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        QuadratureSettings {
            order: 12,
            subdivision_limit: 4096,
        }
    }
}

/// The weights of a Schwarz–Christoffel family together with the Gauss rules
/// they need. Prevertex positions are supplied per time slice through
/// [`ScFamily::evaluator`].
#[derive(Debug, Clone)]
pub struct ScFamily {
    betas: Vec<f64>,
    settings: QuadratureSettings,
    legendre: GaussRule,
    endpoint_rules: Vec<Option<GaussRule>>,
}

impl ScFamily {
    pub fn new(betas: &[f64], settings: QuadratureSettings) -> Result<Self> {
        let legendre = GaussRule::legendre(settings.order)?;
        let endpoint_rules = betas
            .iter()
            .map(|&beta| {
                if beta != 0.0 && beta < 1.0 {
                    GaussRule::jacobi(settings.order, -beta, 0.0).map(Some)
                } else {
                    Ok(None)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ScFamily {
            betas: betas.to_vec(),
            settings,
            legendre,
            endpoint_rules,
        })
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    pub fn settings(&self) -> QuadratureSettings {
        self.settings
    }

    pub fn evaluator<'a>(&'a self, prevertices: &'a [f64]) -> ScEvaluator<'a> {
        assert_eq!(
            prevertices.len(),
            self.betas.len(),
            "prevertex count must match the family weights"
        );
        ScEvaluator {
            family: self,
            prevertices,
        }
    }
}

/// One time slice of a Schwarz–Christoffel family.
#[derive(Debug, Clone, Copy)]
pub struct ScEvaluator<'a> {
    family: &'a ScFamily,
    prevertices: &'a [f64],
}

/// `arg(d)` on the closed upper half-plane branch, `[0, π]`.
#[inline]
fn upper_arg(d: C) -> f64 {
    let im = if d.im > 0.0 { d.im } else { 0.0 };
    im.atan2(d.re)
}

fn point_segment_distance(p: f64, a: C, b: C) -> f64 {
    let p = C::new(p, 0.0);
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let s = ((p - a) * ab.conj()).re / len2;
    let s = s.clamp(0.0, 1.0);
    (p - (a + ab * s)).norm()
}

impl<'a> ScEvaluator<'a> {
    pub fn prevertices(&self) -> &'a [f64] {
        self.prevertices
    }

    pub fn betas(&self) -> &'a [f64] {
        &self.family.betas
    }

    fn active(&self) -> impl Iterator<Item = (usize, f64, f64)> + 'a {
        self.prevertices
            .iter()
            .zip(self.family.betas.iter())
            .enumerate()
            .filter(|(_, (_, &b))| b != 0.0)
            .map(|(k, (&z, &b))| (k, z, b))
    }

    fn prevertex_at(&self, z: C) -> Option<usize> {
        if z.im != 0.0 {
            return None;
        }
        self.prevertices.iter().position(|&p| p == z.re)
    }

    /// `Σ_k −β_k log(ζ − z_k)` over all factors except `skip`.
    #[inline]
    fn log_factor(&self, zeta: C, skip: Option<usize>) -> C {
        let mut acc = C::new(0.0, 0.0);
        for (k, zk, beta) in self.active() {
            if Some(k) == skip {
                continue;
            }
            let d = zeta - zk;
            acc.re -= beta * d.norm().ln();
            acc.im -= beta * upper_arg(d);
        }
        acc
    }

    #[inline]
    fn derivative_unchecked(&self, zeta: C, skip: Option<usize>) -> C {
        self.log_factor(zeta, skip).exp()
    }

    /// `SC'(z) = ∏ (z − z_k)^{−β_k}`.
    pub fn sc_deriv(&self, z: C) -> Result<C> {
        if let Some(index) = self.prevertex_at(z) {
            return Err(Error::AtPrevertex { index });
        }
        Ok(self.derivative_unchecked(z, None))
    }

    /// `SC''(z) / SC'(z) = −Σ β_k / (z − z_k)`.
    pub fn sc_log_deriv_sum(&self, z: C) -> Result<C> {
        if let Some(index) = self.prevertex_at(z) {
            return Err(Error::AtPrevertex { index });
        }
        Ok(self
            .active()
            .fold(C::new(0.0, 0.0), |acc, (_, zk, beta)| acc - beta / (z - zk)))
    }

    /// Prevertices adjacent to the basepoint: the largest negative and the
    /// smallest positive one.
    pub fn base_gap(&self) -> (Option<f64>, Option<f64>) {
        let left = self.prevertices.iter().copied().rev().find(|&z| z < 0.0);
        let right = self.prevertices.iter().copied().find(|&z| z > 0.0);
        (left, right)
    }

    /// Unit phase of `SC'` on the prevertex gap containing 0. The side of the
    /// polygon through `SC(0) = 0` points along this direction.
    pub fn base_phase(&self) -> C {
        let turn: f64 = self
            .active()
            .filter(|&(_, zk, _)| zk > 0.0)
            .map(|(_, _, beta)| beta)
            .sum();
        C::from_polar(1.0, -PI * turn)
    }

    /// Height of the lifted integration path: half the smallest gap between
    /// consecutive prevertices or between 0 and its neighbours.
    pub fn lift_height(&self) -> f64 {
        let mut points: Vec<f64> = self.prevertices.to_vec();
        points.push(0.0);
        points.sort_by(f64::total_cmp);
        let gap = points
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min);
        0.5 * gap
    }

    fn in_closed_base_gap(&self, x: f64) -> bool {
        let (left, right) = self.base_gap();
        left.is_none_or(|l| x >= l) && right.is_none_or(|r| x <= r)
    }

    /// `SC(z)` for `z` in the closed upper half-plane.
    ///
    /// Real targets in the prevertex gap around 0 (including its two end
    /// prevertices) are reached along the real axis; everything else along
    /// `0 → i h → z`.
    pub fn sc_eval(&self, z: C) -> Result<C> {
        if z.im < 0.0 {
            return Err(Error::InvalidArgument(alloc::format!(
                "{z} is below the real axis"
            )));
        }
        if z == C::new(0.0, 0.0) {
            return Ok(z);
        }
        let path: Vec<C> = if z.im == 0.0 && self.in_closed_base_gap(z.re) {
            vec![C::new(0.0, 0.0), z]
        } else {
            vec![C::new(0.0, 0.0), C::new(0.0, self.lift_height()), z]
        };
        self.sc_eval_along(&path)
    }

    /// `SC` integrated along an explicit polyline starting at the basepoint.
    /// Only the last vertex may be a prevertex.
    pub fn sc_eval_along(&self, path: &[C]) -> Result<C> {
        let end = *path.last().ok_or_else(|| Error::InvalidArgument("empty path".into()))?;
        let mut singular = None;
        if let Some(k) = self.prevertex_at(end) {
            let beta = self.family.betas[k];
            if beta >= 1.0 {
                return Err(Error::CornerAtInfinity { index: k, beta });
            }
            if beta != 0.0 {
                singular = Some(k);
            }
        }
        self.integrate_polyline(path, singular, |zeta, skip| self.derivative_unchecked(zeta, skip))
    }

    /// `(∂_s SC_s)(W)` when the prevertices move with velocities `zdot`:
    /// `∫_0^W SC'(ζ) Σ_j β_j ż_j / (ζ − z_j) dζ` along the real axis.
    pub fn drift_correction_rate(&self, w: f64, zdot: &[f64]) -> Result<C> {
        if zdot.len() != self.prevertices.len() {
            return Err(Error::InvalidArgument("one velocity per prevertex required".into()));
        }
        let (left, right) = self.base_gap();
        if left.is_some_and(|l| w <= l) || right.is_some_and(|r| w >= r) || !w.is_finite() {
            return Err(Error::OutsideBaseGap { w });
        }
        if w == 0.0 {
            return Ok(C::new(0.0, 0.0));
        }
        let path = [C::new(0.0, 0.0), C::new(w, 0.0)];
        self.integrate_polyline(&path, None, |zeta, _| {
            let mut weight = C::new(0.0, 0.0);
            for (k, zk, beta) in self.active() {
                weight += beta * zdot[k] / (zeta - zk);
            }
            self.derivative_unchecked(zeta, None) * weight
        })
    }

    fn integrate_polyline<F>(&self, path: &[C], singular: Option<usize>, integrand: F) -> Result<C>
    where
        F: Fn(C, Option<usize>) -> C,
    {
        let mut budget = self.family.settings.subdivision_limit;
        let mut total = C::new(0.0, 0.0);
        let last = path.len().saturating_sub(1);
        for (i, seg) in path.windows(2).enumerate() {
            let end_singular = if i + 1 == last { singular } else { None };
            total += self.integrate_segment(seg[0], seg[1], end_singular, &integrand, &mut budget)?;
        }
        Ok(total)
    }

    fn integrate_segment<F>(
        &self,
        a: C,
        b: C,
        singular: Option<usize>,
        integrand: &F,
        budget: &mut usize,
    ) -> Result<C>
    where
        F: Fn(C, Option<usize>) -> C,
    {
        let limit = self.family.settings.subdivision_limit;
        let mut total = C::new(0.0, 0.0);
        // pieces are processed front to back so the summation order is fixed
        let mut stack: Vec<(C, C, Option<usize>)> = vec![(a, b, singular)];
        while let Some((a, b, sing)) = stack.pop() {
            let len = (b - a).norm();
            if len == 0.0 {
                continue;
            }
            let clearance = self
                .active()
                .filter(|&(k, _, _)| Some(k) != sing)
                .map(|(_, zk, _)| point_segment_distance(zk, a, b))
                .fold(f64::INFINITY, f64::min);
            if len > 2.0 * clearance {
                if *budget <= 1 {
                    return Err(Error::SubdivisionLimit { limit });
                }
                *budget -= 1;
                let mid = (a + b) * 0.5;
                stack.push((mid, b, sing));
                stack.push((a, mid, None));
                continue;
            }
            total += match sing {
                None => self.legendre_piece(a, b, integrand),
                Some(k) => self.jacobi_piece(a, b, k, integrand),
            };
        }
        Ok(total)
    }

    fn legendre_piece<F>(&self, a: C, b: C, integrand: &F) -> C
    where
        F: Fn(C, Option<usize>) -> C,
    {
        let half = (b - a) * 0.5;
        let mid = (a + b) * 0.5;
        let sum = self
            .family
            .legendre
            .iter()
            .fold(C::new(0.0, 0.0), |acc, (x, w)| acc + integrand(mid + half * x, None) * w);
        sum * half
    }

    /// Piece ending at prevertex `k`: on `ζ = mid + x (b − a)/2` the factor
    /// `(ζ − z_k)^{−β_k}` equals `(|b − a|/2)^{−β_k} e^{−iβ_k θ} (1 − x)^{−β_k}`
    /// with `θ = arg(a − z_k)`, and `(1 − x)^{−β_k}` is the Jacobi weight.
    fn jacobi_piece<F>(&self, a: C, b: C, k: usize, integrand: &F) -> C
    where
        F: Fn(C, Option<usize>) -> C,
    {
        let rule = self.family.endpoint_rules[k]
            .as_ref()
            .expect("endpoint rule exists for every singular prevertex");
        let beta = self.family.betas[k];
        let half = (b - a) * 0.5;
        let mid = (a + b) * 0.5;
        let theta = upper_arg(a - b);
        let scale = C::from_polar(half.norm().powf(-beta), -beta * theta);
        let sum = rule
            .iter()
            .fold(C::new(0.0, 0.0), |acc, (x, w)| acc + integrand(mid + half * x, Some(k)) * w);
        sum * half * scale
    }
}

/// `f_t = SC_t − D_t`: a time slice together with the accumulated
/// drift correction `D_t = ∫_0^t (∂_s SC_s)(W_s) ds`.
#[derive(Debug, Clone, Copy)]
pub struct CorrectedMap<'a> {
    pub evaluator: ScEvaluator<'a>,
    pub correction: C,
}

impl CorrectedMap<'_> {
    pub fn eval(&self, z: C) -> Result<C> {
        Ok(self.evaluator.sc_eval(z)? - self.correction)
    }

    pub fn deriv(&self, z: C) -> Result<C> {
        self.evaluator.sc_deriv(z)
    }
}

/// Corners `f_t(Z^k_t)` of the image polygon at grid index `index`. Corners
/// with `β_k ≥ 1` are reported at infinity.
pub fn polygon_snapshot(path: &DrivingPath, family: &ScFamily, index: usize) -> Result<PolygonSnapshot> {
    let end = path.end_time();
    let state = path.states.get(index).ok_or(Error::TimeOutOfRange {
        t: index as f64 * path.dt,
        end,
    })?;
    if path.sigma.is_some_and(|s| state.t >= s) {
        return Err(Error::Collision { t: state.t });
    }
    let map = CorrectedMap {
        evaluator: family.evaluator(&state.z),
        correction: state.correction,
    };
    let corners = state
        .z
        .iter()
        .zip(family.betas())
        .map(|(&zk, &beta)| {
            if beta >= 1.0 {
                Ok(Corner::at_infinity(beta))
            } else {
                map.eval(C::new(zk, 0.0)).map(|p| Corner::finite(p, beta))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PolygonSnapshot {
        corners,
        time: state.t,
        closed: path.config.as_ref().is_some_and(|c| c.is_closed()),
        planar: path.config.as_ref().is_none_or(|c| c.is_planar()),
    })
}

/// Finite-difference velocity of one corner at one grid time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VelocityEstimate {
    pub time: f64,
    /// Central quotients with half-widths `4 dt`, `2 dt` and `dt`.
    pub quotients: [C; 3],
    /// Richardson extrapolation of the last two quotients.
    pub velocity: C,
    /// Richardson extrapolation of the first two quotients.
    pub coarse_velocity: C,
    /// `|velocity − coarse_velocity| / |velocity|`.
    pub relative_change: f64,
    /// `|q_1 − q_2| / |q_2 − q_3|`; close to 4 for a C² trajectory.
    pub convergence_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CornerTrajectory {
    pub index: usize,
    pub times: Vec<f64>,
    pub positions: Vec<C>,
    pub velocities: Vec<VelocityEstimate>,
}

/// Positions `f_t(Z^l_t)` at every grid time before the collision time, with
/// Richardson-extrapolated central-difference velocities wherever the
/// widest stencil fits.
pub fn corner_trajectory(path: &DrivingPath, family: &ScFamily, l: usize) -> Result<CornerTrajectory> {
    let beta = *family
        .betas()
        .get(l)
        .ok_or_else(|| Error::InvalidArgument(alloc::format!("no corner {l}")))?;
    if beta >= 1.0 {
        return Err(Error::CornerAtInfinity { index: l, beta });
    }
    let mut times = Vec::new();
    let mut positions = Vec::new();
    for state in &path.states {
        if path.sigma.is_some_and(|s| state.t >= s) {
            break;
        }
        let map = CorrectedMap {
            evaluator: family.evaluator(&state.z),
            correction: state.correction,
        };
        times.push(state.t);
        positions.push(map.eval(C::new(state.z[l], 0.0))?);
    }
    let mut velocities = Vec::new();
    for i in 4..positions.len().saturating_sub(4) {
        let q = |m: usize| (positions[i + m] - positions[i - m]) / (times[i + m] - times[i - m]);
        let quotients = [q(4), q(2), q(1)];
        let coarse = (quotients[1] * 4.0 - quotients[0]) / 3.0;
        let fine = (quotients[2] * 4.0 - quotients[1]) / 3.0;
        let denom = (quotients[1] - quotients[2]).norm();
        velocities.push(VelocityEstimate {
            time: times[i],
            quotients,
            velocity: fine,
            coarse_velocity: coarse,
            relative_change: (fine - coarse).norm() / fine.norm(),
            convergence_ratio: if denom > 0.0 {
                (quotients[0] - quotients[1]).norm() / denom
            } else {
                f64::INFINITY
            },
        });
    }
    Ok(CornerTrajectory {
        index: l,
        times,
        positions,
        velocities,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    fn family(betas: &[f64]) -> ScFamily {
        ScFamily::new(betas, QuadratureSettings::default()).unwrap()
    }

    #[test]
    fn cubic_map_from_double_slit() {
        let fam = family(&[-1.0, -1.0]);
        let z = [-1.0, 1.0];
        let ev = fam.evaluator(&z);
        let cubic = |p: C| p * p * p / 3.0 - p;
        assert!((ev.sc_eval(c(2.0, 0.0)).unwrap() - c(2.0 / 3.0, 0.0)).norm() < 1e-12);
        assert!((ev.sc_deriv(c(0.0, 0.0)).unwrap() - c(-1.0, 0.0)).norm() < 1e-15);
        for p in [c(1.0, 0.0), c(-1.0, 0.0), c(0.3, 2.0), c(-4.0, 0.5), c(5.0, 0.0)] {
            assert!((ev.sc_eval(p).unwrap() - cubic(p)).norm() < 1e-10, "{p}");
        }
    }

    #[test]
    fn basepoint_maps_to_zero() {
        let fam = family(&[0.5, 0.3, 0.7]);
        let z = [-2.0, 1.0, 3.0];
        assert_eq!(fam.evaluator(&z).sc_eval(c(0.0, 0.0)).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn arcsine_side_length() {
        let fam = family(&[0.5, 0.5]);
        let z = [-1.0, 1.0];
        let ev = fam.evaluator(&z);
        let right = ev.sc_eval(c(1.0, 0.0)).unwrap();
        let left = ev.sc_eval(c(-1.0, 0.0)).unwrap();
        assert!(((right - left).norm() - PI).abs() < 1e-8);
        // on (-1, 1) SC' = -i / sqrt(1 - x^2), so SC(1) = -i π/2
        assert!((right - c(0.0, -PI / 2.0)).norm() < 1e-12);
        assert!((ev.base_phase() - c(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn log_derivative_examples() {
        let fam = family(&[0.4, 0.4]);
        let z = [-1.0, 1.0];
        assert!(fam.evaluator(&z).sc_log_deriv_sum(c(0.0, 0.0)).unwrap().norm() < 1e-16);
        let fam = family(&[1.0]);
        let z = [0.0];
        let v = fam.evaluator(&z).sc_log_deriv_sum(c(2.0, 0.0)).unwrap();
        assert!((v - c(-0.5, 0.0)).norm() < 1e-16);
    }

    #[test]
    fn flat_family_is_identity() {
        let fam = family(&[0.0, 0.0]);
        let z = [-1.0, 2.0];
        let ev = fam.evaluator(&z);
        assert_eq!(ev.sc_deriv(c(0.3, 0.4)).unwrap(), c(1.0, 0.0));
        let p = c(-3.0, 1.5);
        assert!((ev.sc_eval(p).unwrap() - p).norm() < 1e-14);
        assert_eq!(ev.drift_correction_rate(0.7, &[1.0, 2.0]).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn prevertex_errors() {
        let fam = family(&[0.5, 1.0]);
        let z = [-1.0, 1.0];
        let ev = fam.evaluator(&z);
        assert_eq!(ev.sc_deriv(c(-1.0, 0.0)), Err(Error::AtPrevertex { index: 0 }));
        assert_eq!(
            ev.sc_eval(c(1.0, 0.0)),
            Err(Error::CornerAtInfinity { index: 1, beta: 1.0 })
        );
        assert_eq!(
            ev.drift_correction_rate(1.5, &[1.0, 1.0]),
            Err(Error::OutsideBaseGap { w: 1.5 })
        );
    }

    #[test]
    fn drift_rate_vanishes_at_basepoint() {
        let fam = family(&[0.5, 0.5]);
        let z = [-1.0, 1.0];
        let ev = fam.evaluator(&z);
        assert_eq!(ev.drift_correction_rate(0.0, &[-2.0, 2.0]).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn drift_rate_symmetric_config_is_linear_near_zero() {
        // integrand g(ζ) = SC'(ζ) Σ β ż/(ζ - z) with z = ±1, ż = ∓2 (W = 0):
        // Σ = β(-2/(ζ+1) + 2/(ζ-1)) = 4β/(ζ^2 - 1), even in ζ, so the rate is
        // W g(0) + O(W^3) with g(0) = SC'(0) · (-4β).
        let beta = 0.5;
        let fam = family(&[beta, beta]);
        let z = [-1.0, 1.0];
        let ev = fam.evaluator(&z);
        let zdot = [-2.0, 2.0];
        let g0 = ev.sc_deriv(c(0.0, 0.0)).unwrap() * (-4.0 * beta);
        for &w in &[1e-3, -1e-3] {
            let rate = ev.drift_correction_rate(w, &zdot).unwrap();
            assert!((rate - g0 * w).norm() < 1e-8, "{rate} vs {}", g0 * w);
        }
        let r1 = ev.drift_correction_rate(1e-3, &zdot).unwrap();
        let r2 = ev.drift_correction_rate(-1e-3, &zdot).unwrap();
        assert!((r1 + r2).norm() < 1e-16);
    }

    #[test]
    fn derivative_matches_central_differences() {
        let fam = family(&[0.5, -0.3, 0.8]);
        let z = [-1.5, 0.7, 2.0];
        let ev = fam.evaluator(&z);
        for p in [c(0.2, 0.9), c(-2.0, 0.6), c(1.3, 1.5), c(3.0, 0.4)] {
            let mut prev_err = f64::INFINITY;
            for &h in &[1e-2, 5e-3] {
                let hc = c(h, 0.0);
                let fd = (ev.sc_eval(p + hc).unwrap() - ev.sc_eval(p - hc).unwrap()) / (2.0 * h);
                let err = (fd - ev.sc_deriv(p).unwrap()).norm();
                // O(h^2): halving h cuts the error by about 4
                if prev_err.is_finite() {
                    assert!(err < prev_err / 3.0, "{p}: {err} vs {prev_err}");
                }
                prev_err = err;
            }
        }
    }

    #[test]
    fn log_derivative_matches_finite_differences() {
        let fam = family(&[0.5, -0.3, 0.8]);
        let z = [-1.5, 0.7, 2.0];
        let ev = fam.evaluator(&z);
        let h = 1e-5;
        for p in [c(0.2, 0.9), c(-2.0, 0.6), c(1.3, 1.5)] {
            let log = |q: C| ev.sc_deriv(q).unwrap().ln();
            let fd = (log(p + h) - log(p - h)) / (2.0 * h);
            assert!((fd - ev.sc_log_deriv_sum(p).unwrap()).norm() < 1e-8);
        }
    }

    #[test]
    fn path_independence() {
        let fam = family(&[0.5, 0.25, 0.75, 0.5]);
        let z = [-2.0, -0.5, 1.0, 3.0];
        let ev = fam.evaluator(&z);
        let target = c(1.7, 0.8);
        let direct = ev.sc_eval(target).unwrap();
        let detour = ev
            .sc_eval_along(&[c(0.0, 0.0), c(-1.0, 2.0), c(4.0, 3.0), target])
            .unwrap();
        assert!((direct - detour).norm() < 1e-9, "{direct} vs {detour}");
        // same for a corner reached from above
        let corner = c(1.0, 0.0);
        let a = ev.sc_eval(corner).unwrap();
        let b = ev.sc_eval_along(&[c(0.0, 0.0), c(0.5, 1.0), c(1.0, 0.5), corner]).unwrap();
        assert!((a - b).norm() < 1e-9, "{a} vs {b}");
    }

    #[test]
    fn square_closes() {
        let fam = family(&[0.5; 4]);
        let z = [-2.0, -1.0, 1.0, 2.0];
        let ev = fam.evaluator(&z);
        let corners: Vec<C> = z.iter().map(|&x| ev.sc_eval(c(x, 0.0)).unwrap()).collect();
        // opposite sides of a rectangle are parallel and of equal length
        let side = |i: usize| corners[(i + 1) % 4] - corners[i];
        assert!((side(0) + side(2)).norm() < 1e-9);
        assert!((side(1) + side(3)).norm() < 1e-9);
    }
}
