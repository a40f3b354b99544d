//! Gauss rules on [-1, 1] from the Golub–Welsch eigenvalue method.
//!
//! Only the weight `(1 − x)^α` is needed: a Schwarz–Christoffel factor
//! `(ζ − z_k)^{−β_k}` has its singularity at the far end of the final
//! integration segment, so `α = −β_k` and the other end is regular.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use crate::error::{Error, Result};
use crate::special::gamma;

#[derive(Debug, Clone, PartialEq)]
pub struct GaussRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    alpha: f64,
}

impl GaussRule {
    /// Gauss–Legendre rule with `order` nodes.
    pub fn legendre(order: usize) -> Result<Self> {
        Self::jacobi(order, 0.0, 0.0)
    }

    /// Gauss–Jacobi rule for the weight `(1 − x)^alpha (1 + x)^beta`.
    pub fn jacobi(order: usize, alpha: f64, beta: f64) -> Result<Self> {
        if order < 1 {
            return Err(Error::InvalidArgument("quadrature order must be at least 1".into()));
        }
        if !(alpha > -1.0 && beta > -1.0) {
            return Err(Error::InvalidArgument(alloc::format!(
                "Jacobi exponents must exceed -1 (alpha = {alpha}, beta = {beta})"
            )));
        }
        let ab = alpha + beta;
        let mut diag = vec![0.0; order];
        let mut off = vec![0.0; order];
        diag[0] = (beta - alpha) / (ab + 2.0);
        for k in 1..order {
            let kf = k as f64;
            let s = 2.0 * kf + ab;
            diag[k] = (beta * beta - alpha * alpha) / (s * (s + 2.0));
            off[k - 1] = (4.0 * kf * (kf + alpha) * (kf + beta) * (kf + ab)
                / (s * s * (s + 1.0) * (s - 1.0)))
                .sqrt();
        }
        let mu0 = 2f64.powf(ab + 1.0) * gamma(alpha + 1.0) * gamma(beta + 1.0) / gamma(ab + 2.0);
        let first = symmetric_tridiagonal_eigen(&mut diag, &mut off)?;
        let mut pairs: Vec<(f64, f64)> = diag
            .iter()
            .zip(&first)
            .map(|(&x, &v)| (x, mu0 * v * v))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(GaussRule {
            nodes: pairs.iter().map(|p| p.0).collect(),
            weights: pairs.iter().map(|p| p.1).collect(),
            alpha,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }
}

/// Implicit QL iteration on a symmetric tridiagonal matrix. On return `diag`
/// holds the eigenvalues; the first component of each normalized
/// eigenvector is returned. `off[i]` couples rows `i` and `i + 1`.
fn symmetric_tridiagonal_eigen(diag: &mut [f64], off: &mut [f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    let mut first = vec![0.0; n];
    first[0] = 1.0;
    if n == 1 {
        return Ok(first);
    }
    off[n - 1] = 0.0;
    for l in 0..n {
        let mut iterations = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let scale = diag[m].abs() + diag[m + 1].abs();
                if off[m].abs() <= f64::EPSILON * scale {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iterations += 1;
            if iterations > 100 {
                return Err(Error::InvalidArgument("QL iteration did not converge".into()));
            }
            let mut g = (diag[l + 1] - diag[l]) / (2.0 * off[l]);
            let mut r = g.hypot(1.0);
            g = diag[m] - diag[l] + off[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * off[i];
                let b = c * off[i];
                r = f.hypot(g);
                off[i + 1] = r;
                if r == 0.0 {
                    diag[i + 1] -= p;
                    off[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = diag[i + 1] - p;
                r = (diag[i] - g) * s + 2.0 * c * b;
                p = s * r;
                diag[i + 1] = g + p;
                g = c * r - b;
                let v = first[i + 1];
                first[i + 1] = s * first[i] + c * v;
                first[i] = c * first[i] - s * v;
            }
            if deflated {
                continue;
            }
            diag[l] -= p;
            off[l] = g;
            off[m] = 0.0;
        }
    }
    Ok(first)
}
