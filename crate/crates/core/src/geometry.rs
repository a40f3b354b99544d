//! Weighted prevertex configurations and polygon corners.
//!
//! A configuration is the half-plane description of a marked polygon: real
//! prevertices `z_1 < … < z_n` and exterior-angle weights `β_k` (in units of
//! π). The force-point weights of SLE(κ, ρ) are `ρ_k = (κ/2) β_k`.

use alloc::vec::Vec;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance used when deciding whether the weights close up a polygon.
pub const CLOSURE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum CornerPosition {
    Finite(Complex64),
    AtInfinity,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Corner {
    pub position: CornerPosition,
    /// Exterior angle in units of π.
    pub beta: f64,
}

impl Corner {
    pub fn finite(position: Complex64, beta: f64) -> Self {
        Corner {
            position: CornerPosition::Finite(position),
            beta,
        }
    }

    pub fn at_infinity(beta: f64) -> Self {
        Corner {
            position: CornerPosition::AtInfinity,
            beta,
        }
    }

    /// Interior angle in units of π; `alpha + beta == 1`.
    pub fn alpha(&self) -> f64 {
        1.0 - self.beta
    }

    pub fn is_finite(&self) -> bool {
        matches!(self.position, CornerPosition::Finite(_))
    }

    /// True when the weight fits the corner kind: `[-1, 1)` for finite
    /// corners (slit tips at -1), `[1, 3]` for corners at infinity.
    pub fn angle_in_range(&self) -> bool {
        match self.position {
            CornerPosition::Finite(_) => (-1.0..1.0).contains(&self.beta),
            CornerPosition::AtInfinity => (1.0..=3.0).contains(&self.beta),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    RhoToBeta,
    BetaToRho,
}

/// Non-fatal findings of [`validate_config`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ConfigWarning {
    /// The weights do not sum to 2, so the image is not a closed polygon.
    OpenPolygon { sum: f64 },
    /// A weight outside `[-1, 1)`: the Schwarz–Christoffel map is no longer
    /// injective and the image is a polygon on a Riemann surface.
    NonPlanar { index: usize, beta: f64 },
    /// The implied corner at infinity, `β_∞ = 2 − Σβ`, is outside `[1, 3]`
    /// (and nonzero), so the image cannot be a planar generalized polygon.
    NonPlanarAtInfinity { beta: f64 },
}

/// Checks a raw configuration. Structural defects are errors; weights that
/// leave the planar range or fail to close the polygon are reported as
/// warnings.
///
/// A single prevertex may sit on either side of 0; with two or more the
/// prevertices must straddle the basepoint.
pub fn validate_config(prevertices: &[f64], betas: &[f64], kappa: f64) -> Result<Vec<ConfigWarning>> {
    if !(kappa.is_finite() && kappa > 0.0) {
        return Err(Error::InvalidKappa(kappa));
    }
    if prevertices.is_empty() {
        return Err(Error::EmptyConfig);
    }
    if prevertices.len() != betas.len() {
        return Err(Error::LengthMismatch {
            prevertices: prevertices.len(),
            weights: betas.len(),
        });
    }
    if prevertices.iter().any(|z| !z.is_finite()) {
        return Err(Error::NonFinite { what: "prevertices" });
    }
    if betas.iter().any(|b| !b.is_finite()) {
        return Err(Error::NonFinite { what: "betas" });
    }
    for (index, pair) in prevertices.windows(2).enumerate() {
        if pair[1] <= pair[0] {
            return Err(Error::NonMonotone { index: index + 1 });
        }
    }
    if let Some(index) = prevertices.iter().position(|&z| z == 0.0) {
        return Err(Error::PrevertexAtBasepoint { index });
    }
    if prevertices.len() > 1 {
        if prevertices[0] > 0.0 {
            return Err(Error::NotStraddling { side: "left" });
        }
        if prevertices[prevertices.len() - 1] < 0.0 {
            return Err(Error::NotStraddling { side: "right" });
        }
    }

    let mut warnings = Vec::new();
    let sum = exterior_angle_sum(betas);
    if (sum - 2.0).abs() > CLOSURE_TOL {
        warnings.push(ConfigWarning::OpenPolygon { sum });
    }
    for (index, &beta) in betas.iter().enumerate() {
        if !(-1.0..1.0).contains(&beta) {
            warnings.push(ConfigWarning::NonPlanar { index, beta });
        }
    }
    let at_infinity = 2.0 - sum;
    if at_infinity.abs() > CLOSURE_TOL && !(1.0 - CLOSURE_TOL..=3.0 + CLOSURE_TOL).contains(&at_infinity) {
        warnings.push(ConfigWarning::NonPlanarAtInfinity { beta: at_infinity });
    }
    Ok(warnings)
}

/// Elementwise `ρ = (κ/2) β` or its inverse.
pub fn rho_beta_convert(values: &[f64], kappa: f64, direction: Direction) -> Result<Vec<f64>> {
    if !(kappa.is_finite() && kappa > 0.0) {
        return Err(Error::InvalidKappa(kappa));
    }
    let half = kappa / 2.0;
    Ok(match direction {
        Direction::BetaToRho => values.iter().map(|b| half * b).collect(),
        Direction::RhoToBeta => values.iter().map(|r| r / half).collect(),
    })
}

/// Sum of exterior angles. Summed in sorted order so the result does not
/// depend on the order of the input.
pub fn exterior_angle_sum(betas: &[f64]) -> f64 {
    let mut sorted: Vec<f64> = betas.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.iter().sum()
}

/// Prevertices and weights of a marked polygon together with κ. The
/// Schwarz–Christoffel basepoint is fixed at 0.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrevertexConfig {
    prevertices: Vec<f64>,
    betas: Vec<f64>,
    kappa: f64,
    warnings: Vec<ConfigWarning>,
}

impl PrevertexConfig {
    pub fn new(prevertices: Vec<f64>, betas: Vec<f64>, kappa: f64) -> Result<Self> {
        let warnings = validate_config(&prevertices, &betas, kappa)?;
        Ok(PrevertexConfig {
            prevertices,
            betas,
            kappa,
            warnings,
        })
    }

    pub fn from_rhos(prevertices: Vec<f64>, rhos: &[f64], kappa: f64) -> Result<Self> {
        let betas = rho_beta_convert(rhos, kappa, Direction::RhoToBeta)?;
        Self::new(prevertices, betas, kappa)
    }

    pub fn prevertices(&self) -> &[f64] {
        &self.prevertices
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    pub fn rhos(&self) -> Vec<f64> {
        let half = self.kappa / 2.0;
        self.betas.iter().map(|b| half * b).collect()
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn basepoint(&self) -> f64 {
        0.0
    }

    pub fn len(&self) -> usize {
        self.prevertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prevertices.is_empty()
    }

    pub fn warnings(&self) -> &[ConfigWarning] {
        &self.warnings
    }

    pub fn is_closed(&self) -> bool {
        (exterior_angle_sum(&self.betas) - 2.0).abs() <= CLOSURE_TOL
    }

    pub fn is_planar(&self) -> bool {
        !self.warnings.iter().any(|w| {
            matches!(
                w,
                ConfigWarning::NonPlanar { .. } | ConfigWarning::NonPlanarAtInfinity { .. }
            )
        })
    }

    /// True when every weight vanishes (plain SLE, identity map).
    pub fn is_flat(&self) -> bool {
        self.betas.iter().all(|&b| b == 0.0)
    }
}

/// Image polygon at one time slice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolygonSnapshot {
    pub corners: Vec<Corner>,
    pub time: f64,
    pub closed: bool,
    pub planar: bool,
}

impl PolygonSnapshot {
    pub fn turning_sum(&self) -> f64 {
        let betas: Vec<f64> = self.corners.iter().map(|c| c.beta).collect();
        exterior_angle_sum(&betas)
    }

    pub fn finite_positions(&self) -> Vec<Complex64> {
        self.corners
            .iter()
            .filter_map(|c| match c.position {
                CornerPosition::Finite(p) => Some(p),
                CornerPosition::AtInfinity => None,
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    #[test]
    fn open_polygon_is_flagged_not_rejected() {
        let warnings = validate_config(&[-1.0, 1.0], &[0.5, 0.5], 4.0).unwrap();
        assert_eq!(warnings, vec![ConfigWarning::OpenPolygon { sum: 1.0 }]);
    }

    #[test]
    fn prevertices_must_straddle_zero() {
        assert_eq!(
            validate_config(&[1.0, 2.0], &[0.5, 0.5], 4.0),
            Err(Error::NotStraddling { side: "left" })
        );
        assert_eq!(
            validate_config(&[-2.0, -1.0], &[0.5, 0.5], 4.0),
            Err(Error::NotStraddling { side: "right" })
        );
    }

    #[test]
    fn single_prevertex_may_sit_on_either_side() {
        assert!(validate_config(&[1.0], &[-1.0], 2.0).is_ok());
        assert!(validate_config(&[-3.0], &[0.5], 2.0).is_ok());
    }

    #[test]
    fn cubic_configuration_warns_non_planar() {
        let warnings = validate_config(&[-1.0, 1.0], &[-1.0, -1.0], 2.0).unwrap();
        assert!(warnings.contains(&ConfigWarning::OpenPolygon { sum: -2.0 }));
        // -1 itself is a slit tip; the non-injectivity comes from the corner at infinity
        assert!(!warnings.iter().any(|w| matches!(w, ConfigWarning::NonPlanar { .. })));
        assert!(warnings.contains(&ConfigWarning::NonPlanarAtInfinity { beta: 4.0 }));
        let cfg = PrevertexConfig::new(vec![-1.0, 1.0], vec![-1.0, -1.0], 2.0).unwrap();
        assert!(!cfg.is_planar());
        // two right angles leave a half-strip: open but planar
        let cfg = PrevertexConfig::new(vec![-1.0, 1.0], vec![0.5, 0.5], 4.0).unwrap();
        assert!(cfg.is_planar() && !cfg.is_closed());
        let warnings = validate_config(&[-1.0, 1.0], &[-1.5, 1.5], 2.0).unwrap();
        assert_eq!(
            warnings,
            vec![
                ConfigWarning::OpenPolygon { sum: 0.0 },
                ConfigWarning::NonPlanar { index: 0, beta: -1.5 },
                ConfigWarning::NonPlanar { index: 1, beta: 1.5 }
            ]
        );
    }

    #[test]
    fn structural_errors() {
        assert_eq!(validate_config(&[], &[], 1.0), Err(Error::EmptyConfig));
        assert_eq!(
            validate_config(&[-1.0, 0.0, 1.0], &[0.0; 3], 1.0),
            Err(Error::PrevertexAtBasepoint { index: 1 })
        );
        assert_eq!(
            validate_config(&[-1.0, -2.0, 1.0], &[0.0; 3], 1.0),
            Err(Error::NonMonotone { index: 1 })
        );
        assert_eq!(
            validate_config(&[-1.0, 1.0], &[0.0], 1.0),
            Err(Error::LengthMismatch { prevertices: 2, weights: 1 })
        );
        assert_eq!(
            validate_config(&[-1.0, 1.0], &[0.0, f64::NAN], 1.0),
            Err(Error::NonFinite { what: "betas" })
        );
        assert_eq!(validate_config(&[-1.0, 1.0], &[0.0, 0.0], 0.0), Err(Error::InvalidKappa(0.0)));
    }

    #[test]
    fn rho_beta_examples() {
        assert_eq!(
            rho_beta_convert(&[0.5, 0.5], 4.0, Direction::BetaToRho).unwrap(),
            vec![1.0, 1.0]
        );
        assert_eq!(
            rho_beta_convert(&[0.0, 0.0], 7.3, Direction::RhoToBeta).unwrap(),
            vec![0.0, 0.0]
        );
        assert_eq!(
            rho_beta_convert(&[-1.0, -1.0], 2.0, Direction::BetaToRho).unwrap(),
            vec![-1.0, -1.0]
        );
        assert_eq!(
            rho_beta_convert(&[1.0], -1.0, Direction::BetaToRho),
            Err(Error::InvalidKappa(-1.0))
        );
    }

    #[test]
    fn angle_sums() {
        let third = 2.0 / 3.0;
        assert!((exterior_angle_sum(&[third, third, third]) - 2.0).abs() < 1e-15);
        // strip: two corners at infinity with beta = 1
        assert_eq!(exterior_angle_sum(&[1.0, 1.0]), 2.0);
        // slit plane: slit tip and a corner at infinity with beta = 3
        assert_eq!(exterior_angle_sum(&[-1.0, 3.0]), 2.0);
    }

    #[test]
    fn corner_bookkeeping() {
        let c = Corner::finite(Complex64::new(1.0, 0.0), 0.25);
        assert_eq!(c.alpha() + c.beta, 1.0);
        assert!(c.angle_in_range());
        assert!(Corner::finite(Complex64::new(0.0, 0.0), -1.0).angle_in_range());
        assert!(Corner::at_infinity(3.0).angle_in_range());
        assert!(!Corner::at_infinity(0.5).angle_in_range());
    }

    proptest! {
        #[test]
        fn rho_beta_round_trip(values in prop::collection::vec(-1e6f64..1e6, 0..8), kappa in 1e-3f64..50.0) {
            let rhos = rho_beta_convert(&values, kappa, Direction::BetaToRho).unwrap();
            let back = rho_beta_convert(&rhos, kappa, Direction::RhoToBeta).unwrap();
            for (a, b) in values.iter().zip(&back) {
                prop_assert!((a - b).abs() <= 4.0 * f64::EPSILON * a.abs().max(1e-300));
            }
        }

        #[test]
        fn angle_sum_is_permutation_invariant(mut betas in prop::collection::vec(-3.0f64..3.0, 1..10), seed in any::<u64>()) {
            let before = exterior_angle_sum(&betas);
            // deterministic shuffle from the seed
            let mut s = seed;
            for i in (1..betas.len()).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let j = (s >> 33) as usize % (i + 1);
                betas.swap(i, j);
            }
            prop_assert_eq!(before.to_bits(), exterior_angle_sum(&betas).to_bits());
        }

        #[test]
        fn validation_does_not_touch_input(z in prop::collection::vec(-5.0f64..5.0, 1..6)) {
            let betas = vec![0.25; z.len()];
            let copy = z.clone();
            let _ = validate_config(&z, &betas, 2.0);
            prop_assert_eq!(z, copy);
        }
    }
}
