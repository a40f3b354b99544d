//! JSON run configuration shared by every subcommand.
//!
//! Unknown keys are rejected at every level. Sections a command does not
//! use may be omitted; their defaults are the settings the acceptance runs
//! use.

use std::path::Path;

use polysle::{DriverOptions, PrevertexConfig, QuadratureSettings};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub kappa: f64,
    /// Empty for plain SLE_κ.
    #[serde(default)]
    pub prevertices: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub betas: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rhos: Option<Vec<f64>>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub simulation: SimulationSection,
    #[serde(default)]
    pub quadrature: QuadratureSection,
    #[serde(default)]
    pub trace: TraceSection,
    #[serde(default)]
    pub map: MapSection,
    #[serde(default)]
    pub evolve: EvolveSection,
    #[serde(default)]
    pub verify: VerifySection,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum DriverSpec {
    /// `W = √κ B` plus the SLE(κ, ρ) drift.
    Brownian,
    /// `W ≡ value`.
    Constant { value: f64 },
    /// `W = intercept + slope · t`.
    Linear {
        slope: f64,
        #[serde(default)]
        intercept: f64,
    },
    /// `W = amplitude · sin(frequency · t)`.
    Sine { amplitude: f64, frequency: f64 },
}

impl DriverSpec {
    pub fn deterministic(&self) -> Option<impl Fn(f64) -> f64> {
        let spec = *self;
        match spec {
            DriverSpec::Brownian => None,
            _ => Some(move |t: f64| match spec {
                DriverSpec::Constant { value } => value,
                DriverSpec::Linear { slope, intercept } => intercept + slope * t,
                DriverSpec::Sine { amplitude, frequency } => amplitude * (frequency * t).sin(),
                DriverSpec::Brownian => unreachable!(),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationSection {
    pub t_end: f64,
    pub dt: f64,
    /// `None` means `10 √(κ dt)`.
    pub collision_tol: Option<f64>,
    pub max_refine_depth: u32,
    pub track_correction: bool,
    pub driver: DriverSpec,
}

impl Default for SimulationSection {
    fn default() -> Self {
        SimulationSection {
            t_end: 0.05,
            dt: 1e-4,
            collision_tol: None,
            max_refine_depth: 16,
            track_correction: true,
            driver: DriverSpec::Brownian,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureSection {
    pub order: usize,
    pub subdivision_limit: usize,
}

impl Default for QuadratureSection {
    fn default() -> Self {
        let q = QuadratureSettings::default();
        QuadratureSection {
            order: q.order,
            subdivision_limit: q.subdivision_limit,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TraceSection {
    pub stride: usize,
    /// Points `[re, im]` to flow along the path.
    pub flow_points: Vec<[f64; 2]>,
    /// `None` means `√(4 dt)`.
    pub swallow_tol: Option<f64>,
}

impl Default for TraceSection {
    fn default() -> Self {
        TraceSection {
            stride: 1,
            flow_points: Vec::new(),
            swallow_tol: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MapSection {
    /// Grid time of the snapshot.
    pub time: f64,
    /// Boundary samples per prevertex gap.
    pub samples: usize,
}

impl Default for MapSection {
    fn default() -> Self {
        MapSection { time: 0.0, samples: 64 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolveSection {
    pub frames: Vec<f64>,
    pub samples: usize,
}

impl Default for EvolveSection {
    fn default() -> Self {
        EvolveSection {
            frames: Vec::new(),
            samples: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct VerifySection {
    pub martingale: MartingaleSection,
    pub qv: QvSection,
    pub hitting: HittingSection,
    pub theorem: TheoremSection,
    pub metric: MetricSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MartingaleSection {
    pub t_end: f64,
    pub dt: f64,
    pub n: usize,
    pub attrition_limit: f64,
    pub se_gate: f64,
}

impl Default for MartingaleSection {
    fn default() -> Self {
        MartingaleSection {
            t_end: 0.05,
            dt: 1e-4,
            n: 20_000,
            attrition_limit: 0.2,
            se_gate: 3.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QvSection {
    pub t_end: f64,
    pub dt: f64,
    pub n: usize,
    pub intervals: usize,
}

impl Default for QvSection {
    fn default() -> Self {
        QvSection {
            t_end: 0.2,
            dt: 1e-4,
            n: 100,
            intervals: 20,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HittingSection {
    pub x: f64,
    pub y: f64,
    pub n: usize,
    pub dt: f64,
    pub t_max: f64,
    pub stop_ratio: f64,
    pub undecided_limit: f64,
    pub se_gate: f64,
}

impl Default for HittingSection {
    fn default() -> Self {
        let h = polysle::verify::HittingOptions::default();
        HittingSection {
            x: 1.0,
            y: 3.0,
            n: 50_000,
            dt: h.dt,
            t_max: h.t_max,
            stop_ratio: h.stop_ratio,
            undecided_limit: h.undecided_limit,
            se_gate: h.se_gate,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TheoremSection {
    /// Sample points `[re w, im w, t]`; empty means five defaults spread
    /// over the simulated path.
    pub points: Vec<[f64; 3]>,
    /// Stencil half-width; `None` means `dt / 10⁴`.
    pub h: Option<f64>,
    pub tolerance: f64,
}

impl Default for TheoremSection {
    fn default() -> Self {
        TheoremSection {
            points: Vec::new(),
            h: None,
            tolerance: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricSection {
    pub t: f64,
    pub dt: f64,
    pub n: usize,
    pub drift_sign: f64,
    pub states: usize,
    pub se_gate: f64,
}

impl Default for MetricSection {
    fn default() -> Self {
        MetricSection {
            t: 0.05,
            dt: 1e-4,
            n: 20_000,
            drift_sign: 1.0,
            states: 100,
            se_gate: 3.0,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig, CliError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        RunConfig::parse(&text)
    }

    pub fn parse(text: &str) -> Result<RunConfig, CliError> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    fn check(&self) -> Result<(), CliError> {
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return Err(CliError::Config(format!("kappa must be positive, got {}", self.kappa)));
        }
        match (&self.betas, &self.rhos, self.prevertices.is_empty()) {
            (Some(_), Some(_), _) => return Err(CliError::Config("give either betas or rhos, not both".into())),
            (None, None, false) => return Err(CliError::Config("prevertices need betas or rhos".into())),
            (Some(v), None, true) | (None, Some(v), true) if !v.is_empty() => {
                return Err(CliError::Config("weights given without prevertices".into()))
            }
            _ => {}
        }
        let s = &self.simulation;
        if !(s.dt > 0.0 && s.t_end > 0.0 && s.dt <= s.t_end) {
            return Err(CliError::Config("simulation needs 0 < dt <= t_end".into()));
        }
        if self.trace.stride == 0 {
            return Err(CliError::Config("trace.stride must be positive".into()));
        }
        self.prevertex_config().map(|_| ())
    }

    /// The force-point configuration, or `None` for plain SLE_κ.
    pub fn prevertex_config(&self) -> Result<Option<PrevertexConfig>, CliError> {
        if self.prevertices.is_empty() {
            return Ok(None);
        }
        let z = self.prevertices.clone();
        let cfg = match (&self.betas, &self.rhos) {
            (Some(b), None) => PrevertexConfig::new(z, b.clone(), self.kappa),
            (None, Some(r)) => PrevertexConfig::from_rhos(z, r, self.kappa),
            _ => unreachable!("checked on load"),
        };
        cfg.map(Some).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn require_prevertices(&self, what: &str) -> Result<PrevertexConfig, CliError> {
        self.prevertex_config()?
            .ok_or_else(|| CliError::Config(format!("{what} needs prevertices and weights")))
    }

    pub fn quadrature(&self) -> QuadratureSettings {
        QuadratureSettings {
            order: self.quadrature.order,
            subdivision_limit: self.quadrature.subdivision_limit,
        }
    }

    pub fn driver_options(&self) -> DriverOptions {
        DriverOptions {
            collision_tol: self.simulation.collision_tol,
            max_refine_depth: self.simulation.max_refine_depth,
            track_correction: self.simulation.track_correction,
            quadrature: self.quadrature(),
        }
    }

    /// SHA-256 of the canonical JSON form (after command-line overrides).
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&canonical))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_takes_defaults() {
        let cfg = RunConfig::parse(r#"{"kappa": 4, "prevertices": [-1, 1], "betas": [0.5, 0.5]}"#).unwrap();
        assert_eq!(cfg.simulation, SimulationSection::default());
        assert_eq!(cfg.prevertex_config().unwrap().unwrap().rhos(), vec![1.0, 1.0]);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::parse(r#"{"kappa": 4, "kapa": 2}"#).is_err());
        assert!(RunConfig::parse(r#"{"kappa": 4, "simulation": {"steps": 3}}"#).is_err());
        assert!(RunConfig::parse(r#"{"kappa": 4, "simulation": {"driver": {"kind": "constant", "value": 0, "x": 1}}}"#).is_err());
    }

    #[test]
    fn weights_must_be_unambiguous() {
        assert!(RunConfig::parse(r#"{"kappa": 4, "prevertices": [-1, 1]}"#).is_err());
        assert!(RunConfig::parse(r#"{"kappa": 4, "prevertices": [-1, 1], "betas": [0.5, 0.5], "rhos": [1, 1]}"#).is_err());
        assert!(RunConfig::parse(r#"{"kappa": 4, "prevertices": [1, 2], "betas": [0.5, 0.5]}"#).is_err());
        assert!(RunConfig::parse(r#"{"kappa": 4, "prevertices": [-1, 1], "rhos": [1, 1]}"#).is_ok());
    }

    #[test]
    fn hash_tracks_effective_settings() {
        let mut a = RunConfig::parse(r#"{"kappa": 8}"#).unwrap();
        let h = a.hash();
        assert_eq!(h.len(), 64);
        a.seed = 9;
        assert_ne!(a.hash(), h);
    }
}
