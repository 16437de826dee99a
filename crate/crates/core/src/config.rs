//! JSON problem description and its validated, ready-to-solve form.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::actuators::{
    make_pointwise, make_target, make_zone, Actuator, TargetSpec, TargetSubspace,
};
use crate::error::{Error, Result};
use crate::spectral::{ControlSignal, SpectralField, TimeGrid, Trajectory};

fn default_n_modes() -> usize {
    20
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub alpha: f64,
    #[serde(rename = "T")]
    pub horizon: f64,
    #[serde(default = "default_n_modes")]
    pub n_modes: usize,
    pub n_steps: usize,
    pub y0: Vec<f64>,
    pub actuator: ActuatorConfig,
    pub target: TargetConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ActuatorConfig {
    Zone {
        a: f64,
        b: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        profile: Option<Vec<f64>>,
    },
    Pointwise {
        b: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum TargetConfig {
    /// `G` spanned by the listed eigenmodes (1-based).
    Modes { indices: Vec<usize> },
    /// `G` spanned by explicit coordinate vectors.
    Basis { vectors: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Relative threshold for dead influence coefficients and Gramian rank.
    pub gramian_rank: f64,
    /// Largest accepted `‖P y(T)‖` after synthesis.
    pub verify_distance: f64,
    /// Relative accuracy requested from adaptive quadratures.
    pub quadrature: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            gramian_rank: 1e-10,
            verify_distance: 1e-4,
            quadrature: 1e-10,
        }
    }
}

/// A validated configuration with every derived object built.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub alpha: f64,
    pub grid: TimeGrid,
    pub y0: SpectralField,
    pub actuator: Actuator,
    pub target: TargetSubspace,
    pub tolerances: Tolerances,
}

impl Problem {
    pub fn n_modes(&self) -> usize {
        self.y0.n_modes()
    }

    pub fn mild_solution(&self, u: &ControlSignal) -> Result<Trajectory> {
        crate::spectral::mild_solution(self.alpha, &self.y0, self.actuator.influence(), u)
    }
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::validation(field, format!("must be positive and finite, got {v}")))
    }
}

impl ProblemConfig {
    pub fn validate(&self) -> Result<()> {
        self.build().map(|_| ())
    }

    pub fn build(&self) -> Result<Problem> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::validation(
                "alpha",
                format!("alpha must lie strictly in (0,1), got {}", self.alpha),
            ));
        }
        positive("T", self.horizon)?;
        if self.n_modes == 0 {
            return Err(Error::validation("n_modes", "must be at least 1"));
        }
        if self.n_steps < 2 {
            return Err(Error::validation("n_steps", format!("must be at least 2, got {}", self.n_steps)));
        }
        if self.y0.len() != self.n_modes {
            return Err(Error::validation(
                "y0",
                format!("has {} coefficients, n_modes is {}", self.y0.len(), self.n_modes),
            ));
        }
        positive("tolerances.gramian_rank", self.tolerances.gramian_rank)?;
        positive("tolerances.verify_distance", self.tolerances.verify_distance)?;
        positive("tolerances.quadrature", self.tolerances.quadrature)?;

        let grid = TimeGrid::new(self.horizon, self.n_steps)?;
        let y0 = SpectralField::new(self.y0.clone())
            .map_err(|e| Error::validation("y0", e.to_string()))?;
        let actuator = match &self.actuator {
            ActuatorConfig::Zone { a, b, profile } => make_zone(*a, *b, profile.as_deref(), self.n_modes),
            ActuatorConfig::Pointwise { b } => make_pointwise(*b, self.n_modes),
        }
        .map_err(|e| match e {
            Error::Validation { .. } => e,
            other => Error::validation("actuator", other.to_string()),
        })?;
        let spec = match &self.target {
            TargetConfig::Modes { indices } => TargetSpec::Modes(indices.clone()),
            TargetConfig::Basis { vectors } => TargetSpec::Basis(vectors.clone()),
        };
        let target = make_target(&spec, self.n_modes).map_err(|e| match e {
            Error::Validation { .. } => e,
            other => Error::validation("target", other.to_string()),
        })?;
        Ok(Problem {
            alpha: self.alpha,
            grid,
            y0,
            actuator,
            target,
            tolerances: self.tolerances,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ProblemConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config is always serializable")
    }
}

/// Reads and validates a configuration file.
pub fn load_config(path: &Path) -> Result<ProblemConfig> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    ProblemConfig::from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example_one() -> &'static str {
        r#"{
            "alpha": 0.4, "T": 1.0, "n_modes": 10, "n_steps": 64,
            "y0": [1, 0, 0, 0, 0, 0, 0, 0, 0, 0],
            "actuator": {"kind": "zone", "a": 0.2, "b": 0.5},
            "target": {"kind": "modes", "indices": [1]}
        }"#
    }

    #[test]
    fn example_config_is_valid() {
        let cfg = ProblemConfig::from_json(example_one()).unwrap();
        assert_eq!(cfg.n_modes, 10);
        assert_eq!(cfg.tolerances, Tolerances::default());
        let p = cfg.build().unwrap();
        assert_eq!(p.target.codim(), 9);
    }

    #[test]
    fn alpha_one_is_rejected() {
        let text = example_one().replace("\"alpha\": 0.4", "\"alpha\": 1.0");
        match ProblemConfig::from_json(&text) {
            Err(Error::Validation { field, message }) => {
                assert_eq!(field, "alpha");
                assert!(message.contains("alpha must lie strictly in (0,1)"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn degenerate_zone_is_rejected() {
        let text = example_one().replace("\"b\": 0.5", "\"b\": 0.2");
        assert!(matches!(
            ProblemConfig::from_json(&text),
            Err(Error::Validation { ref field, .. }) if field == "actuator"
        ));
    }

    #[test]
    fn parse_errors_are_typed() {
        assert!(matches!(ProblemConfig::from_json("{"), Err(Error::Parse(_))));
        let text = example_one().replace("\"n_steps\"", "\"n_stepz\"");
        assert!(matches!(ProblemConfig::from_json(&text), Err(Error::Parse(_))));
    }

    #[test]
    fn y0_length_checked() {
        let text = example_one().replace("[1, 0, 0, 0, 0, 0, 0, 0, 0, 0]", "[1, 0]");
        assert!(matches!(
            ProblemConfig::from_json(&text),
            Err(Error::Validation { ref field, .. }) if field == "y0"
        ));
    }

    #[test]
    fn round_trip() {
        let mut cfg = ProblemConfig::from_json(example_one()).unwrap();
        cfg.actuator = ActuatorConfig::Zone {
            a: 0.1,
            b: 0.7,
            profile: Some((0..10).map(|i| 0.1 * i as f64 + 1.0 / 3.0).collect()),
        };
        cfg.tolerances.quadrature = 3.3e-11;
        let back = ProblemConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(back, cfg);
    }
}
