//! JSON study configuration.
//!
//! A single versioned document drives every CLI subcommand: the conformal
//! map, lattice angles (radians by default, degrees with a `deg` suffix),
//! region, epsilon ladder, solver options, normalization source, and seed.

use std::collections::BTreeMap;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::analytic::ConformalMap;
use crate::error::{Error, Result};
use crate::lattice::{LatticeSpec, Region};
use crate::solver::SolverOptions;

/// An angle given as plain radians or as a string with a `deg`/`rad` suffix.
#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(untagged)]
pub enum AngleValue {
    Radians(f64),
    Tagged(String),
}

impl AngleValue {
    pub fn radians(&self) -> Result<f64> {
        match self {
            AngleValue::Radians(r) => Ok(*r),
            AngleValue::Tagged(s) => {
                let t = s.trim();
                if let Some(d) = t.strip_suffix("deg") {
                    d.trim()
                        .parse::<f64>()
                        .map(f64::to_radians)
                        .map_err(|_| Error::Config(format!("cannot parse angle {s:?}")))
                } else if let Some(r) = t.strip_suffix("rad") {
                    r.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Config(format!("cannot parse angle {s:?}")))
                } else {
                    Err(Error::Config(format!(
                        "angle {s:?} needs a 'deg' or 'rad' suffix"
                    )))
                }
            }
        }
    }
}

/// A map parameter: real number or `[re, im]` pair.
#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(untagged)]
pub enum ParamValue {
    Real(f64),
    Complex([f64; 2]),
}

impl ParamValue {
    pub fn complex(&self) -> Complex64 {
        match self {
            ParamValue::Real(x) => Complex64::new(*x, 0.0),
            ParamValue::Complex([re, im]) => Complex64::new(*re, *im),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
pub struct MapConfig {
    pub name: String,
    #[serde(default)]
    pub params: BTreeMap<String, ParamValue>,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
pub struct LatticeConfig {
    pub alpha: AngleValue,
    pub beta: AngleValue,
    pub gamma: AngleValue,
    /// Lattice origin in the plane; defaults to 0.
    #[serde(default)]
    pub origin: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum RegionConfig {
    Disc { center: [f64; 2], radius: f64 },
    Polygon { vertices: Vec<[f64; 2]> },
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
pub struct SolverConfig {
    #[serde(default = "default_gradient_tolerance")]
    pub gradient_tolerance: f64,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    #[serde(default = "default_line_search_shrink")]
    pub line_search_shrink: f64,
}

fn default_gradient_tolerance() -> f64 {
    1e-10
}
fn default_max_iterations() -> usize {
    50
}
fn default_line_search_shrink() -> f64 {
    0.5
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            gradient_tolerance: default_gradient_tolerance(),
            max_iterations: default_max_iterations(),
            line_search_shrink: default_line_search_shrink(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize, Default)]
#[serde(tag = "source", rename_all = "lowercase")]
pub enum NormalizationConfig {
    /// Image of the origin and seed direction from the analytic map.
    #[default]
    Analytic,
    Explicit {
        image_of_origin: [f64; 2],
        seed_direction: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
pub struct StudyConfig {
    pub version: u32,
    pub map: MapConfig,
    pub lattice: LatticeConfig,
    pub region: RegionConfig,
    /// Strictly decreasing positive scales; `solve` uses exactly one.
    pub epsilons: Vec<f64>,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub normalization: NormalizationConfig,
    /// Seed for randomized checks; the CLI flag overrides it.
    #[serde(default)]
    pub seed: Option<u64>,
    /// Expansion point for Taylor-defect studies; defaults to the lattice
    /// origin.
    #[serde(default)]
    pub v0: Option<[f64; 2]>,
    /// Face samples for the inward-gradient check (default 200).
    #[serde(default)]
    pub sample_count: Option<usize>,
}

impl StudyConfig {
    pub fn from_str(text: &str) -> Result<Self> {
        let config: StudyConfig = serde_json::from_str(text)
            .map_err(|e| Error::Config(format!("cannot parse config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != 1 {
            return Err(Error::Config(format!(
                "unsupported config version {} (expected 1)",
                self.version
            )));
        }
        if self.epsilons.is_empty() {
            return Err(Error::Config("epsilons must be nonempty".into()));
        }
        for &e in &self.epsilons {
            if !(e.is_finite() && e > 0.0) {
                return Err(Error::Config(format!("epsilon {e} must be positive")));
            }
        }
        for pair in self.epsilons.windows(2) {
            if pair[1] >= pair[0] {
                return Err(Error::Config("epsilons must be strictly decreasing".into()));
            }
        }
        // Angle and map validity.
        self.lattice_spec(self.epsilons[0])?;
        self.build_map()?;
        if let RegionConfig::Polygon { vertices } = &self.region {
            if vertices.len() < 3 {
                return Err(Error::Config("polygon needs at least 3 vertices".into()));
            }
        }
        Ok(())
    }

    pub fn lattice_spec(&self, epsilon: f64) -> Result<LatticeSpec> {
        let spec = LatticeSpec::new(
            self.lattice.alpha.radians()?,
            self.lattice.beta.radians()?,
            self.lattice.gamma.radians()?,
            epsilon,
        )
        .map_err(|e| Error::Config(e.to_string()))?;
        Ok(match self.lattice.origin {
            Some([x, y]) => spec.with_origin(Complex64::new(x, y)),
            None => spec,
        })
    }

    pub fn region(&self) -> Region {
        match &self.region {
            RegionConfig::Disc { center, radius } => Region::Disc {
                center: Complex64::new(center[0], center[1]),
                radius: *radius,
            },
            RegionConfig::Polygon { vertices } => Region::Polygon {
                vertices: vertices.iter().map(|&[x, y]| Complex64::new(x, y)).collect(),
            },
        }
    }

    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            gradient_tolerance: self.solver.gradient_tolerance,
            max_iterations: self.solver.max_iterations,
            line_search_shrink: self.solver.line_search_shrink,
            initial_guess: None,
        }
    }

    fn param(&self, key: &str) -> Result<Complex64> {
        self.map
            .params
            .get(key)
            .map(ParamValue::complex)
            .ok_or_else(|| {
                Error::Config(format!("map {:?} needs parameter {key:?}", self.map.name))
            })
    }

    /// Instantiate the configured conformal map from the built-in registry.
    pub fn build_map(&self) -> Result<ConformalMap> {
        match self.map.name.as_str() {
            "identity" => Ok(ConformalMap::identity()),
            "affine" => Ok(ConformalMap::affine(self.param("c")?, self.param("d")?)),
            "exp" => Ok(ConformalMap::exp()),
            "square" => Ok(ConformalMap::square()),
            "cubic_perturbation" => Ok(ConformalMap::cubic_perturbation(self.param("mu")?)),
            "moebius" => ConformalMap::moebius(
                self.param("a")?,
                self.param("b")?,
                self.param("c")?,
                self.param("d")?,
            ),
            other => Err(Error::UnknownMap(other.to_string())),
        }
    }

    pub fn v0(&self) -> Complex64 {
        match self.v0 {
            Some([x, y]) => Complex64::new(x, y),
            None => match self.lattice.origin {
                Some([x, y]) => Complex64::new(x, y),
                None => Complex64::new(0.0, 0.0),
            },
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn sample_count(&self) -> usize {
        self.sample_count.unwrap_or(200)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal(epsilons: &str) -> String {
        format!(
            r#"{{
                "version": 1,
                "map": {{"name": "exp"}},
                "lattice": {{"alpha": "60deg", "beta": "60 deg", "gamma": 1.0471975511965976}},
                "region": {{"type": "disc", "center": [0.0, 0.0], "radius": 0.8}},
                "epsilons": {epsilons}
            }}"#
        )
    }

    #[test]
    fn parses_angles_in_both_units() {
        let config = StudyConfig::from_str(&minimal("[0.2, 0.1, 0.05]")).unwrap();
        let spec = config.lattice_spec(0.1).unwrap();
        assert!((spec.alpha - spec.beta).abs() < 1e-15);
        assert!((spec.alpha - spec.gamma).abs() < 1e-12);
        assert_eq!(config.seed(), 0);
        assert_eq!(config.sample_count(), 200);
    }

    #[test]
    fn rejects_bad_epsilon_ladders() {
        assert!(StudyConfig::from_str(&minimal("[]")).is_err());
        assert!(StudyConfig::from_str(&minimal("[0.1, 0.2]")).is_err());
        assert!(StudyConfig::from_str(&minimal("[0.1, 0.1]")).is_err());
        assert!(StudyConfig::from_str(&minimal("[0.1, -0.05]")).is_err());
    }

    #[test]
    fn rejects_unknown_map_and_missing_params() {
        let text = minimal("[0.1]").replace("\"exp\"", "\"zeta\"");
        assert!(matches!(StudyConfig::from_str(&text), Err(Error::UnknownMap(_))));
        let text = minimal("[0.1]").replace("\"exp\"", "\"moebius\"");
        assert!(matches!(StudyConfig::from_str(&text), Err(Error::Config(_))));
    }

    #[test]
    fn map_params_accept_real_and_complex() {
        let text = r#"{
            "version": 1,
            "map": {"name": "affine", "params": {"c": [1.0, 2.0], "d": 3.0}},
            "lattice": {"alpha": "60deg", "beta": "60deg", "gamma": "60deg"},
            "region": {"type": "disc", "center": [0.0, 0.0], "radius": 0.8},
            "epsilons": [0.1]
        }"#;
        let config = StudyConfig::from_str(text).unwrap();
        let map = config.build_map().unwrap();
        let fp = map.eval_fprime(Complex64::new(0.0, 0.0)).unwrap();
        assert_eq!(fp, Complex64::new(1.0, 2.0));
    }

    #[test]
    fn malformed_json_is_a_config_error() {
        let err = StudyConfig::from_str("{not json").unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn explicit_normalization_round_trips() {
        let text = r#"{
            "version": 1,
            "map": {"name": "identity"},
            "lattice": {"alpha": "60deg", "beta": "60deg", "gamma": "60deg"},
            "region": {"type": "disc", "center": [0.0, 0.0], "radius": 0.8},
            "epsilons": [0.1],
            "normalization": {"source": "explicit", "image_of_origin": [1.0, 2.0], "seed_direction": 0.5},
            "seed": 7,
            "v0": [1.0, 0.0]
        }"#;
        let config = StudyConfig::from_str(text).unwrap();
        assert_eq!(config.seed(), 7);
        assert_eq!(config.v0(), Complex64::new(1.0, 0.0));
        match config.normalization {
            NormalizationConfig::Explicit { image_of_origin, seed_direction } => {
                assert_eq!(image_of_origin, [1.0, 2.0]);
                assert_eq!(seed_direction, 0.5);
            }
            _ => panic!("expected explicit normalization"),
        }
    }
}
