use serde::{Deserialize, Serialize};

use crate::criteria::CriteriaOptions;
use crate::dynamics::{ForcingTerm, SimConfig};
use crate::semigroup::{Field, GeometryKind, GridSpec};
use crate::weight::WeightSpec;
use crate::{Error, Result};

/// Initial data described independently of the grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialData {
    /// `amplitude * exp(-|x|^2 / (2 width^2))`.
    Gaussian { amplitude: f64, width: f64 },
    /// `amplitude * (1 + |x|)^(-rho)`.
    Algebraic { amplitude: f64, rho: f64 },
    /// `amplitude` on `|x| <= radius`, zero outside.
    Plateau { amplitude: f64, radius: f64 },
    /// `amplitude` everywhere.
    Constant { amplitude: f64 },
    /// Explicit nodal values; only valid on a matching grid.
    Values { values: Vec<f64> },
}

impl InitialData {
    pub fn amplitude(&self) -> Option<f64> {
        match *self {
            InitialData::Gaussian { amplitude, .. }
            | InitialData::Algebraic { amplitude, .. }
            | InitialData::Plateau { amplitude, .. }
            | InitialData::Constant { amplitude } => Some(amplitude),
            InitialData::Values { .. } => None,
        }
    }

    pub fn with_amplitude(&self, a: f64) -> Result<Self> {
        let mut out = self.clone();
        match &mut out {
            InitialData::Gaussian { amplitude, .. }
            | InitialData::Algebraic { amplitude, .. }
            | InitialData::Plateau { amplitude, .. }
            | InitialData::Constant { amplitude } => *amplitude = a,
            InitialData::Values { .. } => {
                return Err(Error::input("explicit values have no amplitude"))
            }
        }
        Ok(out)
    }

    pub fn sample(&self, grid: GridSpec) -> Result<Field> {
        if let Some(a) = self.amplitude() {
            if !(a >= 0.0 && a.is_finite()) {
                return Err(Error::input(format!("amplitude must be >= 0, got {a}")));
            }
        }
        match *self {
            InitialData::Gaussian { amplitude, width } => {
                if !(width > 0.0) {
                    return Err(Error::input("gaussian width must be positive"));
                }
                Field::from_fn(grid, |x| amplitude * (-x * x / (2.0 * width * width)).exp())
            }
            InitialData::Algebraic { amplitude, rho } => {
                if !(rho >= 0.0) {
                    return Err(Error::input("algebraic decay rate must be >= 0"));
                }
                Field::from_fn(grid, |x| amplitude * (1.0 + x.abs()).powf(-rho))
            }
            InitialData::Plateau { amplitude, radius } => {
                Field::from_fn(grid, |x| if x.abs() <= radius { amplitude } else { 0.0 })
            }
            InitialData::Constant { amplitude } => Field::from_fn(grid, |_| amplitude),
            InitialData::Values { ref values } => Field::new(grid, values.clone()),
        }
    }
}

fn default_floor() -> f64 {
    1e-12
}

fn default_tol() -> f64 {
    0.1
}

fn default_max_steps() -> usize {
    5_000_000
}

/// JSON form of a [`SimConfig`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfigSpec {
    pub weight: WeightSpec,
    pub grid: GridSpec,
    #[serde(default)]
    pub forcings: Vec<ForcingTerm>,
    pub initial: InitialData,
    pub horizon: f64,
    /// Defaults to `max(1e8, 1e3 |u0|)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blowup_threshold: Option<f64>,
    #[serde(default = "default_floor")]
    pub dt_floor: f64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub diffusionless: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt_initial: Option<f64>,
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
}

impl SimConfigSpec {
    pub fn build(&self) -> Result<SimConfig> {
        self.build_on(self.grid, self.horizon)
    }

    /// The same run on another grid and horizon.
    pub fn build_on(&self, grid: GridSpec, horizon: f64) -> Result<SimConfig> {
        let u0 = self.initial.sample(grid)?;
        let mut c = SimConfig::new(self.weight, self.forcings.clone(), u0, horizon);
        if let Some(u) = self.blowup_threshold {
            c.blowup_threshold = u;
        }
        c.dt_floor = self.dt_floor;
        c.tol = self.tol;
        c.diffusionless = self.diffusionless;
        c.dt_initial = self.dt_initial;
        c.max_steps = self.max_steps;
        c.validate()?;
        if !c.diffusionless {
            c.operator()?;
        }
        Ok(c)
    }

    /// Grid with the same spacing and geometry on a larger extent.
    pub fn grid_with_extent(&self, extent: f64) -> Result<GridSpec> {
        let h = self.grid.spacing();
        match self.grid.geometry() {
            GeometryKind::Line => GridSpec::line_with_spacing(extent, h),
            GeometryKind::Radial => GridSpec::radial_with_spacing(extent, h, self.grid.dim()),
        }
    }
}

/// Input of the `criteria` subcommand.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriteriaConfig {
    pub sim: SimConfigSpec,
    pub criteria: CriteriaOptions,
}

pub fn from_json<T: serde::de::DeserializeOwned>(text: &str) -> Result<T> {
    Ok(serde_json::from_str(text)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"{
        "weight": {"case": "radial_power", "alpha": 0.0, "dim": 1},
        "grid": {"geometry": "radial", "radius": 20.0, "nodes": 201},
        "forcings": [{"profile": {"kind": "constant", "value": 1.0},
                      "nonlinearity": {"kind": "power", "p": 2.0}}],
        "initial": {"kind": "gaussian", "amplitude": 0.5, "width": 1.0},
        "horizon": 2.0
    }"#;

    #[test]
    fn parses_with_defaults() {
        let spec: SimConfigSpec = from_json(SAMPLE).unwrap();
        assert_eq!(spec.tol, 0.1);
        assert_eq!(spec.dt_floor, 1e-12);
        let c = spec.build().unwrap();
        assert_eq!(c.blowup_threshold, 1e8);
        assert!((c.u0.sup_norm() - 0.5).abs() < 1e-15);
        let again: SimConfigSpec = from_json(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(again, spec);
    }

    #[test]
    fn bad_inputs_are_config_errors() {
        let bad = SAMPLE.replace("\"p\": 2.0", "\"p\": 0.5");
        assert!(from_json::<SimConfigSpec>(&bad)
            .unwrap_err()
            .is_config_error());
        let bad = SAMPLE.replace("\"alpha\": 0.0", "\"alpha\": 1.5");
        assert!(from_json::<SimConfigSpec>(&bad)
            .unwrap_err()
            .is_config_error());
        let mut spec: SimConfigSpec = from_json(SAMPLE).unwrap();
        spec.weight = WeightSpec::new(crate::weight::WeightCase::AxisPower, 0.0, 1).unwrap();
        assert!(spec.build().unwrap_err().is_config_error());
        spec = from_json(SAMPLE).unwrap();
        spec.initial = InitialData::Values {
            values: vec![1.0; 3],
        };
        assert!(spec.build().unwrap_err().is_config_error());
    }

    #[test]
    fn amplitude_edits() {
        let g = InitialData::Algebraic {
            amplitude: 1.0,
            rho: 0.5,
        };
        assert_eq!(g.with_amplitude(3.0).unwrap().amplitude(), Some(3.0));
        assert!(InitialData::Values { values: vec![] }
            .with_amplitude(1.0)
            .is_err());
    }
}
