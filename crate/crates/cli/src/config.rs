//! Run configuration read from TOML. Every key has a default and unknown
//! keys are rejected.

use std::path::{Path, PathBuf};

use elastoinverse_core::experiments::{NoiseDistribution, POINT_A, POINT_C};
use elastoinverse_core::{
    log_grid, LoadSignal, ModelConfig, NoiseSpec, Point, Quantity, Regularization, SensorSpec,
};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub mesh: MeshSection,
    pub model: ModelSection,
    pub time: TimeSection,
    pub load: LoadSection,
    pub sensors: Vec<SensorSection>,
    pub noise: NoiseSection,
    pub filter: FilterSection,
    pub output: OutputSection,
    pub sweep: SweepSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeshSection {
    pub element_length: f64,
    pub internal_points: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub wave_speed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimeSection {
    pub dt: f64,
    pub t_end: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LoadKindName {
    Periodic,
    Heaviside,
    /// No load at all; forward runs only.
    Zero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LoadSection {
    pub kind: LoadKindName,
    pub amplitude: f64,
    pub omega: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuantityName {
    Displacement,
    Velocity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorSection {
    pub label: String,
    pub point: [f64; 2],
    pub quantity: QuantityName,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistributionName {
    Uniform,
    Normal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseSection {
    /// Fraction of the channel peak, e.g. 0.05 for 5 %.
    pub level: f64,
    pub distribution: DistributionName,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FilterMethod {
    Lcurve,
    Fixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterSection {
    pub method: FilterMethod,
    /// Regularization parameter for the fixed method.
    pub b: f64,
    pub grid_min: f64,
    pub grid_max: f64,
    pub grid_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
    /// Also dump the assembled matrices from `mesh`.
    pub matrices: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    /// Scenario names to run; empty means all twelve.
    pub scenarios: Vec<String>,
    /// Seeds to run; empty means the noise seed alone.
    pub seeds: Vec<u64>,
}

impl Default for MeshSection {
    fn default() -> Self {
        MeshSection {
            element_length: 0.1,
            internal_points: vec![[POINT_C.0, POINT_C.1]],
        }
    }
}

impl Default for ModelSection {
    fn default() -> Self {
        ModelSection { wave_speed: 1.0 }
    }
}

impl Default for TimeSection {
    fn default() -> Self {
        TimeSection { dt: 0.1, t_end: 12.0 }
    }
}

impl Default for LoadSection {
    fn default() -> Self {
        LoadSection {
            kind: LoadKindName::Periodic,
            amplitude: 1.0,
            omega: 1.0,
        }
    }
}

impl Default for NoiseSection {
    fn default() -> Self {
        NoiseSection {
            level: 0.05,
            distribution: DistributionName::Uniform,
            seed: 1,
        }
    }
}

impl Default for FilterSection {
    fn default() -> Self {
        FilterSection {
            method: FilterMethod::Lcurve,
            b: 1.0,
            grid_min: 1e-3,
            grid_max: 1e3,
            grid_points: 25,
        }
    }
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            dir: PathBuf::from("out"),
            matrices: false,
        }
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mesh: MeshSection::default(),
            model: ModelSection::default(),
            time: TimeSection::default(),
            load: LoadSection::default(),
            sensors: vec![
                SensorSection {
                    label: "A".into(),
                    point: [POINT_A.0, POINT_A.1],
                    quantity: QuantityName::Velocity,
                },
                SensorSection {
                    label: "C".into(),
                    point: [POINT_C.0, POINT_C.1],
                    quantity: QuantityName::Velocity,
                },
            ],
            noise: NoiseSection::default(),
            filter: FilterSection::default(),
            output: OutputSection::default(),
            sweep: SweepSection::default(),
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration is always serializable")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |field: &str, msg: String| Err(CliError::Config(format!("{field}: {msg}")));
        if !(self.time.dt > 0.0) {
            return bad("time.dt", format!("must be positive, got {}", self.time.dt));
        }
        if !(self.time.t_end >= 10.0 * self.time.dt) {
            return bad("time.t_end", format!("must be at least 10 dt, got {}", self.time.t_end));
        }
        if !(self.model.wave_speed > 0.0) {
            return bad("model.wave_speed", format!("must be positive, got {}", self.model.wave_speed));
        }
        if !(self.noise.level >= 0.0) {
            return bad("noise.level", format!("must be non-negative, got {}", self.noise.level));
        }
        if self.filter.grid_points == 0 || !(self.filter.grid_min > 0.0) || !(self.filter.grid_max >= self.filter.grid_min) {
            return bad(
                "filter.grid_points",
                "grid needs grid_points ≥ 1 and 0 < grid_min ≤ grid_max".to_string(),
            );
        }
        if !(self.filter.b >= 0.0) {
            return bad("filter.b", format!("must be non-negative, got {}", self.filter.b));
        }
        Ok(())
    }

    pub fn model_config(&self) -> ModelConfig {
        ModelConfig {
            element_length: self.mesh.element_length,
            internal_points: self.mesh.internal_points.iter().map(|p| Point::new(p[0], p[1])).collect(),
            wave_speed: self.model.wave_speed,
            dt: self.time.dt,
            t_end: self.time.t_end,
        }
    }

    /// `None` for the zero load.
    pub fn load_signal(&self) -> Option<LoadSignal> {
        match self.load.kind {
            LoadKindName::Periodic => Some(LoadSignal::periodic(self.load.amplitude, self.load.omega)),
            LoadKindName::Heaviside => Some(LoadSignal::heaviside(self.load.amplitude)),
            LoadKindName::Zero => None,
        }
    }

    pub fn sensor_specs(&self) -> Vec<SensorSpec> {
        self.sensors
            .iter()
            .map(|s| {
                let q = match s.quantity {
                    QuantityName::Displacement => Quantity::Displacement,
                    QuantityName::Velocity => Quantity::Velocity,
                };
                SensorSpec::new(&s.label, (s.point[0], s.point[1]), q)
            })
            .collect()
    }

    pub fn noise_spec(&self) -> NoiseSpec {
        NoiseSpec {
            level: self.noise.level,
            distribution: match self.noise.distribution {
                DistributionName::Uniform => NoiseDistribution::Uniform,
                DistributionName::Normal => NoiseDistribution::Normal,
            },
            seed: self.noise.seed,
        }
    }

    pub fn b_grid(&self) -> Vec<f64> {
        log_grid(self.filter.grid_min, self.filter.grid_max, self.filter.grid_points)
    }

    pub fn regularization(&self) -> Regularization {
        match self.filter.method {
            FilterMethod::Lcurve => Regularization::LCurve(self.b_grid()),
            FilterMethod::Fixed => Regularization::Fixed(self.filter.b),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_defaults() {
        assert_eq!(RunConfig::parse("").unwrap(), RunConfig::default());
    }

    #[test]
    fn round_trip() {
        let mut cfg = RunConfig::default();
        cfg.noise.seed = 77;
        cfg.filter.b = 0.1 + 0.2;
        let back = RunConfig::parse(&cfg.to_toml()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn unknown_key_is_named() {
        let err = RunConfig::parse("[time]\ndt = 0.1\nt_edn = 3.0\n").unwrap_err().to_string();
        assert!(err.contains("t_edn"), "{err}");
    }

    #[test]
    fn wrong_type_is_named() {
        let err = RunConfig::parse("[mesh]\nelement_length = \"big\"\n").unwrap_err().to_string();
        assert!(err.contains("element_length"), "{err}");
    }

    #[test]
    fn semantic_checks_name_the_field() {
        let err = RunConfig::parse("[time]\ndt = 0.1\nt_end = 0.5\n").unwrap_err().to_string();
        assert!(err.contains("time.t_end"), "{err}");
        let err = RunConfig::parse("[noise]\nlevel = -1.0\n").unwrap_err().to_string();
        assert!(err.contains("noise.level"), "{err}");
    }

    #[test]
    fn sensors_table_replaces_defaults() {
        let cfg = RunConfig::parse("[[sensors]]\nlabel = \"C\"\npoint = [0.5, 0.5]\nquantity = \"displacement\"\n").unwrap();
        assert_eq!(cfg.sensor_specs().len(), 1);
        assert_eq!(cfg.sensor_specs()[0].quantity, Quantity::Displacement);
    }
}
