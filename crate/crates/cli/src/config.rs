use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{Context, Result};
use confined_nls::diagnostics::DetectorOptions;
use confined_nls::ground_state::{default_guess, petviashvili};
use confined_nls::lattice::io::read_field_on;
use confined_nls::propagator::EvolveOptions;
use confined_nls::samples::{gaussian, random_field, GaussianSpec, RandomFieldSpec};
use confined_nls::{Field, Grid, GridSpec, ModelParams};
use serde::{Deserialize, Serialize};

use crate::Invalid;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    pub dt: f64,
    pub t_max: f64,
    pub sample_stride: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialKind {
    Gaussian,
    GroundStateScaled,
    File,
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    pub kind: InitialKind,
    pub amplitude: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width_y: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width_z: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offset_z: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase_velocity: Option<Vec<f64>>,
    /// Field file for `file` (the state) and `ground_state_scaled` (a stored Q; solved
    /// on the config grid when absent).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelParams,
    pub grid: GridSpec,
    pub time: TimeConfig,
    #[serde(default)]
    pub detectors: DetectorOptions,
    pub initial: InitialConfig,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Invalid(format!("{name} must be positive, got {v}")).into())
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let cfg: ExperimentConfig = serde_json::from_str(&text)
            .map_err(|e| Invalid(format!("config {}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.model.free_dims() as usize;
        if self.model.n != 1 {
            return Err(Invalid(format!("fields need n = 1, got n = {}", self.model.n)).into());
        }
        if self.grid.z_points.len() != k || self.grid.z_length.len() != k {
            return Err(Invalid(format!("grid needs {k} z axes for d = {}", self.model.d)).into());
        }
        if self.grid.hermite_modes == 0 || self.grid.z_points.iter().any(|&n| n == 0) {
            return Err(Invalid("grid sizes must be positive".into()).into());
        }
        for &l in &self.grid.z_length {
            positive("grid.z_length", l)?;
        }
        positive("time.dt", self.time.dt)?;
        positive("time.t_max", self.time.t_max)?;
        if self.time.sample_stride == 0 {
            return Err(Invalid("time.sample_stride must be positive".into()).into());
        }
        let d = &self.detectors;
        for (name, v) in [
            ("detectors.blowup_factor", d.blowup_factor),
            ("detectors.scatter_frac", d.scatter_frac),
            ("detectors.scatter_tol", d.scatter_tol),
            ("detectors.window_frac", d.window_frac),
            ("detectors.tail_valid", d.tail_valid),
            ("detectors.growth_seq_factor", d.growth_seq_factor),
        ] {
            positive(name, v)?;
        }
        let init = &self.initial;
        positive("initial.amplitude", init.amplitude)?;
        match init.kind {
            InitialKind::Gaussian => {
                let wy = init.width_y.ok_or_else(|| Invalid("initial.width_y is required for gaussian".into()))?;
                let wz = init.width_z.ok_or_else(|| Invalid("initial.width_z is required for gaussian".into()))?;
                positive("initial.width_y", wy)?;
                positive("initial.width_z", wz)?;
                for (name, v) in [("initial.offset_z", &init.offset_z), ("initial.phase_velocity", &init.phase_velocity)] {
                    if let Some(v) = v {
                        if v.len() != k {
                            return Err(Invalid(format!("{name} needs {k} components")).into());
                        }
                    }
                }
            }
            InitialKind::File => {
                if init.path.is_none() {
                    return Err(Invalid("initial.path is required for file".into()).into());
                }
            }
            InitialKind::GroundStateScaled | InitialKind::Random => {}
        }
        Ok(())
    }

    pub fn build_grid(&self) -> Result<Arc<Grid>> {
        Ok(Arc::new(Grid::new(self.grid.clone()).map_err(|e| Invalid(e.to_string()))?))
    }

    pub fn evolve_options(&self) -> EvolveOptions {
        let mut o = EvolveOptions::new(self.time.dt, self.time.t_max, self.time.sample_stride);
        o.blowup_factor = Some(self.detectors.blowup_factor);
        o.tail_valid = Some(self.detectors.tail_valid);
        o
    }

    /// The initial state at the configured amplitude.
    pub fn initial_field(&self, grid: Arc<Grid>) -> Result<Field> {
        self.initial_field_at(grid, self.initial.amplitude)
    }

    /// The initial state with its amplitude replaced by `amplitude`.
    pub fn initial_field_at(&self, grid: Arc<Grid>, amplitude: f64) -> Result<Field> {
        let base = self.unit_field(grid)?;
        Ok(base.scaled(amplitude))
    }

    /// The initial state at amplitude one: unit-peak Gaussian, `Q` itself, the file as
    /// stored, or a random field of unit mass.
    pub fn unit_field(&self, grid: Arc<Grid>) -> Result<Field> {
        let p = self.model;
        let k = p.free_dims() as usize;
        let init = &self.initial;
        Ok(match init.kind {
            InitialKind::Gaussian => {
                let spec = GaussianSpec {
                    amplitude: 1.0,
                    width_y: init.width_y.unwrap_or(1.0),
                    width_z: init.width_z.unwrap_or(1.0),
                    offset_z: init.offset_z.clone().unwrap_or_else(|| vec![0.0; k]),
                    phase_velocity: init.phase_velocity.clone().unwrap_or_else(|| vec![0.0; k]),
                };
                gaussian(p, grid, &spec)?
            }
            InitialKind::GroundStateScaled => match &init.path {
                Some(path) => load_on(path, p, grid)?,
                None => {
                    let guess = default_guess(p, grid.clone())?;
                    petviashvili(p, grid, &guess, 1e-12, 2000)?.q
                }
            },
            InitialKind::File => load_on(init.path.as_ref().expect("validated"), p, grid)?,
            InitialKind::Random => random_field(p, grid, self.seed, &RandomFieldSpec::default())?,
        })
    }
}

/// Reads a field file and checks it against the configured parameters and grid.
pub fn load_on(path: &Path, params: ModelParams, grid: Arc<Grid>) -> Result<Field> {
    let f = read_field_on(path, grid).with_context(|| format!("reading field {}", path.display()))?;
    if *f.params() != params {
        return Err(Invalid(format!("{} holds {} but the config says {}", path.display(), f.params(), params)).into());
    }
    Ok(f)
}
