//! TOML scenario files.
//!
//! ```toml
//! scenario = "paper_test"      # optional preset, the keys below override it
//!
//! [geometry]
//! radius = 0.02875             # or mesh_file = "section.mesh"
//! length = 0.165
//! nr = 24
//! nz = 48
//!
//! [motion]
//! field = "paper_test"         # "zero", "paper_test" or { radial_stretch = c }
//! ramp = { linear = 20.0 }     # or { constant = s }
//!
//! [[ports]]
//! k = 1
//! drive = "current"            # or "voltage"
//! amplitude_re = 35000.0
//! amplitude_im = 0.0
//!
//! [source]
//! frequency_hz = 500.0
//!
//! [thermal]
//! theta0 = 20.0
//! h = 0.0
//! emissivity = 0.0
//! theta_conv = 20.0
//! theta_rad = 20.0
//! theta_dirichlet = 20.0
//!
//! [solver]
//! dt = 0.1
//! t_end = 20.0
//! newton_tol = 1e-8
//! newton_max_iter = 25
//! mode = "lagrangian"          # or "eulerian"
//!
//! [output]
//! directory = "output"
//! vtk_every_n_steps = 10
//! csv = true
//! ```
//!
//! A `[materials]` table may replace any of `sigma`, `k`, `cp`, `rho0`, `mu`
//! and `clamp` of the default steel.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coupled::{HeatSource, Problem, SolverConfig};
use crate::em::{Drive, Port, PortSpec};
use crate::fem::Formulation;
use crate::kinematics::{DisplacementField, Profile, Ramp};
use crate::materials::{
    ConductivityLaw, MaterialModel, PermeabilityLaw, SpecificHeatLaw, ThermalConductivityLaw,
};
use crate::mesh::{generate_rectangle_mesh, MeridionalMesh};
use crate::newton::NewtonConfig;
use crate::thermal::{ConvRad, ThermalBc};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

impl ConfigError {
    fn invalid(path: &str, message: impl Into<String>) -> Self {
        Self::Invalid {
            path: path.into(),
            message: message.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nr: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nz: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mesh_file: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldChoice {
    Zero,
    PaperTest,
    RadialStretch(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MotionConfig {
    pub field: FieldChoice,
    #[serde(default = "default_ramp")]
    pub ramp: Ramp,
}

fn default_ramp() -> Ramp {
    Ramp::Constant(1.0)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<ConductivityLaw>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<ThermalConductivityLaw>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cp: Option<SpecificHeatLaw>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<PermeabilityLaw>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clamp: Option<[f64; 2]>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriveKind {
    Current,
    Voltage,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PortConfig {
    pub k: usize,
    pub drive: DriveKind,
    pub amplitude_re: f64,
    #[serde(default)]
    pub amplitude_im: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frequency_hz: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermalConfig {
    pub theta0: f64,
    #[serde(default)]
    pub h: f64,
    #[serde(default)]
    pub emissivity: f64,
    #[serde(default = "default_ambient")]
    pub theta_conv: f64,
    #[serde(default = "default_ambient")]
    pub theta_rad: f64,
    #[serde(default = "default_ambient")]
    pub theta_dirichlet: f64,
    /// Replaces Joule heating by a uniform density, W/m^3.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uniform_source: Option<f64>,
}

fn default_ambient() -> f64 {
    20.0
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub dt: f64,
    pub t_end: f64,
    #[serde(default = "default_tol")]
    pub newton_tol: f64,
    #[serde(default = "default_max_iter")]
    pub newton_max_iter: usize,
    #[serde(default)]
    pub mode: Formulation,
}

fn default_tol() -> f64 {
    1e-8
}

fn default_max_iter() -> usize {
    25
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_dir")]
    pub directory: PathBuf,
    /// 0 disables field output.
    #[serde(default = "default_vtk_every")]
    pub vtk_every_n_steps: usize,
    #[serde(default = "default_true")]
    pub csv: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            directory: default_dir(),
            vtk_every_n_steps: default_vtk_every(),
            csv: true,
        }
    }
}

fn default_dir() -> PathBuf {
    PathBuf::from("output")
}

fn default_vtk_every() -> usize {
    10
}

fn default_true() -> bool {
    true
}

/// A validated scenario.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<String>,
    pub geometry: GeometryConfig,
    pub motion: MotionConfig,
    #[serde(default)]
    pub materials: MaterialOverrides,
    #[serde(default)]
    pub ports: Vec<PortConfig>,
    #[serde(default)]
    pub source: SourceConfig,
    pub thermal: ThermalConfig,
    pub solver: SolverSection,
    #[serde(default)]
    pub output: OutputConfig,
}

/// Name of the built-in preset reproducing the upsetting test.
pub const PAPER_TEST: &str = "paper_test";

impl ScenarioConfig {
    /// The upsetting test: 35 kA at 500 Hz through a steel bar heated from
    /// 20 C for 20 s with insulated walls.
    pub fn paper_test() -> Self {
        Self {
            scenario: Some(PAPER_TEST.into()),
            geometry: GeometryConfig {
                radius: Some(0.02875),
                length: Some(0.165),
                nr: Some(24),
                nz: Some(48),
                mesh_file: None,
            },
            motion: MotionConfig {
                field: FieldChoice::PaperTest,
                ramp: Ramp::Linear(20.0),
            },
            materials: MaterialOverrides::default(),
            ports: vec![PortConfig {
                k: 1,
                drive: DriveKind::Current,
                amplitude_re: 35000.0,
                amplitude_im: 0.0,
            }],
            source: SourceConfig {
                frequency_hz: Some(500.0),
            },
            thermal: ThermalConfig {
                theta0: 20.0,
                h: 0.0,
                emissivity: 0.0,
                theta_conv: 20.0,
                theta_rad: 20.0,
                theta_dirichlet: 20.0,
                uniform_source: None,
            },
            solver: SolverSection {
                dt: 0.1,
                t_end: 20.0,
                newton_tol: 1e-8,
                newton_max_iter: 25,
                mode: Formulation::Lagrangian,
            },
            output: OutputConfig::default(),
        }
    }

    /// TOML text that parses back to `self`.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serialises to TOML")
    }

    /// Checks ranges and cross-field rules, naming the offending key.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let g = &self.geometry;
        if g.mesh_file.is_none() {
            for (name, v) in [("radius", g.radius), ("length", g.length)] {
                match v {
                    None => return Err(ConfigError::invalid(&format!("geometry.{name}"), "missing")),
                    Some(v) if !(v > 0.0) => {
                        return Err(ConfigError::invalid(&format!("geometry.{name}"), format!("must be positive, got {v}")))
                    }
                    _ => {}
                }
            }
            for (name, v) in [("nr", g.nr), ("nz", g.nz)] {
                match v {
                    None => return Err(ConfigError::invalid(&format!("geometry.{name}"), "missing")),
                    Some(0) => return Err(ConfigError::invalid(&format!("geometry.{name}"), "must be at least 1")),
                    _ => {}
                }
            }
        }
        if let Ramp::Linear(d) = self.motion.ramp {
            if !(d > 0.0) {
                return Err(ConfigError::invalid("motion.ramp.linear", format!("duration must be positive, got {d}")));
            }
        }
        let joule = self.thermal.uniform_source.is_none();
        match self.source.frequency_hz {
            None if joule => {
                return Err(ConfigError::invalid("source.frequency_hz", "required when ports are driven"))
            }
            Some(f) if !(f > 0.0) => {
                return Err(ConfigError::invalid("source.frequency_hz", format!("must be positive, got {f}")))
            }
            _ => {}
        }
        if let Some(q) = self.thermal.uniform_source {
            if !(q >= 0.0) {
                return Err(ConfigError::invalid("thermal.uniform_source", format!("must be non-negative, got {q}")));
            }
        }
        for (i, p) in self.ports.iter().enumerate() {
            if p.k == 0 {
                return Err(ConfigError::invalid(&format!("ports[{i}].k"), "port indices start at 1"));
            }
            if !(p.amplitude_re.is_finite() && p.amplitude_im.is_finite()) {
                return Err(ConfigError::invalid(&format!("ports[{i}].amplitude_re"), "must be finite"));
            }
        }
        let t = &self.thermal;
        if !(t.h >= 0.0) {
            return Err(ConfigError::invalid("thermal.h", format!("must be >= 0, got {}", t.h)));
        }
        if !(0.0..=1.0).contains(&t.emissivity) {
            return Err(ConfigError::invalid("thermal.emissivity", format!("must lie in [0, 1], got {}", t.emissivity)));
        }
        let s = &self.solver;
        if !(s.dt > 0.0) {
            return Err(ConfigError::invalid("solver.dt", format!("must be positive, got {}", s.dt)));
        }
        if !(s.t_end >= 0.0) {
            return Err(ConfigError::invalid("solver.t_end", format!("must be non-negative, got {}", s.t_end)));
        }
        if !(s.newton_tol > 0.0) {
            return Err(ConfigError::invalid("solver.newton_tol", format!("must be positive, got {}", s.newton_tol)));
        }
        if s.newton_max_iter == 0 {
            return Err(ConfigError::invalid("solver.newton_max_iter", "must be at least 1"));
        }
        self.material()
            .validate()
            .map_err(|m| ConfigError::invalid("materials", m))?;
        Ok(())
    }

    /// Default steel with the overrides applied.
    pub fn material(&self) -> MaterialModel {
        let mut m = MaterialModel::steel();
        let o = &self.materials;
        if let Some(v) = &o.sigma {
            m.sigma = v.clone();
        }
        if let Some(v) = &o.k {
            m.k = v.clone();
        }
        if let Some(v) = &o.cp {
            m.cp = v.clone();
        }
        if let Some(v) = o.rho0 {
            m.rho0 = v;
        }
        if let Some(v) = &o.mu {
            m.mu = v.clone();
        }
        if let Some(v) = o.clamp {
            m.clamp = v;
        }
        m
    }

    /// Builds the mesh, reading `mesh_file` relative to `base_dir`.
    pub fn mesh(&self, base_dir: &Path) -> crate::error::Result<MeridionalMesh> {
        let g = &self.geometry;
        match &g.mesh_file {
            Some(f) => {
                let path = base_dir.join(f);
                let text = std::fs::read_to_string(&path).map_err(|e| ConfigError::Io {
                    path: path.display().to_string(),
                    message: e.to_string(),
                })?;
                Ok(MeridionalMesh::from_text(&text)?)
            }
            None => Ok(generate_rectangle_mesh(
                g.radius.unwrap_or_default(),
                g.length.unwrap_or_default(),
                g.nr.unwrap_or_default(),
                g.nz.unwrap_or_default(),
            )?),
        }
    }

    /// Problem and solver settings described by this scenario.
    pub fn build(&self, base_dir: &Path) -> crate::error::Result<(Problem, SolverConfig)> {
        self.validate()?;
        let motion = DisplacementField::new(
            match self.motion.field {
                FieldChoice::Zero => Profile::Zero,
                FieldChoice::PaperTest => Profile::PaperTest,
                FieldChoice::RadialStretch(c) => Profile::RadialStretch(c),
            },
            self.motion.ramp,
        );
        let ports = PortSpec {
            ports: self
                .ports
                .iter()
                .map(|p| {
                    let a = Complex64::new(p.amplitude_re, p.amplitude_im);
                    Port {
                        k: p.k,
                        drive: match p.drive {
                            DriveKind::Current => Drive::Current(a),
                            DriveKind::Voltage => Drive::Voltage(a),
                        },
                    }
                })
                .collect(),
        };
        let t = &self.thermal;
        let problem = Problem {
            mesh: self.mesh(base_dir)?,
            motion,
            material: self.material(),
            ports,
            omega: 2.0 * std::f64::consts::PI * self.source.frequency_hz.unwrap_or(0.0),
            bc: ThermalBc {
                conv_rad: ConvRad {
                    h: t.h,
                    emissivity: t.emissivity,
                    theta_conv: t.theta_conv,
                    theta_rad: t.theta_rad,
                },
                dirichlet: t.theta_dirichlet,
            },
            theta0: t.theta0,
            source: match t.uniform_source {
                Some(q) => HeatSource::Uniform(q),
                None => HeatSource::Joule,
            },
        };
        let s = &self.solver;
        let solver = SolverConfig {
            dt: s.dt,
            t_end: s.t_end,
            newton: NewtonConfig {
                tol: s.newton_tol,
                max_iter: s.newton_max_iter,
                ..Default::default()
            },
            mode: s.mode,
            ..Default::default()
        };
        Ok((problem, solver))
    }
}

fn line_of(text: &str, span: Option<std::ops::Range<usize>>) -> usize {
    span.map_or(0, |s| text[..s.start.min(text.len())].matches('\n').count() + 1)
}

fn merge(base: &mut toml::Table, over: toml::Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

/// Parses and validates a scenario. A `scenario = "paper_test"` key starts
/// from the preset and deep-merges the remaining keys over it.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let user: toml::Table = text.parse().map_err(|e: toml::de::Error| ConfigError::Syntax {
        line: line_of(text, e.span()),
        message: e.message().to_string(),
    })?;
    let merged = match user.get("scenario") {
        None => user,
        Some(toml::Value::String(s)) if s == PAPER_TEST => {
            let mut base: toml::Table = toml::from_str(&ScenarioConfig::paper_test().to_toml())
                .expect("preset round-trips");
            merge(&mut base, user);
            base
        }
        Some(other) => {
            return Err(ConfigError::invalid(
                "scenario",
                format!("unknown preset {other}; the only preset is \"{PAPER_TEST}\""),
            ))
        }
    };
    let cfg: ScenarioConfig = serde_path_to_error::deserialize(toml::Value::Table(merged)).map_err(|e| {
        let path = e.path().to_string();
        ConfigError::Invalid {
            path: if path == "." { "<root>".into() } else { path },
            message: e.into_inner().to_string().trim().to_string(),
        }
    })?;
    cfg.validate()?;
    Ok(cfg)
}

/// Reads and parses a scenario file.
pub fn load_config(path: &Path) -> Result<ScenarioConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_config(&text)
}
