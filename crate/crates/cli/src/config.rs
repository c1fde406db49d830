//! TOML run configuration.
//!
//! ```toml
//! case = "longtime"            # longtime | mixed | positivity | accuracy1 | accuracy2
//!
//! [mesh]
//! family = "kershaw"           # cartesian | triangular | kershaw | tilted-hexagonal
//! resolution = 16              # single-mesh commands
//! levels = [4, 8, 16, 32]      # converge
//! distortion = 0.4             # kershaw only
//! # angle = 0.3                # tilted-hexagonal only, radians
//! # file = "mesh.poly"         # polymesh v1 file instead of a family
//!
//! [scheme]
//! kind = "nonlinear"           # hmm | expfit | expfit-harmonic | nonlinear
//! flux = "sg"                  # centred | upwind | sg
//! eta = 1.5
//! dt = 0.1
//! final_time = 350.0
//! mean = "arithmetic"          # arithmetic | max | sqrt-mean | log-mean
//! aggregate = "mean"           # mean | max
//! newton = { epsilon = 1e-11, tol = 1e-11, max_iter = 50 }
//!
//! [output]
//! dir = "out"
//! vtk_every = 0                # write solution_####.vtk every N steps, 0 = never
//! ```
//! Every key is optional; missing values fall back to the defaults of the command.
//! Unknown keys are rejected.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use hfv_core::experiments::{case_by_name, TestCase};
use hfv_core::mesh::MeshFamily;
use hfv_core::schemes::{Aggregate, FluxKind, MeanKind, SchemeConfig, SchemeKind};
use serde::Deserialize;

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Stationary,
    Transient,
    Converge,
    Longtime,
    Positivity,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Stationary => "stationary",
            Command::Transient => "transient",
            Command::Converge => "converge",
            Command::Longtime => "longtime",
            Command::Positivity => "positivity",
        }
    }
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub case: Option<String>,
    #[serde(default)]
    pub mesh: MeshSection,
    #[serde(default)]
    pub scheme: SchemeSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MeshSection {
    pub family: Option<String>,
    pub resolution: Option<usize>,
    pub levels: Option<Vec<usize>>,
    pub distortion: Option<f64>,
    pub angle: Option<f64>,
    pub file: Option<PathBuf>,
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SchemeSection {
    pub kind: Option<String>,
    pub flux: Option<String>,
    pub eta: Option<f64>,
    pub dt: Option<f64>,
    pub final_time: Option<f64>,
    pub mean: Option<String>,
    pub aggregate: Option<String>,
    #[serde(default)]
    pub newton: NewtonSection,
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct NewtonSection {
    pub epsilon: Option<f64>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
    pub vtk_every: Option<usize>,
}

/// Command-line values that take precedence over the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub mesh_file: Option<PathBuf>,
    pub scheme: Option<String>,
    pub flux: Option<String>,
    pub eta: Option<f64>,
    pub dt: Option<f64>,
    pub final_time: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum MeshSource {
    Generated { family: MeshFamily, resolutions: Vec<usize> },
    File(PathBuf),
}

/// Fully resolved run.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub command: Command,
    pub case: TestCase,
    pub mesh: MeshSource,
    pub scheme: SchemeConfig,
    pub output: PathBuf,
    pub vtk_every: usize,
}

pub fn parse_file_config(text: &str) -> Result<FileConfig, CliError> {
    toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
}

pub fn load_file_config(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_file_config(&text)
}

struct Defaults {
    case: &'static str,
    family: MeshFamily,
    resolutions: &'static [usize],
    dt: f64,
    final_time: f64,
}

fn defaults(command: Command) -> Defaults {
    let kershaw = MeshFamily::Kershaw { distortion: 0.4 };
    match command {
        Command::Stationary => {
            Defaults { case: "accuracy1", family: MeshFamily::Triangular, resolutions: &[16], dt: 0.01, final_time: 1.0 }
        }
        Command::Transient => Defaults { case: "longtime", family: kershaw, resolutions: &[16], dt: 0.1, final_time: 10.0 },
        Command::Converge => Defaults {
            case: "accuracy1",
            family: MeshFamily::Triangular,
            resolutions: &[4, 8, 16, 32],
            dt: 0.01,
            final_time: 1.0,
        },
        Command::Longtime => Defaults { case: "longtime", family: kershaw, resolutions: &[16], dt: 0.1, final_time: 350.0 },
        Command::Positivity => Defaults {
            case: "positivity",
            family: MeshFamily::TiltedHexagonal { angle: 0.3 },
            resolutions: &[60],
            dt: 1e-5,
            final_time: 5e-4,
        },
    }
}

fn parse_name<T: FromStr<Err = String>>(value: &str) -> Result<T, CliError> {
    value.parse().map_err(CliError::Config)
}

fn resolve_family(mesh: &MeshSection, fallback: MeshFamily) -> Result<MeshFamily, CliError> {
    let family = match mesh.family.as_deref() {
        None => fallback,
        Some("cartesian") => MeshFamily::Cartesian,
        Some("triangular") => MeshFamily::Triangular,
        Some("kershaw") => MeshFamily::Kershaw { distortion: 0.4 },
        Some("tilted-hexagonal") => MeshFamily::TiltedHexagonal { angle: 0.3 },
        Some(other) => return Err(CliError::Config(format!("unknown mesh family `{other}`"))),
    };
    match (family, mesh.distortion, mesh.angle) {
        (MeshFamily::Kershaw { .. }, Some(d), None) => Ok(MeshFamily::Kershaw { distortion: d }),
        (MeshFamily::TiltedHexagonal { .. }, None, Some(a)) => Ok(MeshFamily::TiltedHexagonal { angle: a }),
        (f, None, None) => Ok(f),
        (f, _, _) => Err(CliError::Config(format!("`distortion`/`angle` do not apply to {f:?}"))),
    }
}

/// Merges file values, flag overrides and command defaults, then validates the result.
/// Relative paths in the file are taken relative to `base`.
pub fn resolve(
    command: Command,
    file: &FileConfig,
    overrides: &Overrides,
    base: &Path,
) -> Result<RunConfig, CliError> {
    let def = defaults(command);
    let case_name = file.case.as_deref().unwrap_or(def.case);
    let case = case_by_name(case_name).ok_or_else(|| CliError::Config(format!("unknown case `{case_name}`")))?;

    let mesh_file = overrides.mesh_file.clone().or_else(|| file.mesh.file.as_ref().map(|p| base.join(p)));
    let mesh = match mesh_file {
        Some(path) => {
            if file.mesh.family.is_some() && overrides.mesh_file.is_none() {
                return Err(CliError::Config("`mesh.file` and `mesh.family` are mutually exclusive".into()));
            }
            if command == Command::Converge {
                return Err(CliError::Config("converge needs a mesh family, not a mesh file".into()));
            }
            MeshSource::File(path)
        }
        None => {
            let family = resolve_family(&file.mesh, def.family)?;
            let resolutions = match (command, &file.mesh.levels, file.mesh.resolution) {
                (Command::Converge, Some(levels), None) => levels.clone(),
                (Command::Converge, None, None) => def.resolutions.to_vec(),
                (Command::Converge, _, Some(_)) => {
                    return Err(CliError::Config("converge takes `mesh.levels`, not `mesh.resolution`".into()))
                }
                (_, Some(_), _) => {
                    return Err(CliError::Config(format!("`mesh.levels` only applies to converge, not {}", command.name())))
                }
                (_, None, n) => vec![n.unwrap_or(def.resolutions[0])],
            };
            if resolutions.is_empty() || resolutions.contains(&0) {
                return Err(CliError::Config("mesh resolutions must be positive".into()));
            }
            MeshSource::Generated { family, resolutions }
        }
    };

    let s = &file.scheme;
    let mut scheme = SchemeConfig { dt: def.dt, final_time: def.final_time, ..SchemeConfig::default() };
    if let Some(kind) = overrides.scheme.as_deref().or(s.kind.as_deref()) {
        scheme.scheme = parse_name::<SchemeKind>(kind)?;
    }
    if let Some(flux) = overrides.flux.as_deref().or(s.flux.as_deref()) {
        scheme.flux = parse_name::<FluxKind>(flux)?;
    }
    if let Some(mean) = s.mean.as_deref() {
        scheme.mean = parse_name::<MeanKind>(mean)?;
    }
    if let Some(agg) = s.aggregate.as_deref() {
        scheme.aggregate = parse_name::<Aggregate>(agg)?;
    }
    scheme.eta = overrides.eta.or(s.eta).unwrap_or(scheme.eta);
    scheme.dt = overrides.dt.or(s.dt).unwrap_or(scheme.dt);
    scheme.final_time = overrides.final_time.or(s.final_time).unwrap_or(scheme.final_time);
    scheme.newton.epsilon = s.newton.epsilon.unwrap_or(scheme.newton.epsilon);
    scheme.newton.tol = s.newton.tol.unwrap_or(scheme.newton.tol);
    scheme.newton.max_iter = s.newton.max_iter.unwrap_or(scheme.newton.max_iter);
    scheme.validate().map_err(|e| CliError::Config(e.to_string()))?;

    let output = overrides
        .out
        .clone()
        .or_else(|| file.output.dir.as_ref().map(|p| base.join(p)))
        .unwrap_or_else(|| PathBuf::from("out"));

    Ok(RunConfig { command, case, mesh, scheme, output, vtk_every: file.output.vtk_every.unwrap_or(0) })
}
