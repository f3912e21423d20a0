//! Run configuration: TOML with unknown keys rejected.

use std::path::{Path, PathBuf};

use chanfsi_core::fsi::{DEFAULT_EPSILON0, DEFAULT_S};
use chanfsi_core::geometry::{build_geometry, ChannelGeometry, GeometryConfig};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Seed used when neither the file nor the command line names one.
pub const DEFAULT_SEED: u64 = 20240611;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{key}: {message}")]
    Invalid { key: String, message: String },
}

impl ConfigError {
    fn invalid(key: &str, message: impl Into<String>) -> Self {
        Self::Invalid { key: key.to_owned(), message: message.into() }
    }

    /// The offending key, when one is known.
    pub fn key(&self) -> Option<&str> {
        match self {
            Self::Invalid { key, .. } => Some(key),
            Self::Read { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Solve,
    P01,
    HiddenRegularity,
    NormVerify,
    StokesMms,
    WaveMms,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Self::Solve => "solve",
            Self::P01 => "p01",
            Self::HiddenRegularity => "hidden-regularity",
            Self::NormVerify => "norm-verify",
            Self::StokesMms => "stokes-mms",
            Self::WaveMms => "wave-mms",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeometrySection {
    pub lengths: [f64; 3],
    pub nx: usize,
    pub ny: usize,
    /// Intervals in the lower fluid, elastic and upper fluid slabs.
    pub nz: [usize; 3],
    pub nt: usize,
}

impl Default for GeometrySection {
    fn default() -> Self {
        Self { lengths: [1.0, 2.0, 3.0], nx: 16, ny: 16, nz: [8, 8, 8], nt: 32 }
    }
}

impl GeometrySection {
    pub fn build(&self) -> Result<ChannelGeometry, ConfigError> {
        build_geometry(&GeometryConfig::new(self.lengths, self.nx, self.ny, self.nz, self.nt))
            .map_err(|e| ConfigError::invalid("geometry", e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    Zero,
    #[default]
    SingleMode,
    Snapshot,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DataSection {
    pub preset: Preset,
    /// Velocity amplitude of the single-mode preset.
    pub amplitude: f64,
    /// Snapshot files of the `snapshot` preset, relative to the config file.
    pub v0: Option<PathBuf>,
    pub w0: Option<PathBuf>,
    pub w1: Option<PathBuf>,
}

impl Default for DataSection {
    fn default() -> Self {
        Self { preset: Preset::SingleMode, amplitude: 1e-3, v0: None, w0: None, w1: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DriverKind {
    Linear,
    #[default]
    Nonlinear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SchemeSection {
    pub driver: DriverKind,
    pub s: f64,
    pub epsilon0: f64,
    pub c_bar: f64,
    /// Replaces the cutoff time from the size bound; the run is then
    /// reported as off-theory.
    pub t_tilde: Option<f64>,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SchemeSection {
    fn default() -> Self {
        Self {
            driver: DriverKind::Nonlinear,
            s: DEFAULT_S,
            epsilon0: DEFAULT_EPSILON0,
            c_bar: 1.0,
            t_tilde: None,
            tol: 1e-8,
            max_iter: 30,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
    /// Time-level cadence of the `v`, `q`, `w` snapshots of a solve; zero
    /// writes none. The final level is always included.
    pub snapshot_every: usize,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: PathBuf::from("out"), snapshot_every: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct P01Section {
    pub alpha: f64,
    pub t: f64,
    pub betas: Vec<f64>,
    pub ms: Vec<f64>,
}

impl Default for P01Section {
    fn default() -> Self {
        Self {
            alpha: 0.25,
            t: 0.5,
            betas: vec![0.0, 0.1],
            ms: (1..=8).map(|k| f64::from(1u32 << k)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HiddenSection {
    pub samples: usize,
    pub beta: f64,
    /// Elastic intervals per refinement level.
    pub levels: Vec<usize>,
    pub nxy: usize,
    pub cfl: f64,
}

impl Default for HiddenSection {
    fn default() -> Self {
        Self { samples: 20, beta: 2.0, levels: vec![8, 16, 32], nxy: 8, cfl: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NormVerifySection {
    pub samples: usize,
    pub epsilons: Vec<f64>,
}

impl Default for NormVerifySection {
    fn default() -> Self {
        Self { samples: 100, epsilons: vec![1.0, 0.5, 0.25, 0.125] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StokesMmsSection {
    pub levels: Vec<usize>,
    pub crank_nicolson: bool,
}

impl Default for StokesMmsSection {
    fn default() -> Self {
        Self { levels: vec![16, 32, 64], crank_nicolson: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WaveMmsSection {
    pub levels: Vec<usize>,
    pub kx: f64,
    pub cfl: f64,
    pub implicit: bool,
}

impl Default for WaveMmsSection {
    fn default() -> Self {
        Self { levels: vec![8, 16, 32], kx: 1.0, cfl: 0.9, implicit: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: Experiment,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub geometry: GeometrySection,
    #[serde(default)]
    pub data: DataSection,
    #[serde(default)]
    pub scheme: SchemeSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub p01: P01Section,
    #[serde(default)]
    pub hidden: HiddenSection,
    #[serde(default)]
    pub norm_verify: NormVerifySection,
    #[serde(default)]
    pub stokes_mms: StokesMmsSection,
    #[serde(default)]
    pub wave_mms: WaveMmsSection,
}

impl RunConfig {
    /// Parses TOML text. Relative paths are resolved against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self, ConfigError> {
        let de = toml::Deserializer::parse(text).map_err(|e| ConfigError::invalid("<document>", e.message()))?;
        let mut config: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let message = e.inner().message().to_owned();
            ConfigError::Invalid { key: offending_key(&path, &message), message }
        })?;
        config.resolve_paths(base);
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.to_owned(), source })?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    fn resolve_paths(&mut self, base: &Path) {
        for p in [&mut self.data.v0, &mut self.data.w0, &mut self.data.w1].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        if self.output.dir.is_relative() {
            self.output.dir = base.join(&self.output.dir);
        }
    }

    fn validate(&self) -> Result<(), ConfigError> {
        self.geometry.build()?;
        if self.data.preset == Preset::Snapshot {
            for (key, p) in [("data.v0", &self.data.v0), ("data.w0", &self.data.w0), ("data.w1", &self.data.w1)] {
                match p {
                    None => return Err(ConfigError::invalid(key, "the snapshot preset needs this file")),
                    Some(p) if !p.is_file() => {
                        return Err(ConfigError::invalid(key, format!("{} does not exist", p.display())))
                    }
                    Some(_) => {}
                }
            }
        }
        if !self.data.amplitude.is_finite() {
            return Err(ConfigError::invalid("data.amplitude", "must be finite"));
        }
        if self.scheme.max_iter == 0 {
            return Err(ConfigError::invalid("scheme.max_iter", "must be at least 1"));
        }
        if self.scheme.tol.is_nan() || self.scheme.tol < 0.0 {
            return Err(ConfigError::invalid("scheme.tol", "must be non-negative"));
        }
        if let Some(t) = self.scheme.t_tilde {
            if !(t > 0.0 && t <= 0.25) {
                return Err(ConfigError::invalid("scheme.t_tilde", "must lie in (0, 1/4]"));
            }
        }
        if self.hidden.samples == 0 || self.hidden.levels.len() < 2 {
            return Err(ConfigError::invalid("hidden", "needs at least one sample and two levels"));
        }
        if self.stokes_mms.levels.len() < 2 {
            return Err(ConfigError::invalid("stokes_mms.levels", "needs at least two levels"));
        }
        if self.wave_mms.levels.len() < 2 {
            return Err(ConfigError::invalid("wave_mms.levels", "needs at least two levels"));
        }
        Ok(())
    }
}

/// Joins the path reported by the deserializer with the field named in an
/// unknown-field message.
fn offending_key(path: &str, message: &str) -> String {
    let field = message
        .strip_prefix("unknown field `")
        .and_then(|rest| rest.split('`').next());
    match (field, path) {
        (Some(f), "." | "") => f.to_owned(),
        (Some(f), p) if p != f && !p.ends_with(&format!(".{f}")) => format!("{p}.{f}"),
        (_, p) => p.to_owned(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<RunConfig, ConfigError> {
        RunConfig::parse(text, Path::new("/tmp"))
    }

    #[test]
    fn minimal_config_takes_defaults() {
        let c = parse("experiment = \"solve\"").unwrap();
        assert_eq!(c.experiment, Experiment::Solve);
        assert_eq!(c.geometry, GeometrySection::default());
        assert_eq!(c.seed(), DEFAULT_SEED);
        assert_eq!(c.output.dir, PathBuf::from("/tmp/out"));
    }

    #[test]
    fn unknown_key_is_named() {
        let err = parse("experiment = \"solve\"\n[scheme]\nsss = 1.5\n").unwrap_err();
        assert_eq!(err.key(), Some("scheme.sss"));
        let err = parse("experiment = \"solve\"\nbogus = 1\n").unwrap_err();
        assert_eq!(err.key(), Some("bogus"));
    }

    #[test]
    fn wrong_type_is_named() {
        let err = parse("experiment = \"solve\"\n[geometry]\nnx = \"many\"\n").unwrap_err();
        assert_eq!(err.key(), Some("geometry.nx"));
    }

    #[test]
    fn bad_geometry_and_override_rejected() {
        let err = parse("experiment = \"solve\"\n[geometry]\nlengths = [1.0, 1.0, 3.0]\nnx = 16\nny = 16\nnz = [8, 8, 8]\nnt = 32\n")
            .unwrap_err();
        assert_eq!(err.key(), Some("geometry"));
        let err = parse("experiment = \"solve\"\n[scheme]\nt_tilde = 0.5\n").unwrap_err();
        assert_eq!(err.key(), Some("scheme.t_tilde"));
    }

    #[test]
    fn snapshot_paths_must_exist() {
        let err = parse("experiment = \"solve\"\n[data]\npreset = \"snapshot\"\nv0 = \"missing.snap\"\nw0 = \"a\"\nw1 = \"b\"\n")
            .unwrap_err();
        assert_eq!(err.key(), Some("data.v0"));
    }

    #[test]
    fn every_experiment_name_parses() {
        for e in [
            Experiment::Solve,
            Experiment::P01,
            Experiment::HiddenRegularity,
            Experiment::NormVerify,
            Experiment::StokesMms,
            Experiment::WaveMms,
        ] {
            let c = parse(&format!("experiment = \"{}\"", e.name())).unwrap();
            assert_eq!(c.experiment, e);
        }
    }
}
