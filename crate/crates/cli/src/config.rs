//! Run configuration, read from a TOML file.
//!
//! Relative paths inside the file are resolved against the file's own
//! directory, so a configuration and its inputs can move together.

use std::path::{Path, PathBuf};

use altocc_core::analytics::{PathlossExponents, RadioConfig, ScenarioGeometry};
use altocc_core::los::{BreakpointLaws, EnvironmentTriple};
use altocc_core::montecarlo::DEFAULT_EXTRA_DENSITY;
use altocc_core::LatLon;
use altocc_core::raytrace::{CircularGrid, DEFAULT_PLOS_BIN};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const CONFIG_FORMAT: &str = "altocc-run/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub format: String,
    #[serde(default)]
    pub seed: u64,
    pub heights: Heights,
    pub scenario: ScenarioSection,
    pub radio: RadioSection,
    #[serde(default = "default_exponents")]
    pub exponents: PathlossExponents,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub env: Option<EnvironmentTriple>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub laws: Option<LawsSource>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sosgad: Option<SosgadSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub montecarlo: Option<MonteCarloSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raytrace: Option<RaytraceSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ingest: Option<IngestSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compare: Option<CompareSection>,
}

fn default_exponents() -> PathlossExponents {
    PathlossExponents::FREE_SPACE_AND_CUBIC
}

/// Either an explicit list or an inclusive arithmetic range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Heights {
    List(Vec<f64>),
    Range { start: f64, stop: f64, step: f64 },
}

impl Heights {
    pub fn values(&self) -> Result<Vec<f64>, CliError> {
        let v = match *self {
            Heights::List(ref v) => v.clone(),
            Heights::Range { start, stop, step } => {
                if !(start.is_finite() && stop.is_finite() && step > 0.0 && stop >= start) {
                    return Err(CliError::Config(format!(
                        "heights range needs start <= stop and step > 0 (got {start}, {stop}, {step})"
                    )));
                }
                let n = ((stop - start) / step + 1e-9).floor() as usize;
                (0..=n).map(|i| start + i as f64 * step).collect()
            }
        };
        if v.is_empty() || v.iter().any(|h| !(h.is_finite() && *h > 0.0)) {
            return Err(CliError::Config("heights must be non-empty and positive".into()));
        }
        if let Some(i) = v.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(CliError::Config(format!("heights must be strictly increasing (index {})", i + 1)));
        }
        Ok(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    /// Nodes per m².
    pub density: f64,
    #[serde(default)]
    pub guard_radius: f64,
    #[serde(default = "default_outer")]
    pub outer_radius: f64,
}

fn default_outer() -> f64 {
    ScenarioGeometry::DEFAULT_OUTER_RADIUS
}

impl ScenarioSection {
    pub fn geometry(&self, height: f64) -> Result<ScenarioGeometry, CliError> {
        ScenarioGeometry::new(height, self.guard_radius, self.outer_radius, self.density)
            .map_err(|e| CliError::Config(format!("scenario: {e}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadioSection {
    pub tx_power_dbm: f64,
    pub tx_gain_dbi: f64,
    pub rx_gain_dbi: f64,
    pub carrier_freq_hz: f64,
}

impl RadioSection {
    pub fn radio(&self) -> Result<RadioConfig, CliError> {
        RadioConfig::from_db(self.tx_power_dbm, self.tx_gain_dbi, self.rx_gain_dbi, self.carrier_freq_hz)
            .map_err(|e| CliError::Config(format!("radio: {e}")))
    }
}

/// Laws given inline or as a file written by `fit-los`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LawsSource {
    Inline(BreakpointLaws),
    File { file: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SosgadSection {
    /// Guard radii to plot; defaults to the scenario's.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub guard_radii: Vec<f64>,
    /// Densities to plot; defaults to the scenario's.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub densities: Vec<f64>,
    #[serde(default = "yes")]
    pub quadrature: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LosChoice {
    Env,
    AlwaysLos,
    AlwaysNlos,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonteCarloSection {
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "yes")]
    pub fading: bool,
    #[serde(default = "default_los")]
    pub los: LosChoice,
    /// Fixed transmitter list; switches to the hybrid model.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transmitters: Option<PathBuf>,
    /// Reference point for transmitter lists given as lat/lon.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin: Option<LatLon>,
    #[serde(default = "default_extra_density")]
    pub extra_density: f64,
}

impl Default for MonteCarloSection {
    fn default() -> Self {
        MonteCarloSection {
            trials: default_trials(),
            fading: true,
            los: LosChoice::Env,
            transmitters: None,
            origin: None,
            extra_density: default_extra_density(),
        }
    }
}

fn default_trials() -> usize {
    10_000
}

fn default_los() -> LosChoice {
    LosChoice::Env
}

fn default_extra_density() -> f64 {
    DEFAULT_EXTRA_DENSITY
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RaytraceSection {
    pub map: PathBuf,
    #[serde(default = "default_radial_step")]
    pub radial_step: f64,
    #[serde(default = "default_azimuth_step")]
    pub azimuth_step: f64,
    #[serde(default = "default_max_radius")]
    pub max_radius: f64,
    #[serde(default)]
    pub ue_height: f64,
    #[serde(default = "default_plos_bin")]
    pub plos_bin: f64,
    /// Heights whose per-point visibility is written out.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub dump_heights: Vec<f64>,
}

fn default_radial_step() -> f64 {
    CircularGrid::default().radial_step
}

fn default_azimuth_step() -> f64 {
    CircularGrid::default().azimuth_step
}

fn default_max_radius() -> f64 {
    CircularGrid::default().max_radius
}

fn default_plos_bin() -> f64 {
    DEFAULT_PLOS_BIN
}

impl RaytraceSection {
    pub fn grid(&self) -> CircularGrid {
        CircularGrid {
            radial_step: self.radial_step,
            azimuth_step: self.azimuth_step,
            max_radius: self.max_radius,
            center: (0.0, 0.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IngestSection {
    pub sweeps: PathBuf,
    pub gps: PathBuf,
    /// Band table; the built-in table is used when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bands: Option<PathBuf>,
    #[serde(default)]
    pub site_elevation: f64,
    #[serde(default = "default_max_skew")]
    pub max_skew: f64,
    #[serde(default = "default_bin_width")]
    pub bin_width: f64,
}

fn default_max_skew() -> f64 {
    altocc_core::ingest::DEFAULT_MAX_SKEW
}

fn default_bin_width() -> f64 {
    25.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareSection {
    pub curves: Vec<PathBuf>,
    /// Shared grid; the top-level heights are used when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub heights: Option<Heights>,
}

impl RunConfig {
    pub fn from_text(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        if cfg.format != CONFIG_FORMAT {
            return Err(CliError::Config(format!(
                "unsupported format '{}', expected '{CONFIG_FORMAT}'",
                cfg.format
            )));
        }
        cfg.heights.values()?;
        cfg.scenario.geometry(1.0)?;
        cfg.radio.radio()?;
        cfg.exponents
            .validate()
            .map_err(|e| CliError::Config(format!("exponents: {e}")))?;
        if let Some(env) = &cfg.env {
            env.validate().map_err(|e| CliError::Config(format!("env: {e}")))?;
        }
        if let Some(LawsSource::Inline(laws)) = &cfg.laws {
            laws.validate().map_err(|e| CliError::Config(format!("laws: {e}")))?;
        }
        Ok(cfg)
    }

    pub fn to_text(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    /// Reads a configuration and resolves its relative paths.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_text(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve_paths(base);
        Ok(cfg)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(LawsSource::File { file }) = &mut self.laws {
            fix(file);
        }
        if let Some(mc) = &mut self.montecarlo {
            mc.transmitters.as_mut().map(fix);
        }
        if let Some(rt) = &mut self.raytrace {
            fix(&mut rt.map);
        }
        if let Some(ing) = &mut self.ingest {
            fix(&mut ing.sweeps);
            fix(&mut ing.gps);
            ing.bands.as_mut().map(fix);
        }
        if let Some(cmp) = &mut self.compare {
            cmp.curves.iter_mut().for_each(fix);
        }
    }

    pub fn heights(&self) -> Result<Vec<f64>, CliError> {
        self.heights.values()
    }
}
