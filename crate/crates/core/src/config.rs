//! Run configuration: TOML on disk, paper-facing signs and units in the file.
//!
//! Line strengths are written as absorption coefficients `alpha_per_m`, where
//! a negative value is gain. They are negated on load (`strength = −alpha`)
//! and negated back on save, so a load/save cycle is exact. Frequencies are
//! MHz (ordinary frequency, HWHM for linewidths); times are seconds.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourwm::FourWmGeometry;
use crate::medium::{LineComponent, MediumChannel};
use crate::pulse::{GridSpec, PulseSpec};
use crate::scalar::mhz_to_rad;

/// The shipped default configuration, selectable by the name `default`.
pub const DEFAULT_CONFIG: &str = include_str!("../../../configs/default.toml");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawLine", into = "RawLine")]
pub struct LineConfig {
    /// Internal sign: positive is gain (1/m).
    pub strength: f64,
    pub hwhm_mhz: f64,
    pub center_mhz: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLine {
    alpha_per_m: f64,
    gamma_mhz: f64,
    center_mhz: f64,
}

impl TryFrom<RawLine> for LineConfig {
    type Error = String;

    fn try_from(raw: RawLine) -> std::result::Result<Self, String> {
        let line = LineConfig {
            strength: -raw.alpha_per_m,
            hwhm_mhz: raw.gamma_mhz,
            center_mhz: raw.center_mhz,
        };
        line.to_component().map_err(|e| e.to_string())?;
        Ok(line)
    }
}

impl From<LineConfig> for RawLine {
    fn from(line: LineConfig) -> Self {
        RawLine {
            alpha_per_m: -line.strength,
            gamma_mhz: line.hwhm_mhz,
            center_mhz: line.center_mhz,
        }
    }
}

impl LineConfig {
    pub fn to_component(&self) -> Result<LineComponent<f64>> {
        if !(self.hwhm_mhz > 0.0) {
            return Err(Error::invalid("gamma_mhz", "hwhm must be positive"));
        }
        if !(self.strength.is_finite() && self.strength != 0.0) {
            return Err(Error::invalid("alpha_per_m", "must be finite and nonzero"));
        }
        LineComponent::new(
            mhz_to_rad(self.center_mhz),
            mhz_to_rad(self.hwhm_mhz),
            self.strength,
        )
    }
}

fn unit_index() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelConfig {
    pub length_m: f64,
    #[serde(default = "unit_index")]
    pub background_index: f64,
    #[serde(default)]
    pub lines: Vec<LineConfig>,
}

impl ChannelConfig {
    pub fn to_channel(&self) -> Result<MediumChannel<f64>> {
        let lines = self
            .lines
            .iter()
            .map(LineConfig::to_component)
            .collect::<Result<Vec<_>>>()?;
        MediumChannel::new(self.background_index, self.length_m, lines)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    pub pump_detuning_mhz: f64,
    pub seed_offset_mhz: f64,
    pub two_photon_detuning_mhz: f64,
    pub coupling: f64,
}

impl GeometryConfig {
    pub fn to_geometry(&self) -> Result<FourWmGeometry<f64>> {
        FourWmGeometry::new(
            self.pump_detuning_mhz * 1e6,
            self.seed_offset_mhz * 1e6,
            self.two_photon_detuning_mhz * 1e6,
            self.coupling,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub start_mhz: f64,
    pub stop_mhz: f64,
    pub step_mhz: f64,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step_mhz > 0.0) || !self.step_mhz.is_finite() {
            return Err(Error::invalid("sweep.step_mhz", "must be positive"));
        }
        if !(self.stop_mhz >= self.start_mhz) || !self.start_mhz.is_finite() || !self.stop_mhz.is_finite() {
            return Err(Error::invalid("sweep.stop_mhz", "must be finite and not below start_mhz"));
        }
        if (self.stop_mhz - self.start_mhz) / self.step_mhz > 1e6 {
            return Err(Error::invalid("sweep.step_mhz", "more than 1e6 grid points"));
        }
        Ok(())
    }

    /// Two-photon detunings in MHz, `start + i·step` up to `stop` inclusive.
    pub fn detunings_mhz(&self) -> Vec<f64> {
        let n = ((self.stop_mhz - self.start_mhz) / self.step_mhz + 1e-9).floor() as usize;
        (0..=n).map(|i| self.start_mhz + i as f64 * self.step_mhz).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseConfig {
    pub fwhm_s: f64,
    pub peak_amplitude: f64,
    pub center_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub window_s: f64,
    pub n_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Thresholds {
    /// Conjugate peak power over reference peak power.
    pub measurability: f64,
    pub distortion_cap: f64,
    pub wraparound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed_channel: ChannelConfig,
    pub conjugate_channel: ChannelConfig,
    pub geometry: GeometryConfig,
    pub sweep: SweepConfig,
    pub pulse: PulseConfig,
    pub grid: GridConfig,
    pub thresholds: Thresholds,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.seed_channel.to_channel().map_err(|e| prefix("seed_channel", e))?;
        self.conjugate_channel
            .to_channel()
            .map_err(|e| prefix("conjugate_channel", e))?;
        self.geometry.to_geometry().map_err(|e| prefix("geometry", e))?;
        self.sweep.validate()?;
        self.pulse_spec().map_err(|e| prefix("pulse", e))?;
        self.grid_spec().map_err(|e| prefix("grid", e))?;
        let t = &self.thresholds;
        if !(t.measurability >= 0.0 && t.measurability.is_finite()) {
            return Err(Error::invalid("thresholds.measurability", "must be non-negative"));
        }
        if !(t.distortion_cap >= 0.0) {
            return Err(Error::invalid("thresholds.distortion_cap", "must be non-negative"));
        }
        if !(t.wraparound > 0.0 && t.wraparound.is_finite()) {
            return Err(Error::invalid("thresholds.wraparound", "must be positive"));
        }
        Ok(())
    }

    pub fn seed_channel(&self) -> Result<MediumChannel<f64>> {
        self.seed_channel.to_channel()
    }

    pub fn conjugate_channel(&self) -> Result<MediumChannel<f64>> {
        self.conjugate_channel.to_channel()
    }

    pub fn geometry(&self) -> Result<FourWmGeometry<f64>> {
        self.geometry.to_geometry()
    }

    pub fn pulse_spec(&self) -> Result<PulseSpec<f64>> {
        PulseSpec::gaussian(self.pulse.fwhm_s, self.pulse.peak_amplitude, self.pulse.center_s)
    }

    pub fn grid_spec(&self) -> Result<GridSpec<f64>> {
        GridSpec::new(self.grid.window_s, self.grid.n_points)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn default_config() -> Self {
        Self::from_toml(DEFAULT_CONFIG).expect("shipped default config is valid")
    }
}

fn prefix(section: &str, e: Error) -> Error {
    match e {
        Error::Invalid { key, constraint } => Error::Invalid {
            key: format!("{section}.{key}"),
            constraint,
        },
        other => Error::Invalid {
            key: section.to_string(),
            constraint: other.to_string(),
        },
    }
}

/// Loads a config file; the name `default` selects the shipped defaults.
pub fn load_config(path: impl AsRef<Path>) -> Result<RunConfig> {
    let path = path.as_ref();
    if path.as_os_str() == "default" {
        return RunConfig::from_toml(DEFAULT_CONFIG);
    }
    RunConfig::from_toml(&fs::read_to_string(path)?)
}

pub fn save_config(path: impl AsRef<Path>, config: &RunConfig) -> Result<()> {
    fs::write(path, config.to_toml()?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_maps_paper_signs() {
        let cfg = RunConfig::default_config();
        let conj = cfg.conjugate_channel().unwrap();
        assert_eq!(conj.lines[0].strength, 175.0);
        assert_eq!(conj.lines[1].strength, -95.0);
        assert_eq!(conj.lines[0].hwhm, mhz_to_rad(20.0));
        assert_eq!(conj.length, 0.017);
        assert!(DEFAULT_CONFIG.contains("alpha_per_m = -175.0"));
    }

    #[test]
    fn zero_hwhm_rejected() {
        let text = DEFAULT_CONFIG.replacen("gamma_mhz = 20.0", "gamma_mhz = 0.0", 1);
        let err = RunConfig::from_toml(&text).unwrap_err().to_string();
        assert!(err.contains("hwhm must be positive"), "{err}");
    }

    #[test]
    fn unknown_key_rejected() {
        let text = DEFAULT_CONFIG.replacen("[grid]", "[grid]\nbogus = 1", 1);
        let err = RunConfig::from_toml(&text).unwrap_err().to_string();
        assert!(err.contains("bogus"), "{err}");
    }

    #[test]
    fn missing_key_named() {
        let text = DEFAULT_CONFIG.replacen("coupling =", "# coupling =", 1);
        let err = RunConfig::from_toml(&text).unwrap_err().to_string();
        assert!(err.contains("coupling"), "{err}");
    }

    #[test]
    fn round_trip_is_exact() {
        let mut cfg = RunConfig::default_config();
        cfg.geometry.coupling = 0.1 + 0.2;
        cfg.seed_channel.lines[0].hwhm_mhz = std::f64::consts::PI;
        let back = RunConfig::from_toml(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(back, cfg);
        assert!(cfg.to_toml().unwrap().contains("alpha_per_m = -175.0"));
    }

    #[test]
    fn save_and_load_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        let cfg = RunConfig::default_config();
        save_config(&path, &cfg).unwrap();
        assert_eq!(load_config(&path).unwrap(), cfg);
        assert_eq!(load_config("default").unwrap(), cfg);
        assert!(matches!(load_config(dir.path().join("missing.toml")), Err(Error::Io(_))));
    }

    #[test]
    fn invariant_violations_name_the_key() {
        let mut cfg = RunConfig::default_config();
        cfg.geometry.coupling = -1.0;
        assert!(cfg.validate().unwrap_err().to_string().contains("geometry.coupling"));
        let mut cfg = RunConfig::default_config();
        cfg.grid.n_points = 1000;
        assert!(cfg.validate().unwrap_err().to_string().contains("grid"));
        let mut cfg = RunConfig::default_config();
        cfg.thresholds.distortion_cap = -0.1;
        assert!(cfg.validate().unwrap_err().to_string().contains("distortion_cap"));
        let mut cfg = RunConfig::default_config();
        cfg.sweep.step_mhz = 0.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn sweep_grid_default_has_81_points() {
        let d = RunConfig::default_config().sweep.detunings_mhz();
        assert_eq!(d.len(), 81);
        assert_eq!(d[0], -30.0);
        assert_eq!(d[80], 50.0);
    }
}
