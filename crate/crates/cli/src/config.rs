//! TOML run configuration. Every section is optional and unknown keys are
//! rejected. Angles are in degrees here and converted on the way in.

use std::path::{Path, PathBuf};

use exokit_core::benchsim::{GridSpec, SineBackdriveSpec, SquatDepth, SquatSpec};
use exokit_core::emg::MvcReference;
use exokit_core::sysid::SysidOptions;
use exokit_core::{ActuatorParams, ExoConfig};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const DEFAULT_OUT: &str = "exokit-out";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub actuator: ActuatorParams,
    pub exo: ExoConfig,
    pub sysid: SysidOptions,
    pub backdrive: BackdriveConfig,
    pub grid: GridConfig,
    pub step: StepConfig,
    pub squat: SquatConfig,
    pub emg: EmgConfig,
    pub inputs: InputPaths,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BackdriveConfig {
    /// One phase per frequency, Hz.
    pub freqs: Vec<f64>,
    pub amp_p2p_deg: f64,
    /// Per phase, s.
    pub duration: f64,
    pub sample_rate: f64,
    pub noise_sigma: f64,
}

impl Default for BackdriveConfig {
    fn default() -> Self {
        Self {
            freqs: vec![1.0, 2.0],
            amp_p2p_deg: 70.0,
            duration: 10.0,
            sample_rate: 1000.0,
            noise_sigma: 0.0,
        }
    }
}

impl BackdriveConfig {
    pub fn phases(&self) -> Vec<SineBackdriveSpec> {
        self.freqs
            .iter()
            .map(|&freq| SineBackdriveSpec {
                freq,
                amplitude: (0.5 * self.amp_p2p_deg).to_radians(),
                duration: self.duration,
                sample_rate: self.sample_rate,
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub speeds_deg: Vec<f64>,
    pub torques: Vec<f64>,
    pub dwell: f64,
    pub sample_rate: f64,
    pub noise_sigma: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        let spec = GridSpec::default();
        Self {
            speeds_deg: spec.speeds_deg,
            torques: spec.torques,
            dwell: spec.dwell,
            sample_rate: spec.sample_rate,
            noise_sigma: 0.0,
        }
    }
}

impl GridConfig {
    pub fn spec(&self) -> GridSpec {
        GridSpec {
            speeds_deg: self.speeds_deg.clone(),
            torques: self.torques.clone(),
            dwell: self.dwell,
            sample_rate: self.sample_rate,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StepConfig {
    pub torque: f64,
    pub duration: f64,
    pub sample_rate: f64,
}

impl Default for StepConfig {
    fn default() -> Self {
        Self {
            torque: 30.0,
            duration: 2.0,
            sample_rate: 1000.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DepthDeg {
    pub theta_t: f64,
    pub theta_h: f64,
    pub theta_k: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SquatConfig {
    pub cadence: f64,
    pub depth_deg: DepthDeg,
    pub reps: usize,
    pub payload: f64,
    pub subject_mass: f64,
    pub subject_height: f64,
    pub rest_beats: f64,
    pub sample_rate: f64,
}

impl Default for SquatConfig {
    fn default() -> Self {
        let s = SquatSpec::default();
        let d = s.squat_depth;
        Self {
            cadence: s.cadence,
            depth_deg: DepthDeg {
                theta_t: d.theta_t.to_degrees(),
                theta_h: d.theta_h.to_degrees(),
                theta_k: d.theta_k.to_degrees(),
            },
            reps: s.reps,
            payload: s.payload,
            subject_mass: s.subject_mass,
            subject_height: s.subject_height,
            rest_beats: s.rest_beats,
            sample_rate: s.sample_rate,
        }
    }
}

impl SquatConfig {
    pub fn spec(&self) -> SquatSpec {
        let d = self.depth_deg;
        SquatSpec {
            cadence: self.cadence,
            squat_depth: SquatDepth {
                theta_t: d.theta_t.to_radians(),
                theta_h: d.theta_h.to_radians(),
                theta_k: d.theta_k.to_radians(),
            },
            reps: self.reps,
            payload: self.payload,
            subject_mass: self.subject_mass,
            subject_height: self.subject_height,
            rest_beats: self.rest_beats,
            sample_rate: self.sample_rate,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EmgConfig {
    /// Label written to the metrics file.
    pub condition: String,
    pub expected_reps: Option<usize>,
    /// Use this percentile of the MVC envelope instead of its maximum.
    pub mvc_percentile: Option<f64>,
}

impl Default for EmgConfig {
    fn default() -> Self {
        Self {
            condition: "bare".into(),
            expected_reps: None,
            mvc_percentile: None,
        }
    }
}

impl EmgConfig {
    pub fn reference(&self) -> MvcReference {
        self.mvc_percentile.map_or(MvcReference::Max, MvcReference::Percentile)
    }
}

/// Input files, relative to the configuration file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InputPaths {
    pub sysid: Vec<PathBuf>,
    pub inertia: Option<PathBuf>,
    pub recording: Option<PathBuf>,
    pub mvc: Option<PathBuf>,
    pub thigh: Option<PathBuf>,
}

impl InputPaths {
    fn all_mut(&mut self) -> impl Iterator<Item = &mut PathBuf> {
        self.sysid
            .iter_mut()
            .chain(self.inertia.as_mut())
            .chain(self.recording.as_mut())
            .chain(self.mvc.as_mut())
            .chain(self.thigh.as_mut())
    }
}

impl RunConfig {
    /// Defaults when `path` is `None`.
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
        let mut cfg: RunConfig =
            toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in cfg.inputs.all_mut() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
            if !p.exists() {
                return Err(CliError::Config(format!("input file {} does not exist", p.display())));
            }
        }
        if let Some(out) = cfg.out.as_mut() {
            if out.is_relative() {
                *out = base.join(&*out);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> CliResult<()> {
        self.actuator.validate()?;
        self.exo.validate()?;
        if let Some(q) = self.emg.mvc_percentile {
            if !(q > 0.0 && q <= 100.0) {
                return Err(CliError::Config(format!("emg.mvc_percentile {q} must be in (0, 100]")));
            }
        }
        Ok(())
    }
}
