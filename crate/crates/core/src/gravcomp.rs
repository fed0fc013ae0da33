//! Potential-energy-shaping gravity compensation for hip-only, knee-only and
//! hip-knee configurations.
//!
//! Conventions: joint angles are flexion-positive, assist torques are
//! extension-positive, and the global thigh angle is positive when the
//! thigh (hip to knee) tilts forward of the downward vertical. All angles
//! are zero in the calibrated standing posture.
//!
//! World frame: x forward, y up, z normal to the sagittal plane. The thigh
//! IMU's long axis points along its body `-y`.

use std::sync::RwLock;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `R^T R = I` and `det R = 1`.
pub const ORTHONORMAL_TOLERANCE: f64 = 1e-6;

/// The thigh axis may not come closer than this to the sagittal normal.
pub const DEGENERATE_TILT_DEG: f64 = 1.0;

/// Joint angular speed above which a calibration window is not "still".
pub const STILLNESS_THRESHOLD: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Layout {
    HipOnly,
    KneeOnly,
    HipKnee,
}

impl Layout {
    pub const ALL: [Layout; 3] = [Layout::HipOnly, Layout::KneeOnly, Layout::HipKnee];

    pub fn has_hip(self) -> bool {
        matches!(self, Layout::HipOnly | Layout::HipKnee)
    }

    pub fn has_knee(self) -> bool {
        matches!(self, Layout::KneeOnly | Layout::HipKnee)
    }

    pub fn name(self) -> &'static str {
        match self {
            Layout::HipOnly => "hip-only",
            Layout::KneeOnly => "knee-only",
            Layout::HipKnee => "hip-knee",
        }
    }
}

impl std::str::FromStr for Layout {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hip-only" | "hip" => Ok(Layout::HipOnly),
            "knee-only" | "knee" => Ok(Layout::KneeOnly),
            "hip-knee" => Ok(Layout::HipKnee),
            other => Err(Error::Config(format!(
                "unknown layout `{other}` (expected hip-only, knee-only or hip-knee)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExoConfig {
    pub layout: Layout,
    /// Wearer mass, kg.
    pub mass: f64,
    /// Fraction of the modeled gravitational torque offloaded.
    pub alpha: f64,
    /// Thigh link length, m.
    pub l_t: f64,
    /// Height of the offloaded point mass above the hip center, m.
    pub l_h: f64,
    pub g: f64,
    /// Extension saturation, Nm.
    pub tau_ext_max: f64,
    /// Flexion saturation, Nm.
    pub tau_flex_max: f64,
}

impl Default for ExoConfig {
    fn default() -> Self {
        Self {
            layout: Layout::HipKnee,
            mass: 82.0,
            alpha: 0.2,
            l_t: 0.4572,
            l_h: 0.1778,
            g: 9.81,
            tau_ext_max: 25.0,
            tau_flex_max: 0.0,
        }
    }
}

impl ExoConfig {
    /// Default geometry and limits for a layout. The knee-only point mass
    /// sits at the hip center.
    pub fn new(layout: Layout, mass: f64, alpha: f64) -> Self {
        Self {
            layout,
            mass,
            alpha,
            ..Self::default()
        }
        .normalized()
    }

    /// Forces `l_h = 0` for the knee-only layout.
    pub fn normalized(mut self) -> Self {
        if self.layout == Layout::KneeOnly {
            self.l_h = 0.0;
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if !(self.mass > 0.0 && self.mass.is_finite()) {
            return fail(format!("mass {} kg must be > 0", self.mass));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return fail(format!("alpha {} must lie in [0, 1]", self.alpha));
        }
        if !(self.l_t > 0.0 && self.l_t.is_finite()) {
            return fail(format!("l_t {} m must be > 0", self.l_t));
        }
        if !(self.l_h >= 0.0 && self.l_h.is_finite()) {
            return fail(format!("l_h {} m must be >= 0", self.l_h));
        }
        if self.layout == Layout::KneeOnly && self.l_h != 0.0 {
            return fail("knee-only layout requires l_h = 0".into());
        }
        if !(self.g > 0.0 && self.g.is_finite()) {
            return fail(format!("g {} must be > 0", self.g));
        }
        if !(self.tau_ext_max >= 0.0 && self.tau_flex_max >= 0.0) {
            return fail("saturation limits must be >= 0".into());
        }
        Ok(())
    }

    fn clamp(&self, tau: f64) -> f64 {
        let t = tau.clamp(-self.tau_flex_max, self.tau_ext_max);
        // fold -0.0 into +0.0
        if t == 0.0 {
            0.0
        } else {
            t
        }
    }
}

/// Thigh IMU orientation plus joint encoder readings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseSample {
    pub theta_h: f64,
    pub theta_k: f64,
    pub r_thigh: Matrix3<f64>,
    pub t: f64,
}

impl PoseSample {
    pub fn new(t: f64, theta_h: f64, theta_k: f64, r_thigh: Matrix3<f64>) -> Self {
        Self {
            theta_h,
            theta_k,
            r_thigh,
            t,
        }
    }
}

/// Assist torques; a joint absent from the layout is `None`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct JointTorques {
    pub tau_h: Option<f64>,
    pub tau_k: Option<f64>,
}

pub fn check_rotation(r: &Matrix3<f64>) -> Result<()> {
    if r.iter().any(|v| !v.is_finite()) {
        return Err(Error::Input("rotation matrix has non-finite entries".into()));
    }
    let gram_err = (r.transpose() * r - Matrix3::identity()).abs().max();
    let det = r.determinant();
    if gram_err > ORTHONORMAL_TOLERANCE || (det - 1.0).abs() > ORTHONORMAL_TOLERANCE {
        return Err(Error::Input(format!(
            "rotation matrix is not orthonormal (|R^T R - I| = {gram_err:.2e}, det = {det:.6})"
        )));
    }
    Ok(())
}

/// Global sagittal-plane thigh angle from the thigh IMU orientation.
///
/// The thigh axis is mapped to the world frame, projected onto the
/// sagittal plane, and measured from the downward vertical.
pub fn thigh_angle_from_rotation(r_thigh: &Matrix3<f64>) -> Result<f64> {
    check_rotation(r_thigh)?;
    let axis = r_thigh * Vector3::new(0.0, -1.0, 0.0);
    if axis.z.abs() >= DEGENERATE_TILT_DEG.to_radians().cos() {
        return Err(Error::Input(format!(
            "thigh axis lies within {DEGENERATE_TILT_DEG} deg of the sagittal normal"
        )));
    }
    Ok(axis.x.atan2(-axis.y))
}

fn wrap_angle(a: f64) -> f64 {
    a.sin().atan2(a.cos())
}

/// Zero-angle offsets recorded in the standing posture.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CalibrationOffsets {
    pub theta_h: f64,
    pub theta_k: f64,
    pub theta_t: f64,
}

/// Calibrated angles, rad.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointAngles {
    pub theta_t: f64,
    pub theta_h: f64,
    pub theta_k: f64,
}

impl CalibrationOffsets {
    pub fn apply(&self, pose: &PoseSample) -> Result<JointAngles> {
        if !pose.theta_h.is_finite() || !pose.theta_k.is_finite() {
            return Err(Error::Input("non-finite encoder angle".into()));
        }
        let theta_t = thigh_angle_from_rotation(&pose.r_thigh)?;
        Ok(JointAngles {
            theta_t: wrap_angle(theta_t - self.theta_t),
            theta_h: pose.theta_h - self.theta_h,
            theta_k: pose.theta_k - self.theta_k,
        })
    }
}

pub fn calibrate(standing_pose: &PoseSample) -> Result<CalibrationOffsets> {
    calibrate_window(std::slice::from_ref(standing_pose))
}

/// Offsets as the mean over a standing window.
pub fn calibrate_window(window: &[PoseSample]) -> Result<CalibrationOffsets> {
    if window.is_empty() {
        return Err(Error::Input("calibration window is empty".into()));
    }
    let n = window.len() as f64;
    let mut acc = CalibrationOffsets::default();
    for pose in window {
        acc.theta_t += thigh_angle_from_rotation(&pose.r_thigh)?;
        acc.theta_h += pose.theta_h;
        acc.theta_k += pose.theta_k;
    }
    let fastest = window
        .windows(2)
        .filter(|w| w[1].t > w[0].t)
        .map(|w| {
            let dt = w[1].t - w[0].t;
            ((w[1].theta_h - w[0].theta_h) / dt)
                .abs()
                .max(((w[1].theta_k - w[0].theta_k) / dt).abs())
        })
        .fold(0.0, f64::max);
    if fastest > STILLNESS_THRESHOLD {
        log::warn!("calibration window is moving ({fastest:.3} rad/s joint speed)");
    }
    Ok(CalibrationOffsets {
        theta_h: acc.theta_h / n,
        theta_k: acc.theta_k / n,
        theta_t: acc.theta_t / n,
    })
}

/// Gravity-compensation torques for calibrated angles, saturated to
/// `[-tau_flex_max, tau_ext_max]`.
///
/// Knee-only runs the hip-knee law with `l_h = 0, theta_h = 0`; hip-only
/// keeps the hip term with the thigh as base link.
pub fn assist_torques(config: &ExoConfig, theta_t: f64, theta_h: f64) -> JointTorques {
    let (l_h, theta_h) = match config.layout {
        Layout::KneeOnly => (0.0, 0.0),
        _ => (config.l_h, theta_h),
    };
    let gain = config.mass * config.g * config.alpha;
    let torso = (theta_t - theta_h).sin();
    let knee = gain * (config.l_t * theta_t.sin() - l_h * torso);
    let hip = gain * (-l_h * torso);
    JointTorques {
        tau_h: config.layout.has_hip().then(|| config.clamp(hip)),
        tau_k: config.layout.has_knee().then(|| config.clamp(knee)),
    }
}

/// Controller holding configuration and calibration.
#[derive(Debug, Clone)]
pub struct GravityCompensator {
    config: ExoConfig,
    offsets: Option<CalibrationOffsets>,
}

impl GravityCompensator {
    pub fn new(config: ExoConfig) -> Result<Self> {
        let config = config.normalized();
        config.validate()?;
        Ok(Self {
            config,
            offsets: None,
        })
    }

    pub fn config(&self) -> &ExoConfig {
        &self.config
    }

    pub fn offsets(&self) -> Option<CalibrationOffsets> {
        self.offsets
    }

    pub fn set_offsets(&mut self, offsets: CalibrationOffsets) {
        self.offsets = Some(offsets);
    }

    pub fn calibrate(&mut self, window: &[PoseSample]) -> Result<CalibrationOffsets> {
        let offsets = calibrate_window(window)?;
        self.offsets = Some(offsets);
        Ok(offsets)
    }

    pub fn angles(&self, pose: &PoseSample) -> Result<JointAngles> {
        self.offsets
            .ok_or_else(|| Error::State("controller is not calibrated".into()))?
            .apply(pose)
    }

    /// One control-loop evaluation.
    pub fn torques(&self, pose: &PoseSample) -> Result<JointTorques> {
        let a = self.angles(pose)?;
        Ok(assist_torques(&self.config, a.theta_t, a.theta_h))
    }
}

/// Controller shared between a calibrating writer and evaluating readers.
#[derive(Debug)]
pub struct SharedCompensator {
    inner: RwLock<GravityCompensator>,
}

impl SharedCompensator {
    pub fn new(controller: GravityCompensator) -> Self {
        Self {
            inner: RwLock::new(controller),
        }
    }

    pub fn calibrate(&self, window: &[PoseSample]) -> Result<CalibrationOffsets> {
        let offsets = calibrate_window(window)?;
        self.inner
            .write()
            .map_err(|_| Error::State("controller lock poisoned".into()))?
            .set_offsets(offsets);
        Ok(offsets)
    }

    pub fn torques(&self, pose: &PoseSample) -> Result<JointTorques> {
        self.inner
            .read()
            .map_err(|_| Error::State("controller lock poisoned".into()))?
            .torques(pose)
    }
}
