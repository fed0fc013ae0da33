//! Deterministic regeneration of the benchtop actuator trials: dynamic
//! backdrive, the constant torque/speed grid, and the locked-output step.
//!
//! The torque column follows the load-cell convention of the forward model:
//! it reads the torque the actuator exerts on the load. During a backdrive
//! trial that is the reaction `-(J accel + f_C sign(omega))` on top of the
//! sensor bias.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::actuator::ActuatorParams;
use crate::error::{Error, Result};
use crate::trial::TrialLog;

use std::f64::consts::PI;

pub mod squat;

pub use squat::{simulate_squat, SquatDepth, SquatRun, SquatSpec};

/// I.i.d. Gaussian torque noise. A zero sigma draws nothing.
pub struct TorqueNoise {
    sigma: f64,
    rng: ChaCha8Rng,
}

impl TorqueNoise {
    pub fn new(sigma: f64, seed: u64) -> Result<Self> {
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::Config(format!("noise sigma {sigma} must be >= 0")));
        }
        Ok(Self {
            sigma,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    pub fn sample(&mut self) -> f64 {
        if self.sigma == 0.0 {
            return 0.0;
        }
        // sigma > 0 and finite, so the distribution is valid
        Normal::new(0.0, self.sigma).unwrap().sample(&mut self.rng)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SineBackdriveSpec {
    /// Hz.
    pub freq: f64,
    /// Half of peak-to-peak, rad.
    pub amplitude: f64,
    /// s.
    pub duration: f64,
    /// Hz.
    pub sample_rate: f64,
}

impl Default for SineBackdriveSpec {
    fn default() -> Self {
        Self {
            freq: 1.0,
            amplitude: 35f64.to_radians(),
            duration: 10.0,
            sample_rate: 1000.0,
        }
    }
}

impl SineBackdriveSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.freq > 0.0 && self.freq.is_finite()) {
            return Err(Error::Config(format!("frequency {} Hz must be > 0", self.freq)));
        }
        if !(self.amplitude > 0.0 && self.amplitude.is_finite()) {
            return Err(Error::Config(format!("amplitude {} rad must be > 0", self.amplitude)));
        }
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(Error::Config(format!("duration {} s must be > 0", self.duration)));
        }
        if !(self.sample_rate > 20.0 * self.freq && self.sample_rate.is_finite()) {
            return Err(Error::Config(format!(
                "sample rate {} Hz must exceed 20x the {} Hz motion",
                self.sample_rate, self.freq
            )));
        }
        Ok(())
    }
}

/// Dynamic backdrive trial with `theta = A sin(2 pi f t)` and zero current.
pub fn simulate_backdrive(
    spec: &SineBackdriveSpec,
    params: &ActuatorParams,
    noise_sigma: f64,
    seed: u64,
) -> Result<TrialLog> {
    simulate_backdrive_sequence(std::slice::from_ref(spec), params, noise_sigma, seed)
}

/// Several sinusoidal phases back to back at one amplitude and sample rate.
///
/// The first phase starts at `theta = 0` like a single trial. Every phase
/// but the last is stretched to the next motion extreme, and the following
/// phase starts from that extreme, so position and velocity stay continuous
/// across the switch.
pub fn simulate_backdrive_sequence(
    phases: &[SineBackdriveSpec],
    params: &ActuatorParams,
    noise_sigma: f64,
    seed: u64,
) -> Result<TrialLog> {
    let first = phases
        .first()
        .ok_or_else(|| Error::Config("backdrive trial needs at least one phase".into()))?;
    params.validate()?;
    for p in phases {
        p.validate()?;
        if p.amplitude != first.amplitude || p.sample_rate != first.sample_rate {
            return Err(Error::Config(
                "backdrive phases must share amplitude and sample rate".into(),
            ));
        }
    }
    let fs = first.sample_rate;
    let amp = first.amplitude;

    // (start time, end time, angular frequency, phase offset)
    let mut plan = Vec::with_capacity(phases.len());
    let mut start = 0.0;
    let mut offset = 0.0;
    for (k, p) in phases.iter().enumerate() {
        let w = 2.0 * PI * p.freq;
        let mut end = start + p.duration;
        let mut next_offset = 0.0;
        if k + 1 < phases.len() {
            // next extreme: w tau + offset = pi/2 + m pi
            let m = ((w * p.duration + offset - PI / 2.0) / PI).ceil().max(0.0);
            end = start + (PI / 2.0 + m * PI - offset) / w;
            next_offset = if (m as i64) % 2 == 0 { PI / 2.0 } else { -PI / 2.0 };
        }
        plan.push((start, end, w, offset));
        start = end;
        offset = next_offset;
    }
    let total = start;
    let n = (total * fs).round() as usize + 1;

    let mut noise = TorqueNoise::new(noise_sigma, seed)?;
    let mut theta = Vec::with_capacity(n);
    let mut omega = Vec::with_capacity(n);
    let mut tau = Vec::with_capacity(n);
    let mut phase = 0;
    for k in 0..n {
        let t = k as f64 / fs;
        while phase + 1 < plan.len() && t >= plan[phase].1 {
            phase += 1;
        }
        let (t0, _, w, off) = plan[phase];
        let arg = w * (t - t0) + off;
        let (s, c) = arg.sin_cos();
        theta.push(amp * s);
        omega.push(amp * w * c);
        let accel = -amp * w * w * s;
        let reaction = params.backdrive_torque(amp * w * c, accel)?;
        tau.push(params.bias - reaction + noise.sample());
    }
    TrialLog::from_rate(fs, vec![0.0; n], theta, omega, tau)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSpec {
    /// Speed magnitudes, deg/s.
    pub speeds_deg: Vec<f64>,
    /// Torque magnitudes, Nm.
    pub torques: Vec<f64>,
    /// Hold time per point, s.
    pub dwell: f64,
    pub sample_rate: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            speeds_deg: vec![0.0, 1.0, 3.0, 10.0, 30.0, 100.0, 300.0],
            torques: vec![0.0, 1.0, 3.0, 5.0, 9.0, 25.0],
            dwell: 3.0,
            sample_rate: 200.0,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.speeds_deg.is_empty() || self.torques.is_empty() {
            return Err(Error::Config("grid speed and torque lists must be non-empty".into()));
        }
        if self.speeds_deg.iter().chain(&self.torques).any(|v| !v.is_finite()) {
            return Err(Error::Config("grid values must be finite".into()));
        }
        if !(self.dwell > 0.0 && self.sample_rate > 0.0) {
            return Err(Error::Config("grid dwell and sample rate must be > 0".into()));
        }
        if (self.dwell * self.sample_rate).round() < 1.0 {
            return Err(Error::Config("grid dwell is shorter than one sample".into()));
        }
        Ok(())
    }

    /// Every (signed speed, signed torque) pair, zero counted once.
    pub fn points(&self) -> Vec<GridPoint> {
        let signed = |v: &[f64]| -> Vec<f64> {
            v.iter()
                .flat_map(|&x| if x == 0.0 { vec![0.0] } else { vec![x.abs(), -x.abs()] })
                .collect()
        };
        let torques = signed(&self.torques);
        signed(&self.speeds_deg)
            .into_iter()
            .flat_map(|s| {
                torques.iter().map(move |&t| GridPoint {
                    speed_deg: s,
                    torque: t,
                })
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridPoint {
    pub speed_deg: f64,
    pub torque: f64,
}

#[derive(Debug, Clone)]
pub struct GridTrial {
    pub log: TrialLog,
    /// Points held, in order.
    pub points: Vec<GridPoint>,
    /// Points skipped because the torque was unachievable at that speed.
    pub skipped: Vec<GridPoint>,
}

/// Constant speed / constant torque grid. Each point holds its speed and
/// the model-inverse current for `dwell` seconds.
pub fn simulate_grid(
    params: &ActuatorParams,
    spec: &GridSpec,
    noise_sigma: f64,
    seed: u64,
) -> Result<GridTrial> {
    spec.validate()?;
    params.validate()?;
    let fs = spec.sample_rate;
    let per_point = (spec.dwell * fs).round() as usize;
    let mut noise = TorqueNoise::new(noise_sigma, seed)?;
    let (mut i_q, mut theta, mut omega, mut tau) = (vec![], vec![], vec![], vec![]);
    let mut held = Vec::new();
    let mut skipped = Vec::new();
    let mut pos = 0.0;
    for point in spec.points() {
        let w = point.speed_deg.to_radians();
        let current = match params.current_for_torque(point.torque, w) {
            Ok(i) => i,
            Err(e @ Error::UnachievableTorque { .. }) => {
                log::info!("grid point skipped: {e}");
                skipped.push(point);
                continue;
            }
            Err(e) => return Err(e),
        };
        let torque = params.predict_torque(current, w)?;
        for _ in 0..per_point {
            i_q.push(current);
            omega.push(w);
            theta.push(pos);
            tau.push(torque + noise.sample());
            pos += w / fs;
        }
        held.push(point);
    }
    if i_q.len() < 2 {
        return Err(Error::Config("grid produced fewer than two samples".into()));
    }
    Ok(GridTrial {
        log: TrialLog::from_rate(fs, i_q, theta, omega, tau)?,
        points: held,
        skipped,
    })
}

/// Zero-to-target torque step at `duration / 2` with the output locked.
pub fn simulate_step(
    params: &ActuatorParams,
    tau_target: f64,
    duration: f64,
    sample_rate: f64,
) -> Result<TrialLog> {
    params.validate()?;
    if !(duration > 0.0 && sample_rate > 0.0) {
        return Err(Error::Config("step duration and sample rate must be > 0".into()));
    }
    let current = params.current_for_torque(tau_target, 0.0)?;
    let n = ((duration * sample_rate).round() as usize + 1).max(2);
    let step_at = duration / 2.0;
    let i_q: Vec<f64> = (0..n)
        .map(|k| if k as f64 / sample_rate >= step_at { current } else { 0.0 })
        .collect();
    let tau = i_q
        .iter()
        .map(|&i| params.predict_torque(i, 0.0))
        .collect::<Result<Vec<_>>>()?;
    TrialLog::from_rate(sample_rate, i_q, vec![0.0; n], vec![0.0; n], tau)
}
