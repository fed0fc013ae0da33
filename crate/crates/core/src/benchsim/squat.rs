//! Quasi-static squat lifting-and-lowering task.
//!
//! Sagittal shank / thigh / torso chain on a fixed foot. Angles follow the
//! controller conventions: thigh angle from vertical (forward flexion
//! positive), hip and knee flexion positive, all zero standing. Joint
//! torques are extension-positive holding torques, `-dV/dq`, for one leg
//! carrying half the trunk and half the payload. The payload hangs from the
//! shoulder.

use serde::{Deserialize, Serialize};
use std::io::Write;

use crate::error::{Error, Result};
use crate::gravcomp::{assist_torques, ExoConfig};

const G: f64 = 9.81;

/// Largest accepted depth angle, deg.
pub const MAX_DEPTH_DEG: f64 = 120.0;

/// Column header of the per-phase squat results CSV.
pub const SQUAT_RESULTS_HEADER: [&str; 6] = [
    "rep",
    "phase",
    "peak_tau_k_exo",
    "peak_tau_h_exo",
    "human_knee_integral",
    "human_hip_integral",
];

/// Column header of the squat time-series CSV.
pub const SQUAT_SERIES_HEADER: [&str; 13] = [
    "t",
    "rep",
    "theta_t",
    "theta_h",
    "theta_k",
    "payload",
    "plant_knee",
    "plant_hip",
    "exo_knee",
    "exo_hip",
    "human_knee",
    "human_hip",
    "plant_ankle",
];

/// Peak squat angles, rad.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SquatDepth {
    pub theta_t: f64,
    pub theta_h: f64,
    pub theta_k: f64,
}

impl Default for SquatDepth {
    fn default() -> Self {
        Self {
            theta_t: 80f64.to_radians(),
            theta_h: 100f64.to_radians(),
            theta_k: 100f64.to_radians(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SquatSpec {
    /// Metronome beats per minute.
    pub cadence: f64,
    pub squat_depth: SquatDepth,
    pub reps: usize,
    /// kg, carried in both hands.
    pub payload: f64,
    /// kg.
    pub subject_mass: f64,
    /// m.
    pub subject_height: f64,
    /// Standing beats between reps.
    pub rest_beats: f64,
    pub sample_rate: f64,
}

impl Default for SquatSpec {
    fn default() -> Self {
        Self {
            cadence: 60.0,
            squat_depth: SquatDepth::default(),
            reps: 20,
            payload: 12.5,
            subject_mass: 82.0,
            subject_height: 1.78,
            rest_beats: 2.0,
            sample_rate: 300.0,
        }
    }
}

impl SquatSpec {
    pub fn validate(&self) -> Result<()> {
        let d = self.squat_depth;
        for (name, v) in [("theta_t", d.theta_t), ("theta_h", d.theta_h), ("theta_k", d.theta_k)] {
            if !(v > 0.0 && v < MAX_DEPTH_DEG.to_radians()) {
                return Err(Error::Config(format!(
                    "squat depth {name} = {:.3} deg is outside (0, {MAX_DEPTH_DEG}) deg",
                    v.to_degrees()
                )));
            }
        }
        if !(self.cadence > 0.0 && self.cadence.is_finite()) {
            return Err(Error::Config(format!("cadence {} must be > 0", self.cadence)));
        }
        if self.reps == 0 {
            return Err(Error::Config("reps must be >= 1".into()));
        }
        if !(self.payload >= 0.0 && self.payload.is_finite()) {
            return Err(Error::Config(format!("payload {} kg must be >= 0", self.payload)));
        }
        if !(self.subject_mass > 0.0 && self.subject_height > 0.0) {
            return Err(Error::Config("subject mass and height must be > 0".into()));
        }
        if !(self.rest_beats >= 0.0 && self.rest_beats.is_finite()) {
            return Err(Error::Config("rest beats must be >= 0".into()));
        }
        if !(self.sample_rate * 60.0 / self.cadence >= 10.0) {
            return Err(Error::Config("sample rate gives fewer than 10 samples per beat".into()));
        }
        Ok(())
    }
}

/// Minimum-jerk position, velocity and acceleration fractions at `tau` in `[0, 1]`.
pub fn minimum_jerk(tau: f64) -> (f64, f64, f64) {
    let t = tau.clamp(0.0, 1.0);
    let (t2, t3) = (t * t, t * t * t);
    (
        t3 * (10.0 - 15.0 * t + 6.0 * t2),
        30.0 * t2 * (1.0 - t) * (1.0 - t),
        60.0 * t * (1.0 - t) * (1.0 - 2.0 * t),
    )
}

/// Single-leg segment model from whole-body anthropometric fractions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BodyModel {
    pub shank_length: f64,
    pub shank_mass: f64,
    /// From the ankle.
    pub shank_com: f64,
    pub thigh_length: f64,
    pub thigh_mass: f64,
    /// From the knee.
    pub thigh_com: f64,
    /// Hip to shoulder.
    pub torso_length: f64,
    /// Share of head, arms and trunk on this leg.
    pub torso_mass: f64,
    /// From the hip.
    pub torso_com: f64,
}

impl BodyModel {
    pub fn from_subject(mass: f64, height: f64) -> Self {
        let (ls, lt, lhat) = (0.246 * height, 0.245 * height, 0.288 * height);
        Self {
            shank_length: ls,
            shank_mass: 0.0465 * mass,
            shank_com: 0.567 * ls,
            thigh_length: lt,
            thigh_mass: 0.100 * mass,
            thigh_com: 0.567 * lt,
            torso_length: lhat,
            torso_mass: 0.5 * 0.678 * mass,
            torso_com: 0.626 * lhat,
        }
    }

    /// Segment tilts from vertical: shank (forward of ankle), thigh, torso lean.
    fn tilts(theta_t: f64, theta_h: f64, theta_k: f64) -> (f64, f64, f64) {
        (theta_k - theta_t, theta_t, theta_h - theta_t)
    }

    /// Shoulder height above the ankle.
    pub fn shoulder_height(&self, theta_t: f64, theta_h: f64, theta_k: f64) -> f64 {
        let (s, t, l) = Self::tilts(theta_t, theta_h, theta_k);
        self.shank_length * s.cos() + self.thigh_length * t.cos() + self.torso_length * l.cos()
    }

    /// Gravitational potential energy of the leg share, J.
    pub fn potential_energy(&self, theta_t: f64, theta_h: f64, theta_k: f64, payload: f64) -> f64 {
        let (s, t, l) = Self::tilts(theta_t, theta_h, theta_k);
        let knee = self.shank_length * s.cos();
        let hip = knee + self.thigh_length * t.cos();
        G * (self.shank_mass * self.shank_com * s.cos()
            + self.thigh_mass * (knee + self.thigh_com * t.cos())
            + self.torso_mass * (hip + self.torso_com * l.cos())
            + payload * self.shoulder_height(theta_t, theta_h, theta_k))
    }

    /// Extension-positive holding torques `(ankle, knee, hip)` with `payload`
    /// kg at the shoulder.
    pub fn gravity_torques(&self, theta_t: f64, theta_h: f64, theta_k: f64, payload: f64) -> (f64, f64, f64) {
        let (s, t, l) = Self::tilts(theta_t, theta_h, theta_k);
        let above_knee = self.thigh_mass + self.torso_mass + payload;
        let above_hip = self.torso_mass + payload;
        // dV with respect to each segment tilt
        let d_s = -G * s.sin() * self.shank_length * (self.shank_mass * self.shank_com / self.shank_length + above_knee);
        let d_t = -G * t.sin() * (self.thigh_mass * self.thigh_com + above_hip * self.thigh_length);
        let d_l = -G * l.sin() * (self.torso_mass * self.torso_com + payload * self.torso_length);
        // joint coordinates (ankle a, knee k, hip h): thigh = k - a, lean = h - k + a
        (-(d_s - d_t + d_l), -(d_t - d_l), -d_l)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SquatPhase {
    Eccentric,
    Concentric,
}

impl SquatPhase {
    pub fn name(self) -> &'static str {
        match self {
            SquatPhase::Eccentric => "eccentric",
            SquatPhase::Concentric => "concentric",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RepKind {
    /// Payload picked up at the bottom and carried up.
    Lifting,
    /// Payload carried down and left at the bottom.
    Lowering,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseResult {
    /// 1-based.
    pub rep: usize,
    pub phase: SquatPhase,
    pub carrying_payload: bool,
    pub peak_tau_k_exo: f64,
    pub peak_tau_h_exo: f64,
    pub human_knee_integral: f64,
    pub human_hip_integral: f64,
    pub unassisted_knee_integral: f64,
    pub unassisted_hip_integral: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RepSummary {
    pub rep: usize,
    pub kind: RepKind,
    pub knee_peak_reduction: f64,
    pub hip_peak_reduction: f64,
    pub knee_integral_reduction: f64,
    pub hip_integral_reduction: f64,
    /// Potential energy change integrated from joint torque and velocity, J.
    pub potential_energy_change: f64,
}

/// Per-sample squat output. Torques are for one leg.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SquatSeries {
    pub t: Vec<f64>,
    pub rep: Vec<usize>,
    pub theta_t: Vec<f64>,
    pub theta_h: Vec<f64>,
    pub theta_k: Vec<f64>,
    pub payload: Vec<bool>,
    pub plant_ankle: Vec<f64>,
    pub plant_knee: Vec<f64>,
    pub plant_hip: Vec<f64>,
    pub exo_knee: Vec<f64>,
    pub exo_hip: Vec<f64>,
    pub human_knee: Vec<f64>,
    pub human_hip: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SquatRun {
    pub body: BodyModel,
    pub series: SquatSeries,
    pub phases: Vec<PhaseResult>,
    pub reps: Vec<RepSummary>,
}

#[derive(Default)]
struct Accum {
    peak_exo_k: f64,
    peak_exo_h: f64,
    peak_plant_k: f64,
    peak_plant_h: f64,
    peak_human_k: f64,
    peak_human_h: f64,
    human_k: f64,
    human_h: f64,
    plant_k: f64,
    plant_h: f64,
    energy: f64,
}

struct Sample {
    q: [f64; 3],
    qd: [f64; 3],
    plant: (f64, f64, f64),
    exo_k: f64,
    exo_h: f64,
}

pub fn simulate_squat(spec: &SquatSpec, config: &ExoConfig) -> Result<SquatRun> {
    spec.validate()?;
    config.validate()?;
    let body = BodyModel::from_subject(spec.subject_mass, spec.subject_height);
    let beat = 60.0 / spec.cadence;
    let d = spec.squat_depth;
    let depth = [d.theta_t, d.theta_h, d.theta_k];
    let leg_payload = 0.5 * spec.payload;

    let sample = |frac: (f64, f64, f64), sign: f64, carry: bool| -> Sample {
        let (s, sd, _) = frac;
        let q = depth.map(|v| v * s);
        let qd = depth.map(|v| sign * v * sd / beat);
        let plant = body.gravity_torques(q[0], q[1], q[2], if carry { leg_payload } else { 0.0 });
        let exo = assist_torques(config, q[0], q[1]);
        Sample {
            q,
            qd,
            plant,
            exo_k: exo.tau_k.unwrap_or(0.0),
            exo_h: exo.tau_h.unwrap_or(0.0),
        }
    };

    let mut series = SquatSeries::default();
    let mut phases = Vec::with_capacity(2 * spec.reps);
    let mut reps = Vec::with_capacity(spec.reps);
    let steps = (beat * spec.sample_rate).round().max(1.0) as usize;
    let rest_steps = (spec.rest_beats * beat * spec.sample_rate).round() as usize;
    let dt = beat / steps as f64;
    let mut t0 = 0.0;

    for r in 0..spec.reps {
        let kind = if r % 2 == 0 { RepKind::Lifting } else { RepKind::Lowering };
        let mut rep_acc = Accum::default();
        for phase in [SquatPhase::Eccentric, SquatPhase::Concentric] {
            let carry = matches!(
                (kind, phase),
                (RepKind::Lifting, SquatPhase::Concentric) | (RepKind::Lowering, SquatPhase::Eccentric)
            );
            let mut acc = Accum::default();
            let mut prev: Option<Sample> = None;
            for k in 0..=steps {
                let tau = k as f64 / steps as f64;
                let s = match phase {
                    SquatPhase::Eccentric => sample(minimum_jerk(tau), 1.0, carry),
                    SquatPhase::Concentric => sample(minimum_jerk(1.0 - tau), -1.0, carry),
                };
                let (_, pk, ph) = s.plant;
                let (hk, hh) = (pk - s.exo_k, ph - s.exo_h);
                acc.peak_exo_k = acc.peak_exo_k.max(s.exo_k.abs());
                acc.peak_exo_h = acc.peak_exo_h.max(s.exo_h.abs());
                acc.peak_plant_k = acc.peak_plant_k.max(pk.abs());
                acc.peak_plant_h = acc.peak_plant_h.max(ph.abs());
                acc.peak_human_k = acc.peak_human_k.max(hk.abs());
                acc.peak_human_h = acc.peak_human_h.max(hh.abs());
                if let Some(p) = &prev {
                    let (_, ppk, pph) = p.plant;
                    acc.human_k += 0.5 * dt * (hk + ppk - p.exo_k);
                    acc.human_h += 0.5 * dt * (hh + pph - p.exo_h);
                    acc.plant_k += 0.5 * dt * (pk + ppk);
                    acc.plant_h += 0.5 * dt * (ph + pph);
                    acc.energy += 0.5 * dt * (power(&s) + power(p));
                }
                // the first sample of later phases repeats the previous last one
                if k > 0 || (r == 0 && phase == SquatPhase::Eccentric) {
                    push(&mut series, t0 + k as f64 * dt, r + 1, &s, carry);
                }
                prev = Some(s);
            }
            t0 += beat;
            phases.push(PhaseResult {
                rep: r + 1,
                phase,
                carrying_payload: carry,
                peak_tau_k_exo: acc.peak_exo_k,
                peak_tau_h_exo: acc.peak_exo_h,
                human_knee_integral: acc.human_k,
                human_hip_integral: acc.human_h,
                unassisted_knee_integral: acc.plant_k,
                unassisted_hip_integral: acc.plant_h,
            });
            rep_acc.peak_plant_k = rep_acc.peak_plant_k.max(acc.peak_plant_k);
            rep_acc.peak_plant_h = rep_acc.peak_plant_h.max(acc.peak_plant_h);
            rep_acc.peak_human_k = rep_acc.peak_human_k.max(acc.peak_human_k);
            rep_acc.peak_human_h = rep_acc.peak_human_h.max(acc.peak_human_h);
            rep_acc.human_k += acc.human_k;
            rep_acc.human_h += acc.human_h;
            rep_acc.plant_k += acc.plant_k;
            rep_acc.plant_h += acc.plant_h;
            rep_acc.energy += acc.energy;
        }
        // standing rest: every angle and torque is zero
        let stand = sample(minimum_jerk(0.0), 1.0, false);
        for k in 1..=rest_steps {
            push(&mut series, t0 + k as f64 * dt, r + 1, &stand, false);
        }
        t0 += rest_steps as f64 * dt;
        reps.push(RepSummary {
            rep: r + 1,
            kind,
            knee_peak_reduction: rep_acc.peak_plant_k - rep_acc.peak_human_k,
            hip_peak_reduction: rep_acc.peak_plant_h - rep_acc.peak_human_h,
            knee_integral_reduction: rep_acc.plant_k - rep_acc.human_k,
            hip_integral_reduction: rep_acc.plant_h - rep_acc.human_h,
            potential_energy_change: rep_acc.energy,
        });
    }
    Ok(SquatRun {
        body,
        series,
        phases,
        reps,
    })
}

/// `dV/dt = -sum(tau_ext * qdot)` over ankle, knee and hip joint rates.
fn power(s: &Sample) -> f64 {
    let [tt, th, tk] = s.qd;
    let ankle_rate = tk - tt;
    let (pa, pk, ph) = s.plant;
    -(pa * ankle_rate + pk * tk + ph * th)
}

fn push(series: &mut SquatSeries, t: f64, rep: usize, s: &Sample, carry: bool) {
    let (pa, pk, ph) = s.plant;
    series.t.push(t);
    series.rep.push(rep);
    series.theta_t.push(s.q[0]);
    series.theta_h.push(s.q[1]);
    series.theta_k.push(s.q[2]);
    series.payload.push(carry);
    series.plant_ankle.push(pa);
    series.plant_knee.push(pk);
    series.plant_hip.push(ph);
    series.exo_knee.push(s.exo_k);
    series.exo_hip.push(s.exo_h);
    series.human_knee.push(pk - s.exo_k);
    series.human_hip.push(ph - s.exo_h);
}

impl SquatRun {
    pub fn write_results_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{}", SQUAT_RESULTS_HEADER.join(","))?;
        for p in &self.phases {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                p.rep,
                p.phase.name(),
                p.peak_tau_k_exo,
                p.peak_tau_h_exo,
                p.human_knee_integral,
                p.human_hip_integral
            )?;
        }
        Ok(())
    }

    pub fn write_series_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{}", SQUAT_SERIES_HEADER.join(","))?;
        let s = &self.series;
        for k in 0..s.t.len() {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{},{},{},{}",
                s.t[k],
                s.rep[k],
                s.theta_t[k],
                s.theta_h[k],
                s.theta_k[k],
                u8::from(s.payload[k]),
                s.plant_knee[k],
                s.plant_hip[k],
                s.exo_knee[k],
                s.exo_hip[k],
                s.human_knee[k],
                s.human_hip[k],
                s.plant_ankle[k]
            )?;
        }
        Ok(())
    }

    pub fn peak_exo_knee(&self) -> f64 {
        self.phases.iter().map(|p| p.peak_tau_k_exo).fold(0.0, f64::max)
    }

    pub fn peak_exo_hip(&self) -> f64 {
        self.phases.iter().map(|p| p.peak_tau_h_exo).fold(0.0, f64::max)
    }
}
