//! Quasi-direct-drive actuator model.
//!
//! The identified output-torque model is
//!
//! ```text
//! tau = b + g_r (k_tau - k_n |I_q|) I_q - (f_C + f_g g_r k_tau |I_q|) sign(omega)
//! ```
//!
//! where `f_g` is stored as a fraction of the nominal transmitted torque
//! `g_r k_tau |I_q|`. The sign of the output velocity is taken through a
//! symmetric deadband so that a stationary output carries no friction term.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Velocities below this magnitude are treated as stationary.
pub const VELOCITY_DEADBAND: f64 = 0.01;

/// Rated q-axis current. Params must keep a positive effective torque
/// constant over `[0, RATED_CURRENT]` and inverse solutions beyond it are
/// rejected.
pub const RATED_CURRENT: f64 = 30.0;

/// Sanity bound on currents accepted by the forward model.
pub const MAX_MODEL_CURRENT: f64 = 40.0;

/// Sign of a velocity with the stationary deadband applied.
pub fn deadband_sign(omega: f64) -> f64 {
    if omega.abs() < VELOCITY_DEADBAND {
        0.0
    } else {
        omega.signum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ActuatorParams {
    pub gear_ratio: f64,
    /// Torque constant at zero current, Nm/A.
    pub k_tau: f64,
    /// Decrease of the torque constant per amp, Nm/A².
    pub k_n: f64,
    /// Coulomb friction, Nm.
    pub f_coulomb: f64,
    /// Gear friction as a fraction of nominal torque.
    pub f_gear: f64,
    /// Torque-sensor bias, Nm.
    pub bias: f64,
    /// Output-side reflected inertia, kg·m².
    pub reflected_inertia: f64,
    /// q-axis torque constant of the simple nominal model, Nm/A.
    pub k_t_nominal: f64,
}

impl Default for ActuatorParams {
    fn default() -> Self {
        Self::paper_fit()
    }
}

impl ActuatorParams {
    /// Identified AK80-9 constants. `k_n` comes from the torque constant
    /// falling linearly from 0.147 Nm/A at 0 A to 0.125 Nm/A at 20 A.
    pub fn paper_fit() -> Self {
        Self {
            gear_ratio: 9.0,
            k_tau: 0.147,
            k_n: (0.147 - 0.125) / 20.0,
            f_coulomb: 0.37,
            f_gear: 0.088,
            bias: 0.0,
            reflected_inertia: 92.11e-4,
            k_t_nominal: 0.14,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("gear_ratio", self.gear_ratio),
            ("k_tau", self.k_tau),
            ("k_n", self.k_n),
            ("f_coulomb", self.f_coulomb),
            ("f_gear", self.f_gear),
            ("bias", self.bias),
            ("reflected_inertia", self.reflected_inertia),
            ("k_t_nominal", self.k_t_nominal),
        ];
        if let Some((name, _)) = fields.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::Config(format!("actuator parameter `{name}` is not finite")));
        }
        let check = |ok: bool, msg: &str| {
            if ok {
                Ok(())
            } else {
                Err(Error::Config(msg.to_string()))
            }
        };
        check(self.gear_ratio > 0.0, "gear_ratio must be > 0")?;
        check(self.k_tau > 0.0, "k_tau must be > 0")?;
        check(self.k_n >= 0.0, "k_n must be >= 0")?;
        check(self.f_coulomb >= 0.0, "f_coulomb must be >= 0")?;
        check((0.0..1.0).contains(&self.f_gear), "f_gear must lie in [0, 1)")?;
        check(self.reflected_inertia >= 0.0, "reflected_inertia must be >= 0")?;
        check(self.k_t_nominal > 0.0, "k_t_nominal must be > 0")?;
        check(
            self.effective_torque_constant(RATED_CURRENT) > 0.0,
            "effective torque constant k_tau - k_n*|I_q| must stay positive up to the rated current",
        )
    }

    /// Validated constructor.
    pub fn checked(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    /// Current-dependent torque constant `k_tau - k_n |I_q|`.
    pub fn effective_torque_constant(&self, i_q: f64) -> f64 {
        self.k_tau - self.k_n * i_q.abs()
    }

    /// Friction magnitude opposing motion at the given current.
    fn friction_magnitude(&self, i_q: f64) -> f64 {
        self.f_coulomb + self.f_gear * self.gear_ratio * self.k_tau * i_q.abs()
    }

    /// Output torque for a q-axis current and output velocity.
    pub fn predict_torque(&self, i_q: f64, omega: f64) -> Result<f64> {
        if !i_q.is_finite() || !omega.is_finite() {
            return Err(Error::Input(format!(
                "non-finite actuator state (i_q={i_q}, omega={omega})"
            )));
        }
        if i_q.abs() > MAX_MODEL_CURRENT {
            return Err(Error::Input(format!(
                "|i_q| = {} A exceeds the {MAX_MODEL_CURRENT} A model bound",
                i_q.abs()
            )));
        }
        Ok(self.torque_unchecked(i_q, omega))
    }

    pub(crate) fn torque_unchecked(&self, i_q: f64, omega: f64) -> f64 {
        self.bias + self.gear_ratio * self.effective_torque_constant(i_q) * i_q
            - self.friction_magnitude(i_q) * deadband_sign(omega)
    }

    /// Current that produces `tau_desired` at output velocity `omega`.
    ///
    /// The sign of the current is fixed by comparing the target with the
    /// zero-current torque; on that branch the model is a quadratic in
    /// `|I_q|` whose smaller root is returned.
    pub fn current_for_torque(&self, tau_desired: f64, omega: f64) -> Result<f64> {
        if !tau_desired.is_finite() || !omega.is_finite() {
            return Err(Error::Input(format!(
                "non-finite torque request (tau={tau_desired}, omega={omega})"
            )));
        }
        let s = deadband_sign(omega);
        let unachievable = |reason: String| Error::UnachievableTorque {
            torque: tau_desired,
            omega,
            reason,
        };

        // Torque delivered at zero current is b - f_C s.
        let excess = tau_desired - self.bias + s * self.f_coulomb;
        let direction = if excess >= 0.0 { 1.0 } else { -1.0 };
        // On the chosen branch, with m = |I_q|:
        //   g_r k_n m^2 - g_r k_tau (1 - direction s f_g) m + |excess| = 0
        let a = self.gear_ratio * self.k_n;
        let b = self.gear_ratio * self.k_tau * (1.0 - direction * s * self.f_gear);
        let c = excess.abs();
        let disc = b * b - 4.0 * a * c;
        if disc < 0.0 {
            return Err(unachievable(format!(
                "exceeds the torque-current peak (discriminant {disc:.3e})"
            )));
        }
        // Smaller root in the cancellation-free form.
        let magnitude = 2.0 * c / (b + disc.sqrt());
        if magnitude > RATED_CURRENT {
            return Err(unachievable(format!(
                "needs {magnitude:.2} A, above the {RATED_CURRENT} A rating"
            )));
        }
        Ok(direction * magnitude)
    }

    /// Current from the nominal linear model `tau = g_r K_t i`.
    pub fn nominal_current_for_torque(&self, tau_desired: f64) -> f64 {
        tau_desired / (self.gear_ratio * self.k_t_nominal)
    }

    /// Torque needed to backdrive the unpowered actuator.
    pub fn backdrive_torque(&self, omega: f64, alpha_dd: f64) -> Result<f64> {
        if !omega.is_finite() || !alpha_dd.is_finite() {
            return Err(Error::Input(format!(
                "non-finite backdrive state (omega={omega}, alpha={alpha_dd})"
            )));
        }
        Ok(self.reflected_inertia * alpha_dd + self.f_coulomb * deadband_sign(omega))
    }
}
