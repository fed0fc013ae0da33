//! Filtered least-squares identification of the actuator torque model and
//! of the reflected inertia.
//!
//! Both the regressor columns and the measured torque pass through the same
//! causal second-order low-pass before regression, so the fit targets
//! steady-state behaviour. Because the filter is linear, noise-free data
//! generated by the model is reproduced exactly by the filtered regressors.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::actuator::{deadband_sign, ActuatorParams, VELOCITY_DEADBAND};
use crate::error::{Error, Result};
use crate::filter::lowpass2_design;
use crate::stats;
use crate::trial::TrialLog;

pub use crate::filter::lowpass2;

/// Names of the torque-model regressor columns, in order.
pub const REGRESSOR_COLUMNS: [&str; 5] = [
    "bias",
    "torque_constant",
    "torque_constant_slope",
    "coulomb_friction",
    "gear_friction",
];

/// Columns whose normalized QR pivot falls below this are rank-deficient.
const RANK_TOLERANCE: f64 = 1e-9;

/// Filtered acceleration excitation below this RMS cannot identify inertia.
pub const MIN_ACCEL_RMS: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SysidOptions {
    /// Known transmission ratio.
    pub gear_ratio: f64,
    /// Carried into the fitted params for the nominal model.
    pub k_t_nominal: f64,
    pub cutoff_hz: f64,
    pub zeta: f64,
    /// Leading data excluded from regression, in units of `1 / cutoff_hz`.
    pub transient_periods: f64,
}

impl Default for SysidOptions {
    fn default() -> Self {
        Self {
            gear_ratio: 9.0,
            k_t_nominal: 0.14,
            cutoff_hz: 2.0,
            zeta: 0.7,
            transient_periods: 3.0,
        }
    }
}

impl SysidOptions {
    fn transient_samples(&self, sample_rate: f64) -> usize {
        (self.transient_periods / self.cutoff_hz * sample_rate).ceil() as usize
    }
}

/// One unfiltered regressor row: `[1, g_r I, -g_r |I| I, -sign(w), -|I| sign(w)]`.
pub fn regressor_row(gear_ratio: f64, i_q: f64, omega: f64) -> [f64; 5] {
    let s = deadband_sign(omega);
    [
        1.0,
        gear_ratio * i_q,
        -gear_ratio * i_q.abs() * i_q,
        -s,
        -i_q.abs() * s,
    ]
}

/// Filtered regression problem built from a trial.
#[derive(Debug, Clone)]
pub struct Regression {
    /// Filtered regressor, one row per sample.
    pub rows: Vec<[f64; 5]>,
    /// Filtered measured torque.
    pub target: Vec<f64>,
    /// Number of leading samples excluded as filter transient.
    pub skip: usize,
    pub sample_rate: f64,
    pub warnings: Vec<String>,
}

impl Regression {
    pub fn used_rows(&self) -> usize {
        self.rows.len().saturating_sub(self.skip)
    }
}

fn filter_columns<const N: usize>(columns: [Vec<f64>; N], design: &crate::filter::Biquad) -> [Vec<f64>; N] {
    columns.map(|c| design.apply(&c))
}

fn transpose<const N: usize>(columns: &[Vec<f64>; N]) -> Vec<[f64; N]> {
    let n = columns[0].len();
    (0..n).map(|k| std::array::from_fn(|c| columns[c][k])).collect()
}

pub fn build_regressor(log: &TrialLog, opts: &SysidOptions) -> Result<Regression> {
    let design = lowpass2_design(log.sample_rate, opts.cutoff_hz, opts.zeta)?;
    let mut raw: [Vec<f64>; 5] = Default::default();
    for (&i, &w) in log.i_q.iter().zip(&log.omega) {
        for (col, v) in raw.iter_mut().zip(regressor_row(opts.gear_ratio, i, w)) {
            col.push(v);
        }
    }
    let mut warnings = Vec::new();
    if log.i_q.iter().all(|&i| i == 0.0) {
        warnings.push(format!(
            "rank deficiency: current is identically zero, columns `{}`, `{}` and `{}` vanish",
            REGRESSOR_COLUMNS[1], REGRESSOR_COLUMNS[2], REGRESSOR_COLUMNS[4]
        ));
    }
    if log.omega.iter().all(|&w| w.abs() < VELOCITY_DEADBAND) {
        warnings.push(format!(
            "rank deficiency: velocity never leaves the {VELOCITY_DEADBAND} rad/s deadband, columns `{}` and `{}` vanish",
            REGRESSOR_COLUMNS[3], REGRESSOR_COLUMNS[4]
        ));
    }
    for w in &warnings {
        log::warn!("{w}");
    }
    let filtered = filter_columns(raw, &design);
    Ok(Regression {
        rows: transpose(&filtered),
        target: design.apply(&log.tau_meas),
        skip: opts.transient_samples(log.sample_rate),
        sample_rate: log.sample_rate,
        warnings,
    })
}

/// Ordinary least squares through a Householder QR of the column-scaled
/// design matrix. A column whose pivot vanishes relative to its norm is
/// reported by name.
pub(crate) fn solve_least_squares(x: &DMatrix<f64>, y: &DVector<f64>, names: &[&str]) -> Result<DVector<f64>> {
    let n = x.ncols();
    if x.nrows() < n {
        return Err(Error::PoorConditioning(format!(
            "{} usable samples for {n} unknowns",
            x.nrows()
        )));
    }
    let mut scaled = x.clone();
    let mut scales = vec![0.0; n];
    for (j, mut col) in scaled.column_iter_mut().enumerate() {
        let norm = col.norm();
        if norm == 0.0 {
            return Err(Error::RankDeficient { column: names[j].to_string() });
        }
        col /= norm;
        scales[j] = norm;
    }
    let qr = scaled.qr();
    let r = qr.r();
    if let Some(j) = (0..n).find(|&j| r[(j, j)].abs() < RANK_TOLERANCE) {
        return Err(Error::RankDeficient { column: names[j].to_string() });
    }
    let mut rhs = y.clone();
    qr.q_tr_mul(&mut rhs);
    let top = rhs.rows(0, n).into_owned();
    let coef = r
        .solve_upper_triangular(&top)
        .ok_or_else(|| Error::PoorConditioning("singular triangular factor".into()))?;
    Ok(DVector::from_iterator(n, (0..n).map(|j| coef[j] / scales[j])))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitReport {
    pub params: ActuatorParams,
    /// RMS of the filtered residual over the regression window, Nm.
    pub residual_rmse: f64,
    /// 95th percentile of the absolute filtered residual, Nm.
    pub residual_p95: f64,
    pub n_samples: usize,
    pub sample_rate: f64,
    pub excluded_transient_s: f64,
    pub zero_velocity_policy: String,
    pub warnings: Vec<String>,
}

pub const ZERO_VELOCITY_POLICY: &str =
    "zero-velocity samples included; friction sign is 0 for |omega| < 0.01 rad/s";

pub fn fit_torque_model(log: &TrialLog, opts: &SysidOptions) -> Result<FitReport> {
    fit_torque_model_multi(std::slice::from_ref(log), opts)
}

/// Fits one model to several trials. Each trial is filtered separately and
/// loses its own transient window; the remaining rows are stacked.
pub fn fit_torque_model_multi(logs: &[TrialLog], opts: &SysidOptions) -> Result<FitReport> {
    let first = logs
        .first()
        .ok_or_else(|| Error::Input("no trial logs supplied".into()))?;
    if let Some(other) = logs
        .iter()
        .find(|l| (l.sample_rate - first.sample_rate).abs() > 1e-6 * first.sample_rate)
    {
        return Err(Error::Input(format!(
            "trials mix sample rates {} Hz and {} Hz",
            first.sample_rate, other.sample_rate
        )));
    }
    let mut rows = Vec::new();
    let mut target = Vec::new();
    let mut warnings = Vec::new();
    for log in logs {
        let reg = build_regressor(log, opts)?;
        rows.extend_from_slice(&reg.rows[reg.skip.min(reg.rows.len())..]);
        target.extend_from_slice(&reg.target[reg.skip.min(reg.target.len())..]);
        warnings.extend(reg.warnings);
    }
    let m = rows.len();
    let x = DMatrix::from_fn(m, 5, |i, j| rows[i][j]);
    let y = DVector::from_vec(target);
    let coef = solve_least_squares(&x, &y, &REGRESSOR_COLUMNS)?;

    let residual: Vec<f64> = (y - &x * &coef).iter().copied().collect();
    let abs: Vec<f64> = residual.iter().map(|e| e.abs()).collect();
    let k_tau = coef[1];
    let params = ActuatorParams {
        gear_ratio: opts.gear_ratio,
        k_tau,
        k_n: coef[2],
        f_coulomb: coef[3],
        f_gear: coef[4] / (opts.gear_ratio * k_tau),
        bias: coef[0],
        reflected_inertia: 0.0,
        k_t_nominal: opts.k_t_nominal,
    };
    if let Err(e) = params.validate() {
        let msg = format!("fitted parameters are outside the physical range: {e}");
        log::warn!("{msg}");
        warnings.push(msg);
    }
    Ok(FitReport {
        params,
        residual_rmse: stats::rms(&residual),
        residual_p95: stats::percentile(&abs, 95.0),
        n_samples: m,
        sample_rate: first.sample_rate,
        excluded_transient_s: opts.transient_periods / opts.cutoff_hz,
        zero_velocity_policy: ZERO_VELOCITY_POLICY.to_string(),
        warnings,
    })
}

/// Central-difference derivative with one-sided differences at the ends.
pub fn differentiate(x: &[f64], sample_rate: f64) -> Vec<f64> {
    let n = x.len();
    if n < 2 {
        return vec![0.0; n];
    }
    (0..n)
        .map(|k| match k {
            0 => (x[1] - x[0]) * sample_rate,
            k if k == n - 1 => (x[n - 1] - x[n - 2]) * sample_rate,
            k => (x[k + 1] - x[k - 1]) * sample_rate / 2.0,
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InertiaFit {
    /// Reflected inertia, kg·m².
    pub inertia: f64,
    /// Residual bias, Nm.
    pub bias: f64,
    pub rmse_before: f64,
    pub rmse_after: f64,
    pub n_samples: usize,
}

/// Regresses the torque model's residual on a backdrive trial against the
/// filtered output acceleration and a constant.
///
/// The sensor reads the actuator's reaction on the load, so an inertia `J`
/// shows up as `-J * accel` in the residual; the acceleration column is
/// negated so that the returned coefficient is `J` itself.
pub fn fit_inertia(log: &TrialLog, base: &ActuatorParams, opts: &SysidOptions) -> Result<InertiaFit> {
    let design = lowpass2_design(log.sample_rate, opts.cutoff_hz, opts.zeta)?;
    let predicted = log
        .i_q
        .iter()
        .zip(&log.omega)
        .map(|(&i, &w)| base.predict_torque(i, w))
        .collect::<Result<Vec<_>>>()?;
    let measured = design.apply(&log.tau_meas);
    let predicted = design.apply(&predicted);
    let accel = design.apply(&differentiate(&log.omega, log.sample_rate));

    let skip = opts.transient_samples(log.sample_rate).min(log.len());
    let residual: Vec<f64> = measured[skip..]
        .iter()
        .zip(&predicted[skip..])
        .map(|(m, p)| m - p)
        .collect();
    let accel = &accel[skip..];
    let accel_rms = stats::rms(accel);
    if !(accel_rms >= MIN_ACCEL_RMS) {
        return Err(Error::PoorConditioning(format!(
            "acceleration excitation {accel_rms:.3} rad/s^2 RMS is below {MIN_ACCEL_RMS} rad/s^2"
        )));
    }
    let m = residual.len();
    let x = DMatrix::from_fn(m, 2, |i, j| if j == 0 { -accel[i] } else { 1.0 });
    let y = DVector::from_vec(residual.clone());
    let coef = solve_least_squares(&x, &y, &["reflected_inertia", "bias"])?;
    let after: Vec<f64> = (y - &x * &coef).iter().copied().collect();
    Ok(InertiaFit {
        inertia: coef[0],
        bias: coef[1],
        rmse_before: stats::rms(&residual),
        rmse_after: stats::rms(&after),
        n_samples: m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_distr::{Distribution, Normal};

    /// Piecewise-constant current/velocity staircase run through the
    /// forward model.
    fn synthetic(params: &ActuatorParams, noise: f64, seed: u64) -> TrialLog {
        let fs = 100.0;
        let currents = [-25.0, -12.0, -4.0, -1.0, 0.0, 2.0, 7.0, 15.0, 24.0];
        let speeds = [-3.0, -0.5, 0.0, 0.2, 1.5, 4.0];
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, 1.0).unwrap();
        let (mut i_q, mut theta, mut omega, mut tau) = (vec![], vec![], vec![], vec![]);
        let mut pos = 0.0;
        for &i in &currents {
            for &w in &speeds {
                for _ in 0..300 {
                    i_q.push(i);
                    omega.push(w);
                    theta.push(pos);
                    pos += w / fs;
                    let e = if noise > 0.0 { noise * normal.sample(&mut rng) } else { 0.0 };
                    tau.push(params.predict_torque(i, w).unwrap() + e);
                }
            }
        }
        TrialLog::from_rate(fs, i_q, theta, omega, tau).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn rest_row() {
        assert_eq!(regressor_row(9.0, 0.0, 0.0), [1.0, 0.0, 0.0, 0.0, 0.0]);
        let b = 0.3;
        let p = ActuatorParams { bias: b, ..ActuatorParams::paper_fit() };
        let row = regressor_row(9.0, 0.0, 0.0);
        let theta = [b, p.k_tau, p.k_n, p.f_coulomb, p.f_gear * 9.0 * p.k_tau];
        let pred: f64 = row.iter().zip(theta).map(|(r, c)| r * c).sum();
        assert_eq!(pred, b);
    }

    #[test]
    fn rows_reproduce_forward_model() {
        let p = ActuatorParams { bias: 0.2, ..ActuatorParams::paper_fit() };
        let theta = [p.bias, p.k_tau, p.k_n, p.f_coulomb, p.f_gear * p.gear_ratio * p.k_tau];
        for (i, w) in [(12.0, 0.4), (-7.5, -2.0), (3.0, 0.0), (-20.0, 1.0)] {
            let row = regressor_row(p.gear_ratio, i, w);
            let pred: f64 = row.iter().zip(theta).map(|(r, c)| r * c).sum();
            assert!((pred - p.predict_torque(i, w).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn noise_free_recovery() {
        let truth = ActuatorParams { bias: 0.05, ..ActuatorParams::paper_fit() };
        let fit = fit_torque_model(&synthetic(&truth, 0.0, 0), &SysidOptions::default()).unwrap();
        let p = fit.params;
        assert!((p.bias - truth.bias).abs() < 1e-6 * truth.bias.abs());
        for (got, want) in [
            (p.k_tau, truth.k_tau),
            (p.k_n, truth.k_n),
            (p.f_coulomb, truth.f_coulomb),
            (p.f_gear, truth.f_gear),
        ] {
            assert!(rel(got, want) < 1e-6, "{got} vs {want}");
        }
        assert!(fit.residual_rmse < 1e-9);
        assert!(fit.warnings.is_empty());
    }

    #[test]
    fn noisy_recovery_within_two_percent() {
        let truth = ActuatorParams::paper_fit();
        let fit = fit_torque_model(&synthetic(&truth, 0.1, 42), &SysidOptions::default()).unwrap();
        assert!(rel(fit.params.k_tau, truth.k_tau) < 0.02, "{:?}", fit.params);
        assert!(rel(fit.params.f_coulomb, truth.f_coulomb) < 0.02, "{:?}", fit.params);
        assert!(fit.residual_p95 <= 0.39);
    }

    #[test]
    fn bias_shift_moves_only_bias() {
        let truth = ActuatorParams::paper_fit();
        let log = synthetic(&truth, 0.1, 7);
        let mut shifted = log.clone();
        shifted.tau_meas.iter_mut().for_each(|v| *v += 0.75);
        let opts = SysidOptions::default();
        let a = fit_torque_model(&log, &opts).unwrap().params;
        let b = fit_torque_model(&shifted, &opts).unwrap().params;
        assert!((b.bias - a.bias - 0.75).abs() < 1e-9);
        for (x, y) in [(a.k_tau, b.k_tau), (a.k_n, b.k_n), (a.f_coulomb, b.f_coulomb), (a.f_gear, b.f_gear)] {
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_current_is_rank_deficient() {
        let n = 1000;
        let omega: Vec<f64> = (0..n).map(|k| if (k / 100) % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let log = TrialLog::from_rate(100.0, vec![0.0; n], vec![0.0; n], omega, vec![0.1; n]).unwrap();
        let reg = build_regressor(&log, &SysidOptions::default()).unwrap();
        assert_eq!(reg.warnings.len(), 1);
        match fit_torque_model(&log, &SysidOptions::default()) {
            Err(Error::RankDeficient { column }) => assert_eq!(column, "torque_constant"),
            other => panic!("expected rank deficiency, got {other:?}"),
        }
    }

    #[test]
    fn stationary_log_flags_friction_columns() {
        let n = 500;
        let i: Vec<f64> = (0..n).map(|k| (k / 50) as f64).collect();
        let log = TrialLog::from_rate(100.0, i, vec![0.0; n], vec![0.0; n], vec![0.0; n]).unwrap();
        let reg = build_regressor(&log, &SysidOptions::default()).unwrap();
        assert!(reg.warnings.iter().any(|w| w.contains("coulomb_friction")));
        match fit_torque_model(&log, &SysidOptions::default()) {
            Err(Error::RankDeficient { column }) => assert_eq!(column, "coulomb_friction"),
            other => panic!("expected rank deficiency, got {other:?}"),
        }
    }

    #[test]
    fn filter_is_linear() {
        let fs = 200.0;
        let x: Vec<f64> = (0..800).map(|k| ((k * 37 % 101) as f64).sin()).collect();
        let y: Vec<f64> = (0..800).map(|k| (k as f64 * 0.01).cos() * 3.0).collect();
        let a = -2.5;
        let combo: Vec<f64> = x.iter().zip(&y).map(|(x, y)| a * x + y).collect();
        let lhs = lowpass2(&combo, fs, 2.0, 0.7).unwrap();
        let fx = lowpass2(&x, fs, 2.0, 0.7).unwrap();
        let fy = lowpass2(&y, fs, 2.0, 0.7).unwrap();
        for k in 0..lhs.len() {
            assert!((lhs[k] - (a * fx[k] + fy[k])).abs() < 1e-9);
        }
    }

    #[test]
    fn inertia_needs_excitation() {
        let n = 1000;
        let log = TrialLog::from_rate(500.0, vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]).unwrap();
        assert!(matches!(
            fit_inertia(&log, &ActuatorParams::paper_fit(), &SysidOptions::default()),
            Err(Error::PoorConditioning(_))
        ));
    }

    #[test]
    fn inertia_from_hand_built_sine() {
        let truth = ActuatorParams::paper_fit();
        let fs = 1000.0;
        let amp = 35f64.to_radians();
        let w = 2.0 * std::f64::consts::PI * 1.5;
        let n = 10_000;
        let (mut theta, mut omega, mut tau) = (vec![], vec![], vec![]);
        for k in 0..n {
            let t = k as f64 / fs;
            theta.push(amp * (w * t).sin());
            omega.push(amp * w * (w * t).cos());
            let acc = -amp * w * w * (w * t).sin();
            tau.push(truth.bias - truth.backdrive_torque(omega[k], acc).unwrap());
        }
        let log = TrialLog::from_rate(fs, vec![0.0; n], theta, omega, tau).unwrap();
        let fit = fit_inertia(&log, &truth, &SysidOptions::default()).unwrap();
        assert!(rel(fit.inertia, truth.reflected_inertia) < 1e-4, "{fit:?}");
        assert!(fit.rmse_after <= fit.rmse_before);
    }

    #[test]
    fn differentiate_polynomial() {
        let fs = 10.0;
        let x: Vec<f64> = (0..20).map(|k| (k as f64 / fs).powi(2)).collect();
        let d = differentiate(&x, fs);
        for k in 1..19 {
            assert!((d[k] - 2.0 * k as f64 / fs).abs() < 1e-12);
        }
    }
}
