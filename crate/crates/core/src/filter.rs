//! Causal IIR filters built from second-order sections.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Normalized biquad: `y[n] = b0 x[n] + b1 x[n-1] + b2 x[n-2] - a1 y[n-1] - a2 y[n-2]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b0: f64,
    pub b1: f64,
    pub b2: f64,
    pub a1: f64,
    pub a2: f64,
}

impl Biquad {
    /// Single forward pass from a zero initial state.
    pub fn apply(&self, input: &[f64]) -> Vec<f64> {
        let (mut x1, mut x2, mut y1, mut y2) = (0.0, 0.0, 0.0, 0.0);
        input
            .iter()
            .map(|&x| {
                let y = self.b0 * x + self.b1 * x1 + self.b2 * x2 - self.a1 * y1 - self.a2 * y2;
                x2 = x1;
                x1 = x;
                y2 = y1;
                y1 = y;
                y
            })
            .collect()
    }

    /// Frequency response at `freq` Hz.
    pub fn response(&self, freq: f64, sample_rate: f64) -> Complex64 {
        let z1 = Complex64::from_polar(1.0, -2.0 * PI * freq / sample_rate);
        let z2 = z1 * z1;
        (self.b0 + z1 * self.b1 + z2 * self.b2) / (1.0 + z1 * self.a1 + z2 * self.a2)
    }
}

/// Cascade of second-order sections.
#[derive(Debug, Clone, PartialEq)]
pub struct SosFilter {
    pub sections: Vec<Biquad>,
}

impl SosFilter {
    pub fn apply(&self, input: &[f64]) -> Vec<f64> {
        self.sections
            .iter()
            .fold(input.to_vec(), |signal, section| section.apply(&signal))
    }

    pub fn response(&self, freq: f64, sample_rate: f64) -> Complex64 {
        self.sections
            .iter()
            .map(|s| s.response(freq, sample_rate))
            .product()
    }
}

fn check_rate(sample_rate: f64) -> Result<()> {
    if !(sample_rate.is_finite() && sample_rate > 0.0) {
        return Err(Error::Config(format!("sample rate {sample_rate} Hz must be positive")));
    }
    Ok(())
}

/// Second-order low-pass `wn^2 / (s^2 + 2 zeta wn s + wn^2)` discretized
/// with the bilinear transform, prewarped so the corner lands at `fc`.
/// The numerator and denominator sum to the same value, so DC gain is 1.
pub fn lowpass2_design(sample_rate: f64, fc: f64, zeta: f64) -> Result<Biquad> {
    check_rate(sample_rate)?;
    if !(fc > 0.0 && fc < sample_rate / 2.0) {
        return Err(Error::Config(format!(
            "cutoff {fc} Hz must lie in (0, {}) Hz for a {sample_rate} Hz signal",
            sample_rate / 2.0
        )));
    }
    if !(zeta > 0.0 && zeta.is_finite()) {
        return Err(Error::Config(format!("damping ratio {zeta} must be > 0")));
    }
    let wn = 2.0 * PI * fc;
    // s = c (1 - z^-1) / (1 + z^-1)
    let c = wn / (wn / (2.0 * sample_rate)).tan();
    let wn2 = wn * wn;
    let a0 = c * c + 2.0 * zeta * wn * c + wn2;
    Ok(Biquad {
        b0: wn2 / a0,
        b1: 2.0 * wn2 / a0,
        b2: wn2 / a0,
        a1: 2.0 * (wn2 - c * c) / a0,
        a2: (c * c - 2.0 * zeta * wn * c + wn2) / a0,
    })
}

/// Filter `signal` with [`lowpass2_design`].
pub fn lowpass2(signal: &[f64], sample_rate: f64, fc: f64, zeta: f64) -> Result<Vec<f64>> {
    Ok(lowpass2_design(sample_rate, fc, zeta)?.apply(signal))
}

/// Butterworth band-pass from the second-order low-pass prototype, giving
/// a fourth-order filter as two biquads. Band edges are prewarped and the
/// response is unity at the geometric center frequency.
pub fn butterworth_bandpass(sample_rate: f64, f_low: f64, f_high: f64) -> Result<SosFilter> {
    check_rate(sample_rate)?;
    let nyquist = sample_rate / 2.0;
    if !(f_low > 0.0 && f_low < f_high && f_high < nyquist) {
        return Err(Error::Config(format!(
            "band {f_low}-{f_high} Hz must satisfy 0 < low < high < {nyquist} Hz"
        )));
    }
    let fs2 = 2.0 * sample_rate;
    let w_low = fs2 * (PI * f_low / sample_rate).tan();
    let w_high = fs2 * (PI * f_high / sample_rate).tan();
    let w0_sq = w_low * w_high;
    let bw = w_high - w_low;

    // Upper-half-plane prototype pole; its conjugate yields the conjugate
    // band-pass poles.
    let proto = Complex64::from_polar(1.0, 3.0 * PI / 4.0);
    let half_sum = proto * bw / 2.0;
    let root = (half_sum * half_sum - w0_sq).sqrt();
    let analog = [half_sum + root, half_sum - root];

    let digital_center = 2.0 * (w0_sq.sqrt() / fs2).atan() / (2.0 * PI) * sample_rate;
    let sections = analog
        .iter()
        .map(|&s| {
            let z = (fs2 + s) / (fs2 - s);
            let mut section = Biquad {
                b0: 1.0,
                b1: 0.0,
                b2: -1.0,
                a1: -2.0 * z.re,
                a2: z.norm_sqr(),
            };
            let gain = section.response(digital_center, sample_rate).norm();
            section.b0 /= gain;
            section.b2 /= gain;
            section
        })
        .collect();
    Ok(SosFilter { sections })
}
