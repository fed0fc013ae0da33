//! Surface EMG effort analysis: envelope extraction, MVC normalization,
//! repetition cropping from the thigh angle, and per-rep effort and peak.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filter::butterworth_bandpass;
use crate::stats;

pub mod table;

pub use table::{format_mean_sd, MetricsRow, TableReport};

/// Lowest accepted EMG sample rate, Hz.
pub const MIN_SAMPLE_RATE: f64 = 400.0;
pub const BAND_LOW_HZ: f64 = 20.0;
pub const BAND_HIGH_HZ: f64 = 200.0;
/// RMS window length, s.
pub const RMS_WINDOW: f64 = 0.1;
/// Smallest thigh-angle excursion accepted as a squat, deg.
pub const MIN_REP_EXCURSION_DEG: f64 = 10.0;
/// Points per resampled cycle.
pub const CYCLE_POINTS: usize = 101;

/// Thigh angle track, rad, at its own timestamps.
#[derive(Debug, Clone, PartialEq)]
pub struct ThighAngle {
    pub t: Vec<f64>,
    pub theta: Vec<f64>,
}

impl ThighAngle {
    pub fn new(t: Vec<f64>, theta: Vec<f64>) -> Result<Self> {
        if t.len() != theta.len() {
            return Err(Error::Schema(format!(
                "thigh angle has {} samples, `t` has {}",
                theta.len(),
                t.len()
            )));
        }
        if t.len() < 2 {
            return Err(Error::Schema("thigh angle needs at least 2 samples".into()));
        }
        if t.iter().chain(&theta).any(|v| !v.is_finite()) {
            return Err(Error::Schema("thigh angle contains non-finite values".into()));
        }
        if t.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Schema("thigh angle `t` must be strictly increasing".into()));
        }
        Ok(Self { t, theta })
    }

    /// Reads `t,theta_t_deg`.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let (names, cols) = read_columns(reader)?;
        if names != ["t", "theta_t_deg"] {
            return Err(Error::Schema(format!(
                "expected header `t,theta_t_deg`, found `{}`",
                names.join(",")
            )));
        }
        let mut cols = cols.into_iter();
        let t = cols.next().unwrap_or_default();
        let deg = cols.next().unwrap_or_default();
        Self::new(t, deg.into_iter().map(f64::to_radians).collect())
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,theta_t_deg")?;
        for (t, th) in self.t.iter().zip(&self.theta) {
            writeln!(w, "{t},{}", th.to_degrees())?;
        }
        Ok(())
    }
}

/// Multi-channel raw EMG, volts.
#[derive(Debug, Clone, PartialEq)]
pub struct EmgRecording {
    pub sample_rate: f64,
    /// Time of the first sample, s.
    pub t0: f64,
    pub channels: Vec<(String, Vec<f64>)>,
    pub thigh_angle: Option<ThighAngle>,
}

impl EmgRecording {
    pub fn new(sample_rate: f64, t0: f64, channels: Vec<(String, Vec<f64>)>) -> Result<Self> {
        check_rate(sample_rate)?;
        let Some((_, first)) = channels.first() else {
            return Err(Error::Schema("recording has no channels".into()));
        };
        let n = first.len();
        for (name, data) in &channels {
            if data.len() != n {
                return Err(Error::Schema(format!(
                    "channel `{name}` has {} samples, expected {n}",
                    data.len()
                )));
            }
            if let Some(k) = data.iter().position(|v| !v.is_finite()) {
                return Err(Error::Schema(format!("channel `{name}` row {k} is not finite")));
            }
        }
        if n < 2 {
            return Err(Error::Schema("recording needs at least 2 samples".into()));
        }
        Ok(Self {
            sample_rate,
            t0,
            channels,
            thigh_angle: None,
        })
    }

    pub fn with_thigh_angle(mut self, thigh: ThighAngle) -> Self {
        self.thigh_angle = Some(thigh);
        self
    }

    pub fn len(&self) -> usize {
        self.channels.first().map_or(0, |c| c.1.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn channel(&self, name: &str) -> Option<&[f64]> {
        self.channels.iter().find(|c| c.0 == name).map(|c| c.1.as_slice())
    }

    /// Reads `t,<channel>,...` with a uniform time column.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let (names, mut cols) = read_columns(reader)?;
        if names.first().map(String::as_str) != Some("t") || names.len() < 2 {
            return Err(Error::Schema(format!(
                "expected header `t,<channel>,...`, found `{}`",
                names.join(",")
            )));
        }
        let t = cols.remove(0);
        if t.len() < 2 {
            return Err(Error::Schema("recording needs at least 2 samples".into()));
        }
        let dt = t[1] - t[0];
        if !(dt > 0.0) || t.windows(2).any(|w| ((w[1] - w[0]) - dt).abs() > 1e-6) {
            return Err(Error::Schema("column `t` is not uniformly sampled".into()));
        }
        let rate = (t.len() - 1) as f64 / (t[t.len() - 1] - t[0]);
        Self::new(rate, t[0], names.into_iter().skip(1).zip(cols).collect())
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let names: Vec<&str> = self.channels.iter().map(|c| c.0.as_str()).collect();
        writeln!(w, "t,{}", names.join(","))?;
        for k in 0..self.len() {
            write!(w, "{}", self.t0 + k as f64 / self.sample_rate)?;
            for (_, data) in &self.channels {
                write!(w, ",{}", data[k])?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

fn check_rate(sample_rate: f64) -> Result<()> {
    if !(sample_rate > MIN_SAMPLE_RATE && sample_rate.is_finite()) {
        return Err(Error::Config(format!(
            "EMG sample rate {sample_rate} Hz must exceed {MIN_SAMPLE_RATE} Hz"
        )));
    }
    Ok(())
}

fn read_columns<R: Read>(reader: R) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let names: Vec<String> = rdr.headers()?.iter().map(|s| s.trim().to_string()).collect();
    if names.iter().all(String::is_empty) {
        return Err(Error::Schema("file has no header".into()));
    }
    let mut cols = vec![Vec::new(); names.len()];
    for (row, record) in rdr.records().enumerate() {
        let record = record?;
        for (c, col) in cols.iter_mut().enumerate() {
            let field = record.get(c).unwrap_or("");
            let v: f64 = field.trim().parse().map_err(|_| {
                Error::Schema(format!(
                    "row {} column `{}`: `{field}` is not a number",
                    row + 1,
                    names[c]
                ))
            })?;
            col.push(v);
        }
    }
    Ok((names, cols))
}

/// Odd RMS window width in samples.
pub fn rms_window_len(sample_rate: f64) -> usize {
    let w = (RMS_WINDOW * sample_rate).round() as usize;
    w.max(1) | 1
}

/// Centred moving RMS; windows are truncated at the edges.
pub fn moving_rms(x: &[f64], width: usize) -> Vec<f64> {
    let half = width / 2;
    let sq: Vec<f64> = x.iter().map(|v| v * v).collect();
    (0..x.len())
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half).min(x.len() - 1);
            (sq[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64).sqrt()
        })
        .collect()
}

/// Demean, band-pass 20-200 Hz, centred 100 ms RMS.
pub fn envelope(raw: &[f64], sample_rate: f64) -> Result<Vec<f64>> {
    check_rate(sample_rate)?;
    if raw.is_empty() {
        return Err(Error::Input("empty EMG channel".into()));
    }
    let m = stats::mean(raw);
    let centred: Vec<f64> = raw.iter().map(|v| v - m).collect();
    let band = butterworth_bandpass(sample_rate, BAND_LOW_HZ, BAND_HIGH_HZ)?;
    Ok(moving_rms(&band.apply(&centred), rms_window_len(sample_rate)))
}

/// Reference taken from the processed MVC envelope.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case", tag = "mode", content = "q")]
pub enum MvcReference {
    #[default]
    Max,
    /// Percentile in `(0, 100]`.
    Percentile(f64),
}

impl MvcReference {
    pub fn value(self, mvc_envelope: &[f64]) -> Result<f64> {
        let v = match self {
            MvcReference::Max => mvc_envelope.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            MvcReference::Percentile(q) => {
                if !(q > 0.0 && q <= 100.0) {
                    return Err(Error::Config(format!("MVC percentile {q} must be in (0, 100]")));
                }
                stats::percentile(mvc_envelope, q)
            }
        };
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::Input(format!("MVC reference {v} must be > 0")));
        }
        Ok(v)
    }
}

/// `100 envelope / max(mvc_envelope)`.
pub fn normalize_mvc(envelope: &[f64], mvc_envelope: &[f64]) -> Result<Vec<f64>> {
    normalize_mvc_with(envelope, mvc_envelope, MvcReference::Max)
}

pub fn normalize_mvc_with(envelope: &[f64], mvc_envelope: &[f64], reference: MvcReference) -> Result<Vec<f64>> {
    let r = reference.value(mvc_envelope)?;
    Ok(envelope.iter().map(|v| 100.0 * v / r).collect())
}

/// One repetition on the thigh-angle clock.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RepBounds {
    /// Inclusive indices into the thigh-angle track.
    pub start: usize,
    pub end: usize,
    pub t_start: f64,
    pub t_end: f64,
}

impl RepBounds {
    /// Inclusive sample range of a series starting at `t0`.
    pub fn to_indices(&self, t0: f64, sample_rate: f64, len: usize) -> (usize, usize) {
        let idx = |t: f64| (((t - t0) * sample_rate).round().max(0.0) as usize).min(len.saturating_sub(1));
        (idx(self.t_start), idx(self.t_end))
    }
}

/// Splits the thigh-angle track at standing minima.
///
/// The trace is lightly smoothed and tracked with hysteresis thresholds at
/// 25% and 75% of its range. Each standing stretch between two deep
/// excursions yields one boundary, placed at the centre of the samples
/// within 2% of range of that stretch's minimum.
pub fn crop_reps(thigh: &ThighAngle, expected_reps: Option<usize>) -> Result<Vec<RepBounds>> {
    let x = smooth5(&thigh.theta);
    let lo = x.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let range = hi - lo;
    if range < MIN_REP_EXCURSION_DEG.to_radians() {
        return Err(Error::Detection(format!(
            "thigh angle spans {:.2} deg, below the {MIN_REP_EXCURSION_DEG} deg needed for a squat",
            range.to_degrees()
        )));
    }
    let (low, high) = (lo + 0.25 * range, lo + 0.75 * range);

    // standing stretches as [from, to) index spans
    let mut standing = Vec::new();
    let mut deep = x[0] > high;
    let mut from = if deep { None } else { Some(0) };
    for (k, &v) in x.iter().enumerate() {
        if deep && v < low {
            deep = false;
            from = Some(k);
        } else if !deep && v > high {
            deep = true;
            if let Some(f) = from.take() {
                standing.push((f, k));
            }
        }
    }
    if let Some(f) = from {
        standing.push((f, x.len()));
    }
    let boundaries: Vec<usize> = standing
        .iter()
        .map(|&(a, b)| {
            let m = x[a..b].iter().copied().fold(f64::INFINITY, f64::min);
            let tol = 0.02 * range;
            let first = a + x[a..b].iter().position(|&v| v <= m + tol).unwrap_or(0);
            let last = a + x[a..b].iter().rposition(|&v| v <= m + tol).unwrap_or(0);
            (first + last) / 2
        })
        .collect();
    let reps: Vec<RepBounds> = boundaries
        .windows(2)
        .map(|w| RepBounds {
            start: w[0],
            end: w[1],
            t_start: thigh.t[w[0]],
            t_end: thigh.t[w[1]],
        })
        .collect();
    if reps.is_empty() {
        return Err(Error::Detection(format!(
            "no complete repetition: {} standing stretch(es), thresholds {:.1}/{:.1} deg, range {:.1} deg",
            standing.len(),
            low.to_degrees(),
            high.to_degrees(),
            range.to_degrees()
        )));
    }
    if let Some(n) = expected_reps {
        if n != reps.len() {
            log::warn!("expected {n} repetitions, detected {}", reps.len());
        }
    }
    Ok(reps)
}

fn smooth5(x: &[f64]) -> Vec<f64> {
    (0..x.len())
        .map(|i| {
            let lo = i.saturating_sub(2);
            let hi = (i + 2).min(x.len() - 1);
            x[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64
        })
        .collect()
}

/// Trapezoidal integral of `x[start..=end]`.
pub fn trapezoid(x: &[f64], start: usize, end: usize, sample_rate: f64) -> f64 {
    if end <= start {
        return 0.0;
    }
    let inner: f64 = x[start + 1..end].iter().sum();
    (0.5 * (x[start] + x[end]) + inner) / sample_rate
}

/// Effort and peak of one repetition on one channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RepMetrics {
    pub rep: usize,
    pub start: usize,
    pub end: usize,
    /// %MVC s.
    pub effort: f64,
    /// %MVC.
    pub peak: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChannelSummary {
    pub reps: Vec<RepMetrics>,
    pub effort_mean: f64,
    pub effort_sd: f64,
    pub peak_mean: f64,
    pub peak_sd: f64,
}

impl ChannelSummary {
    pub fn effort_cell(&self) -> String {
        format_mean_sd(self.effort_mean, self.effort_sd)
    }

    pub fn peak_cell(&self) -> String {
        format_mean_sd(self.peak_mean, self.peak_sd)
    }
}

/// Per-rep effort and peak over inclusive index bounds, plus mean and
/// sample SD across reps. Empty reps are skipped.
pub fn summarize(emg_pct: &[f64], reps: &[(usize, usize)], sample_rate: f64) -> Result<ChannelSummary> {
    if !(sample_rate > 0.0) {
        return Err(Error::Config(format!("sample rate {sample_rate} must be > 0")));
    }
    let mut out = Vec::with_capacity(reps.len());
    for (k, &(start, end)) in reps.iter().enumerate() {
        if end >= emg_pct.len() {
            return Err(Error::Input(format!(
                "rep {} ends at sample {end}, series has {}",
                k + 1,
                emg_pct.len()
            )));
        }
        if end <= start {
            log::warn!("rep {} is empty, skipped", k + 1);
            continue;
        }
        let seg = &emg_pct[start..=end];
        out.push(RepMetrics {
            rep: k + 1,
            start,
            end,
            effort: trapezoid(emg_pct, start, end, sample_rate),
            peak: seg.iter().copied().fold(0.0, f64::max),
        });
    }
    let efforts: Vec<f64> = out.iter().map(|r| r.effort).collect();
    let peaks: Vec<f64> = out.iter().map(|r| r.peak).collect();
    Ok(ChannelSummary {
        effort_mean: stats::mean(&efforts),
        effort_sd: stats::sample_sd(&efforts),
        peak_mean: stats::mean(&peaks),
        peak_sd: stats::sample_sd(&peaks),
        reps: out,
    })
}

/// Linear resampling of `x[start..=end]` to `points` evenly spaced samples.
pub fn resample_cycle(x: &[f64], start: usize, end: usize, points: usize) -> Vec<f64> {
    let seg = &x[start..=end];
    if seg.len() == 1 || points < 2 {
        return vec![seg[0]; points];
    }
    let span = (seg.len() - 1) as f64;
    (0..points)
        .map(|p| {
            let pos = p as f64 * span / (points - 1) as f64;
            let i = (pos.floor() as usize).min(seg.len() - 2);
            let f = pos - i as f64;
            seg[i] + (seg[i + 1] - seg[i]) * f
        })
        .collect()
}

/// Mean and sample SD across reps at each of the 101 cycle points.
pub fn ensemble(x: &[f64], reps: &[(usize, usize)]) -> (Vec<f64>, Vec<f64>) {
    let curves: Vec<Vec<f64>> = reps
        .iter()
        .filter(|(a, b)| b > a && *b < x.len())
        .map(|&(a, b)| resample_cycle(x, a, b, CYCLE_POINTS))
        .collect();
    let column = |p: usize| -> Vec<f64> { curves.iter().map(|c| c[p]).collect() };
    (
        (0..CYCLE_POINTS).map(|p| stats::mean(&column(p))).collect(),
        (0..CYCLE_POINTS).map(|p| stats::sample_sd(&column(p))).collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    const FS: f64 = 1000.0;

    fn sine(freq: f64, amp: f64, secs: f64) -> Vec<f64> {
        (0..(secs * FS) as usize)
            .map(|k| amp * (2.0 * PI * freq * k as f64 / FS).sin())
            .collect()
    }

    /// Triangular squat trace: down and up over `period`, `reps` times.
    fn triangle(reps: usize, period: f64, depth_deg: f64) -> ThighAngle {
        let fs = 100.0;
        let n = (reps as f64 * period * fs) as usize + 1;
        let t: Vec<f64> = (0..n).map(|k| k as f64 / fs).collect();
        let theta = t
            .iter()
            .map(|&t| {
                let ph = (t / period).fract();
                depth_deg.to_radians() * (1.0 - (2.0 * ph - 1.0).abs())
            })
            .collect();
        ThighAngle::new(t, theta).unwrap()
    }

    #[test]
    fn sine_envelope_is_rms() {
        let env = envelope(&sine(50.0, 2.0, 2.0), FS).unwrap();
        let steady = &env[500..1500];
        for &v in steady {
            assert!((v - 2.0 / 2f64.sqrt()).abs() < 0.01 * 2.0 / 2f64.sqrt(), "{v}");
        }
    }

    #[test]
    fn out_of_band_sine_is_attenuated() {
        let pass = envelope(&sine(50.0, 1.0, 4.0), FS).unwrap();
        let stop = envelope(&sine(5.0, 1.0, 4.0), FS).unwrap();
        let ratio = stats::mean(&stop[2000..3500]) / stats::mean(&pass[2000..3500]);
        assert!(20.0 * ratio.log10() <= -20.0, "{ratio}");
    }

    #[test]
    fn dc_offset_is_invisible() {
        // dyadic samples keep every step exact
        let x: Vec<f64> = (0..1024).map(|k| ((k * 37 % 64) as f64 - 32.0) / 64.0).collect();
        let shifted: Vec<f64> = x.iter().map(|v| v + 3.0).collect();
        assert_eq!(envelope(&x, FS).unwrap(), envelope(&shifted, FS).unwrap());

        let y = sine(80.0, 0.3, 1.0);
        let a = envelope(&y, FS).unwrap();
        let b = envelope(&y.iter().map(|v| v - 1.7).collect::<Vec<_>>(), FS).unwrap();
        assert!(a.iter().zip(&b).all(|(p, q)| (p - q).abs() < 1e-12));
    }

    #[test]
    fn rate_must_exceed_band() {
        assert!(matches!(envelope(&[0.0; 100], 400.0), Err(Error::Config(_))));
        assert!(EmgRecording::new(300.0, 0.0, vec![("VM".into(), vec![0.0; 4])]).is_err());
    }

    #[test]
    fn window_is_odd() {
        assert_eq!(rms_window_len(1000.0), 101);
        assert_eq!(rms_window_len(2000.0), 201);
        assert_eq!(rms_window_len(1111.0), 111);
        assert_eq!(moving_rms(&[3.0, 3.0, 3.0], 101), vec![3.0; 3]);
    }

    #[test]
    fn normalization() {
        let mvc = [0.5, 2.0, 1.0];
        assert_eq!(normalize_mvc(&[2.0, 1.0], &mvc).unwrap(), vec![100.0, 50.0]);
        let self_norm = normalize_mvc(&mvc, &mvc).unwrap();
        assert_eq!(self_norm.iter().copied().fold(0.0, f64::max), 100.0);
        assert!(normalize_mvc(&[1.0], &[0.0, 0.0]).is_err());
        let p = normalize_mvc_with(&[1.0], &[1.0, 2.0, 3.0], MvcReference::Percentile(50.0)).unwrap();
        assert_eq!(p, vec![50.0]);
    }

    #[test]
    fn crops_triangular_trace() {
        let reps = crop_reps(&triangle(20, 4.0, 80.0), Some(20)).unwrap();
        assert_eq!(reps.len(), 20);
        // interior minima are exact; the trace ends sit on truncated stretches
        for w in reps.windows(2) {
            assert_eq!(w[0].end, w[1].start);
        }
        for r in &reps[1..] {
            assert!((r.t_start - 4.0 * (r.t_start / 4.0).round()).abs() < 1e-9);
        }
        assert!(reps[0].t_start < 0.05 && (reps[19].t_end - 80.0).abs() < 0.05);
    }

    #[test]
    fn noisy_trace_keeps_bounds() {
        use rand::SeedableRng;
        use rand_distr::{Distribution, Normal};
        let clean = triangle(20, 4.0, 80.0);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let noise = Normal::new(0.0, 0.5f64.to_radians()).unwrap();
        let theta = clean.theta.iter().map(|v| v + noise.sample(&mut rng)).collect();
        let noisy = ThighAngle::new(clean.t.clone(), theta).unwrap();
        let a = crop_reps(&clean, None).unwrap();
        let b = crop_reps(&noisy, None).unwrap();
        assert_eq!(a.len(), b.len());
        for (p, q) in a.iter().zip(&b) {
            assert!((p.t_start - q.t_start).abs() <= 0.02 * 4.0);
            assert!((p.t_end - q.t_end).abs() <= 0.02 * 4.0);
        }
    }

    #[test]
    fn flat_trace_is_a_detection_error() {
        let flat = ThighAngle::new((0..500).map(f64::from).collect(), vec![0.1; 500]).unwrap();
        let err = crop_reps(&flat, Some(20)).unwrap_err();
        assert!(matches!(err, Error::Detection(_)));
        assert!(err.is_numerical());
    }

    #[test]
    fn squat_with_rest_splits_mid_rest() {
        // 1 s down, 1 s up, 2 s standing
        let fs = 100.0;
        let t: Vec<f64> = (0..=1200).map(|k| k as f64 / fs).collect();
        let theta = t
            .iter()
            .map(|&t| {
                let p = t % 4.0;
                if p < 2.0 { 1.4 * (PI * p / 2.0).sin().powi(2) } else { 0.0 }
            })
            .collect();
        let reps = crop_reps(&ThighAngle::new(t, theta).unwrap(), Some(3)).unwrap();
        assert_eq!(reps.len(), 3);
        assert!((reps[0].t_end - 3.0).abs() < 0.05, "{:?}", reps[0]);
        assert!((reps[1].t_end - 7.0).abs() < 0.05, "{:?}", reps[1]);
    }

    #[test]
    fn constant_activation_effort() {
        let x = vec![10.0; 2001];
        let s = summarize(&x, &[(0, 2000)], FS).unwrap();
        assert!((s.reps[0].effort - 20.0).abs() < 1e-12);
        assert_eq!(s.reps[0].peak, 10.0);
        assert_eq!(format!("{:.1}", s.reps[0].effort), "20.0");
        let zero = summarize(&vec![0.0; 100], &[(0, 99)], FS).unwrap();
        assert_eq!((zero.reps[0].effort, zero.reps[0].peak), (0.0, 0.0));
    }

    #[test]
    fn empty_reps_are_skipped() {
        let s = summarize(&[1.0; 10], &[(3, 3), (0, 9)], FS).unwrap();
        assert_eq!(s.reps.len(), 1);
        assert_eq!(s.reps[0].rep, 2);
        assert!(summarize(&[1.0; 10], &[(0, 10)], FS).is_err());
    }

    #[test]
    fn ensemble_of_identical_reps() {
        let one: Vec<f64> = (0..=200).map(|k| (k as f64 * 0.05).sin()).collect();
        let mut x = one.clone();
        x.extend_from_slice(&one);
        let (mean, sd) = ensemble(&x, &[(0, 200), (201, 401)]);
        let single = resample_cycle(&one, 0, 200, CYCLE_POINTS);
        assert_eq!(mean.len(), 101);
        assert!(mean.iter().zip(&single).all(|(a, b)| (a - b).abs() < 1e-15));
        assert!(sd.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn recording_csv_round_trip() {
        let rec = EmgRecording::new(1000.0, 0.0, vec![("VM".into(), vec![0.25, -0.5, 1.0]), ("BF".into(), vec![0.0, 0.125, 2.0])])
            .unwrap();
        let mut buf = Vec::new();
        rec.write_csv(&mut buf).unwrap();
        let back = EmgRecording::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.channels, rec.channels);
        assert!((back.sample_rate - 1000.0).abs() < 1e-6);
        assert!(EmgRecording::read_csv("t,VM\n0,1\n0.001,x\n".as_bytes()).is_err());
        assert!(EmgRecording::read_csv("".as_bytes()).is_err());
        let thigh = ThighAngle::read_csv("t,theta_t_deg\n0,0\n0.01,90\n".as_bytes()).unwrap();
        assert!((thigh.theta[1] - PI / 2.0).abs() < 1e-15);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn envelope_scales(c in 0.01f64..100.0, seed in 0u64..1000) {
            let x: Vec<f64> = (0..600).map(|k| ((k as u64 * 2654435761 + seed) % 1000) as f64 / 1000.0 - 0.5).collect();
            let a = envelope(&x, FS).unwrap();
            let b = envelope(&x.iter().map(|v| c * v).collect::<Vec<_>>(), FS).unwrap();
            for (p, q) in a.iter().zip(&b) {
                prop_assert!((c * p - q).abs() <= 1e-9 * (1.0 + q.abs()));
            }
        }

        #[test]
        fn normalization_is_scale_free(c in 0.01f64..100.0, env in proptest::collection::vec(0f64..5.0, 1..20), mvc in proptest::collection::vec(0.1f64..5.0, 1..20)) {
            let a = normalize_mvc(&env, &mvc).unwrap();
            let ce: Vec<f64> = env.iter().map(|v| c * v).collect();
            let cm: Vec<f64> = mvc.iter().map(|v| c * v).collect();
            let b = normalize_mvc(&ce, &cm).unwrap();
            for (p, q) in a.iter().zip(&b) {
                prop_assert!((p - q).abs() <= 1e-12 * (1.0 + p.abs()));
            }
        }

        #[test]
        fn effort_is_additive(x in proptest::collection::vec(0f64..200.0, 3..200), cut in 0.0f64..1.0) {
            let n = x.len() - 1;
            let m = 1 + ((n - 1) as f64 * cut) as usize;
            let whole = trapezoid(&x, 0, n, FS);
            let parts = trapezoid(&x, 0, m, FS) + trapezoid(&x, m, n, FS);
            prop_assert!((whole - parts).abs() < 1e-9);
        }
    }
}
