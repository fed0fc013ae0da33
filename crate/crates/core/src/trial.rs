//! Uniformly sampled actuator trial logs and their CSV form.

use std::io::{Read, Write};

use crate::error::{Error, Result};

/// Column header of the trial CSV, in order.
pub const TRIAL_HEADER: [&str; 5] = ["t", "i_q", "theta", "omega", "tau_meas"];

/// Largest tolerated deviation of any time step from the first one.
pub const UNIFORM_STEP_TOLERANCE: f64 = 1e-6;

/// Time series of q-axis current, output position/velocity and measured
/// torque, all SI.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialLog {
    pub t: Vec<f64>,
    pub i_q: Vec<f64>,
    pub theta: Vec<f64>,
    pub omega: Vec<f64>,
    pub tau_meas: Vec<f64>,
    pub sample_rate: f64,
}

impl TrialLog {
    pub fn new(
        t: Vec<f64>,
        i_q: Vec<f64>,
        theta: Vec<f64>,
        omega: Vec<f64>,
        tau_meas: Vec<f64>,
    ) -> Result<Self> {
        let n = t.len();
        for (name, len) in [
            ("i_q", i_q.len()),
            ("theta", theta.len()),
            ("omega", omega.len()),
            ("tau_meas", tau_meas.len()),
        ] {
            if len != n {
                return Err(Error::Schema(format!(
                    "column `{name}` has {len} samples, `t` has {n}"
                )));
            }
        }
        if n < 2 {
            return Err(Error::Schema(format!("trial needs at least 2 samples, got {n}")));
        }
        for (name, col) in [
            ("t", &t),
            ("i_q", &i_q),
            ("theta", &theta),
            ("omega", &omega),
            ("tau_meas", &tau_meas),
        ] {
            if let Some(k) = col.iter().position(|v| !v.is_finite()) {
                return Err(Error::Schema(format!("column `{name}` row {k} is not finite")));
            }
        }
        let dt0 = t[1] - t[0];
        if dt0 <= 0.0 {
            return Err(Error::Schema("column `t` must be strictly increasing".into()));
        }
        if let Some(k) = t
            .windows(2)
            .position(|w| (w[1] - w[0] - dt0).abs() > UNIFORM_STEP_TOLERANCE)
        {
            return Err(Error::Schema(format!(
                "column `t` is not uniformly sampled (step {} at row {} vs {dt0})",
                t[k + 1] - t[k],
                k + 1
            )));
        }
        let sample_rate = (n - 1) as f64 / (t[n - 1] - t[0]);
        Ok(Self {
            t,
            i_q,
            theta,
            omega,
            tau_meas,
            sample_rate,
        })
    }

    /// Builds a log whose time column is `k / sample_rate`.
    pub fn from_rate(
        sample_rate: f64,
        i_q: Vec<f64>,
        theta: Vec<f64>,
        omega: Vec<f64>,
        tau_meas: Vec<f64>,
    ) -> Result<Self> {
        let t = (0..i_q.len()).map(|k| k as f64 / sample_rate).collect();
        let mut log = Self::new(t, i_q, theta, omega, tau_meas)?;
        log.sample_rate = sample_rate;
        Ok(log)
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let headers = rdr.headers()?.clone();
        let names: Vec<&str> = headers.iter().map(str::trim).collect();
        if names != TRIAL_HEADER {
            return Err(Error::Schema(format!(
                "expected header `{}`, found `{}`",
                TRIAL_HEADER.join(","),
                names.join(",")
            )));
        }
        let mut cols: [Vec<f64>; 5] = Default::default();
        for (row, record) in rdr.records().enumerate() {
            let record = record?;
            for (c, col) in cols.iter_mut().enumerate() {
                let field = record.get(c).ok_or_else(|| {
                    Error::Schema(format!("row {} is missing column `{}`", row + 1, TRIAL_HEADER[c]))
                })?;
                let v: f64 = field.trim().parse().map_err(|_| {
                    Error::Schema(format!(
                        "row {} column `{}`: `{field}` is not a number",
                        row + 1,
                        TRIAL_HEADER[c]
                    ))
                })?;
                col.push(v);
            }
        }
        let [t, i_q, theta, omega, tau_meas] = cols;
        Self::new(t, i_q, theta, omega, tau_meas)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{}", TRIAL_HEADER.join(","))?;
        for k in 0..self.len() {
            writeln!(
                w,
                "{},{},{},{},{}",
                self.t[k], self.i_q[k], self.theta[k], self.omega[k], self.tau_meas[k]
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_bad_shapes() {
        let one = vec![0.0];
        assert!(TrialLog::new(one.clone(), one.clone(), one.clone(), one.clone(), one).is_err());
        let t = vec![0.0, 0.1, 0.25];
        let z = vec![0.0; 3];
        assert!(matches!(
            TrialLog::new(t, z.clone(), z.clone(), z.clone(), z),
            Err(Error::Schema(_))
        ));
    }

    #[test]
    fn header_and_empty_files() {
        assert!(matches!(TrialLog::read_csv("".as_bytes()), Err(Error::Schema(_))));
        assert!(matches!(
            TrialLog::read_csv("t,i_q,theta,omega,tau_meas\n".as_bytes()),
            Err(Error::Schema(_))
        ));
        let err = TrialLog::read_csv("t,i_q,theta,omega,torque\n0,0,0,0,0\n".as_bytes()).unwrap_err();
        assert!(err.to_string().contains("tau_meas"));
        let err = TrialLog::read_csv("t,i_q,theta,omega,tau_meas\n0,0,0,x,0\n0.1,0,0,0,0\n".as_bytes())
            .unwrap_err();
        assert!(err.to_string().contains("omega"));
    }

    #[test]
    fn sample_rate_from_time_column() {
        let log = TrialLog::from_rate(250.0, vec![0.0; 10], vec![0.0; 10], vec![0.0; 10], vec![0.0; 10])
            .unwrap();
        assert_eq!(log.sample_rate, 250.0);
        let mut buf = Vec::new();
        log.write_csv(&mut buf).unwrap();
        let back = TrialLog::read_csv(buf.as_slice()).unwrap();
        assert!((back.sample_rate - 250.0).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn csv_round_trip_is_exact(vals in proptest::collection::vec(-1e3f64..1e3, 8)) {
            let n = vals.len();
            let log = TrialLog::from_rate(
                100.0,
                vals.clone(),
                vals.iter().map(|v| v * 0.5).collect(),
                vals.iter().map(|v| -v).collect(),
                vals.iter().map(|v| v / 3.0).collect(),
            ).unwrap();
            let mut buf = Vec::new();
            log.write_csv(&mut buf).unwrap();
            let back = TrialLog::read_csv(buf.as_slice()).unwrap();
            prop_assert_eq!(back.len(), n);
            prop_assert_eq!(&back.i_q, &log.i_q);
            prop_assert_eq!(&back.theta, &log.theta);
            prop_assert_eq!(&back.omega, &log.omega);
            prop_assert_eq!(&back.tau_meas, &log.tau_meas);
        }
    }
}
