//! Per-rep metrics CSV and the effort / peak comparison tables.

use std::io::{Read, Write};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::stats;

pub const METRICS_HEADER: [&str; 7] = ["condition", "channel", "rep", "start", "end", "effort", "peak"];

/// `"mean (SD)"` to one decimal.
pub fn format_mean_sd(mean: f64, sd: f64) -> String {
    if sd.is_nan() {
        format!("{mean:.1} (-)")
    } else {
        format!("{mean:.1} ({sd:.1})")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsRow {
    pub condition: String,
    pub channel: String,
    pub rep: usize,
    pub start: usize,
    pub end: usize,
    pub effort: f64,
    pub peak: f64,
}

impl MetricsRow {
    pub fn read_csv<R: Read>(reader: R) -> Result<Vec<Self>> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let names: Vec<String> = rdr.headers()?.iter().map(|s| s.trim().to_string()).collect();
        if names != METRICS_HEADER {
            return Err(Error::Schema(format!(
                "expected header `{}`, found `{}`",
                METRICS_HEADER.join(","),
                names.join(",")
            )));
        }
        let mut rows = Vec::new();
        for (k, record) in rdr.records().enumerate() {
            let record = record?;
            let field = |c: usize| record.get(c).map(str::trim).unwrap_or("");
            let bad = |c: usize| Error::Schema(format!("row {} column `{}`: `{}` is invalid", k + 1, METRICS_HEADER[c], field(c)));
            let int = |c: usize| field(c).parse::<usize>().map_err(|_| bad(c));
            let num = |c: usize| {
                field(c)
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| bad(c))
            };
            rows.push(MetricsRow {
                condition: field(0).to_string(),
                channel: field(1).to_string(),
                rep: int(2)?,
                start: int(3)?,
                end: int(4)?,
                effort: num(5)?,
                peak: num(6)?,
            });
        }
        if rows.is_empty() {
            return Err(Error::Schema("metrics file has no rows".into()));
        }
        Ok(rows)
    }

    pub fn write_csv<W: Write>(rows: &[Self], mut w: W) -> Result<()> {
        writeln!(w, "{}", METRICS_HEADER.join(","))?;
        for r in rows {
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                r.condition, r.channel, r.rep, r.start, r.end, r.effort, r.peak
            )?;
        }
        Ok(())
    }
}

/// Channel-by-condition tables of mean (SD) effort and peak.
#[derive(Debug, Clone, PartialEq)]
pub struct TableReport {
    pub conditions: Vec<String>,
    pub channels: Vec<String>,
    /// `[channel][condition]`, `None` where no reps exist.
    pub effort: Vec<Vec<Option<(f64, f64)>>>,
    pub peak: Vec<Vec<Option<(f64, f64)>>>,
}

impl TableReport {
    /// Conditions and channels keep their first-seen order.
    pub fn from_rows(rows: &[MetricsRow]) -> Self {
        let mut conditions: Vec<String> = Vec::new();
        let mut channels: Vec<String> = Vec::new();
        for r in rows {
            if !conditions.contains(&r.condition) {
                conditions.push(r.condition.clone());
            }
            if !channels.contains(&r.channel) {
                channels.push(r.channel.clone());
            }
        }
        let cell = |ch: &str, cond: &str, f: fn(&MetricsRow) -> f64| {
            let v: Vec<f64> = rows
                .iter()
                .filter(|r| r.channel == ch && r.condition == cond)
                .map(f)
                .collect();
            (!v.is_empty()).then(|| (stats::mean(&v), stats::sample_sd(&v)))
        };
        let grid = |f: fn(&MetricsRow) -> f64| {
            channels
                .iter()
                .map(|ch| conditions.iter().map(|c| cell(ch, c, f)).collect())
                .collect()
        };
        Self {
            effort: grid(|r| r.effort),
            peak: grid(|r| r.peak),
            conditions,
            channels,
        }
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.render_one("Muscle effort, mean (SD), %MVC s", &self.effort));
        out.push('\n');
        out.push_str(&self.render_one("Peak muscle activation, mean (SD), %MVC", &self.peak));
        out
    }

    fn render_one(&self, title: &str, grid: &[Vec<Option<(f64, f64)>>]) -> String {
        let cells: Vec<Vec<String>> = grid
            .iter()
            .map(|row| {
                row.iter()
                    .map(|c| c.map_or_else(|| "-".to_string(), |(m, s)| format_mean_sd(m, s)))
                    .collect()
            })
            .collect();
        let label_w = self.channels.iter().map(String::len).max().unwrap_or(0);
        let widths: Vec<usize> = (0..self.conditions.len())
            .map(|c| {
                cells
                    .iter()
                    .map(|r| r[c].len())
                    .chain(std::iter::once(self.conditions[c].len()))
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let line = |label: &str, row: &[String]| {
            let mut s = format!("{label:<label_w$}");
            for (c, cell) in row.iter().enumerate() {
                let sep = if c == 0 { " " } else { "  " };
                s.push_str(sep);
                s.push_str(&format!("{cell:<w$}", w = widths[c]));
            }
            s.trim_end().to_string() + "\n"
        };
        let mut out = format!("{title}\n");
        out.push_str(&line("", &self.conditions));
        for (ch, row) in self.channels.iter().zip(&cells) {
            out.push_str(&line(ch, row));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(cond: &str, ch: &str, rep: usize, effort: f64, peak: f64) -> MetricsRow {
        MetricsRow {
            condition: cond.into(),
            channel: ch.into(),
            rep,
            start: 0,
            end: 1,
            effort,
            peak,
        }
    }

    #[test]
    fn cells() {
        assert_eq!(format_mean_sd(33.2, 6.6), "33.2 (6.6)");
        assert_eq!(format_mean_sd(10.04, 0.95), "10.0 (0.9)");
        assert_eq!(format_mean_sd(5.0, f64::NAN), "5.0 (-)");
    }

    #[test]
    fn layout() {
        let rows = vec![
            row("Bare", "VM", 1, 30.0, 40.0),
            row("Bare", "VM", 2, 36.0, 50.0),
            row("Knee", "VM", 1, 10.0, 9.0),
            row("Bare", "BF", 1, 31.5, 50.0),
        ];
        let text = TableReport::from_rows(&rows).render();
        assert!(text.contains("VM 33.0 (4.2)  10.0 (-)"), "{text}");
        assert!(text.contains("BF 31.5 (-)    -"), "{text}");
    }

    #[test]
    fn csv_round_trip() {
        let rows = vec![row("Bare", "VM", 1, 0.1, 2.5), row("Hip-Knee", "GM", 2, 3.0, 4.0)];
        let mut buf = Vec::new();
        MetricsRow::write_csv(&rows, &mut buf).unwrap();
        assert_eq!(MetricsRow::read_csv(buf.as_slice()).unwrap(), rows);
        assert!(MetricsRow::read_csv("condition,channel\n".as_bytes()).is_err());
    }
}
