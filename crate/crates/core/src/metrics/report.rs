use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::summation::mean;

/// Planning metrics of one run (or an aggregate of runs).
///
/// Per-horizon vectors line up with `horizons_s`. Collision rates are
/// percentages. TPC is 0 at a horizon where no frame had any overlap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub horizons_s: Vec<f64>,
    pub l2: Vec<f64>,
    pub collision_rate: Vec<f64>,
    pub tpc: Vec<f64>,
    pub min_ade: f64,
    pub min_fde: f64,
}

/// Per-frame measurements that a report averages.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameMetrics {
    pub l2: Vec<f64>,
    pub collision: Vec<bool>,
    pub tpc: Vec<Option<f64>>,
    pub min_ade: f64,
    pub min_fde: f64,
}

pub const CSV_HEADER: &str = "metric,horizon_s,value";

impl MetricReport {
    pub fn zeros(horizons_s: &[f64]) -> Self {
        let n = horizons_s.len();
        Self {
            horizons_s: horizons_s.to_vec(),
            l2: vec![0.0; n],
            collision_rate: vec![0.0; n],
            tpc: vec![0.0; n],
            min_ade: 0.0,
            min_fde: 0.0,
        }
    }

    /// Averages frames in order; every frame must carry one entry per horizon.
    pub fn from_frames(horizons_s: &[f64], frames: &[FrameMetrics]) -> Result<Self> {
        let n = horizons_s.len();
        for f in frames {
            if f.l2.len() != n || f.collision.len() != n || f.tpc.len() != n {
                return Err(Error::shape("frame metrics", n, f.l2.len()));
            }
        }
        let mut report = Self::zeros(horizons_s);
        for h in 0..n {
            report.l2[h] = mean(frames.iter().map(|f| f.l2[h])).unwrap_or(0.0);
            report.collision_rate[h] =
                mean(frames.iter().map(|f| if f.collision[h] { 100.0 } else { 0.0 })).unwrap_or(0.0);
            report.tpc[h] = mean(frames.iter().filter_map(|f| f.tpc[h])).unwrap_or(0.0);
        }
        report.min_ade = mean(frames.iter().map(|f| f.min_ade)).unwrap_or(0.0);
        report.min_fde = mean(frames.iter().map(|f| f.min_fde)).unwrap_or(0.0);
        Ok(report)
    }

    /// Element-wise mean of several reports sharing the same horizons.
    pub fn mean_of(reports: &[MetricReport]) -> Result<Self> {
        let first = reports.first().ok_or(Error::EmptyInput("reports"))?;
        if reports.iter().any(|r| r.horizons_s != first.horizons_s) {
            return Err(Error::Config("reports use different horizons".into()));
        }
        let n = first.horizons_s.len();
        let col = |f: &dyn Fn(&MetricReport) -> f64| mean(reports.iter().map(f)).expect("non-empty");
        Ok(Self {
            horizons_s: first.horizons_s.clone(),
            l2: (0..n).map(|h| col(&|r| r.l2[h])).collect(),
            collision_rate: (0..n).map(|h| col(&|r| r.collision_rate[h])).collect(),
            tpc: (0..n).map(|h| col(&|r| r.tpc[h])).collect(),
            min_ade: col(&|r| r.min_ade),
            min_fde: col(&|r| r.min_fde),
        })
    }

    /// `(metric, horizon, value)` rows in a fixed order; horizon is `None`
    /// for the horizon-free ADE/FDE rows.
    pub fn rows(&self) -> Vec<(&'static str, Option<f64>, f64)> {
        let mut rows = Vec::new();
        for (name, values) in [
            ("l2", &self.l2),
            ("collision_rate", &self.collision_rate),
            ("tpc", &self.tpc),
        ] {
            for (h, v) in self.horizons_s.iter().zip(values.iter()) {
                rows.push((name, Some(*h), *v));
            }
        }
        rows.push(("min_ade", None, self.min_ade));
        rows.push(("min_fde", None, self.min_fde));
        rows
    }

    /// CSV with columns `metric,horizon_s,value`. Floats use the shortest
    /// representation that parses back to the same value.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for (name, h, v) in self.rows() {
            let h = h.map(|h| format!("{h:?}")).unwrap_or_default();
            out.push_str(&format!("{name},{h},{v:?}\n"));
        }
        out
    }

    pub fn from_csv(s: &str) -> Result<Self> {
        let mut lines = s.lines();
        if lines.next().map(str::trim) != Some(CSV_HEADER) {
            return Err(Error::Config("metric CSV is missing its header".into()));
        }
        let mut horizons: Vec<f64> = Vec::new();
        let mut report = Self::zeros(&[]);
        for (n, line) in lines.enumerate() {
            let bad = |why: &str| Error::CorruptLog {
                line: n + 2,
                reason: why.to_string(),
            };
            let parts: Vec<&str> = line.split(',').collect();
            if parts.len() != 3 {
                return Err(bad("expected three columns"));
            }
            let value: f64 = parts[2].parse().map_err(|_| bad("unparseable value"))?;
            match parts[0] {
                "min_ade" => report.min_ade = value,
                "min_fde" => report.min_fde = value,
                metric @ ("l2" | "collision_rate" | "tpc") => {
                    let h: f64 = parts[1].parse().map_err(|_| bad("unparseable horizon"))?;
                    if metric == "l2" {
                        horizons.push(h);
                    }
                    let target = match metric {
                        "l2" => &mut report.l2,
                        "collision_rate" => &mut report.collision_rate,
                        _ => &mut report.tpc,
                    };
                    target.push(value);
                }
                other => return Err(bad(&format!("unknown metric `{other}`"))),
            }
        }
        report.horizons_s = horizons;
        let n = report.horizons_s.len();
        if report.collision_rate.len() != n || report.tpc.len() != n {
            return Err(Error::Config("metric CSV rows do not share horizons".into()));
        }
        Ok(report)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn averages_frames() {
        let frames = vec![
            FrameMetrics {
                l2: vec![1.0, 2.0],
                collision: vec![false, true],
                tpc: vec![None, Some(0.5)],
                min_ade: 1.0,
                min_fde: 2.0,
            },
            FrameMetrics {
                l2: vec![3.0, 4.0],
                collision: vec![false, false],
                tpc: vec![Some(1.0), Some(1.5)],
                min_ade: 3.0,
                min_fde: 4.0,
            },
        ];
        let r = MetricReport::from_frames(&[1.0, 2.0], &frames).unwrap();
        assert_eq!(r.l2, vec![2.0, 3.0]);
        assert_eq!(r.collision_rate, vec![0.0, 50.0]);
        assert_eq!(r.tpc, vec![1.0, 1.0]);
        assert_eq!((r.min_ade, r.min_fde), (2.0, 3.0));
    }

    #[test]
    fn csv_round_trip_and_layout() {
        let r = MetricReport {
            horizons_s: vec![1.0, 2.0],
            l2: vec![0.1 + 0.2, 1.0 / 3.0],
            collision_rate: vec![0.0, 12.5],
            tpc: vec![1e-17, 2.0],
            min_ade: 0.75,
            min_fde: 1.5,
        };
        let csv = r.to_csv();
        assert!(csv.starts_with("metric,horizon_s,value\nl2,1.0,0.30000000000000004\n"));
        assert!(csv.ends_with("min_ade,,0.75\nmin_fde,,1.5\n"));
        assert_eq!(MetricReport::from_csv(&csv).unwrap(), r);
        let json: MetricReport = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(json, r);
    }
}
