use std::io::{BufReader, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const HEADER_COMMENT: &str = "# igss-trace v1";

/// Citizen counts at the end of one tick.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRow {
    pub tick: usize,
    pub quiet: usize,
    pub active: usize,
    pub jailed: usize,
}

impl TraceRow {
    pub fn citizens(&self) -> usize {
        self.quiet + self.active + self.jailed
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Trace(Vec<TraceRow>);

impl Trace {
    pub fn new(rows: Vec<TraceRow>) -> Self {
        Trace(rows)
    }

    pub fn rows(&self) -> &[TraceRow] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn quiet(&self) -> Vec<f64> {
        self.0.iter().map(|r| r.quiet as f64).collect()
    }

    pub fn active(&self) -> Vec<f64> {
        self.0.iter().map(|r| r.active as f64).collect()
    }

    pub fn jailed(&self) -> Vec<f64> {
        self.0.iter().map(|r| r.jailed as f64).collect()
    }

    /// True when every tick accounts for the same number of citizens.
    pub fn conserves(&self, citizens: usize) -> bool {
        self.0.iter().all(|r| r.citizens() == citizens)
    }

    pub fn write_to<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{HEADER_COMMENT}")?;
        let mut w = csv::Writer::from_writer(out);
        for r in &self.0 {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_from<R: Read>(reader: R) -> Result<Self> {
        let mut text = String::new();
        BufReader::new(reader).read_to_string(&mut text)?;
        let body: String = text.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect();
        let mut r = csv::Reader::from_reader(body.as_bytes());
        let rows = r
            .deserialize()
            .enumerate()
            .map(|(i, row)| {
                row.map_err(|e| Error::Table {
                    row: i + 1,
                    message: e.to_string(),
                })
            })
            .collect::<Result<Vec<TraceRow>>>()?;
        Ok(Trace(rows))
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_to(std::io::BufWriter::new(file))
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_from(std::fs::File::open(path)?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeriesComparison {
    pub mean_abs_diff: f64,
    pub peaks_left: usize,
    pub peaks_right: usize,
    /// Largest Pearson correlation over lags up to a quarter of the length.
    pub max_cross_correlation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceComparison {
    pub quiet: SeriesComparison,
    pub active: SeriesComparison,
    pub jailed: SeriesComparison,
}

pub fn compare_traces(a: &Trace, b: &Trace) -> Result<TraceComparison> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(TraceComparison {
        quiet: compare_series(&a.quiet(), &b.quiet()),
        active: compare_series(&a.active(), &b.active()),
        jailed: compare_series(&a.jailed(), &b.jailed()),
    })
}

fn compare_series(a: &[f64], b: &[f64]) -> SeriesComparison {
    let n = a.len();
    let mean_abs_diff = if n == 0 {
        0.0
    } else {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() / n as f64
    };
    let max_lag = n / 4;
    let max_cross_correlation = (0..=max_lag)
        .flat_map(|lag| [correlation(&a[lag..], &b[..n - lag]), correlation(&a[..n - lag], &b[lag..])])
        .fold(f64::NEG_INFINITY, f64::max);
    SeriesComparison {
        mean_abs_diff,
        peaks_left: count_peaks(a),
        peaks_right: count_peaks(b),
        max_cross_correlation: if n == 0 { 1.0 } else { max_cross_correlation },
    }
}

fn median(v: &[f64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let m = s.len() / 2;
    if s.len() % 2 == 1 {
        s[m]
    } else {
        (s[m - 1] + s[m]) / 2.0
    }
}

/// Local maxima above twice the series median. A plateau counts once, at
/// its first point.
pub fn count_peaks(v: &[f64]) -> usize {
    let floor = 2.0 * median(v);
    (0..v.len())
        .filter(|&i| {
            v[i] > floor && (i == 0 || v[i] > v[i - 1]) && (i + 1 == v.len() || v[i] >= v[i + 1])
        })
        .count()
}

/// Pearson correlation; a constant side scores 1 when both sides are equal
/// and 0 otherwise.
fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    if a.is_empty() {
        return 0.0;
    }
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        return if a == b { 1.0 } else { 0.0 };
    }
    sab / (saa * sbb).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trace(active: &[usize]) -> Trace {
        Trace::new(
            active
                .iter()
                .enumerate()
                .map(|(i, &a)| TraceRow { tick: i + 1, quiet: 100 - a, active: a, jailed: 0 })
                .collect(),
        )
    }

    #[test]
    fn identical_traces() {
        let t = trace(&[0, 1, 9, 2, 0, 0, 12, 1]);
        let c = compare_traces(&t, &t).unwrap();
        for s in [&c.quiet, &c.active, &c.jailed] {
            assert_eq!(s.mean_abs_diff, 0.0);
            assert_eq!(s.peaks_left, s.peaks_right);
            assert!((s.max_cross_correlation - 1.0).abs() < 1e-12);
        }
        assert_eq!(c.active.peaks_left, 2);
    }

    #[test]
    fn against_zero_trace() {
        let t = trace(&[4, 0, 2, 6]);
        let zero = trace(&[0, 0, 0, 0]);
        let c = compare_traces(&t, &zero).unwrap();
        assert_eq!(c.active.mean_abs_diff, 3.0);
        assert_eq!(c.active.peaks_right, 0);
    }

    #[test]
    fn length_mismatch() {
        assert!(matches!(
            compare_traces(&trace(&[1, 2]), &trace(&[1])),
            Err(Error::LengthMismatch { left: 2, right: 1 })
        ));
    }

    #[test]
    fn peaks_need_twice_the_median() {
        assert_eq!(count_peaks(&[1.0, 2.0, 1.0, 2.0, 1.0]), 0);
        assert_eq!(count_peaks(&[1.0, 5.0, 1.0, 1.0, 7.0]), 2);
        assert_eq!(count_peaks(&[0.0, 3.0, 3.0, 0.0, 0.0]), 1);
    }

    #[test]
    fn lagged_copy_correlates() {
        let a = [0.0, 1.0, 5.0, 1.0, 0.0, 0.0, 0.0, 0.0];
        let b = [0.0, 0.0, 1.0, 5.0, 1.0, 0.0, 0.0, 0.0];
        let c = compare_series(&a, &b);
        assert!(c.max_cross_correlation > 0.99);
    }

    #[test]
    fn csv_round_trip() {
        let t = trace(&[3, 1, 4, 1, 5]);
        let mut buf = Vec::new();
        t.write_to(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# igss-trace v1\ntick,quiet,active,jailed\n"));
        assert_eq!(Trace::read_from(buf.as_slice()).unwrap(), t);
        assert!(Trace::read_from("tick,quiet\n1,x\n".as_bytes()).is_err());
    }
}
