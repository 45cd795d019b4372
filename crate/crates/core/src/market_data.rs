//! Rate series ingestion and the additive translation that moves rates
//! away from zero before calibration.

use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::segmentation::Segmentation;
use crate::stats::{harmonic_mean, percentile};

/// Observation step for monthly data, in years.
pub const MONTHLY_DELTA: f64 = 1.0 / 30.0;

/// Default harmonic-mean level below which a group triggers the translation.
pub const DEFAULT_SHIFT_THRESHOLD: f64 = 1e-2;

/// Observed short rates (percent p.a.) for a single maturity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateSeries {
    values: Vec<f64>,
    timestamps: Vec<NaiveDate>,
    maturity_label: String,
    delta: f64,
}

impl RateSeries {
    pub fn new(
        values: Vec<f64>,
        timestamps: Vec<NaiveDate>,
        maturity_label: impl Into<String>,
        delta: f64,
    ) -> Result<Self> {
        if values.len() != timestamps.len() {
            return Err(Error::LengthMismatch {
                left: values.len(),
                right: timestamps.len(),
            });
        }
        if values.len() < 2 {
            return Err(Error::TooShort {
                needed: 2,
                got: values.len(),
            });
        }
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::InvalidInput(format!("observation step {delta} must be > 0")));
        }
        if let Some(w) = timestamps.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput(format!(
                "timestamps not strictly increasing at {}",
                w[1]
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite rate {v}")));
        }
        Ok(RateSeries {
            values,
            timestamps,
            maturity_label: maturity_label.into(),
            delta,
        })
    }

    /// Series on consecutive month-start dates from `start`.
    pub fn monthly(values: Vec<f64>, start: NaiveDate, maturity_label: impl Into<String>) -> Result<Self> {
        let timestamps = (0..values.len())
            .map(|i| {
                start
                    .checked_add_months(chrono::Months::new(i as u32))
                    .ok_or_else(|| Error::InvalidInput("date overflow".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        RateSeries::new(values, timestamps, maturity_label, MONTHLY_DELTA)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn timestamps(&self) -> &[NaiveDate] {
        &self.timestamps
    }

    pub fn maturity_label(&self) -> &str {
        &self.maturity_label
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn with_delta(mut self, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::InvalidInput(format!("observation step {delta} must be > 0")));
        }
        self.delta = delta;
        Ok(self)
    }

    /// Same dates and step, new values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        RateSeries::new(
            values,
            self.timestamps.clone(),
            self.maturity_label.clone(),
            self.delta,
        )
    }

    /// Observations `start..=end`, 1-based inclusive.
    pub fn slice(&self, start: usize, end: usize) -> Result<Self> {
        if start == 0 || end > self.len() || start > end {
            return Err(Error::InvalidInput(format!(
                "range {start}-{end} outside series of length {}",
                self.len()
            )));
        }
        RateSeries::new(
            self.values[start - 1..end].to_vec(),
            self.timestamps[start - 1..end].to_vec(),
            self.maturity_label.clone(),
            self.delta,
        )
    }
}

fn sniff_delimiter(header: &str) -> u8 {
    b",;\t"
        .iter()
        .copied()
        .max_by_key(|&d| header.bytes().filter(|&b| b == d).count())
        .unwrap_or(b',')
}

/// Reads one maturity column from a delimiter-separated file.
///
/// The first row is a header: a date column followed by one column per
/// maturity label. Dates are ISO-8601 (`YYYY-MM-DD`). Rows are returned
/// sorted by date; duplicate dates are rejected. Row numbers in errors are
/// file line numbers.
pub fn load_rate_series(path: impl AsRef<Path>, maturity_label: &str) -> Result<RateSeries> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_rate_table(&text, maturity_label)
}

/// Parses the contents of a rate file; see [`load_rate_series`].
pub fn parse_rate_table(text: &str, maturity_label: &str) -> Result<RateSeries> {
    let header = text.lines().next().unwrap_or_default();
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(sniff_delimiter(header))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::MalformedRow {
            row: 1,
            reason: e.to_string(),
        })?
        .clone();
    let col = headers
        .iter()
        .skip(1)
        .position(|h| h == maturity_label)
        .map(|p| p + 1)
        .ok_or_else(|| Error::MissingMaturity(maturity_label.to_string()))?;

    let mut rows: Vec<(NaiveDate, f64, usize)> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| Error::MalformedRow {
            row: line,
            reason: e.to_string(),
        })?;
        let date_cell = record.get(0).unwrap_or_default();
        let date = NaiveDate::parse_from_str(date_cell, "%Y-%m-%d").map_err(|e| {
            Error::MalformedRow {
                row: line,
                reason: format!("bad date `{date_cell}`: {e}"),
            }
        })?;
        let cell = record.get(col).ok_or_else(|| Error::MalformedRow {
            row: line,
            reason: format!("missing column `{maturity_label}`"),
        })?;
        let value: f64 = cell.parse().map_err(|_| Error::MalformedRow {
            row: line,
            reason: format!("non-numeric value `{cell}`"),
        })?;
        if !value.is_finite() {
            return Err(Error::MalformedRow {
                row: line,
                reason: format!("non-finite value `{cell}`"),
            });
        }
        rows.push((date, value, line));
    }
    rows.sort_by_key(|r| r.0);
    if let Some(w) = rows.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(Error::DuplicateDate {
            date: w[1].0.to_string(),
            row: w[0].2.max(w[1].2),
        });
    }
    if rows.len() < 2 {
        return Err(Error::TooShort {
            needed: 2,
            got: rows.len(),
        });
    }
    let (timestamps, values): (Vec<_>, Vec<_>) = rows.into_iter().map(|(d, v, _)| (d, v)).unzip();
    RateSeries::new(values, timestamps, maturity_label, MONTHLY_DELTA)
}

/// Writes series sharing one date index as a comma-separated table that
/// [`parse_rate_table`] reads back exactly.
pub fn write_rate_table<W: std::io::Write>(series: &[RateSeries], out: W) -> Result<()> {
    let first = series
        .first()
        .ok_or_else(|| Error::InvalidInput("no series to write".into()))?;
    if let Some(s) = series.iter().find(|s| s.timestamps() != first.timestamps()) {
        return Err(Error::InvalidInput(format!(
            "series `{}` does not share the date index of `{}`",
            s.maturity_label(),
            first.maturity_label()
        )));
    }
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::InvalidInput(format!("csv write failed: {e}"));
    let mut header = vec!["date".to_string()];
    header.extend(series.iter().map(|s| s.maturity_label().to_string()));
    w.write_record(&header).map_err(csv_err)?;
    for (i, d) in first.timestamps().iter().enumerate() {
        let mut row = vec![d.format("%Y-%m-%d").to_string()];
        row.extend(series.iter().map(|s| s.values()[i].to_string()));
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()
        .map_err(|e| Error::InvalidInput(format!("csv flush failed: {e}")))?;
    Ok(())
}

/// Maturity labels present in a rate file header.
pub fn maturity_labels(text: &str) -> Vec<String> {
    let header = text.lines().next().unwrap_or_default();
    let delim = sniff_delimiter(header) as char;
    header
        .split(delim)
        .skip(1)
        .map(|s| s.trim().to_string())
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShiftDirection {
    Add,
    Subtract,
    None,
}

/// Record of the translation applied to a series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftRecord {
    pub alpha: f64,
    pub direction: ShiftDirection,
}

impl ShiftRecord {
    pub const NONE: ShiftRecord = ShiftRecord {
        alpha: 0.0,
        direction: ShiftDirection::None,
    };

    pub fn apply(&self, x: f64) -> f64 {
        match self.direction {
            ShiftDirection::Add => x + self.alpha,
            ShiftDirection::Subtract => x - self.alpha,
            ShiftDirection::None => x,
        }
    }

    pub fn invert(&self, x: f64) -> f64 {
        match self.direction {
            ShiftDirection::Add => x - self.alpha,
            ShiftDirection::Subtract => x + self.alpha,
            ShiftDirection::None => x,
        }
    }
}

/// True when some group has a harmonic mean below `threshold`; a group
/// holding a non-positive rate always triggers.
pub fn needs_shift(series: &RateSeries, seg: &Segmentation, threshold: f64) -> bool {
    seg.groups().iter().any(|&(start, end)| {
        match harmonic_mean(&series.values()[start - 1..end]) {
            Some(h) => h < threshold,
            None => true,
        }
    })
}

/// Translates the series so every rate is strictly positive.
///
/// The offset is the 99th percentile of the observed rates. When that lift
/// leaves some rate at or below zero, the 1st-percentile magnitude is tried
/// with the subtractive orientation before giving up.
pub fn apply_shift(series: &RateSeries) -> Result<(RateSeries, ShiftRecord)> {
    let values = series.values();
    let p99 = percentile(values, 0.99);
    let p01 = percentile(values, 0.01);
    let mut attempts = Vec::with_capacity(2);
    if p99 >= 0.0 {
        attempts.push(ShiftRecord {
            alpha: p99,
            direction: ShiftDirection::Add,
        });
    }
    attempts.push(ShiftRecord {
        alpha: p01.abs(),
        direction: ShiftDirection::Subtract,
    });
    for record in attempts {
        let shifted: Vec<f64> = values.iter().map(|&v| record.apply(v)).collect();
        if shifted.iter().all(|&v| v > 0.0) {
            return Ok((series.with_values(shifted)?, record));
        }
    }
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    Err(Error::ShiftFailed(format!(
        "neither the 99th percentile ({p99}) nor the 1st percentile ({p01}) lifts the minimum {min} above zero"
    )))
}

/// Translation only when [`needs_shift`] fires; identity otherwise.
pub fn shift_if_needed(
    series: &RateSeries,
    seg: &Segmentation,
    threshold: f64,
) -> Result<(RateSeries, ShiftRecord)> {
    if needs_shift(series, seg, threshold) {
        apply_shift(series)
    } else {
        Ok((series.clone(), ShiftRecord::NONE))
    }
}

/// Maps fitted values back to the observed scale.
pub fn unshift(values: &[f64], record: &ShiftRecord) -> Vec<f64> {
    values.iter().map(|&v| record.invert(v)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::segmentation::Segmentation;

    fn series(values: &[f64]) -> RateSeries {
        RateSeries::monthly(
            values.to_vec(),
            NaiveDate::from_ymd_opt(2013, 1, 1).unwrap(),
            "1/360A",
        )
        .unwrap()
    }

    #[test]
    fn constructor_invariants() {
        let d = NaiveDate::from_ymd_opt(2020, 1, 1).unwrap();
        assert!(RateSeries::new(vec![1.0], vec![d], "x", 0.1).is_err());
        assert!(RateSeries::new(vec![1.0, 2.0], vec![d, d], "x", 0.1).is_err());
        let d2 = NaiveDate::from_ymd_opt(2020, 2, 1).unwrap();
        assert!(RateSeries::new(vec![1.0, 2.0], vec![d, d2], "x", 0.0).is_err());
        assert!(RateSeries::new(vec![-1.0, 0.0], vec![d, d2], "x", 0.1).is_ok());
    }

    #[test]
    fn parse_minimal_and_errors() {
        let s = parse_rate_table("date,1/360A\n2020-02-01,0.2\n2020-01-01,0.1\n", "1/360A").unwrap();
        assert_eq!(s.values(), &[0.1, 0.2]);
        assert_eq!(s.delta(), MONTHLY_DELTA);

        let e = parse_rate_table("date,a\n2020-01-01,0.1\n2020-02-01,abc\n", "a").unwrap_err();
        assert!(matches!(e, Error::MalformedRow { row: 3, .. }), "{e}");
        let e = parse_rate_table("date,a\n2020-01-01,0.1\n2020-01-01,0.3\n", "a").unwrap_err();
        assert!(matches!(e, Error::DuplicateDate { .. }));
        let e = parse_rate_table("date,a\n2020-01-01,0.1\n", "a").unwrap_err();
        assert!(matches!(e, Error::TooShort { .. }));
        let e = parse_rate_table("date,a\n2020-01-01,0.1\n2020-02-01,0.1\n", "b").unwrap_err();
        assert!(matches!(e, Error::MissingMaturity(_)));
        let s = parse_rate_table("date;a;b\n2020-01-01;0.1;1\n2020-02-01;0.1;2\n", "b").unwrap();
        assert_eq!(s.values(), &[1.0, 2.0]);
    }

    #[test]
    fn shift_trigger() {
        let s = series(&[2.0, 2.1, 1.9, 2.0, 2.05, 1.95]);
        let seg = Segmentation::fixed(6, 3).unwrap();
        assert!(!needs_shift(&s, &seg, DEFAULT_SHIFT_THRESHOLD));
        let s = series(&[2.0, 2.1, 1.9, 2.0, -0.1, 1.95]);
        assert!(needs_shift(&s, &seg, DEFAULT_SHIFT_THRESHOLD));
        let s = series(&[2.0, 2.0, 2.0, 0.012, 0.008, 0.009]);
        assert!(needs_shift(&s, &seg, DEFAULT_SHIFT_THRESHOLD));
    }

    #[test]
    fn shift_lifts_and_unshift_restores() {
        let mut v = vec![-0.5];
        v.extend((1..=30).map(|i| i as f64 * 0.1));
        let s = series(&v);
        let (shifted, rec) = apply_shift(&s).unwrap();
        assert_eq!(rec.direction, ShiftDirection::Add);
        assert!((rec.alpha - percentile(&v, 0.99)).abs() < 1e-15);
        assert!(shifted.values().iter().all(|&x| x > 0.0));
        let back = unshift(shifted.values(), &rec);
        for (b, x) in back.iter().zip(&v) {
            assert!((b - x).abs() <= f64::EPSILON * (x.abs() + rec.alpha));
        }
        assert_eq!(unshift(&[2.0], &ShiftRecord { alpha: 1.5, direction: ShiftDirection::Add }), vec![0.5]);
        assert_eq!(unshift(&[2.0], &ShiftRecord::NONE), vec![2.0]);
    }

    #[test]
    fn shift_identity_without_trigger() {
        let s = series(&[2.0, 2.1, 1.9, 2.0]);
        let seg = Segmentation::fixed(4, 2).unwrap();
        let (out, rec) = shift_if_needed(&s, &seg, DEFAULT_SHIFT_THRESHOLD).unwrap();
        assert_eq!(rec, ShiftRecord::NONE);
        assert_eq!(out, s);
    }

    #[test]
    fn shift_fails_loudly_when_no_rule_works() {
        let s = series(&[-3.0, -1.0, -0.5, -0.2]);
        assert!(matches!(apply_shift(&s), Err(Error::ShiftFailed(_))));
    }
}
