//! Interval-valued time series: construction from hourly demand records,
//! center/radius and log conversions, and the two interval-to-complex maps.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use chrono::{Datelike, NaiveDate};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Months with fewer records than this trigger a warning during aggregation.
pub const DEFAULT_MIN_RECORDS_PER_MONTH: usize = 20;

/// Calendar month label for one period of a monthly series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct YearMonth {
    pub year: i32,
    pub month: u32,
}

impl YearMonth {
    pub fn new(year: i32, month: u32) -> Result<Self> {
        if !(1..=12).contains(&month) {
            return Err(Error::InvalidParameter(format!("month {month} out of range 1..12")));
        }
        Ok(Self { year, month })
    }

    pub fn next(self) -> Self {
        if self.month == 12 {
            Self { year: self.year + 1, month: 1 }
        } else {
            Self { year: self.year, month: self.month + 1 }
        }
    }

    /// Month index counted from year 0, handy for distances.
    fn ordinal(self) -> i64 {
        self.year as i64 * 12 + (self.month as i64 - 1)
    }

    pub fn months_until(self, other: YearMonth) -> i64 {
        other.ordinal() - self.ordinal()
    }
}

impl fmt::Display for YearMonth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

impl FromStr for YearMonth {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("expected yyyy-mm, got {s:?}"));
        let (y, m) = s.trim().split_once('-').ok_or_else(bad)?;
        let year = y.parse().map_err(|_| bad())?;
        let month = m.parse().map_err(|_| bad())?;
        YearMonth::new(year, month)
    }
}

/// One hourly demand observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarRecord {
    pub date: NaiveDate,
    /// Hour of day, 1..=24.
    pub hour: u8,
    /// Demand in MWh, strictly positive.
    pub value: f64,
}

impl ScalarRecord {
    pub fn new(date: NaiveDate, hour: u8, value: f64) -> Result<Self> {
        if !(1..=24).contains(&hour) {
            return Err(Error::InvalidParameter(format!("hour {hour} out of range 1..24")));
        }
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::InvalidParameter(format!("demand {value} must be positive")));
        }
        Ok(Self { date, hour, value })
    }

    pub fn period(&self) -> YearMonth {
        YearMonth { year: self.date.year(), month: self.date.month() }
    }
}

/// A closed interval `[lower, upper]` with `lower <= upper`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    lower: f64,
    upper: f64,
}

impl Interval {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if !(lower.is_finite() && upper.is_finite()) {
            return Err(Error::NonFinite);
        }
        if lower > upper {
            return Err(Error::InvalidInterval { lower, upper });
        }
        Ok(Self { lower, upper })
    }

    /// Builds an interval from two bounds that may be out of order, swapping
    /// them if needed. The flag reports whether a swap happened.
    pub fn from_bounds_repaired(lower: f64, upper: f64) -> (Self, bool) {
        if lower > upper {
            (Self { lower: upper, upper: lower }, true)
        } else {
            (Self { lower, upper }, false)
        }
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    /// `(center, radius)` form of the interval.
    pub fn to_center_radius(&self) -> (f64, f64) {
        ((self.lower + self.upper) / 2.0, (self.upper - self.lower) / 2.0)
    }

    pub fn from_center_radius(center: f64, radius: f64) -> Result<Self> {
        Self::new(center - radius, center + radius)
    }

    pub fn range(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Scale on which the bounds of a series are expressed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scale {
    Raw,
    NaturalLog,
}

impl fmt::Display for Scale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scale::Raw => "raw",
            Scale::NaturalLog => "natural-log",
        })
    }
}

impl FromStr for Scale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw" => Ok(Scale::Raw),
            "log" | "natural-log" | "ln" => Ok(Scale::NaturalLog),
            other => Err(Error::InvalidParameter(format!("unknown scale {other:?}"))),
        }
    }
}

/// Monthly interval-valued time series.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalSeries {
    periods: Vec<YearMonth>,
    intervals: Vec<Interval>,
    scale: Scale,
    hour: Option<u8>,
}

impl IntervalSeries {
    /// Checks that periods are contiguous months and lengths agree.
    pub fn new(periods: Vec<YearMonth>, intervals: Vec<Interval>, scale: Scale) -> Result<Self> {
        if intervals.is_empty() {
            return Err(Error::EmptyInput("interval series"));
        }
        if periods.len() != intervals.len() {
            return Err(Error::DimensionMismatch { expected: periods.len(), got: intervals.len() });
        }
        for (i, w) in periods.windows(2).enumerate() {
            if w[0].next() != w[1] {
                return Err(Error::NonContiguousPeriods(i + 1));
            }
        }
        Ok(Self { periods, intervals, scale, hour: None })
    }

    /// Series of consecutive months beginning at `start`.
    pub fn from_start(start: YearMonth, intervals: Vec<Interval>, scale: Scale) -> Result<Self> {
        let mut periods = Vec::with_capacity(intervals.len());
        let mut p = start;
        for _ in 0..intervals.len() {
            periods.push(p);
            p = p.next();
        }
        Self::new(periods, intervals, scale)
    }

    /// Convenience constructor from parallel bound vectors starting at 2000-01.
    pub fn from_bounds(lower: &[f64], upper: &[f64], scale: Scale) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch { expected: lower.len(), got: upper.len() });
        }
        let intervals = lower
            .iter()
            .zip(upper)
            .map(|(&l, &u)| Interval::new(l, u))
            .collect::<Result<Vec<_>>>()?;
        Self::from_start(YearMonth { year: 2000, month: 1 }, intervals, scale)
    }

    pub fn with_hour(mut self, hour: Option<u8>) -> Self {
        self.hour = hour;
        self
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn periods(&self) -> &[YearMonth] {
        &self.periods
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn scale(&self) -> Scale {
        self.scale
    }

    pub fn hour(&self) -> Option<u8> {
        self.hour
    }

    pub fn lower(&self) -> Vec<f64> {
        self.intervals.iter().map(Interval::lower).collect()
    }

    pub fn upper(&self) -> Vec<f64> {
        self.intervals.iter().map(Interval::upper).collect()
    }

    pub fn last(&self) -> Interval {
        *self.intervals.last().expect("series is never empty")
    }

    /// Sub-series covering `range` (period labels are kept).
    pub fn slice(&self, range: std::ops::Range<usize>) -> Result<Self> {
        if range.start >= range.end || range.end > self.len() {
            return Err(Error::InvalidParameter(format!(
                "slice {}..{} out of range for length {}",
                range.start,
                range.end,
                self.len()
            )));
        }
        Ok(Self {
            periods: self.periods[range.clone()].to_vec(),
            intervals: self.intervals[range].to_vec(),
            scale: self.scale,
            hour: self.hour,
        })
    }

    /// Index of `period` within the series, if present.
    pub fn position(&self, period: YearMonth) -> Option<usize> {
        let offset = self.periods[0].months_until(period);
        (0..self.len() as i64).contains(&offset).then_some(offset as usize)
    }

    /// Element-wise natural log of both bounds.
    pub fn log_transform(&self) -> Result<Self> {
        if self.scale == Scale::NaturalLog {
            return Err(Error::ScaleMismatch("natural-log"));
        }
        let mut out = Vec::with_capacity(self.len());
        for (index, iv) in self.intervals.iter().enumerate() {
            if iv.lower <= 0.0 {
                return Err(Error::NonPositiveBound { index, value: iv.lower });
            }
            out.push(Interval { lower: iv.lower.ln(), upper: iv.upper.ln() });
        }
        Ok(Self { intervals: out, scale: Scale::NaturalLog, ..self.clone() })
    }

    /// Element-wise exponential; inverse of [`log_transform`](Self::log_transform).
    pub fn inverse_log(&self) -> Result<Self> {
        if self.scale == Scale::Raw {
            return Err(Error::ScaleMismatch("raw"));
        }
        let intervals = self
            .intervals
            .iter()
            .map(|iv| Interval { lower: iv.lower.exp(), upper: iv.upper.exp() })
            .collect();
        Ok(Self { intervals, scale: Scale::Raw, ..self.clone() })
    }

    pub fn to_complex(&self, mode: Transform) -> ComplexSeries {
        let samples = self
            .intervals
            .iter()
            .map(|iv| match mode {
                Transform::Trans1 => Complex64::new(iv.lower, iv.upper),
                Transform::Trans2 => Complex64::new(iv.upper, iv.lower),
            })
            .collect();
        ComplexSeries {
            samples,
            construction: mode,
            periods: self.periods.clone(),
            scale: self.scale,
            hour: self.hour,
        }
    }
}

/// The two interval-to-complex maps: `L + iU` and `U + iL`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Transform {
    Trans1,
    Trans2,
}

impl fmt::Display for Transform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Transform::Trans1 => "Trans1",
            Transform::Trans2 => "Trans2",
        })
    }
}

impl FromStr for Transform {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "trans1" | "1" => Ok(Transform::Trans1),
            "trans2" | "2" => Ok(Transform::Trans2),
            other => Err(Error::InvalidParameter(format!("unknown transform {other:?}"))),
        }
    }
}

impl Transform {
    /// Splits a complex sample into `(lower, upper)` under this construction.
    pub fn bounds_of(self, c: Complex64) -> (f64, f64) {
        match self {
            Transform::Trans1 => (c.re, c.im),
            Transform::Trans2 => (c.im, c.re),
        }
    }
}

/// Complex-valued image of an interval series.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSeries {
    samples: Vec<Complex64>,
    construction: Transform,
    periods: Vec<YearMonth>,
    scale: Scale,
    hour: Option<u8>,
}

/// Bounds recovered from a complex series. `invalid` lists the indices where
/// the recovered lower bound exceeds the upper bound.
#[derive(Debug, Clone, PartialEq)]
pub struct RecoveredBounds {
    pub periods: Vec<YearMonth>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub scale: Scale,
    pub hour: Option<u8>,
    pub invalid: Vec<usize>,
}

impl RecoveredBounds {
    pub fn is_valid(&self) -> bool {
        self.invalid.is_empty()
    }

    /// Fails if any index is invalid.
    pub fn into_series(self) -> Result<IntervalSeries> {
        if let Some(&i) = self.invalid.first() {
            return Err(Error::InvalidInterval { lower: self.lower[i], upper: self.upper[i] });
        }
        self.build(false)
    }

    /// Swaps bounds at invalid indices.
    pub fn into_repaired_series(self) -> Result<IntervalSeries> {
        self.build(true)
    }

    fn build(self, repair: bool) -> Result<IntervalSeries> {
        let intervals = self
            .lower
            .iter()
            .zip(&self.upper)
            .map(|(&l, &u)| if repair { Ok(Interval::from_bounds_repaired(l, u).0) } else { Interval::new(l, u) })
            .collect::<Result<Vec<_>>>()?;
        Ok(IntervalSeries::new(self.periods, intervals, self.scale)?.with_hour(self.hour))
    }
}

impl ComplexSeries {
    /// Bare complex series with synthetic period labels (from 2000-01).
    pub fn from_samples(samples: Vec<Complex64>, construction: Transform) -> Self {
        let mut periods = Vec::with_capacity(samples.len());
        let mut p = YearMonth { year: 2000, month: 1 };
        for _ in 0..samples.len() {
            periods.push(p);
            p = p.next();
        }
        Self { samples, construction, periods, scale: Scale::Raw, hour: None }
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn construction(&self) -> Transform {
        self.construction
    }

    pub fn periods(&self) -> &[YearMonth] {
        &self.periods
    }

    pub fn scale(&self) -> Scale {
        self.scale
    }

    pub fn hour(&self) -> Option<u8> {
        self.hour
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Inverse of [`IntervalSeries::to_complex`].
    pub fn from_complex(&self) -> RecoveredBounds {
        let (lower, upper): (Vec<f64>, Vec<f64>) =
            self.samples.iter().map(|&c| self.construction.bounds_of(c)).unzip();
        let invalid = lower
            .iter()
            .zip(&upper)
            .enumerate()
            .filter(|(_, (l, u))| l > u)
            .map(|(i, _)| i)
            .collect();
        RecoveredBounds {
            periods: self.periods.clone(),
            lower,
            upper,
            scale: self.scale,
            hour: self.hour,
            invalid,
        }
    }
}

/// Record count observed for one month during aggregation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MonthCount {
    pub period: YearMonth,
    pub records: usize,
}

/// Monthly min/max of the records at `hour`, with the default sparse-month threshold.
pub fn aggregate_to_intervals(records: &[ScalarRecord], hour: u8) -> Result<IntervalSeries> {
    aggregate_with_counts(records, hour, DEFAULT_MIN_RECORDS_PER_MONTH).map(|(s, _)| s)
}

/// Monthly min/max of the records at `hour`. Months with fewer than
/// `min_records` entries are logged as warnings but still aggregated.
pub fn aggregate_with_counts(
    records: &[ScalarRecord],
    hour: u8,
    min_records: usize,
) -> Result<(IntervalSeries, Vec<MonthCount>)> {
    let mut by_month: BTreeMap<YearMonth, (f64, f64, usize)> = BTreeMap::new();
    for r in records.iter().filter(|r| r.hour == hour) {
        let e = by_month.entry(r.period()).or_insert((f64::INFINITY, f64::NEG_INFINITY, 0));
        e.0 = e.0.min(r.value);
        e.1 = e.1.max(r.value);
        e.2 += 1;
    }
    let (&first, _) = by_month.iter().next().ok_or(Error::EmptyInput("no records for hour"))?;
    let (&last, _) = by_month.iter().next_back().expect("non-empty");

    let mut periods = Vec::new();
    let mut intervals = Vec::new();
    let mut counts = Vec::new();
    let mut p = first;
    loop {
        let &(lo, hi, n) = by_month.get(&p).ok_or(Error::MissingMonth(p))?;
        if n < min_records {
            log::warn!("hour {hour}: month {p} has only {n} records");
        }
        periods.push(p);
        intervals.push(Interval::new(lo, hi)?);
        counts.push(MonthCount { period: p, records: n });
        if p == last {
            break;
        }
        p = p.next();
    }
    let series = IntervalSeries::new(periods, intervals, Scale::Raw)?.with_hour(Some(hour));
    Ok((series, counts))
}

#[derive(Debug, Deserialize)]
struct DemandRow {
    date: String,
    hour: String,
    demand_mwh: String,
}

/// Reads the hourly demand CSV (`date,hour,demand_mwh`). Schema errors carry
/// the 1-based file line number.
pub fn read_demand_csv<R: Read>(reader: R) -> Result<Vec<ScalarRecord>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    for col in ["date", "hour", "demand_mwh"] {
        if !headers.iter().any(|h| h == col) {
            return Err(Error::Schema { line: 1, message: format!("missing column {col:?}") });
        }
    }
    let mut out = Vec::new();
    for row in rdr.deserialize::<DemandRow>() {
        let row = row.map_err(|e| Error::Schema {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = out.len() as u64 + 2;
        let schema = |message: String| Error::Schema { line, message };
        let date = NaiveDate::parse_from_str(&row.date, "%Y-%m-%d")
            .map_err(|e| schema(format!("bad date {:?}: {e}", row.date)))?;
        let hour: u8 = row.hour.parse().map_err(|_| schema(format!("bad hour {:?}", row.hour)))?;
        let value: f64 = row
            .demand_mwh
            .parse()
            .map_err(|_| schema(format!("bad demand {:?}", row.demand_mwh)))?;
        out.push(ScalarRecord::new(date, hour, value).map_err(|e| schema(e.to_string()))?);
    }
    Ok(out)
}

/// Writes records in the hourly demand CSV layout.
pub fn write_demand_csv<W: Write>(writer: W, records: &[ScalarRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["date", "hour", "demand_mwh"])?;
    for r in records {
        w.write_record([r.date.format("%Y-%m-%d").to_string(), r.hour.to_string(), r.value.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `year,month,hour,lower,upper` rows. Floats use the shortest
/// representation that parses back to the same value.
pub fn write_interval_csv<W: Write>(writer: W, series: &IntervalSeries) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["year", "month", "hour", "lower", "upper"])?;
    let hour = series.hour.map(|h| h.to_string()).unwrap_or_default();
    for (p, iv) in series.periods.iter().zip(&series.intervals) {
        w.write_record([
            p.year.to_string(),
            p.month.to_string(),
            hour.clone(),
            iv.lower.to_string(),
            iv.upper.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Deserialize)]
struct IntervalRow {
    year: i32,
    month: u32,
    hour: Option<u8>,
    lower: f64,
    upper: f64,
}

/// Reads an interval CSV. Rows are grouped by the `hour` column, so one file
/// may hold several series; an empty hour cell groups under `None`.
pub fn read_interval_csv<R: Read>(reader: R, scale: Scale) -> Result<Vec<IntervalSeries>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut groups: BTreeMap<Option<u8>, (Vec<YearMonth>, Vec<Interval>)> = BTreeMap::new();
    for (i, row) in rdr.deserialize::<IntervalRow>().enumerate() {
        let line = i as u64 + 2;
        let row = row.map_err(|e| Error::Schema { line, message: e.to_string() })?;
        let schema = |e: Error| Error::Schema { line, message: e.to_string() };
        let period = YearMonth::new(row.year, row.month).map_err(schema)?;
        let iv = Interval::new(row.lower, row.upper).map_err(schema)?;
        let g = groups.entry(row.hour).or_default();
        g.0.push(period);
        g.1.push(iv);
    }
    if groups.is_empty() {
        return Err(Error::EmptyInput("interval csv"));
    }
    groups
        .into_iter()
        .map(|(hour, (periods, intervals))| Ok(IntervalSeries::new(periods, intervals, scale)?.with_hour(hour)))
        .collect()
}
