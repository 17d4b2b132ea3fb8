//! Claim-export parsing and monthly per-state aggregation.
//!
//! Amounts are held in integer cents so that aggregation is exact; callers
//! convert to dollars only when a series enters the estimators.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use chrono::{Datelike, NaiveDate};
use serde::Serialize;

use crate::error::{Error, Result};

/// Column names of the raw export.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schema {
    pub date: String,
    pub state: String,
    pub building: String,
    pub contents: String,
    pub delimiter: u8,
}

impl Default for Schema {
    fn default() -> Self {
        Self {
            date: "dateOfLoss".into(),
            state: "state".into(),
            building: "buildingDamageAmount".into(),
            contents: "contentsDamageAmount".into(),
            delimiter: b',',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct YearMonth {
    pub year: i32,
    pub month: u32,
}

impl YearMonth {
    pub fn new(year: i32, month: u32) -> Result<Self> {
        if !(1..=12).contains(&month) {
            return Err(Error::domain(format!("month {month} outside 1..=12")));
        }
        Ok(Self { year, month })
    }

    fn index(self) -> i64 {
        self.year as i64 * 12 + (self.month as i64 - 1)
    }

    fn from_index(i: i64) -> Self {
        Self {
            year: i.div_euclid(12) as i32,
            month: (i.rem_euclid(12) + 1) as u32,
        }
    }

    pub fn of(date: NaiveDate) -> Self {
        Self {
            year: date.year(),
            month: date.month(),
        }
    }

    pub fn plus(self, months: usize) -> Self {
        Self::from_index(self.index() + months as i64)
    }
}

impl std::str::FromStr for YearMonth {
    type Err = Error;

    /// `YYYY-MM`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("expected YYYY-MM, got `{s}`"));
        let (y, m) = s.trim().split_once('-').ok_or_else(bad)?;
        Self::new(y.parse().map_err(|_| bad())?, m.parse().map_err(|_| bad())?)
    }
}

impl fmt::Display for YearMonth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

/// Inclusive range of calendar months.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Window {
    pub start: YearMonth,
    pub end: YearMonth,
}

impl Window {
    pub fn new(start: YearMonth, end: YearMonth) -> Result<Self> {
        if start > end {
            return Err(Error::domain(format!("window start {start} after end {end}")));
        }
        Ok(Self { start, end })
    }

    pub fn months(&self) -> usize {
        (self.end.index() - self.start.index() + 1) as usize
    }

    pub fn contains(&self, ym: YearMonth) -> bool {
        ym >= self.start && ym <= self.end
    }

    fn offset(&self, ym: YearMonth) -> usize {
        (ym.index() - self.start.index()) as usize
    }
}

impl Default for Window {
    /// January 1978 through December 2023.
    fn default() -> Self {
        Self {
            start: YearMonth { year: 1978, month: 1 },
            end: YearMonth { year: 2023, month: 12 },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClaimRecord {
    pub date_of_loss: NaiveDate,
    pub state: String,
    pub building_cents: i64,
    pub contents_cents: i64,
}

impl ClaimRecord {
    pub fn total_cents(&self) -> i64 {
        self.building_cents + self.contents_cents
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Rejection {
    /// 1-based line in the input file; the header is line 1.
    pub line: u64,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ParsedClaims {
    pub records: Vec<ClaimRecord>,
    pub rejects: Vec<Rejection>,
    /// Data rows read, excluding the header.
    pub rows: usize,
}

/// Decimal text to cents, rounding half away from zero past two decimals.
/// An empty field is zero.
pub fn parse_cents(text: &str) -> Option<i64> {
    let t = text.trim();
    if t.is_empty() {
        return Some(0);
    }
    let (neg, digits) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    let plain = |s: &str| s.bytes().all(|b| b.is_ascii_digit());
    let cents = if plain(int_part) && plain(frac_part) && !(int_part.is_empty() && frac_part.is_empty()) {
        let whole: i64 = if int_part.is_empty() { 0 } else { int_part.parse().ok()? };
        let mut frac = frac_part.bytes().map(|b| (b - b'0') as i64);
        let tenths = frac.next().unwrap_or(0);
        let hundredths = frac.next().unwrap_or(0);
        let round_up = frac.next().is_some_and(|d| d >= 5);
        whole.checked_mul(100)? + tenths * 10 + hundredths + round_up as i64
    } else {
        // exponent forms such as 1.5E3
        let v: f64 = digits.parse().ok()?;
        if !v.is_finite() {
            return None;
        }
        (v * 100.0).round() as i64
    };
    Some(if neg { -cents } else { cents })
}

fn parse_date(text: &str) -> Option<NaiveDate> {
    let t = text.trim();
    let head = t.get(..10).unwrap_or(t);
    NaiveDate::parse_from_str(head, "%Y-%m-%d").ok()
}

fn column(headers: &csv::StringRecord, name: &str) -> Result<usize> {
    headers
        .iter()
        .position(|h| h.trim() == name)
        .ok_or_else(|| Error::Schema(format!("missing column `{name}`")))
}

/// Reads a claim export. Rows with bad dates, bad or negative amounts, a
/// malformed state or a date outside `window` are rejected with their line.
pub fn parse_claims(path: &Path, schema: &Schema, window: Option<&Window>) -> Result<ParsedClaims> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_claims_from_reader(file, schema, window)
}

pub fn parse_claims_from_reader<R: Read>(reader: R, schema: &Schema, window: Option<&Window>) -> Result<ParsedClaims> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(schema.delimiter)
        .flexible(true)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let date_col = column(&headers, &schema.date)?;
    let state_col = column(&headers, &schema.state)?;
    let building_col = column(&headers, &schema.building)?;
    let contents_col = column(&headers, &schema.contents)?;

    let mut out = ParsedClaims::default();
    for row in rdr.records() {
        let row = row?;
        out.rows += 1;
        let line = row.position().map_or(out.rows as u64 + 1, |p| p.line());
        let field = |i: usize| row.get(i).unwrap_or("");
        let reject = |reason: String| Rejection { line, reason };

        let Some(date) = parse_date(field(date_col)) else {
            out.rejects.push(reject(format!("unparseable date `{}`", field(date_col))));
            continue;
        };
        if let Some(w) = window {
            if !w.contains(YearMonth::of(date)) {
                out.rejects.push(reject(format!("date {date} outside window")));
                continue;
            }
        }
        let state = field(state_col).trim().to_ascii_uppercase();
        if state.len() != 2 || !state.bytes().all(|b| b.is_ascii_alphabetic()) {
            out.rejects.push(reject(format!("bad state `{}`", field(state_col))));
            continue;
        }
        let mut amounts = [0i64; 2];
        let mut bad = None;
        for (slot, (col, name)) in amounts
            .iter_mut()
            .zip([(building_col, &schema.building), (contents_col, &schema.contents)])
        {
            match parse_cents(field(col)) {
                Some(c) if c >= 0 => *slot = c,
                Some(_) => bad = Some(format!("negative {name}")),
                None => bad = Some(format!("unparseable {name} `{}`", field(col))),
            }
        }
        if let Some(reason) = bad {
            out.rejects.push(reject(reason));
            continue;
        }
        out.records.push(ClaimRecord {
            date_of_loss: date,
            state,
            building_cents: amounts[0],
            contents_cents: amounts[1],
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LossSeries {
    pub state: String,
    pub start: YearMonth,
    /// One entry per month, zero where no claims occurred.
    pub values_cents: Vec<i64>,
}

impl LossSeries {
    /// Monthly losses in dollars.
    pub fn values(&self) -> Vec<f64> {
        self.values_cents.iter().map(|&c| c as f64 / 100.0).collect()
    }

    pub fn total_cents(&self) -> i64 {
        self.values_cents.iter().sum()
    }
}

/// Sums building and contents damage per state and month. Records for other
/// states or outside the window are skipped. Output is sorted by state.
pub fn aggregate_monthly(records: &[ClaimRecord], states: &BTreeSet<String>, window: &Window) -> Vec<LossSeries> {
    let len = window.months();
    let mut sums: BTreeMap<&str, Vec<i64>> = states.iter().map(|s| (s.as_str(), vec![0; len])).collect();
    let mut skipped = 0usize;
    for r in records {
        let ym = YearMonth::of(r.date_of_loss);
        match sums.get_mut(r.state.as_str()) {
            Some(v) if window.contains(ym) => v[window.offset(ym)] += r.total_cents(),
            _ => skipped += 1,
        }
    }
    if skipped > 0 {
        log::debug!("{skipped} records fell outside the state set or window");
    }
    sums.into_iter()
        .map(|(state, values_cents)| LossSeries {
            state: state.to_string(),
            start: window.start,
            values_cents,
        })
        .collect()
}

pub fn write_series<W: Write>(series: &[LossSeries], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(["state", "year", "month", "loss_cents"])?;
    let mut sorted: Vec<&LossSeries> = series.iter().collect();
    sorted.sort_by(|a, b| a.state.cmp(&b.state));
    for s in sorted {
        for (i, v) in s.values_cents.iter().enumerate() {
            let ym = s.start.plus(i);
            w.write_record([
                s.state.clone(),
                ym.year.to_string(),
                ym.month.to_string(),
                v.to_string(),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io("<series>", e))?;
    Ok(())
}

/// Writes the canonical `state,year,month,loss_cents` file.
pub fn persist_series(series: &[LossSeries], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_series(series, std::io::BufWriter::new(file))
}

pub fn read_series_from_reader<R: Read>(reader: R) -> Result<Vec<LossSeries>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["state", "year", "month", "loss_cents"] {
        return Err(Error::Schema("expected header state,year,month,loss_cents".into()));
    }
    let mut out: Vec<LossSeries> = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let bad = |what: &str| Error::Parse(format!("line {line}: bad {what}"));
        let state = row.get(0).ok_or_else(|| bad("state"))?.to_string();
        let year: i32 = row.get(1).and_then(|v| v.parse().ok()).ok_or_else(|| bad("year"))?;
        let month: u32 = row.get(2).and_then(|v| v.parse().ok()).ok_or_else(|| bad("month"))?;
        let cents: i64 = row.get(3).and_then(|v| v.parse().ok()).ok_or_else(|| bad("loss_cents"))?;
        let ym = YearMonth::new(year, month)?;
        match out.last_mut() {
            Some(s) if s.state == state => {
                if s.start.plus(s.values_cents.len()) != ym {
                    return Err(Error::Parse(format!("line {line}: months of {state} are not consecutive")));
                }
                s.values_cents.push(cents);
            }
            _ => {
                if out.iter().any(|s| s.state == state) {
                    return Err(Error::Parse(format!("line {line}: rows of {state} are not contiguous")));
                }
                out.push(LossSeries {
                    state,
                    start: ym,
                    values_cents: vec![cents],
                });
            }
        }
    }
    Ok(out)
}

pub fn read_series(path: &Path) -> Result<Vec<LossSeries>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_series_from_reader(file)
}
