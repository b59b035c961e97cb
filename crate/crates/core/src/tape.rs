//! Trade data model: ticks, uniformly spaced tapes, windows and lags.
//!
//! A window selects which ticks enter the averages; lagged prices are always
//! read from the full tape, so a window starting at tick `s` with lag `l`
//! needs `s >= l`.
//!
//! Windows are indexed forward: `WindowSpec { start, count }` covers ticks
//! `start..start + count`. A pair shift `j` moves the second window of a pair
//! `j` ticks back in time.

use std::io::{Read, Write};
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::TapeError;

/// Relative tolerance for `value == price * volume` when a value column is supplied.
pub const VALUE_TOLERANCE: f64 = 1e-9;

/// Relative tolerance on the spacing between consecutive tick times.
pub const SPACING_TOLERANCE: f64 = 1e-6;

/// One executed trade.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TradeTick {
    pub index: usize,
    pub time: f64,
    pub price: f64,
    pub volume: f64,
    pub value: f64,
}

impl TradeTick {
    /// Builds a tick whose value is derived as `price * volume`.
    pub fn derived(index: usize, time: f64, price: f64, volume: f64) -> Self {
        TradeTick {
            index,
            time,
            price,
            volume,
            value: price * volume,
        }
    }

    fn validate(&self, row: usize) -> Result<(), TapeError> {
        for (field, x) in [
            ("time", self.time),
            ("price", self.price),
            ("volume", self.volume),
            ("value", self.value),
        ] {
            if !x.is_finite() {
                return Err(TapeError::NonFinite { row, field });
            }
        }
        for (field, x) in [
            ("price", self.price),
            ("volume", self.volume),
            ("value", self.value),
        ] {
            if x <= 0.0 {
                return Err(TapeError::NonPositiveField {
                    row,
                    field,
                    value: x,
                });
            }
        }
        let expected = self.price * self.volume;
        if ((self.value - expected) / self.value).abs() > VALUE_TOLERANCE {
            return Err(TapeError::ValueMismatch {
                row,
                value: self.value,
                expected,
            });
        }
        Ok(())
    }
}

/// Whether the input carries its own value column or the value is derived.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueColumn {
    WithValue,
    DeriveValue,
}

/// Immutable, validated, uniformly spaced sequence of trades.
#[derive(Debug, Clone, PartialEq)]
pub struct TradeTape {
    ticks: Vec<TradeTick>,
    epsilon: f64,
}

impl TradeTape {
    /// Validates ticks and spacing. Tick indices are reassigned to `0..len`.
    pub fn from_ticks(mut ticks: Vec<TradeTick>, epsilon: f64) -> Result<Self, TapeError> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(TapeError::InvalidEpsilon(epsilon));
        }
        if ticks.is_empty() {
            return Err(TapeError::EmptyTape);
        }
        for (i, tick) in ticks.iter_mut().enumerate() {
            tick.index = i;
            tick.validate(i + 1)?;
        }
        for (i, pair) in ticks.windows(2).enumerate() {
            let found = pair[1].time - pair[0].time;
            if ((found - epsilon) / epsilon).abs() > SPACING_TOLERANCE {
                return Err(TapeError::NonUniformSpacing {
                    row: i + 2,
                    expected: epsilon,
                    found,
                });
            }
        }
        Ok(TradeTape { ticks, epsilon })
    }

    /// Builds a tape at times `0, ε, 2ε, ...` with values derived from prices and volumes.
    pub fn from_price_volume(
        prices: &[f64],
        volumes: &[f64],
        epsilon: f64,
    ) -> Result<Self, TapeError> {
        if prices.len() != volumes.len() {
            return Err(TapeError::LengthMismatch {
                prices: prices.len(),
                volumes: volumes.len(),
            });
        }
        let ticks = prices
            .iter()
            .zip(volumes)
            .enumerate()
            .map(|(i, (&p, &u))| TradeTick::derived(i, i as f64 * epsilon, p, u))
            .collect();
        Self::from_ticks(ticks, epsilon)
    }

    pub fn len(&self) -> usize {
        self.ticks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ticks.is_empty()
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn ticks(&self) -> &[TradeTick] {
        &self.ticks
    }

    pub fn tick(&self, i: usize) -> &TradeTick {
        &self.ticks[i]
    }

    pub fn price(&self, i: usize) -> f64 {
        self.ticks[i].price
    }

    pub fn volume(&self, i: usize) -> f64 {
        self.ticks[i].volume
    }

    pub fn value(&self, i: usize) -> f64 {
        self.ticks[i].value
    }

    /// Resolves a window against this tape, checking that every lagged
    /// lookup `i - lag` stays inside the tape.
    pub fn resolve(
        &self,
        window: WindowSpec,
        lags: LagSpec,
    ) -> Result<ResolvedWindow<'_>, TapeError> {
        ResolvedWindow::new(self, window, lags.lag)
    }

    /// Writes the tape as `time,price,volume[,value]` CSV.
    pub fn write_csv<W: Write>(&self, writer: W, format: ValueColumn) -> Result<(), TapeError> {
        let mut out = csv::Writer::from_writer(writer);
        match format {
            ValueColumn::WithValue => out.write_record(["time", "price", "volume", "value"])?,
            ValueColumn::DeriveValue => out.write_record(["time", "price", "volume"])?,
        }
        for t in &self.ticks {
            let mut rec = vec![fmt_f64(t.time), fmt_f64(t.price), fmt_f64(t.volume)];
            if format == ValueColumn::WithValue {
                rec.push(fmt_f64(t.value));
            }
            out.write_record(&rec)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Shortest decimal representation that parses back to the same `f64`.
pub(crate) fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

/// Reads a CSV tape with header `time,price,volume[,value]`.
///
/// Fails on the first bad row; errors carry the 1-based data row number.
/// With [`ValueColumn::DeriveValue`] any supplied value column is ignored and
/// `value = price * volume`.
pub fn ingest<R: Read>(
    source: R,
    format: ValueColumn,
    epsilon: f64,
) -> Result<TradeTape, TapeError> {
    let ticks = read_ticks(source, format)?;
    TradeTape::from_ticks(ticks, epsilon)
}

/// Like [`ingest`], but takes the spacing from the first two rows.
pub fn ingest_inferred<R: Read>(source: R, format: ValueColumn) -> Result<TradeTape, TapeError> {
    let ticks = read_ticks(source, format)?;
    let epsilon = match ticks.as_slice() {
        [] => return Err(TapeError::EmptyTape),
        [_] => 1.0,
        [a, b, ..] => b.time - a.time,
    };
    TradeTape::from_ticks(ticks, epsilon)
}

/// Reports whether a CSV header carries a `value` column.
pub fn header_has_value(header: &str) -> bool {
    header
        .trim()
        .split(',')
        .map(str::trim)
        .any(|h| h.eq_ignore_ascii_case("value"))
}

fn read_ticks<R: Read>(source: R, format: ValueColumn) -> Result<Vec<TradeTick>, TapeError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(source);
    let headers = rdr.headers()?.clone();
    let column = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let (time_col, price_col, volume_col) =
        match (column("time"), column("price"), column("volume")) {
            (Some(t), Some(p), Some(v)) => (t, p, v),
            _ => {
                return Err(TapeError::BadHeader(
                    headers.iter().collect::<Vec<_>>().join(","),
                ))
            }
        };
    let value_col = column("value");
    if format == ValueColumn::WithValue && value_col.is_none() {
        return Err(TapeError::BadHeader(
            headers.iter().collect::<Vec<_>>().join(","),
        ));
    }

    let mut ticks = Vec::new();
    for (k, record) in rdr.records().enumerate() {
        let row = k + 1;
        let record = record.map_err(|e| TapeError::Row {
            row,
            message: e.to_string(),
        })?;
        let field = |col: usize, name: &'static str| -> Result<f64, TapeError> {
            let raw = record.get(col).ok_or(TapeError::Row {
                row,
                message: format!("missing {name}"),
            })?;
            raw.parse::<f64>().map_err(|_| TapeError::Row {
                row,
                message: format!("cannot parse {name} {raw:?}"),
            })
        };
        let time = field(time_col, "time")?;
        let price = field(price_col, "price")?;
        let volume = field(volume_col, "volume")?;
        let tick = match (format, value_col) {
            (ValueColumn::WithValue, Some(c)) => TradeTick {
                index: k,
                time,
                price,
                volume,
                value: field(c, "value")?,
            },
            _ => TradeTick::derived(k, time, price, volume),
        };
        tick.validate(row)?;
        if let Some(prev) = ticks.last() {
            let prev: &TradeTick = prev;
            if tick.time <= prev.time {
                return Err(TapeError::Row {
                    row,
                    message: format!("time {} is not after {}", tick.time, prev.time),
                });
            }
        }
        ticks.push(tick);
    }
    if ticks.is_empty() {
        return Err(TapeError::EmptyTape);
    }
    Ok(ticks)
}

/// Averaging window ("trading day") of `count` consecutive ticks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub start: usize,
    pub count: usize,
}

impl WindowSpec {
    pub fn new(start: usize, count: usize) -> Self {
        WindowSpec { start, count }
    }
}

/// Return lag `l` (τ = ε·l) and pair shift `j` (λ = ε·j), in ticks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LagSpec {
    pub lag: usize,
    pub shift: usize,
}

impl LagSpec {
    pub fn new(lag: usize, shift: usize) -> Self {
        LagSpec { lag, shift }
    }

    pub fn lag(lag: usize) -> Self {
        LagSpec { lag, shift: 0 }
    }
}

/// A window checked against a tape, with guaranteed history for its lag.
#[derive(Debug, Clone, Copy)]
pub struct ResolvedWindow<'a> {
    tape: &'a TradeTape,
    start: usize,
    count: usize,
    lag: usize,
}

impl<'a> ResolvedWindow<'a> {
    pub fn new(tape: &'a TradeTape, window: WindowSpec, lag: usize) -> Result<Self, TapeError> {
        if window.count < 2 {
            return Err(TapeError::WindowTooShort(window.count));
        }
        if lag == 0 {
            return Err(TapeError::ZeroLag);
        }
        if window.start + window.count > tape.len() {
            return Err(TapeError::WindowOutOfRange {
                start: window.start,
                count: window.count,
                len: tape.len(),
            });
        }
        if window.start < lag {
            return Err(TapeError::InsufficientHistory {
                start: window.start,
                lag,
            });
        }
        Ok(ResolvedWindow {
            tape,
            start: window.start,
            count: window.count,
            lag,
        })
    }

    pub fn tape(&self) -> &'a TradeTape {
        self.tape
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn lag(&self) -> usize {
        self.lag
    }

    pub fn spec(&self) -> WindowSpec {
        WindowSpec::new(self.start, self.count)
    }

    pub fn indices(&self) -> Range<usize> {
        self.start..self.start + self.count
    }

    /// Same window, different lag.
    pub fn with_lag(&self, lag: usize) -> Result<Self, TapeError> {
        Self::new(self.tape, self.spec(), lag)
    }

    pub fn prices(&self) -> impl Iterator<Item = f64> + 'a {
        let tape = self.tape;
        self.indices().map(move |i| tape.price(i))
    }

    pub fn lagged_prices(&self) -> impl Iterator<Item = f64> + 'a {
        let (tape, lag) = (self.tape, self.lag);
        self.indices().map(move |i| tape.price(i - lag))
    }

    pub fn volumes(&self) -> impl Iterator<Item = f64> + 'a {
        let tape = self.tape;
        self.indices().map(move |i| tape.volume(i))
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + 'a {
        let tape = self.tape;
        self.indices().map(move |i| tape.value(i))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIXTURE_A: &str = "time,price,volume\n0,2,10\n1,2,5\n2,4,10\n3,2,5\n";

    fn fixture() -> TradeTape {
        ingest(FIXTURE_A.as_bytes(), ValueColumn::DeriveValue, 1.0).unwrap()
    }

    #[test]
    fn derive_value_multiplies_price_and_volume() {
        let tape = fixture();
        let values: Vec<f64> = tape.ticks().iter().map(|t| t.value).collect();
        assert_eq!(values, vec![20.0, 10.0, 40.0, 10.0]);
        assert_eq!(tape.tick(3).index, 3);
    }

    #[test]
    fn zero_volume_is_rejected_with_row() {
        let csv = "time,price,volume\n0,2,10\n1,2,0\n";
        match ingest(csv.as_bytes(), ValueColumn::DeriveValue, 1.0) {
            Err(TapeError::NonPositiveField { row, field, .. }) => {
                assert_eq!(row, 2);
                assert_eq!(field, "volume");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn supplied_value_must_match() {
        let csv = "time,price,volume,value\n0,2,10,19.9\n";
        assert!(matches!(
            ingest(csv.as_bytes(), ValueColumn::WithValue, 1.0),
            Err(TapeError::ValueMismatch { row: 1, .. })
        ));
        let ok = "time,price,volume,value\n0,2,10,20\n";
        assert!(ingest(ok.as_bytes(), ValueColumn::WithValue, 1.0).is_ok());
    }

    #[test]
    fn non_finite_and_spacing_errors() {
        let nan = "time,price,volume\n0,NaN,10\n";
        assert!(matches!(
            ingest(nan.as_bytes(), ValueColumn::DeriveValue, 1.0),
            Err(TapeError::NonFinite {
                row: 1,
                field: "price"
            })
        ));
        let gap = "time,price,volume\n0,2,10\n1,2,10\n3,2,10\n";
        assert!(matches!(
            ingest(gap.as_bytes(), ValueColumn::DeriveValue, 1.0),
            Err(TapeError::NonUniformSpacing { row: 3, .. })
        ));
        let empty = "time,price,volume\n";
        assert!(matches!(
            ingest(empty.as_bytes(), ValueColumn::DeriveValue, 1.0),
            Err(TapeError::EmptyTape)
        ));
    }

    #[test]
    fn spacing_within_tolerance_is_accepted() {
        let csv = "time,price,volume\n0,2,10\n1.0000001,2,10\n2,2,10\n";
        assert!(ingest(csv.as_bytes(), ValueColumn::DeriveValue, 1.0).is_ok());
        assert_eq!(
            ingest_inferred(FIXTURE_A.as_bytes(), ValueColumn::DeriveValue)
                .unwrap()
                .epsilon(),
            1.0
        );
    }

    #[test]
    fn resolve_window_and_history() {
        let tape = fixture();
        let w = tape
            .resolve(WindowSpec::new(1, 3), LagSpec::lag(1))
            .unwrap();
        assert_eq!(w.indices(), 1..4);
        assert!(w.indices().all(|i| i >= w.lag()));
        assert!(matches!(
            tape.resolve(WindowSpec::new(0, 3), LagSpec::lag(1)),
            Err(TapeError::InsufficientHistory { start: 0, lag: 1 })
        ));
        assert!(matches!(
            tape.resolve(WindowSpec::new(1, 4), LagSpec::lag(1)),
            Err(TapeError::WindowOutOfRange { .. })
        ));
        assert!(matches!(
            tape.resolve(WindowSpec::new(1, 1), LagSpec::lag(1)),
            Err(TapeError::WindowTooShort(1))
        ));
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let tape =
            TradeTape::from_price_volume(&[1.0 / 3.0, 2.5, 1e-7], &[7.1, 0.3, 1e9], 0.5).unwrap();
        let mut buf = Vec::new();
        tape.write_csv(&mut buf, ValueColumn::DeriveValue).unwrap();
        let back = ingest(buf.as_slice(), ValueColumn::DeriveValue, 0.5).unwrap();
        assert_eq!(back, tape);
        assert!(header_has_value("time,price,volume,value"));
        assert!(!header_has_value("time,price,volume"));
    }
}
