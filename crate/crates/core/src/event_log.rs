//! Event logs: parsing, validation and sentinel expansion.
//!
//! Two input formats are supported, both described in `docs/formats.md`:
//! a CSV export with a header row (one event per row) and a plain text
//! format with one trace per line.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::io::Read;
use std::sync::Arc;

use chrono::{DateTime, NaiveDate, NaiveDateTime};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Spelling of the artificial "begin" activity.
pub const BEGIN: &str = "^";
/// Spelling of the artificial "end" activity.
pub const END: &str = "$";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LogError {
    #[error("event log is empty")]
    EmptyLog,
    #[error("missing column `{0}` in CSV header")]
    MissingColumn(String),
    #[error("row {row}: cannot parse timestamp `{value}`")]
    BadTimestamp { row: usize, value: String },
    #[error("line {line}: reserved symbol `{symbol}` cannot be used as an activity")]
    ReservedSymbol { line: usize, symbol: String },
    #[error("activity names must be non-empty")]
    EmptyActivity,
    #[error("activity `{0}` cannot be written in the text format")]
    Unwritable(String),
    #[error("CSV error: {0}")]
    Csv(String),
    #[error("I/O error: {0}")]
    Io(String),
}

/// A logged activity symbol.
///
/// Cheap to clone; the name is shared.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Activity(Arc<str>);

impl Activity {
    /// Creates a user activity, rejecting empty names and the reserved
    /// sentinel spellings.
    pub fn new(name: &str) -> Result<Self, LogError> {
        if name.is_empty() {
            return Err(LogError::EmptyActivity);
        }
        if is_reserved(name) {
            return Err(LogError::ReservedSymbol { line: 0, symbol: name.to_string() });
        }
        Ok(Activity(Arc::from(name)))
    }

    pub fn begin() -> Self {
        Activity(Arc::from(BEGIN))
    }

    pub fn end() -> Self {
        Activity(Arc::from(END))
    }

    pub fn name(&self) -> &str {
        &self.0
    }

    pub fn is_sentinel(&self) -> bool {
        is_reserved(&self.0)
    }
}

impl fmt::Debug for Activity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

impl fmt::Display for Activity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Serialize for Activity {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for Activity {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let name = String::deserialize(d)?;
        Activity::new(&name).map_err(serde::de::Error::custom)
    }
}

pub fn is_reserved(name: &str) -> bool {
    name == BEGIN || name == END
}

/// An ordered sequence of activities executed by one case.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Trace {
    events: Vec<Activity>,
}

impl Trace {
    pub fn new(events: Vec<Activity>) -> Self {
        Trace { events }
    }

    /// Convenience constructor for tests and examples; panics on invalid names.
    pub fn from_names<S: AsRef<str>>(names: &[S]) -> Self {
        Trace {
            events: names
                .iter()
                .map(|n| Activity::new(n.as_ref()).expect("valid activity name"))
                .collect(),
        }
    }

    pub fn events(&self) -> &[Activity] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("<")?;
        for (i, a) in self.events.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str(">")
    }
}

impl FromIterator<Activity> for Trace {
    fn from_iter<I: IntoIterator<Item = Activity>>(iter: I) -> Self {
        Trace { events: iter.into_iter().collect() }
    }
}

/// A multiset of traces without sentinel symbols.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EventLog {
    traces: Vec<Trace>,
}

impl EventLog {
    /// Builds a log, rejecting any trace that mentions a reserved symbol.
    pub fn new(traces: Vec<Trace>) -> Result<Self, LogError> {
        for (i, t) in traces.iter().enumerate() {
            if let Some(a) = t.events.iter().find(|a| a.is_sentinel()) {
                return Err(LogError::ReservedSymbol { line: i + 1, symbol: a.to_string() });
            }
        }
        Ok(EventLog { traces })
    }

    /// Builds a log from whitespace-separated trace strings; panics on
    /// invalid input. Intended for tests and doc examples.
    pub fn from_strs(lines: &[&str]) -> Self {
        let traces = lines
            .iter()
            .map(|l| l.split_whitespace().map(|n| Activity::new(n).unwrap()).collect())
            .collect();
        EventLog::new(traces).unwrap()
    }

    pub fn traces(&self) -> &[Trace] {
        &self.traces
    }

    pub fn len(&self) -> usize {
        self.traces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.traces.is_empty()
    }

    /// Exact union of the activities occurring in the traces.
    pub fn alphabet(&self) -> BTreeSet<Activity> {
        self.traces.iter().flat_map(|t| t.events.iter().cloned()).collect()
    }

    pub fn has_empty_trace(&self) -> bool {
        self.traces.iter().any(Trace::is_empty)
    }

    /// Distinct traces with their multiplicities.
    pub fn multiset(&self) -> BTreeMap<&Trace, usize> {
        let mut m = BTreeMap::new();
        for t in &self.traces {
            *m.entry(t).or_insert(0) += 1;
        }
        m
    }

    /// Serializes to the text format, one trace per line, separated by
    /// `delimiter` (a single space when `None`).
    pub fn to_text(&self, delimiter: Option<char>) -> Result<String, LogError> {
        let sep = delimiter.unwrap_or(' ');
        let mut out = String::new();
        for t in &self.traces {
            if t.is_empty() {
                out.push_str(BEGIN);
                out.push(sep);
                out.push_str(END);
            } else {
                for (i, a) in t.events.iter().enumerate() {
                    let bad = match delimiter {
                        Some(d) => a.name().contains(d) || a.name() != a.name().trim(),
                        None => a.name().chars().any(char::is_whitespace),
                    };
                    if bad {
                        return Err(LogError::Unwritable(a.to_string()));
                    }
                    if i > 0 {
                        out.push(sep);
                    }
                    out.push_str(a.name());
                }
            }
            out.push('\n');
        }
        Ok(out)
    }
}

/// A log whose traces are bracketed by the Begin and End sentinels.
///
/// Only obtainable through [`expand_sentinels`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExpandedLog {
    traces: Vec<Trace>,
}

impl ExpandedLog {
    pub fn traces(&self) -> &[Trace] {
        &self.traces
    }

    pub fn alphabet(&self) -> BTreeSet<Activity> {
        self.traces.iter().flat_map(|t| t.events.iter().cloned()).collect()
    }
}

/// Brackets every trace `<a1..ak>` as `<^,a1..ak,$>`, keeping multiplicity.
pub fn expand_sentinels(log: &EventLog) -> ExpandedLog {
    let traces = log
        .traces
        .iter()
        .map(|t| {
            let mut events = Vec::with_capacity(t.len() + 2);
            events.push(Activity::begin());
            events.extend(t.events.iter().cloned());
            events.push(Activity::end());
            Trace { events }
        })
        .collect();
    ExpandedLog { traces }
}

/// Options for the plain text format.
#[derive(Clone, Debug, Default)]
pub struct TextFormat {
    /// Activity separator; any run of whitespace when `None`.
    pub delimiter: Option<char>,
}

/// Parses the text format: one trace per non-empty line. A line holding
/// exactly the two sentinels (`^ $`) denotes the empty trace.
pub fn parse_traces_text(input: &str, format: &TextFormat) -> Result<EventLog, LogError> {
    let mut traces = Vec::new();
    for (idx, raw) in input.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = match format.delimiter {
            Some(d) => line.split(d).map(str::trim).filter(|s| !s.is_empty()).collect(),
            None => line.split_whitespace().collect(),
        };
        if tokens == [BEGIN, END] {
            traces.push(Trace::default());
            continue;
        }
        let mut events = Vec::with_capacity(tokens.len());
        for tok in tokens {
            if is_reserved(tok) {
                return Err(LogError::ReservedSymbol { line: line_no, symbol: tok.to_string() });
            }
            events.push(Activity::new(tok)?);
        }
        traces.push(Trace { events });
    }
    EventLog::new(traces)
}

/// Column mapping for CSV logs.
#[derive(Clone, Debug)]
pub struct CsvConfig {
    pub case_column: String,
    pub activity_column: String,
    pub timestamp_column: Option<String>,
    /// Fall back to plain string ordering (with a warning) instead of
    /// failing when a timestamp does not parse.
    pub lenient_timestamps: bool,
}

impl Default for CsvConfig {
    fn default() -> Self {
        CsvConfig {
            case_column: "case".into(),
            activity_column: "activity".into(),
            timestamp_column: None,
            lenient_timestamps: false,
        }
    }
}

fn parse_timestamp(s: &str) -> Option<i64> {
    let s = s.trim();
    if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
        return dt.timestamp_nanos_opt();
    }
    for fmt in ["%Y-%m-%d %H:%M:%S%.f", "%Y-%m-%dT%H:%M:%S%.f"] {
        if let Ok(dt) = NaiveDateTime::parse_from_str(s, fmt) {
            return dt.and_utc().timestamp_nanos_opt();
        }
    }
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .ok()
        .and_then(|d| d.and_hms_opt(0, 0, 0))
        .and_then(|dt| dt.and_utc().timestamp_nanos_opt())
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum SortKey {
    Instant(i64),
    Text(String),
}

/// Parses a comma-delimited UTF-8 CSV log with a header row.
///
/// Events are grouped per case (cases in order of first appearance) and
/// ordered by timestamp when a timestamp column is configured, with row
/// order breaking ties.
pub fn parse_csv<R: Read>(reader: R, config: &CsvConfig) -> Result<EventLog, LogError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = match rdr.headers() {
        Ok(h) => h.clone(),
        Err(e) => return Err(LogError::Csv(e.to_string())),
    };
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(LogError::EmptyLog);
    }
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| LogError::MissingColumn(name.to_string()))
    };
    let case_col = column(&config.case_column)?;
    let act_col = column(&config.activity_column)?;
    let ts_col = config.timestamp_column.as_deref().map(column).transpose()?;

    // case id -> (first-seen rank, rows as (row number, raw timestamp, activity))
    let mut cases: HashMap<String, usize> = HashMap::new();
    let mut rows: Vec<Vec<(usize, Option<String>, Activity)>> = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| LogError::Csv(e.to_string()))?;
        let row = i + 1;
        let field = |c: usize| rec.get(c).unwrap_or("").trim().to_string();
        let case = field(case_col);
        let name = field(act_col);
        if is_reserved(&name) {
            return Err(LogError::ReservedSymbol { line: row + 1, symbol: name });
        }
        let activity = Activity::new(&name)?;
        let ts = ts_col.map(field);
        let slot = *cases.entry(case).or_insert_with(|| {
            rows.push(Vec::new());
            rows.len() - 1
        });
        rows[slot].push((row, ts, activity));
    }
    if rows.is_empty() {
        return Err(LogError::EmptyLog);
    }

    let mut parsed: Vec<Vec<(SortKey, usize, Activity)>> = Vec::with_capacity(rows.len());
    let mut fallback = false;
    for case_rows in &rows {
        let mut out = Vec::with_capacity(case_rows.len());
        for (row, ts, act) in case_rows {
            let key = match ts {
                None => SortKey::Instant(0),
                Some(raw) => match parse_timestamp(raw) {
                    Some(t) => SortKey::Instant(t),
                    None if config.lenient_timestamps => {
                        fallback = true;
                        SortKey::Text(raw.clone())
                    }
                    None => {
                        return Err(LogError::BadTimestamp { row: *row, value: raw.clone() })
                    }
                },
            };
            out.push((key, *row, act.clone()));
        }
        parsed.push(out);
    }
    if fallback {
        log::warn!("some timestamps are not RFC 3339; ordering all events by raw timestamp text");
        for (case_rows, out) in rows.iter().zip(parsed.iter_mut()) {
            for ((_, ts, _), entry) in case_rows.iter().zip(out.iter_mut()) {
                entry.0 = SortKey::Text(ts.clone().unwrap_or_default());
            }
        }
    }

    let traces = parsed
        .into_iter()
        .map(|mut events| {
            // stable: equal keys keep row order
            events.sort_by(|a, b| a.0.cmp(&b.0));
            events.into_iter().map(|(_, _, a)| a).collect()
        })
        .collect();
    EventLog::new(traces)
}

/// Reads a whole log from a reader in the text format.
pub fn read_traces_text<R: Read>(mut reader: R, format: &TextFormat) -> Result<EventLog, LogError> {
    let mut buf = String::new();
    reader.read_to_string(&mut buf).map_err(|e| LogError::Io(e.to_string()))?;
    parse_traces_text(&buf, format)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(log: &EventLog) -> Vec<Vec<String>> {
        log.traces()
            .iter()
            .map(|t| t.events().iter().map(|a| a.to_string()).collect())
            .collect()
    }

    #[test]
    fn csv_groups_by_case() {
        let data = "case,activity\nc1,a\nc1,b\nc2,a\n";
        let log = parse_csv(data.as_bytes(), &CsvConfig::default()).unwrap();
        assert_eq!(names(&log), vec![vec!["a", "b"], vec!["a"]]);
    }

    #[test]
    fn csv_sorts_by_timestamp_with_row_tiebreak() {
        let cfg = CsvConfig { timestamp_column: Some("time".into()), ..Default::default() };
        let data = "case,activity,time\n\
                    c1,b,2020-01-02T00:00:00Z\n\
                    c1,a,2020-01-01T00:00:00Z\n\
                    c2,x,2020-01-01T00:00:00Z\n\
                    c2,y,2020-01-01T00:00:00Z\n";
        let log = parse_csv(data.as_bytes(), &cfg).unwrap();
        assert_eq!(names(&log), vec![vec!["a", "b"], vec!["x", "y"]]);
    }

    #[test]
    fn csv_errors() {
        let err = parse_csv("case,act\nc1,a\n".as_bytes(), &CsvConfig::default()).unwrap_err();
        assert_eq!(err, LogError::MissingColumn("activity".into()));
        assert_eq!(parse_csv("".as_bytes(), &CsvConfig::default()).unwrap_err(), LogError::EmptyLog);
        assert_eq!(
            parse_csv("case,activity\n".as_bytes(), &CsvConfig::default()).unwrap_err(),
            LogError::EmptyLog
        );
        let cfg = CsvConfig { timestamp_column: Some("t".into()), ..Default::default() };
        let err = parse_csv("case,activity,t\nc1,a,2020-01-01\nc1,b,yesterday\n".as_bytes(), &cfg)
            .unwrap_err();
        assert_eq!(err, LogError::BadTimestamp { row: 2, value: "yesterday".into() });
    }

    #[test]
    fn csv_lenient_timestamps_fall_back_to_text() {
        let cfg = CsvConfig {
            timestamp_column: Some("t".into()),
            lenient_timestamps: true,
            ..Default::default()
        };
        let log = parse_csv("case,activity,t\nc1,a,step2\nc1,b,step1\n".as_bytes(), &cfg).unwrap();
        assert_eq!(names(&log), vec![vec!["b", "a"]]);
    }

    #[test]
    fn text_format() {
        let log = parse_traces_text("a b\na c\n\n", &TextFormat::default()).unwrap();
        assert_eq!(names(&log), vec![vec!["a", "b"], vec!["a", "c"]]);

        let dup = parse_traces_text("a b\na b", &TextFormat::default()).unwrap();
        assert_eq!(dup.len(), 2);
        assert_eq!(dup.multiset().values().copied().collect::<Vec<_>>(), vec![2]);

        let err = parse_traces_text("x\na ^ b", &TextFormat::default()).unwrap_err();
        assert_eq!(err, LogError::ReservedSymbol { line: 2, symbol: "^".into() });

        let csvish = parse_traces_text("a,b c,d", &TextFormat { delimiter: Some(',') }).unwrap();
        assert_eq!(names(&csvish), vec![vec!["a", "b c", "d"]]);

        let empty = parse_traces_text("^ $\na", &TextFormat::default()).unwrap();
        assert!(empty.traces()[0].is_empty());
    }

    #[test]
    fn sentinel_expansion() {
        let log = EventLog::from_strs(&["a b", "", "a"]);
        let ex = expand_sentinels(&log);
        let got: Vec<String> = ex.traces().iter().map(|t| t.to_string()).collect();
        assert_eq!(got, vec!["<^,a,b,$>", "<^,$>", "<^,a,$>"]);
        assert_eq!(ex.alphabet().len(), log.alphabet().len() + 2);
        // an expanded trace set is not a valid user log
        assert!(EventLog::new(ex.traces().to_vec()).is_err());
    }

    #[test]
    fn text_round_trip_keeps_empty_traces() {
        let log = EventLog::from_strs(&["a b", "", "c"]);
        let text = log.to_text(None).unwrap();
        assert_eq!(text, "a b\n^ $\nc\n");
        assert_eq!(parse_traces_text(&text, &TextFormat::default()).unwrap(), log);
    }
}
