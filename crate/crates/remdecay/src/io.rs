//! Event CSV input and output with a dense actor re-indexing.

use std::collections::{BTreeSet, HashMap};
use std::io::{Read, Write};

use remdecay_core::events::{spread_ties, Event, EventError, EventSequence};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LoadError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("missing column `{0}` in the header")]
    MissingColumn(String),
    #[error("row {row}: cannot parse time `{value}`")]
    Time { row: u64, value: String },
    #[error("row {row}: empty actor label")]
    EmptyLabel { row: u64 },
    #[error("row {row}: self-loop on actor `{label}`")]
    SelfLoop { row: u64, label: String },
    #[error("row {row}: time {time} is before the previous row's {previous}")]
    Unsorted { row: u64, time: f64, previous: f64 },
    #[error("row {row}: actor `{label}` is not in the label map")]
    UnknownLabel { row: u64, label: String },
    #[error("row {row}: tied with the previous row at time {time}")]
    Tie { row: u64, time: f64 },
    #[error("no events in input")]
    Empty,
    #[error("need at least 2 actors, found {0}")]
    TooFewActors(usize),
    #[error(transparent)]
    Events(#[from] EventError),
}

/// Header names of the three required columns.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnMap {
    pub time: String,
    pub sender: String,
    pub receiver: String,
}

impl Default for ColumnMap {
    fn default() -> Self {
        Self {
            time: "time".into(),
            sender: "sender".into(),
            receiver: "receiver".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "lowercase")]
pub enum TiePolicy {
    /// Spread each tied block evenly over `unit` time units.
    Spread { unit: f64 },
    /// Treat any tie as an error.
    Reject,
}

impl Default for TiePolicy {
    fn default() -> Self {
        Self::Spread { unit: 1.0 }
    }
}

/// A sequence together with the original actor labels, `labels[id]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedEvents {
    pub sequence: EventSequence,
    pub labels: Vec<String>,
}

/// Sort labels numerically when every label is an integer, otherwise
/// lexicographically.
pub fn order_labels(labels: impl IntoIterator<Item = String>) -> Vec<String> {
    let set: BTreeSet<String> = labels.into_iter().collect();
    let mut v: Vec<String> = set.into_iter().collect();
    let numeric: Option<Vec<i128>> = v.iter().map(|s| s.parse().ok()).collect();
    if let Some(keys) = numeric {
        let mut paired: Vec<_> = keys.into_iter().zip(v).collect();
        paired.sort();
        v = paired.into_iter().map(|(_, s)| s).collect();
    }
    v
}

struct Row {
    line: u64,
    time: f64,
    sender: String,
    receiver: String,
}

/// Read events from CSV. With `known_labels` the actor ids follow that map
/// (and actors without events are kept); otherwise the labels seen in the
/// file are ordered by [`order_labels`]. Times must be nondecreasing.
pub fn load_events<R: Read>(
    source: R,
    columns: &ColumnMap,
    ties: TiePolicy,
    known_labels: Option<&[String]>,
) -> Result<LoadedEvents, LoadError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(source);
    let headers = reader.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| LoadError::MissingColumn(name.into()))
    };
    let (ti, si, ri) = (col(&columns.time)?, col(&columns.sender)?, col(&columns.receiver)?);

    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |i: usize| record.get(i).unwrap_or("").to_string();
        let raw_time = field(ti);
        let time: f64 = raw_time
            .parse()
            .ok()
            .filter(|t: &f64| t.is_finite() && *t >= 0.0)
            .ok_or(LoadError::Time {
                row: line,
                value: raw_time.clone(),
            })?;
        let (sender, receiver) = (field(si), field(ri));
        if sender.is_empty() || receiver.is_empty() {
            return Err(LoadError::EmptyLabel { row: line });
        }
        if sender == receiver {
            return Err(LoadError::SelfLoop { row: line, label: sender });
        }
        if let Some(prev) = rows.last().map(|r: &Row| r.time) {
            if time < prev {
                return Err(LoadError::Unsorted {
                    row: line,
                    time,
                    previous: prev,
                });
            }
            if time == prev && ties == TiePolicy::Reject {
                return Err(LoadError::Tie { row: line, time });
            }
        }
        rows.push(Row {
            line,
            time,
            sender,
            receiver,
        });
    }
    if rows.is_empty() {
        return Err(LoadError::Empty);
    }

    let labels = match known_labels {
        Some(l) => l.to_vec(),
        None => order_labels(rows.iter().flat_map(|r| [r.sender.clone(), r.receiver.clone()])),
    };
    if labels.len() < 2 {
        return Err(LoadError::TooFewActors(labels.len()));
    }
    let index: HashMap<&str, u32> = labels.iter().enumerate().map(|(i, s)| (s.as_str(), i as u32)).collect();
    let id = |row: &Row, label: &str| {
        index.get(label).copied().ok_or_else(|| LoadError::UnknownLabel {
            row: row.line,
            label: label.into(),
        })
    };
    let mut events = Vec::with_capacity(rows.len());
    for r in &rows {
        events.push(Event::new(id(r, &r.sender)?, id(r, &r.receiver)?, r.time));
    }
    if let TiePolicy::Spread { unit } = ties {
        events = spread_ties(events, unit)?;
    }
    let sequence = EventSequence::new(events, labels.len(), 0.0)?;
    Ok(LoadedEvents { sequence, labels })
}

/// Write `time,sender,receiver` rows. Times use the shortest representation
/// that parses back to the same value, so a reload is exact.
pub fn write_events<W: Write>(sink: W, seq: &EventSequence, labels: &[String]) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(["time", "sender", "receiver"])?;
    for e in seq.events() {
        w.write_record([
            e.time.to_string(),
            labels[e.sender as usize].clone(),
            labels[e.receiver as usize].clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Labels `"0".."n-1"` for generated sequences.
pub fn numeric_labels(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn load(text: &str, ties: TiePolicy) -> Result<LoadedEvents, LoadError> {
        load_events(text.as_bytes(), &ColumnMap::default(), ties, None)
    }

    #[test]
    fn three_distinct_rows() {
        let got = load("time,sender,receiver\n1,a,b\n2,b,c\n3.5,c,a\n", TiePolicy::default()).unwrap();
        assert_eq!(got.sequence.len(), 3);
        assert_eq!(got.labels, ["a", "b", "c"]);
        assert_eq!(got.sequence.events()[2], Event::new(2, 0, 3.5));
    }

    #[test]
    fn ties_spread_over_the_day() {
        let got = load("time,sender,receiver\n7,a,b\n7,b,a\n7,a,c\n", TiePolicy::default()).unwrap();
        let times: Vec<f64> = got.sequence.events().iter().map(|e| e.time).collect();
        assert_eq!(times, [7.25, 7.5, 7.75]);
        assert!(matches!(
            load("time,sender,receiver\n7,a,b\n7,b,a\n", TiePolicy::Reject),
            Err(LoadError::Tie { row: 3, .. })
        ));
    }

    #[test]
    fn errors_carry_row_numbers() {
        let bad_time = load("time,sender,receiver\n1,a,b\nx,b,a\n", TiePolicy::default());
        assert!(matches!(bad_time, Err(LoadError::Time { row: 3, .. })));
        let self_loop = load("time,sender,receiver\n1,a,b\n2,c,c\n", TiePolicy::default());
        assert!(matches!(self_loop, Err(LoadError::SelfLoop { row: 3, .. })));
        let unsorted = load("time,sender,receiver\n1,a,b\n3,b,a\n2,a,b\n", TiePolicy::default());
        assert!(matches!(unsorted, Err(LoadError::Unsorted { row: 4, .. })));
        let missing = load("t,sender,receiver\n1,a,b\n", TiePolicy::default());
        assert!(matches!(missing, Err(LoadError::MissingColumn(c)) if c == "time"));
    }

    #[test]
    fn custom_columns_and_numeric_labels() {
        let cols = ColumnMap {
            time: "day".into(),
            sender: "from".into(),
            receiver: "to".into(),
        };
        let text = "to,day,from\n10,0.5,2\n2,1.5,10\n9,2,2\n";
        let got = load_events(text.as_bytes(), &cols, TiePolicy::default(), None).unwrap();
        assert_eq!(got.labels, ["2", "9", "10"]);
        assert_eq!(got.sequence.events()[0], Event::new(0, 2, 0.5));
    }

    #[test]
    fn ten_actors_give_ninety_dyads() {
        let mut text = String::from("time,sender,receiver\n");
        for i in 0..10 {
            text += &format!("{},{},{}\n", i + 1, i, (i + 1) % 10);
        }
        let got = load(&text, TiePolicy::default()).unwrap();
        let rs = remdecay_core::RiskSet::new(got.labels.len()).unwrap();
        assert_eq!(rs.len(), 90);
    }

    #[test]
    fn write_then_load_is_identity() {
        let events = vec![Event::new(0, 1, 0.1), Event::new(2, 0, 1.0 / 3.0), Event::new(1, 2, 2.718281828459045)];
        let seq = EventSequence::new(events, 3, 0.0).unwrap();
        let labels = numeric_labels(3);
        let mut buf = Vec::new();
        write_events(&mut buf, &seq, &labels).unwrap();
        let back = load_events(&buf[..], &ColumnMap::default(), TiePolicy::Reject, Some(&labels)).unwrap();
        assert_eq!(back.sequence, seq);
    }
}
