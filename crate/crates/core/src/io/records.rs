//! Feedback and update JSON, trajectory CSV.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::experiments::TrajectoryPoint;
use crate::model::format_number;
use crate::validation::FeedbackObject;

/// One adaptor change as written by `learn` and read by `apply`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Update {
    pub adaptor: String,
    #[serde(serialize_with = "number")]
    pub old: f64,
    #[serde(serialize_with = "number")]
    pub new: f64,
}

/// Integral values are written without a fractional part.
pub(crate) fn number<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.fract() == 0.0 && v.abs() < 9.0e15 {
        s.serialize_i64(*v as i64)
    } else {
        s.serialize_f64(*v)
    }
}

pub(crate) fn optional_number<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(v) => number(v, s),
        None => s.serialize_none(),
    }
}

fn decode(e: serde_json::Error) -> Error {
    Error::Decode {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

fn to_pretty<T: Serialize>(value: &[T]) -> String {
    if value.is_empty() {
        return "[]\n".into();
    }
    let mut s = serde_json::to_string_pretty(value).expect("records serialize infallibly");
    s.push('\n');
    s
}

pub fn write_feedback(feedback: &[FeedbackObject]) -> String {
    to_pretty(feedback)
}

pub fn read_feedback(json: &str) -> Result<Vec<FeedbackObject>> {
    serde_json::from_str(json).map_err(decode)
}

pub fn write_updates(updates: &[Update]) -> String {
    to_pretty(updates)
}

pub fn read_updates(json: &str) -> Result<Vec<Update>> {
    serde_json::from_str(json).map_err(decode)
}

/// Writes `# rng: <rng>` followed by the `iteration,adaptor,value,target` table.
pub fn write_trajectory<W: Write>(mut out: W, rng: &str, points: &[TrajectoryPoint]) -> Result<()> {
    writeln!(out, "# rng: {rng}")?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["iteration", "adaptor", "value", "target"])?;
    for p in points {
        let target = p.target.map(format_number).unwrap_or_default();
        w.write_record([
            p.iteration.to_string(),
            p.adaptor.clone(),
            format_number(p.value),
            target,
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trajectory<R: Read>(input: R) -> Result<Vec<TrajectoryPoint>> {
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(input);
    let mut points = Vec::new();
    for row in r.records() {
        let row = row?;
        let field = |i: usize| row.get(i).unwrap_or_default();
        let bad = |what: &str| Error::Decode {
            line: row.position().map_or(0, |p| p.line() as usize),
            column: 1,
            message: format!("invalid {what}"),
        };
        points.push(TrajectoryPoint {
            iteration: field(0).parse().map_err(|_| bad("iteration"))?,
            adaptor: field(1).to_string(),
            value: field(2).parse().map_err(|_| bad("value"))?,
            target: match field(3) {
                "" => None,
                t => Some(t.parse().map_err(|_| bad("target"))?),
            },
        });
    }
    Ok(points)
}
