use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use chrono::NaiveDate;
use serde_json::{Map, Value};
use thiserror::Error;

use crate::model::{Identifier, Model};
use crate::period::parse_date;

/// One log line: either a value submitted for a DIRECT base measurement, or a
/// raw field-tagged record counted by COUNT bases.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementRecord {
    pub timestamp: NaiveDate,
    pub body: RecordBody,
    /// 1-based line in the source log.
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RecordBody {
    Direct { base: Identifier, value: f64 },
    Raw { fields: BTreeMap<String, String> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IngestCode {
    Malformed,
    UnknownBase,
    InvalidDate,
}

impl fmt::Display for IngestCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IngestCode::Malformed => "I001",
            IngestCode::UnknownBase => "I002",
            IngestCode::InvalidDate => "I003",
        })
    }
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{code} {source_name}:{line}: {message}")]
    Line {
        code: IngestCode,
        source_name: String,
        line: usize,
        message: String,
    },
    #[error("cannot read {path}: {error}")]
    Io {
        path: String,
        error: std::io::Error,
    },
}

impl IngestError {
    pub fn code(&self) -> Option<IngestCode> {
        match self {
            IngestError::Line { code, .. } => Some(*code),
            IngestError::Io { .. } => None,
        }
    }

    pub fn line(&self) -> Option<usize> {
        match self {
            IngestError::Line { line, .. } => Some(*line),
            IngestError::Io { .. } => None,
        }
    }
}

/// Reads a JSON Lines log. DIRECT records must name a base measurement the
/// model declares. Stops at the first bad line.
pub fn ingest(path: &Path, model: &Model) -> Result<Vec<MeasurementRecord>, IngestError> {
    let text = std::fs::read_to_string(path).map_err(|error| IngestError::Io {
        path: path.display().to_string(),
        error,
    })?;
    ingest_str(&text, &path.display().to_string(), model)
}

/// Blank lines are skipped.
pub fn ingest_str(
    text: &str,
    source_name: &str,
    model: &Model,
) -> Result<Vec<MeasurementRecord>, IngestError> {
    let mut records = Vec::new();
    for (index, raw) in text.lines().enumerate() {
        let line = index + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let fail = |code: IngestCode, message: String| IngestError::Line {
            code,
            source_name: source_name.to_string(),
            line,
            message,
        };
        let record = parse_line(raw, model).map_err(|(code, message)| fail(code, message))?;
        records.push(MeasurementRecord {
            timestamp: record.0,
            body: record.1,
            line,
        });
    }
    Ok(records)
}

type LineError = (IngestCode, String);

fn malformed(message: impl Into<String>) -> LineError {
    (IngestCode::Malformed, message.into())
}

fn parse_line(raw: &str, model: &Model) -> Result<(NaiveDate, RecordBody), LineError> {
    let value: Value =
        serde_json::from_str(raw).map_err(|e| malformed(format!("not valid JSON: {e}")))?;
    let Value::Object(object) = value else {
        return Err(malformed("record is not a JSON object"));
    };
    if let Some(key) = object
        .keys()
        .find(|k| !matches!(k.as_str(), "timestamp" | "base" | "value" | "fields"))
    {
        return Err(malformed(format!("unexpected key {key:?}")));
    }
    let body = match (object.get("base"), object.get("fields")) {
        (Some(_), Some(_)) => return Err(malformed("record has both `base` and `fields`")),
        (None, None) => return Err(malformed("record has neither `base` nor `fields`")),
        (Some(base), None) => direct(&object, base, model)?,
        (None, Some(fields)) => {
            if object.contains_key("value") {
                return Err(malformed("raw records carry no `value`"));
            }
            raw_fields(fields)?
        }
    };
    let timestamp = match object.get("timestamp") {
        Some(Value::String(s)) => parse_date(s)
            .ok_or_else(|| (IngestCode::InvalidDate, format!("invalid date {s:?}")))?,
        Some(_) => return Err(malformed("`timestamp` is not a string")),
        None => return Err(malformed("missing `timestamp`")),
    };
    Ok((timestamp, body))
}

fn direct(object: &Map<String, Value>, base: &Value, model: &Model) -> Result<RecordBody, LineError> {
    let Value::String(name) = base else {
        return Err(malformed("`base` is not a string"));
    };
    let value = match object.get("value") {
        Some(Value::Number(n)) => n
            .as_f64()
            .filter(|v| v.is_finite())
            .ok_or_else(|| malformed("`value` is not a finite number"))?,
        Some(_) => return Err(malformed("`value` is not a number")),
        None => return Err(malformed("missing `value`")),
    };
    let id = Identifier::new(name.as_str())
        .ok()
        .filter(|id| model.base(id.as_str()).is_some())
        .ok_or_else(|| (IngestCode::UnknownBase, format!("unknown base measurement {name:?}")))?;
    Ok(RecordBody::Direct { base: id, value })
}

fn raw_fields(fields: &Value) -> Result<RecordBody, LineError> {
    let Value::Object(map) = fields else {
        return Err(malformed("`fields` is not an object"));
    };
    let mut out = BTreeMap::new();
    for (k, v) in map {
        let Value::String(s) = v else {
            return Err(malformed(format!("field {k:?} is not a string")));
        };
        out.insert(k.clone(), s.clone());
    }
    Ok(RecordBody::Raw { fields: out })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse;

    fn model() -> Model {
        parse("base bm_took { }\nbase bm_hires { }").0
    }

    #[test]
    fn empty_input() {
        assert!(ingest_str("", "log", &model()).unwrap().is_empty());
    }

    #[test]
    fn both_record_shapes() {
        let text = "{\"timestamp\":\"2014-09-01\",\"base\":\"bm_hires\",\"value\":12}\n\n\
                    {\"timestamp\":\"2014-09-02\",\"fields\":{\"event\":\"new_hire_training\"}}\n";
        let records = ingest_str(text, "log", &model()).unwrap();
        assert_eq!(records.len(), 2);
        assert_eq!(records[1].line, 3);
        assert!(matches!(&records[0].body, RecordBody::Direct { value, .. } if *value == 12.0));
    }

    #[test]
    fn error_codes_and_lines() {
        let m = model();
        let ok = "{\"timestamp\":\"2014-09-01\",\"base\":\"bm_took\",\"value\":1}\n";
        let bad_value = format!("{ok}{{\"base\":\"bm_took\",\"value\":\"x\"}}\n");
        let e = ingest_str(&bad_value, "log", &m).unwrap_err();
        assert_eq!((e.code(), e.line()), (Some(IngestCode::Malformed), Some(2)));
        assert!(e.to_string().starts_with("I001 log:2"));

        let unknown = "{\"timestamp\":\"2014-09-01\",\"base\":\"bm_nope\",\"value\":1}";
        assert_eq!(ingest_str(unknown, "log", &m).unwrap_err().code(), Some(IngestCode::UnknownBase));

        let date = "{\"timestamp\":\"2014-02-30\",\"fields\":{}}";
        assert_eq!(ingest_str(date, "log", &m).unwrap_err().code(), Some(IngestCode::InvalidDate));
        assert_eq!(ingest_str("[1]", "log", &m).unwrap_err().code(), Some(IngestCode::Malformed));
    }
}
