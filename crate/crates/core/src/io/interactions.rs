use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use chrono::{DateTime, NaiveDate, NaiveDateTime};
use serde_json::{Map, Value};

use super::{ErrorCode, IoError};
use crate::signed::{Interaction, InteractionError, Sign};

const REQUIRED: [&str; 4] = ["rater", "author", "sign", "timestamp"];
const OPTIONAL: [&str; 2] = ["tags", "content_id"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InteractionFormat {
    Csv,
    Jsonl,
}

impl InteractionFormat {
    /// `.jsonl`/`.ndjson` are JSON lines, anything else CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl" | "ndjson") => InteractionFormat::Jsonl,
            _ => InteractionFormat::Csv,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Ingested {
    pub interactions: Vec<Interaction>,
    pub warnings: Vec<String>,
}

/// `+1`, `1`, `-1`, `pos`, `neg` (case-insensitive for the words).
pub fn parse_sign(s: &str) -> Option<Sign> {
    match s.trim().to_ascii_lowercase().as_str() {
        "+1" | "1" | "pos" | "positive" => Some(Sign::Positive),
        "-1" | "neg" | "negative" => Some(Sign::Negative),
        _ => None,
    }
}

/// Epoch seconds, RFC 3339, or a naive ISO-8601 date/datetime taken as UTC.
pub fn parse_timestamp(s: &str) -> Option<i64> {
    let s = s.trim();
    if let Ok(t) = s.parse::<i64>() {
        return Some(t);
    }
    if let Ok(t) = DateTime::parse_from_rfc3339(s) {
        return Some(t.timestamp());
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S"] {
        if let Ok(t) = NaiveDateTime::parse_from_str(s, fmt) {
            return Some(t.and_utc().timestamp());
        }
    }
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .ok()
        .and_then(|d| d.and_hms_opt(0, 0, 0))
        .map(|t| t.and_utc().timestamp())
}

fn split_tags(s: &str) -> BTreeSet<String> {
    s.split(';')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

fn build(
    line: u64,
    rater: &str,
    author: &str,
    sign: &str,
    timestamp: &str,
) -> Result<Interaction, IoError> {
    let sign = parse_sign(sign)
        .ok_or_else(|| IoError::row(line, ErrorCode::BadSign, format!("sign `{sign}` is not one of +1, -1, pos, neg")))?;
    let ts = parse_timestamp(timestamp)
        .ok_or_else(|| IoError::row(line, ErrorCode::BadTimestamp, format!("cannot parse timestamp `{timestamp}`")))?;
    Interaction::new(rater.trim(), author.trim(), sign, ts).map_err(|e| {
        let code = match e {
            InteractionError::SelfRating(_) => ErrorCode::SelfRating,
            InteractionError::NegativeTimestamp(_) => ErrorCode::BadTimestamp,
            InteractionError::InvalidNodeId(_) => ErrorCode::BadNodeId,
        };
        IoError::row(line, code, e.to_string())
    })
}

fn read_csv<R: Read>(reader: R) -> Result<Ingested, IoError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut records = rdr.records();
    let Some(header) = records.next().transpose()? else {
        return Ok(Ingested {
            interactions: Vec::new(),
            warnings: vec!["input is empty".into()],
        });
    };
    let mut columns = [None; 6];
    for (i, name) in header.iter().enumerate() {
        let name = name.trim().trim_start_matches('\u{feff}');
        let slot = REQUIRED
            .iter()
            .chain(&OPTIONAL)
            .position(|c| *c == name)
            .ok_or_else(|| IoError::row(1, ErrorCode::UnknownColumn, format!("unknown column `{name}`")))?;
        if columns[slot].replace(i).is_some() {
            return Err(IoError::row(1, ErrorCode::MalformedRow, format!("duplicate column `{name}`")));
        }
    }
    if let Some(missing) = REQUIRED.iter().enumerate().find(|(i, _)| columns[*i].is_none()) {
        return Err(IoError::row(
            1,
            ErrorCode::MissingColumn,
            format!("missing column `{}`", missing.1),
        ));
    }
    let col = |i: usize| columns[i].expect("required column present");

    let mut interactions = Vec::new();
    for record in records {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != header.len() {
            return Err(IoError::row(
                line,
                ErrorCode::MalformedRow,
                format!("expected {} fields, found {}", header.len(), record.len()),
            ));
        }
        let mut it = build(line, &record[col(0)], &record[col(1)], &record[col(2)], &record[col(3)])?;
        if let Some(i) = columns[4] {
            it.tags = split_tags(&record[i]);
        }
        if let Some(i) = columns[5] {
            let c = record[i].trim();
            if !c.is_empty() {
                it.content_id = Some(c.to_string());
            }
        }
        interactions.push(it);
    }
    let mut warnings = Vec::new();
    if interactions.is_empty() {
        warnings.push("input has a header but no rows".into());
    }
    Ok(Ingested {
        interactions,
        warnings,
    })
}

fn json_scalar(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

fn parse_json_object(line: u64, obj: &Map<String, Value>) -> Result<Interaction, IoError> {
    for key in obj.keys() {
        if !REQUIRED.contains(&key.as_str()) && !OPTIONAL.contains(&key.as_str()) {
            return Err(IoError::row(line, ErrorCode::UnknownColumn, format!("unknown field `{key}`")));
        }
    }
    let field = |name: &str, code: ErrorCode| -> Result<String, IoError> {
        let v = obj
            .get(name)
            .ok_or_else(|| IoError::row(line, ErrorCode::MissingColumn, format!("missing field `{name}`")))?;
        json_scalar(v).ok_or_else(|| IoError::row(line, code, format!("field `{name}` must be a string or number")))
    };
    let mut it = build(
        line,
        &field("rater", ErrorCode::BadNodeId)?,
        &field("author", ErrorCode::BadNodeId)?,
        &field("sign", ErrorCode::BadSign)?,
        &field("timestamp", ErrorCode::BadTimestamp)?,
    )?;
    match obj.get("tags") {
        None | Some(Value::Null) => {}
        Some(Value::String(s)) => it.tags = split_tags(s),
        Some(Value::Array(items)) => {
            for t in items {
                let Value::String(t) = t else {
                    return Err(IoError::row(line, ErrorCode::MalformedRow, "tags must be strings"));
                };
                if !t.trim().is_empty() {
                    it.tags.insert(t.trim().to_string());
                }
            }
        }
        Some(_) => return Err(IoError::row(line, ErrorCode::MalformedRow, "tags must be a list or string")),
    }
    match obj.get("content_id") {
        None | Some(Value::Null) => {}
        Some(v) => {
            it.content_id = Some(
                json_scalar(v)
                    .ok_or_else(|| IoError::row(line, ErrorCode::MalformedRow, "content_id must be a scalar"))?,
            )
        }
    }
    Ok(it)
}

fn read_jsonl<R: BufRead>(reader: R) -> Result<Ingested, IoError> {
    let mut interactions = Vec::new();
    for (i, text) in reader.lines().enumerate() {
        let text = text?;
        let line = i as u64 + 1;
        if text.trim().is_empty() {
            continue;
        }
        let value: Value = serde_json::from_str(&text)
            .map_err(|e| IoError::row(line, ErrorCode::MalformedRow, e.to_string()))?;
        let Value::Object(obj) = value else {
            return Err(IoError::row(line, ErrorCode::MalformedRow, "expected a JSON object"));
        };
        interactions.push(parse_json_object(line, &obj)?);
    }
    let warnings = if interactions.is_empty() {
        vec!["input is empty".into()]
    } else {
        Vec::new()
    };
    Ok(Ingested {
        interactions,
        warnings,
    })
}

/// Parses interactions from a reader. The first rejected row aborts the read.
pub fn read_interactions<R: Read>(reader: R, format: InteractionFormat) -> Result<Ingested, IoError> {
    match format {
        InteractionFormat::Csv => read_csv(reader),
        InteractionFormat::Jsonl => read_jsonl(BufReader::new(reader)),
    }
}

pub fn ingest(path: &Path, format: InteractionFormat) -> Result<Ingested, IoError> {
    let file = File::open(path).map_err(IoError::file(path))?;
    let ingested = read_interactions(file, format)?;
    for w in &ingested.warnings {
        log::warn!("{}: {w}", path.display());
    }
    Ok(ingested)
}

/// Writes `rater,author,sign,timestamp,tags`, plus `content_id` when any
/// interaction has one.
pub fn write_interactions_csv<W: Write>(writer: W, interactions: &[Interaction]) -> Result<(), IoError> {
    let with_content = interactions.iter().any(|it| it.content_id.is_some());
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["rater", "author", "sign", "timestamp", "tags"];
    if with_content {
        header.push("content_id");
    }
    w.write_record(&header)?;
    for it in interactions {
        let tags = it.tags.iter().cloned().collect::<Vec<_>>().join(";");
        let mut row = vec![
            it.rater.clone(),
            it.author.clone(),
            it.sign.to_string(),
            it.timestamp.to_string(),
            tags,
        ];
        if with_content {
            row.push(it.content_id.clone().unwrap_or_default());
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_interactions_jsonl<W: Write>(mut writer: W, interactions: &[Interaction]) -> Result<(), IoError> {
    for it in interactions {
        serde_json::to_writer(&mut writer, it).map_err(std::io::Error::from)?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn csv(text: &str) -> Result<Ingested, IoError> {
        read_interactions(text.as_bytes(), InteractionFormat::Csv)
    }

    fn code(r: Result<Ingested, IoError>) -> (u64, ErrorCode) {
        match r.unwrap_err() {
            IoError::Row { line, code, .. } => (line, code),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn format_example_row() {
        let got = csv("rater,author,sign,timestamp,tags\nu1,u2,-1,1612137600,covid;politics\n").unwrap();
        let want = Interaction::new("u1", "u2", Sign::Negative, 1_612_137_600)
            .unwrap()
            .with_tags(["covid", "politics"]);
        assert_eq!(got.interactions, vec![want]);
        assert!(got.warnings.is_empty());
    }

    #[test]
    fn rejected_rows_carry_codes_and_lines() {
        let head = "rater,author,sign,timestamp\n";
        assert_eq!(code(csv(&format!("{head}a,b,1,5\nu1,u1,1,5\n"))), (3, ErrorCode::SelfRating));
        assert_eq!(code(csv(&format!("{head}a,b,2,5\n"))), (2, ErrorCode::BadSign));
        assert_eq!(code(csv(&format!("{head}a,b,1,yesterday\n"))), (2, ErrorCode::BadTimestamp));
        assert_eq!(code(csv(&format!("{head}a,b,1\n"))), (2, ErrorCode::MalformedRow));
        assert_eq!(code(csv("rater,author,sign,timestamp,score\n")), (1, ErrorCode::UnknownColumn));
        assert_eq!(code(csv("rater,author,sign\n")), (1, ErrorCode::MissingColumn));
    }

    #[test]
    fn empty_input_warns() {
        let got = csv("").unwrap();
        assert!(got.interactions.is_empty());
        assert_eq!(got.warnings.len(), 1);
        let got = read_interactions(&b""[..], InteractionFormat::Jsonl).unwrap();
        assert_eq!(got.warnings.len(), 1);
    }

    #[test]
    fn sign_and_time_synonyms() {
        let got = csv(
            "timestamp,sign,author,rater\n\
             2021-02-01T00:00:00Z,pos,b,a\n\
             2021-02-01,neg,b,a\n\
             2021-02-01T01:00:00+01:00,+1,b,a\n\
             \"2021-02-01 00:00:10\",NEG,b,a\n",
        )
        .unwrap();
        let ts: Vec<i64> = got.interactions.iter().map(|i| i.timestamp).collect();
        assert_eq!(ts, vec![1_612_137_600, 1_612_137_600, 1_612_137_600, 1_612_137_610]);
        let signs: Vec<i8> = got.interactions.iter().map(|i| i.sign.as_i8()).collect();
        assert_eq!(signs, vec![1, -1, 1, -1]);
    }

    #[test]
    fn quoted_fields() {
        let got = csv("rater,author,sign,timestamp,tags,content_id\na,b,1,0,\"x;y z\",\"c,1\"\n").unwrap();
        let it = &got.interactions[0];
        assert_eq!(it.tags, ["x", "y z"].iter().map(|s| s.to_string()).collect());
        assert_eq!(it.content_id.as_deref(), Some("c,1"));
    }

    #[test]
    fn jsonl_rows() {
        let text = "{\"rater\":\"a\",\"author\":\"b\",\"sign\":-1,\"timestamp\":7,\"tags\":[\"t\"]}\n\n\
                    {\"rater\":\"a\",\"author\":\"b\",\"sign\":\"pos\",\"timestamp\":\"1970-01-01T00:00:09Z\",\"tags\":\"u;v\"}\n";
        let got = read_interactions(text.as_bytes(), InteractionFormat::Jsonl).unwrap();
        assert_eq!(got.interactions.len(), 2);
        assert_eq!(got.interactions[1].timestamp, 9);
        assert_eq!(got.interactions[1].tags.len(), 2);
        let bad = "{\"rater\":\"a\",\"author\":\"a\",\"sign\":1,\"timestamp\":0}\n";
        let err = read_interactions(bad.as_bytes(), InteractionFormat::Jsonl).unwrap_err();
        assert_eq!(err.code(), Some(ErrorCode::SelfRating));
        let bad = "{\"rater\":\"a\",\"author\":\"b\",\"sign\":1,\"timestamp\":0,\"x\":1}\n";
        let err = read_interactions(bad.as_bytes(), InteractionFormat::Jsonl).unwrap_err();
        assert_eq!(err.code(), Some(ErrorCode::UnknownColumn));
    }

    #[test]
    fn writers_round_trip() {
        let data = vec![
            Interaction::new("a", "b", Sign::Negative, 3).unwrap().with_tags(["p", "q"]),
            Interaction::new("c", "a", Sign::Positive, 1).unwrap().with_content_id("post,9"),
        ];
        let mut buf = Vec::new();
        write_interactions_csv(&mut buf, &data).unwrap();
        assert_eq!(read_interactions(&buf[..], InteractionFormat::Csv).unwrap().interactions, data);
        let mut buf = Vec::new();
        write_interactions_jsonl(&mut buf, &data).unwrap();
        assert_eq!(read_interactions(&buf[..], InteractionFormat::Jsonl).unwrap().interactions, data);
    }
}
