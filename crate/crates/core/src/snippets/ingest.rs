use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde_json::Value;

use super::Comment;
use crate::{Error, Result};

/// Body or author value of a comment removed from the forum.
pub const DELETED_MARKER: &str = "[deleted]";

/// A malformed dump record, by 1-based line number.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecordError {
    pub line: usize,
    pub message: String,
}

/// Result of a lenient dump parse.
#[derive(Debug, Default)]
pub struct DumpParse {
    pub comments: Vec<Comment>,
    pub errors: Vec<RecordError>,
    /// Records dropped because their body or author was the deleted marker.
    pub deleted: usize,
}

/// Parses a newline-delimited JSON comment dump.
///
/// Blank lines and lines starting with `#` are skipped. Malformed records are
/// collected in [`DumpParse::errors`] unless `strict` is set, in which case the
/// first one aborts the parse.
pub fn parse_comment_dump<R: BufRead>(reader: R, strict: bool) -> Result<DumpParse> {
    let mut out = DumpParse::default();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::Record {
            line: line_no,
            message: e.to_string(),
        })?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        match parse_record(trimmed) {
            Ok(c) if c.body == DELETED_MARKER || c.author == DELETED_MARKER => out.deleted += 1,
            Ok(c) => out.comments.push(c),
            Err(message) if strict => {
                return Err(Error::Record {
                    line: line_no,
                    message,
                })
            }
            Err(message) => out.errors.push(RecordError {
                line: line_no,
                message,
            }),
        }
    }
    Ok(out)
}

pub fn read_comment_dump(path: &Path, strict: bool) -> Result<DumpParse> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_comment_dump(BufReader::new(file), strict)
}

fn parse_record(line: &str) -> std::result::Result<Comment, String> {
    let value: Value = serde_json::from_str(line).map_err(|e| e.to_string())?;
    let obj = value.as_object().ok_or("record is not an object")?;

    let id = required_str(obj.get("id"), "id")?;
    let thread_id = match obj.get("link_id").or_else(|| obj.get("thread_id")) {
        Some(v) => required_str(Some(v), "link_id")?,
        None => return Err("missing field `link_id`".into()),
    };
    let body = match obj.get("body") {
        Some(Value::String(s)) => s.clone(),
        Some(_) => return Err("field `body` is not a string".into()),
        None => return Err("missing field `body`".into()),
    };
    let parent_id = match obj.get("parent_id") {
        None | Some(Value::Null) => None,
        Some(Value::String(s)) if s.is_empty() => None,
        // Reddit prefixes comment parents with their type tag.
        Some(Value::String(s)) => Some(s.strip_prefix("t1_").unwrap_or(s).to_string()),
        Some(_) => return Err("field `parent_id` is not a string".into()),
    };
    let author = match obj.get("author") {
        None | Some(Value::Null) => String::new(),
        Some(Value::String(s)) => s.clone(),
        Some(_) => return Err("field `author` is not a string".into()),
    };
    let created_utc = match obj.get("created_utc") {
        None | Some(Value::Null) => 0,
        Some(Value::Number(n)) => n
            .as_i64()
            .or_else(|| n.as_f64().map(|f| f as i64))
            .ok_or("field `created_utc` out of range")?,
        Some(Value::String(s)) => s
            .parse::<i64>()
            .map_err(|_| format!("field `created_utc` is not an integer: `{s}`"))?,
        Some(_) => return Err("field `created_utc` is not a number".into()),
    };

    Ok(Comment {
        id,
        parent_id,
        thread_id,
        author,
        body,
        created_utc,
    })
}

fn required_str(value: Option<&Value>, field: &str) -> std::result::Result<String, String> {
    match value {
        Some(Value::String(s)) if !s.is_empty() => Ok(s.clone()),
        Some(Value::String(_)) => Err(format!("field `{field}` is empty")),
        Some(Value::Number(n)) => Ok(n.to_string()),
        Some(_) => Err(format!("field `{field}` is not a string")),
        None => Err(format!("missing field `{field}`")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> DumpParse {
        parse_comment_dump(text.as_bytes(), false).unwrap()
    }

    #[test]
    fn minimal_record() {
        let out = parse(r#"{"id":"c1","link_id":"t","body":"hi"}"#);
        assert_eq!(out.comments.len(), 1);
        let c = &out.comments[0];
        assert_eq!(c.id, "c1");
        assert_eq!(c.thread_id, "t");
        assert_eq!(c.parent_id, None);
        assert_eq!(c.body, "hi");
    }

    #[test]
    fn deleted_body_or_author_is_dropped() {
        let out = parse(concat!(
            r#"{"id":"c1","link_id":"t","body":"[deleted]"}"#,
            "\n",
            r#"{"id":"c2","link_id":"t","body":"x","author":"[deleted]"}"#,
            "\n",
            r#"{"id":"c3","link_id":"t","body":"kept","author":"a"}"#,
        ));
        assert_eq!(out.deleted, 2);
        assert_eq!(out.comments.len(), 1);
        assert_eq!(out.comments[0].id, "c3");
    }

    #[test]
    fn malformed_records_are_reported_and_skipped() {
        let text = concat!(
            r#"{"link_id":"t","body":"no id"}"#,
            "\n",
            "not json\n",
            r#"{"id":"c2","link_id":"t","body":"ok"}"#,
        );
        let out = parse(text);
        assert_eq!(out.comments.len(), 1);
        assert_eq!(out.errors.len(), 2);
        assert_eq!(out.errors[0].line, 1);
        assert!(out.errors[0].message.contains("id"));
        assert_eq!(out.errors[1].line, 2);

        let err = parse_comment_dump(text.as_bytes(), true).unwrap_err();
        assert!(matches!(err, Error::Record { line: 1, .. }));
    }

    #[test]
    fn reddit_conventions() {
        let out = parse(
            r#"{"id":"c2","parent_id":"t1_c1","link_id":"t3_x","body":"b","author":"u","created_utc":"1438387200"}"#,
        );
        let c = &out.comments[0];
        assert_eq!(c.parent_id.as_deref(), Some("c1"));
        assert_eq!(c.created_utc, 1_438_387_200);
    }

    #[test]
    fn input_order_is_preserved() {
        let out = parse(concat!(
            r#"{"id":"b","link_id":"t","body":"1"}"#,
            "\n# comment line\n\n",
            r#"{"id":"a","link_id":"t","body":"2"}"#,
        ));
        let ids: Vec<_> = out.comments.iter().map(|c| c.id.as_str()).collect();
        assert_eq!(ids, ["b", "a"]);
    }
}
