//! Post records and JSONL ingestion.
//!
//! One post per line:
//!
//! ```json
//! {"id": "p1", "title": "...", "body": "...", "author": "u1", "created_utc": 1620000000, "score": 12}
//! ```
//!
//! Only `id` is required. Missing text fields default to empty, missing
//! numbers to zero. Unknown keys are ignored and reported as warnings.

use std::collections::HashSet;
use std::io::BufRead;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

const KNOWN_KEYS: [&str; 6] = ["id", "title", "body", "author", "created_utc", "score"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Post {
    pub id: String,
    #[serde(default)]
    pub title: String,
    #[serde(default)]
    pub body: String,
    #[serde(default)]
    pub author: String,
    #[serde(default)]
    pub created_utc: i64,
    #[serde(default)]
    pub score: i64,
}

impl Post {
    pub fn new(id: impl Into<String>, title: impl Into<String>, body: impl Into<String>) -> Self {
        Post {
            id: id.into(),
            title: title.into(),
            body: body.into(),
            author: String::new(),
            created_utc: 0,
            score: 0,
        }
    }

    /// Text handed to embedding providers.
    pub fn embedding_text(&self) -> String {
        format!("{}\n{}", self.title, self.body)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejection {
    /// 1-based line number in the source stream.
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnknownKeyWarning {
    pub line: usize,
    pub key: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct ImportReport {
    pub imported: usize,
    pub rejected: Vec<Rejection>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<UnknownKeyWarning>,
}

/// Reads a JSONL stream into validated posts. Ids already present in
/// `existing` (or earlier in the same stream) are rejected as duplicates.
pub fn read_jsonl<R: BufRead>(source: R, existing: &HashSet<String>) -> Result<(Vec<Post>, ImportReport)> {
    let mut seen: HashSet<String> = HashSet::new();
    let mut posts = Vec::new();
    let mut report = ImportReport::default();
    for (i, line) in source.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::Io(format!("unreadable stream at line {line_no}: {e}")))?;
        if line.trim().is_empty() {
            continue;
        }
        match parse_record(&line, line_no, &mut report.warnings) {
            Ok(post) => {
                if existing.contains(&post.id) || !seen.insert(post.id.clone()) {
                    report.rejected.push(Rejection {
                        line: line_no,
                        reason: format!("duplicate id `{}`", post.id),
                    });
                    continue;
                }
                posts.push(post);
            }
            Err(reason) => report.rejected.push(Rejection { line: line_no, reason }),
        }
    }
    report.imported = posts.len();
    Ok((posts, report))
}

fn parse_record(line: &str, line_no: usize, warnings: &mut Vec<UnknownKeyWarning>) -> std::result::Result<Post, String> {
    let value: Value = serde_json::from_str(line).map_err(|e| format!("invalid JSON: {e}"))?;
    let Value::Object(map) = &value else {
        return Err("record is not a JSON object".to_string());
    };
    match map.get("id") {
        Some(Value::String(id)) if !id.is_empty() => {}
        Some(Value::String(_)) => return Err("empty id".to_string()),
        Some(_) => return Err("id must be a string".to_string()),
        None => return Err("record missing id".to_string()),
    }
    for key in map.keys().filter(|k| !KNOWN_KEYS.contains(&k.as_str())) {
        log::warn!("line {line_no}: ignoring unknown key `{key}`");
        warnings.push(UnknownKeyWarning {
            line: line_no,
            key: key.clone(),
        });
    }
    let post: Post = serde_json::from_value(value).map_err(|e| format!("invalid record: {e}"))?;
    if post.title.is_empty() && post.body.is_empty() {
        return Err("title and body are both empty".to_string());
    }
    Ok(post)
}
