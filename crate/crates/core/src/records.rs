//! Line-delimited, TAB-separated record encoding shared by the artifact files.
//!
//! Fields are escaped so that any label survives a round trip: backslash,
//! TAB, LF and CR become `\\`, `\t`, `\n` and `\r`.

use crate::error::{Error, Result};

pub fn escape(field: &str) -> String {
    let mut out = String::with_capacity(field.len());
    for c in field.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out
}

pub fn unescape(field: &str, line: usize) -> Result<String> {
    let mut out = String::with_capacity(field.len());
    let mut chars = field.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('\\') => out.push('\\'),
            Some('t') => out.push('\t'),
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            other => {
                return Err(Error::parse(
                    line,
                    format!("invalid escape sequence `\\{}`", other.map(String::from).unwrap_or_default()),
                ))
            }
        }
    }
    Ok(out)
}

/// Joins escaped fields with TAB.
pub fn join<I, S>(fields: I) -> String
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut line = String::new();
    for (i, f) in fields.into_iter().enumerate() {
        if i > 0 {
            line.push('\t');
        }
        line.push_str(&escape(f.as_ref()));
    }
    line
}

/// Splits a record line and unescapes every field.
pub fn split(line: &str, line_no: usize) -> Result<Vec<String>> {
    line.split('\t').map(|f| unescape(f, line_no)).collect()
}
