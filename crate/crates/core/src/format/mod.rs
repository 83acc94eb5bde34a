//! Sectioned text formats for scenarios (`.scn`) and dynamics models (`.model`).
//!
//! Both share the same lexical layer: `[section]` headers, one entry per
//! line, `#` comments, blank lines ignored. Section order is irrelevant;
//! a section may appear at most once.

mod model;
mod scenario;

use std::fmt;

use thiserror::Error;

pub use model::{parse_model, ModelFile};
pub use scenario::{format_behavior_document, parse_scenario, ScenarioFile, MAX_CONTEXTS};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LoadError {
    #[error("parse error at {0}")]
    Parse(#[from] ParseError),
    #[error("{}", semantic_message(.line, .message))]
    Semantic { line: Option<usize>, message: String },
    #[error("seed configuration is not admissible")]
    InadmissibleSeed,
}

fn semantic_message(line: &Option<usize>, message: &str) -> String {
    match line {
        Some(l) => format!("line {l}: {message}"),
        None => message.to_string(),
    }
}

impl LoadError {
    pub(crate) fn at(line: usize, message: impl Into<String>) -> Self {
        LoadError::Semantic {
            line: Some(line),
            message: message.into(),
        }
    }

    pub(crate) fn global(message: impl Into<String>) -> Self {
        LoadError::Semantic {
            line: None,
            message: message.into(),
        }
    }
}

/// One content line with its 1-based number and the column of its first byte.
#[derive(Debug, Clone)]
pub(crate) struct Line<'a> {
    pub number: usize,
    pub text: &'a str,
    /// 1-based column of `text[0]` in the source line.
    pub column: usize,
}

impl<'a> Line<'a> {
    pub fn error(&self, offset: usize, message: impl Into<String>) -> ParseError {
        ParseError {
            line: self.number,
            column: self.column + offset,
            message: message.into(),
        }
    }

    /// Column of a subslice of `text`.
    pub fn offset_of(&self, part: &str) -> usize {
        (part.as_ptr() as usize).saturating_sub(self.text.as_ptr() as usize)
    }

    pub fn error_at(&self, part: &str, message: impl Into<String>) -> ParseError {
        self.error(self.offset_of(part), message)
    }

    /// `key: rest`, both trimmed.
    pub fn key_value(&self) -> Result<(&'a str, &'a str), ParseError> {
        let colon = self
            .text
            .find(':')
            .ok_or_else(|| self.error(self.text.len(), "expected `key: value`"))?;
        let key = self.text[..colon].trim();
        if key.is_empty() {
            return Err(self.error(0, "missing key before `:`"));
        }
        Ok((key, self.text[colon + 1..].trim()))
    }

    pub fn sub(&self, part: &'a str) -> Line<'a> {
        Line {
            number: self.number,
            text: part,
            column: self.column + self.offset_of(part),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Section<'a> {
    pub name: &'a str,
    pub line: usize,
    pub lines: Vec<Line<'a>>,
}

#[derive(Debug, Clone)]
pub(crate) struct Document<'a> {
    pub sections: Vec<Section<'a>>,
}

impl<'a> Document<'a> {
    pub fn parse(src: &'a str, known: &[&str]) -> Result<Self, ParseError> {
        let mut sections: Vec<Section<'a>> = Vec::new();
        for (i, raw) in src.lines().enumerate() {
            let number = i + 1;
            let content = raw.split('#').next().unwrap_or("");
            let trimmed = content.trim();
            if trimmed.is_empty() {
                continue;
            }
            let column = content.find(trimmed).unwrap_or(0) + 1;
            let line = Line {
                number,
                text: trimmed,
                column,
            };
            if let Some(rest) = trimmed.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| line.error(trimmed.len(), "expected `]` closing the section header"))?
                    .trim();
                if !known.contains(&name) {
                    return Err(line.error(1, format!("unknown section [{name}]")));
                }
                if sections.iter().any(|s| s.name == name) {
                    return Err(line.error(1, format!("section [{name}] appears twice")));
                }
                sections.push(Section {
                    name,
                    line: number,
                    lines: Vec::new(),
                });
                continue;
            }
            match sections.last_mut() {
                Some(s) => s.lines.push(line),
                None => return Err(line.error(0, "content before the first section header")),
            }
        }
        Ok(Document { sections })
    }

    pub fn section(&self, name: &str) -> Option<&Section<'a>> {
        self.sections.iter().find(|s| s.name == name)
    }
}

/// Whitespace-separated tokens of a line, as subslices.
pub(crate) fn tokens(text: &str) -> Vec<&str> {
    text.split_whitespace().collect()
}

pub(crate) fn parse_usize(line: &Line<'_>, tok: &str) -> Result<usize, ParseError> {
    tok.parse()
        .map_err(|_| line.error_at(tok, format!("expected a nonnegative integer, found `{tok}`")))
}

/// `lo..hi`, inclusive.
pub(crate) fn parse_range(line: &Line<'_>, tok: &str) -> Result<(u32, u32), ParseError> {
    let (a, b) = tok
        .split_once("..")
        .ok_or_else(|| line.error_at(tok, format!("expected a range `lo..hi`, found `{tok}`")))?;
    let lo = a.parse().map_err(|_| line.error_at(tok, "bad range start"))?;
    let hi = b.parse().map_err(|_| line.error_at(b, "bad range end"))?;
    Ok((lo, hi))
}

pub(crate) struct Joined<'a, T: fmt::Display>(pub &'a [T], pub &'a str);

impl<T: fmt::Display> fmt::Display for Joined<'_, T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(self.1)?;
            }
            write!(f, "{x}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_and_comments() {
        let src = "# header\n[a]\n  x: 1   # trailing\n\n[b]\ny\n";
        let d = Document::parse(src, &["a", "b"]).unwrap();
        assert_eq!(d.sections.len(), 2);
        let a = d.section("a").unwrap();
        assert_eq!(a.lines[0].text, "x: 1");
        assert_eq!(a.lines[0].number, 3);
        assert_eq!(a.lines[0].column, 3);
        assert_eq!(a.lines[0].key_value().unwrap(), ("x", "1"));
    }

    #[test]
    fn errors_carry_positions() {
        let e = Document::parse("[a]\n[zz]\n", &["a"]).unwrap_err();
        assert_eq!((e.line, e.column), (2, 2));
        let e = Document::parse("x\n", &["a"]).unwrap_err();
        assert_eq!(e.line, 1);
        let e = Document::parse("[a]\n[a]\n", &["a"]).unwrap_err();
        assert!(e.message.contains("twice"));
        let e = Document::parse("[a\n", &["a"]).unwrap_err();
        assert_eq!(e.column, 3);
    }

    #[test]
    fn sub_lines_keep_columns() {
        let d = Document::parse("[a]\n  k: v w\n", &["a"]).unwrap();
        let l = &d.section("a").unwrap().lines[0];
        let (_, v) = l.key_value().unwrap();
        let s = l.sub(v);
        assert_eq!(s.column, 6);
        let toks = tokens(s.text);
        assert_eq!(s.error_at(toks[1], "x").column, 8);
    }
}
