//! Statement-level view of ASP source text.
//!
//! Nothing here understands rules. The scanner only knows enough lexical
//! structure (strings, line and block comments, `..` ranges, `#script`
//! blocks, `#external` value annotations) to find where statements start
//! and end, so callers can rewrite individual statements and leave every
//! other byte untouched.

use std::fmt;

use thiserror::Error;

use crate::term::{parse_term, Term};

/// Ordered, labelled pieces of ASP source.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ProgramBundle {
    parts: Vec<ProgramPart>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProgramPart {
    pub origin: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("origin label `{0}` already used in program bundle")]
pub struct DuplicateOrigin(pub String);

impl ProgramBundle {
    pub fn new() -> Self {
        Self::default()
    }

    /// Single-part bundle.
    pub fn from_text(origin: impl Into<String>, text: impl Into<String>) -> Self {
        let mut b = Self::new();
        b.parts.push(ProgramPart {
            origin: origin.into(),
            text: text.into(),
        });
        b
    }

    pub fn push(
        &mut self,
        origin: impl Into<String>,
        text: impl Into<String>,
    ) -> Result<(), DuplicateOrigin> {
        let origin = origin.into();
        if self.parts.iter().any(|p| p.origin == origin) {
            return Err(DuplicateOrigin(origin));
        }
        self.parts.push(ProgramPart {
            origin,
            text: text.into(),
        });
        Ok(())
    }

    /// Builder form of [`push`](Self::push); panics on duplicate labels.
    pub fn with(mut self, origin: impl Into<String>, text: impl Into<String>) -> Self {
        self.push(origin, text).expect("duplicate origin label");
        self
    }

    /// Appends all parts of `other`, keeping order.
    pub fn extend(&mut self, other: &ProgramBundle) -> Result<(), DuplicateOrigin> {
        for p in &other.parts {
            self.push(p.origin.clone(), p.text.clone())?;
        }
        Ok(())
    }

    pub fn parts(&self) -> &[ProgramPart] {
        &self.parts
    }

    pub fn parts_mut(&mut self) -> &mut [ProgramPart] {
        &mut self.parts
    }

    pub fn is_empty(&self) -> bool {
        self.parts.iter().all(|p| p.text.trim().is_empty())
    }

    /// Concatenated source plus the starting line (1-based) of each part.
    pub fn concatenate(&self) -> (String, Vec<(usize, &str)>) {
        let mut text = String::new();
        let mut starts = Vec::with_capacity(self.parts.len());
        let mut line = 1;
        for p in &self.parts {
            starts.push((line, p.origin.as_str()));
            text.push_str(&p.text);
            if !p.text.ends_with('\n') {
                text.push('\n');
            }
            line += p.text.lines().count().max(1);
        }
        (text, starts)
    }

    /// Maps a line of the concatenated text back to (origin, local line).
    pub fn locate(&self, line: usize) -> Option<(String, usize)> {
        let (_, starts) = self.concatenate();
        starts
            .iter()
            .rev()
            .find(|(start, _)| *start <= line)
            .map(|(start, origin)| (origin.to_string(), line - start + 1))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScanError {
    #[error("unterminated string starting at byte {0}")]
    UnterminatedString(usize),
    #[error("unterminated block comment starting at byte {0}")]
    UnterminatedComment(usize),
    #[error("statement starting at byte {0} has no terminating period")]
    UnterminatedStatement(usize),
}

/// A statement occupying `start..end` (end is one past the final `.` or
/// past a trailing `[...]` annotation).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Statement {
    pub start: usize,
    pub end: usize,
}

impl Statement {
    pub fn text<'a>(&self, src: &'a str) -> &'a str {
        &src[self.start..self.end]
    }
}

/// Splits `src` into statements. Bytes between statements are whitespace
/// and comments only.
pub fn statements(src: &str) -> Result<Vec<Statement>, ScanError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let mut start: Option<usize> = None;
    while i < bytes.len() {
        let b = bytes[i];
        match b {
            b'%' => {
                i = skip_comment(bytes, i)?;
                continue;
            }
            b'"' => {
                start.get_or_insert(i);
                i = skip_string(bytes, i)?;
                continue;
            }
            b if b.is_ascii_whitespace() => {
                i += 1;
                continue;
            }
            _ => {}
        }
        let s = *start.get_or_insert(i);
        if b == b'#' && i == s && src[i..].starts_with("#script") {
            let end = find_script_end(src, i).ok_or(ScanError::UnterminatedStatement(i))?;
            out.push(Statement { start: s, end });
            start = None;
            i = end;
            continue;
        }
        if b == b'.' {
            let next = bytes.get(i + 1).copied();
            let prev = if i > 0 { Some(bytes[i - 1]) } else { None };
            if next == Some(b'.') || prev == Some(b'.') {
                i += 1;
                continue;
            }
            let mut end = i + 1;
            if src[s..].starts_with("#external") {
                end = external_annotation_end(bytes, end);
            }
            out.push(Statement { start: s, end });
            start = None;
            i = end;
            continue;
        }
        i += 1;
    }
    if let Some(s) = start {
        return Err(ScanError::UnterminatedStatement(s));
    }
    Ok(out)
}

fn skip_comment(bytes: &[u8], i: usize) -> Result<usize, ScanError> {
    if bytes.get(i + 1) == Some(&b'*') {
        let mut j = i + 2;
        while j + 1 < bytes.len() {
            if bytes[j] == b'*' && bytes[j + 1] == b'%' {
                return Ok(j + 2);
            }
            j += 1;
        }
        Err(ScanError::UnterminatedComment(i))
    } else {
        let mut j = i;
        while j < bytes.len() && bytes[j] != b'\n' {
            j += 1;
        }
        Ok(j)
    }
}

fn skip_string(bytes: &[u8], i: usize) -> Result<usize, ScanError> {
    let mut j = i + 1;
    while j < bytes.len() {
        match bytes[j] {
            b'\\' => j += 2,
            b'"' => return Ok(j + 1),
            _ => j += 1,
        }
    }
    Err(ScanError::UnterminatedString(i))
}

fn find_script_end(src: &str, from: usize) -> Option<usize> {
    let rel = src[from..].find("#end")?;
    let mut j = from + rel + 4;
    let bytes = src.as_bytes();
    while j < bytes.len() && bytes[j].is_ascii_whitespace() {
        j += 1;
    }
    (bytes.get(j) == Some(&b'.')).then_some(j + 1)
}

fn external_annotation_end(bytes: &[u8], end: usize) -> usize {
    let mut j = end;
    while j < bytes.len() && (bytes[j] == b' ' || bytes[j] == b'\t') {
        j += 1;
    }
    if bytes.get(j) == Some(&b'[') {
        if let Some(close) = bytes[j..].iter().position(|&b| b == b']') {
            return j + close + 1;
        }
    }
    end
}

/// Statement text with comments removed and whitespace collapsed outside
/// strings.
pub fn strip_comments(stmt: &str) -> String {
    let bytes = stmt.as_bytes();
    let mut out = String::with_capacity(stmt.len());
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'%' => i = skip_comment(bytes, i).unwrap_or(bytes.len()),
            b'"' => {
                let j = skip_string(bytes, i).unwrap_or(bytes.len());
                out.push_str(&stmt[i..j]);
                i = j;
            }
            _ => {
                let ch = stmt[i..].chars().next().unwrap();
                out.push(ch);
                i += ch.len_utf8();
            }
        }
    }
    out
}

/// Classification of one statement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StatementKind {
    /// A ground fact with a single head atom.
    Fact(Term),
    Directive,
    /// Anything else: rules, constraints, choices, non-ground facts.
    Other { has_body: bool },
}

pub fn classify(stmt: &str) -> StatementKind {
    let clean = strip_comments(stmt);
    let body = clean.trim();
    if body.starts_with('#') {
        return StatementKind::Directive;
    }
    let body = body.strip_suffix('.').unwrap_or(body);
    let has_body = body.contains(":-") || body.contains(":~");
    if !has_body {
        if let Ok(t) = parse_term(body) {
            if matches!(t, Term::Constant(_) | Term::Function(..)) {
                return StatementKind::Fact(t);
            }
        }
    }
    StatementKind::Other { has_body }
}

/// One `@name(` occurrence outside strings and comments.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExternalCall {
    pub at: usize,
    pub name: String,
}

pub fn external_calls(src: &str) -> Vec<ExternalCall> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'%' => i = skip_comment(bytes, i).unwrap_or(bytes.len()),
            b'"' => i = skip_string(bytes, i).unwrap_or(bytes.len()),
            b'@' => {
                let mut j = i + 1;
                while j < bytes.len() && (bytes[j].is_ascii_alphanumeric() || bytes[j] == b'_') {
                    j += 1;
                }
                if j > i + 1 {
                    out.push(ExternalCall {
                        at: i,
                        name: src[i + 1..j].to_string(),
                    });
                }
                i = j.max(i + 1);
            }
            _ => i += 1,
        }
    }
    out
}

impl fmt::Display for ProgramBundle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.concatenate().0)
    }
}
