//! `_context_value(K[,T[,D]])` placeholder resolution.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::term::{parse_term, Term};

pub const PLACEHOLDER: &str = "_context_value";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ContextError {
    #[error("no context value for key {0}")]
    MissingContextKey(String),
    #[error("context value {value:?} for key {key} is not of type {kind}")]
    InvalidValue {
        key: String,
        kind: String,
        value: String,
    },
    #[error("malformed placeholder {0}")]
    MalformedPlaceholder(Term),
}

/// Key/value strings as sent along with an operation. Later entries for
/// the same key win.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Context(BTreeMap<String, String>);

impl Context {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.0.insert(key.into(), value.into());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl<K: Into<String>, V: Into<String>> FromIterator<(K, V)> for Context {
    fn from_iter<I: IntoIterator<Item = (K, V)>>(iter: I) -> Self {
        let mut c = Context::new();
        for (k, v) in iter {
            c.insert(k, v);
        }
        c
    }
}

/// Keys are written as constants or strings in encodings.
fn key_text(t: &Term) -> Option<String> {
    match t {
        Term::Constant(_) | Term::Str(_) | Term::Number(_) => Some(t.unquoted()),
        _ => None,
    }
}

fn typed(key: &str, kind: Option<&str>, raw: &str) -> Result<Term, ContextError> {
    let invalid = |kind: &str| ContextError::InvalidValue {
        key: key.to_string(),
        kind: kind.to_string(),
        value: raw.to_string(),
    };
    match kind {
        Some("str") => Ok(Term::string(raw)),
        Some("int") => raw.trim().parse::<i64>().map(Term::Number).map_err(|_| invalid("int")),
        Some("const") => parse_term(raw.trim()).map_err(|_| invalid("const")),
        Some(other) => Err(invalid(other)),
        // untyped: whatever reads as a term is a term, everything else text
        None => Ok(parse_term(raw.trim()).unwrap_or_else(|_| Term::string(raw))),
    }
}

fn resolve_placeholder(args: &[Term], ctx: &Context, whole: &Term) -> Result<Term, ContextError> {
    let malformed = || ContextError::MalformedPlaceholder(whole.clone());
    if args.is_empty() || args.len() > 3 {
        return Err(malformed());
    }
    let key = key_text(&args[0]).ok_or_else(malformed)?;
    let kind = match args.get(1) {
        Some(Term::Constant(k)) => Some(k.as_str()),
        Some(_) => return Err(malformed()),
        None => None,
    };
    match (ctx.get(&key), args.get(2)) {
        (Some(raw), _) => typed(&key, kind, raw),
        (None, Some(default)) => Ok(default.clone()),
        (None, None) => Err(ContextError::MissingContextKey(key)),
    }
}

/// Replaces every placeholder in `t`, innermost first.
pub fn resolve(t: &Term, ctx: &Context) -> Result<Term, ContextError> {
    match t {
        Term::Function(name, args) => {
            let args = args
                .iter()
                .map(|a| resolve(a, ctx))
                .collect::<Result<Vec<_>, _>>()?;
            if name == PLACEHOLDER {
                resolve_placeholder(&args, ctx, t)
            } else {
                Ok(Term::Function(name.clone(), args))
            }
        }
        Term::Constant(name) if name == PLACEHOLDER => Err(ContextError::MalformedPlaceholder(t.clone())),
        Term::Tuple(args) => Ok(Term::Tuple(
            args.iter()
                .map(|a| resolve(a, ctx))
                .collect::<Result<_, _>>()?,
        )),
        other => Ok(other.clone()),
    }
}

pub fn contains_placeholder(t: &Term) -> bool {
    t.name() == Some(PLACEHOLDER) || t.args().iter().any(contains_placeholder)
}
